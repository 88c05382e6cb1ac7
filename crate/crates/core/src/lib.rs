#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod clipcore;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod operators;

pub use clipcore::{clip, clip_high, clip_low, ClipBounds};
pub use error::{Error, Result};
pub use field::{sup_distance, MultiField, ScalarField, SupMetric};
