//! Turns a [`SimConfig`] into a stepper and an initial state.

use clipflow_core::dynamics::{asymptotic_step, gol_step, lenia_step, EcosystemSystem, Extension, LeniaSystem};
use clipflow_core::field::{blob_field, random_board, random_field, read_field_file, single_cell_field};
use clipflow_core::operators::{GrowthSpec, KernelSpec};
use clipflow_core::{ClipBounds, MultiField, Result, ScalarField};

use crate::config::{ConfigError, GridConfig, InitSpec, Model, SimConfig};
use crate::error::{CliError, CliResult};

/// The update rule of one configured model.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Dynamics {
    Lenia(LeniaSystem),
    Asymptotic(LeniaSystem),
    Gol,
    Extension(EcosystemSystem),
}

impl Dynamics {
    pub fn step(&self, state: &MultiField, t: f64) -> Result<MultiField> {
        match self {
            Dynamics::Lenia(sys) => MultiField::single(lenia_step(state.channel(0), sys, t)?),
            Dynamics::Asymptotic(sys) => MultiField::single(asymptotic_step(state.channel(0), sys, t)?),
            Dynamics::Gol => MultiField::single(gol_step(state.channel(0))?),
            Dynamics::Extension(sys) => sys.step(state, t),
        }
    }

    pub fn creature_channels(&self) -> Vec<usize> {
        match self {
            Dynamics::Extension(sys) => sys.creature_channels(),
            _ => vec![0],
        }
    }

    /// `max |G|` for clipped Lenia, which bounds the per-step sup change by
    /// `t_step * max |G|`.
    pub fn speed_bound(&self) -> Option<f64> {
        match self {
            Dynamics::Lenia(sys) => Some(sys.max_growth()),
            _ => None,
        }
    }
}

/// A configured model ready to run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub dynamics: Dynamics,
    pub initial: MultiField,
}

/// Discretizes a kernel and pairs it with a growth, checking the kernel fits
/// the grid.
pub fn lenia_system(
    kernel: &KernelSpec,
    growth: &GrowthSpec,
    grid: GridConfig,
    bounds: ClipBounds,
    key: &str,
) -> CliResult<LeniaSystem> {
    let k = kernel.discretize(grid.dx)?;
    if k.side() > grid.width || k.side() > grid.height {
        return Err(ConfigError {
            line: None,
            key: key.to_string(),
            message: format!(
                "kernel spans {} cells, more than the {}x{} grid",
                k.side(),
                grid.width,
                grid.height
            ),
        }
        .into());
    }
    Ok(LeniaSystem::with_bounds(k, growth.clone(), bounds)?)
}

/// The first species of any non-GoL model.
pub fn primary_system(cfg: &SimConfig) -> CliResult<LeniaSystem> {
    lenia_system(&cfg.kernel, &cfg.growth, cfg.grid, cfg.bounds, "kernel.type")
}

/// Builds one channel. Random generators draw from `seed`; `gol` random
/// boards are binary with the configured density.
pub fn generate(
    spec: &InitSpec,
    grid: GridConfig,
    bounds: ClipBounds,
    seed: u64,
    binary: bool,
) -> CliResult<ScalarField> {
    let (w, h, dx) = (grid.width, grid.height, grid.dx);
    let field = match spec {
        InitSpec::Blob { cx, cy, radius, peak } => blob_field(w, h, dx, bounds, *cx, *cy, *radius, *peak)?,
        InitSpec::Random { density, .. } if binary => random_board(w, h, *density, seed)?.with_bounds(bounds)?,
        InitSpec::Random { low, high, .. } => {
            let range = ClipBounds::new(*low, *high)?;
            let f = random_field(w, h, dx, range, seed)?;
            ScalarField::new(w, h, dx, bounds, f.into_values())?
        }
        InitSpec::SingleCell { x, y, value } => single_cell_field(w, h, dx, bounds, *x, *y, *value)?,
        InitSpec::Constant(v) => ScalarField::filled(w, h, dx, bounds, *v)?,
        InitSpec::File { path, channel } => {
            let data = read_field_file(path)?;
            if *channel >= data.channel_count() {
                return Err(CliError::Usage(format!(
                    "{} has {} channel(s), channel {channel} requested",
                    path.display(),
                    data.channel_count()
                )));
            }
            if data.width() != w || data.height() != h {
                return Err(CliError::Usage(format!(
                    "{} is {}x{}, the grid is {w}x{h}",
                    path.display(),
                    data.width(),
                    data.height()
                )));
            }
            let values = data.into_channels().swap_remove(*channel).into_values();
            ScalarField::new(w, h, dx, bounds, values)?
        }
    };
    Ok(field)
}

/// Builds the stepper and the initial state. Channel seeds are `seed` for
/// `init`, `seed + 1` for `init2` and `seed + 2` for `food`.
pub fn build(cfg: &SimConfig) -> CliResult<Simulation> {
    let grid = cfg.grid;
    let binary = cfg.model == Model::Gol;
    let init = generate(&cfg.init, grid, cfg.bounds, cfg.seed, binary)?;
    let init2 = cfg
        .init2
        .as_ref()
        .map(|s| generate(s, grid, cfg.bounds, cfg.seed.wrapping_add(1), false))
        .transpose()?;
    let food = cfg
        .food
        .as_ref()
        .map(|s| generate(s, grid, cfg.food_bounds, cfg.seed.wrapping_add(2), false))
        .transpose()?;

    let prey = match (&cfg.kernel2, &cfg.growth2) {
        (Some(k), Some(g)) => Some(lenia_system(k, g, grid, cfg.bounds, "kernel2.type")?),
        _ => None,
    };
    let extension = |variant: Extension, static_food: Option<ScalarField>| -> CliResult<Dynamics> {
        Ok(Dynamics::Extension(EcosystemSystem::new(
            variant,
            primary_system(cfg)?,
            prey.clone(),
            static_food,
            cfg.food_bounds,
        )?))
    };
    let food_field = || food.clone().expect("food is required by the parser");

    let (dynamics, channels) = match cfg.model {
        Model::Lenia => (Dynamics::Lenia(primary_system(cfg)?), vec![init]),
        Model::Asymptotic => (Dynamics::Asymptotic(primary_system(cfg)?), vec![init]),
        Model::Gol => (Dynamics::Gol, vec![init]),
        Model::Food => (extension(Extension::FoodGrowth, Some(food_field()))?, vec![init]),
        Model::DepletingFood => (extension(Extension::DepletingFood, None)?, vec![init, food_field()]),
        Model::PredatorPrey => (
            extension(Extension::PredatorPrey, None)?,
            vec![init, init2.expect("prey init is always set")],
        ),
        Model::Ecosystem => (
            extension(Extension::Ecosystem, None)?,
            vec![init, init2.expect("prey init is always set"), food_field()],
        ),
    };
    Ok(Simulation {
        dynamics,
        initial: MultiField::new(channels)?,
    })
}
