//! Steppers: the Lenia arc field and its Euler curves, Game of Life in both
//! forms, Asymptotic Lenia, and the feeding and predation extensions.
//!
//! Every stepper returns a fresh field and leaves its input untouched.

mod extensions;

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::clipcore::{clip_between, ClipBounds};
use crate::error::{Error, Result};
use crate::field::{MultiField, ScalarField, SupMetric};
use crate::operators::{convolve_values, direct_values, DiscreteKernel, GrowthSpec, KernelShape, KernelSpec};

pub use extensions::{
    combined_step, depleting_food_step, ecosystem_lipschitz_constant, ecosystem_step, ecosystem_vector_field,
    food_step, predator_prey_step, EcosystemSystem, Extension,
};

/// How a system evaluates `K * f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionPath {
    /// FFT on power-of-two grids, direct otherwise.
    #[default]
    Auto,
    /// Always the direct sum. Cells whose kernel neighborhood is empty get an
    /// exact zero response instead of FFT round-off.
    Direct,
}

/// The pair `(K, G)` defining `X_t(f) = [f + t G(K * f)]` clipped to `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeniaSystem {
    pub kernel: DiscreteKernel,
    pub growth: GrowthSpec,
    pub bounds: ClipBounds,
    pub convolution: ConvolutionPath,
}

impl LeniaSystem {
    /// A system on the unit interval.
    pub fn new(kernel: DiscreteKernel, growth: GrowthSpec) -> Result<Self> {
        Self::with_bounds(kernel, growth, ClipBounds::UNIT)
    }

    pub fn with_bounds(kernel: DiscreteKernel, growth: GrowthSpec, bounds: ClipBounds) -> Result<Self> {
        growth.validate()?;
        if !(bounds.lower() < bounds.upper()) || !bounds.is_finite() {
            return Err(Error::InvalidBounds {
                lower: bounds.lower(),
                upper: bounds.upper(),
            });
        }
        Ok(LeniaSystem {
            kernel,
            growth,
            bounds,
            convolution: ConvolutionPath::Auto,
        })
    }

    pub fn with_convolution(mut self, path: ConvolutionPath) -> Self {
        self.convolution = path;
        self
    }

    /// Bound on `|K * f|` over states inside `bounds`.
    pub fn response_bound(&self) -> f64 {
        self.kernel.l1_norm() * self.bounds.lower().abs().max(self.bounds.upper().abs())
    }

    /// `max |G|` over reachable kernel responses: the global speed of the
    /// arc field.
    pub fn max_growth(&self) -> f64 {
        self.growth.max_abs(self.response_bound())
    }

    /// `C_G ||K||_1`, or an error for a discontinuous growth function.
    pub fn lipschitz_constant(&self) -> Result<f64> {
        crate::operators::lipschitz_bound(&self.growth, &self.kernel)
    }

    pub(crate) fn check_state(&self, f: &ScalarField) -> Result<()> {
        if f.bounds() != self.bounds {
            return Err(Error::InvalidField(format!(
                "state bounds [{}, {}] differ from system bounds [{}, {}]",
                f.bounds().lower(),
                f.bounds().upper(),
                self.bounds.lower(),
                self.bounds.upper()
            )));
        }
        Ok(())
    }

    /// `G(K * f)` per cell.
    pub(crate) fn growth_values(&self, f: &ScalarField) -> Result<Vec<f64>> {
        let mut u = match self.convolution {
            ConvolutionPath::Auto => convolve_values(f, &self.kernel)?,
            ConvolutionPath::Direct => crate::operators::convolve_direct(f, &self.kernel)?.into_values(),
        };
        let g = &self.growth;
        u.par_iter_mut().for_each(|v| *v = g.eval(*v));
        Ok(u)
    }
}

/// A map `X: M x [0, 1] -> M` with `X_0 = id`, stepped by [`ArcField::step`].
pub trait ArcField: Sync {
    type State: Clone + SupMetric + Send + Sync;

    fn step(&self, state: &Self::State, t: f64) -> Result<Self::State>;

    /// `X_{t/n}` composed `n` times.
    fn euler_curve(&self, start: &Self::State, t: f64, n: usize) -> Result<Self::State> {
        if n == 0 {
            return Err(Error::InvalidArgument("an Euler curve needs n >= 1".into()));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::StepSize(t));
        }
        let dt = t / n as f64;
        check_step(dt)?;
        let mut f = self.step(start, dt)?;
        for _ in 1..n {
            f = self.step(&f, dt)?;
        }
        Ok(f)
    }
}

impl ArcField for LeniaSystem {
    type State = ScalarField;

    fn step(&self, state: &ScalarField, t: f64) -> Result<ScalarField> {
        lenia_step(state, self, t)
    }

    fn euler_curve(&self, start: &ScalarField, t: f64, n: usize) -> Result<ScalarField> {
        euler_flow(start, self, t, n)
    }
}

/// The clip-free dynamics of [`asymptotic_step`] as an arc field.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticLenia(pub LeniaSystem);

impl ArcField for AsymptoticLenia {
    type State = ScalarField;

    fn step(&self, state: &ScalarField, t: f64) -> Result<ScalarField> {
        asymptotic_step(state, &self.0, t)
    }
}

impl ArcField for EcosystemSystem {
    type State = MultiField;

    fn step(&self, state: &MultiField, t: f64) -> Result<MultiField> {
        EcosystemSystem::step(self, state, t)
    }
}

/// Rejects step sizes outside the arc-field domain `[0, 1]`.
pub fn check_step(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::StepSize(t))
    }
}

/// One arc-field step `[f + t G(K * f)]` clipped to the system bounds.
pub fn lenia_step(f: &ScalarField, sys: &LeniaSystem, t: f64) -> Result<ScalarField> {
    check_step(t)?;
    sys.check_state(f)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let g = sys.growth_values(f)?;
    let (a, b) = (sys.bounds.lower(), sys.bounds.upper());
    let values = f
        .values()
        .par_iter()
        .zip(g.par_iter())
        .map(|(&x, &gx)| clip_between(x + t * gx, a, b))
        .collect();
    Ok(f.like(values))
}

/// The Euler curve `X_{t/n}` composed `n` times.
pub fn euler_flow(f0: &ScalarField, sys: &LeniaSystem, t: f64, n: usize) -> Result<ScalarField> {
    euler_flow_observed(f0, sys, t, n, |_, _| {})
}

/// [`euler_flow`], calling `observe(k, state)` for `k = 0..=n` with the state
/// after `k` compositions.
pub fn euler_flow_observed(
    f0: &ScalarField,
    sys: &LeniaSystem,
    t: f64,
    n: usize,
    mut observe: impl FnMut(usize, &ScalarField),
) -> Result<ScalarField> {
    if n == 0 {
        return Err(Error::InvalidArgument("euler_flow needs n >= 1".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::StepSize(t));
    }
    let dt = t / n as f64;
    check_step(dt)?;
    sys.check_state(f0)?;
    observe(0, f0);
    let mut f = lenia_step(f0, sys, dt)?;
    observe(1, &f);
    for k in 2..=n {
        f = lenia_step(&f, sys, dt)?;
        observe(k, &f);
    }
    Ok(f)
}

/// The right-hand side `V(f)`: `G(K * f)` in the interior, its positive part
/// at the lower bound and its negative part at the upper bound.
pub fn forward_derivative_field(f: &ScalarField, sys: &LeniaSystem) -> Result<ScalarField> {
    sys.check_state(f)?;
    let g = sys.growth_values(f)?;
    let (a, b) = (sys.bounds.lower(), sys.bounds.upper());
    let values = f
        .values()
        .par_iter()
        .zip(g.par_iter())
        .map(|(&x, &gx)| {
            if x <= a {
                gx.max(0.0)
            } else if x >= b {
                gx.min(0.0)
            } else {
                gx
            }
        })
        .collect();
    Ok(f.like_unbounded(values))
}

fn check_board(board: &ScalarField) -> Result<()> {
    if board.dx() != 1.0 {
        return Err(Error::Domain(format!(
            "game of life boards need dx = 1, got {}",
            board.dx()
        )));
    }
    if board.width() < 3 || board.height() < 3 {
        return Err(Error::Dimension(format!(
            "game of life boards need at least 3x3 cells, got {}x{}",
            board.width(),
            board.height()
        )));
    }
    if let Some((i, v)) = board
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| **v != 0.0 && **v != 1.0)
    {
        return Err(Error::Domain(format!("non-binary value {v} at index {i}")));
    }
    if !board.bounds().contains(0.0) || !board.bounds().contains(1.0) {
        return Err(Error::Domain("board bounds must contain 0 and 1".into()));
    }
    Ok(())
}

/// Conway's rule with the neighbor sum taken over the full 3x3 block, center
/// included: a dead cell is born at sum 3, a live cell survives at sum 3 or 4.
pub fn gol_step(board: &ScalarField) -> Result<ScalarField> {
    check_board(board)?;
    let (w, h) = (board.width(), board.height());
    let v = board.values();
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let rows = [(y + h - 1) % h, y, (y + 1) % h];
        for (x, cell) in row.iter_mut().enumerate() {
            let cols = [(x + w - 1) % w, x, (x + 1) % w];
            let mut sum = 0u32;
            for &ry in &rows {
                for &cx in &cols {
                    sum += (v[ry * w + cx] == 1.0) as u32;
                }
            }
            let alive = v[y * w + x] == 1.0;
            let next = if alive { sum == 3 || sum == 4 } else { sum == 3 };
            *cell = if next { 1.0 } else { 0.0 };
        }
    });
    Ok(board.like(out))
}

pub(crate) fn gol_kernel() -> &'static DiscreteKernel {
    static KERNEL: OnceLock<DiscreteKernel> = OnceLock::new();
    KERNEL.get_or_init(|| {
        KernelSpec::new(KernelShape::GoL)
            .discretize(1.0)
            .expect("the game of life kernel is valid")
    })
}

/// Game of Life as a clipped Lenia step with `t = 1`: the 3x3 kernel with
/// center weight 1/2 and the indicator growth on `[2.5, 3.5]`. Direct
/// convolution keeps every sum an exact binary fraction.
pub fn gol_step_conv(board: &ScalarField) -> Result<ScalarField> {
    check_board(board)?;
    let u = direct_values(board, gol_kernel());
    let values = board
        .values()
        .iter()
        .zip(&u)
        .map(|(&x, &ux)| clip_between(x + GrowthSpec::GoL.eval(ux), 0.0, 1.0))
        .collect();
    Ok(board.like(values))
}

/// Asymptotic Lenia: `(1 - dt) f + dt T(K * f)` with `T = (G + 1) / 2`.
///
/// No clip is applied. When `G` takes values in `[-1, 1]` the result is a
/// convex combination of numbers in `[0, 1]` and stays there under rounding.
pub fn asymptotic_step(f: &ScalarField, sys: &LeniaSystem, dt: f64) -> Result<ScalarField> {
    check_step(dt)?;
    sys.check_state(f)?;
    if sys.bounds != ClipBounds::UNIT {
        return Err(Error::Hypothesis("asymptotic lenia lives on [0, 1]".into()));
    }
    if sys.max_growth() > 1.0 {
        return Err(Error::Hypothesis(format!(
            "growth range must lie in [-1, 1] so that T maps into [0, 1] (max |G| = {})",
            sys.max_growth()
        )));
    }
    let g = sys.growth_values(f)?;
    let keep = 1.0 - dt;
    let values = f
        .values()
        .par_iter()
        .zip(g.par_iter())
        .map(|(&x, &gx)| keep * x + dt * ((gx + 1.0) / 2.0))
        .collect();
    Ok(f.like(values))
}
