use std::f64::consts::{E, LN_2};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Growth (activation) function applied to the kernel response.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthSpec {
    /// `2 * 1_[2.5, 3.5](u) - 1`, both endpoints included.
    GoL,
    /// `2 * exp(-(u - mu)^2 / (2 sigma^2)) - 1`.
    GaussianBump {
        mu: f64,
        sigma: f64,
    },
    Constant(f64),
    /// `max(u, 0)`.
    Rectifier,
    /// Piecewise linear through `(u, G(u))` breakpoints with strictly
    /// increasing `u`, constant beyond the end points.
    Table(Vec<(f64, f64)>),
}

impl GrowthSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GrowthSpec::GoL | GrowthSpec::Rectifier => Ok(()),
            GrowthSpec::GaussianBump { mu, sigma } => {
                if !mu.is_finite() || !(*sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidGrowth(format!(
                        "gaussian bump needs finite mu and sigma > 0 (mu = {mu}, sigma = {sigma})"
                    )));
                }
                Ok(())
            }
            GrowthSpec::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::InvalidGrowth(format!("constant growth {c} is not finite")));
                }
                Ok(())
            }
            GrowthSpec::Table(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidGrowth("table growth needs a breakpoint".into()));
                }
                if points.iter().any(|(u, v)| !u.is_finite() || !v.is_finite()) {
                    return Err(Error::InvalidGrowth("table breakpoints must be finite".into()));
                }
                if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return Err(Error::InvalidGrowth(
                        "table breakpoints must have strictly increasing inputs".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            GrowthSpec::GoL => {
                if (2.5..=3.5).contains(&u) {
                    1.0
                } else {
                    -1.0
                }
            }
            GrowthSpec::GaussianBump { mu, sigma } => {
                let z = u - mu;
                2.0 * (-(z * z) / (2.0 * sigma * sigma)).exp() - 1.0
            }
            GrowthSpec::Constant(c) => *c,
            GrowthSpec::Rectifier => u.max(0.0),
            GrowthSpec::Table(points) => table_eval(points, u),
        }
    }

    /// Asymptotic-Lenia target `T = (G + 1) / 2`.
    #[inline]
    pub fn target(&self, u: f64) -> f64 {
        (self.eval(u) + 1.0) / 2.0
    }

    pub fn is_lipschitz(&self) -> bool {
        !matches!(self, GrowthSpec::GoL)
    }

    /// Analytic Lipschitz constant `C_G`; `None` for the GoL indicator.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self {
            GrowthSpec::GoL => None,
            GrowthSpec::GaussianBump { sigma, .. } => Some(2.0 / (sigma * E.sqrt())),
            GrowthSpec::Constant(_) => Some(0.0),
            GrowthSpec::Rectifier => Some(1.0),
            GrowthSpec::Table(points) => Some(
                points
                    .windows(2)
                    .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                    .fold(0.0, f64::max),
            ),
        }
    }

    /// `sup |G(u)|` over inputs with `|u| <= input_bound`. Only the rectifier
    /// depends on the bound.
    pub fn max_abs(&self, input_bound: f64) -> f64 {
        match self {
            GrowthSpec::GoL | GrowthSpec::GaussianBump { .. } => 1.0,
            GrowthSpec::Constant(c) => c.abs(),
            GrowthSpec::Rectifier => input_bound.max(0.0),
            GrowthSpec::Table(points) => points.iter().map(|p| p.1.abs()).fold(0.0, f64::max),
        }
    }

    /// `sup max(G(u), 0)` over inputs with `|u| <= input_bound`.
    pub fn positive_max(&self, input_bound: f64) -> f64 {
        match self {
            GrowthSpec::GoL | GrowthSpec::GaussianBump { .. } => 1.0,
            GrowthSpec::Constant(c) => c.max(0.0),
            GrowthSpec::Rectifier => input_bound.max(0.0),
            GrowthSpec::Table(points) => points.iter().map(|p| p.1).fold(0.0, f64::max),
        }
    }

    /// The largest `a` with `G(u) <= 0` for all `|u| <= a` (may be `+inf`).
    /// Fails when no positive `a` exists.
    pub fn quiescent_radius(&self) -> Result<f64> {
        let a = match self {
            GrowthSpec::GoL => 2.5f64.next_down(),
            GrowthSpec::GaussianBump { mu, sigma } => {
                // G > 0 exactly on the open interval mu +- sigma * sqrt(2 ln 2).
                let half = sigma * (2.0 * LN_2).sqrt();
                let (lo, hi) = (mu - half, mu + half);
                if lo > 0.0 {
                    lo
                } else if hi < 0.0 {
                    -hi
                } else {
                    0.0
                }
            }
            GrowthSpec::Constant(c) => {
                if *c <= 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            GrowthSpec::Rectifier => 0.0,
            GrowthSpec::Table(points) => {
                if table_eval(points, 0.0) > 0.0 {
                    0.0
                } else {
                    let up = table_first_positive(points, 1.0);
                    let down = table_first_positive(points, -1.0);
                    up.min(down)
                }
            }
        };
        if a > 0.0 {
            Ok(a)
        } else {
            Err(Error::Hypothesis(format!(
                "growth {self:?} is positive arbitrarily close to 0; no a > 0 with G <= 0 on [-a, a]"
            )))
        }
    }
}

fn table_eval(points: &[(f64, f64)], u: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if u <= first.0 {
        return first.1;
    }
    if u >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|p| p.0 <= u);
    let (u0, v0) = points[i - 1];
    let (u1, v1) = points[i];
    v0 + (v1 - v0) * (u - u0) / (u1 - u0)
}

/// Distance from 0 to the first input (walking in `direction`) beyond which
/// the table is positive somewhere. Assumes `G(0) <= 0`.
fn table_first_positive(points: &[(f64, f64)], direction: f64) -> f64 {
    // Knots along the ray, in walking order, starting from u = 0.
    let mut knots: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 * direction > 0.0)
        .map(|&(u, v)| (u * direction, v))
        .collect();
    if direction < 0.0 {
        knots.reverse();
    }
    let mut prev = (0.0, table_eval(points, 0.0));
    for (dist, v) in knots {
        if v > 0.0 {
            // Linear crossing between prev (<= 0) and this knot.
            return prev.0 + (0.0 - prev.1) / (v - prev.1) * (dist - prev.0);
        }
        prev = (dist, v);
    }
    // Constant extrapolation beyond the last knot.
    if prev.1 > 0.0 {
        prev.0
    } else {
        f64::INFINITY
    }
}

/// Pointwise `G(u)`.
pub fn growth_eval(growth: &GrowthSpec, u: &ScalarField) -> ScalarField {
    let values = u.values().iter().map(|&v| growth.eval(v)).collect();
    u.like_unbounded(values)
}
