//! Scalar clip algebra.
//!
//! `[x]_a^b = min(max(x, a), b)` is the saturation that keeps Lenia states
//! inside their range. It is evaluated with IEEE `max`/`min` only, so the
//! order-theoretic properties (idempotence, monotonicity, the 1-Lipschitz
//! bound) hold bit-exactly. Algebraic identities that need an addition or a
//! multiplication are checked against a small absolute tolerance instead.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};

/// Absolute tolerance for identities that rearrange sums or products.
pub const ALGEBRAIC_TOLERANCE: f64 = 1e-12;

/// A closed interval `[lower, upper]` on the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipBounds {
    lower: f64,
    upper: f64,
}

impl ClipBounds {
    /// The unit interval, the state space of a Lenia creature.
    pub const UNIT: ClipBounds = ClipBounds { lower: 0.0, upper: 1.0 };

    /// The whole extended real line; clipping against it is the identity.
    pub const UNBOUNDED: ClipBounds = ClipBounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        // NaN fails the comparison as well.
        if !(lower <= upper) {
            return Err(Error::InvalidBounds { lower, upper });
        }
        Ok(ClipBounds { lower, upper })
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    #[inline]
    pub fn clip(&self, x: f64) -> f64 {
        clip_high(clip_low(x, self.lower), self.upper)
    }
}

/// `[x]_a^b`.
#[inline]
pub fn clip(x: f64, bounds: ClipBounds) -> f64 {
    bounds.clip(x)
}

/// Two-sided clip with unvalidated bounds. Callers guarantee `a <= b`.
#[inline]
pub(crate) fn clip_between(x: f64, a: f64, b: f64) -> f64 {
    clip_high(clip_low(x, a), b)
}

/// `[x]_a = max(x, a)`.
#[inline]
pub fn clip_low(x: f64, a: f64) -> f64 {
    x.max(a)
}

/// `[x]^b = min(x, b)`.
#[inline]
pub fn clip_high(x: f64, b: f64) -> f64 {
    x.min(b)
}

/// The one-dimensional arc field `X_t(x) = [x - t]_0`: move down at unit
/// speed until the absorbing barrier at zero.
pub fn toy_arcfield_step(x: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("toy arc field needs t >= 0, got {t}")));
    }
    Ok(clip_low(x - t, 0.0))
}

/// Semigroup defect `|X_{s+t}(x) - X_t(X_s(x))|` of the toy arc field.
pub fn toy_semigroup_defect(x: f64, s: f64, t: f64) -> Result<f64> {
    let direct = toy_arcfield_step(x, s + t)?;
    let composed = toy_arcfield_step(toy_arcfield_step(x, s)?, t)?;
    Ok((direct - composed).abs())
}

/// Draws `samples` triples `(x, s, t)` on a dyadic lattice (multiples of
/// `2^-20`, `|x| <= 16`, `s, t` in `[0, 1]`) and returns the largest
/// semigroup defect. On that lattice every sum and difference is exact, so
/// the expected value is exactly zero.
pub fn toy_semigroup_scan(samples: usize, seed: u64) -> f64 {
    const GRID: f64 = 1.0 / 1_048_576.0;
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = rng.random_range(-(16i64 << 20)..=(16i64 << 20)) as f64 * GRID;
        let s = rng.random_range(0..=(1i64 << 20)) as f64 * GRID;
        let t = rng.random_range(0..=(1i64 << 20)) as f64 * GRID;
        let defect = toy_semigroup_defect(x, s, t).expect("nonnegative times");
        worst = worst.max(defect);
    }
    worst
}

/// Result of checking one group of clip identities.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub samples: usize,
    pub max_violation: f64,
    /// Zero for pure min/max compositions.
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.max_violation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    /// `identity_name,samples,max_violation`, one row per identity group.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity_name,samples,max_violation\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{},{:e}", c.name, c.samples, c.max_violation);
        }
        out
    }
}

/// Names of the identity groups in report order.
pub const IDENTITY_GROUPS: [&str; 12] = [
    "scaling_positive",
    "scaling_negative",
    "shift_two_sided",
    "shift_upper",
    "shift_lower",
    "decomposition",
    "difference_decomposition",
    "nesting",
    "lipschitz",
    "bound_perturbation",
    "three_point",
    "magnitude",
];

struct Sampler {
    rng: SplitMix64,
}

impl Sampler {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..=hi)
    }

    fn value(&mut self) -> f64 {
        self.uniform(-10.0, 10.0)
    }

    fn sorted<const N: usize>(&mut self) -> [f64; N] {
        let mut v = [0.0; N];
        for slot in v.iter_mut() {
            *slot = self.value();
        }
        v.sort_by(f64::total_cmp);
        v
    }

    /// `|r|` log-uniform in `[1e-6, 1e6]`.
    fn scale(&mut self) -> f64 {
        let exponent = self.uniform(-6.0, 6.0);
        10f64.powf(exponent)
    }

    fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }
}

fn max_in(slot: &mut f64, v: f64) {
    // NaN would otherwise be swallowed by f64::max.
    if v.is_nan() || v > *slot {
        *slot = v;
    }
}

/// Randomized check of the clip identities and inequalities.
///
/// Equalities report `|lhs - rhs|`; inequalities `lhs <= rhs` report
/// `lhs - rhs` (positive means violated). Scaling samples keep the scaled
/// point and the bounds inside `[-1, 1]` so `x = z / r` stays within `1e6`.
pub fn verify_clip_identities(sample_count: usize, seed: u64) -> Result<IdentityReport> {
    if sample_count == 0 {
        return Err(Error::InvalidArgument("sample_count must be >= 1".into()));
    }
    let mut s = Sampler {
        rng: SplitMix64::seed_from_u64(seed),
    };
    let mut worst = [f64::NEG_INFINITY; 12];

    for _ in 0..sample_count {
        // Scaling, r > 0: [r x]_a^b = r [x]_{a/r}^{b/r}.
        {
            let r = s.scale();
            let z = s.uniform(-1.0, 1.0);
            let (mut a, mut b) = (s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0));
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            let x = z / r;
            let lhs = clip_between(r * x, a, b);
            let rhs = r * clip_between(x, a / r, b / r);
            max_in(&mut worst[0], (lhs - rhs).abs());

            // r < 0 mirrors the bounds: [r x]_a^b = r [x]_{b/r}^{a/r}.
            let r = -r;
            let x = z / r;
            let lhs = clip_between(r * x, a, b);
            let rhs = r * clip_between(x, b / r, a / r);
            max_in(&mut worst[1], (lhs - rhs).abs());
        }

        // Shifts.
        {
            let (x, y) = (s.value(), s.value());
            let [a, b] = s.sorted::<2>();
            let lhs = clip_between(x + y, a, b);
            let rhs = clip_between(x, a - y, b - y) + y;
            max_in(&mut worst[2], (lhs - rhs).abs());

            let lhs = clip_high(x + y, b);
            let rhs = clip_high(x, b - y) + y;
            max_in(&mut worst[3], (lhs - rhs).abs());

            let lhs = clip_low(x + y, a);
            let rhs = clip_low(x, a - y) + y;
            max_in(&mut worst[4], (lhs - rhs).abs());
        }

        // [x]_a^b = [x]^b - [x]^a + a.
        {
            let x = s.value();
            let [a, b] = s.sorted::<2>();
            let lhs = clip_between(x, a, b);
            let rhs = clip_high(x, b) - clip_high(x, a) + a;
            max_in(&mut worst[5], (lhs - rhs).abs());
        }

        // [x]_a^b - [x]_c^d = [x]_d^b - [x]_c^a - (d - a) for c <= a, d <= b.
        {
            let x = s.value();
            let [v0, v1, v2, v3] = s.sorted::<4>();
            let (c, b) = (v0, v3);
            let (a, d) = if s.coin() { (v1, v2) } else { (v2, v1) };
            let lhs = clip_between(x, a, b) - clip_between(x, c, d);
            let rhs = clip_between(x, d, b) - clip_between(x, c, a) - (d - a);
            max_in(&mut worst[6], (lhs - rhs).abs());
        }

        // Nesting and band-pass composition, exact.
        {
            let x = s.value();
            let [p, q] = s.sorted::<2>();
            let (a, c) = (s.uniform(-10.0, p), s.uniform(-10.0, p));
            let (b, d) = (s.uniform(q, 10.0), s.uniform(q, 10.0));
            let nested = clip_between(clip_between(x, a, b), c, d);
            let merged = clip_between(x, a.max(c), b.min(d));
            let mut v = (nested - merged).abs();
            let low_first = clip_high(clip_low(x, a), b);
            let high_first = clip_low(clip_high(x, b), a);
            v = v.max((low_first - high_first).abs());
            max_in(&mut worst[7], v);
        }

        // 1-Lipschitz, two-sided and one-sided.
        {
            let (x, y) = (s.value(), s.value());
            let [a, b] = s.sorted::<2>();
            let dist = (x - y).abs();
            let v = [
                (clip_between(x, a, b) - clip_between(y, a, b)).abs() - dist,
                (clip_high(x, b) - clip_high(y, b)).abs() - dist,
                (clip_low(x, a) - clip_low(y, a)).abs() - dist,
            ];
            max_in(&mut worst[8], v.into_iter().fold(f64::NEG_INFINITY, f64::max));
        }

        // Bound perturbation and its generalization with a second point.
        {
            let (x, y) = (s.value(), s.value());
            let [a, b] = s.sorted::<2>();
            let [c, d] = s.sorted::<2>();
            let bound = (a - c).abs().max((b - d).abs());
            let v1 = (clip_between(x, a, b) - clip_between(x, c, d)).abs() - bound;
            let v2 = (clip_between(x, a, b) - clip_between(y, c, d)).abs() - (x - y).abs().max(bound);
            max_in(&mut worst[9], v1.max(v2));
        }

        // 0 <= [x]_b^c - [x]_a^b <= c - a for a <= b <= c.
        {
            let x = s.value();
            let [a, b, c] = s.sorted::<3>();
            let gap = clip_between(x, b, c) - clip_between(x, a, b);
            max_in(&mut worst[10], (-gap).max(gap - (c - a)));
        }

        // |[x]_a^b| <= |x| whenever a <= 0 <= b.
        {
            let x = s.value();
            let a = s.uniform(-10.0, 0.0);
            let b = s.uniform(0.0, 10.0);
            max_in(&mut worst[11], clip_between(x, a, b).abs() - x.abs());
        }
    }

    let exact = [
        false, false, false, false, false, false, false, true, true, true, true, true,
    ];
    let checks = IDENTITY_GROUPS
        .iter()
        .zip(worst)
        .zip(exact)
        .map(|((&name, w), exact)| IdentityCheck {
            name,
            samples: sample_count,
            // Inequalities that are slack everywhere report a negative margin.
            max_violation: w.max(0.0),
            tolerance: if exact { 0.0 } else { ALGEBRAIC_TOLERANCE },
        })
        .collect();
    Ok(IdentityReport { checks })
}
