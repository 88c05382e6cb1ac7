//! Numerical checks of the arc-field conditions, Euler convergence, tangency,
//! support growth, monotonicity and extinction.
//!
//! Every verifier is a pure function of its system, seed and parameters.
//! Samples run in parallel and merge by maximum, so reports do not depend on
//! the thread count.

use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::clipcore::ClipBounds;
use crate::dynamics::{
    asymptotic_step, check_step, euler_flow_observed, gol_step, gol_step_conv, lenia_step, ArcField, ConvolutionPath,
    LeniaSystem,
};
use crate::error::{Error, Result};
use crate::field::{random_board, random_field, sup_distance, unit_from_u64, ScalarField};
use crate::operators::GrowthSpec;

/// Absolute slack on theorem-backed inequalities.
pub const THEOREM_TOLERANCE: f64 = 1e-12;

/// Slack factor on the implicit constant of condition E2.
pub const E2_SLACK: f64 = 4.0;

/// Shape of the random states drawn by the verifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(width: usize, height: usize, dx: f64) -> Self {
        Grid { width, height, dx }
    }
}

/// One CSV row of a [`ConditionReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBatch {
    pub label: String,
    pub samples: usize,
    /// Largest left-hand side (or ratio) observed in the batch.
    pub max_value: f64,
    pub max_violation: f64,
}

/// Outcome of one verifier. `max_violation` is the largest amount by which
/// the checked inequality failed without slack (negative when it held
/// everywhere); the report passes iff it is at most [`THEOREM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub name: String,
    pub samples: usize,
    /// The constant used on the right-hand side (`Lambda`, the E2 bound, or
    /// `max |G|`).
    pub constant: f64,
    /// `(c1, c2)` of the linear speed growth `rho(r) <= c1 r + c2`.
    pub speed_growth: (f64, f64),
    pub max_violation: f64,
    /// Number of samples whose violation exceeded the tolerance.
    pub violations: usize,
    /// Largest ratio of left- to right-hand side, where the right is positive.
    pub max_ratio: f64,
    pub batches: Vec<ReportBatch>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= THEOREM_TOLERANCE
    }

    /// `CHECK <name> <pass|fail> max_violation=<v> constant=<c>`
    pub fn summary_line(&self) -> String {
        format!(
            "CHECK {} {} max_violation={:.6e} constant={:.6e}",
            self.name,
            if self.passed() { "pass" } else { "fail" },
            self.max_violation,
            self.constant
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,batch,samples,max_value,max_violation\n");
        for b in &self.batches {
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e}",
                self.name, b.label, b.samples, b.max_value, b.max_violation
            );
        }
        out
    }
}

/// Per-sample seeds drawn from one SplitMix64 stream.
fn sample_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}

fn uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_from_u64(rng.next_u64())
}

/// A random state: i.i.d. uniform cells scaled by a random amplitude.
fn random_state(grid: Grid, bounds: ClipBounds, rng: &mut SplitMix64) -> Result<ScalarField> {
    let base = random_field(grid.width, grid.height, grid.dx, bounds, rng.next_u64())?;
    let amplitude = unit_from_u64(rng.next_u64());
    let (a, b) = (bounds.lower(), bounds.upper());
    let values = base
        .values()
        .iter()
        .map(|&v| (a + amplitude * (v - a)).clamp(a, b))
        .collect();
    ScalarField::new(grid.width, grid.height, grid.dx, bounds, values)
}

/// `max(x, y)` that lets NaN lose.
fn fmax(x: f64, y: f64) -> f64 {
    x.max(y)
}

/// Condition E1: `d(X_t f, X_t g) <= (1 + t Lambda) d(f, g)` with
/// `Lambda = C_G ||K||_1`, over random pairs at distance at most 0.1.
pub fn verify_e1(
    sys: &LeniaSystem,
    grid: Grid,
    sample_count: usize,
    seed: u64,
    t_list: &[f64],
) -> Result<ConditionReport> {
    let lambda = sys.lipschitz_constant()?;
    for &t in t_list {
        check_step(t)?;
    }
    let seeds = sample_seeds(seed, sample_count);
    // Per sample: (violation, ratio) for each t.
    let per_sample: Vec<Vec<(f64, f64)>> = seeds
        .par_iter()
        .map(|&s| -> Result<Vec<(f64, f64)>> {
            let mut rng = SplitMix64::seed_from_u64(s);
            let f = random_state(grid, sys.bounds, &mut rng)?;
            let eps = 0.1 * unit_from_u64(rng.next_u64());
            let (a, b) = (sys.bounds.lower(), sys.bounds.upper());
            let g_values = f
                .values()
                .iter()
                .map(|&v| (v + uniform(&mut rng, -eps, eps)).clamp(a, b))
                .collect();
            let g = ScalarField::new(grid.width, grid.height, grid.dx, sys.bounds, g_values)?;
            let d = sup_distance(&f, &g)?;
            t_list
                .iter()
                .map(|&t| {
                    let lhs = sup_distance(&lenia_step(&f, sys, t)?, &lenia_step(&g, sys, t)?)?;
                    let rhs = (1.0 + t * lambda) * d;
                    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
                    Ok((lhs - rhs, ratio))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let batches = t_list
        .iter()
        .enumerate()
        .map(|(j, t)| ReportBatch {
            label: format!("t={t}"),
            samples: sample_count,
            max_value: per_sample.iter().map(|v| v[j].1).fold(0.0, fmax),
            max_violation: per_sample.iter().map(|v| v[j].0).fold(f64::NEG_INFINITY, fmax),
        })
        .collect::<Vec<_>>();
    let all = per_sample.iter().flatten();
    Ok(ConditionReport {
        name: "e1".into(),
        samples: sample_count * t_list.len(),
        constant: lambda,
        speed_growth: (0.0, sys.max_growth()),
        max_violation: all.clone().map(|v| v.0).fold(f64::NEG_INFINITY, fmax),
        violations: all.clone().filter(|v| v.0 > THEOREM_TOLERANCE).count(),
        max_ratio: all.map(|v| v.1).fold(0.0, fmax),
        batches,
    })
}

/// Condition E2: `r(s, t) = d(X_{s+t} f0, X_t X_s f0) / (s t)` over the dyadic
/// grid `s, t = 2^-e` for `e` in `exponents`.
///
/// Passes when `max r <= 4 C_V max|G|` and the ratio shows no divergent
/// trend: consecutive exponents are grouped in pairs and the largest `r` on
/// the last diagonal block may be at most twice the largest on the first.
/// Both conditions are folded into `max_violation`.
pub fn verify_e2(
    sys: &LeniaSystem,
    f0: &ScalarField,
    exponents: std::ops::RangeInclusive<i32>,
) -> Result<ConditionReport> {
    let cv = sys.lipschitz_constant()?;
    let (lo, hi) = (*exponents.start(), *exponents.end());
    if lo < 1 || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "E2 exponents {lo}..={hi} must satisfy 1 <= lo <= hi"
        )));
    }
    let pairs: Vec<(i32, i32)> = (lo..=hi)
        .flat_map(|es| (lo..=hi).map(move |et| (es, et)))
        .filter(|&(es, et)| 2f64.powi(-es) + 2f64.powi(-et) <= 1.0)
        .collect();
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|&(es, et)| {
            let (s, t) = (2f64.powi(-es), 2f64.powi(-et));
            let whole = lenia_step(f0, sys, s + t)?;
            let split = lenia_step(&lenia_step(f0, sys, s)?, sys, t)?;
            Ok(sup_distance(&whole, &split)? / (s * t))
        })
        .collect::<Result<_>>()?;

    let bound = E2_SLACK * cv * sys.max_growth();
    let omega = ratios.iter().copied().fold(0.0, fmax);
    let block_of = |e: i32| (e - lo) / 2;
    let last_block = block_of(hi);
    let mut batches = Vec::new();
    let mut block_max = vec![0.0; last_block as usize + 1];
    for b in 0..=last_block {
        let members: Vec<f64> = pairs
            .iter()
            .zip(&ratios)
            .filter(|((es, et), _)| block_of(*es) == b && block_of(*et) == b)
            .map(|(_, r)| *r)
            .collect();
        let m = members.iter().copied().fold(0.0, fmax);
        block_max[b as usize] = m;
        let first = lo + 2 * b;
        batches.push(ReportBatch {
            label: format!("block 2^-{}..2^-{}", first, (first + 1).min(hi)),
            samples: members.len(),
            max_value: m,
            max_violation: m - bound,
        });
    }
    let trend = if last_block > 0 {
        block_max[last_block as usize] - 2.0 * block_max[0]
    } else {
        f64::NEG_INFINITY
    };
    batches.push(ReportBatch {
        label: "trend".into(),
        samples: 2,
        max_value: block_max[last_block as usize],
        max_violation: trend,
    });
    let max_violation = fmax(omega - bound, trend);
    Ok(ConditionReport {
        name: "e2".into(),
        samples: ratios.len(),
        constant: bound,
        speed_growth: (0.0, sys.max_growth()),
        max_violation,
        violations: ratios.iter().filter(|r| **r - bound > THEOREM_TOLERANCE).count()
            + usize::from(trend > THEOREM_TOLERANCE),
        max_ratio: if bound > 0.0 { omega / bound } else { 0.0 },
        batches,
    })
}

/// The speed bound `d(X_s f, X_t f) <= |s - t| max|G|` over random `(f, s, t)`.
pub fn verify_speed(sys: &LeniaSystem, grid: Grid, samples: usize, seed: u64) -> Result<ConditionReport> {
    let rho = sys.max_growth();
    let seeds = sample_seeds(seed, samples);
    let results: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = SplitMix64::seed_from_u64(s);
            let f = random_state(grid, sys.bounds, &mut rng)?;
            let s = unit_from_u64(rng.next_u64());
            let t = unit_from_u64(rng.next_u64());
            let lhs = sup_distance(&lenia_step(&f, sys, s)?, &lenia_step(&f, sys, t)?)?;
            let rhs = (s - t).abs() * rho;
            Ok((lhs - rhs, if rhs > 0.0 { lhs / rhs } else { 0.0 }))
        })
        .collect::<Result<_>>()?;
    let max_violation = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, fmax);
    let max_ratio = results.iter().map(|r| r.1).fold(0.0, fmax);
    Ok(ConditionReport {
        name: "speed".into(),
        samples,
        constant: rho,
        speed_growth: (0.0, rho),
        max_violation,
        violations: results.iter().filter(|r| r.0 > THEOREM_TOLERANCE).count(),
        max_ratio,
        batches: vec![ReportBatch {
            label: "all".into(),
            samples,
            max_value: max_ratio,
            max_violation,
        }],
    })
}

/// Euler-curve refinement evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `(n, d_n)` with `d_n = d(X_{t/n}^(n) f0, X_{t/2n}^(2n) f0)`.
    pub refinements: Vec<(usize, f64)>,
    /// `log2(d_n / d_{2n})` for consecutive rows.
    pub orders: Vec<f64>,
    /// `(h, residual)` pairs, filled by [`tangency_residual`] when requested.
    pub tangency: Vec<(f64, f64)>,
}

impl ConvergenceReport {
    pub fn last_order(&self) -> Option<f64> {
        self.orders.last().copied()
    }

    /// `d_{2n} <= d_n + tol` for every row with `n >= from`.
    pub fn non_increasing_from(&self, from: usize, tol: f64) -> bool {
        self.refinements
            .windows(2)
            .filter(|w| w[0].0 >= from)
            .all(|w| w[1].1 <= w[0].1 + tol)
    }

    /// `d_{2n} < d_n` for every row with `n >= from`.
    pub fn strictly_decreasing_from(&self, from: usize) -> bool {
        self.refinements
            .windows(2)
            .filter(|w| w[0].0 >= from)
            .all(|w| w[1].1 < w[0].1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d_n,order\n");
        for (i, (n, d)) in self.refinements.iter().enumerate() {
            let order = i
                .checked_sub(1)
                .and_then(|j| self.orders.get(j))
                .map(|o| format!("{o:e}"))
                .unwrap_or_default();
            let _ = writeln!(out, "{n},{d:e},{order}");
        }
        out
    }

    pub fn tangency_csv(&self) -> String {
        let mut out = String::from("h,residual\n");
        for (h, r) in &self.tangency {
            let _ = writeln!(out, "{h:e},{r:e}");
        }
        out
    }
}

/// `d_n` for `n = 2, 4, ..., 2^n_max_log2`, each against the curve at `2n`.
pub fn convergence_study<A: ArcField>(arc: &A, f0: &A::State, t: f64, n_max_log2: u32) -> Result<ConvergenceReport> {
    if n_max_log2 < 1 {
        return Err(Error::InvalidArgument(format!(
            "convergence study needs n_max_log2 >= 1, got {n_max_log2}"
        )));
    }
    if n_max_log2 > 30 {
        return Err(Error::InvalidArgument(format!("{n_max_log2} levels is too many")));
    }
    let counts: Vec<usize> = (1..=n_max_log2 + 1).map(|k| 1usize << k).collect();
    let flows: Vec<A::State> = counts
        .par_iter()
        .map(|&n| arc.euler_curve(f0, t, n))
        .collect::<Result<_>>()?;
    let refinements: Vec<(usize, f64)> = flows
        .windows(2)
        .zip(&counts)
        .map(|(w, &n)| Ok((n, sup_distance(&w[0], &w[1])?)))
        .collect::<Result<_>>()?;
    let orders = refinements.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
    Ok(ConvergenceReport {
        refinements,
        orders,
        tangency: Vec::new(),
    })
}

/// `d(F_{t+h} f0, X_h F_t f0) / h` for each `h`, with the flow `F`
/// approximated by Euler steps of size `t / n_ref`. Every `h` must be a whole
/// number of reference steps; `F_{t+h}` continues the reference curve.
pub fn tangency_residual<A: ArcField>(
    arc: &A,
    f0: &A::State,
    t: f64,
    h_list: &[f64],
    n_ref: usize,
) -> Result<Vec<(f64, f64)>> {
    if n_ref < 256 {
        return Err(Error::InvalidArgument(format!(
            "reference flow needs n_ref >= 256, got {n_ref}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::StepSize(t));
    }
    let delta = t / n_ref as f64;
    let mut extra = Vec::with_capacity(h_list.len());
    for &h in h_list {
        check_step(h)?;
        let m = (h / delta).round();
        if !(h > 0.0) || m < 1.0 || ((m * delta - h).abs() > 1e-12 * h) {
            return Err(Error::InvalidArgument(format!(
                "h = {h} is not a positive multiple of the reference step {delta}"
            )));
        }
        extra.push(m as usize);
    }
    let ft = arc.euler_curve(f0, t, n_ref)?;
    let longest = extra.iter().copied().max().unwrap_or(0);
    // Reference states F_{t + k delta} for k = 0..=longest.
    let mut continued = vec![ft.clone()];
    for _ in 0..longest {
        let next = arc.step(continued.last().expect("non-empty"), delta)?;
        continued.push(next);
    }
    h_list
        .par_iter()
        .zip(extra.par_iter())
        .map(|(&h, &m)| {
            let arc_state = arc.step(&ft, h)?;
            Ok((h, sup_distance(&continued[m], &arc_state)? / h))
        })
        .collect()
}

/// Outcome of [`support_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SupportReport {
    /// Quiescence radius: `G(u) <= 0` for `|u| <= a`.
    pub a: f64,
    /// Upper bound on the positive part of `G`.
    pub g: f64,
    /// Radius of the open ball containing the kernel support.
    pub r: f64,
    pub kernel_l1: f64,
    /// Number of `(cell, snapshot)` pairs covered by the bound.
    pub checked: usize,
    /// Pairs where the bound promised zero but the state was positive.
    pub violations: usize,
    /// Largest value seen at a covered pair (zero when the bound held).
    pub max_protected_value: f64,
    /// Smallest `tau_first(x) - bound(x)` over cells outside the initial
    /// support that became positive (`+inf` if none did).
    pub min_margin: f64,
}

impl SupportReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Smallest arc of a cycle of `n` cells covering every occupied index.
fn covering_extent(occupied: &[bool]) -> usize {
    let n = occupied.len();
    let Some(first) = occupied.iter().position(|&o| o) else {
        return 0;
    };
    let mut largest_gap = 0;
    let mut gap = 0;
    for i in 1..=n {
        if occupied[(first + i) % n] {
            largest_gap = largest_gap.max(gap);
            gap = 0;
        } else {
            gap += 1;
        }
    }
    n - largest_gap
}

/// Runs `n` Euler steps to `t_total` and checks that every cell stays exactly
/// zero while `tau <= a floor(d(x) / R) / (g ||K||_1)`, where `d(x)` is the
/// distance to the initial support.
pub fn support_bound_check(sys: &LeniaSystem, f0: &ScalarField, t_total: f64, n: usize) -> Result<SupportReport> {
    let a = sys.growth.quiescent_radius()?;
    if !(a > 0.0) {
        return Err(Error::Hypothesis(format!("no a > 0 with G <= 0 on [-a, a] (a = {a})")));
    }
    if sys.bounds.lower() != 0.0 {
        return Err(Error::Hypothesis("support growth needs the lower bound 0".into()));
    }
    let g = sys.growth.positive_max(sys.response_bound());
    let r = sys.kernel.support_radius_space();
    let l1 = sys.kernel.l1_norm();
    let level_time = if g > 0.0 { a / (g * l1) } else { f64::INFINITY };

    // The region that may turn positive by t_total, grown from the initial
    // support, must not meet itself around the torus.
    let (w, h) = (f0.width(), f0.height());
    let mut cols = vec![false; w];
    let mut rows = vec![false; h];
    for (row, seen) in f0.values().chunks(w).zip(rows.iter_mut()) {
        for (&v, col) in row.iter().zip(cols.iter_mut()) {
            if v > 0.0 {
                *col = true;
                *seen = true;
            }
        }
    }
    let reach = if level_time.is_finite() {
        ((t_total / level_time).floor() + 1.0) * r
    } else {
        0.0
    };
    let span_x = covering_extent(&cols) as f64 * f0.dx() + 2.0 * reach;
    let span_y = covering_extent(&rows) as f64 * f0.dx() + 2.0 * reach;
    if span_x >= w as f64 * f0.dx() || span_y >= h as f64 * f0.dx() {
        return Err(Error::Hypothesis(format!(
            "support plus growth region ({span_x:.4} x {span_y:.4}) wraps the torus"
        )));
    }

    let bound: Vec<f64> = f0
        .support_distance_map()
        .iter()
        .map(|&d| (d / r).floor() * level_time)
        .collect();
    let dt = t_total / n as f64;
    let mut first_positive: Vec<Option<f64>> = f0.values().iter().map(|&v| (v > 0.0).then_some(0.0)).collect();
    let mut checked = 0usize;
    let mut violations = 0usize;
    let mut max_protected_value = 0.0f64;
    euler_flow_observed(f0, sys, t_total, n, |k, f| {
        let tau = k as f64 * dt;
        for (i, &v) in f.values().iter().enumerate() {
            // The bound speaks about positive times only.
            if k > 0 && tau <= bound[i] {
                checked += 1;
                if v != 0.0 {
                    violations += 1;
                    max_protected_value = max_protected_value.max(v.abs());
                }
            }
            if v > 0.0 && first_positive[i].is_none() {
                first_positive[i] = Some(tau);
            }
        }
    })?;
    let min_margin = first_positive
        .iter()
        .zip(&bound)
        .zip(f0.values())
        .filter(|((_, _), v0)| **v0 == 0.0)
        .filter_map(|((fp, b), _)| fp.map(|tau| tau - b))
        .fold(f64::INFINITY, f64::min);
    Ok(SupportReport {
        a,
        g,
        r,
        kernel_l1: l1,
        checked,
        violations,
        max_protected_value,
        min_margin,
    })
}

/// Outcome of [`monotone_growth_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub steps: usize,
    /// Cells that decreased, summed over steps.
    pub decreases: usize,
    /// Largest single-step decrease of any cell (zero when monotone).
    pub max_decrease: f64,
    /// Cells that left the support, summed over steps.
    pub support_losses: usize,
    /// Support size after each step, starting with the initial state.
    pub support_sizes: Vec<usize>,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.decreases == 0 && self.support_losses == 0
    }

    /// Support cells gained by each step.
    pub fn support_growth(&self) -> Vec<usize> {
        self.support_sizes
            .windows(2)
            .map(|w| w[1].saturating_sub(w[0]))
            .collect()
    }
}

/// Audits pointwise monotonicity under a nonnegative kernel with positive
/// center weight and rectifier growth. Convolution runs on the direct path so
/// that support sizes are not inflated by FFT round-off.
pub fn monotone_growth_check(sys: &LeniaSystem, f0: &ScalarField, steps: usize, t_step: f64) -> Result<MonotoneReport> {
    if !sys.kernel.is_nonnegative() || !(sys.kernel.center_weight() > 0.0) {
        return Err(Error::Hypothesis(
            "kernel must be nonnegative with a positive center weight".into(),
        ));
    }
    if sys.growth != GrowthSpec::Rectifier {
        return Err(Error::Hypothesis("growth must be the rectifier".into()));
    }
    let sys = &sys.clone().with_convolution(ConvolutionPath::Direct);
    let mut report = MonotoneReport {
        steps,
        decreases: 0,
        max_decrease: 0.0,
        support_losses: 0,
        support_sizes: vec![f0.support_size()],
    };
    let mut f = f0.clone();
    for _ in 0..steps {
        let next = lenia_step(&f, sys, t_step)?;
        for (&old, &new) in f.values().iter().zip(next.values()) {
            if new < old {
                report.decreases += 1;
                report.max_decrease = report.max_decrease.max(old - new);
            }
            if old > 0.0 && !(new > 0.0) {
                report.support_losses += 1;
            }
        }
        report.support_sizes.push(next.support_size());
        f = next;
    }
    Ok(report)
}

/// Runs the direct and convolution forms of the Game of Life side by side
/// on random boards and reports the largest cell difference seen at any step
/// (exactly zero when the two forms agree).
pub fn gol_equivalence_check(
    boards: usize,
    width: usize,
    height: usize,
    steps: usize,
    density: f64,
    seed: u64,
) -> Result<ConditionReport> {
    let seeds = sample_seeds(seed, boards);
    let worst = seeds
        .par_iter()
        .map(|&s| {
            let mut direct = random_board(width, height, density, s)?;
            let mut conv = direct.clone();
            let mut worst = 0.0f64;
            for _ in 0..steps {
                direct = gol_step(&direct)?;
                conv = gol_step_conv(&conv)?;
                worst = worst.max(sup_distance(&direct, &conv)?);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mismatched = worst > 0.0;
    Ok(ConditionReport {
        name: "gol_equiv".into(),
        samples: boards,
        constant: 0.0,
        speed_growth: (0.0, 1.0),
        max_violation: worst,
        violations: usize::from(mismatched),
        max_ratio: 0.0,
        batches: vec![ReportBatch {
            label: format!("{width}x{height}x{steps}"),
            samples: boards,
            max_value: worst,
            max_violation: worst,
        }],
    })
}

/// Which update rule an extinction run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Clipped,
    Asymptotic,
}

/// Outcome of [`extinction_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionReport {
    /// First step at which the state is identically zero.
    pub step: Option<usize>,
    pub steps_run: usize,
    pub min_mass: f64,
    pub final_mass: f64,
}

/// First step `k` at which the state is identically zero, if any within
/// `max_steps`.
pub fn extinction_time(
    rule: Rule,
    sys: &LeniaSystem,
    f0: &ScalarField,
    t_step: f64,
    max_steps: usize,
) -> Result<Option<usize>> {
    Ok(extinction_run(rule, sys, f0, t_step, max_steps)?.step)
}

pub fn extinction_run(
    rule: Rule,
    sys: &LeniaSystem,
    f0: &ScalarField,
    t_step: f64,
    max_steps: usize,
) -> Result<ExtinctionReport> {
    let mut f = f0.clone();
    let mut min_mass = f.mass();
    if f.is_identically_zero() {
        return Ok(ExtinctionReport {
            step: Some(0),
            steps_run: 0,
            min_mass,
            final_mass: min_mass,
        });
    }
    for k in 1..=max_steps {
        f = match rule {
            Rule::Clipped => lenia_step(&f, sys, t_step)?,
            Rule::Asymptotic => asymptotic_step(&f, sys, t_step)?,
        };
        let mass = f.mass();
        min_mass = min_mass.min(mass);
        if f.is_identically_zero() {
            return Ok(ExtinctionReport {
                step: Some(k),
                steps_run: k,
                min_mass,
                final_mass: mass,
            });
        }
    }
    Ok(ExtinctionReport {
        step: None,
        steps_run: max_steps,
        min_mass,
        final_mass: f.mass(),
    })
}

/// Which clip bound merges the witness pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Barrier {
    /// Constant growth 1 pushes 0.95 and 0.9 to 1.
    Upper,
    /// Constant growth -1 pushes 0.05 and 0.1 to 0.
    Lower,
}

/// Two distinct states with identical images under one arc-field step.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub system: LeniaSystem,
    pub f: ScalarField,
    pub g: ScalarField,
    pub t: f64,
}

impl Witness {
    pub fn images(&self) -> Result<(ScalarField, ScalarField)> {
        Ok((
            lenia_step(&self.f, &self.system, self.t)?,
            lenia_step(&self.g, &self.system, self.t)?,
        ))
    }

    pub fn asymptotic_images(&self) -> Result<(ScalarField, ScalarField)> {
        Ok((
            asymptotic_step(&self.f, &self.system, self.t)?,
            asymptotic_step(&self.g, &self.system, self.t)?,
        ))
    }
}

/// Builds the constant-field witness of forward non-injectivity on the grid
/// and kernel of `sys`.
pub fn irreversibility_demo(sys: &LeniaSystem, grid: Grid, barrier: Barrier) -> Result<Witness> {
    let (growth, fv, gv) = match barrier {
        Barrier::Upper => (1.0, 0.95, 0.9),
        Barrier::Lower => (-1.0, 0.05, 0.1),
    };
    let system = LeniaSystem::new(sys.kernel.clone(), GrowthSpec::Constant(growth))?;
    let field = |v| ScalarField::filled(grid.width, grid.height, grid.dx, ClipBounds::UNIT, v);
    Ok(Witness {
        system,
        f: field(fv)?,
        g: field(gv)?,
        t: 0.1,
    })
}
