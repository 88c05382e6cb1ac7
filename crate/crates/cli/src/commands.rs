//! The three subcommands as library functions. Each returns a value that
//! maps onto the process exit code, so tests can drive them in-process.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clipflow_core::analysis::{
    convergence_study, gol_equivalence_check, monotone_growth_check, support_bound_check, tangency_residual, verify_e1,
    verify_e2, verify_speed, ConvergenceReport, Grid, THEOREM_TOLERANCE,
};
use clipflow_core::clipcore::verify_clip_identities;
use clipflow_core::dynamics::{ArcField, AsymptoticLenia};
use clipflow_core::field::{decode_field, encode_field, encode_pgm};
use clipflow_core::{sup_distance, MultiField, ScalarField};

use crate::config::{parse_config_str, Model, SimConfig};
use crate::error::{CliError, CliResult, EXIT_EXTINCT, EXIT_FAILED, EXIT_OK};
use crate::model::{build, generate, primary_system, Dynamics};

/// Default config for `verify clip|e1|e2|speed|gol_equiv` and the reference
/// convergence study.
pub const STANDARD_CONFIG: &str = include_str!("../configs/standard.conf");
/// Default config for `verify support`.
pub const SUPPORT_CONFIG: &str = include_str!("../configs/support.conf");
/// Default config for `verify monotone`.
pub const MONOTONE_CONFIG: &str = include_str!("../configs/monotone.conf");

pub const CLIP_SAMPLES: usize = 1_000_000;
pub const E1_PAIRS: usize = 200;
pub const E1_STEPS: [f64; 3] = [1e-3, 1e-2, 1e-1];
pub const SPEED_SAMPLES: usize = 500;
pub const GOL_BOARDS: usize = 500;
pub const GOL_STEPS: usize = 50;

/// Refinement rows from this `n` on must not increase.
pub const CONVERGE_FROM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOutcome {
    pub steps_run: usize,
    /// Step at which every creature channel was identically zero.
    pub extinct_at: Option<usize>,
}

impl SimOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.extinct_at.is_some() {
            EXIT_EXTINCT
        } else {
            EXIT_OK
        }
    }
}

fn create_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}

/// Writes `frame_<k>.lenf` and one `frame_<k>_c<i>.pgm` per channel. The
/// container is decoded again before it is written, which re-checks every
/// channel against its bounds.
pub fn write_frame(dir: &Path, step: usize, state: &MultiField) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let bytes = encode_field(state)?;
    decode_field(&bytes)?;
    let path = frame_path(dir, step);
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    for (i, channel) in state.channels().iter().enumerate() {
        let path = dir.join(format!("frame_{step:06}_c{i}.pgm"));
        fs::write(&path, encode_pgm(channel)?).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

pub fn frame_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("frame_{step:06}.lenf"))
}

fn extinct(state: &MultiField, creatures: &[usize]) -> bool {
    creatures.iter().all(|&i| state.channel(i).is_identically_zero())
}

fn metrics_header(channels: usize) -> String {
    let mut h = String::from("step,time");
    for i in 0..channels {
        let _ = write!(h, ",mass_{i},min_{i},max_{i}");
    }
    h.push_str(",sup_change,extinct\n");
    h
}

fn metrics_row(step: usize, t_step: f64, state: &MultiField, change: f64, extinct: bool) -> String {
    let mut row = format!("{step},{:e}", step as f64 * t_step);
    for c in state.channels() {
        let _ = write!(row, ",{:e},{:e},{:e}", c.mass(), c.min_value(), c.max_value());
    }
    let _ = writeln!(row, ",{change:e},{}", u8::from(extinct));
    row
}

/// Runs the configured model, writing metrics and frames. Stops early, with
/// all output written, once every creature channel is identically zero.
pub fn cmd_simulate(cfg: &SimConfig) -> CliResult<SimOutcome> {
    let sim = build(cfg)?;
    let creatures = sim.dynamics.creature_channels();
    let out = &cfg.output;
    create_parent(&out.metrics_path)?;
    let metrics_file = fs::File::create(&out.metrics_path).map_err(|e| CliError::io(&out.metrics_path, e))?;
    let mut metrics = BufWriter::new(metrics_file);
    let mut emit = |text: String| {
        metrics
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(&out.metrics_path, e))
    };
    let frame_due = |k: usize, last: bool| out.frames_every > 0 && (last || k.is_multiple_of(out.frames_every));

    let mut state = sim.initial;
    emit(metrics_header(state.channel_count()))?;
    let mut outcome = SimOutcome {
        steps_run: 0,
        extinct_at: None,
    };
    let dead = extinct(&state, &creatures);
    emit(metrics_row(0, cfg.t_step, &state, 0.0, dead))?;
    if dead {
        outcome.extinct_at = Some(0);
    }
    if frame_due(0, dead) {
        write_frame(&out.frame_dir, 0, &state)?;
    }
    if !dead {
        for k in 1..=cfg.steps {
            let next = sim.dynamics.step(&state, cfg.t_step)?;
            let change = sup_distance(&state, &next)?;
            state = next;
            let dead = extinct(&state, &creatures);
            emit(metrics_row(k, cfg.t_step, &state, change, dead))?;
            outcome.steps_run = k;
            if frame_due(k, dead || k == cfg.steps) {
                write_frame(&out.frame_dir, k, &state)?;
            }
            if dead {
                outcome.extinct_at = Some(k);
                break;
            }
        }
    }
    metrics.flush().map_err(|e| CliError::io(&out.metrics_path, e))?;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Clip,
    E1,
    E2,
    Speed,
    Support,
    Monotone,
    GolEquiv,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Clip,
        Suite::E1,
        Suite::E2,
        Suite::Speed,
        Suite::Support,
        Suite::Monotone,
        Suite::GolEquiv,
    ];

    pub fn parse(s: &str) -> Option<Suite> {
        Some(match s {
            "clip" => Suite::Clip,
            "e1" => Suite::E1,
            "e2" => Suite::E2,
            "speed" => Suite::Speed,
            "support" => Suite::Support,
            "monotone" => Suite::Monotone,
            "gol_equiv" => Suite::GolEquiv,
            "all" => Suite::All,
            _ => return None,
        })
    }

    fn default_config(self) -> &'static str {
        match self {
            Suite::Support => SUPPORT_CONFIG,
            Suite::Monotone => MONOTONE_CONFIG,
            _ => STANDARD_CONFIG,
        }
    }
}

/// One `CHECK` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub max_violation: f64,
    pub constant: f64,
}

impl Check {
    pub fn line(&self) -> String {
        format!(
            "CHECK {} {} max_violation={:.6e} constant={:.6e}",
            self.name,
            if self.passed { "pass" } else { "fail" },
            self.max_violation,
            self.constant
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_FAILED
        }
    }
}

fn grid_of(cfg: &SimConfig) -> Grid {
    Grid::new(cfg.grid.width, cfg.grid.height, cfg.grid.dx)
}

fn initial_state(cfg: &SimConfig) -> CliResult<ScalarField> {
    generate(&cfg.init, cfg.grid, cfg.bounds, cfg.seed, cfg.model == Model::Gol)
}

fn continuous_system(cfg: &SimConfig, suite: &str) -> CliResult<clipflow_core::dynamics::LeniaSystem> {
    if cfg.model == Model::Gol {
        return Err(CliError::Unsupported(format!(
            "`verify {suite}` needs a Lipschitz growth; the gol model steps a discontinuous rule"
        )));
    }
    primary_system(cfg)
}

fn run_suite(suite: Suite, cfg: &SimConfig, seed: u64) -> CliResult<Vec<Check>> {
    let from_report = |r: clipflow_core::analysis::ConditionReport| Check {
        passed: r.passed(),
        name: r.name,
        max_violation: r.max_violation,
        constant: r.constant,
    };
    Ok(match suite {
        Suite::Clip => verify_clip_identities(CLIP_SAMPLES, seed)?
            .checks
            .into_iter()
            .map(|c| Check {
                name: format!("clip.{}", c.name),
                passed: c.passed(),
                max_violation: c.max_violation,
                constant: c.tolerance,
            })
            .collect(),
        Suite::E1 => {
            let sys = continuous_system(cfg, "e1")?;
            vec![from_report(verify_e1(&sys, grid_of(cfg), E1_PAIRS, seed, &E1_STEPS)?)]
        }
        Suite::E2 => {
            let sys = continuous_system(cfg, "e2")?;
            vec![from_report(verify_e2(&sys, &initial_state(cfg)?, 3..=10)?)]
        }
        Suite::Speed => {
            let sys = continuous_system(cfg, "speed")?;
            vec![from_report(verify_speed(&sys, grid_of(cfg), SPEED_SAMPLES, seed)?)]
        }
        Suite::Support => {
            let sys = continuous_system(cfg, "support")?;
            let r = support_bound_check(&sys, &initial_state(cfg)?, cfg.t_step * cfg.steps as f64, cfg.steps)?;
            vec![Check {
                name: "support".into(),
                passed: r.passed(),
                max_violation: r.max_protected_value,
                constant: r.a / (r.g * r.kernel_l1),
            }]
        }
        Suite::Monotone => {
            let sys = continuous_system(cfg, "monotone")?;
            let r = monotone_growth_check(&sys, &initial_state(cfg)?, cfg.steps, cfg.t_step)?;
            vec![Check {
                name: "monotone".into(),
                passed: r.passed(),
                max_violation: r.max_decrease,
                constant: sys.kernel.center_weight(),
            }]
        }
        Suite::GolEquiv => vec![from_report(gol_equivalence_check(
            GOL_BOARDS, 64, 64, GOL_STEPS, 0.5, seed,
        )?)],
        Suite::All => unreachable!("expanded by cmd_verify"),
    })
}

/// Runs one suite (or all of them), writing each `CHECK` line to `out` as it
/// completes. Without a config every suite uses its built-in default; the
/// seed defaults to the config's.
pub fn cmd_verify(
    suite: Suite,
    cfg: Option<&SimConfig>,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> CliResult<VerifyOutcome> {
    let suites: &[Suite] = if suite == Suite::All {
        &Suite::EACH
    } else {
        std::slice::from_ref(&suite)
    };
    let mut outcome = VerifyOutcome::default();
    for &s in suites {
        let owned;
        let cfg = match cfg {
            Some(c) => c,
            None => {
                owned = parse_config_str(s.default_config(), Path::new("."))?;
                &owned
            }
        };
        let seed = seed.unwrap_or(cfg.seed);
        for check in run_suite(s, cfg, seed)? {
            writeln!(out, "{}", check.line()).map_err(|e| CliError::io("<stdout>", e))?;
            outcome.checks.push(check);
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeOutcome {
    pub report: ConvergenceReport,
    pub check: Check,
}

impl ConvergeOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.check.passed {
            EXIT_OK
        } else {
            EXIT_FAILED
        }
    }
}

/// `h = t 2^-k` for `k = 2..=8`.
pub fn tangency_steps(t: f64) -> Vec<f64> {
    (2..=8).map(|k| t * 2f64.powi(-k)).collect()
}

fn study<A: ArcField>(arc: &A, f0: &A::State, cfg: &SimConfig, levels: u32) -> CliResult<ConvergenceReport> {
    let t = cfg.converge_time;
    let mut report = convergence_study(arc, f0, t, levels - 1)?;
    report.tangency = tangency_residual(arc, f0, t, &tangency_steps(t), cfg.converge_reference_steps)?;
    Ok(report)
}

/// Euler curves with `n = 2, 4, ..., 2^levels` steps to `converge.time`;
/// row `n` compares `n` against `2n`. Writes the refinement and tangency
/// CSVs. Passes when `d_2n <= d_n` (up to round-off) for every `n >= 8`.
pub fn cmd_converge(cfg: &SimConfig, levels: u32) -> CliResult<ConvergeOutcome> {
    if levels < 2 {
        return Err(CliError::Usage(format!("--levels must be at least 2, got {levels}")));
    }
    if levels > 20 {
        return Err(CliError::Usage(format!("--levels {levels} is too many (at most 20)")));
    }
    let sim = build(cfg)?;
    let report = match &sim.dynamics {
        Dynamics::Lenia(sys) => study(sys, sim.initial.channel(0), cfg, levels)?,
        Dynamics::Asymptotic(sys) => study(&AsymptoticLenia(sys.clone()), sim.initial.channel(0), cfg, levels)?,
        Dynamics::Extension(sys) => study(sys, &sim.initial, cfg, levels)?,
        Dynamics::Gol => {
            return Err(CliError::Unsupported(
                "the gol model is a discrete rule with no Euler refinement; use a lenia or extension model".into(),
            ))
        }
    };
    let out = &cfg.output;
    for (path, text) in [
        (&out.convergence_path, report.to_csv()),
        (&out.tangency_path, report.tangency_csv()),
    ] {
        create_parent(path)?;
        fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    }
    let worst_increase = report
        .refinements
        .windows(2)
        .filter(|w| w[0].0 >= CONVERGE_FROM)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let check = Check {
        name: "converge".into(),
        passed: report.non_increasing_from(CONVERGE_FROM, THEOREM_TOLERANCE),
        max_violation: if worst_increase.is_finite() {
            worst_increase
        } else {
            0.0
        },
        constant: report.last_order().unwrap_or(f64::NAN),
    };
    Ok(ConvergeOutcome { report, check })
}

/// Maps a command result onto the exit-code contract, printing errors.
pub fn exit_code_of<T>(result: &CliResult<T>, code: impl Fn(&T) -> i32) -> i32 {
    match result {
        Ok(v) => code(v),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
