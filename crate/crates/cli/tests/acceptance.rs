//! End-to-end acceptance run. Every criterion is checked at full size and
//! reported on one line; the process fails if any criterion does.

use std::fs;
use std::path::Path;
use std::time::Instant;

use clipflow::commands::{cmd_converge, cmd_simulate, MONOTONE_CONFIG, STANDARD_CONFIG, SUPPORT_CONFIG};
use clipflow::model::{generate, primary_system};
use clipflow::{parse_config, parse_config_str, SimConfig};
use clipflow_core::analysis::{
    convergence_study, extinction_run, gol_equivalence_check, irreversibility_demo, monotone_growth_check,
    support_bound_check, tangency_residual, verify_e1, verify_e2, verify_speed, Barrier, Grid, Rule,
};
use clipflow_core::clipcore::{toy_semigroup_scan, verify_clip_identities};
use clipflow_core::dynamics::{
    ecosystem_lipschitz_constant, ecosystem_vector_field, gol_step, predator_prey_step, EcosystemSystem, Extension,
    LeniaSystem,
};
use clipflow_core::field::{blob_field, random_field};
use clipflow_core::operators::{
    convolve_direct, convolve_fft, DiscreteKernel, GrowthSpec, KernelShape, KernelSpec, Ring,
};
use clipflow_core::{sup_distance, ClipBounds, MultiField, ScalarField};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Outcome);

fn standard() -> SimConfig {
    parse_config_str(STANDARD_CONFIG, Path::new(".")).unwrap()
}

fn system_and_start(cfg: &SimConfig) -> (LeniaSystem, ScalarField) {
    let sys = primary_system(cfg).unwrap();
    let f0 = generate(&cfg.init, cfg.grid, cfg.bounds, cfg.seed, false).unwrap();
    (sys, f0)
}

fn bump() -> GrowthSpec {
    GrowthSpec::GaussianBump { mu: 0.15, sigma: 0.015 }
}

fn exp_bump(scale: f64, dx: f64) -> DiscreteKernel {
    KernelSpec::normalized(KernelShape::ExpBump { scale })
        .discretize(dx)
        .unwrap()
}

fn board(w: usize, h: usize, live: &[(usize, usize)]) -> ScalarField {
    let mut v = vec![0.0; w * h];
    for &(x, y) in live {
        v[(y % h) * w + x % w] = 1.0;
    }
    ScalarField::new(w, h, 1.0, ClipBounds::UNIT, v).unwrap()
}

fn clip_suite() -> Outcome {
    let r = verify_clip_identities(1_000_000, 1)?;
    let exact_ok = r
        .checks
        .iter()
        .filter(|c| c.tolerance == 0.0)
        .all(|c| c.max_violation <= 0.0);
    let algebraic_ok = r
        .checks
        .iter()
        .filter(|c| c.tolerance > 0.0)
        .all(|c| c.max_violation <= 1e-12);
    let worst = r.checks.iter().map(|c| c.max_violation).fold(0.0, f64::max);
    let exact = r.checks.iter().filter(|c| c.tolerance == 0.0).count();
    Ok((
        r.all_passed() && exact_ok && algebraic_ok && r.checks.len() == 12,
        format!("{} groups ({exact} exact), worst violation {worst:.3e}", r.checks.len()),
    ))
}

fn toy_semigroup() -> Outcome {
    let d = toy_semigroup_scan(100_000, 2);
    Ok((d == 0.0, format!("max defect {d:e} over 1e5 triples")))
}

fn gol_equivalence() -> Outcome {
    let r = gol_equivalence_check(500, 64, 64, 50, 0.5, 3)?;
    let glider = [(1, 0), (2, 1), (0, 2), (1, 2), (2, 2)];
    let mut g = board(64, 64, &glider);
    for _ in 0..4 {
        g = gol_step(&g)?;
    }
    let moved: Vec<_> = glider.iter().map(|&(x, y)| (x + 1, y + 1)).collect();
    let glider_ok = g == board(64, 64, &moved);
    let blinker = board(64, 64, &[(10, 11), (11, 11), (12, 11)]);
    let once = gol_step(&blinker)?;
    let blinker_ok = once != blinker && gol_step(&once)? == blinker;
    Ok((
        r.max_violation == 0.0 && glider_ok && blinker_ok,
        format!(
            "500 boards x 50 steps max diff {:e}, glider {}, blinker {}",
            r.max_violation,
            if glider_ok { "ok" } else { "wrong" },
            if blinker_ok { "ok" } else { "wrong" }
        ),
    ))
}

fn speed() -> Outcome {
    let dx = 1.0 / 16.0;
    let ring = KernelSpec::normalized(KernelShape::RingSum {
        c: 1.0,
        rings: vec![
            Ring {
                center: 0.5,
                amplitude: 1.0,
                width: 0.02,
            },
            Ring {
                center: 0.8,
                amplitude: 0.5,
                width: 0.01,
            },
        ],
    })
    .discretize(dx)?;
    let systems = [
        LeniaSystem::new(exp_bump(1.0, dx), bump())?,
        LeniaSystem::new(ring, GrowthSpec::GaussianBump { mu: 0.3, sigma: 0.05 })?,
        LeniaSystem::new(
            exp_bump(0.5, dx),
            GrowthSpec::Table(vec![(0.0, -1.0), (0.2, 1.0), (0.5, -1.0)]),
        )?,
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, sys) in systems.iter().enumerate() {
        let r = verify_speed(sys, Grid::new(64, 64, dx), 500, 10 + i as u64)?;
        ok &= r.passed() && r.violations == 0 && r.samples == 500;
        parts.push(format!("{} violations", r.violations));
    }
    Ok((ok, format!("500 samples x 3 configs: {}", parts.join(", "))))
}

fn e1() -> Outcome {
    let (sys, _) = system_and_start(&standard());
    let grid = Grid::new(128, 128, 1.0 / 32.0);
    let r = verify_e1(&sys, grid, 200, 4, &[1e-3, 1e-2, 1e-1])?;
    let control_sys = LeniaSystem::new(sys.kernel.clone(), GrowthSpec::Constant(0.5))?;
    let c = verify_e1(&control_sys, grid, 200, 5, &[1e-3, 1e-2, 1e-1])?;
    let control_ok = c.constant == 0.0 && c.passed() && c.violations == 0 && c.max_ratio <= 1.0 + 1e-12;
    Ok((
        r.passed() && r.violations == 0 && control_ok,
        format!(
            "Lambda {:.4}, {} violations, worst ratio {:.4}; control Lambda 0 worst ratio {:.15}",
            r.constant, r.violations, r.max_ratio, c.max_ratio
        ),
    ))
}

fn e2() -> Outcome {
    let (sys, f0) = system_and_start(&standard());
    let r = verify_e2(&sys, &f0, 3..=10)?;
    let maxes: Vec<String> = r.batches.iter().map(|b| format!("{:.2}", b.max_value)).collect();
    Ok((
        r.passed(),
        format!(
            "bound {:.2}, max r = {:.2} (ratio {:.3}), block maxima [{}]",
            r.constant,
            r.max_ratio * r.constant,
            r.max_ratio,
            maxes.join(", ")
        ),
    ))
}

fn convergence() -> Outcome {
    let (sys, f0) = system_and_start(&standard());
    let r = convergence_study(&sys, &f0, 1.0, 8)?;
    let order = r.last_order().unwrap_or(f64::NAN);
    let ds: Vec<String> = r.refinements.iter().map(|(n, d)| format!("{n}:{d:.3e}")).collect();
    let reaches_256 = r.refinements.last().map(|x| x.0) == Some(256);
    Ok((
        reaches_256 && r.strictly_decreasing_from(8) && (0.5..=1.5).contains(&order),
        format!("d_n [{}], last order {order:.3}", ds.join(" ")),
    ))
}

fn tangency() -> Outcome {
    let (sys, f0) = system_and_start(&standard());
    let hs: Vec<f64> = (2..=8).map(|k| 2f64.powi(-k)).collect();
    let res = tangency_residual(&sys, &f0, 1.0, &hs, 1024)?;
    let decreasing = res.windows(2).all(|w| w[1].1 < w[0].1);
    let control = LeniaSystem::new(sys.kernel.clone(), GrowthSpec::Constant(0.25))?;
    let flat = ScalarField::filled(128, 128, 1.0 / 32.0, ClipBounds::UNIT, 0.125)?;
    let zero = tangency_residual(&control, &flat, 1.0, &hs, 1024)?;
    let zero_ok = zero.iter().all(|&(_, r)| r == 0.0);
    let rs: Vec<String> = res.iter().map(|(_, r)| format!("{r:.3e}")).collect();
    Ok((
        decreasing && zero_ok,
        format!(
            "residuals h=2^-2..2^-8 [{}], control max {:e}",
            rs.join(" "),
            zero.iter().map(|x| x.1).fold(0.0, f64::max)
        ),
    ))
}

fn support() -> Outcome {
    let cfg = parse_config_str(SUPPORT_CONFIG, Path::new("."))?;
    let (sys, f0) = system_and_start(&cfg);
    let r = support_bound_check(&sys, &f0, cfg.t_step * cfg.steps as f64, cfg.steps)?;
    let a = 0.15 - 0.015 * (2.0 * 2f64.ln()).sqrt();
    let a_ok = (r.a - a).abs() < 1e-9;
    Ok((
        r.passed() && r.checked > 0 && a_ok && f0.width() == 256,
        format!(
            "a = {:.6} (closed form {a:.6}), g = {}, R = {:.4}, {} covered pairs, {} violations, min margin {:.4}",
            r.a, r.g, r.r, r.checked, r.violations, r.min_margin
        ),
    ))
}

fn monotone() -> Outcome {
    let cfg = parse_config_str(MONOTONE_CONFIG, Path::new("."))?;
    let (sys, f0) = system_and_start(&cfg);
    let r = monotone_growth_check(&sys, &f0, 10, cfg.t_step)?;
    let growing = r.support_sizes.windows(2).all(|w| w[1] >= w[0]);
    Ok((
        r.passed() && growing && r.steps == 10,
        format!(
            "{} decreases, {} support losses, support sizes {:?}",
            r.decreases, r.support_losses, r.support_sizes
        ),
    ))
}

fn irreversibility() -> Outcome {
    let dx = 1.0 / 16.0;
    let sys = LeniaSystem::new(exp_bump(1.0, dx), bump())?;
    let grid = Grid::new(64, 64, dx);
    let mut witnesses_ok = true;
    for barrier in [Barrier::Upper, Barrier::Lower] {
        let w = irreversibility_demo(&sys, grid, barrier)?;
        let (a, b) = w.images()?;
        let (c, d) = w.asymptotic_images()?;
        witnesses_ok &= w.f != w.g && a == b && sup_distance(&c, &d)? > 0.0;
    }
    let t_zero = sys.growth.target(0.0) == 0.0;
    let f0 = blob_field(64, 64, dx, ClipBounds::UNIT, 32.0, 32.0, 6.0, 0.3)?;
    let asym = extinction_run(Rule::Asymptotic, &sys, &f0, 0.01, 10_000)?;
    let clipped = extinction_run(Rule::Clipped, &sys, &f0, 0.1, 10_000)?;
    Ok((
        witnesses_ok && t_zero && asym.step.is_none() && asym.min_mass > 0.0 && clipped.step.is_some(),
        format!(
            "witnesses {}, T(0) = {}, asymptotic min mass {:.3e} over 1e4 steps, clipped extinct at step {:?}",
            if witnesses_ok { "collide/separate" } else { "wrong" },
            sys.growth.target(0.0),
            asym.min_mass,
            clipped.step
        ),
    ))
}

fn noisy(f: &ScalarField, eps: f64, seed: u64) -> ScalarField {
    let noise = random_field(f.width(), f.height(), f.dx(), ClipBounds::new(-eps, eps).unwrap(), seed).unwrap();
    let (a, b) = (f.bounds().lower(), f.bounds().upper());
    let v = f
        .values()
        .iter()
        .zip(noise.values())
        .map(|(x, n)| (x + n).clamp(a, b))
        .collect();
    ScalarField::new(f.width(), f.height(), f.dx(), f.bounds(), v).unwrap()
}

fn extensions() -> Outcome {
    let dx = 1.0 / 16.0;
    let (w, h) = (64, 64);
    let still = LeniaSystem::new(exp_bump(1.0, dx), GrowthSpec::Constant(0.0))?;
    let interior = ClipBounds::new(0.2, 0.4)?;
    let mut state = MultiField::new(vec![
        random_field(w, h, dx, interior, 1)?.with_bounds(ClipBounds::UNIT)?,
        random_field(w, h, dx, interior, 2)?.with_bounds(ClipBounds::UNIT)?,
    ])?;
    let mut drift = 0.0f64;
    let mut stayed_inside = true;
    for _ in 0..100 {
        let next = predator_prey_step(&state, &still, &still, 0.01)?;
        for i in 0..w * h {
            let before = state.channel(0).values()[i] + state.channel(1).values()[i];
            let after = next.channel(0).values()[i] + next.channel(1).values()[i];
            drift = drift.max((after - before).abs());
        }
        stayed_inside &= next
            .channels()
            .iter()
            .all(|c| c.min_value() > 0.0 && c.max_value() < 1.0);
        state = next;
    }

    let eater = LeniaSystem::new(exp_bump(1.0, dx), GrowthSpec::GaussianBump { mu: 0.15, sigma: 0.03 })?;
    let depleting = EcosystemSystem::new(Extension::DepletingFood, eater.clone(), None, None, ClipBounds::UNIT)?;
    let mut food_state = MultiField::new(vec![
        blob_field(w, h, dx, ClipBounds::UNIT, 20.0, 20.0, 12.0, 1.0)?,
        random_field(w, h, dx, ClipBounds::UNIT, 3)?,
    ])?;
    let mut untouched = true;
    let mut checked = 0usize;
    for _ in 0..50 {
        let next = depleting.step(&food_state, 0.05)?;
        for i in 0..w * h {
            if food_state.channel(0).values()[i] == 0.0 {
                checked += 1;
                untouched &= next.channel(1).values()[i] == food_state.channel(1).values()[i];
            }
        }
        food_state = next;
    }

    let prey = LeniaSystem::new(exp_bump(0.75, dx), GrowthSpec::GaussianBump { mu: 0.2, sigma: 0.04 })?;
    let lip = ecosystem_lipschitz_constant(&eater, &prey)?;
    let c = [eater.lipschitz_constant()?, prey.lipschitz_constant()?];
    let k = [eater.kernel.l1_norm(), prey.kernel.l1_norm()];
    let widest = c
        .iter()
        .flat_map(|ci| k.iter().map(move |kj| ci * kj))
        .fold(0.0, f64::max);
    let mut ratio = 0.0f64;
    for s in 0..200u64 {
        let x = MultiField::new(
            (0..3)
                .map(|c| random_field(w, h, dx, ClipBounds::UNIT, 1000 + 3 * s + c).unwrap())
                .collect(),
        )?;
        let eps = 1e-4 * 1000f64.powf((s % 7) as f64 / 6.0);
        let y = MultiField::new(
            x.channels()
                .iter()
                .enumerate()
                .map(|(c, f)| noisy(f, eps, 5000 + 3 * s + c as u64))
                .collect(),
        )?;
        let d = sup_distance(&x, &y)?;
        if d > 0.0 {
            let v = sup_distance(
                &ecosystem_vector_field(&x, &eater, &prey)?,
                &ecosystem_vector_field(&y, &eater, &prey)?,
            )?;
            ratio = ratio.max(v / d);
        }
    }
    Ok((
        drift <= 1e-14 && stayed_inside && untouched && checked > 0 && ratio <= lip && lip <= 2.0 + widest,
        format!(
            "X4 drift {drift:.2e}, X3 food kept on {checked} empty cells, V5 ratio {ratio:.3} <= {lip:.3} (paper form {:.3})",
            2.0 + widest
        ),
    ))
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let text = format!("{STANDARD_CONFIG}output.frames_every = 2\nseed = 9\n");
    let mut trees = Vec::new();
    for threads in [1, 4, 4] {
        let dir = tempfile::tempdir()?;
        fs::write(dir.path().join("run.conf"), &text)?;
        let cfg = parse_config(dir.path().join("run.conf"))?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        pool.install(|| -> Result<(), clipflow::CliError> {
            cmd_simulate(&cfg)?;
            cmd_converge(&cfg, 6)?;
            Ok(())
        })?;
        trees.push(tree_bytes(dir.path()));
    }
    let identical = trees[0] == trees[1] && trees[1] == trees[2];

    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let w = 32 << (i % 3);
        let h = 32 << ((i / 3) % 3);
        let dx = 1.0 / 8.0;
        let f = random_field(w, h, dx, ClipBounds::new(-1.0, 1.0)?, 200 + i)?;
        let k = match i % 3 {
            0 => exp_bump(0.75 + (i % 5) as f64 * 0.15, dx),
            1 => KernelSpec::normalized(KernelShape::RingSum {
                c: 1.0,
                rings: vec![
                    Ring {
                        center: 0.4,
                        amplitude: 1.0,
                        width: 0.03,
                    },
                    Ring {
                        center: 0.75,
                        amplitude: -0.4,
                        width: 0.01,
                    },
                ],
            })
            .discretize(dx)?,
            _ => {
                let weights = random_field(7, 7, 1.0, ClipBounds::new(-1.0, 1.0)?, 900 + i)?.into_values();
                DiscreteKernel::from_table(3, weights, dx)?
            }
        };
        worst = worst.max(sup_distance(&convolve_direct(&f, &k)?, &convolve_fft(&f, &k)?)?);
    }
    Ok((
        identical && worst <= 1e-10,
        format!(
            "{} output files identical across 1/4/4 threads: {identical}; FFT vs direct worst {worst:.3e} over 100 cases",
            trees[0].len()
        ),
    ))
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("clip identities", clip_suite),
        ("toy semigroup", toy_semigroup),
        ("gol equivalence", gol_equivalence),
        ("speed bound", speed),
        ("condition e1", e1),
        ("condition e2", e2),
        ("euler convergence", convergence),
        ("tangency", tangency),
        ("support growth", support),
        ("monotone growth", monotone),
        ("irreversibility", irreversibility),
        ("extensions", extensions),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "ACCEPTANCE {:>2} {:<18} {} ({:.1}s) {detail}",
            i + 1,
            name,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
