use std::fs;
use std::path::Path;

use clipflow::commands::{cmd_converge, cmd_simulate, frame_path, STANDARD_CONFIG};
use clipflow::error::{EXIT_ERROR, EXIT_EXTINCT, EXIT_OK, EXIT_UNSUPPORTED};
use clipflow::{parse_config, SimConfig};
use clipflow_core::field::{read_field_file, write_field_file};
use clipflow_core::{ClipBounds, MultiField, ScalarField};

fn config_in(dir: &Path, text: &str) -> SimConfig {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    parse_config(&path).unwrap()
}

fn read_metrics(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SMALL_LENIA: &str = "model = lenia
grid.width = 64
grid.height = 64
grid.dx = 0.0625
kernel.type = exp_bump
kernel.scale = 1
growth.type = gaussian
growth.sigma = 0.03
init.type = blob
init.radius = 16
t_step = 0.1
steps = 100
output.frames_every = 25
";

#[test]
fn lenia_run_writes_every_row_and_respects_the_speed_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), SMALL_LENIA);
    let outcome = cmd_simulate(&cfg).unwrap();
    assert_eq!(outcome.exit_code(), EXIT_OK);
    assert_eq!(outcome.steps_run, 100);
    let header = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert!(header.starts_with("step,time,mass_0,min_0,max_0,sup_change,extinct\n"));
    let rows = read_metrics(&dir.path().join("metrics.csv"));
    assert_eq!(rows.len(), 101);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], k.to_string());
        assert_eq!(row[1].parse::<f64>().unwrap(), k as f64 * 0.1);
        let mass: f64 = row[2].parse().unwrap();
        assert!(mass.is_finite() && mass >= 0.0);
        let change: f64 = row[5].parse().unwrap();
        assert!(change <= 0.1 * 1.0 + 1e-12);
    }
    for k in [0, 25, 50, 75, 100] {
        let frame = read_field_file(frame_path(&dir.path().join("frames"), k)).unwrap();
        assert_eq!(frame.channel_count(), 1);
        assert!(dir.path().join(format!("frames/frame_{k:06}_c0.pgm")).exists());
    }
    assert!(!frame_path(&dir.path().join("frames"), 10).exists());
}

#[test]
fn glider_file_translates_diagonally() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = vec![0.0; 256];
    let glider = [(1, 0), (2, 1), (0, 2), (1, 2), (2, 2)];
    for (x, y) in glider {
        v[y * 16 + x] = 1.0;
    }
    let start = ScalarField::new(16, 16, 1.0, ClipBounds::UNIT, v).unwrap();
    write_field_file(&MultiField::single(start).unwrap(), dir.path().join("glider.lenf")).unwrap();
    let cfg = config_in(
        dir.path(),
        "model = gol\ngrid.width = 16\ngrid.height = 16\ninit.type = file\ninit.path = glider.lenf\nt_step = 1\nsteps = 4\n",
    );
    assert_eq!(cmd_simulate(&cfg).unwrap().exit_code(), EXIT_OK);
    let last = read_field_file(frame_path(&dir.path().join("frames"), 4)).unwrap();
    let mut expect = vec![0.0; 256];
    for (x, y) in glider {
        expect[(y + 1) * 16 + x + 1] = 1.0;
    }
    assert_eq!(last.channel(0).values(), expect.as_slice());
}

#[test]
fn empty_start_is_extinct_at_step_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(
        dir.path(),
        &SMALL_LENIA.replace(
            "init.type = blob\ninit.radius = 16\n",
            "init.type = constant\ninit.value = 0\n",
        ),
    );
    let outcome = cmd_simulate(&cfg).unwrap();
    assert_eq!(outcome.extinct_at, Some(0));
    assert_eq!(outcome.exit_code(), EXIT_EXTINCT);
    let rows = read_metrics(&dir.path().join("metrics.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].last().unwrap(), "1");
    assert!(frame_path(&dir.path().join("frames"), 0).exists());
}

#[test]
fn faint_blob_dies_before_the_last_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(
        dir.path(),
        &SMALL_LENIA.replace("init.radius = 16\n", "init.radius = 4\ninit.peak = 0.3\n"),
    );
    let outcome = cmd_simulate(&cfg).unwrap();
    let k = outcome.extinct_at.expect("faint blob dies");
    assert!(k > 0 && k < 100);
    let rows = read_metrics(&dir.path().join("metrics.csv"));
    assert_eq!(rows.len(), k + 1);
    assert!(frame_path(&dir.path().join("frames"), k).exists());
}

#[test]
fn multi_channel_models_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = include_str!("../configs/ecosystem.conf").replace("steps = 200", "steps = 20");
    let cfg = config_in(dir.path(), &text);
    assert_eq!(cmd_simulate(&cfg).unwrap().exit_code(), EXIT_OK);
    let frame = read_field_file(frame_path(&dir.path().join("frames"), 20)).unwrap();
    assert_eq!(frame.channel_count(), 3);
    for text in [
        SMALL_LENIA.replace("model = lenia", "model = depleting_food") + "food.type = random\n",
        SMALL_LENIA.replace("model = lenia", "model = food") + "food.type = constant\nfood.value = 0.2\n",
        SMALL_LENIA.replace("model = lenia", "model = asymptotic"),
    ] {
        let cfg = config_in(dir.path(), &text.replace("steps = 100", "steps = 5"));
        assert_eq!(cmd_simulate(&cfg).unwrap().exit_code(), EXIT_OK);
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), b"").unwrap();
    let cfg = config_in(
        dir.path(),
        &format!("{SMALL_LENIA}output.metrics_path = blocker/metrics.csv\n"),
    );
    let err = cmd_simulate(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_ERROR);
    assert!(err.to_string().contains("blocker"));
}

#[test]
fn converge_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), STANDARD_CONFIG);
    let outcome = cmd_converge(&cfg, 8).unwrap();
    assert_eq!(outcome.report.refinements.len(), 7);
    assert_eq!(outcome.exit_code(), EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("n,d_n,order\n2,"));
    let tangency = fs::read_to_string(dir.path().join("tangency.csv")).unwrap();
    assert_eq!(tangency.lines().count(), 8);

    let constant = config_in(
        dir.path(),
        "model = lenia\ngrid.width = 32\ngrid.height = 32\ngrid.dx = 0.0625\nkernel.type = exp_bump\nkernel.scale = 0.5\ngrowth.type = constant\ngrowth.value = 0.25\ninit.type = constant\ninit.value = 0.125\nt_step = 0.1\nsteps = 1\n",
    );
    let outcome = cmd_converge(&constant, 6).unwrap();
    assert!(outcome.report.refinements.iter().all(|&(_, d)| d == 0.0));
    assert!(outcome.report.tangency.iter().all(|&(_, r)| r == 0.0));
    assert_eq!(outcome.exit_code(), EXIT_OK);

    assert_eq!(cmd_converge(&cfg, 0).unwrap_err().exit_code(), EXIT_ERROR);
    assert_eq!(cmd_converge(&cfg, 1).unwrap_err().exit_code(), EXIT_ERROR);
    let gol = config_in(
        dir.path(),
        "model = gol\ngrid.width = 8\ngrid.height = 8\nt_step = 1\nsteps = 1\n",
    );
    assert_eq!(cmd_converge(&gol, 4).unwrap_err().exit_code(), EXIT_UNSUPPORTED);
}

#[test]
fn extension_models_converge_too() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        include_str!("../configs/ecosystem.conf").to_string() + "converge.time = 0.5\nconverge.reference_steps = 256\n";
    let cfg = config_in(dir.path(), &text);
    let outcome = cmd_converge(&cfg, 5).unwrap();
    assert_eq!(outcome.report.refinements.len(), 4);
    assert_eq!(outcome.report.tangency.len(), 7);
}
