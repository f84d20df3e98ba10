use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use crystal_homog::config::SimulationConfig;
use crystal_homog::io::read_csv;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_crystal-homog"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    status.status.code().unwrap()
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn cell_laminate_writes_tensor_table() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["cell"], &configs().join("cell_laminate.toml"), dir.path()), 0);
    let (h, rows) = read_csv(&dir.path().join("tensors.csv")).unwrap();
    assert_eq!(h.len(), 15);
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert!((r[column(&h, "a11")] - 1.6).abs() < 0.016);
        assert!((r[column(&h, "a22")] - 2.5).abs() < 0.025);
        assert_eq!(r[column(&h, "porosity")], 1.0);
    }
    let (gh, _) = read_csv(&dir.path().join("geometry.csv")).unwrap();
    assert_eq!(gh, ["epsilon", "pore_volume", "gamma_measure", "eps_times_gamma_star"]);
}

#[test]
fn kinetics_table_is_bounded_and_monotone_in_v_for_small_u() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("kinetics_table.toml");
    assert_eq!(run(&["kinetics-table"], &cfg, dir.path()), 0);
    let (h, rows) = read_csv(&dir.path().join("kinetics.csv")).unwrap();
    assert_eq!(h, ["u", "v", "R", "psi_delta_at_w0"]);
    assert_eq!(rows.len(), 41 * 41);
    // k = 2 in the example config
    assert!(rows.iter().all(|r| r[2] >= 0.0 && r[2] <= 0.5));
    assert!(rows.iter().filter(|r| r[0] == 0.0 || r[1] == 0.0).all(|r| r[2] == 0.0));
    // at fixed u, R rises in v while 1 + k1 u > k2 v
    for u_row in rows.chunks(41) {
        let u = u_row[0][0];
        for w in u_row.windows(2) {
            if w[1][1] < 1.0 + u {
                assert!(w[1][2] >= w[0][2]);
            }
        }
    }
    assert!(rows.iter().all(|r| r[3] == 0.5));
}

#[test]
fn trivial_sweep_has_zero_rows_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["sweep"], &configs().join("sweep_trivial.toml"), dir.path()), 0);
    let (h, rows) = read_csv(&dir.path().join("errors.csv")).unwrap();
    assert_eq!(h, ["epsilon", "delta", "L2_u", "L2_v", "L2_w", "runtime_seconds"]);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[2..5].iter().all(|&e| e <= 1e-12)));
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn repeated_epsilon_fails_the_trend_check() {
    let dir = tempfile::tempdir().unwrap();
    let code = Command::new(env!("CARGO_BIN_EXE_crystal-homog"))
        .args(["sweep", "--override", "initial.u0=\"cosx:1,0.5\""])
        .args(["--override", "sweep.epsilons=[0.25, 0.25]"])
        .arg("--config")
        .arg(configs().join("sweep_trivial.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap()
        .status
        .code();
    assert_eq!(code, Some(4));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    for text in [
        "[time]\nT = 1.0\nh = 0.1\n[geometry]\nbogus = 1\n",
        "[time]\nT = 1.0\n",
        "[time]\nT = 1.0\nh = 0.1\n[kinetics]\ndelta = 0.0\n",
        "[time]\nT = 1.0\nh = 0.3\n",
        "not toml at all [",
    ] {
        fs::write(&bad, text).unwrap();
        assert_eq!(run(&["macro"], &bad, &dir.path().join("o")), 2, "{text}");
    }
    assert_eq!(run(&["cell"], &dir.path().join("missing.toml"), dir.path()), 2);
}

#[test]
fn micro_writes_snapshots_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let code = Command::new(env!("CARGO_BIN_EXE_crystal-homog"))
        .args(["micro", "--override", "time.T=0.01", "--override", "geometry.epsilon=0.25"])
        .arg("--config")
        .arg(configs().join("micro.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap()
        .status
        .code();
    assert_eq!(code, Some(0));
    for name in ["micro_fields_0.csv", "micro_fields_4.csv", "micro_boundary_4.csv", "micro_diag.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let (h, rows) = read_csv(&dir.path().join("micro_boundary_4.csv")).unwrap();
    assert_eq!(h, ["face_id", "x1", "x2", "w", "z_used"]);
    // 16 inclusions with 32 faces each at cell resolution 16
    assert_eq!(rows.len(), 16 * 32);
    let (_, diag) = read_csv(&dir.path().join("micro_diag.csv")).unwrap();
    assert_eq!(diag.len(), 5);
}

#[test]
fn macro_reruns_are_byte_identical_and_config_round_trips() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = configs().join("macro.toml");
    let args = ["macro", "--override", "time.T=0.05", "--override", "geometry.macro_resolution=16"];
    let go = |out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_crystal-homog"))
            .args(args)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(go(a.path()), Some(0));
    assert_eq!(go(b.path()), Some(0));
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "macro_fields_20.csv"));
    for n in &names {
        assert_eq!(fs::read(a.path().join(n)).unwrap(), fs::read(b.path().join(n)).unwrap(), "{n:?}");
    }
    let resolved = fs::read_to_string(a.path().join("resolved_config.toml")).unwrap();
    let parsed = SimulationConfig::parse(&resolved).unwrap();
    assert_eq!(parsed.emit(), resolved);
    assert_eq!(parsed.time.t_end, 0.05);
}
