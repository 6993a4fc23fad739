//! End-to-end CLI behavior: exit codes, determinism, and file outputs.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cmcqp"))
}

fn stdout_of(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn missing_required_flag_exits_2_with_usage() {
    let out = bin().args(["detect", "--n", "8"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage") || err.contains("required"));
}

#[test]
fn unknown_subcommand_exits_2() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_is_deterministic_across_invocations() {
    let args = [
        "solve", "--case", "a2", "--dir", "max", "--n", "8", "--seed", "1",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(stdout_of(&a), stdout_of(&b));
    assert!(stdout_of(&a).contains("objective"));
}

#[test]
fn detect_is_deterministic_and_prints_snr() {
    let args = ["detect", "--n", "16", "--doppler", "0.2", "--corr", "0.8"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(stdout_of(&a), stdout_of(&b));
    assert!(stdout_of(&a).lines().any(|l| l.starts_with("snr_db ")));
}

#[test]
fn invalid_matrix_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "2 2\n1.0 0.0\nNaN 0.0\n1.0 0.0\n0.0 0.0\n").unwrap();
    let out = bin()
        .args(["solve", "--case", "a1", "--dir", "min"])
        .arg("--matrix")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn non_psd_matrix_under_a2_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("indefinite.txt");
    // Hermitian but indefinite: diag(1, -1)
    std::fs::write(&path, "2 2\n1.0 0.0\n0.0 0.0\n0.0 0.0\n-1.0 0.0\n").unwrap();
    let out = bin()
        .args(["solve", "--case", "a2", "--dir", "min"])
        .arg("--matrix")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_corr_exits_3() {
    let out = bin()
        .args(["detect", "--n", "8", "--doppler", "0.2", "--corr", "1.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn solve_round_trips_a_matrix_file_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mpath = dir.path().join("m.txt");
    let tpath = dir.path().join("trace.csv");
    // small Hermitian PD matrix through the library writer
    let m = cmcqp::problem::CMatrix::from_fn(3, 3, |i, j| {
        num_complex::Complex64::new(0.5_f64.powi((i as i32 - j as i32).abs()), 0.0)
    });
    cmcqp::io::save_complex_matrix(&mpath, &m).unwrap();
    let out = bin()
        .args(["solve", "--case", "a2", "--dir", "max", "--seed", "3"])
        .arg("--matrix")
        .arg(&mpath)
        .arg("--trace-out")
        .arg(&tpath)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = cmcqp_cli::tracefile::load_trace_csv(&tpath).unwrap();
    assert!(!rows.is_empty());
    let reported: f64 = stdout_of(&out)
        .lines()
        .find_map(|l| l.strip_prefix("objective ").map(|v| v.parse().unwrap()))
        .unwrap();
    assert_eq!(reported.to_bits(), rows.last().unwrap().objective.to_bits());
}

#[test]
fn solve_audit_reports_case_budgets() {
    let out = bin()
        .args([
            "solve", "--case", "a2", "--dir", "min", "--n", "24", "--seed", "2", "--audit",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    let per_iter: f64 = text
        .lines()
        .find_map(|l| {
            l.strip_prefix("matvecs_per_iter ")
                .map(|v| v.parse().unwrap())
        })
        .unwrap();
    // one extra product evaluates the initial point
    assert!(per_iter <= 2.0 + 0.5, "per-iter {per_iter}");
}

#[test]
fn bench_writes_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "bench",
            "--ensemble",
            "a2-wishart",
            "--n-list",
            "8,12",
            "--trials",
            "2",
            "--solvers",
            "cmcqp,pml",
            "--dir",
            "min",
            "--save-traces",
        ])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = stdout_of(&out);
    assert!(table.contains("solver") && table.contains("cmcqp") && table.contains("pml"));
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with("solver,n,trials,mean_time_s,mean_iters,min_db,max_db,mean_db"));
    assert_eq!(csv.lines().count(), 1 + 4); // 2 sizes x 2 solvers
    assert!(dir.path().join("trace_cmcqp_n8_t0.csv").exists());
    assert!(std::fs::read_to_string(dir.path().join("summary.txt"))
        .unwrap()
        .contains("cmcqp"));
}

#[test]
fn wf_reports_reduction_and_exports_waveforms() {
    let dir = tempfile::tempdir().unwrap();
    let wpath = dir.path().join("designed.txt");
    let out = bin()
        .args([
            "wf",
            "--waveforms",
            "2",
            "--length",
            "16",
            "--lags",
            "4",
            "--seed",
            "5",
            "--max-iters",
            "300",
        ])
        .arg("--waveform-out")
        .arg(&wpath)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout_of(&out);
    let reduction: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("reduction_db ").map(|v| v.parse().unwrap()))
        .unwrap();
    assert!(reduction > 3.0, "reduction {reduction}");
    let m = cmcqp::io::load_complex_matrix(&wpath).unwrap();
    assert_eq!((m.nrows(), m.ncols()), (16, 2));
    for v in m.iter() {
        assert!((v.norm() - 1.0).abs() <= 1e-12);
    }
}
