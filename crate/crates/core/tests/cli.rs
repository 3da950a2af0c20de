//! Runs the `bfd-heat` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bfd-heat"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn quick_run(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--case",
        "periodic_1d",
        "--n",
        "8,12,16",
        "--integrator",
        "gl6",
        "--refine-dt",
        "false",
        "--t-final",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn run_writes_deterministic_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = quick_run(d, &["--c", "0,-0.3077"]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let csv = fs::read_to_string(a.join("periodic_1d.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(b.join("periodic_1d.csv")).unwrap());
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("case,c,N,h,err_l2,err_linf,err_post,rate")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.len() == 8 && r[0] == "periodic_1d"));
    assert!(rows[0][7].is_empty() && !rows[1][7].is_empty());
    let svg = fs::read_to_string(a.join("periodic_1d.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg, fs::read_to_string(b.join("periodic_1d.svg")).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# study\nc = 0.5\npostprocess = none\n").unwrap();
    let out = dir.path().join("out");
    let o = quick_run(&out, &["--config", cfg.to_str().unwrap(), "--c", "-0.25"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(out.join("periodic_1d.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[1], "-0.25");
        assert!(f[6].is_empty(), "postprocess = none from the config file");
    }
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "cases = periodic_1d\n").unwrap();
    let o = run(&[
        "stability",
        "--c-grid",
        "3",
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_arguments_exit_with_one() {
    assert_eq!(
        run(&["run", "--case", "periodic_3d"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["symbol", "--n", "2"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--n", "8,8,12"]).status.code(), Some(1));
}

#[test]
fn non_decreasing_errors_exit_with_two() {
    // One large step: the time error dominates and grows slightly with N.
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "run",
        "--case",
        "periodic_1d",
        "--n",
        "24,32,48",
        "--c",
        "0",
        "--integrator",
        "gl6",
        "--dt",
        "0.1",
        "--refine-dt",
        "false",
        "--t-final",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn symbol_table_has_one_row_per_frequency() {
    let o = run(&["symbol", "--n", "8", "--c", "-0.3077"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("omega,nu,re(qhat1),im(qhat1),re(qhat2),im(qhat2),mismatch")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let mismatch: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(mismatch <= 1e-9);
    }
}

#[test]
fn stability_and_verify_pass() {
    let o = run(&["stability", "--c-grid", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("c,form,min_eig,max_eig,verdict\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 4);
    let o = run(&["verify"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    assert!(!String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}

#[test]
fn matrix_market_header_and_size() {
    let o = run(&["matrix", "--case", "dirichlet_1d", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    let dims = text.lines().find(|l| !l.starts_with('%')).unwrap();
    assert!(dims.starts_with("8 8 "));
}
