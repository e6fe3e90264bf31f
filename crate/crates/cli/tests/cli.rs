use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DMatrix;

fn repnum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repnum"))
        .args(args)
        .env_remove("REPNUM_THREADS")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn value_after(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|v| v.split_whitespace().next())
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn compute_analytic_example() {
    let o = repnum(&["compute", "--builtin", "example1-analytic", "--N", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("R_N = ")).unwrap();
    assert!(line.starts_with("R_N = 1.0000000000") || line.starts_with("R_N = 0.99999999999"), "{line}");
    // 17 significant digits
    let digits = line["R_N = ".len()..].chars().filter(char::is_ascii_digit).count();
    assert_eq!(digits, 17, "{line}");
    assert!((value_after(&out, "R_N = ") - 1.0).abs() <= 1e-10);
    assert!(value_after(&out, "residual = ") <= 1e-8);
}

#[test]
fn missing_config_is_a_config_error() {
    let o = repnum(&["compute", "--config", "missing.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with("error: code=CONFIG_NOT_FOUND module=config message="), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let o = repnum(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));

    for args in [
        &["compute", "--builtin", "example1-analytic", "--bogus"][..],
        &["compute", "--builtin", "example1-analytic", "--N"],
        &["compute", "--builtin", "hbv", "--config", "x.toml"],
        &["compute", "--builtin", "nope"],
        &["compute", "--builtin", "example1-analytic", "--N", "10:0:20"],
    ] {
        let o = repnum(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: code=USAGE module=cli message="), "{args:?}: {err}");
    }
}

#[test]
fn help_exits_0() {
    let o = repnum(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sweep"));
}

#[test]
fn bad_config_reports_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.toml");
    std::fs::write(&path, "d = 1\na_dagger = 1.0\nbeta = \"exp(-2*a\"\n").unwrap();
    let o = repnum(&["compute", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("code=EXPR_SYNTAX") || err.contains("code=CONFIG_INVALID"), "{err}");
    assert!(err.contains("line 3") || err.contains("beta"), "{err}");
}

#[test]
fn invalid_builtin_parameter() {
    let o = repnum(&["compute", "--builtin", "hbv", "--nu", "2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: code=INVALID_ARGUMENT"));
    let o = repnum(&["compute", "--builtin", "hbv", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_io_error() {
    let o = repnum(&[
        "sweep",
        "--builtin",
        "example1-analytic",
        "--N",
        "4:2:8",
        "-o",
        "/nonexistent-dir/sweep.csv",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error: code=IO module=io"));
}

#[test]
fn config_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w3.toml");
    std::fs::write(
        &path,
        "d = 1\na_dagger = 1.0\nbeta = \"(0.5-a)^2*abs(0.5-a)*(1-alpha)\"\ndelta = \"-1\"\n",
    )
    .unwrap();
    let from_file = repnum(&["compute", "--config", path.to_str().unwrap(), "--N", "24"]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    let builtin = repnum(&["compute", "--builtin", "example1-w3", "--N", "24"]);
    // same model up to the normalization constant, so R scales by it
    let (a, b) = (value_after(&stdout(&from_file), "R_N = "), value_after(&stdout(&builtin), "R_N = "));
    assert!(a > 0.0 && (b - 1.0).abs() < 1e-3);
    let other = repnum(&["compute", "--config", path.to_str().unwrap(), "--N", "24", "--ordering", "minv-b"]);
    assert!((value_after(&stdout(&other), "R_N = ") - a).abs() <= 1e-10 * a);
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = repnum(&[
        "sweep",
        "--builtin",
        "example1-w3",
        "--N",
        "20:20:100",
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,R_N_BMinv,R_N_MinvB,abs_err,fitted_order,cond_M,runtime_ms");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("20,"));
    assert!(stdout(&o).contains("order"), "{}", stdout(&o));
}

#[test]
fn eigenfunction_csv() {
    let o = repnum(&["eigenfunction", "--builtin", "example2", "--N", "40", "--points", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "a,y_1,x_1");
    assert_eq!(lines.len(), 12);
    for l in &lines[1..] {
        let y: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!((y - 1.0).abs() <= 1e-8, "{l}");
    }
}

#[test]
fn scan_needs_hbv() {
    let o = repnum(&["scan", "--builtin", "example2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = repnum(&["scan", "--builtin", "hbv", "--N", "6", "--grid-points", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 10);
}

fn read_csv(path: &Path) -> DMatrix<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect();
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

#[test]
fn dumped_matrices_reproduce_r() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mats");
    let o = repnum(&[
        "dump-matrices",
        "--builtin",
        "hbv",
        "--N",
        "6",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r_cli = value_after(&stdout(&o), "R_N = ");
    let b = read_csv(&out.join("B.csv"));
    let m = read_csv(&out.join("M.csv"));
    let h = &b * m.try_inverse().unwrap();
    let rho = h.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!((rho - r_cli).abs() <= 1e-12 * r_cli, "{rho} vs {r_cli}");
}

#[test]
fn thread_setting_does_not_change_output() {
    let run = |threads: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_repnum"));
        cmd.args(["sweep", "--builtin", "hbv", "--N", "4:2:10"]);
        match threads {
            Some(t) => cmd.env("REPNUM_THREADS", t),
            None => cmd.env_remove("REPNUM_THREADS"),
        };
        cmd.output().unwrap()
    };
    let a = run(Some("1"));
    let b = run(None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let bad = run(Some("zero"));
    assert_eq!(bad.status.code(), Some(2));
}
