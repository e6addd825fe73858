use std::process::{Command, Output};

fn lorouter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorouter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn column(out: &Output, name: &str) -> Vec<f64> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let idx = header.split(',').position(|c| c == name).unwrap();
    data_rows(out)
        .iter()
        .map(|r| r[idx].parse().unwrap())
        .collect()
}

#[test]
fn route_horizontal_control() {
    let out = lorouter(&["route", "--theta", "0"]);
    assert!(out.status.success());
    let p = column(&out, "p_sim")[0];
    assert!((p - 0.125).abs() < 1e-12, "p = {p}");
    assert!((column(&out, "chi")[0]).abs() < 1e-12);
}

#[test]
fn route_accepts_radians() {
    let out = lorouter(&["--radians", "route", "--theta", "1.5707963267948966"]);
    assert!(out.status.success());
    assert!((column(&out, "p_sim")[0] - 1.0 / 24.0).abs() < 1e-12);
}

#[test]
fn figure3_rows_decrease() {
    let out = lorouter(&["sweep", "--figure", "3", "--points", "101"]);
    assert!(out.status.success());
    let p = column(&out, "p_sim");
    assert_eq!(p.len(), 101);
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    let seed_line = String::from_utf8(out.stdout).unwrap();
    assert!(seed_line.starts_with("# seed="));
}

#[test]
fn same_seed_same_bytes() {
    let args = ["sweep", "--param", "theta", "--points", "11", "--seed", "7"];
    let a = lorouter(&args);
    let b = lorouter(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = lorouter(&["sweep", "--param", "theta", "--points", "11", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn random_signal_is_seeded() {
    let args = ["route", "--theta", "30", "--random-signal", "--seed", "11"];
    assert_eq!(lorouter(&args).stdout, lorouter(&args).stdout);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("lorouter-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.csv");
    let file_run = lorouter(&[
        "tunable",
        "--theta",
        "20",
        "--phi",
        "90",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(file_run.status.success());
    assert!(file_run.stdout.is_empty());
    let stdout_run = lorouter(&["tunable", "--theta", "20", "--phi", "90"]);
    assert_eq!(std::fs::read(&path).unwrap(), stdout_run.stdout);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn domain_errors_exit_2() {
    for args in [
        &["route", "--theta", "120"][..],
        &["tunable", "--phi", "200"],
        &["route", "--alpha", "2", "--beta", "0"],
        &["sweep", "--figure", "4"],
        &["multi", "--n", "0"],
    ] {
        let out = lorouter(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lorouter(&["route", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        lorouter(&["route", "--alpha", "x,y"]).status.code(),
        Some(2)
    );
}

#[test]
fn circuit_document_matches_builtin() {
    let doc = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../core/circuits/fixed_router.circuit"
    );
    let from_doc = lorouter(&["route", "--theta", "40", "--circuit", doc]);
    let builtin = lorouter(&["route", "--theta", "40"]);
    assert!(from_doc.status.success());
    assert!((column(&from_doc, "p_sim")[0] - column(&builtin, "p_sim")[0]).abs() < 1e-14);
    assert!((column(&from_doc, "chi")[0] - column(&builtin, "chi")[0]).abs() < 1e-12);
}

#[test]
fn malformed_circuit_reports_location() {
    let dir = std::env::temp_dir().join(format!("lorouter-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.circuit");
    std::fs::write(
        &path,
        "lorouter-circuit 1\nmodes 1 2 c\nsignal 1\ncontrol c\noutput 1 2\nwidget 1\n",
    )
    .unwrap();
    let out = lorouter(&["route", "--circuit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("widget"), "{err}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn multi_single_signal_matches_formula() {
    let out = lorouter(&["multi", "--n", "1", "--theta", "60"]);
    assert!(out.status.success());
    let (p, q) = (column(&out, "p_sim")[0], column(&out, "p_analytic")[0]);
    assert!((p - q).abs() < 1e-12);
}
