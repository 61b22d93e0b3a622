use std::fs;
use std::process::{Command, Output};

fn wsndct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsndct"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output) -> f64 {
    let text = stdout(o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row = lines.next().unwrap();
    let col = header.iter().position(|h| *h == "value").unwrap();
    row.rsplit(',')
        .next()
        .unwrap()
        .parse()
        .map_err(|_| (col, row.to_string()))
        .unwrap()
}

#[test]
fn analytic_values() {
    let o = wsndct(&[
        "analytic",
        "--formula",
        "intra_disk",
        "-n",
        "2000",
        "--nc",
        "10",
        "--R0",
        "50",
    ]);
    assert!(o.status.success());
    assert_eq!(value(&o), 248_750.0);

    let o = wsndct(&[
        "analytic",
        "--formula",
        "e_d2_square",
        "-L",
        "100",
        "--Li",
        "50",
    ]);
    assert_eq!(value(&o), 100.0 * 100.0 / 6.0);

    let o = wsndct(&["analytic", "--formula", "chandler", "--cdf", "0.2,0.7,1.0"]);
    assert!((value(&o) - 2.1).abs() < 1e-12);

    let o = wsndct(&[
        "analytic",
        "--formula",
        "total_multihop",
        "--intra",
        "23750",
        "--hops",
        "2.5",
        "-R",
        "18",
        "-K",
        "200",
    ]);
    assert_eq!(value(&o), 185_750.0);
}

#[test]
fn exit_codes() {
    let o = wsndct(&[
        "analytic",
        "--formula",
        "intra_square",
        "-n",
        "10",
        "--nc",
        "2",
        "-L",
        "1",
        "--alpha",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = wsndct(&["analytic", "--formula", "intra_square", "-n", "10"]);
    assert_eq!(o.status.code(), Some(2));

    let o = wsndct(&["run", "fig99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig7"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "trials = 0\n").unwrap();
    let o = wsndct(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strict_run_fails_on_unreachable_heads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sparse.toml");
    fs::write(
        &cfg,
        r#"scenario = "sparse"
trials = 2
n_nodes = 300
bs_li = 300.0
n_clusters = [20]
k_budget = [40]

[[routes]]
kind = "multihop"
ranges = [4.0]
strategy = "bfs_min_hop"
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let args = ["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let o = wsndct(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let o = wsndct(&[args.as_slice(), &["--strict"]].concat());
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn run_writes_all_tables_and_manifest_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = wsndct(&[
        "run",
        "fig3",
        "--trials",
        "2",
        "--seed",
        "0x2a",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "aggregate.csv",
        "trials.csv",
        "energy.csv",
        "histogram.csv",
        "manifest.toml",
    ] {
        assert!(a.join(f).exists(), "{f}");
    }
    let manifest = a.join("manifest.toml");
    let o = wsndct(&[
        "run",
        manifest.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(a.join("aggregate.csv")).unwrap(),
        fs::read(b.join("aggregate.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("trials.csv")).unwrap(),
        fs::read(b.join("trials.csv")).unwrap()
    );
}

#[test]
fn inspect_compress_spends_the_budget() {
    let o = wsndct(&["inspect", "compress", "fig3", "--trial", "1", "-K", "150"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("cluster_index,n,coeff_index,coeff_value")
    );
    assert_eq!(lines.count(), 150);

    let o = wsndct(&["inspect", "cluster", "fig3", "--nc", "7"]);
    assert!(o.status.success());
    let heads = stdout(&o)
        .lines()
        .skip(1)
        .filter(|l| l.ends_with(",1"))
        .count();
    assert_eq!(heads, 7);
    assert_eq!(stdout(&o).lines().count(), 2001);
}

#[test]
fn list_names_presets() {
    let o = wsndct(&["list"]);
    let names = stdout(&o);
    assert!(names.lines().any(|l| l == "fig7"));
    assert!(names.lines().any(|l| l == "fig14"));
}
