use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn edsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edsense"))
        .args(args)
        .output()
        .expect("spawn edsense")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Parses a single-record CSV into (name, value) pairs.
fn record(o: &Output) -> Vec<(String, String)> {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(o);
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from);
    let row = lines.next().unwrap().split(',').map(String::from);
    assert!(lines.next().is_none());
    header.zip(row).collect()
}

fn field(rec: &[(String, String)], name: &str) -> f64 {
    rec.iter()
        .find(|(k, _)| k == name)
        .unwrap()
        .1
        .parse()
        .unwrap()
}

fn crate_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

#[test]
fn pd_examples() {
    let r = record(&edsense(&[
        "pd", "--u", "5", "--a", "1", "--pf", "0.2", "--snr-db", "25",
    ]));
    assert!((field(&r, "pm") - 0.1).abs() <= 0.02);
    assert!((field(&r, "pm") + field(&r, "pd") - 1.0).abs() <= 1e-12);

    let r = record(&edsense(&[
        "pd", "--u", "5", "--a", "2", "--pf", "0.1", "--snr-db", "-100",
    ]));
    assert!((field(&r, "pd") - 0.1).abs() <= 1e-8);

    let base = [
        "pd", "--u", "5", "--a", "2.5", "--pf", "0.1", "--snr-db", "10", "--method",
    ];
    let q = record(&edsense(&[&base[..], &["quadrature"]].concat()));
    let s = record(&edsense(&[&base[..], &["series"]].concat()));
    assert_eq!(
        q.iter().find(|(k, _)| k == "method").unwrap().1,
        "quadrature"
    );
    assert_eq!(s.iter().find(|(k, _)| k == "method").unwrap().1, "series");
    assert!((field(&q, "pd") - field(&s, "pd")).abs() <= 1e-8);
}

#[test]
fn pd_from_threshold() {
    let r = record(&edsense(&[
        "pd",
        "--u",
        "1",
        "--a",
        "2",
        "--lambda",
        "4.605170185988091",
        "--snr-db",
        "3",
    ]));
    assert!((field(&r, "pf") - 0.1).abs() <= 1e-11);
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &["pd", "--u", "5", "--a", "1", "--snr-db", "3"],
        &[
            "pd", "--u", "5", "--a", "1", "--pf", "0.1", "--lambda", "3", "--snr-db", "3",
        ],
        &["pd", "--u", "0", "--a", "1", "--pf", "0.1", "--snr-db", "3"],
        &[
            "pd", "--u", "5", "--a", "-1", "--pf", "0.1", "--snr-db", "3",
        ],
        &["pd", "--u", "5", "--a", "1", "--pf", "1.0", "--snr-db", "3"],
        &["threshold", "--u", "5", "--pf", "1.5"],
        &[
            "simulate", "--u", "5", "--pf", "0.1", "--trials", "0", "--seed", "1",
        ],
        &[
            "simulate", "--u", "5", "--pf", "0.1", "--trials", "10", "--seed", "1", "--a", "2",
        ],
        &["sweep", "--kind", "comp-roc", "--u", "5", "--a", "1"],
        &[
            "sweep",
            "--kind",
            "pd-vs-snr",
            "--u",
            "5",
            "--a",
            "1",
            "--pf",
            "0.1",
            "--snr-range=0,10",
        ],
        &["frobnicate"],
    ];
    for args in cases {
        let o = edsense(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn numerical_failure_exits_three() {
    let o = edsense(&[
        "pd", "--u", "10", "--a", "1", "--pf", "0.01", "--snr-db", "-10", "--method", "series",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("converge"));
}

#[test]
fn threshold_examples() {
    let r = record(&edsense(&["threshold", "--u", "1", "--pf", "0.1"]));
    assert!((field(&r, "lambda") - 2.0 * 10f64.ln()).abs() <= 1e-10);
    let r = record(&edsense(&["threshold", "--u", "5", "--pf", "0.1"]));
    assert!((field(&r, "pf_roundtrip") - 0.1).abs() <= 1e-10);
}

#[test]
fn json_output() {
    let o = edsense(&["threshold", "--u", "1", "--pf", "0.1", "--output", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["u"], 1);
    assert_eq!(v[0]["lambda"].as_f64().unwrap(), 4.60517018599);

    let o = edsense(&[
        "sweep",
        "--kind",
        "comp-roc",
        "--u",
        "5",
        "--a",
        "1,2",
        "--snr-db",
        "10",
        "--pf-grid",
        "0.1,0.2",
        "--output",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 4);
    let keys: Vec<&str> = arr[0]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(keys.join(","), edsense::sweep::CSV_HEADER);
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = edsense(&[
        "threshold",
        "--u",
        "2",
        "--pf",
        "0.3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("u,pf,lambda,pf_roundtrip\n2,0.3,"));
}

#[test]
fn simulate_examples() {
    let r = record(&edsense(&[
        "simulate", "--u", "5", "--pf", "0.1", "--trials", "1000000", "--seed", "4",
    ]));
    assert!((field(&r, "estimate") - 0.1).abs() <= field(&r, "half_width_95"));

    let r = record(&edsense(&[
        "simulate", "--u", "5", "--pf", "0.1", "--trials", "1", "--seed", "4", "--a", "2",
        "--snr-db", "10",
    ]));
    let e = field(&r, "estimate");
    assert!(e == 0.0 || e == 1.0);

    let args = [
        "simulate", "--u", "3", "--lambda", "6", "--trials", "200000", "--seed", "8", "--a", "1.5",
        "--snr-db", "2",
    ];
    assert_eq!(edsense(&args).stdout, edsense(&args).stdout);
}

#[test]
fn thread_count_from_environment() {
    let args = [
        "simulate", "--u", "3", "--pf", "0.2", "--trials", "300000", "--seed", "2", "--a", "1",
        "--snr-db", "5",
    ];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_edsense"))
            .args(args)
            .env("EDSENSE_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    assert!(one.status.success());
    assert_eq!(one.stdout, run("4").stdout);
    assert_eq!(run("0").status.code(), Some(2));
    assert_eq!(run("many").status.code(), Some(2));
}

#[test]
fn sweep_config_row_counts() {
    let o = edsense(&[
        "sweep",
        "--config",
        crate_path("configs/snr_severe_fading.toml")
            .to_str()
            .unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], edsense::sweep::CSV_HEADER);
    assert_eq!(lines.len() - 1, 4 * 81);
}

#[test]
fn high_snr_config_row() {
    let o = edsense(&[
        "sweep",
        "--config",
        crate_path("configs/roc_high_snr.toml").to_str().unwrap(),
    ]);
    let text = stdout(&o);
    let row = text
        .lines()
        .find(|l| l.starts_with("comp_roc,5,1,25,0.2,"))
        .unwrap();
    let pm: f64 = row.split(',').nth(7).unwrap().parse().unwrap();
    assert!((pm - 0.1).abs() <= 0.02);
}

#[test]
fn config_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[[sweep]]\nkind = \"pd_vs_snr\"\nu = 5\na_values = [1.0]\npf_fixed = 0.1\nsnr_db_range = { start = 0.0, stop = 5.0, step = -1.0 }\n").unwrap();
    let o = edsense(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step"));

    std::fs::write(
        &bad,
        "[[sweep]]\nkind = \"pd_vs_snr\"\nu = 5\na_values = [1.0\n",
    )
    .unwrap();
    let o = edsense(&["sweep", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let o = edsense(&[
        "sweep",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulated_sweep_agrees_with_analytic() {
    let common = [
        "sweep",
        "--kind",
        "pd-vs-snr",
        "--u",
        "5",
        "--a",
        "1.5",
        "--pf",
        "0.1",
        "--snr-range=0,10,5",
    ];
    let a = stdout(&edsense(&common));
    let s = stdout(&edsense(
        &[
            &common[..],
            &["--engine", "simulate", "--trials", "400000", "--seed", "3"],
        ]
        .concat(),
    ));
    let rows = |t: &str| -> Vec<Vec<String>> {
        t.lines()
            .skip(1)
            .map(|l| l.split(',').map(String::from).collect())
            .collect()
    };
    let (ra, rs) = (rows(&a), rows(&s));
    assert_eq!(ra.len(), 3);
    for (x, y) in ra.iter().zip(&rs) {
        assert_eq!(y[8], "simulate");
        let (pa, ps, hw): (f64, f64, f64) = (
            x[6].parse().unwrap(),
            y[6].parse().unwrap(),
            y[9].parse().unwrap(),
        );
        assert!((pa - ps).abs() <= 3.0 * hw / 1.96, "{pa} vs {ps}");
    }
}

#[test]
fn golden_csvs_regenerate() {
    for name in [
        "snr_severe_fading",
        "snr_mild_fading",
        "roc_low_snr",
        "roc_moderate_snr",
        "roc_high_snr",
    ] {
        let cfg = crate_path(&format!("configs/{name}.toml"));
        let golden = std::fs::read(crate_path(&format!("tests/golden/{name}.csv"))).unwrap();
        let o = edsense(&["sweep", "--config", cfg.to_str().unwrap()]);
        assert!(o.status.success());
        assert!(o.stdout == golden, "{name} differs from its golden file");
    }
}

#[test]
fn verify_quick_passes() {
    let o = edsense(&["verify", "--quick"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.starts_with("check,a,u,points,worst_delta,tolerance,status\n"));
    assert!(text.contains("series_vs_quadrature,"));
    assert!(text.contains("quadrature_vs_montecarlo,"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("pm,5,1,0.2,"))
            .count(),
        3
    );
}
