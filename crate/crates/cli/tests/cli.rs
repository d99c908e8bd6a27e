mod common;

use std::fs;

use common::{snapshot, stderr, velergo, write_inputs};
use tempfile::tempdir;

fn base_args<'a>(gdp: &'a str, money: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "--gdp",
        gdp,
        "--money",
        money,
        "--out-dir",
        out,
        "--n-paths",
        "200",
    ]
}

#[test]
fn ingest_writes_velocity_artifacts() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 120);
    let out = dir.path().join("out");
    let (g, m, o) = (
        g.to_str().unwrap(),
        m.to_str().unwrap(),
        out.to_str().unwrap(),
    );
    let mut args = vec!["ingest"];
    args.extend(base_args(g, m, o));
    let res = velergo(&args, None);
    assert!(res.status.success(), "{}", stderr(&res));
    let velocity = fs::read_to_string(out.join("velocity.csv")).unwrap();
    assert!(velocity.starts_with("DATE,VALUE\n1959-01-01,"));
    // every quarter of both inputs overlaps
    assert_eq!(velocity.lines().count(), 1 + 120);
    let returns = fs::read_to_string(out.join("velocity_returns.csv")).unwrap();
    assert_eq!(returns.lines().count(), 120);
    let meta = fs::read_to_string(out.join("ingest.meta")).unwrap();
    assert!(meta.contains("velocity-rows = 120\n"));
    assert!(meta.contains("seed = 0\n"));
    assert!(meta.contains("artifacts = velocity.csv,velocity_returns.csv\n"));
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempdir().unwrap();
    let (g, _) = write_inputs(dir.path(), 40);
    let missing = dir.path().join("nope.csv");
    let res = velergo(
        &[
            "ingest",
            "--gdp",
            g.to_str().unwrap(),
            "--money",
            missing.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains(missing.to_str().unwrap()));
}

#[test]
fn beta_at_or_below_three_halves_is_rejected() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 120);
    let out = dir.path().join("out");
    let (g, m, o) = (
        g.to_str().unwrap(),
        m.to_str().unwrap(),
        out.to_str().unwrap(),
    );
    let mut args = vec!["calibrate", "--beta-grid", "1.4,1.6"];
    args.extend(base_args(g, m, o));
    let res = velergo(&args, None);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("1.4"));
    assert!(!out.join("calibration.csv").exists());
}

#[test]
fn too_few_paths_is_a_config_error() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 40);
    let res = velergo(
        &[
            "forecast",
            "--gdp",
            g.to_str().unwrap(),
            "--money",
            m.to_str().unwrap(),
            "--n-paths",
            "99",
        ],
        None,
    );
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_observation_is_a_data_error() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 40);
    let broken = dir.path().join("broken.csv");
    let dotted: String = fs::read_to_string(&g)
        .unwrap()
        .lines()
        .map(|l| {
            if l.starts_with("1960-01-01") {
                "1960-01-01,.".to_string()
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&broken, dotted).unwrap();
    let res = velergo(
        &[
            "ingest",
            "--gdp",
            broken.to_str().unwrap(),
            "--money",
            m.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(res.status.code(), Some(3), "{}", stderr(&res));
    assert!(stderr(&res).contains("line 6"));
}

#[test]
fn constant_velocity_is_a_numeric_failure() {
    let dir = tempdir().unwrap();
    let mut gdp = String::from("DATE,GDP\n");
    let mut m2 = String::from("DATE,M2\n");
    for i in 0..100 {
        let m = 1959 * 12 + 3 * i;
        let v = 100.0 + i as f64;
        gdp.push_str(&format!("{}-{:02}-01,{}\n", m / 12, m % 12 + 1, 2.0 * v));
        m2.push_str(&format!("{}-{:02}-01,{v}\n", m / 12, m % 12 + 1));
    }
    fs::write(dir.path().join("g.csv"), gdp).unwrap();
    fs::write(dir.path().join("m.csv"), m2).unwrap();
    let out = dir.path().join("out");
    let res = velergo(
        &[
            "compare",
            "--gdp",
            dir.path().join("g.csv").to_str().unwrap(),
            "--money",
            dir.path().join("m.csv").to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
            "--split",
            "1980-01-01",
        ],
        None,
    );
    assert_eq!(res.status.code(), Some(4), "{}", stderr(&res));
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 120);
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        format!(
            "# test run\ngdp = {}\nmoney = {}\nout_dir = {}\nseed = 5\nn-paths = 300\nhorizon = 2\n",
            g.display(),
            m.display(),
            out.display()
        ),
    )
    .unwrap();
    let res = velergo(
        &["forecast", "--config", cfg.to_str().unwrap(), "--seed", "9"],
        None,
    );
    assert!(res.status.success(), "{}", stderr(&res));
    let meta = fs::read_to_string(out.join("forecast.meta")).unwrap();
    assert!(meta.contains("seed = 9\n"));
    assert!(meta.contains("n-paths = 300\n"));
    let fan = fs::read_to_string(out.join("forecast.csv")).unwrap();
    let mut lines = fan.lines();
    assert_eq!(lines.next(), Some("date,mean,q05,q25,q50,q75,q95"));
    // 2 years of quarters plus the anchor
    assert_eq!(lines.count(), 9);

    fs::write(&cfg, "colour = blue\n").unwrap();
    let bad = velergo(&["forecast", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn single_horizon_is_inconclusive() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 120);
    let out = dir.path().join("out");
    let (g, m, o) = (
        g.to_str().unwrap(),
        m.to_str().unwrap(),
        out.to_str().unwrap(),
    );
    let mut args = vec![
        "ergodicity",
        "--horizons",
        "20",
        "--beta-grid",
        "1.6",
        "--split",
        "1980-01-01",
    ];
    args.extend(base_args(g, m, o));
    let res = velergo(&args, None);
    assert!(res.status.success(), "{}", stderr(&res));
    let report = fs::read_to_string(out.join("ergodicity_report.txt")).unwrap();
    assert!(report.contains("beta.1.6.verdict = Inconclusive\n"));
    assert!(report.contains("at least 3"));
    let csv = fs::read_to_string(out.join("ergodicity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn calibrated_sweep_is_mean_ergodic() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 262);
    let out = dir.path().join("out");
    let (g, m, o) = (
        g.to_str().unwrap(),
        m.to_str().unwrap(),
        out.to_str().unwrap(),
    );
    // default horizons 50, 100, 200
    let mut args = vec!["ergodicity"];
    args.extend(base_args(g, m, o));
    let last = args.len() - 1;
    args[last] = "1000";
    let res = velergo(&args, None);
    assert!(res.status.success(), "{}", stderr(&res));
    let report = fs::read_to_string(out.join("ergodicity_report.txt")).unwrap();
    assert_eq!(
        report.matches("verdict = MeanErgodic").count(),
        5,
        "{report}"
    );
    let csv = fs::read_to_string(out.join("ergodicity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 15);
    assert!(fs::read_to_string(out.join("z_paths.csv"))
        .unwrap()
        .starts_with("path_id,t,value\n"));
    assert!(fs::read_to_string(out.join("z_empirical.csv"))
        .unwrap()
        .starts_with("beta,delta,value\n1.6,0,0\n"));
}

#[test]
fn run_all_is_byte_identical_across_reruns_and_thread_counts() {
    let dir = tempdir().unwrap();
    let (g, m) = write_inputs(dir.path(), 262);
    let out = dir.path().join("out");
    let (g, m, o) = (
        g.to_str().unwrap(),
        m.to_str().unwrap(),
        out.to_str().unwrap(),
    );
    let mut args = vec!["run-all", "--horizons", "10,20,40", "--seed", "3"];
    args.extend(base_args(g, m, o));
    let first = velergo(&args, Some(1));
    assert!(first.status.success(), "{}", stderr(&first));
    let a = snapshot(&out);
    let second = velergo(&args, Some(4));
    assert!(second.status.success());
    let b = snapshot(&out);
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (name, bytes) in &a {
        assert!(bytes == &b[name], "{name} differs between runs");
    }
    for name in [
        "comparison.csv",
        "comparison.txt",
        "calibration.csv",
        "forecast.csv",
        "run-all.meta",
    ] {
        assert!(a.contains_key(name), "{name} missing");
    }
    let table = String::from_utf8(a["comparison.csv"].clone()).unwrap();
    assert_eq!(table.lines().count(), 1 + 4);
}
