use std::fs;
use std::process::{Command, Output};

fn fracrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracrisk"))
        .args(args)
        .env_remove("FRACRISK_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV payload as (header, rows), skipping `#` metadata.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn without_wall_time(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# wall_time_s="))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn pmf_zero_row() {
    let o = fracrisk(&[
        "pmf", "--alpha", "0.5", "--lambda", "1", "--t", "1", "--kmax", "20",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (header, rows) = table(&text);
    assert_eq!(header, ["k", "probability"]);
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], "0");
    let p0: f64 = rows[0][1].parse().unwrap();
    assert!((p0 - 0.427_583_576_155_807).abs() < 1e-12);
    assert!(text.contains("# seed="));
    assert!(text.contains("# version="));
    assert!(text.contains("\"alpha\":0.5"));
}

#[test]
fn ruin_matches_classical_value() {
    let o = fracrisk(&[
        "ruin", "--alpha", "1", "--rho", "0.1", "--mu", "1", "--claims", "exp", "--u", "0",
        "--npaths", "200000", "--seed", "7",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = table(&stdout(&o));
    assert_eq!(header[1], "probability");
    let p: f64 = rows[0][1].parse().unwrap();
    assert!((p - 0.909_090_909_090_909_1).abs() < 0.01, "{p}");
}

#[test]
fn output_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        let o = fracrisk(&[
            "ruin",
            "--alpha",
            "0.6",
            "--u",
            "0,1,2",
            "--npaths",
            "5000",
            "--horizon",
            "1e6",
            "--seed",
            "11",
            "--threads",
            threads,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        without_wall_time(&fs::read_to_string(path).unwrap())
    };
    let a = run("1", "a.csv");
    let b = run("3", "b.csv");
    assert_eq!(table(&a), table(&b));
    assert_eq!(a, run("1", "c.csv"));
}

#[test]
fn seed_from_environment() {
    let args = ["simulate", "--alpha", "0.7", "--t", "5", "--npaths", "3"];
    let env = Command::new(env!("CARGO_BIN_EXE_fracrisk"))
        .args(args)
        .env("FRACRISK_SEED", "99")
        .output()
        .unwrap();
    let flag = fracrisk(&[&args[..], &["--seed", "99"]].concat());
    assert_eq!(
        without_wall_time(&stdout(&env)),
        without_wall_time(&stdout(&flag))
    );
    assert!(stdout(&env).contains("# seed=99"));
}

#[test]
fn json_output_has_metadata_and_result() {
    let o = fracrisk(&[
        "premium", "--alpha", "0.5", "--kappa", "0.5,0.9", "--format", "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metadata"]["command"], "premium");
    assert!(v["metadata"]["wall_time_s"].is_number());
    let rows = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert!(r["classical"].as_f64().unwrap() <= r["fractional"].as_f64().unwrap());
    }
}

#[test]
fn moments_record() {
    let o = fracrisk(&[
        "moments", "--alpha", "1", "--lambda", "2", "--t", "3", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["result"]["count_mean"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    assert!((v["result"]["count_var"].as_f64().unwrap() - 6.0).abs() < 1e-12);
}

#[test]
fn bad_parameters_exit_with_two() {
    let o = fracrisk(&["pmf", "--alpha", "1.5", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));

    let o = fracrisk(&["ruin", "--claims", "weibull:k=2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = fracrisk(&["ruin", "--horizon", "-3"]);
    assert_eq!(o.status.code(), Some(2));

    let o = fracrisk(&["pmf", "--alpha", "0.5", "--t", "1", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_conditioning_exits_with_three() {
    let o = fracrisk(&[
        "capital",
        "--u",
        "1000",
        "--rho",
        "0.5",
        "--horizon",
        "10",
        "--npaths",
        "50",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn fit_and_curves_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("gaps.csv");
    // Exponential gaps from a deterministic quantile grid.
    let mut text = String::from("gap\n");
    for i in 0..2000 {
        let q = (i as f64 + 0.5) / 2000.0;
        text.push_str(&format!("{}\n", -(1.0 - q).ln() * 2.0));
    }
    fs::write(&data, text).unwrap();

    let o = fracrisk(&["fit", "--input", data.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["result"]["exponential_rate"].as_f64().unwrap() - 0.5).abs() < 0.01);
    assert!(v["result"]["alpha"].as_f64().unwrap() > 0.95);

    let csv = dir.path().join("curves.csv");
    let svg = dir.path().join("curves.svg");
    let o = fracrisk(&[
        "curves",
        "--input",
        data.to_str().unwrap(),
        "--points",
        "50",
        "--output",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let back = fracrisk::empirics::load_curves(&csv).unwrap();
    assert_eq!(back.t.len(), 50);
    assert!(fs::read_to_string(svg).unwrap().starts_with("<svg"));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "gap\n1\n0\n").unwrap();
    let o = fracrisk(&["fit", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}
