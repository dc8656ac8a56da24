use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cosine-ec");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("COSINE_EC_OUT_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV artifact as `column -> value` maps.
fn csv_rows(text: &str) -> Vec<Vec<(String, String)>> {
    let (first, body) = text.split_once('\n').unwrap();
    assert!(first.starts_with("# tool=cosine-ec version="));
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(str::to_string)).collect())
        .collect()
}

fn field<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == key).unwrap().1
}

#[test]
fn wce_example() {
    let o = run(&["wce", "--mesh", "2", "--s", "1"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let e: f64 = field(&rows[0], "e_exact").parse().unwrap();
    assert!((e - (2.0f64 / 15.0).sqrt()).abs() < 1e-15);
    assert!(field(&rows[0], "e_exact").starts_with("0.365148"));
}

#[test]
fn indexset_example() {
    let o = run(&["indexset", "--M", "10", "--s", "1"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(field(&rows[0], "cardinality"), "4");

    let o = run(&["indexset", "--M", "10", "--s", "2", "--list"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(field(&rows[0], "index"), "(0,0)");
    assert!(rows.iter().all(|r| field(r, "weight").parse::<f64>().unwrap() > 0.1));
}

#[test]
fn tract_example() {
    let o = run(&["tract", "--b-kind", "exponential", "--b-params", "1,2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["data"]["uexp"], true);
    assert_eq!(v["data"]["p_star"], 1.0);
    assert_eq!(v["tool"], "cosine-ec");
    assert_eq!(v["spec_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.cfg");
    std::fs::write(&cfg, "omega = 0.9\na.kind = constant\na.params = 1\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let flagged = stdout(&run(&["--config", cfg, "--omega", "0.5", "wce", "--s", "1", "--mesh", "2"]));
    let plain = stdout(&run(&["wce", "--s", "1", "--mesh", "2", "--s-max", "64"]));
    assert_eq!(flagged, plain);
    let from_file = stdout(&run(&["--config", cfg, "wce", "--s", "1", "--mesh", "2"]));
    assert_ne!(from_file, plain);
}

#[test]
fn invalid_spec_exits_2_with_record() {
    let o = run(&["--omega", "1.5", "wce", "--s", "1", "--mesh", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_spec");

    let o = run(&["--b-params", "-1", "wce", "--s", "1", "--mesh", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "omega = 0.5\nnonsense\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "tract"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
}

#[test]
fn sweep_flags_unresolved_rows_and_exits_0() {
    let o = run(&[
        "--a-kind", "polynomial", "--a-params", "1,2", "--b-kind", "exponential", "--b-params", "1,2",
        "sweep", "--problem", "approximation", "--info", "std", "--s", "1,2", "--eps", "0.1,0.01",
    ]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    let keys: Vec<(String, String)> =
        rows.iter().map(|r| (field(r, "s").to_string(), field(r, "eps").to_string())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| {
        a.0.parse::<usize>().unwrap().cmp(&b.0.parse().unwrap()).then(
            a.1.parse::<f64>().unwrap().total_cmp(&b.1.parse().unwrap()),
        )
    });
    assert_eq!(keys, sorted);
    assert!(rows.iter().all(|r| field(r, "resolved") == "true"));

    // meshes of both constructions overflow and the search budget is tiny
    let o = run(&["--omega", "0.9", "--a-params", "0.01", "sweep", "--s", "8", "--eps", "1e-12", "--budget", "5"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(field(&rows[0], "resolved"), "false");
    assert_eq!(field(&rows[0], "n"), "");
}

#[test]
fn outputs_are_byte_identical_and_land_in_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let go = || {
        Command::new(BIN)
            .args(["sweep", "--s", "1,2,3", "--eps", "0.1,0.001", "--budget", "2000"])
            .env("COSINE_EC_OUT_DIR", dir.path())
            .output()
            .unwrap()
    };
    assert!(go().status.success());
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let name = files[0].file_name().unwrap().to_str().unwrap().to_string();
    assert!(name.starts_with("sweep-") && name.ends_with(".csv"));
    let first = std::fs::read(&files[0]).unwrap();
    assert!(go().status.success());
    assert_eq!(std::fs::read(&files[0]).unwrap(), first);
}

#[test]
fn explicit_out_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/approx.json");
    let o = run(&[
        "approx", "--s", "2", "--eps", "0.1", "--oracle", "--format", "json", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(Path::new(&out)).unwrap()).unwrap();
    let row = &v["data"][0];
    assert!(row["oracle"].as_f64().unwrap() <= row["bound"].as_f64().unwrap());
    assert!(row["bound"].as_f64().unwrap() <= 0.1);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn rule_oracle_and_samples() {
    let o = run(&["rule", "--s", "2", "--eps", "0.001", "--method", "spt"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(field(&rows[0], "construction"), "spt_rule");
    assert!(field(&rows[0], "e_exact").parse::<f64>().unwrap() <= 1e-3);

    let o = run(&["rule", "--s", "2", "--method", "search", "--budget", "30"]);
    assert_eq!(csv_rows(&stdout(&o)).len(), 30);

    let o = run(&["rule", "--s", "2", "--method", "exp"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["oracle", "--s", "2", "--mesh", "3,2", "--M", "10"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let oracle: f64 = field(&rows[0], "oracle").parse().unwrap();
    let bound: f64 = field(&rows[0], "bound").parse().unwrap();
    assert!(oracle <= bound);

    let o = run(&["approx", "--s", "2", "--mesh", "9", "--M", "20", "--samples", "5"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert_eq!(field(&rows[0], "seed"), "42");
    assert!(rows.iter().all(|r| field(r, "l2_error").parse::<f64>().unwrap() < 1e-12));
}
