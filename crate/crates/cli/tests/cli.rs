use std::fs;
use std::path::Path;

use channel_lab_cli::{dispatch_to, emit_csv, HEADER};
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("channel-lab").chain(args.iter().copied());
    let code = dispatch_to(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn field<'a>(csv: &'a str, name: &str) -> Vec<&'a str> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap()).collect()
}

#[test]
fn adaptive_run_has_no_collisions() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "a.json", r#"{"n":8,"protocol":"adaptive","rho":1.0,"rounds":5000,"seed":3}"#);
    let (code, out, err) = run(&["run", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().next().unwrap(), HEADER.join(","));
    assert_eq!(out.lines().count(), 2);
    assert_eq!(field(&out, "collisions"), ["0"]);
    assert_eq!(field(&out, "k"), ["2"]);
    assert_eq!(field(&out, "rounds"), ["5000"]);
}

#[test]
fn run_output_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "b.json", r#"{"n":6,"protocol":{"backoff":{"kind":"square"}},"rho":0.4,"rounds":3000,"seed":9}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(run(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(run(&["run", "--config", &cfg, "--out", b.to_str().unwrap()]).0, 0);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    assert!(!bytes.contains(&b'\r'));
    // --seed overrides the config.
    let (_, out, _) = run(&["run", "--config", &cfg, "--seed", "10"]);
    assert_eq!(field(&out, "seed"), ["10"]);
}

#[test]
fn malformed_config_names_the_location() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\"n\": 4,\n \"rho\": }");
    let (code, out, err) = run(&["run", "--config", &cfg]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn invalid_fields_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "r.json", r#"{"n":32,"protocol":"adaptive","rho":1.5,"rounds":10,"seed":1}"#);
    let (code, _, err) = run(&["run", "--config", &cfg]);
    assert_eq!(code, 1);
    assert!(err.contains("rho"), "{err}");
    let cfg = write(dir.path(), "u.json", r#"{"n":4,"protocol":"adaptive","rho":0.5,"rounds":10,"seed":1,"speed":2}"#);
    assert_eq!(run(&["run", "--config", &cfg]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn restrain_violation_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "k.json",
        r#"{"n":4,"protocol":"adaptive","restrain_limit":1,"rho":0.5,"rounds":100,"seed":1}"#,
    );
    let (code, _, err) = run(&["run", "--config", &cfg]);
    assert_eq!(code, 2);
    assert!(err.contains("round 1"), "{err}");
}

#[test]
fn seed_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"n":4,"protocol":"round_robin","rho":0.3,"rounds":100}"#);
    std::env::set_var("CHANNEL_LAB_SEED", "42");
    let (code, out, err) = run(&["run", "--config", &cfg]);
    std::env::remove_var("CHANNEL_LAB_SEED");
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&out, "seed"), ["42"]);
}

#[test]
fn sweep_rows_and_table() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"base":{"n":4,"protocol":"round_robin","rho":0.1,"rounds":2000,"seed":1,"distribution":"focused"},
            "rho":[0.1,0.3,0.6],"reps":2,"delta":10}"#,
    );
    let a = dir.path().join("a.csv");
    let (code, table, err) = run(&["sweep", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6);
    assert_eq!(field(&csv, "rho"), ["0.1", "0.1", "0.3", "0.3", "0.6", "0.6"]);
    assert_eq!(field(&csv, "seed"), ["1", "2", "1", "2", "1", "2"]);
    assert!(table.lines().any(|l| l.starts_with("round_robin\t4\t")), "{table}");

    let b = dir.path().join("b.csv");
    assert_eq!(run(&["sweep", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "1"]).0, 0);
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
}

#[test]
fn empty_csv_is_header_only() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("e.csv");
    emit_csv(&[], &p).unwrap();
    assert_eq!(fs::read_to_string(&p).unwrap(), HEADER.join(",") + "\n");
}

#[test]
fn singleton_family_verifies() {
    let dir = TempDir::new().unwrap();
    let fam = write(dir.path(), "s.json", r#"{"n":4,"omega":4,"k":1,"sets":[[1],[2],[3],[4]]}"#);
    let (code, out, _) = run(&["selector", "verify", "--family", &fam, "--exact"]);
    assert_eq!(code, 0);
    assert!(out.contains("ok (exact)"), "{out}");
    // A family that never isolates anything fails.
    let fam = write(dir.path(), "f.json", r#"{"n":4,"omega":4,"k":4,"sets":[[1,2,3,4]]}"#);
    let (code, out, _) = run(&["selector", "verify", "--family", &fam, "--samples", "200"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAILED (sampled, 200)"), "{out}");
}

#[test]
fn generated_levels_drive_interleaved() {
    let dir = TempDir::new().unwrap();
    let fam = dir.path().join("levels.json");
    let (code, out, err) =
        run(&["selector", "gen", "--n", "8", "--k", "2", "--levels", "--seed", "5", "--out", fam.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 3);
    let (code, out, _) = run(&["selector", "verify", "--family", fam.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("ok (exact)").count(), 3);

    let cfg = write(
        dir.path(),
        "i.json",
        r#"{"n":8,"protocol":{"interleaved":{"selector_file":"levels.json"}},"rho":0.2,"rounds":2000,"seed":1}"#,
    );
    let (code, out, err) = run(&["run", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(field(&out, "k"), ["2"]);
}

#[test]
fn single_family_gen() {
    let dir = TempDir::new().unwrap();
    let fam = dir.path().join("one.json");
    let (code, _, err) =
        run(&["selector", "gen", "--n", "12", "--omega", "4", "--k", "3", "--out", fam.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fam).unwrap()).unwrap();
    assert_eq!(v["omega"], 4);
    assert!(v["sets"].as_array().unwrap().iter().all(|s| s.as_array().unwrap().len() <= 3));
    assert_eq!(run(&["selector", "gen", "--n", "4", "--omega", "8", "--k", "2", "--out", "x.json"]).0, 1);
}
