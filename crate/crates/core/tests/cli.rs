use std::path::Path;
use std::process::{Command, Output};

fn ppt(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppt"))
        .args(args)
        .env("PPT_CACHE", cache)
        .env_remove("PPT_BUDGET")
        .output()
        .expect("binary runs")
}

fn ok(cache: &Path, args: &[&str]) -> String {
    let out = ppt(cache, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn every_output_has_a_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(dir.path(), &["delta", "--n", "1..3", "--mesh", "cheb:-1:1:41"]);
    let head: Vec<&str> = csv.lines().take(4).collect();
    assert_eq!(head[0], format!("# ppt {}", env!("CARGO_PKG_VERSION")));
    assert_eq!(head[1], "# command: delta");
    assert!(head[2].starts_with("# config: ") && head[2].len() == "# config: ".len() + 64);
    assert_eq!(head[3], "# seed: 0");
    assert_eq!(data_lines(&csv).len(), 4);

    let three = dir.path().join("three.csv");
    let mesh = ppt_core::WeightedMesh::from_points(1, vec![vec![-1.0], vec![0.0], vec![1.0]], "three").unwrap();
    std::fs::write(&three, mesh.to_csv()).unwrap();
    let json = ok(dir.path(), &["znorm", "--n", "1", "--mesh", three.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["ppt"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["command"], "znorm");
    // three equally weighted points -1, 0, 1
    assert!((v["data"]["z"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec![
            "sample".to_string(),
            "--n".into(),
            "3".into(),
            "--mesh".into(),
            "cheb:-1:1:31".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let a_args = args(&a);
    let mut b_args = args(&b);
    b_args.extend(["--threads".into(), "1".into()]);
    ok(dir.path(), &a_args.iter().map(String::as_str).collect::<Vec<_>>());
    ok(dir.path(), &b_args.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn cached_and_fresh_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["delta", "--n", "2..6:2", "--mesh", "cheb:-1:1:51"];
    let first = ok(dir.path(), &args);
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(entries, 3);
    let cached = ok(dir.path(), &args);
    let fresh = ok(dir.path(), &[&args[..], &["--no-cache"]].concat());
    assert_eq!(first, cached);
    assert_eq!(data_lines(&first), data_lines(&fresh));
}

#[test]
fn seed_changes_samples_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["sample", "--n", "2", "--mesh", "cheb:-1:1:21", "--steps", "20"];
    let a = ok(dir.path(), &[&base[..], &["--seed", "1"]].concat());
    let b = ok(dir.path(), &[&base[..], &["--seed", "2"]].concat());
    assert_ne!(a.lines().nth(2), b.lines().nth(2));
    assert_ne!(data_lines(&a), data_lines(&b));
}

#[test]
fn single_n_converge_gives_one_row_per_moment() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(
        dir.path(),
        &["converge", "--n", "4", "--mesh", "cheb:-1:1:31", "--moments", "2", "--steps", "5"],
    );
    let rows = data_lines(&csv);
    assert_eq!(rows[0], "n,moment,empirical,fekete,distance");
    assert_eq!(rows.len(), 3);
}

#[test]
fn energy_translation_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(
        dir.path(),
        &["energy", "--n", "2,5", "--mesh", "cheb:-1:1:41", "--shift", "0.7"],
    );
    let rows = data_lines(&csv);
    assert!(rows[0].starts_with("n,l_n,delta_hat,energy,energy_shifted,shift_expected"));
    for r in &rows[1..] {
        let f: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((f[4] - f[3] - f[5]).abs() < 1e-9, "{r}");
    }
}

#[test]
fn ldp_everything_has_zero_slope() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(dir.path(), &["ldp", "--event", "1:-inf:inf", "--n", "1..2", "--mesh", "cheb:-1:1:7"]);
    for r in &data_lines(&csv)[1..] {
        let log_sigma: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert!(log_sigma.abs() < 1e-12);
    }
    let slope = csv.lines().find(|l| l.starts_with("# fitted decay rate")).unwrap();
    let v: f64 = slope.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(v.abs() < 1e-12);
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["delta", "--n", "5..2"][..],
        &["delta", "--mesh", "chebsq:-1:1:5"],
        &["delta", "--body", "simplex:4"],
        &["znorm", "--n", "6", "--mesh", "cheb:-1:1:50", "--budget", "10"],
        &["delta", "--weight", "exp:2"],
    ] {
        let out = ppt(dir.path(), args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("ppt: "), "{args:?}");
    }
}
