use std::fs;
use std::path::Path;
use std::process::Command;

fn rcsim(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rcsim"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn column(csv_text: &str, name: &str) -> Vec<f64> {
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn central_spin_h2_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"model":{"type":"central-spin","alpha":1.0,"B":0.0},"grid":{"t_max":1.0,"points":101}}"#,
    );
    let out = dir.path().join("out");
    let (code, _) = rcsim(&[
        "synthesize",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let fields = fs::read_to_string(out.join("fields.csv")).unwrap();
    assert!(fields.starts_with("t,h1,h2,phi1,phi2\n"));
    assert!(column(&fields, "h2").iter().all(|h| h.abs() < 1e-8));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("equivalence.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn finite_bath_seed_42_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"model":{"type":"finite-bath","bath_dim":4},"grid":{"t_max":0.5,"points":101}}"#,
    );
    let out = dir.path().join("out");
    let (code, err) = rcsim(&[
        "synthesize",
        "--config",
        &cfg,
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("equivalence.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
}

#[test]
fn spin_boson_fields_decay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"model":{"type":"spin-boson","coupling":"ohmic","cutoff":20.0,"tau":1.0},
            "grid":{"t_max":5.0,"points":501}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        rcsim(&[
            "synthesize",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap()
        ])
        .0,
        0
    );
    let fields = fs::read_to_string(out.join("fields.csv")).unwrap();
    let h1 = column(&fields, "h1");
    let h2 = column(&fields, "h2");
    assert!(h1.windows(2).all(|w| w[1] <= w[0]));
    assert!(h1
        .iter()
        .zip(&h2)
        .all(|(a, b)| (a + b).abs() < 1e-9 * a.abs().max(1.0)));
}

#[test]
fn outputs_are_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"dim":2,"grid":{"t_max":1.5,"points":11},"samples":3000}"#,
    );
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let (code, _) = rcsim(&[
            "depolarize",
            "--config",
            &cfg,
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        files.push((
            fs::read(out.join("depolarize.csv")).unwrap(),
            fs::read(out.join("depolarize.json")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
    let csv = String::from_utf8(files[0].0.clone()).unwrap();
    assert!(csv.starts_with("t,nz_mc,nz_err,nz_analytic\n"));
}

#[test]
fn clifford_mode_is_mixed_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"mode":"clifford","grid":{"t_max":2.0,"points":5}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        rcsim(&[
            "depolarize",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap()
        ])
        .0,
        0
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("depolarize.json")).unwrap()).unwrap();
    assert_eq!(report["t_mixed"], 1.0);
    assert!(report["distance_to_mixed"].as_f64().unwrap() < 1e-12);
}

#[test]
fn singularity_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "d.csv",
        "t,r,phi\n0,1,0\n1,0.5,0.1\n2,0,0.2\n3,0.2,0.3\n",
    );
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"model":{"type":"tabulated","path":"d.csv"}}"#,
    );
    let out = dir.path().join("out");
    let (code, err) = rcsim(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("t = 2"), "{err}");
}

#[test]
fn tabulated_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "d.csv",
        "t,r,phi\n0,1,0\n0.5,0.9,0.1\n1,0.7,0.25\n1.5,0.5,0.3\n",
    );
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"model":{"type":"tabulated","path":"d.csv","B":0.5}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(
        rcsim(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]).0,
        0
    );
    assert!(out.join("equivalence.json").exists());
}

#[test]
fn config_errors_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("nope.json");
    assert_eq!(
        rcsim(&["synthesize", "--config", missing.to_str().unwrap()]).0,
        1
    );
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"model":{"type":"central-spin","alpha":1.0},"grid":{"t_max":1.0,"points":2}}"#,
    );
    assert_eq!(
        rcsim(&[
            "synthesize",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap()
        ])
        .0,
        1
    );
    let cfg = write(dir.path(), "bad.json", r#"{"model":{"type":"lindblad"}}"#);
    assert_eq!(
        rcsim(&[
            "synthesize",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap()
        ])
        .0,
        1
    );
}

const BELL: &str = r#""n":2,"commuting_set":["XX","YY","ZZ"],
    "theta":{"rates":[1,-1,2,0],"t_max":2.0,"points":11},
    "dist":{"kind":"gaussian","sigma":1.0}"#;

#[test]
fn multiqubit_gaussian_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(r#"{{"model":{{{BELL}}},"samples":20000,"seed":3}}"#),
    );
    let out = dir.path().join("out");
    let (code, err) = rcsim(&[
        "multiqubit",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let r = fs::read_to_string(out.join("r_matrix.csv")).unwrap();
    let first: Vec<f64> = r
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    assert!(first[1..].chunks(2).all(|z| z[0] == 1.0 && z[1] == 0.0));
    // r_01 with γ_01 = 2t.
    let t = column(&r, "t");
    let r01 = column(&r, "r01_re");
    for (t, v) in t.iter().zip(&r01) {
        assert!((v - (-2.0 * t * t).exp()).abs() < 1e-14);
    }
    let validity: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("validity.json")).unwrap()).unwrap();
    assert_eq!(validity["transitive"], true);
    assert_eq!(validity["monte_carlo"]["pass"], true);
}

#[test]
fn broken_gamma_fails_validity() {
    let dir = tempfile::tempdir().unwrap();
    let gamma = r#""gamma":{"grid":[0.0,1.0],"values":[
        [[0,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]],
        [[0,0.1,0,0],[-0.1,0,0.1,0],[0,-0.1,0,0],[0,0,0,0]]]}"#;
    let cfg = write(
        dir.path(),
        "cfg.json",
        &format!(r#"{{"model":{{{BELL},{gamma}}}}}"#),
    );
    let out = dir.path().join("out");
    let (code, _) = rcsim(&[
        "multiqubit",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    let validity: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("validity.json")).unwrap()).unwrap();
    assert_eq!(validity["transitive"], false);
}
