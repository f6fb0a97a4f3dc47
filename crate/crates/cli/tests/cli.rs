use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn umbilic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umbilic")).args(args).env_remove("UMBILIC_CACHE").output().unwrap()
}

fn structured(args: &[&str]) -> (i32, serde_json::Value, String) {
    let mut all = args.to_vec();
    all.extend(["--format", "structured"]);
    let out = umbilic(&all);
    let text = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(&text).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap(), json, text)
}

#[test]
fn flatness_verdicts_set_the_exit_code() {
    let (code, r, _) = structured(&["flatness", "--metric", &data("poincare_ball.json"), "--samples", "40"]);
    assert_eq!(code, 0);
    assert_eq!(r["pass"], true);
    assert_eq!(r["details"]["verdict"]["verdict"], "flat");
    let (code, r, _) = structured(&["flatness", "--metric", &data("skewed.json"), "--samples", "40"]);
    assert_eq!(code, 1);
    assert_eq!(r["details"]["verdict"]["verdict"], "not_flat");
}

#[test]
fn eta_of_the_quarter_lattice() {
    let (code, r, _) = structured(&["eta", "--spectrum", &data("lattice_quarter.json")]);
    assert_eq!(code, 0);
    let eta = r["details"]["value"].as_f64().unwrap();
    assert!((eta - 0.5).abs() < 1e-12);
    assert_eq!(r["inputs"][0]["role"], "spectrum");
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(!r["conventions"].as_array().unwrap().is_empty());
}

#[test]
fn obstruction_exit_codes() {
    let (code, r, _) = structured(&["obstruct", "--record", &data("quarter_record.json")]);
    assert_eq!(code, 1);
    assert_eq!(r["details"]["obstructed"], true);
    assert!((r["details"]["distance"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let (code, _, _) = structured(&["obstruct", "--record", &data("even_record.json")]);
    assert_eq!(code, 0);
}

#[test]
fn invalid_input_exits_with_two() {
    let out = umbilic(&["flatness", "--metric", &data("bad_metric.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(umbilic(&["eta"]).status.code(), Some(2));
    assert_eq!(umbilic(&["eta", "--spectrum", &data("missing.json")]).status.code(), Some(2));
    assert_eq!(umbilic(&["obstruct", "--record", &data("quarter_record.json"), "--tolerance", "0.5"]).status.code(), Some(2));
}

#[test]
fn structured_output_is_byte_identical() {
    let args = ["umbilic", "--embedding", &data("sphere.json"), "--samples", "12"];
    let (_, _, a) = structured(&args);
    let (_, _, b) = structured(&args);
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn cache_hits_reproduce_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().display().to_string();
    let args = ["aps-check", "--record", &data("product_cobordism.json"), "--cache", &cache];
    let (code, _, first) = structured(&args);
    assert_eq!(code, 0);
    let stored: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(stored.len(), 2);
    let (_, _, second) = structured(&args);
    assert_eq!(first, second);
    // a different tolerance is a different key
    let mut other = args.to_vec();
    other.extend(["--tolerance", "1e-3"]);
    structured(&other);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 4);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (_, _, text) = structured(&["phi", "--record", &data("quarter_record.json"), "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(path).unwrap(), text);
}

#[test]
fn phi_of_a_union() {
    let q = data("quarter_record.json");
    let (code, r, _) = structured(&["phi", "--record", &q, "--record", &q]);
    assert_eq!(code, 0);
    let union = r["details"]["union"]["angle"].as_f64().unwrap();
    assert!((union - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn neck_and_heat_commands() {
    let (code, r, _) = structured(&["neck", "--inner", "1", "--outer", "2.718281828459045", "--samples", "16"]);
    assert_eq!(code, 0);
    assert!((r["details"]["cylinder_length"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (code, _, _) = structured(&["eta-heat", "--spectrum", &data("lattice_quarter.json")]);
    assert_eq!(code, 0);
}

#[test]
fn validate_accepts_every_kind_of_file() {
    let out = umbilic(&[
        "validate",
        "--metric",
        &data("poincare_ball.json"),
        "--embedding",
        &data("sphere.json"),
        "--spectrum",
        &data("lattice_quarter.json"),
        "--record",
        &data("product_cobordism.json"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn every_subcommand_is_wired() {
    for name in [
        "validate",
        "curvature",
        "flatness",
        "sff",
        "umbilic",
        "make-geodesic",
        "collar-fit",
        "forms",
        "transgress",
        "pontryagin-check",
        "eta",
        "eta-heat",
        "aps-check",
        "obstruct",
        "phi",
        "neck",
    ] {
        let out = umbilic(&[name, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn geometry_commands_pass_on_the_sphere() {
    let sphere = data("sphere.json");
    for cmd in ["sff", "umbilic", "make-geodesic", "collar-fit"] {
        let (code, r, _) = structured(&[cmd, "--embedding", &sphere, "--samples", "6"]);
        assert_eq!(code, 0, "{cmd}: {r}");
    }
    let (code, _, _) = structured(&["sff", "--embedding", &sphere, "--samples", "6", "--phi", "0.3*x1^2+0.1*sin(x2)"]);
    assert_eq!(code, 0);
    let (code, _, _) = structured(&["curvature", "--metric", &data("skewed.json"), "--point", "0.1,0.2,0.3"]);
    assert_eq!(code, 0);
    let (code, _, _) = structured(&[
        "pontryagin-check",
        "--metric",
        &data("poincare_ball4.json"),
        "--phi",
        "0.1*x1*x2+0.2*sin(x3)*x4",
        "--samples",
        "4",
    ]);
    assert_eq!(code, 0);
}
