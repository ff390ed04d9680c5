use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .display()
        .to_string()
}

fn analyze(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_analyze"))
        .args(args)
        .env_remove("CRFORMAL_DEGREE")
        .env_remove("CRFORMAL_FORMAT")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn lewy_report() {
    let r = json(&analyze(&["manifold", &corpus("lewy.mfd"), "--degree", "8"]));
    assert_eq!(r["manifold"]["cap"], 8);
    assert_eq!(r["minimality"]["status"], "Minimal");
    assert_eq!(r["minimality"]["d"], 2);
    assert_eq!(r["minimality"]["certified_degree"], 8);
    let nd = &r["nondegeneracy"];
    assert_eq!(nd["finite_nondegeneracy"]["status"], "Order");
    assert_eq!(nd["finite_nondegeneracy"]["k"], 1);
    assert_eq!(nd["holomorphic"]["levi_type"], 1);
    assert_eq!(nd["degeneracy"]["degeneracy"], 0);
    assert_eq!(nd["degeneracy"]["certified_degree"], 8);
}

#[test]
fn leviflat_report() {
    let r = json(&analyze(&["manifold", &corpus("leviflat.mfd")]));
    assert_eq!(r["minimality"]["status"], "NotMinimalAtCap");
    assert_eq!(r["nondegeneracy"]["degeneracy"]["degeneracy"], 1);
    assert_eq!(r["manifold"]["cap"], 10);
}

#[test]
fn map_reports() {
    let r = json(&analyze(&["map", &corpus("identity_lewy.map")]));
    assert_eq!(r["cr_validation"]["cr_valid"], true);
    assert_eq!(r["reflection_identities"]["value"]["all_hold"], true);
    assert_eq!(r["char_variety"]["zero_dim_certified"], true);

    let r = json(&analyze(&["map", &corpus("dilation_lewy.map")]));
    assert_eq!(r["cr_validation"]["cr_valid"], true);
    assert_eq!(r["determinant"]["value"]["d"]["terms"], serde_json::json!([[[0, 0, 0, 0], "2", "0"]]));

    let out = analyze(&["map", &corpus("perturbed_lewy.map"), "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("CR map          false"));
    assert!(text.contains("first residual  component 1: -1/2*i*z1^2"));
}

#[test]
fn source_and_target_overrides() {
    let r = json(&analyze(&[
        "map",
        &corpus("identity_lewy.map"),
        "--target",
        &corpus("quartic.mfd"),
    ]));
    assert_eq!(r["map"]["target"], "quartic");
    assert_eq!(r["cr_validation"]["cr_valid"], false);
}

#[test]
fn exit_codes() {
    let out = analyze(&["manifold", &corpus("malformed.mfd")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");

    let out = analyze(&["manifold", &corpus("no_such_file.mfd")]);
    assert_eq!(out.status.code(), Some(2));

    let out = analyze(&["manifold", &corpus("lewy.mfd"), "--degree", "1"]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mfd");
    std::fs::write(&bad, "n = 2\ncodim = 1\ndefining = [\"z1*zb1\"]\n").unwrap();
    let out = analyze(&["manifold", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not generic"));
}

#[test]
fn environment_defaults_and_flag_precedence() {
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["manifold".to_string(), corpus("lewy.mfd")];
        args.extend(extra.iter().map(|s| s.to_string()));
        let out = Command::new(env!("CARGO_BIN_EXE_analyze"))
            .args(&args)
            .env("CRFORMAL_DEGREE", env)
            .output()
            .unwrap();
        json(&out)["manifold"]["cap"].as_u64().unwrap()
    };
    assert_eq!(run("6", &[]), 6);
    assert_eq!(run("6", &["--degree", "7"]), 7);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = analyze(&["manifold", &corpus("quartic.mfd"), "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let stdout = analyze(&["manifold", &corpus("quartic.mfd")]).stdout;
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}

#[test]
fn text_format() {
    let out = analyze(&["manifold", &corpus("cylinder.mfd"), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("minimality      Minimal(2)"));
    assert!(text.contains("degeneracy      1"));
    assert!(text.contains("certificate     {omega3, -2*i*omega1}"));
}
