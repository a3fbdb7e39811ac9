use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_toposforge"));
    c.current_dir(env!("CARGO_MANIFEST_DIR"));
    c.env_remove("TOPOSFORGE_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON report");
    v["report"].clone()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("toposforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn validate_poset_bundle_exits_zero() {
    let out = run(&["validate", "fixtures/sierpinski.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["documents"].as_array().unwrap().len(), 4);
}

#[test]
fn check_sheaf_reports_two_amalgamations() {
    let out = run(&["check-sheaf", "fixtures/sierpinski.json", "--presheaf", "P", "--no-timing"]);
    assert_eq!(out.status.code(), Some(1));
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/golden/check-sheaf-P.json")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn terminal_presheaf_is_a_sheaf() {
    let out = run(&["check-sheaf", "fixtures/sierpinski.json", "--presheaf", "T"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn generated_site_has_the_same_sheaves() {
    let out = run(&["gen-site", "fixtures/sierpinski.json", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let mut site = report(&out)["result"]["site"].clone();
    site["kind"] = Value::from("site");
    let path = scratch("generated.json", &site.to_string());
    let out = run(&["same-sheaves", "fixtures/sierpinski.json", path.to_str().unwrap(), "--max-size", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"]["equal"], Value::Bool(true));
    assert_eq!(r["result"]["verdict"]["complete"], Value::Bool(true));
}

#[test]
fn sheafify_collapses_the_worked_example() {
    let out = run(&["sheafify", "fixtures/sierpinski.json", "--presheaf", "P"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let values = &r["result"]["sheaf"]["values"];
    assert_eq!(values["0"].as_array().unwrap().len(), 1);
    assert_eq!(values["1"].as_array().unwrap().len(), 1);
    assert_eq!(r["result"]["unit_universal"]["holds"], Value::Bool(true));
}

#[test]
fn wtype_of_the_natural_numbers() {
    let out = run(&["wtype", "fixtures/nno.json", "--depth", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["terms"], Value::from(5));
    assert_eq!(r["result"]["saturated"], Value::Bool(false));
}

#[test]
fn wtype_of_constants_is_characterized() {
    let out = run(&["wtype", "fixtures/constants.json", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["characterization"]["is_wtype"], Value::Bool(true));
}

#[test]
fn wtype_presheaf_checks_pass() {
    let out = run(&["wtype-presheaf", "fixtures/nno-presheaf.json", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for key in ["equals_kleene", "terms_natural", "restrictions_closed", "structure_is_iso"] {
        assert_eq!(r["result"][key], Value::Bool(true), "{key}");
    }
}

#[test]
fn fiber_bound_two_fails_local_fullness() {
    let out = run(&["check-class", "fixtures/classes.json", "--class", "fb2", "--probe", "3", "--extra-set", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["result"]["stability"]["holds"], Value::Bool(true));
    assert_eq!(r["result"]["local_fullness"]["s4a"]["holds"], Value::Bool(false));
    assert_eq!(r["result"]["local_fullness"]["s4a_witness"]["composite_fiber"], Value::from(4));
}

#[test]
fn all_maps_pass_every_check() {
    let out = run(&["check-class", "fixtures/classes.json", "--class", "all", "--probe", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["representation"]["u"], Value::from(4));
}

#[test]
fn collection_spans_verify() {
    let out = run(&["collsp", "--class", "fiber_bound:2", "--probe", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["result"]["constructions"].as_array().unwrap().iter().all(|c| c["verified"] == Value::Bool(true)));
}

#[test]
fn equivalent_collection_site_verifies() {
    let out = run(&["equiv-coll-site", "fixtures/sierpinski.json", "--class", "fiber_bound:2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["small_covers"], Value::Bool(true));
}

#[test]
fn reports_are_stable_without_timing() {
    let args = ["sheafify", "fixtures/sierpinski.json", "--presheaf", "P", "--no-timing"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let timed = report(&run(&["sheafify", "fixtures/sierpinski.json", "--presheaf", "P"]));
    assert_eq!(timed, report(&run(&args)));
}

#[test]
fn text_format_leads_with_the_verdict() {
    let out = run(&["check-sheaf", "fixtures/sierpinski.json", "--presheaf", "P", "--format", "text"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("check-sheaf FAIL"));
}

#[test]
fn canonical_documents_round_trip() {
    let golden = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/golden/sierpinski.canonical.json");
    let out = run(&["validate", "--canonical", golden]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), std::fs::read_to_string(golden).unwrap());
    for fixture in ["fixtures/nno.json", "fixtures/classes.json", "fixtures/nno-presheaf.json"] {
        let once = run(&["validate", "--canonical", fixture]).stdout;
        let path = scratch("once.json", std::str::from_utf8(&once).unwrap());
        assert_eq!(run(&["validate", "--canonical", path.to_str().unwrap()]).stdout, once, "{fixture}");
    }
}

#[test]
fn invalid_inputs_exit_two_with_location() {
    let out = run(&["validate", "fixtures/bad-syntax.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad-syntax.json:2:"));
    let out = run(&["validate", "fixtures/bad-restriction.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("restriction along `u`"));
    let out = run(&["check-sheaf", "fixtures/sierpinski.json"]);
    assert_eq!(out.status.code(), Some(2), "ambiguous presheaf must be rejected");
}

#[test]
fn non_functorial_presheaf_is_rejected() {
    let doc = r#"{"kind":"corpus","name":"c","items":[
        {"kind":"category","name":"chain","objects":["0","1","2"],
         "arrows":[{"name":"u","dom":"0","cod":"1"},{"name":"v","dom":"1","cod":"2"},{"name":"w","dom":"0","cod":"2"}],
         "compose":[["v","u","w"]]},
        {"kind":"presheaf","name":"P","category":"chain",
         "values":{"0":["a","b"],"1":["c"],"2":["d"]},
         "restrict":{"u":{"c":"a"},"v":{"d":"c"},"w":{"d":"b"}}}]}"#;
    let path = scratch("nonfunctorial.json", doc);
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not functorial"));
}

#[test]
fn budget_variable_is_honoured() {
    let out = bin().args(["wtype", "fixtures/nno.json"]).env("TOPOSFORGE_BUDGET", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["wtype", "fixtures/nno.json"]).env("TOPOSFORGE_BUDGET", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
