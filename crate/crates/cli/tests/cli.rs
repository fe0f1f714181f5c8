use std::process::{Command, Output};

use serde_json::Value;

fn p1dyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p1dyn"))
        .args(args)
        .env_remove("P1DYN_PREC_BITS")
        .env_remove("P1DYN_DEGREE_BUDGET")
        .env_remove("P1DYN_COMPOSE_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn leading(s: &Value) -> f64 {
    let s = s.as_str().unwrap();
    let re = s.split(['+', 'i']).next().unwrap();
    re.parse().unwrap()
}

const SQUARE: &str = r#"{"num":["0","0","1"],"den":["1"]}"#;
const BASILICA: &str = r#"{"num":["-1","0","1"],"den":["1"]}"#;
const TZ2_Z: &str = r#"{"num":["0","1","t"],"den":["1"]}"#;

#[test]
fn spectrum_of_the_square_map() {
    let out = p1dyn(&["spectrum", "--map", SQUARE, "--nmax", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["config"]["command"], "spectrum");
    assert_eq!(v["config"]["nmax"], 2);
    let rows = v["result"]["rows"].as_array().unwrap();
    let s1: Vec<f64> = rows[0]["s"]
        .as_array()
        .unwrap()
        .iter()
        .map(leading)
        .collect();
    let s2: Vec<f64> = rows[1]["s"]
        .as_array()
        .unwrap()
        .iter()
        .map(leading)
        .collect();
    assert_eq!(s1, vec![0.0, 0.0, 2.0]);
    assert_eq!(s2, vec![0.0, 0.0, 4.0, 4.0, 4.0]);
}

#[test]
fn milnor_fails_on_the_basilica() {
    let out = p1dyn(&["milnor", "--map", BASILICA, "--D", "1", "--nmax", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "fail");
    let w = leading(&v["result"]["witness"]["multiplier"]);
    let root5 = 5f64.sqrt();
    assert!(
        (w - (1.0 + root5)).abs() < 1e-12 || (w - (1.0 - root5)).abs() < 1e-12,
        "{w}"
    );
}

#[test]
fn milnor_passes_on_the_square_map() {
    let out = p1dyn(&["milnor", "--map", "power:2", "--nmax", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["verdict"], "pass");
}

#[test]
fn rescale_with_given_mobius() {
    let out = p1dyn(&[
        "rescale",
        "--family",
        TZ2_Z,
        "--mobius",
        r#"{"a":"0","b":"1/t","c":"0","d":"1"}"#,
        "--q",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(
        v["result"]["limit"]["num"],
        serde_json::json!(["0", "1", "1"])
    );
    assert_eq!(v["result"]["limit"]["den"], serde_json::json!(["1"]));
    assert_eq!(v["result"]["indeterminacy"], serde_json::json!([]));
}

#[test]
fn rescale_degenerate_and_proposals() {
    let fam = r#"{"num":["1/t","0","1"],"den":["1"]}"#;
    let out = p1dyn(&[
        "rescale",
        "--family",
        fam,
        "--mobius",
        r#"{"a":"0","b":"1","c":"0","d":"1"}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["degenerate"], true);

    let out = p1dyn(&["rescale", "--family", fam]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["error"]["code"], "NoCandidates");
    assert_eq!(v["error"]["base_change_hints"], serde_json::json!([2]));

    let out = p1dyn(&["rescale", "--family", TZ2_Z]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let props = v["result"]["proposals"].as_array().unwrap();
    assert!(props
        .iter()
        .any(|p| p["limit"]["num"] == serde_json::json!(["0", "1", "1"])
            && p["scale_exponent"] == -1));
}

#[test]
fn goodred_reports() {
    let out = p1dyn(&[
        "goodred",
        "--family",
        r#"{"num":["t","0","1"],"den":["1"]}"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["explicit_good"], true);
    assert_eq!(v["result"]["resultant_valuation"], 0);

    let out = p1dyn(&["goodred", "--family", TZ2_Z]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["result"]["resultant_valuation"], 2);
    assert_eq!(v["result"]["reduction_degree"], 1);
}

#[test]
fn homoclinic_and_livsic_verdicts() {
    let out = p1dyn(&[
        "homoclinic",
        "--map",
        "power:2",
        "--fixed-point",
        "1",
        "--preimage",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["verdict"]["verdict"], "pass");

    let out = p1dyn(&[
        "homoclinic",
        "--map",
        BASILICA,
        "--fixed-point",
        "1.618",
        "--preimage",
        "-1.618",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = p1dyn(&[
        "livsic",
        "--map",
        BASILICA,
        "--fixed-point",
        "1.618",
        "--preimage",
        "-1.618",
        "--max-len",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["verdict"], "nonlinear");
}

#[test]
fn csv_output() {
    let out = p1dyn(&[
        "livsic",
        "--map",
        "power:2",
        "--fixed-point",
        "1",
        "--preimage",
        "-1",
        "--max-len",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(lines.next().unwrap(), "word,period,mean");
    assert_eq!(lines.count(), 3);

    let out = p1dyn(&["goodred", "--family", TZ2_Z, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_input_is_an_error() {
    let out = p1dyn(&["spectrum", "--map", "{not json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["code"], "BadInput");
    let out = p1dyn(&["spectrum", "--map", r#"{"num":["0"],"den":["0"]}"#]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn random_conjugate_matches_and_is_reproducible() {
    let a = p1dyn(&["match", "--map", BASILICA, "--nmax", "2", "--seed", "7"]);
    let b = p1dyn(&["match", "--map", BASILICA, "--nmax", "2", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(json(&a)["result"]["matched"], true);
    assert_eq!(a.stdout, b.stdout);
    let c = p1dyn(&["match", "--map", BASILICA, "--nmax", "2", "--seed", "8"]);
    assert_ne!(
        json(&a)["result"]["conjugator"],
        json(&c)["result"]["conjugator"]
    );
}

#[test]
fn environment_overrides_precision() {
    let out = Command::new(env!("CARGO_BIN_EXE_p1dyn"))
        .args(["spectrum", "--map", SQUARE, "--nmax", "1"])
        .env("P1DYN_PREC_BITS", "128")
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["prec_bits"], 128);
    let out = Command::new(env!("CARGO_BIN_EXE_p1dyn"))
        .args(["spectrum", "--map", SQUARE, "--nmax", "3"])
        .env("P1DYN_DEGREE_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["code"], "BudgetExceeded");
}
