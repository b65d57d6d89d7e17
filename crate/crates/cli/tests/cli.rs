use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn clc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clc")).args(args).output().expect("run clc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("clc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn compile_prints_expected_payoff() {
    let o = clc(&["compile", &data("deferred.clc"), "--format", "text"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        stdout(&o).trim(),
        "100.0 * payoff(0+t0, you, me) + loopif(100.0 < model(AAPL, 0+t0+t1+0), \
         (model(AAPL, 0+t0+t1+0) - 100.0) * payoff(0+t0+t1, you, me), 0.0, 0)"
    );
    let cut = clc(&["compile", &data("deferred.clc"), "--cut", "--format", "text"]);
    assert!(stdout(&cut).contains("if(0+t0 < now, 0.0, payoff(0+t0, you, me))"), "{}", stdout(&cut));
}

#[test]
fn eval_of_zero_literal() {
    let o = clc(&["eval", &data("zero_float.json")]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "0.0"));
}

#[test]
fn compile_then_eval() {
    let json = clc(&["compile", &data("deferred.clc")]);
    assert_eq!(code(&json), 0);
    let il = scratch("deferred.json");
    std::fs::write(&il, &json.stdout).unwrap();
    let common = [
        "--env",
        &data("deferred_env.json"),
        "--tenv",
        &data("deferred_tenv.json"),
        "--p1",
        "you",
        "--p2",
        "me",
    ];
    let from_json = clc(&[&["eval", il.to_str().unwrap()][..], &common].concat());
    let from_text = clc(&[&["eval", &data("deferred.clc")][..], &common].concat());
    assert_eq!(stdout(&from_json).trim(), "110.0");
    assert_eq!(stdout(&from_json), stdout(&from_text));
    // after day 1 only the option leg is left
    let later = clc(&[&["eval", &data("deferred.clc"), "--cut", "--t", "2"][..], &common].concat());
    assert_eq!(stdout(&later).trim(), "10.0");
}

#[test]
fn eval_matches_degenerate_price() {
    let (spot, rate, t) = (100.0f64, 0.05f64, 90.0f64);
    let s_t = spot * ((rate - 0.5 * 0.0 * 0.0) * t / 365.0 + 0.0 * 0.0).exp();
    let env = scratch("vanilla_env.json");
    std::fs::write(&env, format!(r#"{{"labels":{{"AAPL":{{"base":90,"values":[{s_t:?}]}}}}}}"#)).unwrap();
    let model = scratch("flat_model.json");
    std::fs::write(&model, r#"{"labels":{"AAPL":{"spot":100.0,"vol":0.0,"rate":0.05}}}"#).unwrap();

    let il = scratch("vanilla.json");
    std::fs::write(&il, clc(&["compile", "@vanilla", "--cut"]).stdout).unwrap();
    let e = clc(&["eval", il.to_str().unwrap(), "--env", env.to_str().unwrap(), "-t", "T=90", "--rate", "0.05"]);
    assert_eq!(code(&e), 0, "{}", String::from_utf8_lossy(&e.stderr));
    let p = clc(&["price", "@vanilla", "--model", model.to_str().unwrap(), "--paths", "1", "--rate", "0.05"]);
    assert_eq!(code(&p), 0, "{}", String::from_utf8_lossy(&p.stderr));
    let v: f64 = stdout(&e).trim().parse().unwrap();
    let r: serde_json::Value = serde_json::from_str(&stdout(&p)).unwrap();
    assert_eq!(r["price"].as_f64().unwrap(), v);
    assert!(v > 1.0);
}

#[test]
fn price_json_shape_and_model_file() {
    let o = clc(&["price", "@barrier", "--model", &data("barrier_model.json"), "--rate", "0.01", "--paths", "3000", "--seed", "4", "--at", "0,10"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    for (r, t) in arr.iter().zip([0, 10]) {
        assert_eq!(r["t"], t);
        assert_eq!(r["nPaths"], 3000);
        assert!(r["stdError"].as_f64().unwrap() >= 0.0);
    }
    // the file model equals the built-in one
    let builtin = clc(&["price", "@barrier", "--paths", "3000", "--seed", "4", "--at", "0,10"]);
    assert_eq!(stdout(&builtin), stdout(&o));
}

#[test]
fn inst_and_advance() {
    let o = clc(&["inst", &data("deferred.clc"), "-t", "t0=1", "-t", "t1=3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("translate(1,"), "{}", stdout(&o));
    let a = clc(&["advance", &data("deferred.clc"), "--env", &data("deferred_env.json"), "--tenv", &data("deferred_tenv.json"), "--steps", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["transfers"][1]["flows"][0]["amount"], 100.0);
    assert_eq!(v["transfers"][1]["flows"][0]["from"], "you");
    assert!(v["residual"].as_str().unwrap().contains("translate(2,"));
}

#[test]
fn emit_formats() {
    let k = clc(&["emit", "@double"]);
    assert!(stdout(&k).contains("payoffInternal(ext, tenv, disc, t0, t_now, p1, p2) ="));
    let f = clc(&["emit", "@deferred", "--format", "functional"]);
    assert!(stdout(&f).contains("payoffInternal ext tenv disc t0 t_now p1 p2 ="));
    let j = clc(&["emit", "@vanilla", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&j)).unwrap();
    assert_eq!(v["rows"], serde_json::json!([90]));
    // kernels need every template variable
    let missing = clc(&["emit", &data("deferred.clc")]);
    assert_eq!(code(&missing), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&clc(&["check", &data("bad_syntax.clc")])), 2);
    assert_eq!(code(&clc(&["check", &data("bad_type.clc")])), 3);
    assert_eq!(code(&clc(&["check", &data("with_let.clc")])), 0);
    assert_eq!(code(&clc(&["compile", &data("with_let.clc")])), 4);
    assert_eq!(code(&clc(&["eval", "@european"])), 5);
    assert_eq!(code(&clc(&["check", "no/such/file.clc"])), 1);
    assert_eq!(code(&clc(&["frobnicate"])), 1);
    assert_eq!(code(&clc(&["--help"])), 0);
}

#[test]
fn verify_reports_jsonl() {
    let o = clc(&["verify", "--theorem", "4", "--cases", "1000", "--seed", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<_> = stdout(&o).lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()).collect();
    assert_eq!(lines.len(), 1000);
    assert!(lines.iter().all(|l| l["pass"] == true));
    let again = clc(&["verify", "--theorem", "4", "--cases", "1000", "--seed", "9"]);
    assert_eq!(again.stdout, o.stdout);

    let report = scratch("t1.jsonl");
    let o = clc(&["verify", "--theorem", "1", "--cases", "50", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&report).unwrap().lines().count(), 50);
}
