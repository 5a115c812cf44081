use std::path::{Path, PathBuf};
use std::process::Command;

use glab::cli::{emit_series, parse_model, run_suite, RunConfig, Suite};
use glab::GlabError;

const CYCLE: &str = r#"{"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]],"beta":0.6,"lambda":[0.5,2.0,0.5,2.0]}"#;

fn write_model(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn glab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_glab")).args(args).output().unwrap()
}

#[test]
fn all_suites_pass_in_regime() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "c4.json", CYCLE);
    let out = dir.path().join("out");
    let cfg = RunConfig { out: Some(out.clone()), ..RunConfig::new(Suite::All, &model, 3) };
    let result = run_suite(&cfg).unwrap();
    assert!(result.pass, "{:?}", result.failures().map(|r| &r.name).collect::<Vec<_>>());
    assert!(result.mixing.is_some());
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("all.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 3);
    assert!(json.get("wall_time_seconds").is_none());
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("all.meta.json")).unwrap()).unwrap();
    assert!(meta["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn reports_depend_on_seed_only() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "c4.json", CYCLE);
    let run = |seed: u64, sub: &str| {
        let out = dir.path().join(sub);
        run_suite(&RunConfig { out: Some(out.clone()), ..RunConfig::new(Suite::Influence, &model, seed) }).unwrap();
        std::fs::read(out.join("influence.json")).unwrap()
    };
    assert_eq!(run(9, "a"), run(9, "b"));
    assert_ne!(run(9, "a"), run(10, "c"));
}

#[test]
fn model_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("dup.json", r#"{"n":3,"edges":[[0,1],[1,0]],"beta":1.0,"lambda":1.0}"#),
        ("len.json", r#"{"n":3,"edges":[[0,1]],"beta":1.0,"lambda":[1.0,2.0]}"#),
        ("loop.json", r#"{"n":3,"edges":[[1,1]],"beta":1.0,"lambda":1.0}"#),
        ("beta.json", r#"{"n":2,"edges":[[0,1]],"beta":-1.0,"lambda":1.0}"#),
        ("extra.json", r#"{"n":2,"edges":[],"beta":1.0,"lambda":1.0,"gamma":2}"#),
        ("syntax.json", "{\"n\":2,\n\"edges\":[,"),
    ];
    for (name, body) in cases {
        let p = write_model(dir.path(), name, body);
        match parse_model(&p) {
            Err(GlabError::InvalidModel(msg)) => assert!(msg.contains(name), "{msg}"),
            other => panic!("{name}: {other:?}"),
        }
    }
    let scalar = write_model(dir.path(), "scalar.json", r#"{"n":3,"edges":[[0,1]],"beta":1.0,"lambda":2.0}"#);
    assert_eq!(parse_model(&scalar).unwrap().lambda(), &[2.0, 2.0, 2.0]);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "c4.json", CYCLE);
    let m = model.to_str().unwrap();
    let out = dir.path().join("o");

    let ok = glab(&["run", "--suite", "dobrushin", "--model", m, "--seed", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.join("dobrushin.json").exists());

    assert_eq!(glab(&["run", "--suite", "nonsense", "--model", m]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(glab(&["run", "--suite", "influence", "--model", missing.to_str().unwrap()]).status.code(), Some(3));

    let sample = glab(&["sample", "--model", m, "--steps", "20", "--seed", "4", "--thin", "5"]);
    assert_eq!(sample.status.code(), Some(0));
    let csv = String::from_utf8(sample.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("step,config_index"));
    assert_eq!(csv.lines().count(), 6);

    let mix = glab(&["mix", "--model", m, "--eps", "0.25"]);
    assert_eq!(mix.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&mix.stdout).unwrap();
    assert_eq!(report["t_mix_exact"], 10);
}

#[test]
fn header_only_series() {
    let dir = tempfile::tempdir().unwrap();
    let p = emit_series(dir.path(), "empty", &["k", "gap"], &[]).unwrap();
    assert_eq!(std::fs::read_to_string(p).unwrap(), "k,gap\n");
    assert!(matches!(
        emit_series(dir.path(), "bad", &["k", "gap"], &[vec![1.0]]),
        Err(GlabError::LengthMismatch { expected: 2, got: 1 })
    ));
}

#[test]
fn run_config_round_trip() {
    let cfg = RunConfig::from_json_str(r#"{"suite":"walks","model":"m.json","seed":5,"theta":0.3}"#).unwrap();
    assert_eq!(cfg.suite, Suite::Walks);
    assert_eq!(cfg.params().theta, 0.3);
    assert!(RunConfig::from_json_str(r#"{"suite":"walks","model":"m.json"}"#).is_err());
}
