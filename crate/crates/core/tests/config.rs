use hashmac::harness::{cmd_ensemble_stats, cmd_region, cmd_simulate, cmd_verify, parse_config};
use hashmac::Error;

const ADDER: &str = r#""scenario": "private", "channel": {"preset": "binary-adder"}, "inputs": [[0.5, 0.5], [0.5, 0.5]]"#;

/// Field named by the error a config produces, at parse time or when run.
fn rejected_field(doc: &str) -> String {
    let err = match parse_config(doc) {
        Err(e) => e,
        Ok(cfg) => {
            let run = if let Some(r) = &cfg.region {
                cmd_region(r).map(drop)
            } else if let Some(s) = &cfg.simulate {
                cmd_simulate(s, 1, false).map(drop)
            } else if let Some(v) = &cfg.verify {
                cmd_verify(v, 1).map(drop)
            } else {
                cmd_ensemble_stats(cfg.ensemble_stats.as_ref().unwrap(), 1).map(drop)
            };
            run.expect_err("config should be rejected")
        }
    };
    match err {
        Error::Config { field, .. } => field,
        other => panic!("expected a config error, got {other}"),
    }
}

fn simulate(extra: &str) -> String {
    format!(
        r#"{{"simulate": {{"model": {{{ADDER}}}, "rates": [0.25, 0.25], "n": [4],
            "ensemble": {{"kind": "uniform-all-linear"}}, "trials": 1, "candidates": 1 {extra}}}}}"#
    )
}

#[test]
fn syntax_and_unknown_keys_point_at_the_document() {
    assert_eq!(rejected_field("{"), "<document>");
    assert_eq!(rejected_field(r#"{"regoin": {}}"#), "<document>");
    let err = parse_config(r#"{"verify": {"suite": "all", "colour": 1}}"#).unwrap_err();
    assert!(err.to_string().contains("colour"), "{err}");
}

#[test]
fn model_errors_name_the_field() {
    let bad_pmf = r#"{"region": {"model": {"scenario": "private", "channel": {"preset": "binary-adder"},
        "inputs": [[0.7, 0.7], [0.5, 0.5]]}, "points": []}}"#;
    assert_eq!(rejected_field(bad_pmf), "region.model.inputs[0]");

    let preset = r#"{"region": {"model": {"scenario": "private", "channel": {"preset": "z-channel"},
        "inputs": [[0.5, 0.5], [0.5, 0.5]]}}}"#;
    assert!(rejected_field(preset).starts_with("region.model.channel"));

    let scenario = r#"{"region": {"model": {"scenario": "broadcast", "channel": {"preset": "binary-adder"}}}}"#;
    assert_eq!(rejected_field(scenario), "region.model.scenario");

    let missing = r#"{"region": {"model": {"scenario": "superposition", "channel": {"preset": "noiseless-pair"}}}}"#;
    assert!(rejected_field(missing).starts_with("region.model."));
}

#[test]
fn region_points_and_split_are_checked() {
    let arity = format!(r#"{{"region": {{"model": {{{ADDER}}}, "points": [[0.1, 0.1], [0.1]]}}}}"#);
    assert_eq!(rejected_field(&arity), "region.points[1]");
    let split = format!(r#"{{"region": {{"model": {{{ADDER}}}, "points": [], "split": true}}}}"#);
    assert_eq!(rejected_field(&split), "region.split");
}

#[test]
fn simulate_errors_name_the_field() {
    let ladder = simulate("").replace(r#""n": [4]"#, r#""n": [8, 6]"#);
    assert_eq!(rejected_field(&ladder), "simulate.n");
    let rates = simulate("").replace("[0.25, 0.25]", "[0.25]");
    assert_eq!(rejected_field(&rates), "simulate.rates");
    assert_eq!(rejected_field(&simulate(r#", "eps": [0.1]"#)), "simulate.eps");
    let binning = simulate("").replace("uniform-all-linear", "random-binning");
    assert_eq!(rejected_field(&binning), "simulate.ensemble.kind");
    let kind = simulate("").replace("uniform-all-linear", "ldpc");
    assert_eq!(rejected_field(&kind), "simulate.ensemble.kind");
    let q = simulate("").replace(r#""kind": "uniform-all-linear""#, r#""kind": "uniform-all-linear", "q": 4"#);
    assert_eq!(rejected_field(&q), "simulate.ensemble.q");
    let cands = simulate("").replace(r#""candidates": 1"#, r#""candidates": 0"#);
    assert_eq!(rejected_field(&cands), "simulate.candidates");
}

#[test]
fn verify_and_stats_errors_name_the_field() {
    assert_eq!(rejected_field(r#"{"verify": {"suite": "everything"}}"#), "verify.suite");
    assert_eq!(rejected_field(r#"{"verify": {"fault": "eta-sign"}}"#), "verify.fault");
    assert_eq!(rejected_field(r#"{"verify": {"gammas": [0.5]}}"#), "verify.gammas");
    let stats = r#"{"ensemble_stats": {"ensembles": [{"kind": "uniform-all-linear"}], "n": [4], "row_ratio": 2}}"#;
    assert_eq!(rejected_field(stats), "ensemble_stats.row_ratio");
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
