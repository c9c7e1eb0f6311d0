//! Output formats pinned against checked-in files under `tests/golden/`.

use hashmac::harness::{
    cmd_ensemble_stats, cmd_region, cmd_simulate, cmd_verify, load_config, region_csv, simulate_csv, stats_csv,
    strip_wall_time, verify_csv, Config, REGION_HEADER, SIMULATE_HEADER, STATS_HEADER, VERIFY_HEADER,
};
use std::path::{Path, PathBuf};

fn root() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(root().join("tests/golden").join(name)).expect("golden file")
}

fn config(rel: &str) -> Config {
    let p: PathBuf = root().join(rel);
    load_config(&p).expect("config loads")
}

#[test]
fn region_csv_matches_golden() {
    let cfg = config("configs/adder_region.json");
    let rows = cmd_region(cfg.region.as_ref().unwrap()).unwrap();
    assert_eq!(region_csv(&rows).unwrap(), golden("adder_region.csv"));
}

#[test]
fn ensemble_stats_csv_matches_golden() {
    let cfg = config("configs/ensemble_stats.json");
    let rows = cmd_ensemble_stats(cfg.ensemble_stats.as_ref().unwrap(), cfg.seed.unwrap()).unwrap();
    assert_eq!(stats_csv(&rows).unwrap(), golden("ensemble_stats.csv"));
}

#[test]
fn simulate_csv_matches_golden() {
    let cfg = config("tests/golden/sim_small.json");
    let rows = cmd_simulate(cfg.simulate.as_ref().unwrap(), 11, false).unwrap();
    let text = simulate_csv(&rows, true).unwrap();
    assert_eq!(strip_wall_time(&text), golden("sim_small.csv"));
    // without wall time the column is present but empty
    let bare = simulate_csv(&rows, false).unwrap();
    assert!(bare.lines().skip(1).all(|l| l.ends_with(',')));
}

#[test]
fn verify_csv_matches_golden() {
    let cfg = config("tests/golden/verify_regions.json");
    let reports = cmd_verify(cfg.verify.as_ref().unwrap(), 5).unwrap();
    assert_eq!(verify_csv(&reports).unwrap(), golden("verify_regions.csv"));
}

#[test]
fn headers_are_the_first_golden_lines() {
    for (file, header) in [
        ("adder_region.csv", REGION_HEADER.join(",")),
        ("ensemble_stats.csv", STATS_HEADER.join(",")),
        ("verify_regions.csv", VERIFY_HEADER.join(",")),
    ] {
        assert_eq!(golden(file).lines().next().unwrap(), header, "{file}");
    }
    let sim = golden("sim_small.csv");
    let first = sim.lines().next().unwrap();
    assert_eq!(first, SIMULATE_HEADER[..SIMULATE_HEADER.len() - 1].join(","));
}
