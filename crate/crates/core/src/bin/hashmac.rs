use clap::{Args, Parser, Subcommand};
use hashmac::harness::{self, Config};
use hashmac::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hashmac", version, about = "Hash-property coset codes for multiple access channels")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Region membership verdicts and rate splits for listed points.
    Region(Common),
    /// Code search and block-error simulation over a block-length ladder.
    Simulate(Common),
    /// Exhaustive lemma verification suites.
    Verify(Common),
    /// Hash-property parameters (alpha, beta) per ensemble and block length.
    EnsembleStats(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run rates outside the achievable region (controls).
    #[arg(long)]
    force: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn missing(block: &str) -> Error {
    Error::Config {
        field: block.into(),
        msg: "block missing from config".into(),
    }
}

fn emit(csv: &str, out: &Option<PathBuf>) -> hashmac::Result<()> {
    match out {
        Some(p) => std::fs::write(p, csv).map_err(Error::from),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run(cmd: Cmd) -> hashmac::Result<bool> {
    let (Cmd::Region(c) | Cmd::Simulate(c) | Cmd::Verify(c) | Cmd::EnsembleStats(c)) = &cmd;
    let cfg: Config = harness::load_config(&c.config)?;
    let seed = c.seed.or(cfg.seed).unwrap_or(harness::DEFAULT_SEED);
    match &cmd {
        Cmd::Region(c) => {
            let rows = harness::cmd_region(cfg.region.as_ref().ok_or_else(|| missing("region"))?)?;
            for r in &rows {
                let pt: Vec<String> = r.point.iter().map(f64::to_string).collect();
                println!("({}) {}", pt.join(", "), r.verdict_text());
                match &r.split {
                    Some(Ok(s)) => println!("  split {:?} -> rates {:?} ({:?})", s.split, s.rates, s.method),
                    Some(Err(e)) => println!("  split failed: {e}"),
                    None => {}
                }
            }
            if let Some(p) = &c.out {
                std::fs::write(p, harness::region_csv(&rows)?)?;
            }
            Ok(true)
        }
        Cmd::Simulate(c) => {
            let sim = cfg.simulate.as_ref().ok_or_else(|| missing("simulate"))?;
            let rows = harness::cmd_simulate(sim, seed, c.force)?;
            emit(&harness::simulate_csv(&rows, true)?, &c.out)?;
            Ok(true)
        }
        Cmd::Verify(c) => {
            let v = cfg.verify.clone().unwrap_or_default();
            let reports = harness::cmd_verify(&v, seed)?;
            for rep in &reports {
                for l in &rep.lemmas {
                    println!("[{}] {l}", rep.suite.name());
                }
            }
            if let Some(p) = &c.out {
                std::fs::write(p, harness::verify_csv(&reports)?)?;
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
        Cmd::EnsembleStats(c) => {
            let st = cfg.ensemble_stats.as_ref().ok_or_else(|| missing("ensemble_stats"))?;
            let rows = harness::cmd_ensemble_stats(st, seed)?;
            emit(&harness::stats_csv(&rows)?, &c.out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config { .. }) => {
            eprintln!("hashmac: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("hashmac: {e}");
            ExitCode::from(1)
        }
    }
}
