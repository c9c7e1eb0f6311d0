//! Region membership from a config file, the same path `hashmac region` takes.
//!
//! ```text
//! cargo run --example region_query -- crates/core/configs/common_message.json
//! ```

use hashmac::harness::{cmd_region, load_config, region_csv};
use std::path::PathBuf;

fn main() -> hashmac::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/adder_region.json")));
    let cfg = load_config(&path)?;
    let Some(region) = cfg.region else {
        eprintln!("{} has no region block", path.display());
        return Ok(());
    };
    let rows = cmd_region(&region)?;
    for r in &rows {
        println!("{:?}: {}", r.point, r.verdict_text());
    }
    print!("{}", region_csv(&rows)?);
    Ok(())
}
