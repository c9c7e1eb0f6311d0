//! Measured `(α, β)` for the three ensembles, plus the exact collision table
//! of a small all-linear ensemble.

use hashmac::gf::FieldSpec;
use hashmac::hash::{estimate_hash_params, EnsembleSpec, Mode};
use hashmac::rng::stream;
use hashmac::verify::pair_collisions;

fn main() -> hashmac::Result<()> {
    let f = FieldSpec::GF2;
    let mut rng = stream(7, &[]);
    for n in [4usize, 8, 12] {
        let l = n / 2;
        for spec in [
            EnsembleSpec::all_linear(f, l, n),
            EnsembleSpec::sparse(f, l, n, 1),
            EnsembleSpec::sparse(f, l, n, 2),
        ] {
            let p = estimate_hash_params(&spec, Mode::Exact, &mut rng)?;
            println!(
                "n={n:>2} l={l} {:<20} degree={:>2} alpha={:<6} beta={}",
                spec.kind.name(),
                spec.column_degree(),
                p.alpha,
                p.beta
            );
        }
    }
    // binning only fits at tiny n; estimate it instead of enumerating tables
    let binning = EnsembleSpec::binning(f, 2, 6);
    let p = estimate_hash_params(&binning, Mode::MonteCarlo(20_000), &mut rng)?;
    println!(
        "n= 6 l=2 random-binning alpha={} beta={} (+/- {:.4})",
        p.alpha,
        p.beta,
        p.provenance.half_width()
    );

    let table = pair_collisions(&EnsembleSpec::all_linear(f, 2, 3))?;
    println!("P[Au = Au'] for l=2, n=3 (rows u, columns u'):");
    for row in table.chunks(8) {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:.2}")).collect();
        println!("  {}", cells.join(" "));
    }
    Ok(())
}
