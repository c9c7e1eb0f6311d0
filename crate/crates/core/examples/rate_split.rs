//! Splitting superposition rates so that they meet the auxiliary conditions,
//! and undoing the split.

use hashmac::regions::{in_region_sw, rate_split, unsplit};
use hashmac::rng::stream;
use hashmac::verify::{random_sw_law, sample_sw_interior};

fn main() -> hashmac::Result<()> {
    let mut rng = stream(11, &[]);
    let law = random_sw_law(&mut rng)?;
    for _ in 0..8 {
        let rp = sample_sw_interior(&law, &mut rng)?;
        let s = rate_split(&rp, &law)?;
        println!(
            "R'=({:.4}, {:.4}, {:.4}) split=({:.4}, {:.4}) -> ({:.4}, {:.4}, {:.4}) {:?} aux ok: {} inverse exact: {}",
            rp[0],
            rp[1],
            rp[2],
            s.split[0],
            s.split[1],
            s.rates[0],
            s.rates[1],
            s.rates[2],
            s.method,
            in_region_sw(&s.rates, &law, true)?.inside,
            unsplit(&s) == rp,
        );
    }
    Ok(())
}
