//! Common messages through the private-message reduction: three auxiliary
//! messages mapped onto two adder inputs.

use hashmac::channel::Dmc;
use hashmac::gf::FieldSpec;
use hashmac::hash::EnsembleSpec;
use hashmac::mac::{reduce_common_to_private, search_code, simulate_error, CommonDesign, Design, Scenario};
use hashmac::regions::{in_region_han, joint_han, SymbolMap};
use hashmac::rng::{Purpose, StreamId};
use hashmac::types::Pmf;

fn main() -> hashmac::Result<()> {
    let sizes = [2, 2];
    // sender 1 sends the shared message, sender 2 adds its own on top
    let maps = vec![
        SymbolMap::from_fn(vec![0], &sizes, |x| x[0]),
        SymbolMap::from_fn(vec![0, 1], &sizes, |x| x[0] ^ x[1]),
    ];
    let mu = vec![Pmf::uniform(2), Pmf::uniform(2)];
    let dmc = Dmc::binary_adder();

    let red = reduce_common_to_private(&dmc, &maps, &mu)?;
    println!("derived channel over the auxiliary messages:");
    for c in 0..4 {
        let xt = [c >> 1, c & 1];
        println!("  xt={xt:?} -> {:?}", red.dmc.row(&xt).probs());
    }

    let law = joint_han(&mu, &maps, &dmc)?;
    for r in [[0.3, 0.3], [0.6, 0.6]] {
        println!("R={r:?}: {}", if in_region_han(&r, &law)?.inside { "inside" } else { "outside" });
    }

    let spec = EnsembleSpec::all_linear(FieldSpec::GF2, 1, 1);
    let design = Design::Common(CommonDesign {
        dmc,
        maps,
        mu_xt: mu,
        rates: vec![0.25, 0.25],
        eps: vec![0.05, 0.05],
        ensembles: vec![spec; 2],
        n: 8,
        gamma: None,
        force: false,
    });
    let stream = StreamId::new(Scenario::Common.tag(), 8, 0, Purpose::Build, 0);
    let found = search_code(&design, 5, 50, 9, stream)?;
    let m = stream.with_candidate(found.index).with_purpose(Purpose::Measure);
    let report = simulate_error(&found.code, design.dmc(), 200, 9, m)?;
    println!("n=8: block error {} over {} trials", report.block_error, report.trials);
    Ok(())
}
