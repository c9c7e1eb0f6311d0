//! Superposition coding over a noiseless two-output channel: a cloud center
//! carrying a common message and two satellites.

use hashmac::channel::Dmc;
use hashmac::gf::FieldSpec;
use hashmac::hash::EnsembleSpec;
use hashmac::mac::{encode_superposition, decode_superposition, search_code, simulate_error};
use hashmac::mac::{Design, Scenario, SuperpositionDesign};
use hashmac::regions::{in_region_sw, joint_sw};
use hashmac::rng::{Purpose, StreamId};
use hashmac::types::{CondPmf, Pmf};

fn main() -> hashmac::Result<()> {
    let cloud = Pmf::uniform(2);
    let flip = CondPmf::from_rows(vec![vec![0.9, 0.1], vec![0.1, 0.9]])?;
    let dmc = Dmc::noiseless_pair(2);
    let rates = vec![0.125, 0.125, 0.125];

    let law = joint_sw(&cloud, &flip, &flip, &dmc)?;
    println!(
        "R={rates:?} inside with auxiliary conditions: {}",
        in_region_sw(&rates, &law, true)?.inside
    );

    let design = Design::Superposition(SuperpositionDesign {
        mu_x0: cloud,
        mu_x1g0: flip.clone(),
        mu_x2g0: flip,
        dmc,
        rates,
        eps: vec![0.05; 3],
        ensembles: vec![EnsembleSpec::all_linear(FieldSpec::GF2, 1, 1); 3],
        n: 8,
        gamma: None,
        force: false,
    });
    let stream = StreamId::new(Scenario::Superposition.tag(), 8, 0, Purpose::Build, 0);
    let found = search_code(&design, 20, 50, 5, stream)?;
    let code = &found.code;
    println!(
        "message bits per code: {:?}",
        code.codes.iter().map(|c| c.message_len()).collect::<Vec<_>>()
    );

    let mut rng = stream.with_purpose(Purpose::Verify).rng(5);
    let msgs = code.random_messages(&mut rng);
    let (x1, x2) = encode_superposition(code, &msgs)?;
    // the channel is noiseless, so the output is the pair itself
    let y: Vec<usize> = x1.iter().zip(&x2).map(|(a, b)| a * 2 + b).collect();
    let back = decode_superposition(code, &y)?;
    println!("x1={x1:?}\nx2={x2:?}\nrecovered: {}", back == msgs);

    let m = stream.with_candidate(found.index).with_purpose(Purpose::Measure);
    let report = simulate_error(code, design.dmc(), 200, 5, m)?;
    println!("block error {} over {} trials", report.block_error, report.trials);
    Ok(())
}
