//! Private-message coset codes on the binary adder MAC: best-of-N search,
//! block-error measurement and a single traced trial.

use hashmac::channel::{sample_channel, Dmc};
use hashmac::gf::FieldSpec;
use hashmac::hash::EnsembleSpec;
use hashmac::mac::{decode, encode, search_code, simulate_error, Design, PrivateDesign, Scenario, Stage};
use hashmac::rng::{Purpose, StreamId};
use hashmac::types::Pmf;

const ROOT: u64 = 42;

fn main() -> hashmac::Result<()> {
    let uniform = [Pmf::uniform(2), Pmf::uniform(2)];
    for (n, rates) in [(6, [0.25, 0.25]), (10, [0.3, 0.5])] {
        let spec = EnsembleSpec::all_linear(FieldSpec::GF2, 1, 1);
        let design = Design::Private(PrivateDesign::without_time_sharing(
            &uniform,
            Dmc::binary_adder(),
            rates.to_vec(),
            vec![0.05, 0.05],
            vec![spec; 2],
            n,
        ));
        let stream = StreamId::new(Scenario::PrivateTs.tag(), n, 0, Purpose::Build, 0);
        let found = search_code(&design, 10, 50, ROOT, stream)?;
        let report = simulate_error(
            &found.code,
            design.dmc(),
            200,
            ROOT,
            stream.with_candidate(found.index).with_purpose(Purpose::Measure),
        )?;
        println!(
            "n={n} R={rates:?}: candidate {} of 10, block error {} +/- {:.3}",
            found.index, report.block_error, report.ci_half_width
        );
        for s in Stage::ALL {
            println!("  {:<18} {}", s.name(), report.stage_count(s));
        }

        let code = &found.code;
        let mut rng = stream.with_purpose(Purpose::Verify).rng(ROOT);
        let msgs = code.random_messages(&mut rng);
        let tx = encode(code, &msgs)?;
        let inputs: Vec<&[usize]> = tx.inputs.iter().map(Vec::as_slice).collect();
        let y = sample_channel(design.dmc(), &inputs, &mut rng)?;
        let out = decode(code, &y)?;
        println!("  x1={:?}\n  x2={:?}\n  y ={y:?}", tx.inputs[0], tx.inputs[1]);
        println!("  recovered: {}", out.messages == msgs);
    }
    Ok(())
}
