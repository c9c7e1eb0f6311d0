//! Type classes of short binary sequences, typical-set sizes against
//! `2^{n(H ± η)}`, and the full method-of-types verification suite.

use hashmac::gf::{all_vectors, FieldSpec};
use hashmac::types::{entropy, enumerate_types, is_typical, slack_eta, type_class_size, Pmf};
use hashmac::verify::{self, Suite};

fn main() -> hashmac::Result<()> {
    let n = 10;
    let mu = Pmf::new(vec![0.75, 0.25])?;
    let types = enumerate_types(n, 2)?;
    println!("n={n}: {} binary types", types.len());
    for t in &types {
        println!("  type {:?}: |T| = {}, H = {:.4}", t.counts(), type_class_size(t)?, t.entropy());
    }

    let h = entropy(&mu);
    for gamma in [0.05, 0.125] {
        let typical = all_vectors(FieldSpec::GF2, n)?
            .filter(|v| is_typical(&v.symbols(), &mu, gamma).unwrap_or(false))
            .count();
        let eta = slack_eta(gamma, n, 2)?;
        println!(
            "gamma={gamma}: eta={eta:.3}, |T_gamma| = {typical}, 2^(n(H-eta)) = {:.1}, 2^(n(H+eta)) = {:.1}",
            2f64.powf(n as f64 * (h - eta)),
            2f64.powf(n as f64 * (h + eta)),
        );
    }

    for report in verify::run(Suite::Types, &verify::Options::default())? {
        for lemma in &report.lemmas {
            println!("{lemma}");
        }
    }
    Ok(())
}
