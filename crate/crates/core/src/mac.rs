//! The three MAC code constructions end to end: build, encode, transmit,
//! decode, and classify failures by the proof's conditions.

use crate::channel::{sample_channel, unflatten, Dmc};
use crate::codec::{min_div_decode, min_div_encode, CosetSpec, DecodeProblem, EncodeTarget};
use crate::error::{Error, Result};
use crate::gf::{FieldSpec, FieldVec, LinearLabel};
use crate::hash::{ci_half_width, sample_linear, EnsembleSpec};
use crate::regions::{
    constraints_private, constraints_sw, first_violation, joint_sw, joint_ts, Constraint, JointLaw, SymbolMap,
};
use crate::rng::{Purpose, StreamId};
use crate::types::{
    cond_divergence_seq, derived_epsilon, divergence_slice, empirical, seq_cond_entropy, seq_mutual_multi,
    slack_iota, slack_iota_cond, zip_sequences, CondPmf, Pmf,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    PrivateTs,
    Common,
    Superposition,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::PrivateTs => "private-ts",
            Scenario::Common => "common",
            Scenario::Superposition => "superposition",
        }
    }

    /// Stream tag for the random streams of this scenario.
    pub fn tag(self) -> u64 {
        self as u64 + 1
    }
}

/// First violated proof condition of a failed trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    EmptyCoset,
    EncoderAtypical,
    MiViolation,
    ChannelAtypical,
    DecoderCollision,
}

impl Stage {
    /// Evaluation order.
    pub const ALL: [Stage; 5] = [
        Stage::EmptyCoset,
        Stage::EncoderAtypical,
        Stage::MiViolation,
        Stage::ChannelAtypical,
        Stage::DecoderCollision,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::EmptyCoset => "empty-coset",
            Stage::EncoderAtypical => "encoder-atypical",
            Stage::MiViolation => "mi-violation",
            Stage::ChannelAtypical => "channel-atypical",
            Stage::DecoderCollision => "decoder-collision",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TrialResult {
    pub success: bool,
    pub stage: Option<Stage>,
}

/// `(A_j, A'_j, a_j)` shared by encoder `j` and the decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct SenderCode {
    pub a_label: LinearLabel,
    pub m_label: LinearLabel,
    pub a: FieldVec,
}

impl SenderCode {
    pub fn coset(&self, m: &FieldVec) -> Result<CosetSpec> {
        CosetSpec::new(self.a_label.clone(), self.m_label.clone(), self.a.clone(), m.clone())
    }

    /// `A'_j x`.
    pub fn message(&self, x: &FieldVec) -> Result<FieldVec> {
        self.m_label.apply(x)
    }

    pub fn message_len(&self) -> usize {
        self.m_label.rows()
    }
}

/// Rates, margins and slack parameters of one code.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateBook {
    /// Requested message rates.
    pub target: Vec<f64>,
    /// Message rates realized by the row counts.
    pub rates: Vec<f64>,
    /// Syndrome rates realized by the row counts.
    pub r: Vec<f64>,
    /// `H - R - ε` before rounding.
    pub nominal_r: Vec<f64>,
    pub eps: Vec<f64>,
    /// `H(X_j|U)`, or `H(X_0)` and `H(X_j|X_0)` for superposition.
    pub entropies: Vec<f64>,
    pub m_rows: Vec<usize>,
    pub a_rows: Vec<usize>,
    pub gamma: f64,
    /// Whether `gamma` satisfies the slack budget of the proof.
    pub gamma_certified: bool,
    /// Derived `ε`, `None` when its precondition fails.
    pub derived_eps: Option<f64>,
}

/// One constructed code with everything encoder and decoder share.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeInstance {
    pub scenario: Scenario,
    pub field: FieldSpec,
    pub n: usize,
    /// Message codes in message order. For superposition the cloud center is
    /// first when it carries a message.
    pub codes: Vec<SenderCode>,
    /// Sequence every encoder conditions on: the time-sharing `u`, or the
    /// constant cloud center of a degenerate superposition code.
    pub side: Option<Vec<usize>>,
    /// Law the decoder scores against, over `[side] + codewords + [Y]`.
    pub law: JointLaw,
    /// Distribution of the conditioning variable (`U` or `X_0`).
    pub cond_law: Pmf,
    /// Per code, `μ_{X|cond}`; the cloud uses a single-row kernel.
    pub targets: Vec<CondPmf>,
    /// Channel seen by the codewords (derived channel for the common scenario).
    pub channel: Dmc,
    /// Symbol maps of the common scenario.
    pub maps: Vec<SymbolMap>,
    pub book: RateBook,
}

impl CodeInstance {
    pub fn senders(&self) -> usize {
        self.codes.len()
    }

    fn has_cloud(&self) -> bool {
        self.scenario == Scenario::Superposition && self.codes.len() == 3
    }

    /// Uniform message tuple.
    pub fn random_messages<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<FieldVec> {
        self.codes
            .iter()
            .map(|c| uniform_vec(self.field, c.message_len(), rng))
            .collect()
    }
}

fn uniform_vec<R: Rng + ?Sized>(field: FieldSpec, len: usize, rng: &mut R) -> FieldVec {
    let q = field.q();
    FieldVec::new(field, (0..len).map(|_| rng.gen_range(0..q)).collect()).expect("residues in range")
}

/// Inverse-CDF draw from a pmf.
pub fn sample_pmf<R: Rng + ?Sized>(p: &Pmf, rng: &mut R) -> usize {
    let t: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &pi) in p.probs().iter().enumerate() {
        acc += pi;
        if t < acc {
            return i;
        }
    }
    p.support().last().copied().unwrap_or(0)
}

/// Lowest grid value of the `γ` search.
pub const GAMMA_BASE: f64 = 0.005;

/// Largest `γ ∈ {0.005·2^i} ∩ (0, 1/8]` with `factor·γ + slack(γ) <= Σ ε_j`.
/// Falls back to the smallest grid value, flagged uncertified.
pub fn choose_gamma(sum_eps: f64, factor: f64, slack: impl Fn(f64) -> Result<f64>) -> (f64, bool) {
    let mut best = None;
    let mut g = GAMMA_BASE;
    while g <= 0.125 {
        if let Ok(s) = slack(g) {
            if factor * g + s <= sum_eps {
                best = Some(g);
            }
        }
        g *= 2.0;
    }
    match best {
        Some(g) => (g, true),
        None => (GAMMA_BASE, false),
    }
}

/// Equal split of the tightest constraint margin across senders, halved.
pub fn suggest_eps(rates: &[f64], cons: &[Constraint]) -> Vec<f64> {
    let margin = cons
        .iter()
        .map(|c| c.bound - c.members.iter().map(|&j| rates[j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let k = rates.len().max(1) as f64;
    vec![margin / k / 2.0; rates.len()]
}

/// Row counts for one code: `(m_rows, a_rows)`, with `a_rows < 0` reported as is.
fn plan_rows(h: f64, rate: f64, eps: f64, n: usize, field: FieldSpec) -> (usize, i64) {
    let bits = field.bits();
    let total = ((n as f64 * (h - eps) / bits) + 1e-9).floor().max(0.0) as i64;
    let m_rows = ((n as f64 * rate / bits).round().max(0.0) as usize).min(n);
    (m_rows, total - m_rows as i64)
}

fn check_ensembles(ensembles: &[EnsembleSpec], codes: usize) -> Result<FieldSpec> {
    if ensembles.len() != codes {
        return Err(Error::Dimension {
            what: "ensemble specs (one per message)",
            expected: codes,
            got: ensembles.len(),
        });
    }
    let field = ensembles[0].field;
    for e in ensembles {
        if !e.kind.is_linear() {
            return Err(Error::Invalid(format!(
                "ensemble {} is not linear; codes need cosets",
                e.kind.name()
            )));
        }
        if e.field != field {
            return Err(Error::Invalid("all ensembles must share one field".into()));
        }
    }
    Ok(field)
}

fn check_lengths(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { what, expected, got });
    }
    Ok(())
}

fn sample_label<R: Rng + ?Sized>(spec: &EnsembleSpec, rows: usize, n: usize, rng: &mut R) -> Result<LinearLabel> {
    if rows == 0 {
        return Ok(LinearLabel::empty(spec.field, n));
    }
    sample_linear(&spec.with_dims(rows, n), rng)
}

/// Inputs of the private-message construction with coded time sharing.
#[derive(Clone, Debug)]
pub struct PrivateDesign {
    pub mu_u: Pmf,
    pub mu_xgu: Vec<CondPmf>,
    pub dmc: Dmc,
    pub rates: Vec<f64>,
    pub eps: Vec<f64>,
    pub ensembles: Vec<EnsembleSpec>,
    pub n: usize,
    /// Fixed `γ` instead of the grid rule.
    pub gamma: Option<f64>,
    /// Skip the feasibility checks (outside-region controls).
    pub force: bool,
}

impl PrivateDesign {
    /// Without time sharing: `U` constant.
    pub fn without_time_sharing(
        mu_x: &[Pmf],
        dmc: Dmc,
        rates: Vec<f64>,
        eps: Vec<f64>,
        ensembles: Vec<EnsembleSpec>,
        n: usize,
    ) -> Self {
        PrivateDesign {
            mu_u: Pmf::uniform(1),
            mu_xgu: mu_x.iter().map(|m| CondPmf::constant(1, m)).collect(),
            dmc,
            rates,
            eps,
            ensembles,
            n,
            gamma: None,
            force: false,
        }
    }
}

/// Rows, realized rates and the feasibility verdict shared by all builders.
struct Plan {
    m_rows: Vec<usize>,
    a_rows: Vec<usize>,
    book: RateBook,
}

fn plan(
    entropies: Vec<f64>,
    rates: &[f64],
    eps: &[f64],
    cons: &[Constraint],
    n: usize,
    field: FieldSpec,
    force: bool,
    first: usize,
) -> Result<Plan> {
    let bits = field.bits();
    let mut m_rows = Vec::new();
    let mut a_rows = Vec::new();
    for j in 0..rates.len() {
        let (m, a) = plan_rows(entropies[j], rates[j], eps[j], n, field);
        m_rows.push(m);
        a_rows.push(a);
    }
    let realized: Vec<f64> = m_rows.iter().map(|&m| m as f64 * bits / n as f64).collect();
    if !force {
        if let Some(e) = eps.iter().find(|e| !(**e >= 0.0)) {
            return Err(Error::Invalid(format!("margin eps = {e} must be nonnegative")));
        }
        if let Some(v) = first_violation(&realized, cons, eps, 0.0) {
            return Err(Error::Infeasible(format!(
                "violates {}: {:.6} >= {:.6}",
                v.label, v.lhs, v.bound
            )));
        }
        if let Some(j) = (first..rates.len()).find(|&j| a_rows[j] <= 0) {
            return Err(Error::Infeasible(format!(
                "message {j}: syndrome rate r = H - R - eps is not positive after rounding"
            )));
        }
    }
    let a_rows: Vec<usize> = a_rows.iter().map(|&a| a.max(0) as usize).collect();
    Ok(Plan {
        book: RateBook {
            target: rates.to_vec(),
            rates: realized,
            r: a_rows.iter().map(|&a| a as f64 * bits / n as f64).collect(),
            nominal_r: (0..rates.len()).map(|j| entropies[j] - rates[j] - eps[j]).collect(),
            eps: eps.to_vec(),
            entropies,
            m_rows: m_rows.clone(),
            a_rows: a_rows.clone(),
            gamma: GAMMA_BASE,
            gamma_certified: false,
            derived_eps: None,
        },
        m_rows,
        a_rows,
    })
}

fn private_law(d: &PrivateDesign) -> Result<(JointLaw, FieldSpec)> {
    let k = d.dmc.senders();
    check_lengths("conditional input laws", k, d.mu_xgu.len())?;
    check_lengths("rates", k, d.rates.len())?;
    check_lengths("margins", k, d.eps.len())?;
    let field = check_ensembles(&d.ensembles, k)?;
    for m in &d.mu_xgu {
        check_lengths("input alphabet vs field size", field.size(), m.out_size())?;
    }
    if d.n == 0 {
        return Err(Error::Invalid("block length n must be positive".into()));
    }
    Ok((joint_ts(&d.mu_u, &d.mu_xgu, &d.dmc)?, field))
}

fn private_gamma(d: &PrivateDesign, law: &JointLaw) -> (f64, bool) {
    if let Some(g) = d.gamma {
        return (g, false);
    }
    let us = d.mu_u.len();
    let sizes: Vec<usize> = law.x.iter().map(|&v| law.size(v)).collect();
    let k = sizes.len() as f64;
    choose_gamma(d.eps.iter().sum(), k + 3.0, |g| {
        sizes.iter().map(|&xs| slack_iota_cond(g, g, xs, us)).sum()
    })
}

/// Samples `(A_j, A'_j, a_j)`, the time-sharing sequence, and records the bookkeeping.
pub fn build_private_code<R: Rng + ?Sized>(d: &PrivateDesign, rng: &mut R) -> Result<CodeInstance> {
    let (law, field) = private_law(d)?;
    let u_var = law.u.expect("time-shared law");
    let entropies: Vec<f64> = law.x.iter().map(|&x| law.cond_entropy(&[x], &[u_var])).collect();
    let p = plan(
        entropies,
        &d.rates,
        &d.eps,
        &constraints_private(&law),
        d.n,
        field,
        d.force,
        0,
    )?;
    let mut labels = Vec::new();
    for j in 0..d.rates.len() {
        let a = sample_label(&d.ensembles[j], p.a_rows[j], d.n, rng)?;
        let m = sample_label(&d.ensembles[j], p.m_rows[j], d.n, rng)?;
        labels.push((a, m));
    }
    finish_private(d, law, field, p.book, labels, Scenario::PrivateTs, Vec::new(), rng)
}

/// Private code from given labels. Rates are read off the row counts and no
/// feasibility check is made.
pub fn assemble_private<R: Rng + ?Sized>(
    d: &PrivateDesign,
    labels: Vec<(LinearLabel, LinearLabel)>,
    rng: &mut R,
) -> Result<CodeInstance> {
    let (law, field) = private_law(d)?;
    check_lengths("label pairs", d.rates.len(), labels.len())?;
    let u_var = law.u.expect("time-shared law");
    let bits = field.bits();
    let nf = d.n as f64;
    let entropies: Vec<f64> = law.x.iter().map(|&x| law.cond_entropy(&[x], &[u_var])).collect();
    for (a, m) in &labels {
        check_lengths("label columns", d.n, a.cols())?;
        check_lengths("label columns", d.n, m.cols())?;
    }
    let m_rows: Vec<usize> = labels.iter().map(|(_, m)| m.rows()).collect();
    let a_rows: Vec<usize> = labels.iter().map(|(a, _)| a.rows()).collect();
    let book = RateBook {
        target: d.rates.clone(),
        rates: m_rows.iter().map(|&m| m as f64 * bits / nf).collect(),
        r: a_rows.iter().map(|&a| a as f64 * bits / nf).collect(),
        nominal_r: (0..labels.len()).map(|j| entropies[j] - d.rates[j] - d.eps[j]).collect(),
        eps: d.eps.clone(),
        entropies,
        m_rows,
        a_rows,
        gamma: GAMMA_BASE,
        gamma_certified: false,
        derived_eps: None,
    };
    finish_private(d, law, field, book, labels, Scenario::PrivateTs, Vec::new(), rng)
}

#[allow(clippy::too_many_arguments)]
fn finish_private<R: Rng + ?Sized>(
    d: &PrivateDesign,
    law: JointLaw,
    field: FieldSpec,
    mut book: RateBook,
    labels: Vec<(LinearLabel, LinearLabel)>,
    scenario: Scenario,
    maps: Vec<SymbolMap>,
    rng: &mut R,
) -> Result<CodeInstance> {
    let codes: Vec<SenderCode> = labels
        .into_iter()
        .map(|(a_label, m_label)| {
            let a = uniform_vec(field, a_label.rows(), rng);
            SenderCode { a_label, m_label, a }
        })
        .collect();
    let u: Vec<usize> = (0..d.n).map(|_| sample_pmf(&d.mu_u, rng)).collect();
    let (gamma, certified) = private_gamma(d, &law);
    book.gamma = gamma;
    book.gamma_certified = certified;
    let x_size: usize = law.x.iter().map(|&v| law.size(v)).product();
    book.derived_eps = derived_epsilon(&d.eps, d.n, x_size, d.mu_u.len() * d.dmc.output_size()).ok();
    Ok(CodeInstance {
        scenario,
        field,
        n: d.n,
        codes,
        side: Some(u),
        law,
        cond_law: d.mu_u.clone(),
        targets: d.mu_xgu.clone(),
        channel: d.dmc.clone(),
        maps,
        book,
    })
}

/// Inputs of the common-message construction.
#[derive(Clone, Debug)]
pub struct CommonDesign {
    pub dmc: Dmc,
    /// `f_j` with its index set `K̃_j` in `inputs`.
    pub maps: Vec<SymbolMap>,
    pub mu_xt: Vec<Pmf>,
    pub rates: Vec<f64>,
    pub eps: Vec<f64>,
    pub ensembles: Vec<EnsembleSpec>,
    pub n: usize,
    pub gamma: Option<f64>,
    pub force: bool,
}

/// Derived channel over the auxiliary messages together with the physical maps.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub dmc: Dmc,
    pub maps: Vec<SymbolMap>,
    pub sizes: Vec<usize>,
}

impl Reduction {
    /// `x_j = f_j(x̃_{K̃_j})` componentwise.
    pub fn physical(&self, xt: &[&[usize]]) -> Result<Vec<Vec<usize>>> {
        physical_inputs(&self.maps, &self.sizes, xt)
    }
}

fn physical_inputs(maps: &[SymbolMap], sizes: &[usize], xt: &[&[usize]]) -> Result<Vec<Vec<usize>>> {
    check_lengths("auxiliary sequences", sizes.len(), xt.len())?;
    let n = xt.first().map_or(0, |s| s.len());
    let mut tuple = vec![0; sizes.len()];
    Ok(maps
        .iter()
        .map(|m| {
            (0..n)
                .map(|i| {
                    for (t, s) in tuple.iter_mut().zip(xt) {
                        *t = s[i];
                    }
                    m.eval(&tuple, sizes)
                })
                .collect()
        })
        .collect())
}

/// `μ_{Y|X̃}(y|x̃) = μ_{Y|X}(y|f(x̃))`, the private-message view of a common-message MAC.
pub fn reduce_common_to_private(dmc: &Dmc, maps: &[SymbolMap], mu_xt: &[Pmf]) -> Result<Reduction> {
    check_lengths("symbol maps (one per sender)", dmc.senders(), maps.len())?;
    let sizes: Vec<usize> = mu_xt.iter().map(Pmf::len).collect();
    for (m, &out) in maps.iter().zip(dmc.input_sizes()) {
        m.validate(&sizes, out)?;
    }
    let cells: usize = sizes.iter().product();
    let rows = (0..cells)
        .map(|c| {
            let xt = unflatten(c, &sizes);
            let xs: Vec<usize> = maps.iter().map(|m| m.eval(&xt, &sizes)).collect();
            dmc.row(&xs).clone()
        })
        .collect();
    Ok(Reduction {
        dmc: Dmc::new(sizes.clone(), dmc.output_size(), rows)?,
        maps: maps.to_vec(),
        sizes,
    })
}

/// Common-message code: a private code over the derived channel whose
/// codewords pass through the symbol maps.
pub fn build_common_code<R: Rng + ?Sized>(d: &CommonDesign, rng: &mut R) -> Result<CodeInstance> {
    let red = reduce_common_to_private(&d.dmc, &d.maps, &d.mu_xt)?;
    let pd = PrivateDesign {
        gamma: d.gamma,
        force: d.force,
        ..PrivateDesign::without_time_sharing(
            &d.mu_xt,
            red.dmc.clone(),
            d.rates.clone(),
            d.eps.clone(),
            d.ensembles.clone(),
            d.n,
        )
    };
    let mut code = build_private_code(&pd, rng)?;
    code.scenario = Scenario::Common;
    code.maps = red.maps;
    Ok(code)
}

/// Inputs of the superposition construction.
#[derive(Clone, Debug)]
pub struct SuperpositionDesign {
    pub mu_x0: Pmf,
    pub mu_x1g0: CondPmf,
    pub mu_x2g0: CondPmf,
    pub dmc: Dmc,
    /// `(R_0, R_1, R_2)`.
    pub rates: Vec<f64>,
    pub eps: Vec<f64>,
    /// One ensemble per message, cloud first.
    pub ensembles: Vec<EnsembleSpec>,
    pub n: usize,
    pub gamma: Option<f64>,
    pub force: bool,
}

/// Cloud center code plus two satellite codes conditioned on it.
pub fn build_superposition_code<R: Rng + ?Sized>(d: &SuperpositionDesign, rng: &mut R) -> Result<CodeInstance> {
    check_lengths("rates (R0, R1, R2)", 3, d.rates.len())?;
    check_lengths("margins (eps0, eps1, eps2)", 3, d.eps.len())?;
    let field = check_ensembles(&d.ensembles, 3)?;
    if d.n == 0 {
        return Err(Error::Invalid("block length n must be positive".into()));
    }
    for m in [&d.mu_x1g0, &d.mu_x2g0] {
        check_lengths("satellite alphabet vs field size", field.size(), m.out_size())?;
    }
    let cloud = d.mu_x0.len() != 1;
    if cloud {
        check_lengths("cloud alphabet vs field size", field.size(), d.mu_x0.len())?;
    } else if d.rates[0] != 0.0 {
        return Err(Error::Invalid("a constant cloud center cannot carry R0 > 0".into()));
    }
    let law = joint_sw(&d.mu_x0, &d.mu_x1g0, &d.mu_x2g0, &d.dmc)?;
    let entropies = vec![
        law.table.entropy_of(&[0]),
        law.cond_entropy(&[1], &[0]),
        law.cond_entropy(&[2], &[0]),
    ];
    // a constant cloud center carries nothing, so its own constraint and margin drop out
    let mut cons = constraints_sw(&law, true)?;
    let mut eps = d.eps.clone();
    if !cloud {
        cons.retain(|c| c.members != [0]);
        eps[0] = 0.0;
    }
    let p = plan(
        entropies,
        &d.rates,
        &eps,
        &cons,
        d.n,
        field,
        d.force,
        usize::from(!cloud),
    )?;
    let mut book = p.book;
    let first = usize::from(!cloud);
    let mut codes = Vec::new();
    for j in first..3 {
        let a_label = sample_label(&d.ensembles[j], p.a_rows[j], d.n, rng)?;
        let m_label = sample_label(&d.ensembles[j], p.m_rows[j], d.n, rng)?;
        let a = uniform_vec(field, a_label.rows(), rng);
        codes.push(SenderCode { a_label, m_label, a });
    }
    let mut targets = Vec::new();
    if cloud {
        targets.push(CondPmf::constant(1, &d.mu_x0));
    }
    targets.push(d.mu_x1g0.clone());
    targets.push(d.mu_x2g0.clone());
    let (x0s, x1s, x2s) = (d.mu_x0.len(), d.mu_x1g0.out_size(), d.mu_x2g0.out_size());
    let (gamma, certified) = match d.gamma {
        Some(g) => (g, false),
        None => choose_gamma(eps.iter().sum(), 5.0, |g| {
            Ok(slack_iota(g, x0s)? + slack_iota_cond(g, g, x1s, x0s)? + slack_iota_cond(g, g, x2s, x0s)?)
        }),
    };
    book.gamma = gamma;
    book.gamma_certified = certified;
    book.derived_eps = derived_epsilon(&eps, d.n, x0s * x1s * x2s, d.dmc.output_size()).ok();
    Ok(CodeInstance {
        scenario: Scenario::Superposition,
        field,
        n: d.n,
        codes,
        side: (!cloud).then(|| vec![0; d.n]),
        law,
        cond_law: d.mu_x0.clone(),
        targets,
        channel: d.dmc.clone(),
        maps: Vec::new(),
        book,
    })
}

/// Encoder outputs of one message tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    /// One codeword per message code.
    pub codewords: Vec<FieldVec>,
    /// Sequence the codewords were conditioned on (`u` or `x_0`).
    pub cond: Vec<usize>,
    /// What enters the physical channel.
    pub inputs: Vec<Vec<usize>>,
}

impl Transmission {
    /// Codewords the decoder estimates, excluding a constant cloud center.
    fn decoded_part(&self) -> &[FieldVec] {
        &self.codewords
    }
}

/// Runs every encoder of the code on the message tuple.
pub fn encode(code: &CodeInstance, msgs: &[FieldVec]) -> Result<Transmission> {
    check_lengths("messages", code.codes.len(), msgs.len())?;
    let n = code.n;
    let mut codewords = Vec::with_capacity(msgs.len());
    let cond: Vec<usize>;
    let mut rest = 0;
    if code.scenario == Scenario::Superposition {
        if code.has_cloud() {
            let cs = code.codes[0].coset(&msgs[0])?;
            let x0 = min_div_encode(&cs, &EncodeTarget::Marginal(code.cond_law.clone()))?;
            cond = x0.symbols();
            codewords.push(x0);
            rest = 1;
        } else {
            cond = vec![0; n];
        }
    } else {
        cond = code.side.clone().expect("private codes carry u");
    }
    for j in rest..code.codes.len() {
        let cs = code.codes[j].coset(&msgs[j])?;
        let target = EncodeTarget::Conditional {
            mu: code.targets[j].clone(),
            u: cond.clone(),
        };
        codewords.push(min_div_encode(&cs, &target)?);
    }
    let symbols: Vec<Vec<usize>> = codewords.iter().map(FieldVec::symbols).collect();
    let inputs = match code.scenario {
        Scenario::PrivateTs => symbols,
        Scenario::Common => {
            let refs: Vec<&[usize]> = symbols.iter().map(Vec::as_slice).collect();
            let sizes = vec![code.field.size(); refs.len()];
            physical_inputs(&code.maps, &sizes, &refs)?
        }
        Scenario::Superposition => symbols[rest..].to_vec(),
    };
    Ok(Transmission { codewords, cond, inputs })
}

/// Decoder output: codeword estimates and the recovered messages.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub codewords: Vec<FieldVec>,
    pub messages: Vec<FieldVec>,
}

/// Joint minimum-divergence decoding followed by `m̂_j = A'_j x̂_j`.
pub fn decode(code: &CodeInstance, y: &[usize]) -> Result<DecodeOutput> {
    let labels: Vec<LinearLabel> = code.codes.iter().map(|c| c.a_label.clone()).collect();
    let syndromes: Vec<FieldVec> = code.codes.iter().map(|c| c.a.clone()).collect();
    let problem = DecodeProblem {
        labels: &labels,
        syndromes: &syndromes,
        law: &code.law.table,
        side: code.side.as_deref(),
        y,
    };
    let codewords = min_div_decode(&problem)?;
    let messages = codewords
        .iter()
        .zip(&code.codes)
        .map(|(x, c)| c.message(x))
        .collect::<Result<_>>()?;
    Ok(DecodeOutput { codewords, messages })
}

/// Physical channel inputs for private messages.
pub fn encode_private(code: &CodeInstance, msgs: &[FieldVec]) -> Result<Vec<Vec<usize>>> {
    Ok(encode(code, msgs)?.inputs)
}

pub fn decode_private(code: &CodeInstance, y: &[usize]) -> Result<Vec<FieldVec>> {
    Ok(decode(code, y)?.messages)
}

/// `(x_1, x_2)` for the message tuple; a constant cloud center takes no message.
pub fn encode_superposition(code: &CodeInstance, msgs: &[FieldVec]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut t = encode(code, msgs)?.inputs;
    let x2 = t.pop().expect("two satellites");
    let x1 = t.pop().expect("two satellites");
    Ok((x1, x2))
}

pub fn decode_superposition(code: &CodeInstance, y: &[usize]) -> Result<Vec<FieldVec>> {
    Ok(decode(code, y)?.messages)
}

/// One uniformly drawn message tuple pushed through encoder, channel and decoder.
pub fn run_trial<R: Rng + ?Sized>(code: &CodeInstance, dmc: &Dmc, rng: &mut R) -> Result<TrialResult> {
    let msgs = code.random_messages(rng);
    let tx = match encode(code, &msgs) {
        Ok(t) => t,
        Err(Error::EmptyCoset) => {
            return Ok(TrialResult {
                success: false,
                stage: Some(Stage::EmptyCoset),
            })
        }
        Err(e) => return Err(e),
    };
    let refs: Vec<&[usize]> = tx.inputs.iter().map(Vec::as_slice).collect();
    let y = sample_channel(dmc, &refs, rng)?;
    let out = decode(code, &y)?;
    for (j, c) in code.codes.iter().enumerate() {
        debug_assert_eq!(c.message(&out.codewords[j]).ok().as_ref(), Some(&out.messages[j]));
    }
    if out.messages == msgs {
        return Ok(TrialResult {
            success: true,
            stage: None,
        });
    }
    Ok(TrialResult {
        success: false,
        stage: Some(classify(code, &tx, &y)?),
    })
}

/// First violated condition among encoder typicality, the empirical mutual
/// information bound, channel typicality; otherwise a decoder collision.
pub fn classify(code: &CodeInstance, tx: &Transmission, y: &[usize]) -> Result<Stage> {
    let g = code.book.gamma;
    let cond_size = code.cond_law.len();
    let q = code.field.size();
    let eps_sum: f64 = code.book.eps.iter().sum();
    let cloud = code.has_cloud();
    // MAC0 / MAC-SW0
    let ct = empirical(&tx.cond, cond_size)?;
    if !(divergence_slice(&ct.freqs(), code.cond_law.probs()) < g) {
        return Ok(Stage::EncoderAtypical);
    }
    let sat = usize::from(cloud);
    let xs: Vec<Vec<usize>> = tx.decoded_part()[sat..].iter().map(FieldVec::symbols).collect();
    for (x, mu) in xs.iter().zip(&code.targets[sat..]) {
        if !(cond_divergence_seq(x, &tx.cond, mu)? < g) {
            return Ok(Stage::EncoderAtypical);
        }
    }
    let refs: Vec<&[usize]> = xs.iter().map(Vec::as_slice).collect();
    let sizes = vec![q; refs.len()];
    let threshold = match code.scenario {
        Scenario::Superposition => {
            g + eps_sum
                + slack_iota(g, cond_size)?
                + (0..2).map(|_| slack_iota_cond(g, g, q, cond_size)).sum::<Result<f64>>()?
        }
        _ => g + eps_sum + (0..refs.len()).map(|_| slack_iota_cond(g, g, q, cond_size)).sum::<Result<f64>>()?,
    };
    if !(seq_mutual_multi(&refs, &sizes, &tx.cond, cond_size)? < threshold) {
        return Ok(Stage::MiViolation);
    }
    let mut all: Vec<&[usize]> = vec![&tx.cond];
    all.extend(&refs);
    let mut all_sizes = vec![cond_size];
    all_sizes.extend(&sizes);
    let z = zip_sequences(&all, &all_sizes)?;
    let kernel = channel_kernel(&code.channel, cond_size);
    if !(cond_divergence_seq(y, &z, &kernel)? < g) {
        return Ok(Stage::ChannelAtypical);
    }
    Ok(Stage::DecoderCollision)
}

/// `μ_{Y|C X_K}` with the channel ignoring `C`.
fn channel_kernel(dmc: &Dmc, cond_size: usize) -> CondPmf {
    let rows: Vec<Pmf> = (0..cond_size).flat_map(|_| dmc.rows().iter().cloned()).collect();
    CondPmf::new(rows).expect("channel rows share one length")
}

/// Block-error estimate of one code.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: u64,
    pub errors: u64,
    pub block_error: f64,
    pub ci_half_width: f64,
    /// Failure counts in [`Stage::ALL`] order.
    pub stages: [u64; 5],
}

impl SimReport {
    pub fn stage_count(&self, s: Stage) -> u64 {
        self.stages[s.index()]
    }
}

/// Monte Carlo block error with one random stream per trial.
pub fn simulate_error(code: &CodeInstance, dmc: &Dmc, trials: u64, root: u64, stream: StreamId) -> Result<SimReport> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let results = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(code, dmc, &mut stream.with_trial(t).rng(root)))
        .collect::<Result<Vec<_>>>()?;
    let mut stages = [0u64; 5];
    let mut errors = 0;
    for r in &results {
        if let Some(s) = r.stage {
            stages[s.index()] += 1;
            errors += 1;
        }
    }
    let p = errors as f64 / trials as f64;
    Ok(SimReport {
        trials,
        errors,
        block_error: p,
        ci_half_width: ci_half_width(p, trials),
        stages,
    })
}

/// Any of the three constructions.
#[derive(Clone, Debug)]
pub enum Design {
    Private(PrivateDesign),
    Common(CommonDesign),
    Superposition(SuperpositionDesign),
}

impl Design {
    pub fn scenario(&self) -> Scenario {
        match self {
            Design::Private(_) => Scenario::PrivateTs,
            Design::Common(_) => Scenario::Common,
            Design::Superposition(_) => Scenario::Superposition,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Design::Private(d) => d.n,
            Design::Common(d) => d.n,
            Design::Superposition(d) => d.n,
        }
    }

    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CodeInstance> {
        match self {
            Design::Private(d) => build_private_code(d, rng),
            Design::Common(d) => build_common_code(d, rng),
            Design::Superposition(d) => build_superposition_code(d, rng),
        }
    }

    /// The physical channel.
    pub fn dmc(&self) -> &Dmc {
        match self {
            Design::Private(d) => &d.dmc,
            Design::Common(d) => &d.dmc,
            Design::Superposition(d) => &d.dmc,
        }
    }
}

/// The chosen code and the pilot score of every candidate.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub code: CodeInstance,
    pub index: usize,
    /// Pilot block errors, `None` for candidates that failed to build.
    pub pilot_errors: Vec<Option<f64>>,
}

/// Best of `candidates` independently built codes by pilot block error; ties
/// go to the earliest candidate. Candidate `i` is built from the stream
/// `(.., i, Build)` and piloted on `(.., i, Pilot, trial)`.
pub fn search_code(
    design: &Design,
    candidates: usize,
    pilot_trials: u64,
    root: u64,
    stream: StreamId,
) -> Result<SearchOutcome> {
    if candidates == 0 {
        return Err(Error::Invalid("code search needs at least one candidate".into()));
    }
    let built: Vec<Result<CodeInstance>> = (0..candidates)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.with_candidate(i).with_purpose(Purpose::Build).rng(root);
            design.build(&mut rng)
        })
        .collect();
    let scores: Vec<Option<f64>> = built
        .par_iter()
        .enumerate()
        .map(|(i, c)| match c {
            Ok(code) if pilot_trials > 0 => {
                let s = stream.with_candidate(i).with_purpose(Purpose::Pilot);
                simulate_error(code, design.dmc(), pilot_trials, root, s).map(|r| Some(r.block_error))
            }
            Ok(_) => Ok(Some(0.0)),
            Err(_) => Ok(None),
        })
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(v) = s {
            if best.map_or(true, |b| *v < scores[b].expect("scored")) {
                best = Some(i);
            }
        }
    }
    match best {
        Some(i) => {
            let code = built.into_iter().nth(i).expect("index in range")?;
            Ok(SearchOutcome {
                code,
                index: i,
                pilot_errors: scores,
            })
        }
        None => Err(built
            .into_iter()
            .find_map(|c| c.err())
            .expect("every candidate failed")),
    }
}

/// Conditional entropy `H(x|u)` of a codeword, exposed for diagnostics.
pub fn codeword_cond_entropy(x: &FieldVec, u: &[usize], u_size: usize) -> Result<f64> {
    seq_cond_entropy(&x.symbols(), u, x.field().size(), u_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::EnsembleKind;
    use crate::regions::joint_private;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn adder_design(rates: Vec<f64>, n: usize) -> PrivateDesign {
        PrivateDesign::without_time_sharing(
            &[Pmf::uniform(2), Pmf::uniform(2)],
            Dmc::binary_adder(),
            rates,
            vec![0.05, 0.05],
            vec![EnsembleSpec::all_linear(FieldSpec::GF2, 1, n); 2],
            n,
        )
    }

    #[test]
    fn private_bookkeeping() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = build_private_code(&adder_design(vec![0.25, 0.25], 20), &mut rng).unwrap();
        for j in 0..2 {
            assert!((code.book.nominal_r[j] - 0.70).abs() < 1e-12);
            assert!((code.book.r[j] - 0.70).abs() < 1e-12);
            assert!((code.book.rates[j] - 0.25).abs() < 1e-12);
            let total = code.book.r[j] + code.book.rates[j];
            assert!(total <= code.book.entropies[j] - code.book.eps[j] + 1e-12);
            assert!(total > code.book.entropies[j] - code.book.eps[j] - 1.0 / 20.0);
        }
        assert!(code.side.as_ref().unwrap().iter().all(|&u| u == 0));
        let err = build_private_code(&adder_design(vec![1.0, 1.0], 12), &mut rng).unwrap_err();
        assert!(matches!(&err, Error::Infeasible(m) if m.contains("J={1,2}")), "{err}");
    }

    #[test]
    fn messages_survive_the_coset_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let code = build_private_code(&adder_design(vec![0.25, 0.25], 8), &mut rng).unwrap();
        for _ in 0..20 {
            let msgs = code.random_messages(&mut rng);
            match encode(&code, &msgs) {
                Ok(tx) => {
                    for j in 0..2 {
                        assert_eq!(code.codes[j].message(&tx.codewords[j]).unwrap(), msgs[j]);
                    }
                }
                Err(Error::EmptyCoset) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn identity_channel_round_trip() {
        // A empty and A' = I: the coset of m is {m}
        let n = 6;
        let f = FieldSpec::GF2;
        let dmc = Dmc::deterministic(vec![2, 2], 4, |x| 2 * x[0] + x[1]).unwrap();
        let d = PrivateDesign::without_time_sharing(
            &[Pmf::uniform(2), Pmf::uniform(2)],
            dmc.clone(),
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            vec![EnsembleSpec::all_linear(f, 1, n); 2],
            n,
        );
        let labels = vec![(LinearLabel::empty(f, n), LinearLabel::identity(f, n)); 2];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = assemble_private(&d, labels, &mut rng).unwrap();
        let msgs = code.random_messages(&mut rng);
        let y = sample_channel(&dmc, &[&msgs[0].symbols(), &msgs[1].symbols()], &mut rng).unwrap();
        assert_eq!(decode_private(&code, &y).unwrap(), msgs);
        let rep = simulate_error(&code, &dmc, 20, 1, StreamId::new(1, n, 0, Purpose::Measure, 0)).unwrap();
        assert_eq!(rep.errors, 0);
    }

    #[test]
    fn stage_histogram_partitions_failures() {
        let mut d = adder_design(vec![0.9, 0.9], 6);
        d.force = true;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let code = build_private_code(&d, &mut rng).unwrap();
        let rep = simulate_error(&code, &d.dmc, 50, 2, StreamId::new(1, 6, 0, Purpose::Measure, 0)).unwrap();
        assert_eq!(rep.stages.iter().sum::<u64>(), rep.errors);
        assert!(rep.errors > 25);
    }

    #[test]
    fn identity_reduction_keeps_the_channel() {
        let dmc = Dmc::from_rows(
            vec![2, 2],
            2,
            vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.3, 0.7], vec![0.5, 0.5]],
        )
        .unwrap();
        let maps = [SymbolMap::identity(0, 2), SymbolMap::identity(1, 2)];
        let r = reduce_common_to_private(&dmc, &maps, &[Pmf::uniform(2), Pmf::uniform(2)]).unwrap();
        assert_eq!(r.dmc, dmc);
    }

    #[test]
    fn xor_reduction_by_direct_summation() {
        let bsc = Dmc::from_rows(vec![2], 2, vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let sizes = [2, 2];
        let f = SymbolMap::from_fn(vec![0, 1], &sizes, |x| x[0] ^ x[1]);
        let r = reduce_common_to_private(&bsc, &[f], &[Pmf::uniform(2), Pmf::uniform(2)]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for y in 0..2 {
                    let direct: f64 = (0..2).map(|x| bsc.p(y, &[x]) * f64::from(u8::from(x == a ^ b))).sum();
                    assert_eq!(r.dmc.p(y, &[a, b]), direct);
                }
            }
        }
        let bad = SymbolMap::identity(2, 2);
        assert!(reduce_common_to_private(&bsc, &[bad], &[Pmf::uniform(2), Pmf::uniform(2)]).is_err());
    }

    #[test]
    fn common_encoder_applies_the_maps() {
        let n = 6;
        let bsc = Dmc::from_rows(vec![2], 2, vec![vec![0.95, 0.05], vec![0.05, 0.95]]).unwrap();
        let sizes = [2, 2];
        let d = CommonDesign {
            dmc: bsc,
            maps: vec![SymbolMap::from_fn(vec![0, 1], &sizes, |x| x[0] ^ x[1])],
            mu_xt: vec![Pmf::uniform(2), Pmf::uniform(2)],
            rates: vec![0.17, 0.17],
            eps: vec![0.05, 0.05],
            ensembles: vec![EnsembleSpec::all_linear(FieldSpec::GF2, 1, n); 2],
            n,
            gamma: None,
            force: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let code = build_common_code(&d, &mut rng).unwrap();
        let msgs = code.random_messages(&mut rng);
        if let Ok(tx) = encode(&code, &msgs) {
            let a = tx.codewords[0].symbols();
            let b = tx.codewords[1].symbols();
            let x: Vec<usize> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
            assert_eq!(tx.inputs, vec![x]);
        }
    }

    fn sw_design(rates: Vec<f64>, eps: Vec<f64>, n: usize) -> SuperpositionDesign {
        let flip = CondPmf::from_rows(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        SuperpositionDesign {
            mu_x0: Pmf::uniform(2),
            mu_x1g0: flip.clone(),
            mu_x2g0: flip,
            dmc: Dmc::noiseless_pair(2),
            rates,
            eps,
            ensembles: vec![EnsembleSpec::all_linear(FieldSpec::GF2, 1, n); 3],
            n,
            gamma: None,
            force: false,
        }
    }

    #[test]
    fn superposition_bookkeeping_and_shared_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = sw_design(vec![0.3, 0.1, 0.1], vec![0.05, 0.05, 0.05], 20);
        let code = build_superposition_code(&d, &mut rng).unwrap();
        assert!((code.book.nominal_r[0] - 0.65).abs() < 1e-12);
        assert_eq!(code.codes.len(), 3);
        let msgs = code.random_messages(&mut rng);
        if let (Ok(a), Ok(b)) = (encode(&code, &msgs), encode(&code, &msgs)) {
            assert_eq!(a.codewords[0], b.codewords[0]);
        }
    }

    #[test]
    fn aux_violation_is_named() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // R0 alone above I(X0; X1 X2 Y)
        let d = sw_design(vec![0.95, 0.0, 0.0], vec![0.01, 0.01, 0.01], 20);
        let err = build_superposition_code(&d, &mut rng).unwrap_err();
        assert!(matches!(&err, Error::Infeasible(m) if m.contains("aux")), "{err}");
    }

    #[test]
    fn constant_cloud_matches_private_law() {
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let d = SuperpositionDesign {
            mu_x0: Pmf::uniform(1),
            mu_x1g0: CondPmf::constant(1, &Pmf::uniform(2)),
            mu_x2g0: CondPmf::constant(1, &Pmf::uniform(2)),
            dmc: Dmc::binary_adder(),
            rates: vec![0.0, 0.25, 0.25],
            eps: vec![0.05, 0.05, 0.05],
            ensembles: vec![EnsembleSpec::all_linear(FieldSpec::GF2, 1, n); 3],
            n,
            gamma: None,
            force: false,
        };
        let code = build_superposition_code(&d, &mut rng).unwrap();
        assert_eq!(code.codes.len(), 2);
        let p = joint_private(&[Pmf::uniform(2), Pmf::uniform(2)], &Dmc::binary_adder()).unwrap();
        assert_eq!(code.law.table.probs(), p.table.probs());
        let rep = simulate_error(&code, &d.dmc, 10, 3, StreamId::new(3, n, 0, Purpose::Measure, 0)).unwrap();
        assert_eq!(rep.trials, 10);
    }

    #[test]
    fn search_is_deterministic_and_single_candidate_is_build() {
        let d = Design::Private(adder_design(vec![0.25, 0.25], 6));
        let s = StreamId::new(1, 6, 0, Purpose::Build, 0);
        let a = search_code(&d, 4, 10, 11, s).unwrap();
        let b = search_code(&d, 4, 10, 11, s).unwrap();
        assert_eq!(a.code, b.code);
        assert_eq!(a.pilot_errors, b.pilot_errors);
        let first = a.pilot_errors[0].unwrap();
        assert!(a.pilot_errors[a.index].unwrap() <= first);
        let one = search_code(&d, 1, 5, 11, s).unwrap();
        let built = d.build(&mut s.with_candidate(0).with_purpose(Purpose::Build).rng(11)).unwrap();
        assert_eq!(one.code, built);
    }

    #[test]
    fn binning_is_rejected_for_codes() {
        let mut d = adder_design(vec![0.25, 0.25], 6);
        d.ensembles = vec![EnsembleSpec::new(EnsembleKind::RandomBinning, FieldSpec::GF2, 1, 6); 2];
        assert!(build_private_code(&d, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
