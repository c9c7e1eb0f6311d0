//! Exhaustive checks of the counting lemmas, the hash-property bounds, the
//! coset searches and the region computations.
//!
//! Every suite recomputes its quantities from first principles (direct
//! enumeration of sequences, labels or coset members) and compares against the
//! library's closed forms. A fault can be injected into the slack functions to
//! confirm the suites notice.

use crate::channel::Dmc;
use crate::codec::{self, oracle, CosetSpec, DecodeProblem, EncodeTarget};
use crate::error::{Error, Result};
use crate::gf::{all_vectors, FieldSpec, FieldVec, LinearLabel};
use crate::hash::{
    self, conditional_maxima, crp_bound, for_each_label, multi_crp_bound, multi_crp_exact, saturation_bound,
    EnsembleSpec, HashParams, Mode,
};
use crate::regions::{
    constraints_han, constraints_private, constraints_sw, in_region_private, in_region_sw, joint_han,
    joint_private, joint_sw, rate_split, unsplit, JointLaw, SymbolMap, SPLIT_QUANTUM,
};
use crate::rng::stream;
use crate::types::{slack_iota, slack_iota_cond, slack_lambda, CondPmf, JointTable, Pmf};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;

/// Absolute tolerance on every lemma inequality.
pub const LEMMA_TOL: f64 = 1e-9;

const VERIFY_TAG: u64 = 0x7665_7269;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Types,
    Hash,
    Codec,
    Regions,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Types => "types",
            Suite::Hash => "hash",
            Suite::Codec => "codec",
            Suite::Regions => "regions",
            Suite::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        [Suite::Types, Suite::Hash, Suite::Codec, Suite::Regions, Suite::All]
            .into_iter()
            .find(|x| x.name() == s)
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Types, Suite::Hash, Suite::Codec, Suite::Regions],
            s => vec![s],
        }
    }
}

/// Deliberate bugs for sensitivity checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of `λ`, which also shrinks `η = ι + λ`.
    LambdaSign,
}

impl Fault {
    pub fn parse(s: &str) -> Option<Fault> {
        (s == "lambda-sign").then_some(Fault::LambdaSign)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub types: TypesParams,
    /// Random `(T, G, u)` draws per hash lemma.
    pub hash_instances: usize,
    pub codec_instances: usize,
    pub split_points: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 1,
            fault: None,
            types: TypesParams::default(),
            hash_instances: 50,
            codec_instances: 200,
            split_points: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypesParams {
    pub ns: Vec<usize>,
    pub gammas: Vec<f64>,
}

impl Default for TypesParams {
    fn default() -> Self {
        TypesParams {
            ns: vec![4, 6, 8, 10],
            gammas: vec![0.01, 0.05, 0.125],
        }
    }
}

/// Case and violation counts for one lemma.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub name: String,
    pub cases: u64,
    pub violations: u64,
    /// Cases where the statement is vacuous (e.g. an empty typical set).
    pub skipped: u64,
    pub first_violation: Option<String>,
}

impl LemmaReport {
    fn new(name: &str) -> Self {
        LemmaReport {
            name: name.to_string(),
            cases: 0,
            violations: 0,
            skipped: 0,
            first_violation: None,
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.check_n(1, ok, detail)
    }

    /// Records `count` cases sharing one outcome.
    fn check_n(&mut self, count: u64, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += count;
        if !ok {
            self.violations += count;
            if self.first_violation.is_none() {
                self.first_violation = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} cases={} violations={} skipped={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.violations,
            self.skipped
        )?;
        if let Some(v) = &self.first_violation {
            write!(f, " first: {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub lemmas: Vec<LemmaReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.lemmas.iter().all(LemmaReport::passed)
    }

    pub fn lemma(&self, name: &str) -> Option<&LemmaReport> {
        self.lemmas.iter().find(|l| l.name == name)
    }
}

/// Runs `suite` (all four for [`Suite::All`]).
pub fn run(suite: Suite, opts: &Options) -> Result<Vec<SuiteReport>> {
    suite
        .members()
        .into_iter()
        .map(|s| match s {
            Suite::Types => types_suite(opts),
            Suite::Hash => hash_suite(opts),
            Suite::Codec => codec_suite(opts),
            Suite::Regions => regions_suite(opts),
            Suite::All => unreachable!("expanded above"),
        })
        .collect()
}

fn suite_rng(opts: &Options, suite: Suite) -> ChaCha8Rng {
    stream(opts.seed, &[VERIFY_TAG, suite as u64])
}

/// Strictly positive random pmf.
pub fn random_pmf<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Pmf {
    let w: Vec<f64> = (0..size).map(|_| rng.gen_range(0.05..1.0)).collect();
    Pmf::from_weights(&w).expect("positive weights")
}

fn random_cond<R: Rng + ?Sized>(in_size: usize, out_size: usize, rng: &mut R) -> CondPmf {
    CondPmf::new((0..in_size).map(|_| random_pmf(out_size, rng)).collect()).expect("complete rows")
}

fn random_dmc<R: Rng + ?Sized>(input_sizes: Vec<usize>, out: usize, rng: &mut R) -> Dmc {
    let cells: usize = input_sizes.iter().product();
    Dmc::new(input_sizes, out, (0..cells).map(|_| random_pmf(out, rng)).collect()).expect("valid channel")
}

// ---------------------------------------------------------------- types

struct Slack {
    sign: f64,
}

impl Slack {
    fn new(opts: &Options) -> Self {
        Slack {
            sign: if opts.fault == Some(Fault::LambdaSign) { -1.0 } else { 1.0 },
        }
    }

    fn lambda(&self, n: usize, size: usize) -> f64 {
        self.sign * slack_lambda(n, size)
    }
}

fn h2(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn kl(nu: &[f64], mu: &[f64]) -> f64 {
    nu.iter()
        .zip(mu)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).log2() } else { f64::INFINITY })
        .sum()
}

/// Method-of-types lemmas, exhaustively over all binary sequences (and all
/// ternary ones for the counting lemmas).
pub fn types_suite(opts: &Options) -> Result<SuiteReport> {
    let sl = Slack::new(opts);
    let mut rng = suite_rng(opts, Suite::Types);
    let p = &opts.types;
    let mut l5 = LemmaReport::new("lemma5-type-count");
    let mut l6 = LemmaReport::new("lemma6-type-class");
    let mut tn = LemmaReport::new("typical-number");
    let mut l7 = LemmaReport::new("lemma7-l1-distance");
    let mut l8 = LemmaReport::new("lemma8-entropy-deviation");
    let mut tt = LemmaReport::new("typical-trans");
    let mut l11 = LemmaReport::new("lemma11-atypical-mass");
    let mut l12 = LemmaReport::new("lemma12-typical-set-size");

    let mut marginals = vec![
        Pmf::new(vec![0.5, 0.5])?,
        Pmf::new(vec![0.3, 0.7])?,
        Pmf::new(vec![0.1, 0.9])?,
    ];
    marginals.push(random_pmf(2, &mut rng));
    let mut joints = vec![
        (Pmf::new(vec![0.5, 0.5])?, CondPmf::from_rows(vec![vec![0.8, 0.2], vec![0.3, 0.7]])?),
        (Pmf::new(vec![0.3, 0.7])?, CondPmf::from_rows(vec![vec![0.5, 0.5], vec![0.1, 0.9]])?),
    ];
    joints.push((random_pmf(2, &mut rng), random_cond(2, 2, &mut rng)));

    for &n in &p.ns {
        if n == 0 || n > 12 {
            return Err(Error::Invalid(format!("types suite supports 1 <= n <= 12, got {n}")));
        }
        // counting lemmas over alphabets of size 2 and 3
        for size in [2usize, 3] {
            let mut classes: HashMap<Vec<u32>, u64> = HashMap::new();
            let total = size.pow(n as u32);
            for mut idx in 0..total {
                let mut counts = vec![0u32; size];
                for _ in 0..n {
                    counts[idx % size] += 1;
                    idx /= size;
                }
                *classes.entry(counts).or_default() += 1;
            }
            let bound = ((n + 1) as f64).powi(size as i32);
            l5.check((classes.len() as f64) < bound, || {
                format!("n={n} |U|={size}: {} types >= {bound}", classes.len())
            });
            let lam = sl.lambda(n, size);
            for (counts, &members) in &classes {
                let nu: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
                let h = h2(&nu);
                let log_size = (members as f64).log2();
                let ok = n as f64 * (h - lam) <= log_size + LEMMA_TOL && log_size <= n as f64 * h + LEMMA_TOL;
                l6.check(ok, || format!("n={n} type {counts:?}: log|T|={log_size}, H={h}"));
            }
        }

        // binary: per-weight multiplicities cover every single-sequence statement
        let mask = (1u32 << n) - 1;
        let mut by_weight = vec![0u64; n + 1];
        for u in 0..=mask {
            by_weight[u.count_ones() as usize] += 1;
        }
        let nu_of = |w: usize| [1.0 - w as f64 / n as f64, w as f64 / n as f64];
        let lam2 = sl.lambda(n, 2);
        for step in 0..=4 {
            let hcap = 0.25 * step as f64;
            let count: u64 = (0..=n).filter(|&w| h2(&nu_of(w)) <= hcap + 1e-12).map(|w| by_weight[w]).sum();
            let ok = (count as f64).log2() <= n as f64 * (hcap + lam2) + LEMMA_TOL;
            tn.check(ok, || format!("n={n} H<={hcap}: {count} sequences"));
        }
        for mu in &marginals {
            let hmu = h2(mu.probs());
            for &g in &p.gammas {
                let iota = slack_iota(g, 2)?;
                let eta = iota + lam2;
                let mut atypical_mass = 0.0;
                let mut typical = 0u64;
                for w in 0..=n {
                    let nu = nu_of(w);
                    let d = kl(&nu, mu.probs());
                    if d < g {
                        typical += by_weight[w];
                        let l1: f64 = nu.iter().zip(mu.probs()).map(|(a, b)| (a - b).abs()).sum();
                        l7.check_n(by_weight[w], l1 <= (2.0 * g).sqrt() + LEMMA_TOL, || {
                            format!("n={n} w={w} mu={:?} gamma={g}: |nu-mu|={l1}", mu.probs())
                        });
                        let dev = (h2(&nu) - hmu).abs();
                        l8.check_n(by_weight[w], dev <= iota + LEMMA_TOL, || {
                            format!("n={n} w={w} mu={:?} gamma={g}: |H(nu)-H|={dev} > {iota}", mu.probs())
                        });
                    } else {
                        let logp = w as f64 * mu.p(1).log2() + (n - w) as f64 * mu.p(0).log2();
                        atypical_mass += by_weight[w] as f64 * logp.exp2();
                    }
                }
                let cap = (-(n as f64) * (g - lam2)).exp2();
                l11.check(atypical_mass <= cap + LEMMA_TOL, || {
                    format!("n={n} mu={:?} gamma={g}: mass {atypical_mass} > {cap}", mu.probs())
                });
                check_size(&mut l12, typical, n, hmu, eta, || format!("n={n} mu={:?} gamma={g}", mu.probs()));
            }
        }

        pair_checks(n, &joints, p, &sl, &mut l5, &mut l8, &mut tt, &mut l11, &mut l12)?;
    }

    Ok(SuiteReport {
        suite: Suite::Types,
        lemmas: vec![l5, l6, tn, l7, l8, tt, l11, l12],
    })
}

/// `|(1/n) log|T| − H| ≤ η`; the lower side is only meaningful for nonempty sets.
fn check_size(rep: &mut LemmaReport, size: u64, n: usize, h: f64, eta: f64, ctx: impl Fn() -> String) {
    if size == 0 {
        rep.skipped += 1;
        return;
    }
    let rate = (size as f64).log2() / n as f64;
    rep.check((rate - h).abs() <= eta + LEMMA_TOL, || {
        format!("{}: (1/n)log|T|={rate}, H={h}, eta={eta}", ctx())
    });
}

struct PairStats {
    count: u64,
    d_joint: f64,
    d_u: f64,
    d_cond: f64,
    h_cond: f64,
    logp_cond: f64,
}

/// Conditional statements over all binary pairs `(u, v)`, grouped by `v` and
/// joint type.
#[allow(clippy::too_many_arguments)]
fn pair_checks(
    n: usize,
    joints: &[(Pmf, CondPmf)],
    p: &TypesParams,
    sl: &Slack,
    l5: &mut LemmaReport,
    l8: &mut LemmaReport,
    tt: &mut LemmaReport,
    l11: &mut LemmaReport,
    l12: &mut LemmaReport,
) -> Result<()> {
    let mask = (1u32 << n) - 1;
    let nn = n + 1;
    // joint type index from (a01, a10, a11); a00 is implied
    let type_index = |a01: usize, a10: usize, a11: usize| (a01 * nn + a10) * nn + a11;
    let mut seen = vec![false; nn * nn * nn];
    // per v: its weight and the (type, multiplicity) histogram of its partners
    let mut hists: Vec<(usize, Vec<(usize, u64)>)> = Vec::with_capacity(1 << n);
    let mut local = vec![0u64; nn * nn * nn];
    for v in 0..=mask {
        let mut touched = Vec::new();
        for u in 0..=mask {
            let a11 = (u & v).count_ones() as usize;
            let a10 = (u & !v & mask).count_ones() as usize;
            let a01 = (!u & v & mask).count_ones() as usize;
            let t = type_index(a01, a10, a11);
            if local[t] == 0 {
                touched.push(t);
            }
            local[t] += 1;
        }
        touched.sort_unstable();
        let hist = touched
            .iter()
            .map(|&t| {
                seen[t] = true;
                let c = local[t];
                local[t] = 0;
                (t, c)
            })
            .collect();
        hists.push((v.count_ones() as usize, hist));
    }
    let joint_types = seen.iter().filter(|&&s| s).count();
    let bound = (nn as f64).powi(4);
    l5.check((joint_types as f64) < bound, || {
        format!("n={n}: {joint_types} joint types >= {bound}")
    });

    let lam_uv = sl.lambda(n, 4);
    for (mu_v, mu_ugv) in joints {
        let pv = mu_v.probs();
        // joint law as [v][u]
        let law = [
            [pv[0] * mu_ugv.p(0, 0), pv[0] * mu_ugv.p(1, 0)],
            [pv[1] * mu_ugv.p(0, 1), pv[1] * mu_ugv.p(1, 1)],
        ];
        let flat = [law[0][0], law[0][1], law[1][0], law[1][1]];
        let h_v = h2(pv);
        let h_ugv = h2(&flat) - h_v;
        let mu_u = [law[0][0] + law[1][0], law[0][1] + law[1][1]];

        let stats_of = |t: usize, count: u64| -> PairStats {
            let a11 = t % nn;
            let a10 = (t / nn) % nn;
            let a01 = t / (nn * nn);
            let a00 = n - a01 - a10 - a11;
            let f = |c: usize| c as f64 / n as f64;
            // counts as [v][u]
            let c = [[a00, a10], [a01, a11]];
            let nu = [f(a00), f(a10), f(a01), f(a11)];
            let nu_v = [f(a00 + a10), f(a01 + a11)];
            let nu_u = [f(a00 + a01), f(a10 + a11)];
            let d_joint = kl(&nu, &flat);
            let d_v = kl(&nu_v, pv);
            let mut logp_cond = 0.0;
            for v in 0..2 {
                for u in 0..2 {
                    if c[v][u] > 0 {
                        logp_cond += c[v][u] as f64 * mu_ugv.p(u, v).log2();
                    }
                }
            }
            PairStats {
                count,
                d_joint,
                d_u: kl(&nu_u, &mu_u),
                d_cond: d_joint - d_v,
                h_cond: h2(&nu) - h2(&nu_v),
                logp_cond,
            }
        };

        for (_, hist) in &hists {
            let stats: Vec<PairStats> = hist.iter().map(|&(t, c)| stats_of(t, c)).collect();
            let (v_t, _) = hist[0];
            let a01 = v_t / (nn * nn);
            let a11 = v_t % nn;
            let wv = a01 + a11;
            let nu_v = [1.0 - wv as f64 / n as f64, wv as f64 / n as f64];
            let d_v = kl(&nu_v, pv);
            let h_nu_v = h2(&nu_v);
            for &g in &p.gammas {
                // statements indexed by γ alone
                let cap = (-(n as f64) * (g - lam_uv)).exp2();
                let mass: f64 = stats
                    .iter()
                    .filter(|s| s.d_cond >= g)
                    .map(|s| s.count as f64 * s.logp_cond.exp2())
                    .sum();
                l11.check(mass <= cap + LEMMA_TOL, || {
                    format!("n={n} v-weight={wv} gamma={g}: conditional mass {mass} > {cap}")
                });
                for s in stats.iter().filter(|s| s.d_joint < g) {
                    let ok = s.d_u < g + LEMMA_TOL && s.d_cond < g + LEMMA_TOL;
                    tt.check_n(s.count, ok, || {
                        format!("n={n} gamma={g}: joint typical pair with D_u={} D_cond={}", s.d_u, s.d_cond)
                    });
                }
                if d_v >= g {
                    continue;
                }
                let iota_v = slack_iota(g, 2)?;
                let dev = (h_nu_v - h_v).abs();
                l8.check(dev <= iota_v + LEMMA_TOL, || {
                    format!("n={n} v-weight={wv} gamma={g}: |H(v)-H(V)|={dev} > {iota_v}")
                });
                for &gp in &p.gammas {
                    let iota_c = slack_iota_cond(gp, g, 2, 2)?;
                    let mut size = 0u64;
                    for s in stats.iter().filter(|s| s.d_cond < gp) {
                        size += s.count;
                        let dev = (s.h_cond - h_ugv).abs();
                        l8.check_n(s.count, dev <= iota_c + LEMMA_TOL, || {
                            format!("n={n} gamma={g} gamma'={gp}: |H(u|v)-H(U|V)|={dev} > {iota_c}")
                        });
                        tt.check_n(s.count, s.d_joint < g + gp + LEMMA_TOL, || {
                            format!("n={n} gamma={g} gamma'={gp}: D_joint={} >= gamma+gamma'", s.d_joint)
                        });
                    }
                    check_size(l12, size, n, h_ugv, iota_c + lam_uv, || {
                        format!("n={n} v-weight={wv} gamma={g} gamma'={gp} conditional")
                    });
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- hash

/// `P[Au = Au']` for every ordered pair of vectors, by walking the whole
/// ensemble support. Row-major over vector indices; the diagonal is 1.
pub fn pair_collisions(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    let vecs: Vec<FieldVec> = all_vectors(spec.field, spec.cols)?.collect();
    let size = vecs.len();
    let mut table = vec![0.0; size * size];
    let mut err = None;
    for_each_label(spec, |a, p| {
        let imgs: Result<Vec<FieldVec>> = vecs.iter().map(|u| a.apply(u)).collect();
        match imgs {
            Ok(imgs) => {
                for i in 0..size {
                    for j in 0..size {
                        if imgs[i] == imgs[j] {
                            table[i * size + j] += p;
                        }
                    }
                }
            }
            Err(e) => err = Some(e),
        }
    })?;
    err.map_or(Ok(table), Err)
}

fn beta_from_pairs(table: &[f64], size: usize, im: f64, alpha: f64) -> f64 {
    let threshold = alpha / im * (1.0 + 1e-12);
    (0..size)
        .map(|i| {
            (0..size)
                .filter(|&j| j != i && table[i * size + j] > threshold)
                .map(|j| table[i * size + j])
                .fold(0.0, |a, b| a + b)
        })
        .fold(0.0, f64::max)
}

/// `(α, β)` on the α grid straight from the pair table, minimizing `α + β`.
pub fn params_from_pairs(table: &[f64], size: usize, im: f64) -> HashParams {
    let mut best = HashParams::exact(f64::INFINITY, f64::INFINITY);
    for alpha in hash::alpha_grid() {
        let beta = beta_from_pairs(table, size, im, alpha);
        if alpha + beta < best.alpha + best.beta - 1e-12 {
            best = HashParams::exact(alpha, beta);
        }
    }
    best
}

fn random_subset<R: Rng + ?Sized>(vecs: &[FieldVec], rng: &mut R) -> Vec<FieldVec> {
    let k = rng.gen_range(1..=vecs.len());
    let mut v = vecs.to_vec();
    v.shuffle(rng);
    v.truncate(k);
    v
}

/// Ensembles small enough for exhaustive label enumeration.
fn small_specs(max_rows: usize, max_cols: usize) -> Vec<EnsembleSpec> {
    let f = FieldSpec::GF2;
    let mut out = Vec::new();
    for l in 1..=max_rows {
        for n in 1..=max_cols {
            out.push(EnsembleSpec::all_linear(f, l, n));
            for d in 1..=l.min(2) {
                out.push(EnsembleSpec::sparse(f, l, n, d));
            }
        }
    }
    out
}

/// Exactness of the all-linear ensemble and the bound lemmas for the hash property.
pub fn hash_suite(opts: &Options) -> Result<SuiteReport> {
    let mut rng = suite_rng(opts, Suite::Hash);
    let mut exact = LemmaReport::new("all-linear-exactness");
    let mut profile = LemmaReport::new("profile-matches-pairs");
    let mut l1 = LemmaReport::new("lemma1-stacking");
    let mut l2 = LemmaReport::new("lemma2-saturation");
    let mut l3 = LemmaReport::new("lemma3-collision");
    let mut l4 = LemmaReport::new("lemma4-multi-collision");
    let mut le = LemmaReport::new("lemmaE-uniform-syndrome");

    let mut field_dims: Vec<(FieldSpec, usize, usize)> = Vec::new();
    for l in 1..=3 {
        for n in 1..=4 {
            field_dims.push((FieldSpec::GF2, l, n));
        }
    }
    let gf3 = FieldSpec::new(3)?;
    for l in 1..=2 {
        for n in 1..=2 {
            field_dims.push((gf3, l, n));
        }
    }
    for &(f, l, n) in &field_dims {
        let spec = EnsembleSpec::all_linear(f, l, n);
        let size = f.space_size(n) as usize;
        let table = pair_collisions(&spec)?;
        let target = (f.q() as f64).powi(-(l as i32));
        for i in 0..size {
            for j in 0..size {
                if i != j {
                    let p = table[i * size + j];
                    exact.check((p - target).abs() <= 1e-12, || {
                        format!("q={} l={l} n={n} pair ({i},{j}): {p} != {target}", f.q())
                    });
                }
            }
        }
        let hp = params_from_pairs(&table, size, spec.image_size());
        exact.check(hp.alpha == 1.0 && hp.beta == 0.0, || {
            format!("q={} l={l} n={n}: measured ({}, {})", f.q(), hp.alpha, hp.beta)
        });
        if f == FieldSpec::GF2 {
            for u in all_vectors(f, n)? {
                let joint = hash::lemma_e_joint(&spec, &u)?;
                let im = spec.image_size();
                le.check((joint - 1.0 / im).abs() <= 1e-12, || {
                    format!("l={l} n={n} u={:?}: joint {joint}", u.as_slice())
                });
                let mut err = None;
                for_each_label(&spec, |a, _| match hash::lemma_e_check(a, &u) {
                    Ok(v) => le.check((v - 1.0 / im).abs() <= 1e-12, || {
                        format!("l={l} n={n} u={:?}: {v}", u.as_slice())
                    }),
                    Err(e) => err = Some(e),
                })?;
                err.map_or(Ok(()), Err)?;
            }
        }
    }

    let specs = small_specs(3, 4);
    let mut params = Vec::with_capacity(specs.len());
    for spec in &specs {
        let size = spec.field.space_size(spec.cols) as usize;
        let table = pair_collisions(spec)?;
        let hp = params_from_pairs(&table, size, spec.image_size());
        let prof = hash::weight_profile(spec)?;
        let hq = hash::params_from_profile(&prof, spec.field, spec.image_size());
        profile.check((hp.alpha - hq.alpha).abs() < 1e-12 && (hp.beta - hq.beta).abs() < 1e-12, || {
            format!(
                "{} l={} n={}: pairs ({}, {}) vs profile ({}, {})",
                spec.kind.name(), spec.rows, spec.cols, hp.alpha, hp.beta, hq.alpha, hq.beta
            )
        });
        params.push((table, hp));
    }

    for _ in 0..opts.hash_instances {
        // stacking: two independent ensembles on the same domain
        let i = rng.gen_range(0..specs.len());
        let cands: Vec<usize> = (0..specs.len()).filter(|&j| specs[j].cols == specs[i].cols).collect();
        let j = *cands.choose(&mut rng).expect("i itself qualifies");
        let (s1, s2) = (&specs[i], &specs[j]);
        let size = s1.field.space_size(s1.cols) as usize;
        let prod = hash::product_params(params[i].1, params[j].1);
        let im = s1.image_size() * s2.image_size();
        let stacked: Vec<f64> = params[i].0.iter().zip(&params[j].0).map(|(a, b)| a * b).collect();
        let beta = beta_from_pairs(&stacked, size, im, prod.alpha);
        l1.check(beta <= prod.beta + LEMMA_TOL, || {
            format!("stacked l=({},{}) n={}: beta {beta} > {}", s1.rows, s2.rows, s1.cols, prod.beta)
        });

        let k = rng.gen_range(0..specs.len());
        let spec = &specs[k];
        let hp = params[k].1;
        let vecs: Vec<FieldVec> = all_vectors(spec.field, spec.cols)?.collect();
        let im = spec.image_size();
        let t = random_subset(&vecs, &mut rng);
        let sat = hash::saturation_test(spec, &t, Mode::Exact, &mut rng)?.value;
        let bound = saturation_bound(hp.alpha, hp.beta, im, t.len() as f64);
        l2.check(sat <= bound + LEMMA_TOL, || {
            format!("{} l={} n={} |T|={}: {sat} > {bound}", spec.kind.name(), spec.rows, spec.cols, t.len())
        });
        let g = random_subset(&vecs, &mut rng);
        let u = vecs.choose(&mut rng).expect("nonempty").clone();
        let crp = hash::crp_test(spec, &g, &u, Mode::Exact, &mut rng)?.value;
        let bound = crp_bound(g.len() as f64, im, hp.alpha, hp.beta);
        l3.check(crp <= bound + LEMMA_TOL, || {
            format!("{} l={} n={} |G|={}: {crp} > {bound}", spec.kind.name(), spec.rows, spec.cols, g.len())
        });
    }

    // two senders with small supports so the product ensemble stays enumerable
    let pair_specs: Vec<usize> = (0..specs.len())
        .filter(|&i| specs[i].rows <= 2 && specs[i].cols <= 3)
        .collect();
    for _ in 0..opts.hash_instances {
        let a = *pair_specs.choose(&mut rng).expect("nonempty");
        let cands: Vec<usize> = pair_specs.iter().copied().filter(|&b| specs[b].cols == specs[a].cols).collect();
        let b = *cands.choose(&mut rng).expect("a qualifies");
        let two = [specs[a].clone(), specs[b].clone()];
        let vecs: Vec<FieldVec> = all_vectors(two[0].field, two[0].cols)?.collect();
        let tuples: Vec<Vec<FieldVec>> = vecs
            .iter()
            .flat_map(|x| vecs.iter().map(move |y| vec![x.clone(), y.clone()]))
            .collect();
        let count = rng.gen_range(1..=tuples.len().min(16));
        let mut g = tuples.clone();
        g.shuffle(&mut rng);
        g.truncate(count);
        let u = tuples.choose(&mut rng).expect("nonempty").clone();
        let got = multi_crp_exact(&two, &g, &u)?;
        let maxima = conditional_maxima(&g, 2);
        let ims = [two[0].image_size(), two[1].image_size()];
        let bound = multi_crp_bound(&maxima, &ims, &[params[a].1, params[b].1])?;
        l4.check(got <= bound + LEMMA_TOL, || {
            format!("l=({},{}) n={} |G|={count}: {got} > {bound}", two[0].rows, two[1].rows, two[0].cols)
        });
    }

    Ok(SuiteReport {
        suite: Suite::Hash,
        lemmas: vec![exact, profile, l1, l2, l3, l4, le],
    })
}

// ---------------------------------------------------------------- codec

fn random_label<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<LinearLabel> {
    let f = FieldSpec::GF2;
    if rows == 0 {
        return Ok(LinearLabel::empty(f, cols));
    }
    let m: Vec<Vec<u8>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..2)).collect()).collect();
    LinearLabel::from_rows(f, &m, cols)
}

fn random_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> FieldVec {
    FieldVec::from_index(FieldSpec::GF2, n, rng.gen_range(0..1u64 << n))
}

/// Reachable syndrome most of the time, arbitrary otherwise.
fn random_syndrome<R: Rng + ?Sized>(label: &LinearLabel, rng: &mut R) -> Result<FieldVec> {
    if rng.gen_bool(0.9) {
        label.apply(&random_vec(label.cols(), rng))
    } else {
        Ok(random_vec(label.rows(), rng))
    }
}

fn random_table<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<JointTable> {
    let cells: usize = dims.iter().product();
    let mut w: Vec<f64> = (0..cells)
        .map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let s: f64 = w.iter().sum();
    JointTable::new(dims, w.into_iter().map(|x| x / s).collect())
}

fn is_empty_err(e: &Error) -> bool {
    matches!(e, Error::EmptyCoset | Error::AllCosetsEmpty(_))
}

/// Coset encoder and joint decoder against exhaustive scans, alternating.
pub fn codec_suite(opts: &Options) -> Result<SuiteReport> {
    let mut rng = suite_rng(opts, Suite::Codec);
    let mut enc = LemmaReport::new("encoder-matches-scan");
    let mut dec = LemmaReport::new("decoder-matches-scan");
    for i in 0..opts.codec_instances {
        if i % 2 == 0 {
            let n = rng.gen_range(2..=8);
            let la = rng.gen_range(0..n);
            let lm = rng.gen_range(0..=n - la);
            let a_label = random_label(la, n, &mut rng)?;
            let m_label = random_label(lm, n, &mut rng)?;
            let a = random_syndrome(&a_label, &mut rng)?;
            let m = random_syndrome(&m_label, &mut rng)?;
            let cs = CosetSpec::new(a_label, m_label, a, m)?;
            let target = if rng.gen_bool(0.5) {
                EncodeTarget::Marginal(random_pmf(2, &mut rng))
            } else {
                EncodeTarget::Conditional {
                    mu: random_cond(2, 2, &mut rng),
                    u: (0..n).map(|_| rng.gen_range(0..2)).collect(),
                }
            };
            let got = match codec::min_div_encode(&cs, &target) {
                Ok(x) => Some(x),
                Err(e) if is_empty_err(&e) => None,
                Err(e) => return Err(e),
            };
            let want = oracle::encode(&cs, &target)?;
            enc.check(got == want, || format!("instance {i} n={n}: {got:?} vs {want:?}"));
        } else {
            let k = rng.gen_range(1..=2);
            let n = rng.gen_range(2..=8);
            let side = rng.gen_bool(0.3);
            let mut dims = Vec::new();
            if side {
                dims.push(2);
            }
            dims.extend(std::iter::repeat(2).take(k));
            dims.push(3);
            let law = random_table(dims, &mut rng)?;
            let labels: Vec<LinearLabel> = (0..k)
                .map(|_| {
                    let rows = rng.gen_range(0..n);
                    random_label(rows, n, &mut rng)
                })
                .collect::<Result<_>>()?;
            let syndromes: Vec<FieldVec> = labels
                .iter()
                .map(|l| random_syndrome(l, &mut rng))
                .collect::<Result<_>>()?;
            let u: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let y: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            let p = DecodeProblem {
                labels: &labels,
                syndromes: &syndromes,
                law: &law,
                side: side.then_some(u.as_slice()),
                y: &y,
            };
            let got = match codec::min_div_decode(&p) {
                Ok(x) => Some(x),
                Err(e) if is_empty_err(&e) => None,
                Err(e) => return Err(e),
            };
            let want = oracle::decode(&p)?;
            dec.check(got == want, || format!("instance {i} n={n} k={k}: {got:?} vs {want:?}"));
        }
    }
    Ok(SuiteReport {
        suite: Suite::Codec,
        lemmas: vec![enc, dec],
    })
}

// ---------------------------------------------------------------- regions

/// Superposition law with binary `X0, X1, X2` and a random channel to a ternary output.
pub fn random_sw_law<R: Rng + ?Sized>(rng: &mut R) -> Result<JointLaw> {
    let mu0 = random_pmf(2, rng);
    let c1 = random_cond(2, 2, rng);
    let c2 = random_cond(2, 2, rng);
    let dmc = random_dmc(vec![2, 2], 3, rng);
    joint_sw(&mu0, &c1, &c2, &dmc)
}

/// A point of the superposition region (without the auxiliary conditions),
/// uniform over the region by rejection from its bounding box, with
/// coordinates on the `2^-20` grid.
pub fn sample_sw_interior<R: Rng + ?Sized>(law: &JointLaw, rng: &mut R) -> Result<[f64; 3]> {
    let cons = constraints_sw(law, false)?;
    let top = cons.iter().map(|c| c.bound).fold(0.0, f64::max);
    let cells = (top / SPLIT_QUANTUM).floor() as u64;
    if cells == 0 {
        return Err(Error::Infeasible("superposition region is empty".into()));
    }
    for _ in 0..1_000_000 {
        let r = [0; 3].map(|_| rng.gen_range(0..cells) as f64 * SPLIT_QUANTUM);
        if in_region_sw(&r, law, false)?.inside {
            return Ok(r);
        }
    }
    Err(Error::Infeasible("rejection sampling found no interior point".into()))
}

/// Closed-form checks on the region computations.
pub fn regions_suite(opts: &Options) -> Result<SuiteReport> {
    let mut rng = suite_rng(opts, Suite::Regions);
    let mut adder = LemmaReport::new("adder-mutual-information");
    let mut han = LemmaReport::new("han-identity-maps");
    let mut markov = LemmaReport::new("sw-markov-identity");
    let mut closure = LemmaReport::new("downward-closure");
    let mut split = LemmaReport::new("rate-split-inverse");

    let uni = [Pmf::uniform(2), Pmf::uniform(2)];
    let law = joint_private(&uni, &Dmc::binary_adder())?;
    let (i1, i12) = (law.cmi(&[0], &[2], &[1]), law.cmi(&[0, 1], &[2], &[]));
    adder.check((i1 - 1.0).abs() <= 1e-9 && (i12 - 1.5).abs() <= 1e-9, || {
        format!("I(X1;Y|X2)={i1}, I(X1X2;Y)={i12}")
    });
    let inside = in_region_private(&[0.5, 0.5], &law)?;
    let outside = in_region_private(&[1.0, 1.0], &law)?;
    let label = outside.witness.as_ref().map(|w| w.label.clone());
    adder.check(inside.inside && label.as_deref() == Some("J={1,2}"), || {
        format!("verdicts {} / {label:?}", inside.inside)
    });

    for _ in 0..20 {
        let mu = [random_pmf(2, &mut rng), random_pmf(2, &mut rng)];
        let dmc = random_dmc(vec![2, 2], 3, &mut rng);
        let p = joint_private(&mu, &dmc)?;
        let maps = [SymbolMap::identity(0, 2), SymbolMap::identity(1, 2)];
        let h = joint_han(&mu, &maps, &dmc)?;
        for (a, b) in constraints_private(&p).iter().zip(&constraints_han(&h)) {
            han.check(a.label == b.label && (a.bound - b.bound).abs() <= 1e-12, || {
                format!("{}: {} vs {}: {}", a.label, a.bound, b.label, b.bound)
            });
        }

        let sw = random_sw_law(&mut rng)?;
        let (a, b) = (sw.cmi(&[1, 2], &[3], &[]), sw.cmi(&[0, 1, 2], &[3], &[]));
        markov.check((a - b).abs() <= 1e-9, || format!("I(X1X2;Y)={a} vs I(X0X1X2;Y)={b}"));

        let top_p = constraints_private(&p).iter().map(|c| c.bound).fold(0.0, f64::max);
        let top_sw = constraints_sw(&sw, false)?.iter().map(|c| c.bound).fold(0.0, f64::max);
        for _ in 0..10 {
            let r: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..=top_p)).collect();
            if in_region_private(&r, &p)?.inside {
                let s: Vec<f64> = r.iter().map(|x| x * rng.gen_range(0.0..1.0)).collect();
                closure.check(in_region_private(&s, &p)?.inside, || format!("{r:?} inside but {s:?} not"));
            }
            let r: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..=top_sw)).collect();
            for aux in [false, true] {
                if in_region_sw(&r, &sw, aux)?.inside {
                    let s: Vec<f64> = r.iter().map(|x| x * rng.gen_range(0.0..1.0)).collect();
                    closure.check(in_region_sw(&s, &sw, aux)?.inside, || {
                        format!("superposition {r:?} inside but {s:?} not")
                    });
                }
            }
        }
    }

    let sw = random_sw_law(&mut rng)?;
    for _ in 0..opts.split_points {
        let rp = sample_sw_interior(&sw, &mut rng)?;
        match rate_split(&rp, &sw) {
            Ok(s) => {
                let ok = in_region_sw(&s.rates, &sw, true)?.inside && unsplit(&s) == rp;
                split.check(ok, || format!("{rp:?} -> {:?} via {:?}", s.rates, s.split));
            }
            Err(e) => split.check(false, || format!("{rp:?}: {e}")),
        }
    }

    Ok(SuiteReport {
        suite: Suite::Regions,
        lemmas: vec![adder, han, markov, closure, split],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Options {
        Options {
            types: TypesParams {
                ns: vec![4, 6],
                gammas: vec![0.05, 0.125],
            },
            hash_instances: 10,
            codec_instances: 20,
            split_points: 10,
            ..Options::default()
        }
    }

    #[test]
    fn small_suites_pass() {
        for rep in run(Suite::All, &small()).unwrap() {
            for l in &rep.lemmas {
                assert!(l.passed(), "{l}");
            }
        }
    }

    #[test]
    fn lambda_fault_is_caught() {
        let opts = Options {
            fault: Some(Fault::LambdaSign),
            ..small()
        };
        let rep = types_suite(&opts).unwrap();
        assert!(!rep.passed());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Types, Suite::Hash, Suite::Codec, Suite::Regions, Suite::All] {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Fault::parse("lambda-sign"), Some(Fault::LambdaSign));
    }
}
