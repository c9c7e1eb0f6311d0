//! Ensembles of labeling functions and their `(α, β)` hash parameters.
//!
//! Every ensemble here draws the columns of its matrix independently and is
//! invariant under column permutations and under scaling a column by a nonzero
//! field element. So the collision probability `P[Au = Au']` depends only on the
//! Hamming weight `w` of `u - u'`, and (H3) sums the same way for every `u`. Exact
//! computations work on that weight profile. Random binning is not linear but
//! has collision probability `q^-l` for every distinct pair, which fits the same
//! profile form.

use crate::error::{Error, Result};
use crate::gf::{FieldSpec, FieldVec, LinearLabel};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Largest `q^n` for exact (H3) sweeps and binning tables.
pub const EXACT_SPACE_BUDGET: f64 = (1u64 << 16) as f64;

/// Largest ensemble support that may be enumerated.
pub const SUPPORT_BUDGET: f64 = (1u64 << 24) as f64;

/// Default slope `c` of the sparse column degree `⌈c·log2(n+1)⌉`.
pub const DEFAULT_SPARSE_SLOPE: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    UniformAllLinear,
    RandomBinning,
    SparseLinear,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::UniformAllLinear => "uniform-all-linear",
            EnsembleKind::RandomBinning => "random-binning",
            EnsembleKind::SparseLinear => "sparse-linear",
        }
    }

    pub fn is_linear(self) -> bool {
        !matches!(self, EnsembleKind::RandomBinning)
    }
}

/// A distribution over labeling functions `GF(q)^n -> GF(q)^l`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub field: FieldSpec,
    pub rows: usize,
    pub cols: usize,
    /// Sparse only: fixed column degree. `None` means `⌈slope·log2(n+1)⌉` capped at `rows`.
    pub degree: Option<usize>,
    pub slope: f64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, field: FieldSpec, rows: usize, cols: usize) -> Self {
        EnsembleSpec {
            kind,
            field,
            rows,
            cols,
            degree: None,
            slope: DEFAULT_SPARSE_SLOPE,
        }
    }

    pub fn all_linear(field: FieldSpec, rows: usize, cols: usize) -> Self {
        EnsembleSpec::new(EnsembleKind::UniformAllLinear, field, rows, cols)
    }

    pub fn sparse(field: FieldSpec, rows: usize, cols: usize, degree: usize) -> Self {
        EnsembleSpec {
            degree: Some(degree),
            ..EnsembleSpec::new(EnsembleKind::SparseLinear, field, rows, cols)
        }
    }

    pub fn binning(field: FieldSpec, rows: usize, cols: usize) -> Self {
        EnsembleSpec::new(EnsembleKind::RandomBinning, field, rows, cols)
    }

    /// Same ensemble family at other dimensions.
    pub fn with_dims(&self, rows: usize, cols: usize) -> Self {
        EnsembleSpec {
            rows,
            cols,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cols == 0 {
            return Err(Error::Invalid("ensemble needs n >= 1".into()));
        }
        if self.kind == EnsembleKind::SparseLinear {
            if let Some(d) = self.degree {
                if d > self.rows {
                    return Err(Error::Invalid(format!(
                        "sparse column degree {d} exceeds row count {}",
                        self.rows
                    )));
                }
            }
            if !(self.slope > 0.0) {
                return Err(Error::Invalid("sparse slope must be positive".into()));
            }
        }
        if self.kind == EnsembleKind::RandomBinning
            && self.field.space_size(self.cols) > EXACT_SPACE_BUDGET
        {
            return Err(Error::Budget {
                needed: self.field.space_size(self.cols),
                budget: EXACT_SPACE_BUDGET,
            });
        }
        Ok(())
    }

    /// Nonzeros per column for the sparse ensemble.
    pub fn column_degree(&self) -> usize {
        match self.degree {
            Some(d) => d,
            None => {
                let d = (self.slope * ((self.cols + 1) as f64).log2()).ceil() as usize;
                d.clamp(1, self.rows.max(1)).min(self.rows)
            }
        }
    }

    pub fn image_size(&self) -> f64 {
        self.field.space_size(self.rows)
    }
}

/// A uniformly random function table `GF(q)^n -> GF(q)^l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinningTable {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    table: Vec<u64>,
}

impl BinningTable {
    pub fn apply(&self, u: &FieldVec) -> Result<FieldVec> {
        if u.len() != self.cols {
            return Err(Error::Dimension {
                what: "label input length",
                expected: self.cols,
                got: u.len(),
            });
        }
        Ok(FieldVec::from_index(
            self.field,
            self.rows,
            self.table[u.index() as usize],
        ))
    }
}

/// A sampled labeling function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Linear(LinearLabel),
    Table(BinningTable),
}

impl Label {
    pub fn apply(&self, u: &FieldVec) -> Result<FieldVec> {
        match self {
            Label::Linear(a) => a.apply(u),
            Label::Table(t) => t.apply(u),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Label::Linear(a) => a.rows(),
            Label::Table(t) => t.rows,
        }
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            Label::Linear(a) => a.field(),
            Label::Table(t) => t.field,
        }
    }

    pub fn image_size(&self) -> f64 {
        self.field().space_size(self.rows())
    }

    pub fn as_linear(&self) -> Option<&LinearLabel> {
        match self {
            Label::Linear(a) => Some(a),
            Label::Table(_) => None,
        }
    }
}

/// Draws one label from the ensemble.
pub fn sample<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<Label> {
    spec.validate()?;
    let (f, l, n) = (spec.field, spec.rows, spec.cols);
    let q = f.q();
    Ok(match spec.kind {
        EnsembleKind::UniformAllLinear => {
            let data = (0..l * n).map(|_| rng.gen_range(0..q)).collect();
            Label::Linear(LinearLabel::from_dense(f, l, n, data))
        }
        EnsembleKind::SparseLinear => {
            let d = spec.column_degree();
            let mut entries = Vec::with_capacity(d * n);
            for c in 0..n {
                for r in sample_indices(rng, l, d) {
                    entries.push((r, c, rng.gen_range(1..q)));
                }
            }
            Label::Linear(LinearLabel::from_sparse(f, l, n, &entries)?)
        }
        EnsembleKind::RandomBinning => {
            let bins = f.space_size(l) as u64;
            let size = f.space_size(n) as usize;
            Label::Table(BinningTable {
                field: f,
                rows: l,
                cols: n,
                table: (0..size).map(|_| rng.gen_range(0..bins)).collect(),
            })
        }
    })
}

/// Draws a linear label; random binning is rejected.
pub fn sample_linear<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<LinearLabel> {
    match sample(spec, rng)? {
        Label::Linear(a) => Ok(a),
        Label::Table(_) => Err(Error::Invalid(
            "random binning is not linear and cannot define cosets".into(),
        )),
    }
}

/// Visits every label in the ensemble support with its probability.
pub fn for_each_label(spec: &EnsembleSpec, mut visit: impl FnMut(&Label, f64)) -> Result<()> {
    spec.validate()?;
    let (f, l, n) = (spec.field, spec.rows, spec.cols);
    match spec.kind {
        EnsembleKind::UniformAllLinear => {
            let total = f.space_size(l * n);
            check_support(total)?;
            let p = 1.0 / total;
            for i in 0..total as u64 {
                let data = FieldVec::from_index(f, l * n, i).into_inner();
                visit(&Label::Linear(LinearLabel::from_dense(f, l, n, data)), p);
            }
        }
        EnsembleKind::SparseLinear => {
            let columns = weight_vectors(f, l, spec.column_degree());
            let m = columns.len() as f64;
            let total = m.powi(n as i32);
            check_support(total)?;
            let p = 1.0 / total;
            let mut choice = vec![0usize; n];
            for _ in 0..total as u64 {
                let mut data = vec![0u8; l * n];
                for (c, &k) in choice.iter().enumerate() {
                    for r in 0..l {
                        data[r * n + c] = columns[k][r];
                    }
                }
                visit(&Label::Linear(LinearLabel::from_dense(f, l, n, data)), p);
                odometer(&mut choice, columns.len());
            }
        }
        EnsembleKind::RandomBinning => {
            let bins = f.space_size(l);
            let inputs = f.space_size(n);
            let total = bins.powf(inputs);
            check_support(total)?;
            let p = 1.0 / total;
            let mut table = vec![0u64; inputs as usize];
            for _ in 0..total as u64 {
                let label = Label::Table(BinningTable {
                    field: f,
                    rows: l,
                    cols: n,
                    table: table.clone(),
                });
                visit(&label, p);
                for slot in table.iter_mut().rev() {
                    *slot += 1;
                    if (*slot as f64) < bins {
                        break;
                    }
                    *slot = 0;
                }
            }
        }
    }
    Ok(())
}

fn check_support(total: f64) -> Result<()> {
    if total > SUPPORT_BUDGET {
        return Err(Error::Budget {
            needed: total,
            budget: SUPPORT_BUDGET,
        });
    }
    Ok(())
}

fn odometer(digits: &mut [usize], base: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return;
        }
        *d = 0;
    }
}

/// All vectors of `GF(q)^l` with exactly `d` nonzeros.
fn weight_vectors(f: FieldSpec, l: usize, d: usize) -> Vec<Vec<u8>> {
    let total = f.space_size(l) as u64;
    (0..total)
        .map(|i| FieldVec::from_index(f, l, i))
        .filter(|v| v.weight() == d)
        .map(FieldVec::into_inner)
        .collect()
}

/// Whether a probability is exact or a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Provenance {
    Exact,
    /// 95% normal-approximation half-width.
    Estimated { half_width: f64 },
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Estimated { .. } => "estimated",
        }
    }

    pub fn half_width(self) -> f64 {
        match self {
            Provenance::Exact => 0.0,
            Provenance::Estimated { half_width } => half_width,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub provenance: Provenance,
}

/// 95% normal-approximation half-width of a Bernoulli mean.
pub fn ci_half_width(p: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::INFINITY;
    }
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo(u64),
}

/// `P[Au = Au']` over the ensemble, `u != u'`.
pub fn collision_prob<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    u: &FieldVec,
    u2: &FieldVec,
    mode: Mode,
    rng: &mut R,
) -> Result<Estimate> {
    spec.validate()?;
    for v in [u, u2] {
        if v.len() != spec.cols {
            return Err(Error::Dimension {
                what: "collision vector length",
                expected: spec.cols,
                got: v.len(),
            });
        }
    }
    if u == u2 {
        return Err(Error::Invalid(
            "collision probability of a vector with itself is trivially 1".into(),
        ));
    }
    match mode {
        Mode::Exact => {
            let w = u.sub(u2)?.weight();
            let profile = weight_profile(spec)?;
            Ok(Estimate {
                value: profile[w],
                provenance: Provenance::Exact,
            })
        }
        Mode::MonteCarlo(trials) => {
            let mut hits = 0u64;
            for _ in 0..trials {
                let a = sample(spec, rng)?;
                if a.apply(u)? == a.apply(u2)? {
                    hits += 1;
                }
            }
            let p = hits as f64 / trials as f64;
            Ok(Estimate {
                value: p,
                provenance: Provenance::Estimated {
                    half_width: ci_half_width(p, trials),
                },
            })
        }
    }
}

/// `p_w = P[A d = 0]` for `d` of weight `w`, `w = 0..=n`.
///
/// Computed by convolving the column law over `GF(q)^l`, so it needs `q^l ≤ 2^16`.
pub fn weight_profile(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let (f, l, n) = (spec.field, spec.rows, spec.cols);
    let im = f.space_size(l);
    match spec.kind {
        EnsembleKind::UniformAllLinear | EnsembleKind::RandomBinning => {
            let mut p = vec![1.0 / im; n + 1];
            p[0] = 1.0;
            Ok(p)
        }
        EnsembleKind::SparseLinear => {
            if im > EXACT_SPACE_BUDGET {
                return Err(Error::Budget {
                    needed: im,
                    budget: EXACT_SPACE_BUDGET,
                });
            }
            let cols: Vec<u64> = weight_vectors(f, l, spec.column_degree())
                .into_iter()
                .map(|v| FieldVec::new(f, v).expect("in range").index())
                .collect();
            let size = im as usize;
            let step = 1.0 / cols.len() as f64;
            let mut dist = vec![0.0; size];
            dist[0] = 1.0;
            let mut out = vec![1.0];
            for _ in 1..=n {
                let mut next = vec![0.0; size];
                for (s, &ps) in dist.iter().enumerate() {
                    if ps == 0.0 {
                        continue;
                    }
                    let sv = FieldVec::from_index(f, l, s as u64);
                    for &c in &cols {
                        let t = sv.add(&FieldVec::from_index(f, l, c)).expect("same length");
                        next[t.index() as usize] += ps * step;
                    }
                }
                dist = next;
                out.push(dist[0]);
            }
            Ok(out)
        }
    }
}

/// `(α, β)` hash parameters at one block length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HashParams {
    pub alpha: f64,
    pub beta: f64,
    pub provenance: Provenance,
}

impl HashParams {
    pub const TWO_UNIVERSAL: HashParams = HashParams {
        alpha: 1.0,
        beta: 0.0,
        provenance: Provenance::Exact,
    };

    pub fn exact(alpha: f64, beta: f64) -> Self {
        HashParams {
            alpha,
            beta,
            provenance: Provenance::Exact,
        }
    }
}

/// The α grid `{1, 1.05, …, 4}`.
pub fn alpha_grid() -> Vec<f64> {
    (0..=60).map(|i| 1.0 + 0.05 * i as f64).collect()
}

/// Smallest β making (H3) hold at `alpha`, from a weight profile.
///
/// (H3) sums `p_w` over the `C(n,w)(q-1)^w` vectors `u'` at distance `w` whose
/// collision probability exceeds `α/|Im A|`.
pub fn beta_for_alpha(profile: &[f64], field: FieldSpec, im_size: f64, alpha: f64) -> f64 {
    let n = profile.len() - 1;
    let threshold = alpha / im_size;
    (1..=n)
        .filter(|&w| profile[w] > threshold * (1.0 + 1e-12))
        .map(|w| shell_size(field, n, w) * profile[w])
        .fold(0.0, |a, b| a + b)
}

/// Number of vectors at Hamming distance `w` from a fixed vector.
pub fn shell_size(field: FieldSpec, n: usize, w: usize) -> f64 {
    binomial(n, w) * ((field.q() - 1) as f64).powi(w as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The `(α, β)` pair on the α grid minimizing `α + β`; ties keep the smaller α.
pub fn params_from_profile(profile: &[f64], field: FieldSpec, im_size: f64) -> HashParams {
    let mut best = HashParams::exact(f64::INFINITY, f64::INFINITY);
    for alpha in alpha_grid() {
        let beta = beta_for_alpha(profile, field, im_size, alpha);
        if alpha + beta < best.alpha + best.beta - 1e-12 {
            best = HashParams::exact(alpha, beta);
        }
    }
    best
}

/// Measures `(α, β)` for the ensemble at its block length.
pub fn estimate_hash_params<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    mode: Mode,
    rng: &mut R,
) -> Result<HashParams> {
    spec.validate()?;
    let (f, n) = (spec.field, spec.cols);
    match mode {
        Mode::Exact => {
            let space = f.space_size(n);
            if space > EXACT_SPACE_BUDGET {
                return Err(Error::Budget {
                    needed: space,
                    budget: EXACT_SPACE_BUDGET,
                });
            }
            if spec.kind != EnsembleKind::SparseLinear {
                return Ok(HashParams::TWO_UNIVERSAL);
            }
            Ok(params_from_profile(
                &weight_profile(spec)?,
                f,
                spec.image_size(),
            ))
        }
        Mode::MonteCarlo(trials) => {
            // one representative difference vector per weight class
            let reps: Vec<FieldVec> = (0..=n)
                .map(|w| {
                    let e: Vec<u8> = (0..n).map(|i| u8::from(i < w)).collect();
                    FieldVec::new(f, e).expect("binary entries")
                })
                .collect();
            let zero = FieldVec::zeros(f, n);
            let mut hits = vec![0u64; n + 1];
            for _ in 0..trials {
                let a = sample(spec, rng)?;
                let a0 = a.apply(&zero)?;
                for w in 1..=n {
                    if a.apply(&reps[w])? == a0 {
                        hits[w] += 1;
                    }
                }
            }
            let mut profile: Vec<f64> = hits.iter().map(|&h| h as f64 / trials as f64).collect();
            profile[0] = 1.0;
            let mut p = params_from_profile(&profile, f, spec.image_size());
            let threshold = p.alpha / spec.image_size();
            let hw: f64 = (1..=n)
                .filter(|&w| profile[w] > threshold)
                .map(|w| shell_size(f, n, w) * ci_half_width(profile[w], trials))
                .fold(0.0, |a, b| a + b);
            p.provenance = Provenance::Estimated { half_width: hw };
            Ok(p)
        }
    }
}

/// Parameters of the stacked ensemble `(A, A')` with independent components.
pub fn product_params(p1: HashParams, p2: HashParams) -> HashParams {
    HashParams {
        alpha: p1.alpha * p2.alpha,
        beta: p1.beta + p2.beta,
        provenance: merge_provenance(p1.provenance, p2.provenance),
    }
}

fn merge_provenance(a: Provenance, b: Provenance) -> Provenance {
    match (a, b) {
        (Provenance::Exact, Provenance::Exact) => Provenance::Exact,
        _ => Provenance::Estimated {
            half_width: a.half_width() + b.half_width(),
        },
    }
}

/// `(Π_{j∈J} α_j, Π_{j∈J}(1+β_j) - 1)`.
pub fn multi_params(params: &[HashParams], subset: &[usize]) -> Result<HashParams> {
    if subset.is_empty() {
        return Err(Error::Invalid("index subset J must be nonempty".into()));
    }
    if let [j] = subset {
        return params.get(*j).copied().ok_or(Error::Dimension {
            what: "subset index",
            expected: params.len(),
            got: *j,
        });
    }
    let mut alpha = 1.0;
    let mut beta1 = 1.0;
    let mut prov = Provenance::Exact;
    for &j in subset {
        let p = params.get(j).ok_or(Error::Dimension {
            what: "subset index",
            expected: params.len(),
            got: j,
        })?;
        alpha *= p.alpha;
        beta1 *= 1.0 + p.beta;
        prov = merge_provenance(prov, p.provenance);
    }
    Ok(HashParams {
        alpha,
        beta: beta1 - 1.0,
        provenance: prov,
    })
}

/// Saturation bound `α - 1 + |Im A|(β+1)/|T|`.
pub fn saturation_bound(alpha: f64, beta: f64, im_size: f64, t_size: f64) -> f64 {
    alpha - 1.0 + im_size * (beta + 1.0) / t_size
}

/// Collision-resistance bound `|G|α/|Im A| + β`.
pub fn crp_bound(g_size: f64, im_size: f64, alpha: f64, beta: f64) -> f64 {
    g_size * alpha / im_size + beta
}

/// `P_{A,a}[T ∩ C_A(a) = ∅]` with `a` uniform on `Im A`.
pub fn saturation_test<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    t: &[FieldVec],
    mode: Mode,
    rng: &mut R,
) -> Result<Estimate> {
    if t.is_empty() {
        return Err(Error::Invalid("saturation set T must be nonempty".into()));
    }
    let im = spec.image_size();
    let empty_fraction = |a: &Label| -> Result<f64> {
        let labels: HashSet<FieldVec> = t.iter().map(|u| a.apply(u)).collect::<Result<_>>()?;
        Ok((im - labels.len() as f64) / im)
    };
    match mode {
        Mode::Exact => {
            let mut acc = 0.0;
            let mut err = None;
            for_each_label(spec, |a, p| match empty_fraction(a) {
                Ok(x) => acc += p * x,
                Err(e) => err = Some(e),
            })?;
            err.map_or(Ok(()), Err)?;
            Ok(Estimate {
                value: acc,
                provenance: Provenance::Exact,
            })
        }
        Mode::MonteCarlo(trials) => {
            let mut hits = 0u64;
            for _ in 0..trials {
                let a = sample(spec, rng)?;
                let c = FieldVec::from_index(spec.field, spec.rows, rng.gen_range(0..im as u64));
                let mut hit = false;
                for u in t {
                    if a.apply(u)? == c {
                        hit = true;
                        break;
                    }
                }
                if !hit {
                    hits += 1;
                }
            }
            let p = hits as f64 / trials as f64;
            Ok(Estimate {
                value: p,
                provenance: Provenance::Estimated {
                    half_width: ci_half_width(p, trials),
                },
            })
        }
    }
}

/// `P_A[(G \ {u}) ∩ C_A(Au) ≠ ∅]`.
pub fn crp_test<R: Rng + ?Sized>(
    spec: &EnsembleSpec,
    g: &[FieldVec],
    u: &FieldVec,
    mode: Mode,
    rng: &mut R,
) -> Result<Estimate> {
    let others: Vec<&FieldVec> = g.iter().filter(|v| *v != u).collect();
    let collides = |a: &Label| -> Result<bool> {
        let au = a.apply(u)?;
        for v in &others {
            if a.apply(v)? == au {
                return Ok(true);
            }
        }
        Ok(false)
    };
    match mode {
        Mode::Exact => {
            let mut acc = 0.0;
            let mut err = None;
            for_each_label(spec, |a, p| match collides(a) {
                Ok(true) => acc += p,
                Ok(false) => {}
                Err(e) => err = Some(e),
            })?;
            err.map_or(Ok(()), Err)?;
            Ok(Estimate {
                value: acc,
                provenance: Provenance::Exact,
            })
        }
        Mode::MonteCarlo(trials) => {
            let mut hits = 0u64;
            for _ in 0..trials {
                if collides(&sample(spec, rng)?)? {
                    hits += 1;
                }
            }
            let p = hits as f64 / trials as f64;
            Ok(Estimate {
                value: p,
                provenance: Provenance::Estimated {
                    half_width: ci_half_width(p, trials),
                },
            })
        }
    }
}

/// Subsets of `0..k` as bitmasks, nonempty, in increasing mask order.
pub fn nonempty_subsets(k: usize) -> impl Iterator<Item = u32> {
    1..(1u32 << k)
}

/// Members of a bitmask subset.
pub fn subset_members(mask: u32, k: usize) -> Vec<usize> {
    (0..k).filter(|&j| mask & (1 << j) != 0).collect()
}

/// The conditional maxima `|G_{J|J^c}|`: `|G|` for `J = K`, otherwise the
/// largest number of `J`-parts sharing one `J^c`-part. Indexed by bitmask.
pub fn conditional_maxima(g: &[Vec<FieldVec>], k: usize) -> Vec<usize> {
    let full = (1u32 << k) - 1;
    let mut out = vec![0usize; 1 << k];
    let distinct: HashSet<&Vec<FieldVec>> = g.iter().collect();
    for mask in nonempty_subsets(k) {
        if mask == full {
            out[mask as usize] = distinct.len();
            continue;
        }
        let mut groups: std::collections::HashMap<Vec<&FieldVec>, HashSet<Vec<&FieldVec>>> =
            std::collections::HashMap::new();
        for t in &distinct {
            let key: Vec<&FieldVec> = (0..k).filter(|j| mask & (1 << j) == 0).map(|j| &t[j]).collect();
            let part: Vec<&FieldVec> = (0..k).filter(|j| mask & (1 << j) != 0).map(|j| &t[j]).collect();
            groups.entry(key).or_default().insert(part);
        }
        out[mask as usize] = groups.values().map(HashSet::len).max().unwrap_or(0);
    }
    out
}

/// Multi-domain collision bound
/// `Σ_{J≠∅} |G_{J|J^c}| α_J (β_{J^c}+1) / Π_{j∈J}|Im A_j| + β_K`.
///
/// `maxima` is indexed by subset bitmask as returned by [`conditional_maxima`].
pub fn multi_crp_bound(maxima: &[usize], im_sizes: &[f64], params: &[HashParams]) -> Result<f64> {
    let k = params.len();
    if im_sizes.len() != k || maxima.len() != 1 << k {
        return Err(Error::Dimension {
            what: "multi-domain bound inputs",
            expected: k,
            got: im_sizes.len(),
        });
    }
    let full = (1u32 << k) - 1;
    let beta_of = |mask: u32| -> f64 {
        if mask == 0 {
            return 0.0;
        }
        multi_params(params, &subset_members(mask, k))
            .map(|p| p.beta)
            .unwrap_or(0.0)
    };
    let mut total = 0.0;
    for mask in nonempty_subsets(k) {
        let members = subset_members(mask, k);
        let alpha_j = multi_params(params, &members)?.alpha;
        let im: f64 = members.iter().map(|&j| im_sizes[j]).product();
        total += maxima[mask as usize] as f64 * alpha_j * (beta_of(full & !mask) + 1.0) / im;
    }
    Ok(total + beta_of(full))
}

/// `P_{A_K}[(G \ {u_K}) ∩ C_{A_K}(A_K u_K) ≠ ∅]` with independent per-sender ensembles,
/// computed exactly over the product support.
pub fn multi_crp_exact(
    specs: &[EnsembleSpec],
    g: &[Vec<FieldVec>],
    u: &[FieldVec],
) -> Result<f64> {
    let k = specs.len();
    let mut supports: Vec<Vec<(Label, f64)>> = Vec::with_capacity(k);
    let mut total = 1.0;
    for s in specs {
        let mut v = Vec::new();
        for_each_label(s, |a, p| v.push((a.clone(), p)))?;
        total *= v.len() as f64;
        supports.push(v);
    }
    check_support(total)?;
    let others: Vec<&Vec<FieldVec>> = g.iter().filter(|t| t.as_slice() != u).collect();
    // precompute per sender and label: does member j of each candidate share u_j's bin
    let mut same: Vec<Vec<Vec<bool>>> = Vec::with_capacity(k);
    for j in 0..k {
        let mut per_label = Vec::with_capacity(supports[j].len());
        for (a, _) in &supports[j] {
            let au = a.apply(&u[j])?;
            let row: Vec<bool> = others
                .iter()
                .map(|t| a.apply(&t[j]).map(|x| x == au))
                .collect::<Result<_>>()?;
            per_label.push(row);
        }
        same.push(per_label);
    }
    let mut choice = vec![0usize; k];
    let mut acc = 0.0;
    for _ in 0..total as u64 {
        let hit = (0..others.len()).any(|c| (0..k).all(|j| same[j][choice[j]][c]));
        if hit {
            acc += (0..k).map(|j| supports[j][choice[j]].1).product::<f64>();
        }
        for j in (0..k).rev() {
            choice[j] += 1;
            if choice[j] < supports[j].len() {
                break;
            }
            choice[j] = 0;
        }
    }
    Ok(acc)
}

/// Threshold below which `β_K n^{ξ/k}` counts as negligible.
pub const KAPPA_NEGLIGIBLE: f64 = 1e-6;

/// The `κ(n)` growth sequence: `n^{ξ/k}` when `β_K n^{ξ/k}` is negligible, else
/// `β_K^{-1/(k+1)}`.
pub fn kappa_sequence(beta_k: f64, n: usize, k: usize, xi: f64) -> f64 {
    let grow = (n as f64).powf(xi / k as f64);
    if beta_k * grow <= KAPPA_NEGLIGIBLE {
        grow
    } else {
        beta_k.powf(-1.0 / (k as f64 + 1.0))
    }
}

/// `E_a[χ(Au = a)]` with `a` uniform on `Im A`, summed over all `a`.
pub fn lemma_e_check(a: &Label, u: &FieldVec) -> Result<f64> {
    let au = a.apply(u)?;
    let im = a.image_size();
    let mut acc = 0.0;
    for i in 0..im as u64 {
        if FieldVec::from_index(a.field(), a.rows(), i) == au {
            acc += 1.0 / im;
        }
    }
    Ok(acc)
}

/// `E_{A,a}[χ(Au = a)]` over the whole ensemble support.
pub fn lemma_e_joint(spec: &EnsembleSpec, u: &FieldVec) -> Result<f64> {
    let mut acc = 0.0;
    let mut err = None;
    for_each_label(spec, |a, p| match lemma_e_check(a, u) {
        Ok(x) => acc += p * x,
        Err(e) => err = Some(e),
    })?;
    err.map_or(Ok(acc), Err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::all_vectors;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gf2() -> FieldSpec {
        FieldSpec::GF2
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn all_linear_is_uniform() {
        let spec = EnsembleSpec::all_linear(gf2(), 2, 3);
        let mut r = rng();
        let trials = 200_000u64;
        let mut counts = vec![0u64; 64];
        for _ in 0..trials {
            let a = sample_linear(&spec, &mut r).unwrap();
            let idx = a.to_dense().iter().fold(0usize, |acc, &e| acc * 2 + e as usize);
            counts[idx] += 1;
        }
        let expect = trials as f64 / 64.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expect).powi(2) / expect)
            .sum();
        // 63 degrees of freedom, 99.9% quantile ≈ 103.4
        assert!(chi2 < 103.4, "chi2 = {chi2}");
    }

    #[test]
    fn sparse_columns_have_fixed_degree() {
        let spec = EnsembleSpec::sparse(gf2(), 3, 6, 1);
        let a = sample_linear(&spec, &mut rng()).unwrap();
        assert!(a.is_sparse());
        assert_eq!(a.column_weights(), vec![1; 6]);
        let spec5 = EnsembleSpec::sparse(FieldSpec::new(5).unwrap(), 4, 5, 2);
        assert_eq!(sample_linear(&spec5, &mut rng()).unwrap().column_weights(), vec![2; 5]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec::all_linear(gf2(), 3, 5);
        let a = sample(&spec, &mut rng()).unwrap();
        let b = sample(&spec, &mut rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn collision_prob_examples() {
        let spec = EnsembleSpec::all_linear(gf2(), 2, 3);
        let vs: Vec<FieldVec> = all_vectors(gf2(), 3).unwrap().collect();
        for u in &vs {
            for v in &vs {
                if u == v {
                    continue;
                }
                let e = collision_prob(&spec, u, v, Mode::Exact, &mut rng()).unwrap();
                // oracle: full enumeration of the 64 matrices
                let mut hits = 0;
                for_each_label(&spec, |a, _| {
                    if a.apply(u).unwrap() == a.apply(v).unwrap() {
                        hits += 1;
                    }
                })
                .unwrap();
                assert_eq!(hits, 16);
                assert_eq!(e.value, 0.25);
            }
        }
        let bin = EnsembleSpec::binning(gf2(), 1, 3);
        let e = collision_prob(&bin, &vs[0], &vs[5], Mode::Exact, &mut rng()).unwrap();
        assert_eq!(e.value, 0.5);
        assert!(collision_prob(&spec, &vs[1], &vs[1], Mode::Exact, &mut rng()).is_err());
    }

    #[test]
    fn sparse_collision_matches_support_enumeration() {
        let spec = EnsembleSpec::sparse(gf2(), 2, 2, 1);
        let u = FieldVec::new(gf2(), vec![1, 0]).unwrap();
        let v = FieldVec::new(gf2(), vec![0, 1]).unwrap();
        let mut oracle = 0.0;
        for_each_label(&spec, |a, p| {
            if a.apply(&u).unwrap() == a.apply(&v).unwrap() {
                oracle += p;
            }
        })
        .unwrap();
        assert_eq!(oracle, 0.5);
        let exact = collision_prob(&spec, &u, &v, Mode::Exact, &mut rng()).unwrap();
        assert!((exact.value - oracle).abs() < 1e-12);
        let mc = collision_prob(&spec, &u, &v, Mode::MonteCarlo(20_000), &mut rng()).unwrap();
        let hw = mc.provenance.half_width();
        assert!(hw > 0.0);
        assert!((mc.value - oracle).abs() <= 1.5 * hw, "{mc:?}");
    }

    #[test]
    fn hash_params_examples() {
        let mut r = rng();
        let lin = EnsembleSpec::all_linear(gf2(), 2, 6);
        assert_eq!(estimate_hash_params(&lin, Mode::Exact, &mut r).unwrap(), HashParams::TWO_UNIVERSAL);
        let bin = EnsembleSpec::binning(gf2(), 2, 6);
        assert_eq!(estimate_hash_params(&bin, Mode::Exact, &mut r).unwrap(), HashParams::TWO_UNIVERSAL);
        // sparse d=1, l=2, n=4: weight-2 and weight-4 differences collide w.p. 1/2
        let sp = EnsembleSpec::sparse(gf2(), 2, 4, 1);
        let prof = weight_profile(&sp).unwrap();
        assert_eq!(prof, vec![1.0, 0.0, 0.5, 0.0, 0.5]);
        assert_eq!(beta_for_alpha(&prof, gf2(), 4.0, 1.0), 3.5);
        let p = estimate_hash_params(&sp, Mode::Exact, &mut r).unwrap();
        assert_eq!((p.alpha, p.beta), (2.0, 0.0));
    }

    #[test]
    fn params_algebra() {
        let one = HashParams::TWO_UNIVERSAL;
        assert_eq!(product_params(one, one), one);
        let p = product_params(HashParams::exact(1.2, 0.01), HashParams::exact(1.1, 0.02));
        assert!((p.alpha - 1.32).abs() < 1e-12 && (p.beta - 0.03).abs() < 1e-12);
        let q = HashParams::exact(1.3, 0.2);
        assert_eq!(product_params(q, one), q);
        let b = HashParams::exact(1.0, 0.1);
        let m = multi_params(&[b, b], &[0, 1]).unwrap();
        assert!((m.beta - 0.21).abs() < 1e-12);
        assert_eq!(multi_params(&[one, one, one], &[0, 2]).unwrap(), one);
        assert_eq!(multi_params(&[q, b], &[0]).unwrap(), q);
        assert!(multi_params(&[q], &[]).is_err());
    }

    #[test]
    fn bound_formulas() {
        assert_eq!(saturation_bound(1.0, 0.0, 4.0, 16.0), 0.25);
        assert_eq!(crp_bound(2.0, 8.0, 1.0, 0.0), 0.25);
        // maxima indexed by mask: {1}->2, {2}->2, {1,2}->|G|=4
        let one = HashParams::TWO_UNIVERSAL;
        let b = multi_crp_bound(&[0, 2, 2, 4], &[8.0, 8.0], &[one, one]).unwrap();
        let oracle = 2.0 / 8.0 + 2.0 / 8.0 + 4.0 / 64.0;
        assert!((b - oracle).abs() < 1e-15);
        assert_eq!(b, 0.5625);
        // k = 1 reduces to the single-domain bound
        let p = HashParams::exact(1.2, 0.05);
        let single = multi_crp_bound(&[0, 3], &[16.0], &[p]).unwrap();
        assert!((single - crp_bound(3.0, 16.0, 1.2, 0.05)).abs() < 1e-15);
    }

    #[test]
    fn saturation_and_crp_exact() {
        let spec = EnsembleSpec::all_linear(gf2(), 2, 4);
        let all: Vec<FieldVec> = all_vectors(gf2(), 4).unwrap().collect();
        // with T everything, a coset is empty exactly when a lies outside the
        // image, which happens for rank-deficient matrices
        let e = saturation_test(&spec, &all, Mode::Exact, &mut rng()).unwrap();
        let mut oracle = 0.0;
        for_each_label(&spec, |a, p| {
            let r = a.as_linear().unwrap().rank() as i32;
            oracle += p * (1.0 - 2f64.powi(r) / 4.0);
        })
        .unwrap();
        assert!((e.value - oracle).abs() < 1e-12);
        assert!(e.value <= saturation_bound(1.0, 0.0, 4.0, 16.0));
        let t: Vec<FieldVec> = all
            .iter()
            .filter(|v| crate::types::seq_entropy(&v.symbols(), 2).unwrap() >= 0.8)
            .cloned()
            .collect();
        let s = saturation_test(&spec, &t, Mode::Exact, &mut rng()).unwrap();
        assert!(s.value <= saturation_bound(1.0, 0.0, 4.0, t.len() as f64));
        let spec3 = EnsembleSpec::all_linear(gf2(), 3, 4);
        let g = vec![all[3].clone(), all[9].clone()];
        let c = crp_test(&spec3, &g, &all[3], Mode::Exact, &mut rng()).unwrap();
        assert!((c.value - 0.125).abs() < 1e-12);
        let single = crp_test(&spec3, &g[..1], &all[3], Mode::Exact, &mut rng()).unwrap();
        assert_eq!(single.value, 0.0);
    }

    #[test]
    fn conditional_maxima_small() {
        let v = |e: &[u8]| FieldVec::new(gf2(), e.to_vec()).unwrap();
        let g = vec![
            vec![v(&[0]), v(&[0])],
            vec![v(&[1]), v(&[0])],
            vec![v(&[0]), v(&[1])],
        ];
        let m = conditional_maxima(&g, 2);
        assert_eq!(m[0b01], 2); // J = {first}: x2 = 0 has two partners
        assert_eq!(m[0b10], 2);
        assert_eq!(m[0b11], 3);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_sequence(0.0, 16, 2, 1.0), 4.0);
        assert!((kappa_sequence(1e-3, 16, 2, 1.0) - 10.0).abs() < 1e-9);
        let mut prev = 0.0;
        for n in 1..50 {
            let k = kappa_sequence(0.0, n, 2, 1.0);
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn lemma_e_examples() {
        let spec = EnsembleSpec::all_linear(gf2(), 2, 3);
        let u = FieldVec::new(gf2(), vec![1, 0, 1]).unwrap();
        let a = sample(&spec, &mut rng()).unwrap();
        assert_eq!(lemma_e_check(&a, &u).unwrap(), 0.25);
        assert!((lemma_e_joint(&spec, &u).unwrap() - 0.25).abs() < 1e-12);
        let empty = sample(&EnsembleSpec::all_linear(gf2(), 0, 3), &mut rng()).unwrap();
        assert_eq!(lemma_e_check(&empty, &u).unwrap(), 1.0);
    }
}
