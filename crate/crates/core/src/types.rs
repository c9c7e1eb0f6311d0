//! Method of types over small finite alphabets.
//!
//! Alphabets are `0..size`. Joint alphabets are flattened in mixed radix with
//! the first variable most significant. All quantities are in bits.
//!
//! Infinite divergence is `f64::INFINITY`, which orders above every finite value
//! under `f64::total_cmp`, so argmin searches stay total.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Tolerance on `sum(probs) == 1`.
pub const PMF_TOLERANCE: f64 = 1e-12;

/// Largest number of types `enumerate_types` will produce.
pub const TYPE_BUDGET: f64 = (1u64 << 24) as f64;

/// A probability mass function on `0..len`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Vec<f64> {
        p.probs
    }
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidPmf(format!("entry {p} is not a probability")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::InvalidPmf(format!("entries sum to {s}")));
        }
        Ok(Pmf { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if !(s > 0.0) || w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidPmf("weights must be nonnegative with positive sum".into()));
        }
        Ok(Pmf {
            probs: w.iter().map(|x| x / s).collect(),
        })
    }

    pub fn uniform(size: usize) -> Self {
        Pmf {
            probs: vec![1.0 / size as f64; size],
        }
    }

    /// Point mass at `symbol`.
    pub fn point(size: usize, symbol: usize) -> Self {
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Pmf { probs }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn p(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.probs[i] > 0.0).collect()
    }
}

/// A channel-like kernel `p(out | in)`. Rows may be absent for empirical kernels
/// whose conditioning symbol never occurred.
#[derive(Clone, Debug, PartialEq)]
pub struct CondPmf {
    out_size: usize,
    rows: Vec<Option<Pmf>>,
}

impl CondPmf {
    /// Kernel with every row present.
    pub fn new(rows: Vec<Pmf>) -> Result<Self> {
        let out_size = rows.first().map(Pmf::len).ok_or_else(|| {
            Error::InvalidPmf("conditional distribution needs at least one row".into())
        })?;
        for r in &rows {
            if r.len() != out_size {
                return Err(Error::Dimension {
                    what: "conditional row length",
                    expected: out_size,
                    got: r.len(),
                });
            }
        }
        Ok(CondPmf {
            out_size,
            rows: rows.into_iter().map(Some).collect(),
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        CondPmf::new(rows.into_iter().map(Pmf::new).collect::<Result<_>>()?)
    }

    /// The same row for every input: `p(out|in) = p(out)`.
    pub fn constant(in_size: usize, p: &Pmf) -> Self {
        CondPmf {
            out_size: p.len(),
            rows: vec![Some(p.clone()); in_size],
        }
    }

    #[inline]
    pub fn in_size(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn out_size(&self) -> usize {
        self.out_size
    }

    /// Row for input `v`, `None` when absent.
    pub fn row(&self, v: usize) -> Option<&Pmf> {
        self.rows[v].as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(Option::is_some)
    }

    /// `p(out|in)`, zero for absent rows.
    pub fn p(&self, out: usize, input: usize) -> f64 {
        self.rows[input].as_ref().map_or(0.0, |r| r.p(out))
    }
}

/// Counts of each symbol in a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmpiricalType {
    counts: Vec<u32>,
    n: u32,
}

impl EmpiricalType {
    pub fn from_counts(counts: Vec<u32>) -> Self {
        let n = counts.iter().sum();
        EmpiricalType { counts, n }
    }

    #[inline]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn freqs(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn to_pmf(&self) -> Pmf {
        Pmf {
            probs: self.freqs(),
        }
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_counts(&self.counts, self.n)
    }
}

fn entropy_of_counts(counts: &[u32], n: u32) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .fold(0.0, |a, b| a + b)
}

fn check_symbols(seq: &[usize], size: usize) -> Result<()> {
    if let Some(&s) = seq.iter().find(|&&s| s >= size) {
        return Err(Error::SymbolOutOfRange { symbol: s, size });
    }
    Ok(())
}

fn check_same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension {
            what: "sequence length",
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// Type of `u` over `0..size`.
pub fn empirical(u: &[usize], size: usize) -> Result<EmpiricalType> {
    if u.is_empty() {
        return Err(Error::Invalid("empty sequence".into()));
    }
    check_symbols(u, size)?;
    let mut counts = vec![0u32; size];
    for &s in u {
        counts[s] += 1;
    }
    Ok(EmpiricalType::from_counts(counts))
}

/// Flattens parallel sequences into one sequence over the product alphabet.
pub fn zip_sequences(seqs: &[&[usize]], sizes: &[usize]) -> Result<Vec<usize>> {
    check_same_len(seqs.len(), sizes.len())?;
    let n = seqs.first().map_or(0, |s| s.len());
    for (s, &size) in seqs.iter().zip(sizes) {
        check_same_len(n, s.len())?;
        check_symbols(s, size)?;
    }
    Ok((0..n)
        .map(|i| {
            seqs.iter()
                .zip(sizes)
                .fold(0usize, |acc, (s, &size)| acc * size + s[i])
        })
        .collect())
}

/// Joint type of parallel sequences over the flattened product alphabet.
pub fn joint_empirical(seqs: &[&[usize]], sizes: &[usize]) -> Result<EmpiricalType> {
    let z = zip_sequences(seqs, sizes)?;
    empirical(&z, sizes.iter().product())
}

/// `ν_{u|v}`, with rows absent for symbols `v` never seen.
pub fn cond_empirical(u: &[usize], v: &[usize], u_size: usize, v_size: usize) -> Result<CondPmf> {
    check_same_len(u.len(), v.len())?;
    check_symbols(u, u_size)?;
    check_symbols(v, v_size)?;
    let mut counts = vec![vec![0u32; u_size]; v_size];
    for (&a, &b) in u.iter().zip(v) {
        counts[b][a] += 1;
    }
    let rows = counts
        .into_iter()
        .map(|row| {
            let t: u32 = row.iter().sum();
            (t > 0).then(|| Pmf {
                probs: row.iter().map(|&c| c as f64 / t as f64).collect(),
            })
        })
        .collect();
    Ok(CondPmf {
        out_size: u_size,
        rows,
    })
}

/// `H(p)` in bits.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_slice(p.probs())
}

pub(crate) fn entropy_slice(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).fold(0.0, |a, b| a + b)
}

/// `H(U|V) = Σ_v p(v) H(q(·|v))`; absent rows contribute zero.
pub fn cond_entropy(q: &CondPmf, p: &Pmf) -> Result<f64> {
    check_same_len(q.in_size(), p.len())?;
    Ok((0..p.len())
        .filter_map(|v| q.row(v).map(|r| p.p(v) * entropy(r)))
        .sum())
}

/// `D(p || p')` in bits; infinite when `p` puts mass outside the support of `p'`.
pub fn divergence(p: &Pmf, p2: &Pmf) -> Result<f64> {
    check_same_len(p.len(), p2.len())?;
    Ok(divergence_slice(p.probs(), p2.probs()))
}

pub(crate) fn divergence_slice(p: &[f64], p2: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(p2) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).log2();
        }
    }
    d.max(0.0)
}

/// `D(q || q' | p) = Σ_v p(v) D(q(·|v) || q'(·|v))`. Rows with `p(v) = 0` or absent
/// in `q` contribute zero.
pub fn cond_divergence(q: &CondPmf, q2: &CondPmf, p: &Pmf) -> Result<f64> {
    check_same_len(q.in_size(), q2.in_size())?;
    check_same_len(q.in_size(), p.len())?;
    check_same_len(q.out_size(), q2.out_size())?;
    let mut d = 0.0;
    for v in 0..p.len() {
        if p.p(v) <= 0.0 {
            continue;
        }
        let Some(row) = q.row(v) else { continue };
        let Some(row2) = q2.row(v) else {
            return Ok(f64::INFINITY);
        };
        let dv = divergence_slice(row.probs(), row2.probs());
        if dv.is_infinite() {
            return Ok(f64::INFINITY);
        }
        d += p.p(v) * dv;
    }
    Ok(d)
}

/// A joint distribution over a product of small alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

/// Largest number of cells a joint table may have.
pub const JOINT_CELL_BUDGET: usize = 1 << 16;

impl JointTable {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let cells: usize = dims.iter().product();
        if cells > JOINT_CELL_BUDGET {
            return Err(Error::Budget {
                needed: cells as f64,
                budget: JOINT_CELL_BUDGET as f64,
            });
        }
        check_same_len(cells, probs.len())?;
        Pmf::new(probs.clone())?;
        Ok(JointTable { dims, probs })
    }

    /// Builds a table by evaluating `f` on every outcome tuple.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let cells: usize = dims.iter().product();
        if cells > JOINT_CELL_BUDGET {
            return Err(Error::Budget {
                needed: cells as f64,
                budget: JOINT_CELL_BUDGET as f64,
            });
        }
        let mut probs = Vec::with_capacity(cells);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..cells {
            probs.push(f(&idx));
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        JointTable::new(dims, probs)
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn to_pmf(&self) -> Pmf {
        Pmf {
            probs: self.probs.clone(),
        }
    }

    /// Flat index of an outcome tuple.
    pub fn index(&self, outcome: &[usize]) -> usize {
        outcome
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&s, &d)| acc * d + s)
    }

    /// Outcome tuple of a flat index.
    pub fn outcome(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    /// Marginal on the listed variables, in the listed order.
    pub fn marginal(&self, vars: &[usize]) -> JointTable {
        let dims: Vec<usize> = vars.iter().map(|&v| self.dims[v]).collect();
        let cells: usize = dims.iter().product();
        let mut probs = vec![0.0; cells];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let o = self.outcome(i);
            let j = vars.iter().zip(&dims).fold(0, |acc, (&v, &d)| acc * d + o[v]);
            probs[j] += p;
        }
        JointTable { dims, probs }
    }

    /// `H(vars)`; the empty set has entropy zero.
    pub fn entropy_of(&self, vars: &[usize]) -> f64 {
        if vars.is_empty() {
            return 0.0;
        }
        entropy_slice(&self.marginal(vars).probs)
    }

    /// `H(a | b)`.
    pub fn cond_entropy(&self, a: &[usize], b: &[usize]) -> f64 {
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        self.entropy_of(&ab) - self.entropy_of(b)
    }

    /// `I(a ; b | c)`, clamped at zero against rounding.
    pub fn cond_mutual_info(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        let v = self.entropy_of(&ac) + self.entropy_of(&bc)
            - self.entropy_of(&abc)
            - self.entropy_of(c);
        v.max(0.0)
    }

    pub fn mutual_info(&self, a: &[usize], b: &[usize]) -> f64 {
        self.cond_mutual_info(a, b, &[])
    }
}

/// `I(A;B)` for a pmf over the flattened `A x B` alphabet.
pub fn mutual_info(joint: &Pmf, a_size: usize, b_size: usize) -> Result<f64> {
    let t = JointTable::new(vec![a_size, b_size], joint.probs().to_vec())?;
    Ok(t.mutual_info(&[0], &[1]))
}

/// `I(A;B|C)` for a pmf over the flattened `A x B x C` alphabet.
pub fn cond_mutual_info(joint: &Pmf, a_size: usize, b_size: usize, c_size: usize) -> Result<f64> {
    let t = JointTable::new(vec![a_size, b_size, c_size], joint.probs().to_vec())?;
    Ok(t.cond_mutual_info(&[0], &[1], &[2]))
}

/// `H(u)`.
pub fn seq_entropy(u: &[usize], size: usize) -> Result<f64> {
    Ok(empirical(u, size)?.entropy())
}

/// `H(u|v) = H(u,v) - H(v)` computed from the joint type.
pub fn seq_cond_entropy(u: &[usize], v: &[usize], u_size: usize, v_size: usize) -> Result<f64> {
    let uv = joint_empirical(&[u, v], &[u_size, v_size])?;
    let vt = empirical(v, v_size)?;
    Ok(uv.entropy() - vt.entropy())
}

/// `I(x_K|u) = Σ_j H(x_j|u) - H(x_K|u)`.
pub fn seq_mutual_multi(xs: &[&[usize]], sizes: &[usize], u: &[usize], u_size: usize) -> Result<f64> {
    let mut s = 0.0;
    for (x, &size) in xs.iter().zip(sizes) {
        s += seq_cond_entropy(x, u, size, u_size)?;
    }
    let z = zip_sequences(xs, sizes)?;
    let joint = seq_cond_entropy(&z, u, sizes.iter().product(), u_size)?;
    Ok((s - joint).max(0.0))
}

/// `D(ν_u || μ) < γ`.
pub fn is_typical(u: &[usize], mu: &Pmf, gamma: f64) -> Result<bool> {
    let t = empirical(u, mu.len())?;
    Ok(divergence_slice(&t.freqs(), mu.probs()) < gamma)
}

/// `D(ν_{u|v} || μ_{U|V} | ν_v) < γ`.
pub fn is_cond_typical(u: &[usize], v: &[usize], mu: &CondPmf, gamma: f64) -> Result<bool> {
    Ok(cond_divergence_seq(u, v, mu)? < gamma)
}

/// `D(ν_{u|v} || μ_{U|V} | ν_v)`.
pub fn cond_divergence_seq(u: &[usize], v: &[usize], mu: &CondPmf) -> Result<f64> {
    let nu = cond_empirical(u, v, mu.out_size(), mu.in_size())?;
    let nv = empirical(v, mu.in_size())?.to_pmf();
    cond_divergence(&nu, mu, &nv)
}

fn check_gamma(gamma: f64, name: &str) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 0.125) {
        return Err(Error::SlackRange(format!(
            "{name} = {gamma} must lie in (0, 1/8]"
        )));
    }
    Ok(())
}

/// `λ = |U| log(n+1) / n`.
pub fn slack_lambda(n: usize, size: usize) -> f64 {
    size as f64 * ((n + 1) as f64).log2() / n as f64
}

/// `ι_U(γ) = -√(2γ) log(√(2γ)/|U|)`.
pub fn slack_iota(gamma: f64, size: usize) -> Result<f64> {
    check_gamma(gamma, "gamma")?;
    let t = (2.0 * gamma).sqrt();
    Ok(-t * (t / size as f64).log2())
}

/// `ι_{U|V}(γ'|γ) = -√(2γ') log(√(2γ')/(|U||V|)) + √(2γ) log|U|`.
pub fn slack_iota_cond(gamma_p: f64, gamma: f64, u_size: usize, v_size: usize) -> Result<f64> {
    check_gamma(gamma_p, "gamma'")?;
    check_gamma(gamma, "gamma")?;
    let t = (2.0 * gamma_p).sqrt();
    Ok(-t * (t / (u_size * v_size) as f64).log2()
        + (2.0 * gamma).sqrt() * (u_size as f64).log2())
}

/// `η_U(γ) = ι_U(γ) + λ_U`.
pub fn slack_eta(gamma: f64, n: usize, size: usize) -> Result<f64> {
    Ok(slack_iota(gamma, size)? + slack_lambda(n, size))
}

/// `η_{U|V}(γ'|γ) = ι_{U|V}(γ'|γ) + λ_{UV}`.
pub fn slack_eta_cond(
    gamma_p: f64,
    gamma: f64,
    n: usize,
    u_size: usize,
    v_size: usize,
) -> Result<f64> {
    Ok(slack_iota_cond(gamma_p, gamma, u_size, v_size)? + slack_lambda(n, u_size * v_size))
}

/// All types of length-`n` sequences over `0..size`, in lexicographic count order.
pub fn enumerate_types(n: usize, size: usize) -> Result<Vec<EmpiricalType>> {
    let bound = ((n + 1) as f64).powi(size as i32);
    if bound > TYPE_BUDGET {
        return Err(Error::Budget {
            needed: bound,
            budget: TYPE_BUDGET,
        });
    }
    if size == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut counts = vec![0u32; size];
    compositions(n as u32, 0, &mut counts, &mut out);
    Ok(out)
}

fn compositions(rest: u32, pos: usize, counts: &mut Vec<u32>, out: &mut Vec<EmpiricalType>) {
    if pos + 1 == counts.len() {
        counts[pos] = rest;
        out.push(EmpiricalType::from_counts(counts.clone()));
        return;
    }
    for c in 0..=rest {
        counts[pos] = c;
        compositions(rest - c, pos + 1, counts, out);
    }
}

/// Multinomial coefficient `n! / Π c!`.
pub fn type_class_size(t: &EmpiricalType) -> Result<u128> {
    let mut acc: u128 = 1;
    let mut placed: u128 = 0;
    for &c in t.counts() {
        for i in 1..=c as u128 {
            placed += 1;
            // acc * placed / i is the next binomial step, always integral
            acc = acc
                .checked_mul(placed)
                .ok_or_else(|| Error::Invalid("type class size overflows u128".into()))?
                / i;
        }
    }
    Ok(acc)
}

/// `γ' = 2 Σ ε_j`, rejected unless every margin is positive and `γ' ≤ 1/8`.
pub fn epsilon_to_gamma_prime(eps: &[f64]) -> Result<f64> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::SlackRange("every margin epsilon_j must be positive".into()));
    }
    let g = 2.0 * eps.iter().sum::<f64>();
    if g > 0.125 {
        return Err(Error::SlackRange(format!(
            "2*sum(eps) = {g} exceeds 1/8; shrink the margins"
        )));
    }
    Ok(g)
}

/// `ε = η_{X|W}(γ'|γ')` with `γ' = 2 Σ ε_j`, where `x_size` is the joint sender
/// alphabet and `w_size` the conditioning alphabet (e.g. `|U||Y|`).
pub fn derived_epsilon(eps: &[f64], n: usize, x_size: usize, w_size: usize) -> Result<f64> {
    let g = epsilon_to_gamma_prime(eps)?;
    slack_eta_cond(g, g, n, x_size, w_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn empirical_examples() {
        assert_eq!(empirical(&[0, 1, 0, 1], 2).unwrap().freqs(), vec![0.5, 0.5]);
        assert_eq!(
            empirical(&[2, 2, 2], 3).unwrap().freqs(),
            vec![0.0, 0.0, 1.0]
        );
        let j = joint_empirical(&[&[0, 1], &[1, 1]], &[2, 2]).unwrap();
        // index u*2+v: (0,1) -> 1, (1,1) -> 3
        assert_eq!(j.freqs(), vec![0.0, 0.5, 0.0, 0.5]);
        assert!(matches!(
            empirical(&[0, 3], 2),
            Err(Error::SymbolOutOfRange { symbol: 3, size: 2 })
        ));
    }

    #[test]
    fn cond_empirical_examples() {
        let c = cond_empirical(&[0, 1, 0, 1], &[0, 0, 1, 1], 2, 2).unwrap();
        assert_eq!(c.p(0, 0), 0.5);
        assert_eq!(c.p(0, 1), 0.5);
        let id = cond_empirical(&[0, 1, 1], &[0, 1, 1], 2, 2).unwrap();
        assert_eq!(id.p(0, 0), 1.0);
        assert_eq!(id.p(1, 1), 1.0);
        let deg = cond_empirical(&[1, 1], &[0, 0], 2, 2).unwrap();
        assert!(deg.row(1).is_none());
        assert!(!deg.is_complete());
        assert!(cond_empirical(&[1], &[0, 0], 2, 2).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(close(entropy(&Pmf::uniform(2)), 1.0));
        assert!(close(entropy(&Pmf::uniform(4)), 2.0));
        let indep = Pmf::new(vec![0.06, 0.14, 0.24, 0.56]).unwrap(); // (0.2,0.8) x (0.3,0.7)
        assert!(mutual_info(&indep, 2, 2).unwrap().abs() < 1e-12);
        let copy = Pmf::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(close(mutual_info(&copy, 2, 2).unwrap(), 1.0));
    }

    #[test]
    fn cond_entropy_and_cmi() {
        // X uniform, Y = X with prob 3/4
        let q = CondPmf::from_rows(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let h = cond_entropy(&q, &Pmf::uniform(2)).unwrap();
        let hb = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!(close(h, hb));
        // Z = X xor Y with X, Y uniform independent: I(X;Y|Z) = 1
        let mut p = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                p[(x * 2 + y) * 2 + (x ^ y)] = 0.25;
            }
        }
        let p = Pmf::new(p).unwrap();
        assert!(close(cond_mutual_info(&p, 2, 2, 2).unwrap(), 1.0));
    }

    #[test]
    fn divergence_examples() {
        let p = Pmf::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(divergence(&p, &p).unwrap(), 0.0);
        assert!(close(
            divergence(&Pmf::point(2, 0), &Pmf::uniform(2)).unwrap(),
            1.0
        ));
        assert!(divergence(&Pmf::point(2, 0), &Pmf::point(2, 1))
            .unwrap()
            .is_infinite());
        assert!(divergence(&p, &Pmf::uniform(3)).is_err());
        assert_eq!(
            f64::INFINITY.total_cmp(&1e300),
            std::cmp::Ordering::Greater
        );
    }

    #[test]
    fn cond_divergence_skips_absent_rows() {
        let nu = cond_empirical(&[1, 1], &[0, 0], 2, 2).unwrap();
        let mu = CondPmf::from_rows(vec![vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let nv = Pmf::point(2, 0);
        assert!(close(cond_divergence(&nu, &mu, &nv).unwrap(), 1.0));
    }

    #[test]
    fn seq_examples() {
        assert!(close(seq_entropy(&[0, 1, 0, 1], 2).unwrap(), 1.0));
        let u = [0, 1, 1, 0, 1];
        assert!(seq_cond_entropy(&u, &u, 2, 2).unwrap().abs() < 1e-12);
        let x = [0usize, 1];
        let i = seq_mutual_multi(&[&x, &x], &[2, 2], &[0, 0], 1).unwrap();
        assert!(close(i, 1.0));
    }

    #[test]
    fn typicality_examples() {
        let mu = Pmf::uniform(2);
        assert!(is_typical(&[0, 1, 0, 1], &mu, 0.01).unwrap());
        assert!(!is_typical(&[0, 0, 0, 0], &mu, 0.5).unwrap());
        assert!(is_typical(&[0, 0, 0, 0], &mu, 1.01).unwrap());
        // strict inequality at the boundary
        assert!(!is_typical(&[0, 0, 0, 0], &mu, 1.0).unwrap());
        let k = CondPmf::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(is_cond_typical(&[0, 1], &[0, 1], &k, 1e-9).unwrap());
        assert!(!is_cond_typical(&[1, 1], &[0, 1], &k, 100.0).unwrap());
    }

    #[test]
    fn slack_examples() {
        // independent evaluation: 2*ln5/ln2/4
        let lam = 2.0 * 5f64.ln() / 2f64.ln() / 4.0;
        assert!(close(slack_lambda(4, 2), lam));
        assert!((slack_lambda(4, 2) - 1.1610).abs() < 1e-4);
        let iota = -0.2 * (0.1f64).ln() / 2f64.ln();
        assert!(close(slack_iota(0.02, 2).unwrap(), iota));
        assert!((slack_iota(0.02, 2).unwrap() - 0.6644).abs() < 1e-4);
        let eta = slack_eta(0.02, 4, 2).unwrap();
        assert!(close(eta - slack_iota(0.02, 2).unwrap(), slack_lambda(4, 2)));
        assert!(matches!(slack_iota(0.2, 2), Err(Error::SlackRange(_))));
        assert!(slack_iota(0.0, 2).is_err());
        // conditional form: gamma' = gamma = 0.02, |U|=|V|=2
        let t = 0.2f64;
        let want = -t * (t / 4.0).log2() + t * 1.0 + 4.0 * 5f64.log2() / 4.0;
        assert!(close(slack_eta_cond(0.02, 0.02, 4, 2, 2).unwrap(), want));
    }

    #[test]
    fn type_examples() {
        let t3 = enumerate_types(3, 2).unwrap();
        assert_eq!(t3.len(), 4);
        assert!(t3.len() < 16);
        assert_eq!(
            type_class_size(&EmpiricalType::from_counts(vec![2, 2])).unwrap(),
            6
        );
        assert_eq!(enumerate_types(1, 3).unwrap().len(), 3);
        assert_eq!(
            type_class_size(&EmpiricalType::from_counts(vec![3, 2, 5])).unwrap(),
            2520
        );
    }

    #[test]
    fn epsilon_coupling() {
        assert!(close(epsilon_to_gamma_prime(&[0.01, 0.01]).unwrap(), 0.04));
        let d = derived_epsilon(&[0.01, 0.01], 100, 4, 3).unwrap();
        assert_eq!(d, slack_eta_cond(0.04, 0.04, 100, 4, 3).unwrap());
        assert!(matches!(
            epsilon_to_gamma_prime(&[0.1, 0.1]),
            Err(Error::SlackRange(_))
        ));
    }

    #[test]
    fn joint_table_marginals() {
        let t = JointTable::from_fn(vec![2, 3], |o| if o[1] == 2 * o[0] { 0.5 } else { 0.0 })
            .unwrap();
        assert_eq!(t.marginal(&[1]).probs(), &[0.5, 0.0, 0.5]);
        assert!(close(t.mutual_info(&[0], &[1]), 1.0));
        assert_eq!(t.outcome(t.index(&[1, 2])), vec![1, 2]);
    }
}
