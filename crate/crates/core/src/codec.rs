//! Minimum-divergence coset encoding and joint decoding.
//!
//! Candidates come from the affine solution spaces of the label equations, so
//! the cost is the coset size rather than `q^n`. Objectives are compared with a
//! relative tolerance; within it the lexicographically smaller vector (or
//! concatenated tuple) wins, which makes every argmin deterministic.

use crate::error::{Error, Result};
use crate::gf::{all_vectors, stack_labels, AffineSpace, FieldVec, LinearLabel, ENUMERATION_BUDGET};
use crate::types::{cond_divergence_seq, CondPmf, JointTable, Pmf};
use std::cmp::Ordering;

/// Relative tolerance under which two objective values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Compares `(d, key)` pairs: smaller divergence first, then lexicographic key.
pub fn compare_candidates(d1: f64, key1: &[u8], d2: f64, key2: &[u8]) -> Ordering {
    if d1.is_finite() && d2.is_finite() {
        let tol = TIE_TOLERANCE * d1.abs().max(d2.abs()).max(1.0);
        if (d1 - d2).abs() > tol {
            return d1.total_cmp(&d2);
        }
    } else if d1.is_finite() != d2.is_finite() {
        return d1.total_cmp(&d2);
    }
    key1.cmp(key2)
}

/// `C_{AA'}(a, m) = {x : Ax = a, A'x = m}`.
#[derive(Clone, Debug)]
pub struct CosetSpec {
    pub a_label: LinearLabel,
    pub m_label: LinearLabel,
    pub a: FieldVec,
    pub m: FieldVec,
}

impl CosetSpec {
    pub fn new(a_label: LinearLabel, m_label: LinearLabel, a: FieldVec, m: FieldVec) -> Result<Self> {
        if a_label.cols() != m_label.cols() {
            return Err(Error::Dimension {
                what: "coset label columns",
                expected: a_label.cols(),
                got: m_label.cols(),
            });
        }
        for (what, label, v) in [("syndrome length", &a_label, &a), ("message length", &m_label, &m)] {
            if label.rows() != v.len() {
                return Err(Error::Dimension {
                    what,
                    expected: label.rows(),
                    got: v.len(),
                });
            }
        }
        Ok(CosetSpec {
            a_label,
            m_label,
            a,
            m,
        })
    }

    pub fn n(&self) -> usize {
        self.a_label.cols()
    }

    /// Whether `x` satisfies both label equations.
    pub fn contains(&self, x: &FieldVec) -> Result<bool> {
        Ok(self.a_label.apply(x)? == self.a && self.m_label.apply(x)? == self.m)
    }

    /// The coset as an affine space, `None` when empty.
    pub fn solve(&self) -> Result<Option<AffineSpace>> {
        let stacked = stack_labels(&self.a_label, &self.m_label)?;
        stacked.solve(&self.a.concat(&self.m))
    }
}

/// What the encoder aims its empirical distribution at.
#[derive(Clone, Debug)]
pub enum EncodeTarget {
    Marginal(Pmf),
    /// `μ_{X|U}` together with the conditioning sequence `u`.
    Conditional { mu: CondPmf, u: Vec<usize> },
}

impl EncodeTarget {
    fn out_size(&self) -> usize {
        match self {
            EncodeTarget::Marginal(p) => p.len(),
            EncodeTarget::Conditional { mu, .. } => mu.out_size(),
        }
    }
}

/// Precomputed `log2 μ(x|u)` table with the conditioning sequence.
struct EncodeObjective {
    x_size: usize,
    u: Vec<usize>,
    u_counts: Vec<u32>,
    log_mu: Vec<f64>,
    n: usize,
}

impl EncodeObjective {
    fn new(target: &EncodeTarget, n: usize) -> Result<Self> {
        let (mu, u) = match target {
            EncodeTarget::Marginal(p) => (CondPmf::constant(1, p), vec![0; n]),
            EncodeTarget::Conditional { mu, u } => (mu.clone(), u.clone()),
        };
        if u.len() != n {
            return Err(Error::Dimension {
                what: "conditioning sequence length",
                expected: n,
                got: u.len(),
            });
        }
        let (xs, us) = (mu.out_size(), mu.in_size());
        if let Some(&s) = u.iter().find(|&&s| s >= us) {
            return Err(Error::SymbolOutOfRange { symbol: s, size: us });
        }
        let mut u_counts = vec![0u32; us];
        for &s in &u {
            u_counts[s] += 1;
        }
        let mut log_mu = vec![f64::NEG_INFINITY; xs * us];
        for uu in 0..us {
            for x in 0..xs {
                let p = mu.p(x, uu);
                if p > 0.0 {
                    log_mu[uu * xs + x] = p.log2();
                }
            }
        }
        Ok(EncodeObjective {
            x_size: xs,
            u,
            u_counts,
            log_mu,
            n,
        })
    }

    /// `D(ν_{x|u} || μ_{X|U} | ν_u)`.
    fn eval(&self, x: &[u8], counts: &mut [u32]) -> f64 {
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, &xi) in x.iter().enumerate() {
            counts[self.u[i] * self.x_size + xi as usize] += 1;
        }
        let n = self.n as f64;
        let mut d = 0.0;
        for (cell, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let lm = self.log_mu[cell];
            if lm == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            let cu = self.u_counts[cell / self.x_size] as f64;
            let c = c as f64;
            d += c / n * ((c / cu).log2() - lm);
        }
        d.max(0.0)
    }
}

fn check_budget(size: f64) -> Result<()> {
    if size > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            needed: size,
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(())
}

/// Encoder output together with its objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoded {
    pub x: FieldVec,
    pub divergence: f64,
}

/// Minimum-divergence member of `C_{AA'}(a, m)`.
pub fn min_div_encode(cs: &CosetSpec, target: &EncodeTarget) -> Result<FieldVec> {
    min_div_encode_scored(cs, target).map(|e| e.x)
}

/// As [`min_div_encode`], also returning the attained divergence.
pub fn min_div_encode_scored(cs: &CosetSpec, target: &EncodeTarget) -> Result<Encoded> {
    let n = cs.n();
    let field = cs.a_label.field();
    if target.out_size() != field.size() {
        return Err(Error::Dimension {
            what: "target alphabet size",
            expected: field.size(),
            got: target.out_size(),
        });
    }
    check_budget(field.space_size(n))?;
    let obj = EncodeObjective::new(target, n)?;
    let space = cs.solve()?.ok_or(Error::EmptyCoset)?;
    let mut counts = vec![0u32; obj.log_mu.len()];
    let mut best: Option<(f64, Vec<u8>)> = None;
    for x in space.raw_iter() {
        let d = obj.eval(&x, &mut counts);
        let better = match &best {
            None => true,
            Some((bd, bx)) => compare_candidates(d, &x, *bd, bx) == Ordering::Less,
        };
        if better {
            best = Some((d, x));
        }
    }
    let (d, x) = best.expect("nonempty coset");
    let x = FieldVec::new(field, x)?;
    debug_assert!(cs.contains(&x).unwrap_or(false));
    Ok(Encoded { x, divergence: d })
}

/// Inputs to the joint decoder.
///
/// The law is over `[U] + X_1..X_k + [Y]`: an optional leading side variable
/// known to the decoder, the decoded senders, and the channel output.
#[derive(Clone, Debug)]
pub struct DecodeProblem<'a> {
    pub labels: &'a [LinearLabel],
    pub syndromes: &'a [FieldVec],
    pub law: &'a JointTable,
    pub side: Option<&'a [usize]>,
    pub y: &'a [usize],
}

/// Decoder output with its objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub xs: Vec<FieldVec>,
    pub divergence: f64,
}

/// Minimum joint divergence tuple over the product coset.
pub fn min_div_decode(p: &DecodeProblem<'_>) -> Result<Vec<FieldVec>> {
    min_div_decode_scored(p).map(|d| d.xs)
}

/// As [`min_div_decode`], also returning the attained divergence.
pub fn min_div_decode_scored(p: &DecodeProblem<'_>) -> Result<Decoded> {
    let k = p.labels.len();
    if k == 0 || p.syndromes.len() != k {
        return Err(Error::Dimension {
            what: "number of syndromes",
            expected: k,
            got: p.syndromes.len(),
        });
    }
    let n = p.y.len();
    let field = p.labels[0].field();
    let dims = p.law.dims();
    let off = usize::from(p.side.is_some());
    if dims.len() != off + k + 1 {
        return Err(Error::Dimension {
            what: "law variables",
            expected: off + k + 1,
            got: dims.len(),
        });
    }
    for j in 0..k {
        if p.labels[j].cols() != n {
            return Err(Error::Dimension {
                what: "label columns vs output length",
                expected: n,
                got: p.labels[j].cols(),
            });
        }
        if dims[off + j] != field.size() {
            return Err(Error::Dimension {
                what: "sender alphabet vs field size",
                expected: field.size(),
                got: dims[off + j],
            });
        }
    }
    if let Some(u) = p.side {
        if u.len() != n {
            return Err(Error::Dimension {
                what: "side sequence length",
                expected: n,
                got: u.len(),
            });
        }
    }
    // strides of the flattened law
    let mut strides = vec![1usize; dims.len()];
    for v in (0..dims.len() - 1).rev() {
        strides[v] = strides[v + 1] * dims[v + 1];
    }
    let y_size = dims[dims.len() - 1];
    let mut base = vec![0usize; n];
    for i in 0..n {
        if p.y[i] >= y_size {
            return Err(Error::SymbolOutOfRange {
                symbol: p.y[i],
                size: y_size,
            });
        }
        base[i] = p.y[i];
        if let Some(u) = p.side {
            if u[i] >= dims[0] {
                return Err(Error::SymbolOutOfRange {
                    symbol: u[i],
                    size: dims[0],
                });
            }
            base[i] += u[i] * strides[0];
        }
    }
    let log_mu: Vec<f64> = p
        .law
        .probs()
        .iter()
        .map(|&x| if x > 0.0 { x.log2() } else { f64::NEG_INFINITY })
        .collect();

    let mut spaces = Vec::with_capacity(k);
    for j in 0..k {
        let s = p.labels[j]
            .solve(&p.syndromes[j])?
            .ok_or(Error::AllCosetsEmpty(j))?;
        spaces.push(s);
    }
    let total: f64 = spaces.iter().map(|s| s.len()).product();
    check_budget(total)?;
    let last = k - 1;
    // the last sender is enumerated per prefix, so only the others are materialized
    let members: Vec<Vec<Vec<u8>>> = spaces[..last].iter().map(|s| s.raw_iter().collect()).collect();
    let contrib: Vec<Vec<Vec<usize>>> = (0..last)
        .map(|j| {
            members[j]
                .iter()
                .map(|x| x.iter().map(|&s| s as usize * strides[off + j]).collect())
                .collect()
        })
        .collect();
    let last_stride = strides[off + last];
    let last_dense = p.labels[last].to_dense();
    let last_rows: Vec<Vec<u8>> = last_dense.chunks(n.max(1)).take(p.labels[last].rows()).map(<[u8]>::to_vec).collect();
    let q = field.size();

    let mut scorer = Scorer::new(n, log_mu.len());
    let mut choice = vec![0usize; last];
    let mut partial = vec![0usize; n];
    let mut best: Option<(f64, Vec<u8>)> = None;
    let mut key = Vec::with_capacity(n * k);
    'prefixes: loop {
        for i in 0..n {
            partial[i] = base[i];
            for j in 0..last {
                partial[i] += contrib[j][choice[j]][i];
            }
        }
        // pin the last sender wherever the law allows a single symbol; a position
        // allowing none rules out the whole prefix
        let mut pinned: Vec<(usize, u8)> = Vec::new();
        let mut dead = false;
        for i in 0..n {
            let mut allowed = (0..q).filter(|&s| log_mu[partial[i] + s * last_stride] > f64::NEG_INFINITY);
            match (allowed.next(), allowed.next()) {
                (None, _) => {
                    dead = true;
                    break;
                }
                (Some(s), None) => pinned.push((i, s as u8)),
                _ => {}
            }
        }
        if !dead {
            let space = if pinned.is_empty() {
                Some(spaces[last].clone())
            } else {
                let mut rows = last_rows.clone();
                let mut rhs = p.syndromes[last].as_slice().to_vec();
                for &(i, s) in &pinned {
                    let mut e = vec![0u8; n];
                    e[i] = 1;
                    rows.push(e);
                    rhs.push(s);
                }
                LinearLabel::from_rows(field, &rows, n)?.solve(&FieldVec::new(field, rhs)?)?
            };
            if let Some(space) = space {
                for x in space.raw_iter() {
                    let d = scorer.divergence((0..n).map(|i| partial[i] + x[i] as usize * last_stride), &log_mu);
                    if !d.is_finite() {
                        continue;
                    }
                    key.clear();
                    for j in 0..last {
                        key.extend_from_slice(&members[j][choice[j]]);
                    }
                    key.extend_from_slice(&x);
                    let better = match &best {
                        None => true,
                        Some((bd, bk)) => match compare_candidates(d, &[], *bd, &[]) {
                            Ordering::Equal => key.as_slice() < bk.as_slice(),
                            o => o == Ordering::Less,
                        },
                    };
                    if better {
                        best = Some((d, key.clone()));
                    }
                }
            }
        }
        // advance the mixed-radix prefix
        let mut j = last;
        loop {
            if j == 0 {
                break 'prefixes;
            }
            j -= 1;
            choice[j] += 1;
            if choice[j] < members[j].len() {
                break;
            }
            choice[j] = 0;
        }
    }
    let (d, key) = match best {
        Some(b) => b,
        // every tuple is impossible under the law: all tie at infinity
        None => {
            let key = spaces.iter().flat_map(|s| s.lex_min().into_inner()).collect();
            (f64::INFINITY, key)
        }
    };
    let xs = key
        .chunks(n)
        .map(|c| FieldVec::new(field, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Decoded { xs, divergence: d })
}

/// Joint-type divergence `D(t || μ)` from cell indices, reusing its count table.
struct Scorer {
    nf: f64,
    plogp: Vec<f64>,
    counts: Vec<u32>,
    touched: Vec<usize>,
}

impl Scorer {
    fn new(n: usize, cells: usize) -> Self {
        let nf = n as f64;
        // (c/n) log2(c/n) for every count c
        let plogp = (0..=n)
            .map(|c| {
                let f = c as f64 / nf;
                if c == 0 {
                    0.0
                } else {
                    f * f.log2()
                }
            })
            .collect();
        Scorer {
            nf,
            plogp,
            counts: vec![0; cells],
            touched: Vec::with_capacity(n),
        }
    }

    /// Infinite as soon as a cell has zero probability.
    fn divergence(&mut self, cells: impl Iterator<Item = usize>, log_mu: &[f64]) -> f64 {
        let mut impossible = false;
        for cell in cells {
            if log_mu[cell] == f64::NEG_INFINITY {
                impossible = true;
                break;
            }
            if self.counts[cell] == 0 {
                self.touched.push(cell);
            }
            self.counts[cell] += 1;
        }
        let mut d = 0.0;
        for &cell in &self.touched {
            let c = self.counts[cell] as usize;
            d += self.plogp[c] - c as f64 / self.nf * log_mu[cell];
            self.counts[cell] = 0;
        }
        self.touched.clear();
        if impossible {
            f64::INFINITY
        } else {
            d.max(0.0)
        }
    }
}

/// The `size` members of `T_{X|U,γ}(u)` with the smallest conditional divergence,
/// ties lexicographic.
pub fn build_t_subset(
    u: &[usize],
    mu: &CondPmf,
    gamma: f64,
    size: usize,
    field: crate::gf::FieldSpec,
) -> Result<Vec<FieldVec>> {
    let typical = conditional_typical_set(u, mu, gamma, field)?;
    if size > typical.len() {
        return Err(Error::Invalid(format!(
            "requested {size} sequences but the typical set has {}",
            typical.len()
        )));
    }
    Ok(typical.into_iter().take(size).map(|(_, x)| x).collect())
}

/// `T_{X|U,γ}(u)` sorted by `(divergence, lexicographic)`.
pub fn conditional_typical_set(
    u: &[usize],
    mu: &CondPmf,
    gamma: f64,
    field: crate::gf::FieldSpec,
) -> Result<Vec<(f64, FieldVec)>> {
    if mu.out_size() != field.size() {
        return Err(Error::Dimension {
            what: "target alphabet size",
            expected: field.size(),
            got: mu.out_size(),
        });
    }
    let mut out = Vec::new();
    for x in all_vectors(field, u.len())? {
        let d = cond_divergence_seq(&x.symbols(), u, mu)?;
        if d < gamma {
            out.push((d, x));
        }
    }
    out.sort_by(|(d1, x1), (d2, x2)| compare_candidates(*d1, x1.as_slice(), *d2, x2.as_slice()));
    Ok(out)
}

/// Exhaustive-scan reference implementations. They share no search code with
/// the coset-based routines: they walk all of `GF(q)^n` (or its product), filter
/// by the label equations, and score with the generic types toolkit.
pub mod oracle {
    use super::*;
    use crate::types::{divergence, joint_empirical};

    pub fn encode(cs: &CosetSpec, target: &EncodeTarget) -> Result<Option<FieldVec>> {
        let field = cs.a_label.field();
        let mut best: Option<(f64, FieldVec)> = None;
        for x in all_vectors(field, cs.n())? {
            if !cs.contains(&x)? {
                continue;
            }
            let d = match target {
                EncodeTarget::Marginal(mu) => {
                    let t = joint_empirical(&[&x.symbols()], &[field.size()])?;
                    divergence(&t.to_pmf(), mu)?
                }
                EncodeTarget::Conditional { mu, u } => cond_divergence_seq(&x.symbols(), u, mu)?,
            };
            let replace = match &best {
                None => true,
                Some((bd, bx)) => compare_candidates(d, x.as_slice(), *bd, bx.as_slice()) == Ordering::Less,
            };
            if replace {
                best = Some((d, x));
            }
        }
        Ok(best.map(|(_, x)| x))
    }

    pub fn decode(p: &DecodeProblem<'_>) -> Result<Option<Vec<FieldVec>>> {
        let k = p.labels.len();
        let field = p.labels[0].field();
        let n = p.y.len();
        let total = field.space_size(n * k);
        check_budget(total)?;
        let mut best: Option<(f64, Vec<u8>)> = None;
        for big in all_vectors(field, n * k)? {
            let parts: Vec<FieldVec> = big
                .as_slice()
                .chunks(n)
                .map(|c| FieldVec::new(field, c.to_vec()))
                .collect::<Result<_>>()?;
            let mut inside = true;
            for j in 0..k {
                if p.labels[j].apply(&parts[j])? != p.syndromes[j] {
                    inside = false;
                    break;
                }
            }
            if !inside {
                continue;
            }
            let mut seqs: Vec<Vec<usize>> = Vec::new();
            if let Some(u) = p.side {
                seqs.push(u.to_vec());
            }
            seqs.extend(parts.iter().map(FieldVec::symbols));
            seqs.push(p.y.to_vec());
            let refs: Vec<&[usize]> = seqs.iter().map(Vec::as_slice).collect();
            let t = joint_empirical(&refs, p.law.dims())?;
            let d = divergence(&t.to_pmf(), &p.law.to_pmf())?;
            let replace = match &best {
                None => true,
                Some((bd, bk)) => compare_candidates(d, big.as_slice(), *bd, bk) == Ordering::Less,
            };
            if replace {
                best = Some((d, big.into_inner()));
            }
        }
        Ok(best.map(|(_, key)| {
            key.chunks(n)
                .map(|c| FieldVec::new(field, c.to_vec()).expect("in range"))
                .collect()
        }))
    }
}
