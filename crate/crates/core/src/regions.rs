//! Joint laws and pointwise membership in achievable rate regions.

use crate::channel::{unflatten, Dmc};
use crate::error::{Error, Result};
use crate::types::{derived_epsilon, CondPmf, JointTable, Pmf};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Private,
    TimeShared,
    Han,
    SlepianWolf,
}

/// A joint distribution with the role of each table variable.
#[derive(Clone, Debug, PartialEq)]
pub struct JointLaw {
    pub kind: LawKind,
    pub table: JointTable,
    /// Time-sharing variable.
    pub u: Option<usize>,
    /// Cloud center of the superposition law.
    pub x0: Option<usize>,
    /// Auxiliary message variables of the Han law.
    pub xt: Vec<usize>,
    /// Channel inputs.
    pub x: Vec<usize>,
    pub y: usize,
}

impl JointLaw {
    /// Variables that carry messages, in message order.
    pub fn message_vars(&self) -> Vec<usize> {
        match self.kind {
            LawKind::Han => self.xt.clone(),
            LawKind::SlepianWolf => {
                let mut v = vec![self.x0.expect("superposition law has X0")];
                v.extend(&self.x);
                v
            }
            _ => self.x.clone(),
        }
    }

    pub fn size(&self, var: usize) -> usize {
        self.table.dims()[var]
    }

    /// `I(a; b | c)` on the law.
    pub fn cmi(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        self.table.cond_mutual_info(a, b, c)
    }

    /// `H(a | b)` on the law.
    pub fn cond_entropy(&self, a: &[usize], b: &[usize]) -> f64 {
        self.table.cond_entropy(a, b)
    }
}

fn check_channel(dmc: &Dmc, sizes: &[usize]) -> Result<()> {
    if dmc.input_sizes() != sizes {
        return Err(Error::Dimension {
            what: "channel inputs vs input distributions",
            expected: dmc.senders(),
            got: sizes.len(),
        });
    }
    Ok(())
}

/// `μ_{X_K Y} = μ_{Y|X_K} Π_j μ_{X_j}` over `[X_1..X_k, Y]`.
pub fn joint_private(mu_x: &[Pmf], dmc: &Dmc) -> Result<JointLaw> {
    let sizes: Vec<usize> = mu_x.iter().map(Pmf::len).collect();
    check_channel(dmc, &sizes)?;
    let k = sizes.len();
    let mut dims = sizes.clone();
    dims.push(dmc.output_size());
    let table = JointTable::from_fn(dims, |o| {
        let xs = &o[..k];
        let px: f64 = xs.iter().zip(mu_x).map(|(&x, m)| m.p(x)).product();
        px * dmc.p(o[k], xs)
    })?;
    Ok(JointLaw {
        kind: LawKind::Private,
        table,
        u: None,
        x0: None,
        xt: Vec::new(),
        x: (0..k).collect(),
        y: k,
    })
}

/// `μ_{U X_K Y} = μ_{Y|X_K} Π_j μ_{X_j|U} μ_U` over `[U, X_1..X_k, Y]`.
pub fn joint_ts(mu_u: &Pmf, mu_xgu: &[CondPmf], dmc: &Dmc) -> Result<JointLaw> {
    for m in mu_xgu {
        if m.in_size() != mu_u.len() {
            return Err(Error::Dimension {
                what: "conditional rows vs |U|",
                expected: mu_u.len(),
                got: m.in_size(),
            });
        }
    }
    let sizes: Vec<usize> = mu_xgu.iter().map(CondPmf::out_size).collect();
    check_channel(dmc, &sizes)?;
    let k = sizes.len();
    let mut dims = vec![mu_u.len()];
    dims.extend(&sizes);
    dims.push(dmc.output_size());
    let table = JointTable::from_fn(dims, |o| {
        let u = o[0];
        let xs = &o[1..=k];
        let px: f64 = xs.iter().zip(mu_xgu).map(|(&x, m)| m.p(x, u)).product();
        mu_u.p(u) * px * dmc.p(o[k + 1], xs)
    })?;
    Ok(JointLaw {
        kind: LawKind::TimeShared,
        table,
        u: Some(0),
        x0: None,
        xt: Vec::new(),
        x: (1..=k).collect(),
        y: k + 1,
    })
}

/// `μ_{X_0X_1X_2Y} = μ_{Y|X_1X_2} μ_{X_1|X_0} μ_{X_2|X_0} μ_{X_0}` over `[X0, X1, X2, Y]`.
pub fn joint_sw(mu_x0: &Pmf, mu_x1g0: &CondPmf, mu_x2g0: &CondPmf, dmc: &Dmc) -> Result<JointLaw> {
    for m in [mu_x1g0, mu_x2g0] {
        if m.in_size() != mu_x0.len() {
            return Err(Error::Dimension {
                what: "conditional rows vs |X0|",
                expected: mu_x0.len(),
                got: m.in_size(),
            });
        }
    }
    check_channel(dmc, &[mu_x1g0.out_size(), mu_x2g0.out_size()])?;
    let dims = vec![mu_x0.len(), mu_x1g0.out_size(), mu_x2g0.out_size(), dmc.output_size()];
    let table = JointTable::from_fn(dims, |o| {
        mu_x0.p(o[0]) * mu_x1g0.p(o[1], o[0]) * mu_x2g0.p(o[2], o[0]) * dmc.p(o[3], &o[1..3])
    })?;
    Ok(JointLaw {
        kind: LawKind::SlepianWolf,
        table,
        u: None,
        x0: Some(0),
        xt: Vec::new(),
        x: vec![1, 2],
        y: 3,
    })
}

/// `f_j`: maps the messages `K̃_j` seen by sender `j` to its channel symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolMap {
    /// Indices into the auxiliary variables, in argument order.
    pub inputs: Vec<usize>,
    /// Output symbol per flattened argument tuple (first argument most significant).
    pub table: Vec<usize>,
}

impl SymbolMap {
    pub fn identity(index: usize, size: usize) -> Self {
        SymbolMap {
            inputs: vec![index],
            table: (0..size).collect(),
        }
    }

    pub fn from_fn(inputs: Vec<usize>, sizes: &[usize], f: impl Fn(&[usize]) -> usize) -> Self {
        let arg_sizes: Vec<usize> = inputs.iter().map(|&i| sizes[i]).collect();
        let cells: usize = arg_sizes.iter().product();
        SymbolMap {
            inputs,
            table: (0..cells).map(|c| f(&unflatten(c, &arg_sizes))).collect(),
        }
    }

    /// `f_j` applied to the full auxiliary tuple.
    pub fn eval(&self, xt: &[usize], sizes: &[usize]) -> usize {
        let idx = self
            .inputs
            .iter()
            .fold(0, |acc, &i| acc * sizes[i] + xt[i]);
        self.table[idx]
    }

    pub fn validate(&self, sizes: &[usize], out_size: usize) -> Result<()> {
        if let Some(&i) = self.inputs.iter().find(|&&i| i >= sizes.len()) {
            return Err(Error::Invalid(format!(
                "message index {i} is not among the {} auxiliary messages",
                sizes.len()
            )));
        }
        let cells: usize = self.inputs.iter().map(|&i| sizes[i]).product();
        if self.table.len() != cells {
            return Err(Error::Dimension {
                what: "symbol map table (must be total)",
                expected: cells,
                got: self.table.len(),
            });
        }
        if let Some(&s) = self.table.iter().find(|&&s| s >= out_size) {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                size: out_size,
            });
        }
        Ok(())
    }
}

/// Han law over `[X̃_1..X̃_s, X_1..X_k, Y]`.
pub fn joint_han(mu_xt: &[Pmf], maps: &[SymbolMap], dmc: &Dmc) -> Result<JointLaw> {
    if maps.len() != dmc.senders() {
        return Err(Error::Dimension {
            what: "symbol maps vs senders",
            expected: dmc.senders(),
            got: maps.len(),
        });
    }
    let sizes: Vec<usize> = mu_xt.iter().map(Pmf::len).collect();
    for (m, &out) in maps.iter().zip(dmc.input_sizes()) {
        m.validate(&sizes, out)?;
    }
    let s = sizes.len();
    let k = maps.len();
    let mut dims = sizes.clone();
    dims.extend(dmc.input_sizes());
    dims.push(dmc.output_size());
    let table = JointTable::from_fn(dims, |o| {
        let xt = &o[..s];
        let xs = &o[s..s + k];
        if maps.iter().zip(xs).any(|(m, &x)| m.eval(xt, &sizes) != x) {
            return 0.0;
        }
        let p: f64 = xt.iter().zip(mu_xt).map(|(&v, m)| m.p(v)).product();
        p * dmc.p(o[s + k], xs)
    })?;
    Ok(JointLaw {
        kind: LawKind::Han,
        table,
        u: None,
        x0: None,
        xt: (0..s).collect(),
        x: (s..s + k).collect(),
        y: s + k,
    })
}

/// One inequality `Σ_{j∈members} R_j < bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub label: String,
    /// Message indices in the rate vector.
    pub members: Vec<usize>,
    pub bound: f64,
}

/// The first violated inequality of a failed membership test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub label: String,
    pub lhs: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub inside: bool,
    pub witness: Option<Violation>,
}

impl Verdict {
    fn from(witness: Option<Violation>) -> Self {
        Verdict {
            inside: witness.is_none(),
            witness,
        }
    }
}

fn set_label(members: &[usize], offset: usize) -> String {
    let items: Vec<String> = members.iter().map(|j| (j + offset).to_string()).collect();
    format!("J={{{}}}", items.join(","))
}

/// Subsets of `0..k` ordered by size descending, then lexicographically.
fn ordered_subsets(k: usize) -> Vec<Vec<usize>> {
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << k))
        .map(|m| (0..k).filter(|&j| m & (1 << j) != 0).collect())
        .collect();
    subsets.sort_by(|a: &Vec<usize>, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    subsets
}

/// `Σ_{j∈J} R_j < I(V_J; Y | C, V_{J^c})` for message variables `V` and conditioning `C`.
fn subset_constraints(law: &JointLaw, vars: &[usize], cond: &[usize]) -> Vec<Constraint> {
    ordered_subsets(vars.len())
        .into_iter()
        .map(|members| {
            let a: Vec<usize> = members.iter().map(|&j| vars[j]).collect();
            let mut c: Vec<usize> = cond.to_vec();
            c.extend((0..vars.len()).filter(|j| !members.contains(j)).map(|j| vars[j]));
            Constraint {
                label: set_label(&members, 1),
                bound: law.cmi(&a, &[law.y], &c),
                members,
            }
        })
        .collect()
}

/// Private-message constraints, conditioned on `U` when the law has one.
pub fn constraints_private(law: &JointLaw) -> Vec<Constraint> {
    let cond: Vec<usize> = law.u.into_iter().collect();
    subset_constraints(law, &law.x, &cond)
}

/// Han constraints over the auxiliary messages.
pub fn constraints_han(law: &JointLaw) -> Vec<Constraint> {
    subset_constraints(law, &law.xt, &[])
}

/// Superposition constraints in the order R1, R2, R1+R2, R0+R1+R2, then the
/// three auxiliary ones R0, R0+R1, R0+R2.
pub fn constraints_sw(law: &JointLaw, include_aux: bool) -> Result<Vec<Constraint>> {
    let x0 = law
        .x0
        .ok_or_else(|| Error::Invalid("superposition region needs a law with X0".into()))?;
    let (x1, x2, y) = (law.x[0], law.x[1], law.y);
    let c = |label: &str, members: Vec<usize>, bound: f64| Constraint {
        label: label.into(),
        members,
        bound,
    };
    let mut out = vec![
        c("R1", vec![1], law.cmi(&[x1], &[y], &[x0, x2])),
        c("R2", vec![2], law.cmi(&[x2], &[y], &[x0, x1])),
        c("R1+R2", vec![1, 2], law.cmi(&[x1, x2], &[y], &[x0])),
        c("R0+R1+R2", vec![0, 1, 2], law.cmi(&[x1, x2], &[y], &[])),
    ];
    if include_aux {
        out.extend([
            c("R0 (aux)", vec![0], law.cmi(&[x0], &[x1, x2, y], &[])),
            c("R0+R1 (aux)", vec![0, 1], law.cmi(&[x0, x1], &[x2, y], &[])),
            c("R0+R2 (aux)", vec![0, 2], law.cmi(&[x0, x2], &[x1, y], &[])),
        ]);
    }
    Ok(out)
}

fn check_len(r: &[f64], k: usize) -> Result<()> {
    if r.len() != k {
        return Err(Error::Dimension {
            what: "rate vector length",
            expected: k,
            got: r.len(),
        });
    }
    Ok(())
}

/// First violated constraint with per-message margins added to the left side
/// and a common slack subtracted from every bound.
pub fn first_violation(r: &[f64], cons: &[Constraint], margins: &[f64], slack: f64) -> Option<Violation> {
    if let Some(j) = (0..r.len()).find(|&j| !(r[j] >= 0.0)) {
        return Some(Violation {
            label: format!("R{} >= 0", j),
            lhs: r[j],
            bound: 0.0,
        });
    }
    for c in cons {
        let lhs: f64 = c
            .members
            .iter()
            .map(|&j| r[j] + margins.get(j).copied().unwrap_or(0.0))
            .sum();
        let bound = c.bound - slack;
        if !(lhs < bound) {
            return Some(Violation {
                label: c.label.clone(),
                lhs,
                bound,
            });
        }
    }
    None
}

/// Membership in the private region `Σ_J R_j < I(X_J;Y|X_{J^c})`.
pub fn in_region_private(r: &[f64], law: &JointLaw) -> Result<Verdict> {
    check_len(r, law.x.len())?;
    Ok(Verdict::from(first_violation(r, &constraints_private(law), &[], 0.0)))
}

/// Membership in the time-shared region `Σ_J R_j < I(X_J;Y|U,X_{J^c})`.
pub fn in_region_ts(r: &[f64], law: &JointLaw) -> Result<Verdict> {
    in_region_private(r, law)
}

/// Membership in the Han region over the auxiliary messages.
pub fn in_region_han(r: &[f64], law: &JointLaw) -> Result<Verdict> {
    check_len(r, law.xt.len())?;
    Ok(Verdict::from(first_violation(r, &constraints_han(law), &[], 0.0)))
}

/// Membership in the superposition region, optionally with the auxiliary conditions.
pub fn in_region_sw(r: &[f64], law: &JointLaw, include_aux: bool) -> Result<Verdict> {
    check_len(r, 3)?;
    Ok(Verdict::from(first_violation(r, &constraints_sw(law, include_aux)?, &[], 0.0)))
}

/// Region test with margins `ε_j` and the derived slack `ε` at block length `n`.
pub fn eps_feasible(r: &[f64], law: &JointLaw, eps: &[f64], n: usize) -> Result<bool> {
    Ok(eps_verdict(r, law, eps, n)?.inside)
}

/// As [`eps_feasible`], with the witness.
pub fn eps_verdict(r: &[f64], law: &JointLaw, eps: &[f64], n: usize) -> Result<Verdict> {
    let vars = law.message_vars();
    check_len(r, vars.len())?;
    check_len(eps, vars.len())?;
    let x_size: usize = vars.iter().map(|&v| law.size(v)).product();
    let w_size = law.size(law.y) * law.u.map_or(1, |u| law.size(u));
    let slack = derived_epsilon(eps, n, x_size, w_size)?;
    let cons = match law.kind {
        LawKind::SlepianWolf => constraints_sw(law, true)?,
        LawKind::Han => constraints_han(law),
        _ => constraints_private(law),
    };
    Ok(Verdict::from(first_violation(r, &cons, eps, slack)))
}

/// Output of [`rate_split`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSplit {
    /// Transformed triple `(R'_0 - s_1 - s_2, R'_1 + s_1, R'_2 + s_2)`.
    pub rates: [f64; 3],
    /// `(R''_1, R''_2)`.
    pub split: [f64; 2],
    pub method: SplitMethod,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMethod {
    /// `R'` already satisfied the auxiliary conditions.
    None,
    /// Center of the feasible polygon, rounded to the dyadic grid.
    Center,
    /// Coarse grid fallback.
    Grid,
}

/// Grid used to round the split so the inverse map stays exact.
pub const SPLIT_QUANTUM: f64 = 1.0 / (1u64 << 20) as f64;

/// Grid step of the fallback search, dyadic so the inverse map stays exact.
pub const SPLIT_GRID_STEP: f64 = 1.0 / 1024.0;

/// Inverse bookkeeping: `(R_0 + s_1 + s_2, R_1 - s_1, R_2 - s_2)`.
pub fn unsplit(s: &RateSplit) -> [f64; 3] {
    let [r0, r1, r2] = s.rates;
    let [s1, s2] = s.split;
    [r0 + s1 + s2, r1 - s1, r2 - s2]
}

fn apply_split(rp: &[f64; 3], s1: f64, s2: f64) -> [f64; 3] {
    [rp[0] - s1 - s2, rp[1] + s1, rp[2] + s2]
}

fn split_ok(rp: &[f64; 3], s1: f64, s2: f64, cons: &[Constraint]) -> bool {
    let r = apply_split(rp, s1, s2);
    s1 >= 0.0 && s2 >= 0.0 && first_violation(&r, cons, &[], 0.0).is_none()
}

/// Moves rate from the private messages into the common one so the auxiliary
/// conditions hold.
pub fn rate_split(rp: &[f64], law: &JointLaw) -> Result<RateSplit> {
    check_len(rp, 3)?;
    let rp = [rp[0], rp[1], rp[2]];
    let base = in_region_sw(&rp, law, false)?;
    if let Some(w) = base.witness {
        return Err(Error::Infeasible(format!(
            "target is outside the superposition region: {} ({} >= {})",
            w.label, w.lhs, w.bound
        )));
    }
    let cons = constraints_sw(law, true)?;
    if split_ok(&rp, 0.0, 0.0, &cons) {
        return Ok(RateSplit {
            rates: rp,
            split: [0.0, 0.0],
            method: SplitMethod::None,
        });
    }
    if let Some((s1, s2)) = chebyshev_split(&rp, &cons) {
        let snap = |x: f64| (x / SPLIT_QUANTUM).floor() * SPLIT_QUANTUM;
        let (a, b) = (snap(s1), snap(s2));
        if split_ok(&rp, a, b, &cons) {
            return Ok(RateSplit {
                rates: apply_split(&rp, a, b),
                split: [a, b],
                method: SplitMethod::Center,
            });
        }
    }
    // fallback: best grid point by smallest constraint margin
    let steps = (rp[0] / SPLIT_GRID_STEP).floor() as usize;
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..=steps {
        for j in 0..=steps - i {
            let (s1, s2) = (i as f64 * SPLIT_GRID_STEP, j as f64 * SPLIT_GRID_STEP);
            if !split_ok(&rp, s1, s2, &cons) {
                continue;
            }
            let r = apply_split(&rp, s1, s2);
            let margin = cons
                .iter()
                .map(|c| c.bound - c.members.iter().map(|&m| r[m]).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            if best.map_or(true, |b| margin > b.2) {
                best = Some((s1, s2, margin));
            }
        }
    }
    match best {
        Some((s1, s2, _)) => Ok(RateSplit {
            rates: apply_split(&rp, s1, s2),
            split: [s1, s2],
            method: SplitMethod::Grid,
        }),
        None => Err(Error::Infeasible(
            "no rate split satisfies the auxiliary conditions".into(),
        )),
    }
}

/// Maximizes the common slack `t` of the strict constraints over the split
/// polygon by enumerating vertices of the 3-variable LP in `(s1, s2, t)`.
fn chebyshev_split(rp: &[f64; 3], cons: &[Constraint]) -> Option<(f64, f64)> {
    // rows a·(s1, s2, t) <= b
    let coef = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let mut rows: Vec<([f64; 3], f64)> = vec![
        ([-1.0, 0.0, 0.0], 0.0),
        ([0.0, -1.0, 0.0], 0.0),
        ([1.0, 1.0, 0.0], rp[0]),
        ([0.0, 0.0, 1.0], 1.0),
    ];
    for c in cons {
        let mut a = [0.0, 0.0, 1.0];
        let mut b = c.bound;
        for &m in &c.members {
            a[0] += coef[m][0];
            a[1] += coef[m][1];
            b -= rp[m];
        }
        rows.push((a, b));
    }
    let mut best: Option<(f64, f64, f64)> = None;
    let m = rows.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let Some(v) = solve3([rows[i].0, rows[j].0, rows[k].0], [rows[i].1, rows[j].1, rows[k].1])
                else {
                    continue;
                };
                let feasible = rows
                    .iter()
                    .all(|(a, b)| a[0] * v[0] + a[1] * v[1] + a[2] * v[2] <= b + 1e-12);
                if feasible && best.map_or(true, |bst| v[2] > bst.2) {
                    best = Some((v[0], v[1], v[2]));
                }
            }
        }
    }
    best.filter(|b| b.2 > 0.0).map(|b| (b.0.max(0.0), b.1.max(0.0)))
}

/// Cramer's rule for a 3x3 system; `None` when singular.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][col] = b[r];
        }
        *slot = det(m) / d;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adder_law() -> JointLaw {
        joint_private(&[Pmf::uniform(2), Pmf::uniform(2)], &Dmc::binary_adder()).unwrap()
    }

    #[test]
    fn private_law_numbers() {
        let xor = joint_private(&[Pmf::uniform(2), Pmf::uniform(2)], &Dmc::binary_xor()).unwrap();
        assert!((xor.table.entropy_of(&[2]) - 1.0).abs() < 1e-12);
        assert!(xor.cond_entropy(&[2], &[0, 1]).abs() < 1e-12);
        let add = adder_law();
        assert!((add.cmi(&[0], &[2], &[1]) - 1.0).abs() < 1e-12);
        assert!((add.cmi(&[0, 1], &[2], &[]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ts_with_constant_u_equals_private() {
        let dmc = Dmc::binary_adder();
        let mx = [Pmf::new(vec![0.3, 0.7]).unwrap(), Pmf::uniform(2)];
        let p = joint_private(&mx, &dmc).unwrap();
        let conds: Vec<CondPmf> = mx.iter().map(|m| CondPmf::constant(1, m)).collect();
        let t = joint_ts(&Pmf::uniform(1), &conds, &dmc).unwrap();
        assert_eq!(p.table.probs(), t.table.probs());
        let cp = constraints_private(&p);
        let ct = constraints_private(&t);
        for (a, b) in cp.iter().zip(&ct) {
            assert_eq!(a.label, b.label);
            assert!((a.bound - b.bound).abs() < 1e-12);
        }
    }

    #[test]
    fn sw_law_with_identical_inputs() {
        // X1 = X2 = X0 deterministic copies
        let copy = CondPmf::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let law = joint_sw(&Pmf::uniform(2), &copy, &copy, &Dmc::binary_adder()).unwrap();
        assert!(law.cmi(&[1], &[3], &[0, 2]).abs() < 1e-12);
    }

    #[test]
    fn region_examples() {
        let law = adder_law();
        assert!(in_region_private(&[0.5, 0.5], &law).unwrap().inside);
        let v = in_region_private(&[1.0, 1.0], &law).unwrap();
        assert!(!v.inside);
        let w = v.witness.unwrap();
        assert_eq!(w.label, "J={1,2}");
        assert!((w.bound - 1.5).abs() < 1e-12);
        assert!(in_region_private(&[0.0, 0.0], &law).unwrap().inside);
        let xor = joint_private(&[Pmf::uniform(2), Pmf::uniform(2)], &Dmc::binary_xor()).unwrap();
        assert!(!in_region_private(&[0.6, 0.6], &xor).unwrap().inside);
        assert!(in_region_private(&[0.5], &law).is_err());
    }

    #[test]
    fn eps_feasibility() {
        let law = adder_law();
        assert!(eps_feasible(&[0.25, 0.25], &law, &[1e-4, 1e-4], 1_000_000).unwrap());
        assert!(matches!(
            eps_feasible(&[0.25, 0.25], &law, &[0.05, 0.05], 512),
            Err(Error::SlackRange(_))
        ));
        // on the boundary of J={1}: R1 = 1
        assert!(!eps_feasible(&[1.0, 0.0], &law, &[1e-6, 1e-6], 1 << 30).unwrap());
    }

    #[test]
    fn han_identity_matches_private() {
        let dmc = Dmc::binary_adder();
        let mx = [Pmf::new(vec![0.4, 0.6]).unwrap(), Pmf::uniform(2)];
        let maps = [SymbolMap::identity(0, 2), SymbolMap::identity(1, 2)];
        let han = joint_han(&mx, &maps, &dmc).unwrap();
        let p = joint_private(&mx, &dmc).unwrap();
        for (a, b) in constraints_han(&han).iter().zip(constraints_private(&p).iter()) {
            assert_eq!(a.label, b.label);
            assert!((a.bound - b.bound).abs() < 1e-12);
        }
    }

    fn sw_law() -> JointLaw {
        let x1 = CondPmf::from_rows(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let x2 = CondPmf::from_rows(vec![vec![0.7, 0.3], vec![0.1, 0.9]]).unwrap();
        let dmc = Dmc::from_rows(
            vec![2, 2],
            2,
            vec![vec![0.9, 0.1], vec![0.3, 0.7], vec![0.4, 0.6], vec![0.05, 0.95]],
        )
        .unwrap();
        joint_sw(&Pmf::new(vec![0.45, 0.55]).unwrap(), &x1, &x2, &dmc).unwrap()
    }

    #[test]
    fn sw_sum_equals_full_mutual_information() {
        let law = sw_law();
        let a = law.cmi(&[1, 2], &[3], &[]);
        let b = law.cmi(&[0, 1, 2], &[3], &[]);
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn split_examples() {
        let law = sw_law();
        let s = rate_split(&[0.0, 0.01, 0.01], &law).unwrap();
        assert_eq!(s.split, [0.0, 0.0]);
        assert_eq!(s.method, SplitMethod::None);
        let total = law.cmi(&[1, 2], &[3], &[]);
        let rp = [total * 0.8, 0.0, 0.0];
        let s = rate_split(&rp, &law).unwrap();
        assert!(in_region_sw(&s.rates, &law, true).unwrap().inside);
        let back = unsplit(&s);
        for i in 0..3 {
            assert!((back[i] - rp[i]).abs() < 1e-12);
        }
        assert!(rate_split(&[total, 0.01, 0.01], &law).is_err());
    }
}
