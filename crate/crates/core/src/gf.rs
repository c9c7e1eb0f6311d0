//! Prime-field arithmetic, vectors and linear labeling functions.
//!
//! A [`LinearLabel`] is an `l x n` matrix over GF(q) viewed as a map
//! `A: GF(q)^n -> GF(q)^l`. Its cosets `C_A(a) = {u : Au = a}` are affine
//! subspaces, so they are enumerated from a particular solution plus a
//! nullspace basis instead of by scanning all of `GF(q)^n`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest number of candidate vectors any enumeration may visit.
pub const ENUMERATION_BUDGET: f64 = (1u64 << 24) as f64;

/// A prime field GF(q) with q in {2, 3, 5}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FieldSpec {
    q: u8,
}

impl TryFrom<u8> for FieldSpec {
    type Error = Error;
    fn try_from(q: u8) -> Result<Self> {
        FieldSpec::new(q)
    }
}

impl From<FieldSpec> for u8 {
    fn from(f: FieldSpec) -> u8 {
        f.q
    }
}

impl FieldSpec {
    pub const GF2: FieldSpec = FieldSpec { q: 2 };

    pub fn new(q: u8) -> Result<Self> {
        match q {
            2 | 3 | 5 => Ok(FieldSpec { q }),
            _ => Err(Error::UnsupportedField(q)),
        }
    }

    #[inline]
    pub fn q(self) -> u8 {
        self.q
    }

    #[inline]
    pub fn size(self) -> usize {
        self.q as usize
    }

    /// `log2 q`, the number of bits carried by one symbol.
    pub fn bits(self) -> f64 {
        (self.q as f64).log2()
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.q as u16) as u8
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        (self.q - a) % self.q
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(self, a: u8) -> u8 {
        debug_assert!(a % self.q != 0);
        (1..self.q).find(|&b| self.mul(a, b) == 1).unwrap_or(0)
    }

    /// Number of vectors in `GF(q)^n`, as a float so large powers do not overflow.
    pub fn space_size(self, n: usize) -> f64 {
        (self.q as f64).powi(n as i32)
    }
}

/// A vector over GF(q).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldVec {
    field: FieldSpec,
    elems: Vec<u8>,
}

impl fmt::Debug for FieldVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.elems)
    }
}

impl FieldVec {
    pub fn new(field: FieldSpec, elems: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = elems.iter().find(|&&e| e >= field.q) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad as usize,
                size: field.size(),
            });
        }
        Ok(FieldVec { field, elems })
    }

    /// Builds a vector reducing every entry mod q.
    pub fn from_residues(field: FieldSpec, elems: &[u64]) -> Self {
        FieldVec {
            field,
            elems: elems.iter().map(|&e| (e % field.q as u64) as u8).collect(),
        }
    }

    pub fn zeros(field: FieldSpec, n: usize) -> Self {
        FieldVec {
            field,
            elems: vec![0; n],
        }
    }

    /// The `index`-th vector of `GF(q)^n` in lexicographic order.
    pub fn from_index(field: FieldSpec, n: usize, mut index: u64) -> Self {
        let q = field.q as u64;
        let mut elems = vec![0u8; n];
        for slot in elems.iter_mut().rev() {
            *slot = (index % q) as u8;
            index /= q;
        }
        FieldVec { field, elems }
    }

    /// Inverse of [`FieldVec::from_index`].
    pub fn index(&self) -> u64 {
        let q = self.field.q as u64;
        self.elems.iter().fold(0, |acc, &e| acc * q + e as u64)
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[u8] {
        &self.elems
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.elems
    }

    /// Symbols widened to `usize`, the representation used by the types toolkit.
    pub fn symbols(&self) -> Vec<usize> {
        self.elems.iter().map(|&e| e as usize).collect()
    }

    pub fn weight(&self) -> usize {
        self.elems.iter().filter(|&&e| e != 0).count()
    }

    pub fn add(&self, other: &FieldVec) -> Result<FieldVec> {
        check_len("vector length", self.len(), other.len())?;
        let f = self.field;
        Ok(FieldVec {
            field: f,
            elems: self
                .elems
                .iter()
                .zip(&other.elems)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &FieldVec) -> Result<FieldVec> {
        check_len("vector length", self.len(), other.len())?;
        let f = self.field;
        Ok(FieldVec {
            field: f,
            elems: self
                .elems
                .iter()
                .zip(&other.elems)
                .map(|(&a, &b)| f.sub(a, b))
                .collect(),
        })
    }

    pub fn concat(&self, other: &FieldVec) -> FieldVec {
        let mut elems = self.elems.clone();
        elems.extend_from_slice(&other.elems);
        FieldVec {
            field: self.field,
            elems,
        }
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// Iterates `GF(q)^n` in lexicographic order, refusing spaces above the budget.
pub fn all_vectors(field: FieldSpec, n: usize) -> Result<impl Iterator<Item = FieldVec>> {
    let size = field.space_size(n);
    if size > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            needed: size,
            budget: ENUMERATION_BUDGET,
        });
    }
    let total = size as u64;
    Ok((0..total).map(move |i| FieldVec::from_index(field, n, i)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Storage {
    Dense(Vec<u8>),
    /// Per row, the `(column, value)` pairs of its nonzero entries.
    RowSparse(Vec<Vec<(usize, u8)>>),
}

/// An `l x n` matrix over GF(q) used as a labeling function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearLabel {
    field: FieldSpec,
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl LinearLabel {
    /// Dense matrix from row-major entries.
    pub fn from_rows(field: FieldSpec, rows: &[Vec<u8>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len("matrix row length", cols, row.len())?;
            for &e in row {
                if e >= field.q() {
                    return Err(Error::SymbolOutOfRange {
                        symbol: e as usize,
                        size: field.size(),
                    });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(LinearLabel {
            field,
            rows: rows.len(),
            cols,
            storage: Storage::Dense(data),
        })
    }

    pub(crate) fn from_dense(field: FieldSpec, rows: usize, cols: usize, data: Vec<u8>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        LinearLabel {
            field,
            rows,
            cols,
            storage: Storage::Dense(data),
        }
    }

    /// The `0 x n` label: every vector maps to the empty syndrome.
    pub fn empty(field: FieldSpec, cols: usize) -> Self {
        LinearLabel::from_dense(field, 0, cols, Vec::new())
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut data = vec![0u8; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        LinearLabel::from_dense(field, n, n, data)
    }

    /// Row-sparse matrix; entries with value zero are dropped.
    pub fn from_sparse(
        field: FieldSpec,
        rows: usize,
        cols: usize,
        entries: &[(usize, usize, u8)],
    ) -> Result<Self> {
        let mut sparse = vec![Vec::new(); rows];
        for &(r, c, v) in entries {
            if r >= rows {
                return Err(Error::Dimension {
                    what: "sparse row index",
                    expected: rows,
                    got: r,
                });
            }
            if c >= cols {
                return Err(Error::Dimension {
                    what: "sparse column index",
                    expected: cols,
                    got: c,
                });
            }
            let v = v % field.q();
            if v != 0 {
                sparse[r].push((c, v));
            }
        }
        for row in &mut sparse {
            row.sort_unstable();
            // merge duplicates by addition
            let mut merged: Vec<(usize, u8)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 = field.add(last.1, v),
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|&(_, v)| v != 0);
            *row = merged;
        }
        Ok(LinearLabel {
            field,
            rows,
            cols,
            storage: Storage::RowSparse(sparse),
        })
    }

    #[inline]
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::RowSparse(_))
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        match &self.storage {
            Storage::Dense(d) => d[r * self.cols + c],
            Storage::RowSparse(s) => s[r]
                .iter()
                .find(|&&(col, _)| col == c)
                .map(|&(_, v)| v)
                .unwrap_or(0),
        }
    }

    /// Row-major dense copy of the entries.
    pub fn to_dense(&self) -> Vec<u8> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::RowSparse(s) => {
                let mut d = vec![0u8; self.rows * self.cols];
                for (r, row) in s.iter().enumerate() {
                    for &(c, v) in row {
                        d[r * self.cols + c] = v;
                    }
                }
                d
            }
        }
    }

    /// Same matrix with dense storage.
    pub fn densify(&self) -> LinearLabel {
        LinearLabel::from_dense(self.field, self.rows, self.cols, self.to_dense())
    }

    /// Nonzero count per column.
    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0usize; self.cols];
        let d = self.to_dense();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if d[r * self.cols + c] != 0 {
                    w[c] += 1;
                }
            }
        }
        w
    }

    /// `Au` over GF(q).
    pub fn apply(&self, u: &FieldVec) -> Result<FieldVec> {
        check_len("label input length", self.cols, u.len())?;
        Ok(FieldVec {
            field: self.field,
            elems: self.apply_raw(u.as_slice()),
        })
    }

    /// `Au` on raw residues; `u.len()` must equal `cols`.
    pub fn apply_raw(&self, u: &[u8]) -> Vec<u8> {
        let f = self.field;
        let q = f.q() as u32;
        match &self.storage {
            Storage::Dense(d) => (0..self.rows)
                .map(|r| {
                    let row = &d[r * self.cols..(r + 1) * self.cols];
                    let s: u32 = row
                        .iter()
                        .zip(u)
                        .map(|(&a, &b)| a as u32 * b as u32)
                        .sum();
                    (s % q) as u8
                })
                .collect(),
            Storage::RowSparse(s) => s
                .iter()
                .map(|row| {
                    let acc: u32 = row.iter().map(|&(c, v)| v as u32 * u[c] as u32).sum();
                    (acc % q) as u8
                })
                .collect(),
        }
    }

    /// Number of possible labels, `|Im A| = q^l` for the codomain.
    pub fn image_size(&self) -> f64 {
        self.field.space_size(self.rows)
    }

    /// Rank over GF(q) by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.to_dense();
        row_reduce(self.field, &mut m, self.rows, self.cols, self.cols).len()
    }

    /// `C_A(a) = {u : Au = a}` as an affine subspace, `None` when `a` is not in the image.
    pub fn solve(&self, a: &FieldVec) -> Result<Option<AffineSpace>> {
        check_len("syndrome length", self.rows, a.len())?;
        Ok(solve_system(
            self.field,
            &self.to_dense(),
            self.rows,
            self.cols,
            a.as_slice(),
        ))
    }
}

/// Stacks two labels: `Â u = (A u, A' u)`.
pub fn stack_labels(a: &LinearLabel, b: &LinearLabel) -> Result<LinearLabel> {
    check_len("stacked label columns", a.cols, b.cols)?;
    if a.field != b.field {
        return Err(Error::Invalid("stacked labels over different fields".into()));
    }
    let mut data = a.to_dense();
    data.extend(b.to_dense());
    Ok(LinearLabel::from_dense(
        a.field,
        a.rows + b.rows,
        a.cols,
        data,
    ))
}

/// Applies a label.
pub fn apply_label(a: &LinearLabel, u: &FieldVec) -> Result<FieldVec> {
    a.apply(u)
}

/// Lists `C_A(a)` in lexicographic order.
///
/// The contract bounds the ambient space `q^n` by [`ENUMERATION_BUDGET`],
/// although the members are produced from the solution space directly.
pub fn enumerate_coset(a: &LinearLabel, syndrome: &FieldVec) -> Result<Vec<FieldVec>> {
    let size = a.field.space_size(a.cols);
    if size > ENUMERATION_BUDGET {
        return Err(Error::Budget {
            needed: size,
            budget: ENUMERATION_BUDGET,
        });
    }
    let mut out: Vec<FieldVec> = match a.solve(syndrome)? {
        None => Vec::new(),
        Some(space) => space.iter().collect(),
    };
    out.sort();
    Ok(out)
}

/// An affine subspace `particular + span(basis)` of `GF(q)^n`.
#[derive(Clone, Debug)]
pub struct AffineSpace {
    field: FieldSpec,
    particular: Vec<u8>,
    basis: Vec<Vec<u8>>,
}

impl AffineSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn len(&self) -> f64 {
        self.field.space_size(self.basis.len())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ambient_dim(&self) -> usize {
        self.particular.len()
    }

    /// All members; order follows the coefficient vectors, not the members.
    pub fn iter(&self) -> impl Iterator<Item = FieldVec> + '_ {
        let field = self.field;
        self.raw_iter().map(move |v| FieldVec { field, elems: v })
    }

    /// Members as raw residue vectors.
    pub fn raw_iter(&self) -> AffineIter<'_> {
        AffineIter {
            space: self,
            coeffs: vec![0u8; self.basis.len()],
            current: self.particular.clone(),
            done: false,
        }
    }

    /// The lexicographically smallest member.
    pub fn lex_min(&self) -> FieldVec {
        // basis from RREF: each basis vector has a 1 at its own free column and zeros
        // at other free columns, so the member is determined by free-column values.
        // Scan all when small; the dimension is tiny in practice.
        self.iter().min().expect("affine space is nonempty")
    }
}

pub struct AffineIter<'a> {
    space: &'a AffineSpace,
    coeffs: Vec<u8>,
    current: Vec<u8>,
    done: bool,
}

impl Iterator for AffineIter<'_> {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        // odometer increment over coefficients; update `current` incrementally
        let f = self.space.field;
        let mut i = self.coeffs.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let b = &self.space.basis[i];
            for (c, &bv) in self.current.iter_mut().zip(b) {
                *c = f.add(*c, bv);
            }
            self.coeffs[i] += 1;
            if self.coeffs[i] < f.q() {
                break;
            }
            // wrapped: coefficient back to zero, current already restored (q additions)
            self.coeffs[i] = 0;
        }
        Some(out)
    }
}

/// Reduces `m` (rows x width, row-major) to reduced row echelon form using only the
/// first `pivot_cols` columns as pivot candidates. Returns the pivot columns in row order.
pub(crate) fn row_reduce(
    f: FieldSpec,
    m: &mut [u8],
    rows: usize,
    width: usize,
    pivot_cols: usize,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i * width + c] != 0) else {
            continue;
        };
        if p != r {
            for k in 0..width {
                m.swap(p * width + k, r * width + k);
            }
        }
        let inv = f.inv(m[r * width + c]);
        if inv != 1 {
            for k in 0..width {
                m[r * width + k] = f.mul(m[r * width + k], inv);
            }
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = m[i * width + c];
            if factor == 0 {
                continue;
            }
            for k in 0..width {
                let sub = f.mul(factor, m[r * width + k]);
                m[i * width + k] = f.sub(m[i * width + k], sub);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `M x = rhs` for a dense row-major `rows x cols` matrix.
pub(crate) fn solve_system(
    f: FieldSpec,
    matrix: &[u8],
    rows: usize,
    cols: usize,
    rhs: &[u8],
) -> Option<AffineSpace> {
    let width = cols + 1;
    let mut aug = vec![0u8; rows * width];
    for r in 0..rows {
        aug[r * width..r * width + cols].copy_from_slice(&matrix[r * cols..(r + 1) * cols]);
        aug[r * width + cols] = rhs[r];
    }
    let pivots = row_reduce(f, &mut aug, rows, width, cols);
    // inconsistent if a zero row has nonzero rhs
    for r in pivots.len()..rows {
        if aug[r * width + cols] != 0 {
            return None;
        }
    }
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut particular = vec![0u8; cols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug[r * width + cols];
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0u8; cols];
        v[free] = 1;
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = f.neg(aug[r * width + free]);
        }
        basis.push(v);
    }
    Some(AffineSpace {
        field: f,
        particular,
        basis,
    })
}
