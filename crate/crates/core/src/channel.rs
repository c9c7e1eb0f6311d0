//! Discrete memoryless multiple-access channels.

use crate::error::{Error, Result};
use crate::types::Pmf;
use rand::Rng;

/// `μ_{Y|X_K}` with one output pmf per input tuple. Input tuples are flattened
/// with the first sender most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Dmc {
    input_sizes: Vec<usize>,
    output_size: usize,
    rows: Vec<Pmf>,
    cdfs: Vec<Vec<f64>>,
}

impl Dmc {
    pub fn new(input_sizes: Vec<usize>, output_size: usize, rows: Vec<Pmf>) -> Result<Self> {
        if input_sizes.is_empty() || input_sizes.contains(&0) || output_size == 0 {
            return Err(Error::Invalid("channel alphabets must be nonempty".into()));
        }
        let cells: usize = input_sizes.iter().product();
        if rows.len() != cells {
            return Err(Error::Dimension {
                what: "channel rows (one per input tuple)",
                expected: cells,
                got: rows.len(),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != output_size) {
            return Err(Error::Dimension {
                what: "channel row length",
                expected: output_size,
                got: r.len(),
            });
        }
        let cdfs = rows
            .iter()
            .map(|r| {
                let mut acc = 0.0;
                r.probs()
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Dmc {
            input_sizes,
            output_size,
            rows,
            cdfs,
        })
    }

    pub fn from_rows(input_sizes: Vec<usize>, output_size: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows.into_iter().map(Pmf::new).collect::<Result<_>>()?;
        Dmc::new(input_sizes, output_size, rows)
    }

    /// A channel whose output is a function of the inputs.
    pub fn deterministic(
        input_sizes: Vec<usize>,
        output_size: usize,
        f: impl Fn(&[usize]) -> usize,
    ) -> Result<Self> {
        let cells: usize = input_sizes.iter().product();
        let mut rows = Vec::with_capacity(cells);
        for idx in 0..cells {
            let xs = unflatten(idx, &input_sizes);
            let y = f(&xs);
            if y >= output_size {
                return Err(Error::SymbolOutOfRange {
                    symbol: y,
                    size: output_size,
                });
            }
            rows.push(Pmf::point(output_size, y));
        }
        Dmc::new(input_sizes, output_size, rows)
    }

    /// Binary adder `Y = X1 + X2` over the integers.
    pub fn binary_adder() -> Self {
        Dmc::deterministic(vec![2, 2], 3, |x| x[0] + x[1]).expect("valid table")
    }

    /// Binary xor `Y = X1 ⊕ X2`.
    pub fn binary_xor() -> Self {
        Dmc::deterministic(vec![2, 2], 2, |x| x[0] ^ x[1]).expect("valid table")
    }

    /// Noiseless pair `Y = (X1, X2)`, encoded as `q·X1 + X2`.
    pub fn noiseless_pair(q: usize) -> Self {
        Dmc::deterministic(vec![q, q], q * q, |x| x[0] * q + x[1]).expect("valid table")
    }

    #[inline]
    pub fn input_sizes(&self) -> &[usize] {
        &self.input_sizes
    }

    #[inline]
    pub fn senders(&self) -> usize {
        self.input_sizes.len()
    }

    #[inline]
    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn flatten(&self, xs: &[usize]) -> usize {
        xs.iter()
            .zip(&self.input_sizes)
            .fold(0, |acc, (&x, &s)| acc * s + x)
    }

    pub fn row(&self, xs: &[usize]) -> &Pmf {
        &self.rows[self.flatten(xs)]
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    /// `μ(y | x_K)`.
    pub fn p(&self, y: usize, xs: &[usize]) -> f64 {
        self.row(xs).p(y)
    }

    /// One output symbol by inverse CDF on the fixed symbol order.
    pub fn sample_symbol<R: Rng + ?Sized>(&self, xs: &[usize], rng: &mut R) -> usize {
        let cdf = &self.cdfs[self.flatten(xs)];
        let t: f64 = rng.gen();
        cdf.iter()
            .position(|&c| t < c)
            .unwrap_or_else(|| {
                // rounding left the last cumulative value just below 1
                self.rows[self.flatten(xs)]
                    .support()
                    .last()
                    .copied()
                    .unwrap_or(0)
            })
    }
}

pub(crate) fn unflatten(mut idx: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        out[k] = idx % sizes[k];
        idx /= sizes[k];
    }
    out
}

/// Draws `y` symbol by symbol from the memoryless extension.
pub fn sample_channel<R: Rng + ?Sized>(dmc: &Dmc, xs: &[&[usize]], rng: &mut R) -> Result<Vec<usize>> {
    if xs.len() != dmc.senders() {
        return Err(Error::Dimension {
            what: "number of channel inputs",
            expected: dmc.senders(),
            got: xs.len(),
        });
    }
    let n = xs[0].len();
    for (x, &size) in xs.iter().zip(dmc.input_sizes()) {
        if x.len() != n {
            return Err(Error::Dimension {
                what: "input sequence length",
                expected: n,
                got: x.len(),
            });
        }
        if let Some(&s) = x.iter().find(|&&s| s >= size) {
            return Err(Error::SymbolOutOfRange { symbol: s, size });
        }
    }
    let mut tuple = vec![0; xs.len()];
    Ok((0..n)
        .map(|i| {
            for (t, x) in tuple.iter_mut().zip(xs) {
                *t = x[i];
            }
            dmc.sample_symbol(&tuple, rng)
        })
        .collect())
}
