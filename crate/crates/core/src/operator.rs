//! Site-local operators on qubit chains.
//!
//! Sites are 0-based and map to bits of the dense amplitude index
//! little-endian: site `k` is bit `k`. A [`LocalOperator`] on the span
//! `start..start + width` uses the same convention for its local index, so
//! the local basis state is `sum_t bit(start + t) << t`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::numerics::{c64, kron, re, CMatrix, C64};

/// Hard ceiling on the chain length for materialized `2^n x 2^n` operators.
pub const MAX_DENSE_OPERATOR_N: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    start: usize,
    width: usize,
    matrix: CMatrix,
}

impl LocalOperator {
    pub fn new(start: usize, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || !matrix.rows().is_power_of_two() || matrix.rows() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "local operator matrix must be 2^w x 2^w, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let width = matrix.rows().trailing_zeros() as usize;
        Ok(Self { start, width, matrix })
    }

    /// Tensor product of single-site factors, `factors[t]` acting on site
    /// `start + t`.
    pub fn from_site_factors(start: usize, factors: &[CMatrix]) -> Result<Self> {
        let mut iter = factors.iter().rev();
        let first = iter
            .next()
            .ok_or_else(|| Error::DimensionMismatch("no site factors given".into()))?
            .clone();
        let matrix = iter.try_fold(first, |acc, f| kron(&acc, f))?;
        Self::new(start, matrix)
    }

    pub fn single(site: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.rows() != 2 {
            return Err(Error::DimensionMismatch("single-site operator must be 2x2".into()));
        }
        Self::new(site, matrix)
    }

    /// Diagonal operator from its diagonal in local-index order.
    pub fn diagonal(start: usize, diag: &[f64]) -> Result<Self> {
        Self::new(start, CMatrix::from_real_diag(diag))
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn span(&self) -> Range<usize> {
        self.start..self.start + self.width
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn overlaps(&self, other: &LocalOperator) -> bool {
        self.start < other.start + other.width && other.start < self.start + self.width
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.max_off_diagonal() == 0.0
    }

    /// Applies the operator to a `2^n` amplitude vector.
    pub fn apply_to(&self, amps: &[C64], n: usize) -> Result<Vec<C64>> {
        if amps.len() != 1usize << n {
            return Err(Error::DimensionMismatch(format!(
                "state has {} amplitudes, expected 2^{n}",
                amps.len()
            )));
        }
        if self.start + self.width > n {
            return Err(Error::DimensionMismatch(format!(
                "operator span {:?} exceeds a chain of {n} sites",
                self.span()
            )));
        }
        let local_dim = 1usize << self.width;
        let mask = (local_dim - 1) << self.start;
        let mut out = vec![c64(0.0, 0.0); amps.len()];

        if self.is_diagonal() {
            let diag = self.matrix.diagonal();
            for (idx, (o, &a)) in out.iter_mut().zip(amps).enumerate() {
                *o = diag[(idx & mask) >> self.start] * a;
            }
            return Ok(out);
        }

        let mut local_in = vec![c64(0.0, 0.0); local_dim];
        for base in (0..amps.len()).filter(|b| b & mask == 0) {
            for (l, slot) in local_in.iter_mut().enumerate() {
                *slot = amps[base | (l << self.start)];
            }
            for r in 0..local_dim {
                let row = self.matrix.row(r);
                out[base | (r << self.start)] =
                    row.iter().zip(&local_in).map(|(&m, &v)| m * v).sum();
            }
        }
        Ok(out)
    }

    /// The operator embedded in the full `2^n`-dimensional space.
    pub fn embed(&self, n: usize) -> Result<CMatrix> {
        OperatorString::from(vec![self.clone()]).to_dense(n)
    }
}

/// Ordered operator product `ops[0] * ops[1] * ... * ops[k-1]`; the last
/// factor acts first.
#[derive(Clone, Debug, Default)]
pub struct OperatorString {
    ops: Vec<LocalOperator>,
}

impl From<Vec<LocalOperator>> for OperatorString {
    fn from(ops: Vec<LocalOperator>) -> Self {
        Self { ops }
    }
}

impl OperatorString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn factors(&self) -> &[LocalOperator] {
        &self.ops
    }

    /// Appends a factor on the right (it will act before all existing ones).
    pub fn push_right(&mut self, op: LocalOperator) {
        self.ops.push(op);
    }

    /// `self * other`.
    pub fn then(&self, other: &OperatorString) -> OperatorString {
        let mut ops = self.ops.clone();
        ops.extend(other.ops.iter().cloned());
        Self { ops }
    }

    pub fn apply_to(&self, amps: &[C64], n: usize) -> Result<Vec<C64>> {
        let mut v = amps.to_vec();
        for op in self.ops.iter().rev() {
            v = op.apply_to(&v, n)?;
        }
        Ok(v)
    }

    /// Materializes the `2^n x 2^n` matrix column by column.
    pub fn to_dense(&self, n: usize) -> Result<CMatrix> {
        if n > MAX_DENSE_OPERATOR_N {
            return Err(Error::InstanceTooLarge(format!(
                "dense operator on {n} sites exceeds the {MAX_DENSE_OPERATOR_N}-site cap"
            )));
        }
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        let mut e = vec![re(0.0); dim];
        for col in 0..dim {
            e[col] = re(1.0);
            let image = self.apply_to(&e, n)?;
            for (row, z) in image.into_iter().enumerate() {
                m[(row, col)] = z;
            }
            e[col] = re(0.0);
        }
        Ok(m)
    }
}
