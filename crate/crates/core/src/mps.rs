//! Open-boundary matrix product states.
//!
//! The amplitude of the bitstring `i_1 ... i_n` is
//! `<R| B_n[i_n] ... B_1[i_1] |L>`. Bit `k` of a dense index is the physical
//! index of site `k` (0-based), i.e. qubit `k + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, eig_general_small, kron, state_fidelity, CMatrix, CVector, C64};
use crate::operator::LocalOperator;

/// Default cap on the number of sites expanded into a dense vector.
pub const DEFAULT_MAX_DENSE_N: usize = 14;
/// Absolute ceiling regardless of the environment override.
pub const HARD_MAX_DENSE_N: usize = 24;
/// Environment variable overriding [`DEFAULT_MAX_DENSE_N`].
pub const MAX_DENSE_ENV: &str = "MBQT_MAX_DENSE_N";

/// Largest `n` allowed for dense expansion.
pub fn max_dense_n() -> usize {
    std::env::var(MAX_DENSE_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(HARD_MAX_DENSE_N))
        .unwrap_or(DEFAULT_MAX_DENSE_N)
}

fn check_dense_cap(n: usize) -> Result<()> {
    let cap = max_dense_n();
    if n > cap {
        return Err(Error::InstanceTooLarge(format!(
            "dense expansion of {n} sites exceeds the cap of {cap} (set {MAX_DENSE_ENV} to change)"
        )));
    }
    Ok(())
}

/// The matrix pair `(B[0], B[1])` of one site, shape `D_out x D_in`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    pub b0: CMatrix,
    pub b1: CMatrix,
}

impl SiteTensor {
    pub fn new(b0: CMatrix, b1: CMatrix) -> Result<Self> {
        if b0.rows() != b1.rows() || b0.cols() != b1.cols() {
            return Err(Error::DimensionMismatch(format!(
                "B0 is {}x{} but B1 is {}x{}",
                b0.rows(),
                b0.cols(),
                b1.rows(),
                b1.cols()
            )));
        }
        Ok(Self { b0, b1 })
    }

    pub fn get(&self, i: u8) -> &CMatrix {
        if i == 0 {
            &self.b0
        } else {
            &self.b1
        }
    }

    pub fn d_out(&self) -> usize {
        self.b0.rows()
    }

    pub fn d_in(&self) -> usize {
        self.b0.cols()
    }

    /// `sum_i B[i]^dagger B[i]`.
    pub fn gram(&self) -> CMatrix {
        &self.b0.adjoint().matmul(&self.b0) + &self.b1.adjoint().matmul(&self.b1)
    }

    /// `sum_i conj(B[i]) (x) B[i]`.
    pub fn transfer(&self) -> Result<CMatrix> {
        Ok(&kron(&self.b0.conj(), &self.b0)? + &kron(&self.b1.conj(), &self.b1)?)
    }

    fn max_abs_diff(&self, other: &SiteTensor) -> f64 {
        if self.d_out() != other.d_out() || self.d_in() != other.d_in() {
            return f64::INFINITY;
        }
        (&self.b0 - &other.b0).max_abs().max((&self.b1 - &other.b1).max_abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    sites: Vec<SiteTensor>,
    left: CVector,
    right: CVector,
}

impl MpsState {
    pub fn new(sites: Vec<SiteTensor>, left: CVector, right: CVector) -> Result<Self> {
        if sites.len() < 2 {
            return Err(Error::InvalidSpec(format!("an MPS needs at least 2 sites, got {}", sites.len())));
        }
        if left.dim() != sites[0].d_in() {
            return Err(Error::DimensionMismatch(format!(
                "left boundary has dim {} but site 0 expects {}",
                left.dim(),
                sites[0].d_in()
            )));
        }
        for (k, pair) in sites.windows(2).enumerate() {
            if pair[1].d_in() != pair[0].d_out() {
                return Err(Error::DimensionMismatch(format!(
                    "bond between sites {k} and {}: {} vs {}",
                    k + 1,
                    pair[0].d_out(),
                    pair[1].d_in()
                )));
            }
        }
        let last = sites.last().map(SiteTensor::d_out).unwrap_or(0);
        if right.dim() != last {
            return Err(Error::DimensionMismatch(format!(
                "right boundary has dim {} but the last site emits {last}",
                right.dim()
            )));
        }
        Ok(Self { sites, left, right })
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &SiteTensor {
        &self.sites[k]
    }

    pub fn left(&self) -> &CVector {
        &self.left
    }

    /// Components of the bra `<R|` (used as-is, not conjugated).
    pub fn right(&self) -> &CVector {
        &self.right
    }

    /// The common bond dimension, if every bond has the same size.
    pub fn bond_dim(&self) -> Option<usize> {
        let d = self.left.dim();
        self.sites
            .iter()
            .all(|s| s.d_in() == d && s.d_out() == d)
            .then_some(d)
    }

    pub fn amplitude(&self, bits: &[u8]) -> Result<C64> {
        if bits.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "bitstring of length {} for an MPS of {} sites",
                bits.len(),
                self.n()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidSpec("bits must be 0 or 1".into()));
        }
        let mut v = self.left.clone();
        for (site, &b) in self.sites.iter().zip(bits) {
            v = site.get(b).apply(&v);
        }
        Ok(self.right.as_slice().iter().zip(v.as_slice()).map(|(&r, &x)| r * x).sum())
    }

    /// Amplitude of a dense basis index.
    pub fn amplitude_index(&self, index: usize) -> Result<C64> {
        let bits: Vec<u8> = (0..self.n()).map(|k| ((index >> k) & 1) as u8).collect();
        self.amplitude(&bits)
    }

    pub fn to_dense(&self) -> Result<DenseState> {
        contract_dense(&self.sites, &self.left, &self.right)
    }

    pub fn check_left_canonical(&self, tol: f64) -> CanonicalReport {
        let residuals: Vec<f64> = self
            .sites
            .iter()
            .map(|s| {
                let g = s.gram();
                if g.is_square() {
                    (&g - &CMatrix::identity(g.rows())).frobenius_norm()
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let passed = residuals.iter().all(|&r| r <= tol);
        CanonicalReport { residuals, tol, passed }
    }

    pub fn transfer_matrix(&self, k: usize) -> Result<CMatrix> {
        self.sites
            .get(k)
            .ok_or_else(|| Error::InvalidSpec(format!("site {k} out of range 0..{}", self.n())))?
            .transfer()
    }

    /// Spectrum of the (site-independent) transfer matrix and the implied
    /// correlation length.
    pub fn correlation_length(&self) -> Result<TransferAnalysis> {
        let first = &self.sites[0];
        if self.sites.iter().any(|s| s.max_abs_diff(first) > UNIFORM_TOL) {
            return Err(Error::Unsupported(
                "correlation length is undefined for site-dependent MPS".into(),
            ));
        }
        TransferAnalysis::from_transfer(&first.transfer()?)
    }

    /// Same chain with the left boundary replaced.
    pub fn with_left(&self, left: CVector) -> Result<Self> {
        Self::new(self.sites.clone(), left, self.right.clone())
    }
}

const UNIFORM_TOL: f64 = 1e-14;

/// Dense expansion of an arbitrary chain of site tensors (any length >= 1).
pub(crate) fn contract_dense(
    sites: &[SiteTensor],
    left: &CVector,
    right: &CVector,
) -> Result<DenseState> {
    let n = sites.len();
    check_dense_cap(n)?;
    // prefix[idx] = B_k[i_k] ... B_1[i_1] |L> for the first k sites.
    let mut prefix = vec![left.clone()];
    for (k, site) in sites.iter().enumerate() {
        let mut next = Vec::with_capacity(prefix.len() * 2);
        next.extend(prefix.iter().map(|v| site.b0.apply(v)));
        next.extend(prefix.iter().map(|v| site.b1.apply(v)));
        debug_assert_eq!(next.len(), 1 << (k + 1));
        prefix = next;
    }
    let amps: Vec<C64> = prefix
        .iter()
        .map(|v| right.as_slice().iter().zip(v.as_slice()).map(|(&r, &x)| r * x).sum())
        .collect();
    DenseState::new(n, CVector::from_vec(amps))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalReport {
    pub residuals: Vec<f64>,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CorrelationLength {
    Finite(f64),
    /// `|lambda_1| >= 1 - 1e-12`.
    Diverging,
}

impl CorrelationLength {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(*x),
            Self::Diverging => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TransferAnalysis {
    /// Descending by modulus.
    pub eigenvalues: Vec<C64>,
    pub lambda1: C64,
    pub xi: CorrelationLength,
}

impl TransferAnalysis {
    pub fn from_transfer(t: &CMatrix) -> Result<Self> {
        let mut eigenvalues = eig_general_small(t)?;
        // A defective zero eigenvalue (Jordan block) is only resolved to about
        // sqrt(eps) * ||T||; anything below that is zero for our purposes.
        let zero_floor = f64::EPSILON.sqrt() * t.max_abs().max(1.0) * 4.0;
        for z in eigenvalues.iter_mut() {
            if z.norm() < zero_floor {
                *z = c64(0.0, 0.0);
            }
        }
        let lambda1 = eigenvalues.get(1).copied().unwrap_or(c64(0.0, 0.0));
        let m = lambda1.norm();
        let xi = if m >= 1.0 - 1e-12 {
            CorrelationLength::Diverging
        } else if m == 0.0 {
            CorrelationLength::Finite(0.0)
        } else {
            CorrelationLength::Finite(-1.0 / m.ln())
        };
        Ok(Self { eigenvalues, lambda1, xi })
    }
}

/// Full `2^n` amplitude vector, kept unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amplitudes: CVector,
    norm: f64,
}

impl DenseState {
    pub fn new(n: usize, amplitudes: CVector) -> Result<Self> {
        if amplitudes.dim() != 1usize << n {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n} qubits",
                amplitudes.dim()
            )));
        }
        if amplitudes.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.norm();
        Ok(Self { n, amplitudes, norm })
    }

    /// Product state from single-qubit vectors, `qubits[k]` on site `k`.
    pub fn product(qubits: &[[C64; 2]]) -> Result<Self> {
        let mut v = CVector::from_vec(vec![c64(1.0, 0.0)]);
        for q in qubits {
            v = CVector::from_vec(q.to_vec()).kron(&v);
        }
        Self::new(qubits.len(), v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn normalized(&self) -> Result<CVector> {
        self.amplitudes.normalized()
    }

    pub fn fidelity(&self, other: &DenseState) -> Result<f64> {
        state_fidelity(&self.amplitudes, &other.amplitudes)
    }

    pub fn apply(&self, op: &LocalOperator) -> Result<DenseState> {
        DenseState::new(self.n, CVector::from_vec(op.apply_to(self.amplitudes.as_slice(), self.n)?))
    }

    /// `<psi|O|psi> / <psi|psi>`.
    pub fn expectation(&self, op: &LocalOperator) -> Result<C64> {
        if self.norm == 0.0 {
            return Err(Error::DegenerateInput("expectation value in the zero state".into()));
        }
        let image = op.apply_to(self.amplitudes.as_slice(), self.n)?;
        Ok(self.amplitudes.inner(&CVector::from_vec(image)) / (self.norm * self.norm))
    }

    /// Contracts site `site` with the bra `(bra[0], bra[1])`, removing it.
    pub fn project_qubit(&self, site: usize, bra: [C64; 2]) -> Result<DenseState> {
        if site >= self.n || self.n < 2 {
            return Err(Error::InvalidSpec(format!("cannot project site {site} of {}", self.n)));
        }
        let low = (1usize << site) - 1;
        let out: Vec<C64> = (0..1usize << (self.n - 1))
            .map(|idx| {
                let base = (idx & low) | ((idx & !low) << 1);
                bra[0] * self.amplitudes[base] + bra[1] * self.amplitudes[base | (1 << site)]
            })
            .collect();
        DenseState::new(self.n - 1, CVector::from_vec(out))
    }
}

/// Connected correlator `<A B> - <A><B>` on the normalized state.
pub fn two_point_correlator(s: &DenseState, a: &LocalOperator, b: &LocalOperator) -> Result<C64> {
    if a.overlaps(b) {
        return Err(Error::ContractViolation(format!(
            "operators on overlapping spans {:?} and {:?}",
            a.span(),
            b.span()
        )));
    }
    let ab = s.apply(b)?.apply(a)?;
    if s.norm() == 0.0 {
        return Err(Error::DegenerateInput("correlator in the zero state".into()));
    }
    let joint = s.amplitudes().inner(ab.amplitudes()) / (s.norm() * s.norm());
    Ok(joint - s.expectation(a)? * s.expectation(b)?)
}

/// JSON form of an MPS: complex numbers as `[re, im]`, matrices row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MpsJson {
    pub n: usize,
    pub bond_dim: usize,
    pub sites: Vec<SiteJson>,
    pub left: Vec<[f64; 2]>,
    pub right: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SiteJson {
    #[serde(rename = "B0")]
    pub b0: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "B1")]
    pub b1: Vec<Vec<[f64; 2]>>,
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn unpairs(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[r, i]| c64(r, i)).collect()
}

fn matrix_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows()).map(|i| pairs(m.row(i))).collect()
}

fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidSpec("matrix rows must be non-empty and of equal length".into()));
    }
    CMatrix::from_vec(rows.len(), cols, rows.iter().flat_map(|r| unpairs(r)).collect())
}

impl From<&MpsState> for MpsJson {
    fn from(m: &MpsState) -> Self {
        Self {
            n: m.n(),
            bond_dim: m.bond_dim().unwrap_or_else(|| m.sites.iter().map(SiteTensor::d_out).max().unwrap_or(0)),
            sites: m
                .sites
                .iter()
                .map(|s| SiteJson { b0: matrix_json(&s.b0), b1: matrix_json(&s.b1) })
                .collect(),
            left: pairs(m.left.as_slice()),
            right: pairs(m.right.as_slice()),
        }
    }
}

impl TryFrom<&MpsJson> for MpsState {
    type Error = Error;

    fn try_from(j: &MpsJson) -> Result<Self> {
        if j.sites.len() != j.n {
            return Err(Error::InvalidSpec(format!("n = {} but {} sites given", j.n, j.sites.len())));
        }
        let sites = j
            .sites
            .iter()
            .map(|s| SiteTensor::new(matrix_from_json(&s.b0)?, matrix_from_json(&s.b1)?))
            .collect::<Result<Vec<_>>>()?;
        let left = CVector::try_from_vec(unpairs(&j.left))?;
        let right = CVector::try_from_vec(unpairs(&j.right))?;
        let m = MpsState::new(sites, left, right)?;
        if m.bond_dim() != Some(j.bond_dim) {
            return Err(Error::InvalidSpec(format!(
                "bond_dim {} does not match the site matrices",
                j.bond_dim
            )));
        }
        Ok(m)
    }
}

impl MpsState {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&MpsJson::from(self)).expect("MPS JSON serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: MpsJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidSpec(format!("MPS JSON: {e}")))?;
        MpsState::try_from(&j)
    }
}
