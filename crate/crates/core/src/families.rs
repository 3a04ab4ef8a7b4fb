//! The cluster state, the bond-dimension-2 theta family and the
//! bond-dimension-4 direct-sum family, plus an independent dense builder
//! that prepares the same states with diagonal two-qubit entanglers.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mps::{DenseState, MpsState, SiteTensor};
use crate::numerics::{re, CMatrix, CVector, C64};
use crate::operator::LocalOperator;

const SINGULAR_TOL: f64 = 1e-12;

/// Bond-dimension-2 family with site-dependent angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaFamilySpec {
    pub n: usize,
    pub thetas: Vec<f64>,
    /// `(a_L, b_L)`.
    pub left: [C64; 2],
    /// `(a_R, b_R)`.
    pub right: [C64; 2],
}

impl ThetaFamilySpec {
    pub fn new(thetas: Vec<f64>, left: [C64; 2], right: [C64; 2]) -> Result<Self> {
        let spec = Self { n: thetas.len(), thetas, left, right };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(n: usize, theta: f64, left: [C64; 2], right: [C64; 2]) -> Result<Self> {
        Self::new(vec![theta; n], left, right)
    }

    /// Boundaries making both end qubits `|+>` in the entangler picture:
    /// `(a_L, b_L) = (1, 1)` and `(a_R, b_R)` chosen so that `x1 = x2 = 1`.
    pub fn symmetric(thetas: Vec<f64>) -> Result<Self> {
        let (s, c) = thetas.last().copied().unwrap_or(0.0).sin_cos();
        Self::new(thetas, [re(1.0), re(1.0)], [re(c + s), re(s - c)])
    }

    /// Cluster-state boundaries `<R| = <0|`, `|L> = sqrt(2)|+>`.
    pub fn cluster(n: usize) -> Result<Self> {
        Self::uniform(n, FRAC_PI_4, [re(1.0), re(1.0)], [re(1.0), re(0.0)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("n must be at least 2, got {}", self.n)));
        }
        if self.thetas.len() != self.n {
            return Err(Error::InvalidSpec(format!(
                "{} thetas for n = {}",
                self.thetas.len(),
                self.n
            )));
        }
        if self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        check_boundary("left", &self.left)?;
        check_boundary("right", &self.right)
    }

    /// Output-qubit amplitudes `(x1, x2)` after absorbing `<R|` into the
    /// last site.
    pub fn x12(&self) -> (C64, C64) {
        let (s, c) = self.thetas[self.n - 1].sin_cos();
        let [a, b] = self.right;
        (a * c + b * s, a * s - b * c)
    }
}

/// Direct sum of a cluster block and a junk block, bond dimension 4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumFamilySpec {
    pub n: usize,
    pub gammas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `(a_L, b_L, c_L, d_L)`; two entries leave the junk part at `(1, 0)`.
    pub left: Vec<C64>,
    /// `(a_R, b_R, c_R, d_R)`.
    pub right: Vec<C64>,
}

impl SumFamilySpec {
    pub fn new(gammas: Vec<f64>, deltas: Vec<f64>, left: Vec<C64>, right: Vec<C64>) -> Result<Self> {
        let spec = Self { n: gammas.len(), gammas, deltas, left, right };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidSpec(format!("n must be at least 2, got {}", self.n)));
        }
        if self.gammas.len() != self.n || self.deltas.len() != self.n {
            return Err(Error::InvalidSpec(format!(
                "{} gammas and {} deltas for n = {}",
                self.gammas.len(),
                self.deltas.len(),
                self.n
            )));
        }
        if self.gammas.iter().chain(&self.deltas).any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        if self.left.len() != 2 && self.left.len() != 4 {
            return Err(Error::InvalidSpec("left boundary needs 2 or 4 entries".into()));
        }
        if self.right.len() != 4 {
            return Err(Error::InvalidSpec("right boundary needs 4 entries".into()));
        }
        check_boundary("left", &self.left_full())?;
        check_boundary("right", &self.right)
    }

    pub fn left_full(&self) -> [C64; 4] {
        match self.left.as_slice() {
            &[a, b, c, d] => [a, b, c, d],
            &[a, b] => [a, b, re(1.0), re(0.0)],
            _ => [re(0.0); 4],
        }
    }

    /// Cluster-sector output amplitudes `(x1, x2) = (a_R + b_R, a_R - b_R)`.
    pub fn x12(&self) -> (C64, C64) {
        (self.right[0] + self.right[1], self.right[0] - self.right[1])
    }

    /// Junk-sector output amplitudes.
    pub fn x34(&self) -> (C64, C64) {
        let (c, d) = (self.right[2], self.right[3]);
        let (g, dl) = (self.gammas[self.n - 1], self.deltas[self.n - 1]);
        (
            (c * g.cos() + d * g.sin()) * SQRT_2,
            (c * dl.sin() + d * dl.cos()) * SQRT_2,
        )
    }
}

fn check_boundary(name: &str, v: &[C64]) -> Result<()> {
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if v.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::InvalidSpec(format!("{name} boundary vector is zero")));
    }
    Ok(())
}

/// Any of the three families, tagged by `"family"` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    Cluster(ClusterSpec),
    Theta(ThetaFamilySpec),
    DirectSum(SumFamilySpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub n: usize,
}

impl FamilySpec {
    pub fn n(&self) -> usize {
        match self {
            Self::Cluster(c) => c.n,
            Self::Theta(t) => t.n,
            Self::DirectSum(s) => s.n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Cluster(c) => ThetaFamilySpec::cluster(c.n).map(|_| ()),
            Self::Theta(t) => t.validate(),
            Self::DirectSum(s) => s.validate(),
        }
    }

    pub fn build_mps(&self) -> Result<MpsState> {
        match self {
            Self::Cluster(c) => cluster_mps(c.n),
            Self::Theta(t) => theta_family_mps(t),
            Self::DirectSum(s) => direct_sum_mps(s),
        }
    }

    /// The theta-family view, when one exists (cluster included).
    pub fn as_theta(&self) -> Option<ThetaFamilySpec> {
        match self {
            Self::Cluster(c) => ThetaFamilySpec::cluster(c.n).ok(),
            Self::Theta(t) => Some(t.clone()),
            Self::DirectSum(_) => None,
        }
    }
}

/// `B[0] = |u0><0|`, `B[1] = |u1><1|` with `u0 = (cos, sin)`, `u1 = (sin, -cos)`.
pub fn theta_site(theta: f64) -> SiteTensor {
    let (s, c) = theta.sin_cos();
    SiteTensor {
        b0: CMatrix::from_real_rows(&[[c, 0.0], [s, 0.0]]),
        b1: CMatrix::from_real_rows(&[[0.0, s], [0.0, -c]]),
    }
}

/// Cluster block at `theta = pi/4` plus the `(gamma, delta)` junk block.
pub fn direct_sum_site(gamma: f64, delta: f64) -> SiteTensor {
    let h = FRAC_1_SQRT_2;
    let (p, r) = (gamma.cos(), gamma.sin());
    let (q, s) = (delta.sin(), delta.cos());
    SiteTensor {
        b0: CMatrix::from_real_rows(&[
            [h, 0.0, 0.0, 0.0],
            [h, 0.0, 0.0, 0.0],
            [0.0, 0.0, p, 0.0],
            [0.0, 0.0, r, 0.0],
        ]),
        b1: CMatrix::from_real_rows(&[
            [0.0, h, 0.0, 0.0],
            [0.0, -h, 0.0, 0.0],
            [0.0, 0.0, 0.0, q],
            [0.0, 0.0, 0.0, s],
        ]),
    }
}

pub fn cluster_mps(n: usize) -> Result<MpsState> {
    theta_family_mps(&ThetaFamilySpec::cluster(n)?)
}

pub fn theta_family_mps(spec: &ThetaFamilySpec) -> Result<MpsState> {
    spec.validate()?;
    MpsState::new(
        spec.thetas.iter().map(|&t| theta_site(t)).collect(),
        CVector::from_vec(spec.left.to_vec()),
        CVector::from_vec(spec.right.to_vec()),
    )
}

pub fn direct_sum_mps(spec: &SumFamilySpec) -> Result<MpsState> {
    spec.validate()?;
    MpsState::new(
        spec.gammas.iter().zip(&spec.deltas).map(|(&g, &d)| direct_sum_site(g, d)).collect(),
        CVector::from_vec(spec.left_full().to_vec()),
        CVector::from_vec(spec.right.clone()),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntanglerKind {
    /// `sqrt(2) diag(cos, sin, sin, -cos)`.
    CTheta(f64),
    /// `sqrt(2) diag(cos g, sin d, sin g, cos d)`.
    CGammaDelta(f64, f64),
    /// `diag(cot, tan, tan, cot)`.
    PTheta(f64),
}

/// Diagonal two-qubit operator on sites `(j, j + 1)`. Diagonal entries are
/// listed in local-index order `i_j + 2 i_{j+1}`.
pub fn local_entangler(kind: EntanglerKind, j: usize) -> Result<LocalOperator> {
    let diag = match kind {
        EntanglerKind::CTheta(t) => {
            let (s, c) = t.sin_cos();
            [c, s, s, -c].map(|x| x * SQRT_2)
        }
        EntanglerKind::CGammaDelta(g, d) => {
            [g.cos(), d.sin(), g.sin(), d.cos()].map(|x| x * SQRT_2)
        }
        EntanglerKind::PTheta(t) => {
            let (s, c) = t.sin_cos();
            if s.abs() < SINGULAR_TOL || c.abs() < SINGULAR_TOL {
                return Err(Error::SingularTheta(t));
            }
            [c / s, s / c, s / c, c / s]
        }
    };
    LocalOperator::diagonal(j, &diag)
}

fn plus_product(n: usize, last: (C64, C64), first: (C64, C64)) -> Result<DenseState> {
    let plus = [re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)];
    let mut qubits = vec![plus; n];
    qubits[0] = [first.0, first.1];
    qubits[n - 1] = [last.0, last.1];
    DenseState::product(&qubits)
}

fn entangle(mut state: DenseState, kinds: impl Iterator<Item = EntanglerKind>) -> Result<DenseState> {
    for (j, kind) in kinds.enumerate() {
        state = state.apply(&local_entangler(kind, j)?)?;
    }
    Ok(state)
}

/// Dense state prepared by diagonal entanglers on a product state; an
/// oracle independent of the MPS contraction.
pub fn build_dense_reference(spec: &FamilySpec) -> Result<DenseState> {
    match spec {
        FamilySpec::Cluster(_) | FamilySpec::Theta(_) => {
            let t = spec.as_theta().ok_or_else(|| Error::InvalidSpec("bad spec".into()))?;
            theta_dense_reference(&t)
        }
        FamilySpec::DirectSum(s) => sum_dense_reference(s),
    }
}

pub fn theta_dense_reference(spec: &ThetaFamilySpec) -> Result<DenseState> {
    spec.validate()?;
    let psi = plus_product(spec.n, spec.x12(), (spec.left[0], spec.left[1]))?;
    entangle(psi, spec.thetas[..spec.n - 1].iter().map(|&t| EntanglerKind::CTheta(t)))
}

pub fn sum_dense_reference(spec: &SumFamilySpec) -> Result<DenseState> {
    spec.validate()?;
    let [a_l, b_l, c_l, d_l] = spec.left_full();
    let n = spec.n;
    let psi1 = entangle(
        plus_product(n, spec.x12(), (a_l, b_l))?,
        (0..n - 1).map(|_| EntanglerKind::CTheta(FRAC_PI_4)),
    )?;
    let psi2 = entangle(
        plus_product(n, spec.x34(), (c_l, d_l))?,
        (0..n - 1).map(|j| EntanglerKind::CGammaDelta(spec.gammas[j], spec.deltas[j])),
    )?;
    DenseState::new(n, psi1.amplitudes() + psi2.amplitudes())
}

/// Default junk-free boundaries for tests and examples: cluster-sector
/// boundaries of the cluster state and a junk sector fed by `(1, 0)`.
pub fn sum_spec_with(gammas: Vec<f64>, deltas: Vec<f64>, junk_right: [C64; 2]) -> Result<SumFamilySpec> {
    SumFamilySpec::new(
        gammas,
        deltas,
        vec![re(1.0), re(1.0), re(1.0), re(0.0)],
        vec![re(1.0), re(0.0), junk_right[0], junk_right[1]],
    )
}
