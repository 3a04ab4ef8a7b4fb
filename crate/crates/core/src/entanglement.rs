//! Entanglement spectrum across a cut of an MPS.
//!
//! The cut `ell` puts sites `0..ell` (the first `ell` qubits) on the left.
//! Three routes are provided: boundary covariance matrices contracted site by
//! site, the closed form for the theta family on bulk cuts, and the exact
//! reduced density matrix of a dense state.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::families::{FamilySpec, ThetaFamilySpec};
use crate::mps::{max_dense_n, DenseState, MpsState};
use crate::numerics::{eig_general_small, eig_hermitian, CMatrix, CVector, C64};

/// Negative eigenvalues above this are rounding and get clamped to zero.
pub const NEGATIVE_EIG_TOL: f64 = 1e-10;

/// Left and right covariance matrices for the cut after `cut` sites.
#[derive(Clone, Debug)]
pub struct CovariancePair {
    pub vl: CMatrix,
    pub vr: CMatrix,
    pub cut: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumResult {
    /// Eigenvalues of `V^R V^L`, descending, for the state as given.
    pub raw_eigenvalues: Vec<f64>,
    /// The same, divided by their sum.
    pub normalized: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// `|lambda_+ - lambda_-| / lambda_+` of the two largest values.
    pub gap: f64,
}

impl SpectrumResult {
    fn from_raw(mut raw: Vec<f64>, alpha: f64, beta: f64) -> Result<Self> {
        raw.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateInput("spectrum of the zero state".into()));
        }
        let normalized: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let gap = match raw.as_slice() {
            [p, m, ..] => (p - m).abs() / p,
            _ => 0.0,
        };
        Ok(Self { raw_eigenvalues: raw, normalized, alpha, beta, gap })
    }

    pub fn lambda_plus(&self) -> f64 {
        self.raw_eigenvalues[0]
    }

    pub fn lambda_minus(&self) -> f64 {
        self.raw_eigenvalues.get(1).copied().unwrap_or(0.0)
    }
}

fn check_cut(n: usize, cut: usize) -> Result<()> {
    if cut == 0 || cut >= n {
        return Err(Error::InvalidSpec(format!("cut {cut} outside 1..{n}")));
    }
    Ok(())
}

/// `V^L = sum B..B |L><L| B^dag..B^dag` over the left block and
/// `V^R = sum B^dag..B^dag R* R^T B..B` over the right block.
pub fn covariance_matrices(m: &MpsState, cut: usize) -> Result<CovariancePair> {
    check_cut(m.n(), cut)?;
    let mut vl = CMatrix::outer(m.left(), m.left());
    for site in &m.sites()[..cut] {
        vl = &site.b0.matmul(&vl).matmul(&site.b0.adjoint())
            + &site.b1.matmul(&vl).matmul(&site.b1.adjoint());
    }

    let r_conj = CVector::from_vec(m.right().as_slice().iter().map(|z| z.conj()).collect());
    let mut vr = CMatrix::outer(&r_conj, &r_conj);
    for site in m.sites()[cut..].iter().rev() {
        vr = &site.b0.adjoint().matmul(&vr).matmul(&site.b0)
            + &site.b1.adjoint().matmul(&vr).matmul(&site.b1);
    }
    Ok(CovariancePair { vl, vr, cut })
}

fn clamp_nonnegative(values: impl IntoIterator<Item = C64>, scale: f64) -> Result<Vec<f64>> {
    let tol = NEGATIVE_EIG_TOL * scale.max(1.0);
    values
        .into_iter()
        .map(|z| {
            if z.im.abs() > tol {
                return Err(Error::ContractViolation(format!(
                    "complex entanglement eigenvalue {z}"
                )));
            }
            match z.re {
                x if x >= 0.0 => Ok(x),
                x if x >= -tol => Ok(0.0),
                x => Err(Error::ContractViolation(format!("negative entanglement eigenvalue {x:e}"))),
            }
        })
        .collect()
}

/// Eigenvalues of `V^R V^L`. Bond dimension 2 uses the quadratic formula.
pub fn es_from_covariance(pair: &CovariancePair) -> Result<SpectrumResult> {
    let prod = pair.vr.matmul(&pair.vl);
    let scale = prod.max_abs();
    let eigs = if prod.rows() == 2 {
        let tr = prod.trace();
        let det = prod.determinant();
        let disc = (tr * tr - det * 4.0).sqrt();
        vec![(tr + disc) / 2.0, (tr - disc) / 2.0]
    } else {
        eig_general_small(&prod)?
    };
    let raw = clamp_nonnegative(eigs, scale)?;
    let (alpha, beta) = covariance_alpha_beta(pair);
    SpectrumResult::from_raw(raw, alpha, beta)
}

/// Polarizations of the two covariance matrices in the computational basis,
/// meaningful for bond dimension 2 only.
fn covariance_alpha_beta(pair: &CovariancePair) -> (f64, f64) {
    if pair.vr.rows() != 2 {
        return (f64::NAN, f64::NAN);
    }
    let pol = |m: &CMatrix| {
        let tr = m.trace().re;
        (m[(0, 0)].re - m[(1, 1)].re) / tr
    };
    // V^L is tilted by the angle of the cut site, so only the length of its
    // Bloch vector is reported and the sign of beta is lost.
    let vl = &pair.vl;
    let tr = vl.trace().re;
    let bz = (vl[(0, 0)].re - vl[(1, 1)].re) / tr;
    let bx = 2.0 * vl[(0, 1)].re / tr;
    (pol(&pair.vr), bz.hypot(bx))
}

/// `(alpha, beta)` of the theta family for the cut after `cut` sites, with
/// boundary polarizations normalized.
pub fn closed_form_alpha_beta(spec: &ThetaFamilySpec, cut: usize) -> (f64, f64) {
    let cos2 = |k: usize| (2.0 * spec.thetas[k - 1]).cos();
    let (x1, x2) = spec.x12();
    let (n1, n2) = (x1.norm_sqr(), x2.norm_sqr());
    let alpha = (n1 - n2) / (n1 + n2) * (cut + 1..spec.n).map(cos2).product::<f64>();
    let (a, b) = (spec.left[0].norm_sqr(), spec.left[1].norm_sqr());
    let beta = (a - b) / (a + b) * (1..cut).map(cos2).product::<f64>();
    (alpha, beta)
}

/// Closed-form spectrum of the theta family, valid on bulk cuts
/// `2 < cut < n - 1`.
///
/// Raw values carry the boundary norms `(|a_L|^2 + |b_L|^2)(|x1|^2 + |x2|^2)`
/// so they line up with [`es_from_covariance`] on the same state.
pub fn closed_form_spectrum(spec: &ThetaFamilySpec, cut: usize) -> Result<SpectrumResult> {
    spec.validate()?;
    if !(cut > 2 && cut + 1 < spec.n) {
        return Err(Error::InvalidSpec(format!(
            "closed form needs a bulk cut 2 < ell < {}, got {cut}",
            spec.n - 1
        )));
    }
    let (alpha, beta) = closed_form_alpha_beta(spec, cut);
    let c = (2.0 * spec.thetas[cut - 1]).cos();
    let (x1, x2) = spec.x12();
    let norm = (spec.left[0].norm_sqr() + spec.left[1].norm_sqr()) * (x1.norm_sqr() + x2.norm_sqr());
    let lead = 1.0 + alpha * beta * c;
    let radicand = (lead * lead - (1.0 - alpha * alpha) * (1.0 - beta * beta)).max(0.0);
    let root = radicand.sqrt();
    let raw = vec![norm * (lead + root) / 4.0, norm * (lead - root) / 4.0];
    SpectrumResult::from_raw(raw, alpha, beta)
}

/// Relative gap `|lambda_+ - lambda_-| / lambda_+` from the closed form.
pub fn degeneracy_gap(spec: &ThetaFamilySpec, cut: usize) -> Result<f64> {
    Ok(closed_form_spectrum(spec, cut)?.gap)
}

/// Eigenvalues of the reduced density matrix of sites `0..cut` of the
/// normalized state, descending, `2^cut` of them.
pub fn dense_rdm_spectrum(s: &DenseState, cut: usize) -> Result<Vec<f64>> {
    let n = s.n();
    check_cut(n, cut)?;
    let cap = max_dense_n();
    if n > cap {
        return Err(Error::InstanceTooLarge(format!("dense spectrum on {n} sites exceeds cap {cap}")));
    }
    let psi = s.normalized()?;
    let (dl, dr) = (1usize << cut, 1usize << (n - cut));
    // amplitude index = l + dl * r
    let small = dl.min(dr);
    let mut rho = CMatrix::zeros(small, small);
    for i in 0..small {
        for j in i..small {
            let z: C64 = if dl <= dr {
                (0..dr).map(|r| psi[i + dl * r] * psi[j + dl * r].conj()).sum()
            } else {
                (0..dl).map(|l| psi[l + dl * j] * psi[l + dl * i].conj()).sum()
            };
            rho[(i, j)] = z;
            rho[(j, i)] = z.conj();
        }
    }
    let mut values = eig_hermitian(&rho)?.values;
    values.resize(dl, 0.0);
    Ok(values)
}

/// Short stable digest of a family spec (SHA-256 of its JSON, 12 hex digits).
pub fn params_hash(spec: &FamilySpec) -> String {
    let json = serde_json::to_string(spec).expect("family specs always serialize");
    Sha256::digest(json.as_bytes())[..6].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn theta_params_hash(spec: &ThetaFamilySpec) -> String {
    params_hash(&FamilySpec::Theta(spec.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    ClosedForm,
    Covariance,
    Dense,
}

impl SpectrumSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClosedForm => "closed_form",
            Self::Covariance => "covariance",
            Self::Dense => "dense",
        }
    }
}

/// One line of the spectrum CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub n: usize,
    pub ell: usize,
    pub hash: String,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub gap: f64,
    pub source: SpectrumSource,
}

impl SpectrumRow {
    pub const HEADER: &'static str = "n,ell,theta_params_hash,lambda_plus,lambda_minus,gap,source";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            self.ell,
            self.hash,
            self.lambda_plus,
            self.lambda_minus,
            self.gap,
            self.source.as_str()
        )
    }
}

/// The two leading normalized eigenvalues of a family by the requested
/// route. Only the dense route covers the direct-sum family.
pub fn spectrum_row(spec: &FamilySpec, cut: usize, source: SpectrumSource) -> Result<SpectrumRow> {
    let values = match (source, spec.as_theta()) {
        (SpectrumSource::ClosedForm, Some(t)) => closed_form_spectrum(&t, cut)?.normalized,
        (SpectrumSource::Covariance, Some(_)) => {
            es_from_covariance(&covariance_matrices(&spec.build_mps()?, cut)?)?.normalized
        }
        (SpectrumSource::Dense, _) => dense_rdm_spectrum(&spec.build_mps()?.to_dense()?, cut)?,
        (_, None) => {
            return Err(Error::Unsupported(format!(
                "{} spectrum is only defined for the theta family",
                source.as_str()
            )))
        }
    };
    let (plus, minus) = (values[0], values.get(1).copied().unwrap_or(0.0));
    Ok(SpectrumRow {
        n: spec.n(),
        ell: cut,
        hash: params_hash(spec),
        lambda_plus: plus,
        lambda_minus: minus,
        gap: (plus - minus).abs() / plus,
        source,
    })
}
