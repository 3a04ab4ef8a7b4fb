//! Eigensolvers for the small matrices that show up here: cyclic Jacobi for
//! Hermitian matrices up to 128x128 (half-chain reduced density matrices) and a
//! Hessenberg + shifted QR iteration for general matrices up to 16x16
//! (transfer matrices, covariance products).

use super::{re, CMatrix, C64, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Largest dimension accepted by [`eig_general_small`].
pub const MAX_GENERAL_EIG_DIM: usize = 16;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Eigenvalues come back in descending order; ties keep the order in which
/// they appear on the converged diagonal.
pub fn eig_hermitian(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::ContractViolation(format!(
            "eig_hermitian needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(Error::ContractViolation(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }

    let n = m.rows();
    let mut a = (m + &m.adjoint()).scale_real(0.5);
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 || g <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e_minus = phase.conj();

                // A <- A W, V <- V W
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * e_minus * s;
                    a[(k, q)] = akp * s + akq * e_minus * c;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * e_minus * s;
                    v[(k, q)] = vkp * s + vkq * e_minus * c;
                }
                // A <- W^dagger A
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * phase * s;
                    a[(q, k)] = apk * s + aqk * phase * c;
                }
                a[(p, q)] = re(0.0);
                a[(q, p)] = re(0.0);
                a[(p, p)] = re(a[(p, p)].re);
                a[(q, q)] = re(a[(q, q)].re);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].re.total_cmp(&a[(x, x)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, k)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Complete eigenvalue multiset of a general complex matrix of dimension at
/// most [`MAX_GENERAL_EIG_DIM`], sorted by descending modulus.
///
/// 2x2 inputs use the closed-form quadratic; larger ones go through
/// Householder reduction to Hessenberg form and Wilkinson-shifted QR sweeps.
pub fn eig_general_small(m: &CMatrix) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::ContractViolation(format!(
            "eig_general_small needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > MAX_GENERAL_EIG_DIM {
        return Err(Error::InstanceTooLarge(format!(
            "eig_general_small handles dim <= {MAX_GENERAL_EIG_DIM}, got {n}; use a dedicated routine"
        )));
    }
    let mut values = match n {
        1 => vec![m[(0, 0)]],
        2 => {
            let (l1, l2) = quadratic_eigenvalues(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            vec![l1, l2]
        }
        _ => hessenberg_qr(m)?,
    };
    values.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    Ok(values)
}

/// Eigenvalues of `[[a, b], [c, d]]`.
pub(crate) fn quadratic_eigenvalues(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let root = (half_diff * half_diff + b * c).sqrt();
    (half_tr + root, half_tr - root)
}

fn hessenberg_qr(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.rows();
    let mut h: Vec<Vec<C64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    reduce_to_hessenberg(&mut h);

    let norm = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut values = vec![re(0.0); n];
    let mut hi = n - 1;
    let mut iterations = 0usize;
    let budget = 200 * n;

    loop {
        if hi == 0 {
            values[0] = h[0][0];
            break;
        }
        // locate the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let sub = h[lo][lo - 1].norm();
            let diag = h[lo - 1][lo - 1].norm() + h[lo][lo].norm();
            if sub <= f64::EPSILON * diag.max(norm * 1e-3) {
                h[lo][lo - 1] = re(0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            values[hi] = h[hi][hi];
            hi -= 1;
            iterations = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = quadratic_eigenvalues(h[lo][lo], h[lo][hi], h[hi][lo], h[hi][hi]);
            values[lo] = l1;
            values[hi] = l2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iterations = 0;
            continue;
        }

        iterations += 1;
        if iterations > budget {
            return Err(Error::NoConvergence("shifted QR did not converge".into()));
        }
        let shift = if iterations % 11 == 0 {
            // exceptional shift to break cycles
            h[hi][hi] + re(0.75 * h[hi][hi - 1].norm())
        } else {
            let (l1, l2) =
                quadratic_eigenvalues(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]);
            if (l1 - h[hi][hi]).norm() <= (l2 - h[hi][hi]).norm() {
                l1
            } else {
                l2
            }
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(values)
}

fn reduce_to_hessenberg(a: &mut [Vec<C64>]) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[i][k]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { re(1.0) };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // left: rows k+1.. <- (I - 2 v v^dagger) rows
        for j in 0..n {
            let dot: C64 = (0..v.len()).map(|t| v[t].conj() * a[k + 1 + t][j]).sum();
            for t in 0..v.len() {
                a[k + 1 + t][j] -= v[t] * dot * 2.0;
            }
        }
        // right: cols k+1.. <- cols (I - 2 v v^dagger)
        for row in a.iter_mut() {
            let dot: C64 = (0..v.len()).map(|t| row[k + 1 + t] * v[t]).sum();
            for t in 0..v.len() {
                row[k + 1 + t] -= dot * v[t].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            a[i][k] = re(0.0);
        }
    }
}

/// One explicit shifted QR step `H - mu = QR, H <- RQ + mu` on the window
/// `lo..=hi` of an upper Hessenberg matrix.
fn qr_step(h: &mut [Vec<C64>], lo: usize, hi: usize, shift: C64) {
    for k in lo..=hi {
        h[k][k] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (a, b) = (h[k][k], h[k + 1][k]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if r == 0.0 {
            rotations.push((re(1.0), re(0.0)));
            continue;
        }
        let (alpha, beta) = (a / r, b / r);
        for j in k..=hi {
            let (x, y) = (h[k][j], h[k + 1][j]);
            h[k][j] = alpha.conj() * x + beta.conj() * y;
            h[k + 1][j] = -beta * x + alpha * y;
        }
        h[k + 1][k] = re(0.0);
        rotations.push((alpha, beta));
    }
    for (offset, &(alpha, beta)) in rotations.iter().enumerate() {
        let k = lo + offset;
        for row in h.iter_mut().take((k + 2).min(hi + 1)).skip(lo) {
            let (x, y) = (row[k], row[k + 1]);
            row[k] = x * alpha + y * beta;
            row[k + 1] = -x * beta.conj() + y * alpha.conj();
        }
    }
    for k in lo..=hi {
        h[k][k] += shift;
    }
}
