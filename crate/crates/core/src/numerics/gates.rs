//! Single-qubit gates.
//!
//! Rotations follow the `R_a(t) = exp(i t a)` convention (no factor of 1/2),
//! so `Z R_Y(pi/4) = H`.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{c64, re, CMatrix, C64};

pub fn identity2() -> CMatrix {
    CMatrix::identity(2)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
}

/// `Y = iXZ`.
pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[[re(0.0), c64(0.0, -1.0)], [c64(0.0, 1.0), re(0.0)]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]])
}

pub fn hadamard() -> CMatrix {
    CMatrix::from_real_rows(&[[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
}

/// `exp(i phi Z) = diag(e^{i phi}, e^{-i phi})`.
pub fn rz(phi: f64) -> CMatrix {
    CMatrix::from_diag(&[C64::from_polar(1.0, phi), C64::from_polar(1.0, -phi)])
}

/// `exp(i theta Y) = [[cos, sin], [-sin, cos]]`.
pub fn ry(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_real_rows(&[[c, s], [-s, c]])
}

/// Pauli by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub fn pauli(k: usize) -> CMatrix {
    match k {
        0 => identity2(),
        1 => pauli_x(),
        2 => pauli_y(),
        3 => pauli_z(),
        _ => panic!("pauli index out of range: {k}"),
    }
}

/// `X^x Z^z`.
pub fn pauli_xz(x: bool, z: bool) -> CMatrix {
    let mut m = identity2();
    if x {
        m = m.matmul(&pauli_x());
    }
    if z {
        m = m.matmul(&pauli_z());
    }
    m
}
