//! Generalized stabilizers, the Z2 x Z2 symmetry operators and their
//! boundary action for the theta family.
//!
//! Angles are indexed per site (`thetas[k]` for site `k`); the entangler and
//! the `P_theta` factor on bond `(k, k + 1)` both use `thetas[k]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{local_entangler, EntanglerKind, ThetaFamilySpec};
use crate::mps::{DenseState, MpsState};
use crate::numerics::gates::{identity2, pauli, pauli_x, pauli_z};
use crate::numerics::{kron, CMatrix, CVector, C64};
use crate::operator::{LocalOperator, OperatorString, MAX_DENSE_OPERATOR_N};

/// Group element `(g1, g2)` of Z2 x Z2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SymmetryElement {
    pub g1: bool,
    pub g2: bool,
}

impl SymmetryElement {
    pub const IDENTITY: Self = Self { g1: false, g2: false };

    pub fn new(g1: u8, g2: u8) -> Self {
        Self { g1: g1 & 1 == 1, g2: g2 & 1 == 1 }
    }

    /// All four elements, indexed by `g1 + 2 g2`.
    pub fn all() -> [Self; 4] {
        [0, 1, 2, 3].map(Self::from_index)
    }

    pub fn from_index(k: usize) -> Self {
        Self { g1: k & 1 == 1, g2: k & 2 == 2 }
    }

    pub fn index(&self) -> usize {
        usize::from(self.g1) | (usize::from(self.g2) << 1)
    }

    /// Bitwise addition.
    pub fn compose(&self, other: &Self) -> Self {
        Self { g1: self.g1 ^ other.g1, g2: self.g2 ^ other.g2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilizerPosition {
    /// Three-site stabilizer centred on this site.
    Bulk(usize),
    /// `P X Z` on sites `(0, 1)`.
    Left,
    /// `P Z X` on sites `(n - 2, n - 1)`.
    Right { n: usize },
}

fn p_theta(theta: f64, bond: usize) -> Result<LocalOperator> {
    local_entangler(EntanglerKind::PTheta(theta), bond)
}

fn single(site: usize, m: CMatrix) -> LocalOperator {
    LocalOperator::single(site, m).expect("2x2 Pauli")
}

fn collapse(ops: Vec<LocalOperator>, start: usize, width: usize) -> Result<LocalOperator> {
    // Re-express the product on the sites start..start + width only.
    let shifted: Vec<LocalOperator> = ops
        .into_iter()
        .map(|op| LocalOperator::new(op.start() - start, op.matrix().clone()))
        .collect::<Result<_>>()?;
    LocalOperator::new(start, OperatorString::from(shifted).to_dense(width)?)
}

/// Generalized stabilizer. `thetas` are the angles of the bonds it touches:
/// `(left bond, right bond)` for a bulk position; boundary positions use
/// only `thetas.0`.
pub fn generalized_stabilizer(thetas: (f64, f64), position: StabilizerPosition) -> Result<LocalOperator> {
    match position {
        StabilizerPosition::Bulk(c) => {
            if c == 0 {
                return Err(Error::InvalidSpec("bulk stabilizer needs a left neighbour".into()));
            }
            let ops = vec![
                p_theta(thetas.0, c - 1)?,
                p_theta(thetas.1, c)?,
                single(c - 1, pauli_z()),
                single(c, pauli_x()),
                single(c + 1, pauli_z()),
            ];
            collapse(ops, c - 1, 3)
        }
        StabilizerPosition::Left => {
            collapse(vec![p_theta(thetas.0, 0)?, single(0, pauli_x()), single(1, pauli_z())], 0, 2)
        }
        StabilizerPosition::Right { n } => {
            if n < 2 {
                return Err(Error::InvalidSpec("right stabilizer needs n >= 2".into()));
            }
            collapse(
                vec![p_theta(thetas.0, n - 2)?, single(n - 2, pauli_z()), single(n - 1, pauli_x())],
                n - 2,
                2,
            )
        }
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerSet {
    /// Centred on sites `1..n-1`.
    pub bulk: Vec<LocalOperator>,
    pub left: LocalOperator,
    pub right: LocalOperator,
}

impl StabilizerSet {
    pub fn for_chain(thetas: &[f64]) -> Result<Self> {
        let n = thetas.len();
        if n < 2 {
            return Err(Error::InvalidSpec("stabilizers need n >= 2".into()));
        }
        let bulk = (1..n - 1)
            .map(|c| generalized_stabilizer((thetas[c - 1], thetas[c]), StabilizerPosition::Bulk(c)))
            .collect::<Result<_>>()?;
        Ok(Self {
            bulk,
            left: generalized_stabilizer((thetas[0], thetas[0]), StabilizerPosition::Left)?,
            right: generalized_stabilizer((thetas[n - 2], thetas[n - 2]), StabilizerPosition::Right { n })?,
        })
    }

    /// `(name, operator)` with the left boundary first.
    pub fn named(&self) -> Vec<(String, &LocalOperator)> {
        let mut v = vec![("S_left".to_string(), &self.left)];
        v.extend(self.bulk.iter().map(|s| (format!("S_bulk[{}]", s.start() + 1), s)));
        v.push(("S_right".to_string(), &self.right));
        v
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self { name: name.into(), residual, tol, pass: residual <= tol }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub checks: Vec<CheckEntry>,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(checks: Vec<CheckEntry>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        Self { checks, passed }
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

/// `||S psi - psi|| / ||psi||` for every stabilizer.
pub fn verify_stabilizer_invariance(state: &DenseState, set: &StabilizerSet, tol: f64) -> Result<CheckReport> {
    if state.norm() == 0.0 {
        return Err(Error::DegenerateInput("zero state".into()));
    }
    let checks = set
        .named()
        .into_iter()
        .map(|(name, s)| {
            let image = state.apply(s)?;
            let residual = (image.amplitudes() - state.amplitudes()).norm() / state.norm();
            Ok(CheckEntry::new(name, residual, tol))
        })
        .collect::<Result<_>>()?;
    Ok(CheckReport::new(checks))
}

/// `||S^2 - I||` on the operator's own span.
pub fn square_defect(op: &LocalOperator) -> f64 {
    let m = op.matrix();
    (&m.matmul(m) - &CMatrix::identity(m.rows())).max_abs()
}

/// Commutator norm of two site-local operators, evaluated on the union of
/// their spans.
pub fn local_commutator_norm(a: &LocalOperator, b: &LocalOperator) -> Result<f64> {
    let start = a.start().min(b.start());
    let end = a.span().end.max(b.span().end);
    let width = end - start;
    let shift = |op: &LocalOperator| LocalOperator::new(op.start() - start, op.matrix().clone());
    let ma = shift(a)?.embed(width)?;
    let mb = shift(b)?.embed(width)?;
    Ok(ma.commutator_norm(&mb))
}

/// Where the last factor of `X_even` takes its angle from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LastBondAngle {
    /// Angle of the bond it sits on (`thetas[n - 2]`).
    Bond,
    /// Angle of the last site (`thetas[n - 1]`).
    LastSite,
}

fn check_symmetry_args(thetas: &[f64]) -> Result<usize> {
    let n = thetas.len();
    if n < 2 || n % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "symmetry operators are defined for an even number of sites, got {n}"
        )));
    }
    for &t in thetas {
        let (s, c) = t.sin_cos();
        if s.abs() < 1e-12 || c.abs() < 1e-12 {
            return Err(Error::SingularTheta(t));
        }
    }
    Ok(n)
}

/// `X_odd` built factor by factor from `P_theta`, `X` and the trailing `Z`.
pub fn x_odd_direct(thetas: &[f64]) -> Result<OperatorString> {
    let n = check_symmetry_args(thetas)?;
    let mut ops = vec![p_theta(thetas[0], 0)?, single(0, pauli_x())];
    for s in (2..n).step_by(2) {
        ops.push(p_theta(thetas[s - 1], s - 1)?);
        ops.push(p_theta(thetas[s], s)?);
        ops.push(single(s, pauli_x()));
    }
    ops.push(single(n - 1, pauli_z()));
    Ok(OperatorString::from(ops))
}

/// `X_even` built factor by factor from the leading `Z`, `P_theta` and `X`.
pub fn x_even_direct(thetas: &[f64], last: LastBondAngle) -> Result<OperatorString> {
    let n = check_symmetry_args(thetas)?;
    let mut ops = vec![single(0, pauli_z())];
    for s in (1..n - 1).step_by(2) {
        ops.push(p_theta(thetas[s - 1], s - 1)?);
        ops.push(p_theta(thetas[s], s)?);
        ops.push(single(s, pauli_x()));
    }
    let last_theta = match last {
        LastBondAngle::Bond => thetas[n - 2],
        LastBondAngle::LastSite => thetas[n - 1],
    };
    ops.push(p_theta(last_theta, n - 2)?);
    ops.push(single(n - 1, pauli_x()));
    Ok(OperatorString::from(ops))
}

/// `X_odd = S_left prod S_bulk[even sites]`.
pub fn x_odd_from_stabilizers(thetas: &[f64]) -> Result<OperatorString> {
    let n = check_symmetry_args(thetas)?;
    let set = StabilizerSet::for_chain(thetas)?;
    let mut ops = vec![set.left.clone()];
    ops.extend((2..n - 1).step_by(2).map(|c| set.bulk[c - 1].clone()));
    Ok(OperatorString::from(ops))
}

/// `X_even = prod S_bulk[odd sites] S_right`.
pub fn x_even_from_stabilizers(thetas: &[f64]) -> Result<OperatorString> {
    let n = check_symmetry_args(thetas)?;
    let set = StabilizerSet::for_chain(thetas)?;
    let mut ops: Vec<LocalOperator> = (1..n - 1).step_by(2).map(|c| set.bulk[c - 1].clone()).collect();
    ops.push(set.right.clone());
    Ok(OperatorString::from(ops))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Direct,
    Stabilizers,
}

/// `O(g) = X_odd^{g1} X_even^{g2}` as an operator string.
pub fn symmetry_operator_string(g: SymmetryElement, thetas: &[f64], how: Construction) -> Result<OperatorString> {
    check_symmetry_args(thetas)?;
    let mut out = OperatorString::new();
    if g.g1 {
        let x = match how {
            Construction::Direct => x_odd_direct(thetas)?,
            Construction::Stabilizers => x_odd_from_stabilizers(thetas)?,
        };
        out = out.then(&x);
    }
    if g.g2 {
        let x = match how {
            Construction::Direct => x_even_direct(thetas, LastBondAngle::Bond)?,
            Construction::Stabilizers => x_even_from_stabilizers(thetas)?,
        };
        out = out.then(&x);
    }
    Ok(out)
}

/// Dense `O(g)` for `n <= 12`.
pub fn symmetry_operator(g: SymmetryElement, thetas: &[f64], n: usize) -> Result<CMatrix> {
    if thetas.len() != n {
        return Err(Error::InvalidSpec(format!("{} thetas for n = {n}", thetas.len())));
    }
    if n > MAX_DENSE_OPERATOR_N {
        return Err(Error::InstanceTooLarge(format!("dense symmetry operator for n = {n}")));
    }
    symmetry_operator_string(g, thetas, Construction::Direct)?.to_dense(n)
}

/// Max entry difference between the direct and stabilizer-product forms.
pub fn construction_agreement(g: SymmetryElement, thetas: &[f64]) -> Result<f64> {
    let n = thetas.len();
    let a = symmetry_operator_string(g, thetas, Construction::Direct)?.to_dense(n)?;
    let b = symmetry_operator_string(g, thetas, Construction::Stabilizers)?.to_dense(n)?;
    Ok((&a - &b).max_abs())
}

/// `||O(g) psi - psi|| / ||psi||` with `X_even` using the given last-bond angle.
pub fn symmetry_residual(state: &DenseState, g: SymmetryElement, thetas: &[f64], last: LastBondAngle) -> Result<f64> {
    let mut op = OperatorString::new();
    if g.g1 {
        op = op.then(&x_odd_direct(thetas)?);
    }
    if g.g2 {
        op = op.then(&x_even_direct(thetas, last)?);
    }
    let image = op.apply_to(state.amplitudes().as_slice(), state.n())?;
    Ok((&CVector::from_vec(image) - state.amplitudes()).norm() / state.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Which boundary `X_bar` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectiveForm {
    /// `P X_1 Z_2` (left) and `P Z_{n-1} X_n` (right): the boundary
    /// stabilizers themselves.
    Stabilizer,
    /// The same without the neighbouring `Z`: `P X_1` and `P X_n`.
    Bare,
}

/// `(X_bar, Z_bar)` on the chosen boundary.
pub fn effective_paulis(thetas: &[f64], side: Side, form: EffectiveForm) -> Result<(LocalOperator, LocalOperator)> {
    let n = check_symmetry_args(thetas)?;
    let (bond, x_site, z_site) = match side {
        Side::Left => (0, 0, 1),
        Side::Right => (n - 2, n - 1, n - 2),
    };
    let mut ops = vec![p_theta(thetas[bond], bond)?];
    match (side, form) {
        (_, EffectiveForm::Bare) => ops.push(single(x_site, pauli_x())),
        (Side::Left, EffectiveForm::Stabilizer) => {
            ops.push(single(x_site, pauli_x()));
            ops.push(single(z_site, pauli_z()));
        }
        (Side::Right, EffectiveForm::Stabilizer) => {
            ops.push(single(z_site, pauli_z()));
            ops.push(single(x_site, pauli_x()));
        }
    }
    Ok((collapse(ops, bond, 2)?, single(x_site, pauli_z())))
}

/// Sign `s` with `O A = s A O`, or an error if neither sign fits.
fn conjugation_sign(o: &CMatrix, a: &CMatrix, tol: f64) -> Result<i8> {
    let oa = o.matmul(a);
    let ao = a.matmul(o);
    let scale = oa.max_abs().max(1.0);
    if (&oa - &ao).max_abs() <= tol * scale {
        Ok(1)
    } else if (&oa + &ao).max_abs() <= tol * scale {
        Ok(-1)
    } else {
        Err(Error::ContractViolation(
            "symmetry operator neither commutes nor anticommutes with the effective Pauli".into(),
        ))
    }
}

/// `(s_Z, s_X)` such that `O(g) Z_bar = s_Z Z_bar O(g)` and likewise for `X_bar`.
pub fn effective_pauli_signs(thetas: &[f64], g: SymmetryElement, side: Side) -> Result<(i8, i8)> {
    effective_pauli_signs_with(thetas, g, side, EffectiveForm::Stabilizer)
}

pub fn effective_pauli_signs_with(
    thetas: &[f64],
    g: SymmetryElement,
    side: Side,
    form: EffectiveForm,
) -> Result<(i8, i8)> {
    let n = check_symmetry_args(thetas)?;
    if n > 10 {
        return Err(Error::InstanceTooLarge(format!("dense sign check for n = {n} (max 10)")));
    }
    let o = symmetry_operator(g, thetas, n)?;
    let (xb, zb) = effective_paulis(thetas, side, form)?;
    let s_z = conjugation_sign(&o, &zb.embed(n)?, 1e-10)?;
    let s_x = conjugation_sign(&o, &xb.embed(n)?, 1e-10)?;
    Ok((s_z, s_x))
}

/// Projective-edge signs: on the left `Z_bar` picks up `(-1)^{g1}` and
/// `X_bar` picks up `(-1)^{g2}`; on the right (an even site) the roles swap.
///
/// The stabilizer form of `X_bar` is itself a factor of `X_odd` or
/// `X_even` and commutes with every `O(g)`, so only the bare form meets the
/// `X` column of this table.
pub fn expected_signs(g: SymmetryElement, side: Side) -> (i8, i8) {
    let sign = |b: bool| if b { -1 } else { 1 };
    match side {
        Side::Left => (sign(g.g1), sign(g.g2)),
        Side::Right => (sign(g.g2), sign(g.g1)),
    }
}

/// `omega(g, h)` with `g`, `h` indexed by [`SymmetryElement::index`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CocycleTable {
    pub omega: [[i8; 4]; 4],
}

impl CocycleTable {
    pub fn get(&self, g: SymmetryElement, h: SymmetryElement) -> i8 {
        self.omega[g.index()][h.index()]
    }

    /// `omega(g,h) omega(g+h,k) = omega(h,k) omega(g,h+k)` for all 64 triples.
    pub fn consistency_violations(&self) -> usize {
        let all = SymmetryElement::all();
        let mut bad = 0;
        for g in all {
            for h in all {
                for k in all {
                    let lhs = self.get(g, h) * self.get(g.compose(&h), k);
                    let rhs = self.get(h, k) * self.get(g, h.compose(&k));
                    if lhs != rhs {
                        bad += 1;
                    }
                }
            }
        }
        bad
    }

    /// `omega(g,h) / omega(h,g)`.
    pub fn commutator_sign(&self, g: SymmetryElement, h: SymmetryElement) -> i8 {
        self.get(g, h) * self.get(h, g)
    }

    pub fn closed_form() -> Self {
        let mut omega = [[1i8; 4]; 4];
        for g in SymmetryElement::all() {
            for h in SymmetryElement::all() {
                omega[g.index()][h.index()] = if g.g2 && h.g1 { -1 } else { 1 };
            }
        }
        Self { omega }
    }
}

/// Cocycle of the left-boundary effective representation
/// `U_eff(g) = X_bar^{g1} Z_bar^{g2}` at the cluster point.
pub fn cocycle_table() -> Result<CocycleTable> {
    cocycle_table_at(std::f64::consts::FRAC_PI_4)
}

/// Same, with `X_bar = P_theta X_1 Z_2` at a general first-bond angle.
pub fn cocycle_table_at(theta1: f64) -> Result<CocycleTable> {
    let xb = generalized_stabilizer((theta1, theta1), StabilizerPosition::Left)?.matrix().clone();
    let zb = kron(&identity2(), &pauli_z())?;
    let u = |g: SymmetryElement| {
        let mut m = CMatrix::identity(4);
        if g.g1 {
            m = m.matmul(&xb);
        }
        if g.g2 {
            m = m.matmul(&zb);
        }
        m
    };
    let mut omega = [[0i8; 4]; 4];
    for g in SymmetryElement::all() {
        for h in SymmetryElement::all() {
            let inv = u(g.compose(&h))
                .inverse()
                .ok_or_else(|| Error::ContractViolation("singular effective operator".into()))?;
            let w = u(g).matmul(&u(h)).matmul(&inv);
            let scalar = w.trace() / 4.0;
            let defect = (&w - &CMatrix::identity(4).scale(scalar)).max_abs();
            if defect > 1e-10 || (scalar.norm() - 1.0).abs() > 1e-10 || scalar.im.abs() > 1e-10 {
                return Err(Error::ContractViolation(format!(
                    "U_eff product for ({g:?}, {h:?}) is not +-I (defect {defect:.3e})"
                )));
            }
            omega[g.index()][h.index()] = if scalar.re > 0.0 { 1 } else { -1 };
        }
    }
    Ok(CocycleTable { omega })
}

#[derive(Clone, Debug, Serialize)]
pub struct PauliSolution {
    /// Pauli indices (0 = I, 1 = X, 2 = Y, 3 = Z) on the two block sites.
    pub paulis: (usize, usize),
    /// `phi_g` in `(-pi, pi]`.
    pub phase: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OnsiteReport {
    pub g: SymmetryElement,
    /// Block relation satisfied by a Pauli `V(g)` and the chain symmetry
    /// has unit-modulus matrix elements.
    pub onsite: bool,
    /// First Pauli `V(g)` (in index order) solving the block relation.
    pub v: Option<PauliSolution>,
    /// `max_i | |O(g)_{i, i+g}| - 1 |` over the dense chain operator.
    pub violation: f64,
}

impl OnsiteReport {
    pub fn v_matrix(&self) -> Option<CMatrix> {
        self.v.as_ref().map(|s| kron(&pauli(s.paulis.0), &pauli(s.paulis.1)).expect("4x4"))
    }
}

fn block_tensors(mps: &MpsState) -> Result<[CMatrix; 4]> {
    let n = mps.n();
    if n % 2 == 1 {
        return Err(Error::Unsupported("two-site blocking needs even n".into()));
    }
    let (a, b) = (mps.site(0), mps.site(1));
    for k in (0..n).step_by(2) {
        let (c, d) = (mps.site(k), mps.site(k + 1));
        if (&c.b0 - &a.b0).max_abs() > 1e-14
            || (&c.b1 - &a.b1).max_abs() > 1e-14
            || (&d.b0 - &b.b0).max_abs() > 1e-14
            || (&d.b1 - &b.b1).max_abs() > 1e-14
        {
            return Err(Error::Unsupported("two-site blocks are not translation invariant".into()));
        }
    }
    // A[i1 i2] = A[i1] (x) A[i2], indexed i1 + 2 i2.
    Ok([
        kron(&a.b0, &b.b0)?,
        kron(&a.b1, &b.b0)?,
        kron(&a.b0, &b.b1)?,
        kron(&a.b1, &b.b1)?,
    ])
}

/// Best phase and residual for `A[i+g] = e^{i phi} V A[i] V^dagger`.
pub fn block_relation(blocks: &[CMatrix; 4], g: SymmetryElement, v: &CMatrix) -> (f64, f64) {
    let shift = g.index();
    let rotated: Vec<CMatrix> = blocks.iter().map(|a| v.matmul(a).matmul(&v.adjoint())).collect();
    let overlap: C64 = (0..4)
        .map(|i| {
            let target = &blocks[i ^ shift];
            rotated[i].adjoint().matmul(target).trace()
        })
        .sum();
    let phase = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let e = C64::from_polar(1.0, phase);
    let residual = (0..4)
        .map(|i| (&blocks[i ^ shift] - &rotated[i].scale(e)).max_abs())
        .fold(0.0, f64::max);
    (phase, residual)
}

/// Checks whether `O(g)` acts on-site on two-site blocks of a theta-family
/// chain.
pub fn onsite_symmetry_check(spec: &ThetaFamilySpec, g: SymmetryElement) -> Result<OnsiteReport> {
    let mps = crate::families::theta_family_mps(spec)?;
    let blocks = block_tensors(&mps)?;
    let mut v = None;
    'search: for p in 0..4 {
        for q in 0..4 {
            let vm = kron(&pauli(p), &pauli(q))?;
            let (phase, residual) = block_relation(&blocks, g, &vm);
            if residual <= 1e-10 {
                v = Some(PauliSolution { paulis: (p, q), phase, residual });
                break 'search;
            }
        }
    }
    let violation = non_onsite_violation(g, &spec.thetas)?;
    Ok(OnsiteReport { g, onsite: v.is_some() && violation <= 1e-10, v, violation })
}

/// `max_i | |O(g)_{i, i+g}| - 1 |` where `g` flips even sites for `g1`
/// and odd sites for `g2`.
pub fn non_onsite_violation(g: SymmetryElement, thetas: &[f64]) -> Result<f64> {
    let n = thetas.len();
    let o = symmetry_operator(g, thetas, n)?;
    let mut flip = 0usize;
    for k in 0..n {
        if (k % 2 == 0 && g.g1) || (k % 2 == 1 && g.g2) {
            flip |= 1 << k;
        }
    }
    Ok((0..1usize << n)
        .map(|i| (o[(i, i ^ flip)].norm() - 1.0).abs())
        .fold(0.0, f64::max))
}

/// Effective-Pauli signs at one boundary, computed and expected.
#[derive(Clone, Debug, Serialize)]
pub struct SignEntry {
    pub g: SymmetryElement,
    pub side: Side,
    pub form: EffectiveForm,
    pub s_z: i8,
    pub s_x: i8,
    pub expected: (i8, i8),
    pub matches: bool,
}

/// Everything the symmetry command checks on one theta-family state.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub n: usize,
    pub tol: f64,
    /// Stabilizer and symmetry checks; `passed` is over these only.
    pub checks: Vec<CheckEntry>,
    pub passed: bool,
    /// Left and right sign tables in both boundary forms; informational.
    pub effective_signs: Vec<SignEntry>,
    pub cocycle: CocycleTable,
    pub cocycle_consistency_violations: usize,
}

/// Stabilizer invariance, `S^2 = I`, stabilizer commutators, `O(g)|psi> =
/// |psi>`, `O(g)^2 = I` and the agreement of both `O(g)` constructions.
///
/// `O(g)^2` and the sign tables need dense operators and are skipped past
/// their size caps.
pub fn symmetry_report(spec: &ThetaFamilySpec, tol: f64) -> Result<SymmetryReport> {
    spec.validate()?;
    let thetas = &spec.thetas;
    let n = check_symmetry_args(thetas)?;
    let state = crate::families::theta_family_mps(spec)?.to_dense()?;
    let set = StabilizerSet::for_chain(thetas)?;

    let mut checks = verify_stabilizer_invariance(&state, &set, tol)?.checks;
    let named = set.named();
    for (name, s) in &named {
        checks.push(CheckEntry::new(format!("{name}^2 = I"), square_defect(s), tol));
    }
    let mut comm = 0.0f64;
    for (i, (_, a)) in named.iter().enumerate() {
        for (_, b) in &named[i + 1..] {
            comm = comm.max(local_commutator_norm(a, b)?);
        }
    }
    checks.push(CheckEntry::new("stabilizer commutators", comm, tol));

    for g in SymmetryElement::all().into_iter().skip(1) {
        let label = format!("({},{})", g.g1 as u8, g.g2 as u8);
        let r = symmetry_residual(&state, g, thetas, LastBondAngle::Bond)?;
        checks.push(CheckEntry::new(format!("O{label}|psi> = |psi>"), r, tol));
        checks.push(CheckEntry::new(
            format!("O{label} constructions agree"),
            construction_agreement(g, thetas)?,
            tol,
        ));
        if n <= MAX_DENSE_OPERATOR_N {
            let o = symmetry_operator(g, thetas, n)?;
            let defect = (&o.matmul(&o) - &CMatrix::identity(o.rows())).max_abs();
            checks.push(CheckEntry::new(format!("O{label}^2 = I"), defect, tol));
        }
    }

    let mut effective_signs = Vec::new();
    if n <= 10 {
        for side in [Side::Left, Side::Right] {
            for form in [EffectiveForm::Stabilizer, EffectiveForm::Bare] {
                for g in SymmetryElement::all() {
                    let (s_z, s_x) = effective_pauli_signs_with(thetas, g, side, form)?;
                    let expected = expected_signs(g, side);
                    effective_signs.push(SignEntry {
                        g,
                        side,
                        form,
                        s_z,
                        s_x,
                        expected,
                        matches: (s_z, s_x) == expected,
                    });
                }
            }
        }
    }

    let cocycle = cocycle_table_at(thetas[0])?;
    let cocycle_consistency_violations = cocycle.consistency_violations();
    let passed = checks.iter().all(|c| c.pass);
    Ok(SymmetryReport {
        n,
        tol,
        checks,
        passed,
        effective_signs,
        cocycle,
        cocycle_consistency_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{theta_dense_reference, ThetaFamilySpec};
    use crate::numerics::gates::pauli_y;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn cluster_report_passes() {
        let r = symmetry_report(&ThetaFamilySpec::cluster(6).unwrap(), 1e-10).unwrap();
        assert!(r.passed, "{:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        assert_eq!(r.cocycle, CocycleTable::closed_form());
        assert_eq!(r.cocycle_consistency_violations, 0);
        assert!(r.effective_signs.iter().filter(|e| e.form == EffectiveForm::Bare).all(|e| e.matches));
    }

    #[test]
    fn cluster_stabilizer_is_zxz() {
        let s = generalized_stabilizer((FRAC_PI_4, FRAC_PI_4), StabilizerPosition::Bulk(1)).unwrap();
        let zxz = LocalOperator::from_site_factors(0, &[pauli_z(), pauli_x(), pauli_z()]).unwrap();
        assert!((s.matrix() - zxz.matrix()).max_abs() < 1e-15);
        let l = generalized_stabilizer((FRAC_PI_4, 0.0), StabilizerPosition::Left).unwrap();
        let xz = LocalOperator::from_site_factors(0, &[pauli_x(), pauli_z()]).unwrap();
        assert!((l.matrix() - xz.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn stabilizers_square_to_identity() {
        let s = generalized_stabilizer((0.3, 1.1), StabilizerPosition::Bulk(2)).unwrap();
        assert!(square_defect(&s) < 1e-12);
    }

    #[test]
    fn singular_angle_rejected() {
        assert!(matches!(
            generalized_stabilizer((0.0, 0.3), StabilizerPosition::Bulk(1)),
            Err(Error::SingularTheta(_))
        ));
        assert!(symmetry_operator(SymmetryElement::new(1, 0), &[0.3; 5], 5).is_err());
    }

    #[test]
    fn family_state_is_stabilized() {
        let thetas = vec![0.3, 0.7, 1.1, 0.5, 0.9, 0.2];
        let spec = ThetaFamilySpec::symmetric(thetas.clone()).unwrap();
        let psi = theta_dense_reference(&spec).unwrap();
        let set = StabilizerSet::for_chain(&thetas).unwrap();
        let rep = verify_stabilizer_invariance(&psi, &set, 1e-10).unwrap();
        assert!(rep.passed, "{rep:?}");
        for g in SymmetryElement::all() {
            assert!(symmetry_residual(&psi, g, &thetas, LastBondAngle::Bond).unwrap() < 1e-10);
            assert!(construction_agreement(g, &thetas).unwrap() < 1e-10);
        }
    }

    #[test]
    fn cluster_symmetry_is_pauli_string() {
        let thetas = vec![FRAC_PI_4; 4];
        let x_odd = symmetry_operator(SymmetryElement::new(1, 0), &thetas, 4).unwrap();
        let expect = OperatorString::from(vec![
            single(0, pauli_x()),
            single(2, pauli_x()),
            single(3, pauli_z()),
        ])
        .to_dense(4)
        .unwrap();
        assert!((&x_odd - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn signs_and_cocycle() {
        let thetas = vec![0.4, 0.9, 1.2, 0.3];
        for g in SymmetryElement::all() {
            for side in [Side::Left, Side::Right] {
                let (s_z, s_x) = effective_pauli_signs(&thetas, g, side).unwrap();
                assert_eq!(s_z, expected_signs(g, side).0);
                assert_eq!(s_x, 1);
                let bare = effective_pauli_signs_with(&thetas, g, side, EffectiveForm::Bare).unwrap();
                assert_eq!(bare, expected_signs(g, side));
            }
        }
        let t = cocycle_table_at(0.6).unwrap();
        assert_eq!(t, CocycleTable::closed_form());
        assert_eq!(t.consistency_violations(), 0);
        assert_eq!(t.commutator_sign(SymmetryElement::new(1, 0), SymmetryElement::new(0, 1)), -1);
    }

    #[test]
    fn cluster_blocks_have_y_solution() {
        let spec = ThetaFamilySpec::cluster(4).unwrap();
        let g = SymmetryElement::new(1, 1);
        let rep = onsite_symmetry_check(&spec, g).unwrap();
        assert!(rep.onsite);
        let yy = kron(&pauli_y(), &pauli_y()).unwrap();
        let blocks = block_tensors(&crate::families::theta_family_mps(&spec).unwrap()).unwrap();
        let (phase, residual) = block_relation(&blocks, g, &yy);
        assert!(residual < 1e-14 && phase.abs() < 1e-14);
        let off = ThetaFamilySpec::uniform(4, FRAC_PI_4 + 0.2, spec.left, spec.right).unwrap();
        assert!(onsite_symmetry_check(&off, SymmetryElement::new(1, 0)).unwrap().violation > 1e-3);
        // The product of both generators is a theta-independent Pauli string.
        assert!(onsite_symmetry_check(&off, g).unwrap().violation < 1e-12);
    }
}
