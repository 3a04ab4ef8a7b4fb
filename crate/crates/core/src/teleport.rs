//! Gate teleportation in correlation space.
//!
//! Measuring a site in the basis `{|phi_0>, |phi_1>}` applies `B[phi_m]` to
//! the correlation-space vector entering from the left boundary. Sites are
//! consumed left to right.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::mps::{contract_dense, max_dense_n, MpsState, SiteTensor};
use crate::numerics::gates::{hadamard, pauli, pauli_xz, pauli_z, ry, rz};
use crate::numerics::{operator_infidelity, re, state_fidelity, CMatrix, CVector, C64};

/// Largest chain for which the dense oracle runs alongside a protocol.
pub const ORACLE_MAX_N: usize = 12;
/// Cap on exhaustive branch enumeration.
pub const MAX_EXHAUSTIVE_STEPS: usize = 12;
/// Branch-spread threshold for calling a protocol deterministic.
pub const DETERMINISM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub vartheta: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl MeasurementBasis {
    /// `vartheta = pi/4`, `phi1 = -phi2 = phi`.
    pub fn equatorial(phi: f64) -> Self {
        Self { vartheta: FRAC_PI_4, phi1: phi, phi2: -phi }
    }

    /// Coefficients of `<phi_m|` on `(<0|, <1|)`.
    pub fn bra(&self, m: u8) -> [C64; 2] {
        let (s, c) = self.vartheta.sin_cos();
        if m == 0 {
            [C64::from_polar(c, self.phi1), C64::from_polar(s, self.phi2)]
        } else {
            [C64::from_polar(s, -self.phi2), -C64::from_polar(c, -self.phi1)]
        }
    }
}

/// `(B[phi_0], B[phi_1])` for one site.
pub fn measurement_operators(basis: &MeasurementBasis, site: &SiteTensor) -> (CMatrix, CMatrix) {
    let op = |m| {
        let [k0, k1] = basis.bra(m);
        &site.b0.scale(k0) + &site.b1.scale(k1)
    };
    (op(0), op(1))
}

/// Vector in the virtual space; for bond dimension 4 the first two
/// components form the logical qubit and the last two the junk sector.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationState {
    pub vector: CVector,
}

impl CorrelationState {
    pub fn new(vector: CVector) -> Result<Self> {
        if vector.norm_sqr() == 0.0 {
            return Err(Error::DegenerateInput("zero correlation-space vector".into()));
        }
        Ok(Self { vector })
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }
}

/// Splits a bond-dimension-4 vector into its logical and junk halves.
pub fn extract_logical(state: &CorrelationState) -> Result<(CVector, CVector)> {
    if state.dim() != 4 {
        return Err(Error::Unsupported(format!(
            "logical/junk split needs bond dimension 4, got {}",
            state.dim()
        )));
    }
    let v = state.vector.as_slice();
    Ok((CVector::from_vec(v[..2].to_vec()), CVector::from_vec(v[2..].to_vec())))
}

pub enum Outcome<'a> {
    Forced(u8),
    Sampled(&'a mut ChaCha8Rng),
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub state: CorrelationState,
    pub outcome: u8,
    pub probability: f64,
    /// Probabilities of outcome 0 and 1.
    pub branch_probabilities: [f64; 2],
}

pub fn step(state: &CorrelationState, ops: &(CMatrix, CMatrix), outcome: Outcome<'_>) -> Result<StepResult> {
    let images = [ops.0.apply(&state.vector), ops.1.apply(&state.vector)];
    let weights = [images[0].norm_sqr(), images[1].norm_sqr()];
    let total = weights[0] + weights[1];
    if total == 0.0 || !total.is_finite() {
        return Err(Error::DegenerateInput(
            "both measurement branches annihilate the correlation state".into(),
        ));
    }
    let probs = [weights[0] / total, weights[1] / total];
    let m = match outcome {
        Outcome::Forced(m) if m <= 1 => m,
        Outcome::Forced(m) => return Err(Error::InvalidSpec(format!("outcome must be 0 or 1, got {m}"))),
        Outcome::Sampled(rng) => u8::from(rng.gen::<f64>() >= probs[0]),
    };
    let mut v = images[m as usize].clone();
    if v.norm_sqr() == 0.0 {
        return Err(Error::DegenerateInput(format!("forced outcome {m} has probability zero")));
    }
    // Rescale only when the magnitude drifts far from 1.
    let norm = v.norm();
    if !(1e-100..=1e100).contains(&norm) {
        v = v.scale(re(1.0 / norm));
    }
    Ok(StepResult {
        state: CorrelationState { vector: v },
        outcome: m,
        probability: probs[m as usize],
        branch_probabilities: probs,
    })
}

/// Pauli frame: the accumulated logical gate equals `X^x Z^z` times the
/// ideal circuit, up to a global phase.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliFrame {
    pub x: bool,
    pub z: bool,
}

impl PauliFrame {
    /// Sign applied to the next target angle.
    pub fn angle_sign(&self) -> f64 {
        if self.x {
            -1.0
        } else {
            1.0
        }
    }

    /// Frame after a step `X^m H R_Z(phi')` with the adapted angle.
    pub fn advance(self, m: u8) -> Self {
        Self { x: (m == 1) ^ self.z, z: self.x }
    }

    pub fn matrix(&self) -> CMatrix {
        pauli_xz(self.x, self.z)
    }
}

fn deterministic_family(family: &FamilySpec) -> Result<()> {
    match family {
        FamilySpec::Cluster(_) | FamilySpec::DirectSum(_) => Ok(()),
        FamilySpec::Theta(t) => {
            if t.thetas.iter().all(|&th| (th - FRAC_PI_4).abs() < 1e-12) {
                Ok(())
            } else {
                Err(Error::Unsupported(
                    "no deterministic feed-forward plan exists for theta != pi/4".into(),
                ))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedforwardStep {
    pub angle: f64,
    pub frame: PauliFrame,
}

/// Adapted angle for the next step given the outcomes so far.
pub fn feedforward_plan(family: &FamilySpec, target_angles: &[f64], outcomes_so_far: &[u8]) -> Result<FeedforwardStep> {
    deterministic_family(family)?;
    let k = outcomes_so_far.len();
    let target = *target_angles.get(k).ok_or_else(|| {
        Error::InvalidSpec(format!("no target angle for step {k} ({} given)", target_angles.len()))
    })?;
    let frame = outcomes_so_far.iter().fold(PauliFrame::default(), |f, &m| f.advance(m));
    Ok(FeedforwardStep { angle: frame.angle_sign() * target, frame })
}

/// Compiled ideal gate `prod_k H R_Z(phi_k)`, later steps on the left.
pub fn ideal_cluster_gate(angles: &[f64]) -> CMatrix {
    angles
        .iter()
        .fold(CMatrix::identity(2), |acc, &phi| hadamard().matmul(&rz(phi)).matmul(&acc))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum OutcomeSource {
    Forced(Vec<u8>),
    Seeded { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub basis: MeasurementBasis,
    pub outcome: u8,
    pub probability: f64,
    pub branch_probabilities: [f64; 2],
    pub applied_operator: CMatrix,
}

#[derive(Clone, Debug)]
pub struct TeleportRecord {
    pub steps: Vec<StepRecord>,
    /// Product of applied operators, latest on the left.
    pub accumulated: CMatrix,
    pub frame: PauliFrame,
}

impl TeleportRecord {
    pub fn outcomes(&self) -> Vec<u8> {
        self.steps.iter().map(|s| s.outcome).collect()
    }

    /// Top-left 2x2 block of the accumulated operator.
    pub fn logical_gate(&self) -> CMatrix {
        block2(&self.accumulated, 0)
    }
}

fn block2(m: &CMatrix, offset: usize) -> CMatrix {
    CMatrix::from_rows(&[
        [m[(offset, offset)], m[(offset, offset + 1)]],
        [m[(offset + 1, offset)], m[(offset + 1, offset + 1)]],
    ])
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub record: TeleportRecord,
    pub final_state: CorrelationState,
    /// Oracle fidelity after each step; empty when the chain is too long.
    pub oracle_fidelities: Vec<f64>,
}

impl ProtocolRun {
    pub fn min_oracle_fidelity(&self) -> Option<f64> {
        self.oracle_fidelities.iter().copied().reduce(f64::min)
    }
}

/// Measures the first `angles.len()` sites. With `feedforward`, each angle
/// is adapted to the Pauli frame of the earlier outcomes.
pub fn run_protocol(
    family: &FamilySpec,
    angles: &[f64],
    source: &OutcomeSource,
    feedforward: bool,
) -> Result<ProtocolRun> {
    let mps = family.build_mps()?;
    if feedforward {
        deterministic_family(family)?;
    }
    run_on_mps(&mps, angles, source, feedforward)
}

pub fn run_on_mps(mps: &MpsState, angles: &[f64], source: &OutcomeSource, feedforward: bool) -> Result<ProtocolRun> {
    let n = mps.n();
    if angles.len() > n {
        return Err(Error::InvalidSpec(format!("{} angles for {n} sites", angles.len())));
    }
    if let OutcomeSource::Forced(ms) = source {
        if ms.len() != angles.len() {
            return Err(Error::InvalidSpec(format!(
                "{} forced outcomes for {} angles",
                ms.len(),
                angles.len()
            )));
        }
    }
    let mut rng = match source {
        OutcomeSource::Seeded { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        OutcomeSource::Forced(_) => None,
    };

    let mut dense = if n <= ORACLE_MAX_N.min(max_dense_n()) {
        Some(mps.to_dense()?)
    } else {
        None
    };
    let mut oracle_fidelities = Vec::new();

    let mut state = CorrelationState::new(mps.left().clone())?;
    let d = state.dim();
    let mut frame = PauliFrame::default();
    let mut accumulated = CMatrix::identity(d);
    let mut steps = Vec::with_capacity(angles.len());

    for (k, &target) in angles.iter().enumerate() {
        let phi = if feedforward { frame.angle_sign() * target } else { target };
        let basis = MeasurementBasis::equatorial(phi);
        let ops = measurement_operators(&basis, mps.site(k));
        let outcome = match (&source, rng.as_mut()) {
            (OutcomeSource::Forced(ms), _) => Outcome::Forced(ms[k]),
            (_, Some(r)) => Outcome::Sampled(r),
            _ => unreachable!("seeded source always has an rng"),
        };
        let res = step(&state, &ops, outcome)?;
        let applied = if res.outcome == 0 { ops.0 } else { ops.1 };
        accumulated = applied.matmul(&accumulated);
        frame = frame.advance(res.outcome);
        state = res.state;

        if let Some(psi) = dense.take() {
            let projected = psi.project_qubit(0, basis.bra(res.outcome))?;
            if k + 1 < n {
                let predicted = contract_dense(&mps.sites()[k + 1..], &state.vector, mps.right())?;
                oracle_fidelities.push(fidelity_or_zero(projected.amplitudes(), predicted.amplitudes()));
                dense = Some(projected);
            }
        }

        steps.push(StepRecord {
            basis,
            outcome: res.outcome,
            probability: res.probability,
            branch_probabilities: res.branch_probabilities,
            applied_operator: applied,
        });
    }

    Ok(ProtocolRun {
        record: TeleportRecord { steps, accumulated, frame },
        final_state: state,
        oracle_fidelities,
    })
}

fn fidelity_or_zero(a: &CVector, b: &CVector) -> f64 {
    match (a.norm_sqr() == 0.0, b.norm_sqr() == 0.0) {
        (true, true) => 1.0,
        (false, false) => state_fidelity(a, b).unwrap_or(0.0),
        _ => 0.0,
    }
}

/// Spectral-norm distance between `R_Y(-t) R_Z(phi) R_Y(t)` and
/// `R_Y(t) R_Z(phi) R_Y(-t)`.
pub fn byproduct_discrepancy(theta: f64, phi: f64) -> f64 {
    let a = ry(-theta).matmul(&rz(phi)).matmul(&ry(theta));
    let b = ry(theta).matmul(&rz(phi)).matmul(&ry(-theta));
    (&a - &b).spectral_norm()
}

/// Which outcome sequences to examine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchMode {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchReport {
    pub steps: usize,
    pub branches: usize,
    pub feedforward: bool,
    /// How branches were compared: tracked Pauli frame or best Pauli correction.
    pub method: &'static str,
    /// Worst per-branch infidelity against the reference gate.
    pub max_infidelity: f64,
    /// Branch attaining `max_infidelity`.
    pub worst_branch: Vec<u8>,
    pub deterministic: bool,
}

fn branch_outcomes(steps: usize, mode: BranchMode) -> Result<Vec<Vec<u8>>> {
    let to_bits = |b: u64| (0..steps).map(|k| ((b >> k) & 1) as u8).collect::<Vec<u8>>();
    match mode {
        BranchMode::Exhaustive => {
            if steps > MAX_EXHAUSTIVE_STEPS {
                return Err(Error::InstanceTooLarge(format!(
                    "exhaustive enumeration of {steps} steps exceeds 2^{MAX_EXHAUSTIVE_STEPS} branches"
                )));
            }
            Ok((0..1u64 << steps).map(to_bits).collect())
        }
        BranchMode::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count)
                .map(|_| (0..steps).map(|_| rng.gen_range(0..2u8)).collect())
                .collect())
        }
    }
}

/// Gate on the logical block for one outcome branch, replayed purely from
/// the site matrices.
fn branch_gate(mps: &MpsState, angles: &[f64], outcomes: &[u8], feedforward: bool) -> (CMatrix, PauliFrame) {
    let mut frame = PauliFrame::default();
    let mut acc = CMatrix::identity(2);
    for (k, (&target, &m)) in angles.iter().zip(outcomes).enumerate() {
        let phi = if feedforward { frame.angle_sign() * target } else { target };
        let ops = measurement_operators(&MeasurementBasis::equatorial(phi), mps.site(k));
        let op = if m == 0 { ops.0 } else { ops.1 };
        acc = block2(&op, 0).matmul(&acc);
        frame = frame.advance(m);
    }
    (acc, frame)
}

/// Checks whether all outcome branches implement one logical gate.
///
/// With feed-forward the reference is the ideal compiled circuit and each
/// branch is corrected by its tracked Pauli frame. Without it, the
/// reference is the all-zeros branch and each branch gets the best of the
/// 16 two-sided Pauli corrections `P G Q`.
pub fn certify_branches(family: &FamilySpec, angles: &[f64], feedforward: bool, mode: BranchMode) -> Result<BranchReport> {
    let mps = family.build_mps()?;
    if feedforward {
        deterministic_family(family)?;
    }
    if angles.len() > mps.n() {
        return Err(Error::InvalidSpec(format!("{} angles for {} sites", angles.len(), mps.n())));
    }
    let branches = branch_outcomes(angles.len(), mode)?;
    let reference = if feedforward {
        ideal_cluster_gate(angles)
    } else {
        branch_gate(&mps, angles, &vec![0; angles.len()], false).0
    };

    let scores: Vec<Result<f64>> = branches
        .par_iter()
        .map(|outcomes| {
            let (gate, frame) = branch_gate(&mps, angles, outcomes, feedforward);
            if feedforward {
                operator_infidelity(&frame.matrix().adjoint().matmul(&gate), &reference)
            } else {
                best_pauli_correction(&gate, &reference)
            }
        })
        .collect();
    let mut max_infidelity = 0.0;
    let mut worst = 0;
    for (i, s) in scores.into_iter().enumerate() {
        let s = s?;
        if s > max_infidelity {
            max_infidelity = s;
            worst = i;
        }
    }
    Ok(BranchReport {
        steps: angles.len(),
        branches: branches.len(),
        feedforward,
        method: if feedforward { "tracked_pauli_frame" } else { "best_pauli_correction" },
        max_infidelity,
        worst_branch: branches.get(worst).cloned().unwrap_or_default(),
        deterministic: max_infidelity <= DETERMINISM_TOL,
    })
}

/// `min_{P,Q}` infidelity of `P G Q` against `target` over single-qubit Paulis.
pub fn best_pauli_correction(gate: &CMatrix, target: &CMatrix) -> Result<f64> {
    let mut best = f64::INFINITY;
    for p in 0..4 {
        for q in 0..4 {
            let corrected = pauli(p).matmul(gate).matmul(&pauli(q));
            best = best.min(operator_infidelity(&corrected, target)?);
        }
    }
    Ok(best)
}

/// `Z R_Y(theta) R_Z(phi)`: the outcome-0 gate of the theta family up to
/// the factor `1/sqrt(2)`.
pub fn theta_gate(theta: f64, phi: f64, m: u8) -> CMatrix {
    let u0 = pauli_z().matmul(&ry(theta)).matmul(&rz(phi));
    if m == 0 {
        u0
    } else {
        u0.matmul(&pauli_z())
    }
}

/// `X^m H R_Z(phi)`.
pub fn cluster_gate(phi: f64, m: u8) -> CMatrix {
    pauli_xz(m == 1, false).matmul(&hadamard()).matmul(&rz(phi))
}

/// Scale relating `B[phi_m]` to the unitary it implements.
pub const GATE_SCALE: f64 = FRAC_1_SQRT_2;
