//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! (with indented detail lines) and exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::time::{Duration, Instant};

use mbqt_core::entanglement::{closed_form_spectrum, covariance_matrices, degeneracy_gap, dense_rdm_spectrum, es_from_covariance};
use mbqt_core::families::{
    sum_spec_with, theta_family_mps, theta_site, ClusterSpec, FamilySpec, ThetaFamilySpec,
};
use mbqt_core::mps::CorrelationLength;
use mbqt_core::numerics::{c64, operator_infidelity, re, state_fidelity, CMatrix};
use mbqt_core::spt::*;
use mbqt_core::teleport::{certify_branches, measurement_operators, run_protocol, BranchMode, MeasurementBasis, OutcomeSource};
use mbqt_core::{CVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Self { pass, summary: summary.into(), details: Vec::new() }
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.details.push(d.into());
        self
    }
}

// Independent single-qubit gates, R(t) = exp(i t sigma).
fn m2(a: [[C64; 2]; 2]) -> CMatrix {
    CMatrix::from_rows(&a)
}

fn x() -> CMatrix {
    m2([[re(0.0), re(1.0)], [re(1.0), re(0.0)]])
}

fn z() -> CMatrix {
    m2([[re(1.0), re(0.0)], [re(0.0), re(-1.0)]])
}

fn h() -> CMatrix {
    let s = FRAC_1_SQRT_2;
    m2([[re(s), re(s)], [re(s), re(-s)]])
}

fn rz(phi: f64) -> CMatrix {
    m2([[C64::from_polar(1.0, phi), re(0.0)], [re(0.0), C64::from_polar(1.0, -phi)]])
}

fn ry(t: f64) -> CMatrix {
    let (s, c) = t.sin_cos();
    m2([[re(c), re(s)], [re(-s), re(c)]])
}

fn identity() -> CMatrix {
    CMatrix::identity(2)
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let site = theta_site(FRAC_PI_4);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let phi = rng.gen_range(-PI..PI);
        let m: u8 = rng.gen_range(0..2);
        let ops = measurement_operators(&MeasurementBasis::equatorial(phi), &site);
        let applied = if m == 0 { ops.0 } else { ops.1 };
        let xm = if m == 1 { x() } else { identity() };
        let ideal = xm.matmul(&h()).matmul(&rz(phi));
        worst = worst.max(operator_infidelity(&applied, &ideal).unwrap());
    }
    let dt = t0.elapsed();
    Outcome::new(
        worst <= 1e-12 && dt < Duration::from_secs(1),
        format!("cluster teleportation identity: max infidelity {worst:.3e} (tol 1e-12), {:.3} s (budget 1 s)", dt.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_inf, mut worst_scale) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let theta = rng.gen_range(0.0..FRAC_PI_2);
        let phi = rng.gen_range(-PI..PI);
        let ops = measurement_operators(&MeasurementBasis::equatorial(phi), &theta_site(theta));
        let u0 = z().matmul(&ry(theta)).matmul(&rz(phi));
        let u1 = u0.matmul(&z());
        for (b, u) in [(&ops.0, &u0), (&ops.1, &u1)] {
            worst_inf = worst_inf.max(operator_infidelity(b, u).unwrap());
            worst_scale = worst_scale.max((b.spectral_norm() * 2f64.sqrt() - 1.0).abs());
        }
    }
    Outcome::new(
        worst_inf <= 1e-12 && worst_scale <= 1e-12,
        format!("theta-family gate law: max infidelity {worst_inf:.3e}, max |sqrt2 ||B|| - 1| {worst_scale:.3e} (tol 1e-12)"),
    )
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gammas: Vec<f64> = (0..11).map(|_| rng.gen_range(0.0..PI)).collect();
    let deltas: Vec<f64> = (0..11).map(|_| rng.gen_range(0.0..PI)).collect();
    let angles: Vec<f64> = (0..10).map(|_| rng.gen_range(-PI..PI)).collect();
    let sum = FamilySpec::DirectSum(sum_spec_with(gammas, deltas, [re(0.6), re(0.8)]).unwrap());
    let d4 = certify_branches(&sum, &angles, true, BranchMode::Exhaustive).unwrap();

    let theta = FamilySpec::Theta(ThetaFamilySpec::uniform(4, FRAC_PI_8, [re(1.0); 2], [re(1.0), re(0.0)]).unwrap());
    let d2 = certify_branches(&theta, &[0.3; 3], false, BranchMode::Exhaustive).unwrap();
    let dt = t0.elapsed();
    let pass = d4.branches == 1024 && d4.max_infidelity <= 1e-9 && d2.max_infidelity > 1e-4 && dt < Duration::from_secs(30);
    Outcome::new(pass, format!("determinism dichotomy: {:.3} s (budget 30 s)", dt.as_secs_f64()))
        .detail(format!("D=4, feed-forward, {} branches: max infidelity {:.3e} (need <= 1e-9)", d4.branches, d4.max_infidelity))
        .detail(format!(
            "D=2, theta=pi/8, phi=0.3, 3 steps: best Pauli correction leaves {:.3e} (need > 1e-4)",
            d2.max_infidelity
        ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let xi_of = |theta: f64| {
        let spec = ThetaFamilySpec::uniform(3, theta, [re(1.0); 2], [re(1.0), re(0.0)]).unwrap();
        theta_family_mps(&spec).unwrap().correlation_length().unwrap()
    };
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let theta = rng.gen_range(0.0..FRAC_PI_2);
        let t = xi_of(theta);
        worst = worst.max((t.lambda1 - re((2.0 * theta).cos())).norm());
    }
    let xi_c = xi_of(FRAC_PI_4).xi;
    let small = match xi_of(0.05).xi {
        CorrelationLength::Finite(v) => v * 2.0 * 0.05f64.powi(2),
        CorrelationLength::Diverging => f64::INFINITY,
    };
    let pass = worst <= 1e-10 && xi_c == CorrelationLength::Finite(0.0) && (small - 1.0).abs() <= 0.1;
    Outcome::new(pass, "correlation length")
        .detail(format!("max |lambda1 - cos 2theta| over 50 angles: {worst:.3e} (tol 1e-10)"))
        .detail(format!("xi(pi/4) = {xi_c:?}"))
        .detail(format!("xi(0.05) * 2 theta^2 = {small:.6} (need within 10% of 1)"))
}

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut stab, mut square, mut comm, mut sym, mut sym_sq) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in [4usize, 6, 8] {
        for _ in 0..20 {
            let thetas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..FRAC_PI_2 - 0.05)).collect();
            let spec = ThetaFamilySpec::symmetric(thetas.clone()).unwrap();
            let state = theta_family_mps(&spec).unwrap().to_dense().unwrap();
            let set = StabilizerSet::for_chain(&thetas).unwrap();
            stab = stab.max(verify_stabilizer_invariance(&state, &set, 1e-10).unwrap().max_residual());
            let named = set.named();
            for (i, (_, a)) in named.iter().enumerate() {
                square = square.max(square_defect(a));
                for (_, b) in &named[i + 1..] {
                    comm = comm.max(local_commutator_norm(a, b).unwrap());
                }
            }
            for g in SymmetryElement::all() {
                sym = sym.max(symmetry_residual(&state, g, &thetas, LastBondAngle::Bond).unwrap());
                let o = symmetry_operator(g, &thetas, n).unwrap();
                sym_sq = sym_sq.max((&o.matmul(&o) - &CMatrix::identity(o.rows())).max_abs());
            }
        }
    }
    let dt = t0.elapsed();
    let pass = stab <= 1e-10 && square <= 1e-12 && comm <= 1e-12 && sym <= 1e-10 && sym_sq <= 1e-10 && dt < Duration::from_secs(60);
    Outcome::new(pass, format!("stabilizer and symmetry suite: {:.3} s (budget 60 s)", dt.as_secs_f64()))
        .detail(format!("S|psi> = |psi>: {stab:.3e} (tol 1e-10)"))
        .detail(format!("S^2 = I: {square:.3e} (tol 1e-12)"))
        .detail(format!("stabilizer commutators: {comm:.3e} (tol 1e-12)"))
        .detail(format!("O(g)|psi> = |psi>: {sym:.3e} (tol 1e-10)"))
        .detail(format!("O(g)^2 = I: {sym_sq:.3e} (tol 1e-10)"))
}

fn sign_table(thetas: &[f64], form: EffectiveForm) -> (usize, Vec<String>) {
    let mut mismatches = 0;
    let mut rows = Vec::new();
    for side in [Side::Left, Side::Right] {
        for g in SymmetryElement::all() {
            let got = effective_pauli_signs_with(thetas, g, side, form).unwrap();
            let want = expected_signs(g, side);
            if got != want {
                mismatches += 1;
                rows.push(format!(
                    "{side:?} g=({},{}): (s_Z, s_X) = {got:?}, expected {want:?}",
                    g.g1 as u8, g.g2 as u8
                ));
            }
        }
    }
    (mismatches, rows)
}

fn criterion_6() -> Outcome {
    let thetas = [0.4, 0.9, 1.2, 0.3, 0.7, 1.0];
    let (bad, rows) = sign_table(&thetas, EffectiveForm::Stabilizer);
    let (bad_bare, _) = sign_table(&thetas, EffectiveForm::Bare);
    let table = cocycle_table().unwrap();
    let closed = CocycleTable::closed_form();
    let cocycle_ok = table == closed;
    let triples = table.consistency_violations();
    let mut out = Outcome::new(
        bad == 0 && cocycle_ok && triples == 0,
        "effective-Pauli signs and cocycle",
    )
    .detail(format!(
        "sign table, X_bar = P X Z (left) and P Z X (right): {bad} of 8 entries differ from ((-1)^g1, (-1)^g2)"
    ));
    for r in rows {
        out = out.detail(format!("  {r}"));
    }
    out.detail(format!("diagnostic: with X_bar = P X (bare), {bad_bare} of 8 entries differ"))
        .detail(format!("omega(g,h) = (-1)^(g2 h1) for all 16 pairs: {cocycle_ok}"))
        .detail(format!("64-triple consistency violations: {triples}"))
}

fn criterion_7() -> Outcome {
    let cluster = ThetaFamilySpec::symmetric(vec![FRAC_PI_4; 4]).unwrap();
    let blocks_ok: Vec<(SymmetryElement, f64, f64)> = SymmetryElement::all()
        .into_iter()
        .map(|g| {
            let y = mbqt_core::numerics::gates::pauli_y();
            let v = mbqt_core::numerics::kron(
                &if g.g1 { y.clone() } else { identity() },
                &if g.g2 { y } else { identity() },
            )
            .unwrap();
            let report = onsite_symmetry_check(&cluster, g).unwrap();
            let best_phase = report.v.as_ref().map_or(f64::NAN, |s| s.phase);
            // phi_g = 0 fixed: residual of A[i+g] = V A[i] V^dagger
            let mps = theta_family_mps(&cluster).unwrap();
            let (a, b) = (mps.site(0), mps.site(1));
            let k = |p: &CMatrix, q: &CMatrix| mbqt_core::numerics::kron(p, q).unwrap();
            let blocks = [k(&a.b0, &b.b0), k(&a.b1, &b.b0), k(&a.b0, &b.b1), k(&a.b1, &b.b1)];
            let residual = (0..4)
                .map(|i| (&blocks[i ^ g.index()] - &v.matmul(&blocks[i]).matmul(&v.adjoint())).max_abs())
                .fold(0.0, f64::max);
            (g, residual, best_phase)
        })
        .collect();
    let part1 = blocks_ok.iter().all(|&(_, r, _)| r <= 1e-12);

    let generators = [SymmetryElement::new(1, 0), SymmetryElement::new(0, 1)];
    let mut viol = Vec::new();
    for g in generators {
        for d in [-0.2, 0.2] {
            viol.push((g, d, non_onsite_violation(g, &[FRAC_PI_4 + d; 6]).unwrap()));
        }
    }
    let part2 = viol.iter().all(|&(_, _, v)| v >= 1e-3);
    let both = SymmetryElement::new(1, 1);
    let diag = [-0.2, 0.2].map(|d| non_onsite_violation(both, &[FRAC_PI_4 + d; 6]).unwrap());

    let mut out = Outcome::new(part1 && part2, "onsite-injectivity dichotomy");
    for (g, r, p) in &blocks_ok {
        out = out.detail(format!(
            "theta=pi/4, g=({},{}), V=Y^g1 (x) Y^g2, phi_g=0: residual {r:.3e} (tol 1e-12); best phi_g = {p:.6}",
            g.g1 as u8, g.g2 as u8
        ));
    }
    for (g, d, v) in viol {
        out = out.detail(format!("theta=pi/4{d:+}, g=({},{}): violation {v:.3e} (need >= 1e-3)", g.g1 as u8, g.g2 as u8));
    }
    out.detail(format!(
        "informational: g=(1,1) is a Pauli string at any theta, violation {:.3e} / {:.3e}",
        diag[0], diag[1]
    ))
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut cuts = 0;
    for _ in 0..100 {
        let n = rng.gen_range(5..=12);
        let thetas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..FRAC_PI_2)).collect();
        let mut bnd = || [c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
        let (l, r) = (bnd(), bnd());
        let spec = ThetaFamilySpec::new(thetas, l, r).unwrap();
        let mps = theta_family_mps(&spec).unwrap();
        let dense = mps.to_dense().unwrap();
        for cut in 3..n - 1 {
            let closed = closed_form_spectrum(&spec, cut).unwrap().normalized;
            let cov = es_from_covariance(&covariance_matrices(&mps, cut).unwrap()).unwrap().normalized;
            let rdm = dense_rdm_spectrum(&dense, cut).unwrap();
            for k in 0..2 {
                worst = worst.max((closed[k] - cov[k]).abs()).max((closed[k] - rdm[k]).abs());
            }
            worst = worst.max(rdm[2..].iter().fold(0.0f64, |a, &v| a.max(v.abs())));
            cuts += 1;
        }
    }

    let gap_at = |n: usize| {
        let spec = ThetaFamilySpec::uniform(n, FRAC_PI_8, [re(1.0), re(0.0)], [re(1.0), re(0.0)]).unwrap();
        degeneracy_gap(&spec, n / 2).unwrap()
    };
    let ns = [8usize, 12, 16, 20];
    let gaps: Vec<f64> = ns.iter().map(|&n| gap_at(n)).collect();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let slope = fit_slope(&ns.map(|n| n as f64), &gaps.iter().map(|g| g.ln()).collect::<Vec<_>>());
    let target = 2.0 * FRAC_PI_4.cos().ln();
    let slope_ok = ((slope - target) / target).abs() <= 0.1;
    let far = (gap_at(64).ln() - gap_at(60).ln()) / 4.0;
    let dt = t0.elapsed();

    let pass = worst <= 1e-9 && monotone && slope_ok && dt < Duration::from_secs(60);
    Outcome::new(pass, format!("entanglement spectrum: {:.3} s (budget 60 s)", dt.as_secs_f64()))
        .detail(format!(
            "closed form / covariance / dense over 100 specs, {cuts} bulk cuts: max deviation {worst:.3e} (tol 1e-9)"
        ))
        .detail(format!("gap at n = 8, 12, 16, 20 (theta=pi/8, ell=n/2): {}, decreasing: {monotone}", gaps.iter().map(|g| format!("{g:.4e}")).collect::<Vec<_>>().join(", ")))
        .detail(format!("log-gap slope {slope:.4} vs 2 ln cos(pi/4) = {target:.4} (need within 10%)"))
        .detail(format!(
            "diagnostic: local slope at n = 60..64 is {far:.4}; (1/2) ln cos(pi/4) = {:.4}",
            0.5 * FRAC_PI_4.cos().ln()
        ))
}

fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

fn criterion_9() -> Outcome {
    let n = 8;
    let k = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut gammas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..PI)).collect();
    let mut deltas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..PI)).collect();
    gammas[n - 2] = FRAC_PI_4;
    deltas[n - 2] = FRAC_PI_4;
    let sum = FamilySpec::DirectSum(sum_spec_with(gammas, deltas, [re(0.6), re(0.8)]).unwrap());
    let cluster = FamilySpec::Cluster(ClusterSpec { n });
    let angles: Vec<f64> = (0..k).map(|_| rng.gen_range(-PI..PI)).collect();

    let (mut worst_gate, mut worst_state, mut cross) = (0.0f64, 0.0f64, 0.0f64);
    for branch in 0..1usize << k {
        let outcomes: Vec<u8> = (0..k).map(|j| ((branch >> j) & 1) as u8).collect();
        let src = OutcomeSource::Forced(outcomes);
        for ff in [false, true] {
            let a = run_protocol(&sum, &angles, &src, ff).unwrap();
            let b = run_protocol(&cluster, &angles, &src, ff).unwrap();
            worst_gate = worst_gate.max(operator_infidelity(&a.record.logical_gate(), &b.record.logical_gate()).unwrap());
            let logical = CVector::from_vec(a.final_state.vector.as_slice()[..2].to_vec());
            worst_state = worst_state.max(1.0 - state_fidelity(&logical, &b.final_state.vector).unwrap());
            let acc = &a.record.accumulated;
            for r in 0..4 {
                for c in 0..4 {
                    if (r < 2) != (c < 2) {
                        cross = cross.max(acc[(r, c)].norm());
                    }
                }
            }
        }
    }
    let pass = worst_gate <= 1e-10 && worst_state <= 1e-10 && cross == 0.0;
    Outcome::new(pass, "junk-sector isolation")
        .detail(format!("logical gate vs cluster protocol, {} branches x 2 modes: max infidelity {worst_gate:.3e} (tol 1e-10)", 1 << k))
        .detail(format!("logical correlation state vs cluster: max infidelity {worst_state:.3e} (tol 1e-10)"))
        .detail(format!("largest cross-block entry: {cross:e} (need exactly 0)"))
}

fn main() {
    let criteria: [(u8, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, f) in criteria {
        let o = f();
        println!("[{}] criterion {id}: {}", if o.pass { "PASS" } else { "FAIL" }, o.summary);
        for d in &o.details {
            println!("       {d}");
        }
        if !o.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
    } else {
        println!("acceptance: {} of 9 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
