//! The `mbqt` command-line front end.
//!
//! Every command reads a JSON [`RunConfig`]; flags override the matching
//! config keys. Output goes to `--out` or stdout and is byte-stable for a
//! given config and seed.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use config::{BranchSpec, CommandKind, RunConfig};
use config::{SpectrumSourceName, SweepConfig, SweepKind};

use crate::entanglement::{covariance_matrices, params_hash, spectrum_row, SpectrumRow, SpectrumSource};
use crate::error::Error;
use crate::families::{FamilySpec, ThetaFamilySpec};
use crate::mps::{max_dense_n, CorrelationLength, HARD_MAX_DENSE_N, MAX_DENSE_ENV};
use crate::numerics::{re, CMatrix, C64};
use crate::spt::{symmetry_report, SymmetryReport};
use crate::teleport::{certify_branches, run_protocol, OutcomeSource, DETERMINISM_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "mbqt", version, about = "MPS gate-teleportation and SPT diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest chain expanded densely.
    #[arg(long, global = true)]
    pub max_n: Option<usize>,
    /// `exhaustive` or `sample:K`.
    #[arg(long, global = true)]
    pub branches: Option<BranchSpec>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Cmd {
    /// State summary: norm, canonical residuals, transfer spectrum, xi.
    Family,
    /// Run a teleportation protocol and certify its outcome branches.
    Teleport,
    /// Entanglement spectrum CSV.
    Spectrum,
    /// Stabilizer and symmetry report (JSON).
    Symmetry,
    /// Parameter grid, one CSV row per point.
    Sweep,
    /// Dispatch on the config's `command` key.
    Run,
}

impl Cmd {
    fn kind(self) -> Option<CommandKind> {
        match self {
            Self::Family => Some(CommandKind::Family),
            Self::Teleport => Some(CommandKind::Teleport),
            Self::Spectrum => Some(CommandKind::Spectrum),
            Self::Symmetry => Some(CommandKind::Symmetry),
            Self::Sweep => Some(CommandKind::Sweep),
            Self::Run => None,
        }
    }
}

/// Failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ContractViolation(_) | Error::NoConvergence(_) | Error::DegenerateInput(_) => {
                Self::Numerical(e.to_string())
            }
            _ => Self::Config(e.to_string()),
        }
    }
}

/// Config plus flag overrides.
#[derive(Clone, Debug)]
pub struct Settings {
    pub config: RunConfig,
    pub seed: u64,
    /// `--seed` given on the command line; replaces seeded outcome sources.
    pub seed_flag: bool,
    pub tol: f64,
    pub max_n: usize,
    pub branches: BranchSpec,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(cli: &Cli, config: RunConfig) -> Result<Self, CliError> {
        let tol = cli.tol.or(config.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("tol must be positive, got {tol}")));
        }
        let max_n = match cli.max_n.or(config.max_n) {
            Some(m) if m > HARD_MAX_DENSE_N => {
                return Err(CliError::Config(format!("max-n {m} exceeds the hard cap {HARD_MAX_DENSE_N}")))
            }
            Some(m) => m,
            None => max_dense_n(),
        };
        Ok(Self {
            seed: cli.seed.or(config.seed).unwrap_or(0),
            seed_flag: cli.seed.is_some(),
            tol,
            max_n,
            branches: cli.branches.or(config.branches).unwrap_or(BranchSpec::Exhaustive),
            out: cli.out.clone().or_else(|| config.out.clone()),
            config,
        })
    }

    fn family(&self) -> Result<&FamilySpec, CliError> {
        let f = self.config.family.as_ref().ok_or_else(|| CliError::Config("missing key `family`".into()))?;
        f.validate()?;
        Ok(f)
    }

    fn dense_ok(&self, n: usize) -> Result<(), Error> {
        if n > self.max_n {
            return Err(Error::InstanceTooLarge(format!("{n} sites exceeds max-n {}", self.max_n)));
        }
        Ok(())
    }
}

/// Parses `args`, runs the command and writes its output. Returns the exit
/// code; diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, out)) => {
            let written = match &out {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Err((e, partial)) => {
            if let Some(text) = partial {
                print!("{text}");
            }
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

type Outcome = Result<String, (CliError, Option<String>)>;

fn execute(cli: &Cli) -> Result<(String, Option<PathBuf>), (CliError, Option<String>)> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| (CliError::Config("--config PATH is required".into()), None))?;
    let config = RunConfig::load(path).map_err(|e| (CliError::Config(e), None))?;
    let settings = Settings::resolve(cli, config).map_err(|e| (e, None))?;
    // The library reads the dense cap from the environment.
    std::env::set_var(MAX_DENSE_ENV, settings.max_n.to_string());

    let kind = match (cli.command.kind(), settings.config.command) {
        (Some(k), Some(c)) if k != c => {
            return Err((
                CliError::Config(format!("config command `{c:?}` does not match subcommand `{k:?}`")),
                None,
            ))
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => return Err((CliError::Config("missing key `command`".into()), None)),
    };
    let lift = |r: Result<String, CliError>| r.map_err(|e| (e, None));
    let text = match kind {
        CommandKind::Family => lift(cmd_family(&settings)),
        CommandKind::Teleport => lift(cmd_teleport(&settings)),
        CommandKind::Spectrum => lift(cmd_spectrum(&settings)),
        CommandKind::Symmetry => cmd_symmetry(&settings),
        CommandKind::Sweep => lift(cmd_sweep(&settings)),
    }?;
    Ok((text, settings.out))
}

/// Imaginary parts at rounding level are dropped.
fn fmt_c64(z: C64) -> String {
    if z.im.abs() <= 1e-14 * z.re.abs().max(1.0) {
        format!("{}", z.re)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

fn fmt_matrix(m: &CMatrix) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|r| format!("[{}]", m.row(r).iter().map(|&z| fmt_c64(z)).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn family_name(f: &FamilySpec) -> &'static str {
    match f {
        FamilySpec::Cluster(_) => "cluster",
        FamilySpec::Theta(_) => "theta",
        FamilySpec::DirectSum(_) => "direct_sum",
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn cmd_family(s: &Settings) -> Result<String, CliError> {
    let family = s.family()?;
    let mps = family.build_mps()?;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "family: {}", family_name(family));
    let _ = writeln!(w, "n: {}", mps.n());
    let _ = writeln!(w, "bond_dim: {}", mps.bond_dim().map_or("mixed".to_string(), |d| d.to_string()));

    let pair = covariance_matrices(&mps, 1)?;
    let norm_sqr = pair.vr.matmul(&pair.vl).trace().re;
    let _ = writeln!(w, "norm: {}", norm_sqr.max(0.0).sqrt());

    let canon = mps.check_left_canonical(s.tol);
    let residuals: Vec<String> = canon.residuals.iter().map(|r| r.to_string()).collect();
    let _ = writeln!(w, "left_canonical: {}", yes_no(canon.passed));
    let _ = writeln!(w, "canonical_residuals: {}", residuals.join(" "));

    match mps.correlation_length() {
        Ok(t) => {
            let eigs: Vec<String> = t.eigenvalues.iter().map(|&z| fmt_c64(z)).collect();
            let _ = writeln!(w, "transfer_eigenvalues: {}", eigs.join(" "));
            let _ = writeln!(w, "lambda1: {}", fmt_c64(t.lambda1));
            match t.xi {
                CorrelationLength::Finite(x) => {
                    let _ = writeln!(w, "xi: {x}");
                }
                CorrelationLength::Diverging => {
                    let _ = writeln!(w, "xi: diverging");
                }
            }
        }
        Err(Error::Unsupported(why)) => {
            let _ = writeln!(w, "xi: n/a ({why})");
        }
        Err(e) => return Err(e.into()),
    }

    if s.config.dense_dump {
        s.dense_ok(mps.n())?;
        let dense = mps.to_dense()?;
        let _ = writeln!(w, "amplitudes:");
        for (i, z) in dense.amplitudes().as_slice().iter().enumerate() {
            let _ = writeln!(w, "{i} {} {}", z.re, z.im);
        }
    }
    Ok(out)
}

pub fn cmd_teleport(s: &Settings) -> Result<String, CliError> {
    let family = s.family()?;
    let protocol = s
        .config
        .protocol
        .as_ref()
        .ok_or_else(|| CliError::Config("missing key `protocol`".into()))?;
    let source = match (&protocol.outcomes, s.seed_flag) {
        (Some(OutcomeSource::Forced(ms)), _) => OutcomeSource::Forced(ms.clone()),
        (Some(OutcomeSource::Seeded { seed }), false) => OutcomeSource::Seeded { seed: *seed },
        _ => OutcomeSource::Seeded { seed: s.seed },
    };
    let run = run_protocol(family, &protocol.angles, &source, protocol.feedforward)?;
    let report = certify_branches(family, &protocol.angles, protocol.feedforward, s.branches.mode(s.seed))?;

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "family: {}", family_name(family));
    let _ = writeln!(w, "steps: {}", protocol.angles.len());
    let _ = writeln!(w, "feedforward: {}", yes_no(protocol.feedforward));
    let _ = writeln!(w, "step,phi,outcome,probability,p0,p1");
    for (k, st) in run.record.steps.iter().enumerate() {
        let _ = writeln!(
            w,
            "{k},{},{},{},{},{}",
            st.basis.phi1, st.outcome, st.probability, st.branch_probabilities[0], st.branch_probabilities[1]
        );
    }
    let outcomes: String = run.record.outcomes().iter().map(|m| m.to_string()).collect();
    let _ = writeln!(w, "outcomes: {outcomes}");
    let _ = writeln!(w, "frame: x={} z={}", run.record.frame.x as u8, run.record.frame.z as u8);
    let _ = writeln!(w, "logical_gate: {}", fmt_matrix(&run.record.logical_gate()));
    if let Some(f) = run.min_oracle_fidelity() {
        let _ = writeln!(w, "oracle_min_fidelity: {f}");
    }
    let mode = match s.branches {
        BranchSpec::Exhaustive => "exhaustive".to_string(),
        BranchSpec::Sample(k) => format!("sample:{k}"),
    };
    let _ = writeln!(w, "branches: {} ({mode})", report.branches);
    let _ = writeln!(w, "method: {}", report.method);
    let label = if report.feedforward { "max branch infidelity" } else { "min correction infidelity (worst branch)" };
    let _ = writeln!(w, "{label}: {}", report.max_infidelity);
    let worst: String = report.worst_branch.iter().map(|m| m.to_string()).collect();
    let _ = writeln!(w, "worst_branch: {worst}");
    let _ = writeln!(w, "deterministic: {}", yes_no(report.max_infidelity <= DETERMINISM_TOL));
    Ok(out)
}

fn default_cuts(n: usize) -> Vec<usize> {
    let bulk: Vec<usize> = (3..n.saturating_sub(1)).collect();
    if bulk.is_empty() {
        (1..n).collect()
    } else {
        bulk
    }
}

pub fn cmd_spectrum(s: &Settings) -> Result<String, CliError> {
    let family = s.family()?;
    let n = family.n();
    let cuts = if s.config.cuts.is_empty() { default_cuts(n) } else { s.config.cuts.clone() };
    let sources: Vec<SpectrumSource> = match &s.config.sources {
        Some(v) => v.iter().map(|&x| x.into()).collect(),
        None if family.as_theta().is_none() => vec![SpectrumSource::Dense],
        None if n > s.max_n => vec![SpectrumSource::ClosedForm, SpectrumSource::Covariance],
        None => vec![SpectrumSource::ClosedForm, SpectrumSource::Covariance, SpectrumSource::Dense],
    };
    let mut out = format!("{}\n", SpectrumRow::HEADER);
    for &cut in &cuts {
        for &src in &sources {
            if src == SpectrumSource::Dense {
                s.dense_ok(n)?;
            }
            let _ = writeln!(out, "{}", spectrum_row(family, cut, src)?.to_csv());
        }
    }
    Ok(out)
}

fn cmd_symmetry(s: &Settings) -> Outcome {
    let fail = |e: CliError| (e, None);
    let family = s.family().map_err(fail)?;
    let spec = family
        .as_theta()
        .ok_or_else(|| fail(CliError::Config("symmetry checks need the cluster or theta family".into())))?;
    s.dense_ok(spec.n).map_err(|e| fail(e.into()))?;
    let report: SymmetryReport = symmetry_report(&spec, s.tol).map_err(|e| fail(e.into()))?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if report.passed {
        Ok(text)
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        Err((CliError::Numerical(format!("failed checks: {}", failed.join(", "))), Some(text)))
    }
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n'], ";")
}

fn sweep_spec(sw: &SweepConfig, n: usize, theta: f64) -> Result<ThetaFamilySpec, Error> {
    let thetas = vec![theta; n];
    match (sw.kind, sw.left, sw.right) {
        (_, Some(l), Some(r)) => ThetaFamilySpec::new(thetas, l, r),
        (SweepKind::Symmetry, l, None) => {
            let sym = ThetaFamilySpec::symmetric(thetas)?;
            ThetaFamilySpec::new(sym.thetas, l.unwrap_or(sym.left), sym.right)
        }
        (_, l, r) => ThetaFamilySpec::new(
            thetas,
            l.unwrap_or([re(1.0), re(0.0)]),
            r.unwrap_or([re(1.0), re(0.0)]),
        ),
    }
}

fn spectrum_point(s: &Settings, sw: &SweepConfig, n: usize, theta: f64) -> String {
    let source: SpectrumSource = sw.source.unwrap_or(SpectrumSourceName::ClosedForm).into();
    let cut = sw.ell.at(n);
    let row = sweep_spec(sw, n, theta).and_then(|spec| {
        if source == SpectrumSource::Dense {
            s.dense_ok(n)?;
        }
        let family = FamilySpec::Theta(spec);
        spectrum_row(&family, cut, source)
    });
    match row {
        Ok(r) => format!("{},{theta},ok", r.to_csv()),
        Err(e) => {
            let hash = sweep_spec(sw, n, theta)
                .map(|spec| params_hash(&FamilySpec::Theta(spec)))
                .unwrap_or_default();
            format!("{n},{cut},{hash},,,,{},{theta},error: {}", source.as_str(), sanitize(&e.to_string()))
        }
    }
}

fn symmetry_point(s: &Settings, sw: &SweepConfig, n: usize, theta: f64) -> String {
    let report = sweep_spec(sw, n, theta).and_then(|spec| {
        s.dense_ok(n)?;
        symmetry_report(&spec, s.tol)
    });
    match report {
        Ok(r) => {
            let max_of = |pred: &dyn Fn(&str) -> bool| {
                r.checks.iter().filter(|c| pred(&c.name)).map(|c| c.residual).fold(0.0, f64::max)
            };
            let stab = max_of(&|name| name.starts_with('S') && !name.contains("^2"));
            let square = max_of(&|name| name.ends_with("= I"));
            let comm = max_of(&|name| name == "stabilizer commutators");
            let sym = max_of(&|name| name.starts_with('O') && name.ends_with("|psi>"));
            format!("{n},{theta},{stab},{square},{comm},{sym},{},ok", yes_no(r.passed))
        }
        Err(e) => format!("{n},{theta},,,,,,error: {}", sanitize(&e.to_string())),
    }
}

pub fn cmd_sweep(s: &Settings) -> Result<String, CliError> {
    let sw = s.config.sweep.as_ref().ok_or_else(|| CliError::Config("missing key `sweep`".into()))?;
    let grid: Vec<(usize, f64)> = sw.n.iter().flat_map(|&n| sw.theta.iter().map(move |&t| (n, t))).collect();
    let header = match sw.kind {
        SweepKind::Spectrum => format!("{},theta,status", SpectrumRow::HEADER),
        SweepKind::Symmetry => {
            "n,theta,stabilizer_residual,square_defect,commutator_norm,symmetry_residual,passed,status".to_string()
        }
    };
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&(n, theta)| match sw.kind {
            SweepKind::Spectrum => spectrum_point(s, sw, n, theta),
            SweepKind::Symmetry => symmetry_point(s, sw, n, theta),
        })
        .collect();
    let mut out = header + "\n";
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(json: &str) -> Settings {
        let cli = Cli::try_parse_from(["mbqt", "run"]).unwrap();
        Settings::resolve(&cli, RunConfig::from_json(json).unwrap()).unwrap()
    }

    #[test]
    fn cluster_family_report() {
        let out = cmd_family(&settings(r#"{"family": {"family": "cluster", "n": 4}}"#)).unwrap();
        assert!(out.contains("xi: 0\n"), "{out}");
        assert!(out.contains("left_canonical: yes"));
    }

    #[test]
    fn theta_family_lambda1() {
        let json = format!(
            r#"{{"family": {{"family": "theta", "n": 4, "thetas": [{t}, {t}, {t}, {t}],
                "left": [[1,0],[1,0]], "right": [[1,0],[0,0]]}}}}"#,
            t = std::f64::consts::FRAC_PI_8
        );
        let out = cmd_family(&settings(&json)).unwrap();
        let line = out.lines().find(|l| l.starts_with("lambda1: ")).unwrap();
        let v: f64 = line["lambda1: ".len()..].parse().unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4.cos()).abs() < 1e-10, "{line}");
    }

    #[test]
    fn singular_point_does_not_abort_sweep() {
        let out = cmd_sweep(&settings(r#"{"sweep": {"kind": "symmetry", "n": [4], "theta": [0.0, 0.5]}}"#))
            .unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].contains("error: singular P_theta"), "{}", lines[1]);
        assert!(lines[2].ends_with(",yes,ok"), "{}", lines[2]);
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(Error::SingularTheta(0.0)).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::from(Error::ContractViolation("x".into())).exit_code(), EXIT_NUMERICAL);
    }
}
