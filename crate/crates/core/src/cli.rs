//! Scenario-driven front end behind the `mildflow` binary.
//!
//! A scenario is one JSON file; each command reads the sections it needs:
//!
//! | command         | sections                                   | outputs                                  |
//! |-----------------|--------------------------------------------|------------------------------------------|
//! | `solve`         | `system`, `x0`, `input`, `t_end`, `solver` | `trajectory.csv`, `diagnostics.json`     |
//! | `burgers`       | `burgers`, `solver`                        | `trajectory.csv`, `snapshots.csv`, `diagnostics.json` |
//! | `props`         | `system`, `props`, `solver`                | `props_report.json`, `props_summary.txt` |
//! | `admissibility` | `system`, `admissibility`                  | `admissibility.csv`, `admissibility.json` |
//! | `bcs`           | `bcs`, `solver`                            | `bcs_report.json`, `bcs_summary.txt`     |
//!
//! Exit codes: 0 success, 2 a checked property failed, 1 usage or config error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::admissibility::{estimate_scaling, upper_bound_h, verify_class, InputNorm, InputOperator, OperatorClass};
use crate::bcs::{representation_crosscheck, BoundaryControlSystem};
use crate::burgers::{BurgersSystem, LocalTerm};
use crate::error::{Error, Result};
use crate::flow_props::{
    check_axioms, check_brs, check_cep, check_continuous_dependence, check_deviation_sampled, perturbation_pairs,
    PropertyReport, PropsOptions,
};
use crate::input::{Forcing, InputSignal, PolynomialInput};
use crate::nonlinearity::Nonlinearity;
use crate::numerics::LadderTrend;
use crate::semigroup::{DenseGenerator, DiagonalSemigroup, Generator};
use crate::solver::{solve, EvolutionSystem, SolverConfig, Trajectory, TrajectoryStatus};
use crate::state::SpectralState;

#[derive(Debug, Parser)]
#[command(name = "mildflow", version, about = "Mild solutions of semilinear evolution equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a system and write the trajectory.
    Solve(CommonArgs),
    /// Simulate the Burgers case study.
    Burgers(CommonArgs),
    /// Run flow-property checks.
    Props(CommonArgs),
    /// Estimate admissibility constants on a time grid.
    Admissibility(CommonArgs),
    /// Cross-check the representations of a boundary control system.
    Bcs(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub substeps: Option<usize>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a) | Command::Burgers(a) | Command::Props(a) | Command::Admissibility(a) | Command::Bcs(a) => a,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    pub system: Option<SystemSpec>,
    pub x0: Option<StateSpec>,
    pub input: Option<InputSpec>,
    pub t_end: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub burgers: Option<BurgersSpec>,
    pub props: Option<PropsSpec>,
    pub admissibility: Option<AdmissibilitySpec>,
    pub bcs: Option<BcsSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SemigroupSpec {
    DirichletLaplacian {
        modes: usize,
        #[serde(default = "one")]
        omega: f64,
    },
    Eigenvalues {
        values: Vec<f64>,
        omega: Option<f64>,
    },
    Dense {
        matrix: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    Zero {
        channels: usize,
    },
    Rows {
        rows: Vec<Vec<f64>>,
        #[serde(default = "bounded")]
        class: OperatorClass,
    },
    Column {
        values: Vec<f64>,
        #[serde(default = "bounded")]
        class: OperatorClass,
    },
    /// Dirichlet input at `z = 0` on `(0, π)`.
    DirichletBoundary {
        #[serde(default = "boundary_alpha")]
        alpha: f64,
    },
    /// `[I | Dirichlet boundary]`, the Burgers input operator.
    BurgersInput {
        #[serde(default = "boundary_alpha")]
        alpha: f64,
    },
}

fn bounded() -> OperatorClass {
    OperatorClass::Bounded
}

fn boundary_alpha() -> f64 {
    0.2
}

/// Builtin nonlinearity registry.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Zero,
    ScalarSquare,
    Arctan {
        #[serde(default = "one")]
        gain: f64,
    },
    Linear {
        a: f64,
    },
    Cubic {
        a: f64,
    },
    BurgersLocal {
        local: LocalTerm,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeSpec {
    General,
    Analytic {
        alpha: f64,
        #[serde(default)]
        truncation_certificates: bool,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub semigroup: SemigroupSpec,
    pub input_operator: OperatorSpec,
    pub nonlinearity: NonlinearitySpec,
    pub mode: Option<ModeSpec>,
}

/// Initial state: explicit coefficients, sparse `[mode, value]` terms, or
/// `[k, a]` pairs meaning `a sin(kz)` on `(0, π)`. Omitted means zero.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub coeffs: Option<Vec<f64>>,
    pub terms: Option<Vec<(usize, f64)>>,
    pub sine: Option<Vec<(usize, f64)>>,
}

/// Piecewise-constant (`grid` + `values`), constant, or polynomial
/// (`polynomial[k]` is the vector coefficient of `t^k`).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub grid: Option<Vec<f64>>,
    pub values: Option<Vec<Vec<f64>>>,
    pub constant: Option<Vec<f64>>,
    pub polynomial: Option<Vec<Vec<f64>>>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersSpec {
    pub modes: usize,
    #[serde(default = "zero_local")]
    pub local: LocalTerm,
    #[serde(default)]
    pub x0: StateSpec,
    pub u: Option<InputSpec>,
    pub d: Option<InputSpec>,
    pub t_end: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Solve in `X` instead of `X_{1/2}`.
    #[serde(default)]
    pub plain_state_space: bool,
}

fn zero_local() -> LocalTerm {
    LocalTerm::Zero
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Axioms,
    Deviation,
    ContinuousDependence,
    Cep,
    Brs,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CepSpec {
    pub eps: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrsSpec {
    pub c: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropsSpec {
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub options: Option<PropsOptions>,
    #[serde(default = "ten")]
    pub deviation_pairs: usize,
    #[serde(default = "perturbation")]
    pub perturbation: f64,
    pub cep: Option<CepSpec>,
    pub brs: Option<BrsSpec>,
    /// Checks whose failure is the expected outcome.
    #[serde(default)]
    pub expect_fail: Vec<CheckName>,
}

fn ten() -> usize {
    10
}

fn perturbation() -> f64 {
    0.05
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissibilitySpec {
    pub t_grid: Option<Vec<f64>>,
    /// Exponent range `[a, b]` for the grid `2^a, …, 2^b`.
    pub dyadic: Option<(i32, i32)>,
    #[serde(default = "linf")]
    pub norm: InputNorm,
}

fn linf() -> InputNorm {
    InputNorm::LInf
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcsSpec {
    pub builtin: Option<String>,
    pub modes: Option<usize>,
    /// Custom system: eigenvalues plus coefficient tables.
    pub eigenvalues: Option<Vec<f64>>,
    pub lifting: Option<Vec<Vec<f64>>>,
    pub formal_ar: Option<Vec<Vec<f64>>>,
    pub trace: Option<Vec<Vec<f64>>>,
    pub class: Option<OperatorClass>,
    pub nonlinearity: Option<NonlinearitySpec>,
    #[serde(default)]
    pub x0: StateSpec,
    /// Add `R u(0)` to `x0` so the compatibility condition holds.
    #[serde(default)]
    pub lift_initial_state: bool,
    /// `u[k]` is the vector coefficient of `t^k`.
    pub u: Vec<Vec<f64>>,
    pub tau: f64,
    #[serde(default = "bcs_tol")]
    pub tolerance: f64,
}

fn bcs_tol() -> f64 {
    1e-6
}

fn cfg_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config { path: path.into(), message: message.into() }
}

/// Parses a scenario, reporting the path of the offending field.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        cfg_err(&path, e.into_inner().to_string())
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        fs::read_to_string(path).map_err(|e| cfg_err("<file>", format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

impl StateSpec {
    pub fn build(&self, n: usize, path: &str) -> Result<SpectralState> {
        let set = [self.coeffs.is_some(), self.terms.is_some(), self.sine.is_some()].iter().filter(|b| **b).count();
        if set > 1 {
            return Err(cfg_err(path, "give only one of coeffs, terms, sine"));
        }
        if let Some(c) = &self.coeffs {
            if c.len() != n {
                return Err(cfg_err(&format!("{path}.coeffs"), format!("expected {n} coefficients, got {}", c.len())));
            }
            return SpectralState::new(c.clone()).map_err(|e| cfg_err(&format!("{path}.coeffs"), e.to_string()));
        }
        let mut v = vec![0.0; n];
        let (list, scale, key) = match (&self.terms, &self.sine) {
            (Some(t), _) => (t, 1.0, "terms"),
            (_, Some(s)) => (s, (std::f64::consts::PI / 2.0).sqrt(), "sine"),
            _ => return Ok(SpectralState::zeros(n)),
        };
        for (i, (k, a)) in list.iter().enumerate() {
            if *k == 0 || *k > n {
                return Err(cfg_err(&format!("{path}.{key}[{i}]"), format!("mode {k} outside 1..={n}")));
            }
            v[k - 1] += a * scale;
        }
        SpectralState::new(v).map_err(|e| cfg_err(path, e.to_string()))
    }
}

impl InputSpec {
    pub fn build(&self, channels: usize, horizon: f64, path: &str) -> Result<Box<dyn Forcing>> {
        let horizon = self.horizon.unwrap_or(horizon);
        let check = |m: usize| {
            if m != channels {
                Err(cfg_err(path, format!("input has {m} channels, the operator takes {channels}")))
            } else {
                Ok(())
            }
        };
        let wrap = |e: Error| cfg_err(path, e.to_string());
        match (&self.grid, &self.values, &self.constant, &self.polynomial) {
            (Some(g), Some(v), None, None) => {
                let s = InputSignal::new(g.clone(), v.clone()).map_err(wrap)?;
                check(s.channels())?;
                Ok(Box::new(s))
            }
            (None, None, Some(c), None) => {
                check(c.len())?;
                Ok(Box::new(InputSignal::constant(c.clone(), horizon).map_err(wrap)?))
            }
            (None, None, None, Some(p)) => {
                let s = PolynomialInput::new(p.clone(), horizon).map_err(wrap)?;
                check(s.channels())?;
                Ok(Box::new(s))
            }
            (None, None, None, None) => Ok(Box::new(InputSignal::zero(channels, horizon).map_err(wrap)?)),
            _ => Err(cfg_err(path, "give grid+values, constant, or polynomial")),
        }
    }
}

impl NonlinearitySpec {
    fn build(&self, n: usize, mode: &Option<ModeSpec>, path: &str) -> Result<Nonlinearity> {
        Ok(match self {
            NonlinearitySpec::Zero => Nonlinearity::zero(n),
            NonlinearitySpec::ScalarSquare => Nonlinearity::scalar_square(n),
            NonlinearitySpec::Arctan { gain } => Nonlinearity::arctan(n, *gain),
            NonlinearitySpec::Linear { a } => Nonlinearity::linear(n, *a),
            NonlinearitySpec::Cubic { a } => Nonlinearity::cubic(n, *a),
            NonlinearitySpec::BurgersLocal { local } => {
                let b = BurgersSystem::new(n, *local).map_err(|e| cfg_err(path, e.to_string()))?;
                match mode {
                    Some(ModeSpec::Analytic { alpha, .. }) if *alpha == 0.5 => b.nonlinearity_half(),
                    Some(ModeSpec::Analytic { alpha, .. }) if *alpha > 0.0 => {
                        return Err(cfg_err(path, "burgers_local certificates exist for alpha = 0 and 1/2 only"))
                    }
                    _ => b.nonlinearity_x(),
                }
            }
        })
    }
}

fn dirichlet_column(n: usize, alpha: f64, path: &str) -> Result<InputOperator> {
    let b = BurgersSystem::new(n, LocalTerm::Zero)
        .and_then(|b| b.with_boundary_alpha(alpha))
        .map_err(|e| cfg_err(path, e.to_string()))?;
    Ok(b.boundary_operator())
}

impl SystemSpec {
    pub fn build(&self, modes_override: Option<usize>) -> Result<EvolutionSystem> {
        let gen: Generator = match &self.semigroup {
            SemigroupSpec::DirichletLaplacian { modes, omega } => {
                DiagonalSemigroup::dirichlet_laplacian(modes_override.unwrap_or(*modes), *omega)
                    .map_err(|e| cfg_err("system.semigroup", e.to_string()))?
                    .into()
            }
            SemigroupSpec::Eigenvalues { values, omega } => {
                let w = omega.unwrap_or_else(|| values.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0) + 1.0);
                DiagonalSemigroup::new(values.clone(), w).map_err(|e| cfg_err("system.semigroup", e.to_string()))?.into()
            }
            SemigroupSpec::Dense { matrix } => {
                DenseGenerator::new(matrix.clone()).map_err(|e| cfg_err("system.semigroup.matrix", e.to_string()))?.into()
            }
        };
        let n = gen.len();
        let p = "system.input_operator";
        let b = match &self.input_operator {
            OperatorSpec::Identity => InputOperator::identity(n),
            OperatorSpec::Zero { channels } => InputOperator::zero(n, *channels),
            OperatorSpec::Rows { rows, class } => {
                if rows.len() != n {
                    return Err(cfg_err(&format!("{p}.rows"), format!("expected {n} rows, got {}", rows.len())));
                }
                InputOperator::new(rows.clone(), *class).map_err(|e| cfg_err(p, e.to_string()))?
            }
            OperatorSpec::Column { values, class } => {
                if values.len() != n {
                    return Err(cfg_err(&format!("{p}.values"), format!("expected {n} values, got {}", values.len())));
                }
                InputOperator::from_column(values.clone(), *class).map_err(|e| cfg_err(p, e.to_string()))?
            }
            OperatorSpec::DirichletBoundary { alpha } => dirichlet_column(n, *alpha, p)?,
            OperatorSpec::BurgersInput { alpha } => {
                InputOperator::hstack(&InputOperator::identity(n), &dirichlet_column(n, *alpha, p)?)
                    .map_err(|e| cfg_err(p, e.to_string()))?
            }
        };
        let f = self.nonlinearity.build(n, &self.mode, "system.nonlinearity")?;
        let sys = EvolutionSystem::new(gen, b, f).map_err(|e| cfg_err("system", e.to_string()))?;
        match &self.mode {
            None | Some(ModeSpec::General) => Ok(sys),
            Some(ModeSpec::Analytic { alpha, truncation_certificates }) => {
                let sys = if *truncation_certificates {
                    sys.with_truncation_certificates().map_err(|e| cfg_err("system.mode", e.to_string()))?
                } else {
                    sys
                };
                sys.analytic(*alpha).map_err(|e| cfg_err("system.mode", e.to_string()))
            }
        }
    }
}

impl BcsSpec {
    pub fn build(&self, modes_override: Option<usize>) -> Result<BoundaryControlSystem> {
        let p = "bcs";
        if let Some(name) = &self.builtin {
            let n = modes_override.or(self.modes).unwrap_or(128);
            return BoundaryControlSystem::builtin(name, n).map_err(|e| cfg_err(&format!("{p}.builtin"), e.to_string()));
        }
        let (Some(eigs), Some(r), Some(ar), Some(tr)) = (&self.eigenvalues, &self.lifting, &self.formal_ar, &self.trace)
        else {
            return Err(cfg_err(p, "give `builtin` or all of eigenvalues, lifting, formal_ar, trace"));
        };
        let w = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0) + 1.0;
        let sg = DiagonalSemigroup::new(eigs.clone(), w).map_err(|e| cfg_err(&format!("{p}.eigenvalues"), e.to_string()))?;
        BoundaryControlSystem::new("custom", sg, r.clone(), ar.clone(), tr.clone(), self.class.unwrap_or(OperatorClass::Bounded))
            .map_err(|e| cfg_err(p, e.to_string()))
    }
}

/// Shortest round-trip formatting.
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// `t, norm_x[, norm_alpha], x_1, …, x_N`.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let n = tr.states.first().map_or(0, |s| s.len());
    let mut out = String::from("t,norm_x");
    if tr.norms_alpha.is_some() {
        out.push_str(",norm_alpha");
    }
    for k in 1..=n {
        let _ = write!(out, ",x_{k}");
    }
    out.push('\n');
    for (i, t) in tr.times.iter().enumerate() {
        out.push_str(&num(*t));
        out.push(',');
        out.push_str(&num(tr.norms_x[i]));
        if let Some(a) = &tr.norms_alpha {
            out.push(',');
            out.push_str(&num(a[i]));
        }
        for c in tr.states[i].coeffs() {
            out.push(',');
            out.push_str(&num(*c));
        }
        out.push('\n');
    }
    out
}

struct Outcome {
    files: Vec<(String, String)>,
    summary: String,
    failed: bool,
}

fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| cfg_err("--out", format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        fs::write(dir.join(name), body).map_err(|e| cfg_err("--out", format!("cannot write {name}: {e}")))?;
    }
    Ok(())
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn need<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| cfg_err(name, "missing section"))
}

fn apply_overrides(sc: &mut Scenario, args: &CommonArgs) {
    if let Some(s) = args.seed {
        sc.seed = s;
    }
    if let Some(s) = args.substeps {
        sc.solver.substeps_per_window = s;
    }
}

fn cmd_solve(sc: &Scenario, args: &CommonArgs) -> Result<Outcome> {
    let sys = need(&sc.system, "system")?.build(args.modes)?;
    let t_end = *need(&sc.t_end, "t_end")?;
    let x0 = sc.x0.clone().unwrap_or_default().build(sys.dim(), "x0")?;
    let u = sc.input.clone().unwrap_or_default().build(sys.b().channels(), t_end, "input")?;
    let tr = solve(&sys, &x0, u.as_ref(), t_end, &sc.solver)?;
    let failed = matches!(tr.status, TrajectoryStatus::Failed { .. });
    let summary = format!("status {:?}, final time {}, sup norm {}", tr.status, tr.final_time(), tr.sup_norm_x());
    Ok(Outcome {
        files: vec![("trajectory.csv".into(), trajectory_csv(&tr)), ("diagnostics.json".into(), pretty(&tr.diagnostics_json()))],
        summary,
        failed,
    })
}

fn cmd_burgers(sc: &Scenario, args: &CommonArgs) -> Result<Outcome> {
    let spec = need(&sc.burgers, "burgers")?;
    let n = args.modes.unwrap_or(spec.modes);
    let b = BurgersSystem::new(n, spec.local).map_err(|e| cfg_err("burgers.modes", e.to_string()))?;
    let x0 = spec.x0.build(n, "burgers.x0")?;
    let as_signal = |s: &Option<InputSpec>, m: usize, path: &str| -> Result<InputSignal> {
        match s {
            None => InputSignal::zero(m, spec.t_end),
            Some(s) if s.polynomial.is_some() => Err(cfg_err(path, "Burgers inputs are piecewise constant")),
            Some(s) => match (&s.grid, &s.values, &s.constant) {
                (Some(g), Some(v), None) => InputSignal::new(g.clone(), v.clone()),
                (None, None, Some(c)) => InputSignal::constant(c.clone(), s.horizon.unwrap_or(spec.t_end)),
                (None, None, None) => InputSignal::zero(m, s.horizon.unwrap_or(spec.t_end)),
                _ => Err(cfg_err(path, "give grid+values or constant")),
            },
        }
        .map_err(|e| match e {
            Error::Config { .. } => e,
            other => cfg_err(path, other.to_string()),
        })
        .and_then(|sig| {
            if sig.channels() != m {
                Err(cfg_err(path, format!("expected {m} channels, got {}", sig.channels())))
            } else {
                Ok(sig)
            }
        })
    };
    let u = as_signal(&spec.u, n, "burgers.u")?;
    let d = as_signal(&spec.d, 1, "burgers.d")?;
    let mut cfg = sc.solver.clone();
    cfg.checkpoints.extend(spec.snapshots.iter().copied());
    let tr = if spec.plain_state_space {
        b.simulate_x(&x0, &u, &d, spec.t_end, &cfg)?
    } else {
        b.simulate(&x0, &u, &d, spec.t_end, &cfg)?
    };
    let mut snap = String::from("z");
    let mut cols = Vec::new();
    for t in spec.snapshots.iter().chain(std::iter::once(&tr.final_time())) {
        if let Some(x) = tr.state_at(*t) {
            let _ = write!(snap, ",x_at_{}", num(*t));
            cols.push(b.to_physical(x));
        }
    }
    snap.push('\n');
    for (j, z) in b.grid().iter().enumerate() {
        snap.push_str(&num(*z));
        for c in &cols {
            snap.push(',');
            snap.push_str(&num(c[j]));
        }
        snap.push('\n');
    }
    let failed = matches!(tr.status, TrajectoryStatus::Failed { .. });
    let summary = format!(
        "status {:?}, final time {}, final norm {}, boundary value estimate {}",
        tr.status,
        tr.final_time(),
        tr.final_state().norm_x()?,
        b.boundary_value_estimate(tr.final_state())
    );
    Ok(Outcome {
        files: vec![
            ("trajectory.csv".into(), trajectory_csv(&tr)),
            ("snapshots.csv".into(), snap),
            ("diagnostics.json".into(), pretty(&tr.diagnostics_json())),
        ],
        summary,
        failed,
    })
}

fn cmd_props(sc: &Scenario, args: &CommonArgs) -> Result<Outcome> {
    let sys = need(&sc.system, "system")?.build(args.modes)?;
    let spec = need(&sc.props, "props")?;
    let mut opts = spec.options.clone().unwrap_or_else(|| PropsOptions { solver: sc.solver.clone(), ..Default::default() });
    opts.seed = sc.seed;
    if let Some(s) = args.substeps {
        opts.solver.substeps_per_window = s;
    }
    let mut reports: Vec<(CheckName, PropertyReport)> = Vec::new();
    for check in &spec.checks {
        match check {
            CheckName::Axioms => {
                for r in check_axioms(&sys, &opts)? {
                    reports.push((*check, r));
                }
            }
            CheckName::Deviation => reports.push((*check, check_deviation_sampled(&sys, &opts, spec.deviation_pairs)?)),
            CheckName::ContinuousDependence => {
                let pairs = perturbation_pairs(&sys, &opts, opts.samples, spec.perturbation);
                reports.push((*check, check_continuous_dependence(&sys, &pairs, opts.horizon, &opts)?));
            }
            CheckName::Cep => {
                let c = need(&spec.cep, "props.cep")?;
                reports.push((*check, check_cep(&sys, &c.eps, &c.h, &opts)?));
            }
            CheckName::Brs => {
                let c = need(&spec.brs, "props.brs")?;
                reports.push((*check, check_brs(&sys, c.c, c.tau, &opts)?));
            }
        }
    }
    let mut failed = false;
    let mut text = String::new();
    let mut json_reports = Vec::new();
    for (name, r) in &reports {
        let expected_fail = spec.expect_fail.contains(name);
        let ok = r.pass != expected_fail;
        failed |= !ok;
        let tag = match (r.pass, expected_fail) {
            (false, true) => "  (expected failure)",
            (true, true) => "  (UNEXPECTED pass)",
            _ => "",
        };
        let _ = writeln!(text, "{}{tag}", r.summary_line());
        json_reports.push(json!({ "check": name, "expected_failure": expected_fail, "report": r }));
    }
    Ok(Outcome {
        files: vec![("props_report.json".into(), pretty(&json_reports)), ("props_summary.txt".into(), text.clone())],
        summary: text.trim_end().to_string(),
        failed,
    })
}

fn cmd_admissibility(sc: &Scenario, args: &CommonArgs) -> Result<Outcome> {
    let sys = need(&sc.system, "system")?.build(args.modes)?;
    let spec = need(&sc.admissibility, "admissibility")?;
    let Some(sg) = sys.semigroup() else {
        return Err(cfg_err("system.semigroup", "admissibility estimates need a diagonal semigroup"));
    };
    let grid: Vec<f64> = match (&spec.t_grid, spec.dyadic) {
        (Some(g), None) => g.clone(),
        (None, Some((a, b))) if a <= b => (a..=b).map(|k| 2f64.powi(k)).collect(),
        (None, None) => (-14..=-2).map(|k| 2f64.powi(k)).collect(),
        _ => return Err(cfg_err("admissibility", "give t_grid or an increasing dyadic range, not both")),
    };
    if grid.iter().any(|t| !(*t > 0.0)) {
        return Err(cfg_err("admissibility.t_grid", "times must be positive"));
    }
    let est = estimate_scaling(sg, sys.b(), &grid, spec.norm);
    let smooth = matches!(sys.b().class(), OperatorClass::SmoothClass { .. });
    let mut csv = String::from("t,h_lower,h_envelope,h_upper_class,h_upper_smooth\n");
    let mut failed = false;
    for i in 0..est.t_grid.len() {
        let t = est.t_grid[i];
        let ub = if smooth { upper_bound_h(sg, sys.b(), 0.0, t).unwrap_or(f64::INFINITY) } else { f64::INFINITY };
        failed |= est.raw_lower[i] > est.upper[i] * (1.0 + 1e-9) || (smooth && est.raw_lower[i] > ub * (1.0 + 1e-9));
        let _ = writeln!(csv, "{},{},{},{},{}", num(t), num(est.raw_lower[i]), num(est.h_values[i]), num(est.upper[i]), num(ub));
    }
    let class_check = verify_class(sg, sys.b())?;
    failed |= class_check == LadderTrend::Divergent;
    let report = json!({
        "class": sys.b().class(),
        "class_ladder": format!("{class_check:?}"),
        "fitted_exponent": est.fitted_exponent,
        "norm": spec.norm,
    });
    let summary = format!("fitted exponent {:.4}, class ladder {:?}", est.fitted_exponent, class_check);
    Ok(Outcome {
        files: vec![("admissibility.csv".into(), csv), ("admissibility.json".into(), pretty(&report))],
        summary,
        failed,
    })
}

fn cmd_bcs(sc: &Scenario, args: &CommonArgs) -> Result<Outcome> {
    let spec = need(&sc.bcs, "bcs")?;
    let bcs = spec.build(args.modes)?;
    let n = bcs.semigroup().len();
    let u = PolynomialInput::new(spec.u.clone(), spec.tau).map_err(|e| cfg_err("bcs.u", e.to_string()))?;
    if u.channels() != bcs.channels() {
        return Err(cfg_err("bcs.u", format!("expected {} channels", bcs.channels())));
    }
    let mut x0 = spec.x0.build(n, "bcs.x0")?;
    if spec.lift_initial_state {
        x0 = x0.add(&bcs.lift(&u.eval(0.0)))?;
    }
    let f = match &spec.nonlinearity {
        None => Nonlinearity::zero(n),
        Some(s) => s.build(n, &None, "bcs.nonlinearity")?,
    };
    let rep = representation_crosscheck(&bcs, f, &x0, &u, spec.tau, &sc.solver, spec.tolerance)?;
    let text = format!(
        "{} {}  max_difference={:.3e}  tolerance={:.1e}\n",
        rep.system,
        if rep.pass { "PASS" } else { "FAIL" },
        rep.max_difference,
        rep.tolerance
    );
    Ok(Outcome {
        files: vec![("bcs_report.json".into(), pretty(&rep)), ("bcs_summary.txt".into(), text.clone())],
        summary: text.trim_end().into(),
        failed: !rep.pass,
    })
}

/// Runs one command; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let args = cli.command.args();
    let result = load_scenario(&args.scenario).and_then(|mut sc| {
        apply_overrides(&mut sc, args);
        sc.solver.validate()?;
        match &cli.command {
            Command::Solve(a) => cmd_solve(&sc, a),
            Command::Burgers(a) => cmd_burgers(&sc, a),
            Command::Props(a) => cmd_props(&sc, a),
            Command::Admissibility(a) => cmd_admissibility(&sc, a),
            Command::Bcs(a) => cmd_bcs(&sc, a),
        }
    });
    match result.and_then(|o| write_outputs(&args.out, &o.files).map(|_| o)) {
        Ok(o) => {
            if !args.quiet {
                println!("{}", o.summary);
            }
            if o.failed {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Parses `argv` and runs; clap usage errors exit with 1.
pub fn main_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                1
            } else {
                0
            }
        }
    }
}
