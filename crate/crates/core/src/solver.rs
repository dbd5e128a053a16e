//! Mild solutions by windowed Picard iteration.
//!
//! Each window `[t, t + t₁]` is sized so that the fixed-point map
//! `y ↦ T(·)y₀ + ∫T(·-s)B₂f(y(s),u(s))ds + ∫T(·-s)Bu(s)ds` is a certified
//! contraction of a ball around the free trajectory. Inside a window the
//! iterate lives on a uniform sub-grid; `f` along the iterate is reconstructed
//! piecewise-linearly in time and convolved exactly per mode, while the
//! linear parts (free flow and input convolution) are exact. Windows are
//! chained through the cocycle property.
//!
//! In analytic mode the iteration runs on `y = (ωI - A)^α x`, the norm is that
//! of `X_α`, and the window certificates use the singular kernel bounds.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::admissibility::{modewise_h, upper_bound_h, InputOperator, OperatorClass};
use crate::error::{Error, Result};
use crate::input::Forcing;
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{ladder_trend, mittag_leffler, phi1, LadderTrend};
use crate::semigroup::{DiagonalSemigroup, Generator, StepKernel};
use crate::state::{l2, SpectralState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveMode {
    General,
    Analytic { alpha: f64 },
}

#[derive(Debug, Clone)]
pub struct EvolutionSystem {
    generator: Generator,
    b: InputOperator,
    b2: InputOperator,
    f: Nonlinearity,
    mode: SolveMode,
    allow_truncation_certificates: bool,
    envelope: Option<KernelEnvelope>,
    consts: Constants,
}

/// Operator norms and smooth-class prefactors, cached per system.
#[derive(Debug, Clone, Default)]
struct Constants {
    b_norm: f64,
    b2_norm: f64,
    /// `(R, exponent)` with `h_t ≤ R t^{exponent} e^{κ⁺ t}` for `t ≤ 1`.
    b_smooth: Option<(f64, f64)>,
    b2_smooth: Option<(f64, f64)>,
}

impl EvolutionSystem {
    pub fn new(generator: impl Into<Generator>, b: InputOperator, f: Nonlinearity) -> Result<Self> {
        let generator = generator.into();
        let n = generator.len();
        if b.dim() != n {
            return Err(Error::Dimension { expected: n, got: b.dim() });
        }
        if f.dim() != n {
            return Err(Error::Dimension { expected: n, got: f.dim() });
        }
        if generator.diagonal().is_none() && b.class() != OperatorClass::Bounded {
            return Err(Error::InvalidArgument("bounded generators take bounded input operators only".into()));
        }
        Self {
            generator,
            b,
            b2: InputOperator::identity(n),
            f,
            mode: SolveMode::General,
            allow_truncation_certificates: false,
            envelope: None,
            consts: Constants::default(),
        }
        .revalidate()
    }

    /// Replaces `B₂` (which must be zero-class, i.e. bounded or smooth-class).
    pub fn with_b2(mut self, b2: InputOperator) -> Result<Self> {
        if b2.dim() != self.dim() || b2.channels() != self.f.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: b2.dim() });
        }
        if matches!(b2.class(), OperatorClass::QAdmissible { .. }) {
            return Err(Error::NotZeroClass);
        }
        if self.generator.diagonal().is_none() && b2.class() != OperatorClass::Bounded {
            return Err(Error::NotZeroClass);
        }
        self.b2 = b2;
        self.revalidate()
    }

    /// Lets the analytic mode rely on truncation-level bounds when `B` is
    /// rougher than `L(U, X_{-1+α+ε})`.
    pub fn with_truncation_certificates(mut self) -> Result<Self> {
        self.allow_truncation_certificates = true;
        self.revalidate()
    }

    /// Switches to the `X_α` formulation.
    pub fn analytic(mut self, alpha: f64) -> Result<Self> {
        let Some(sg) = self.generator.diagonal() else {
            return Err(Error::InvalidArgument("analytic mode needs a diagonal analytic semigroup".into()));
        };
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("analytic exponent {alpha} outside [0, 1)")));
        }
        self.envelope = if alpha > 0.0 { Some(KernelEnvelope::new(sg, alpha)?) } else { None };
        self.mode = SolveMode::Analytic { alpha };
        self.revalidate()
    }

    fn revalidate(mut self) -> Result<Self> {
        let alpha = self.alpha();
        let smooth = |op: &InputOperator, d: f64| -> Option<(f64, f64)> {
            let sg = self.generator.diagonal()?;
            let a = op.class().smoothness()?;
            if !(d < a) || op.is_zero() {
                return None;
            }
            let r = upper_bound_h(sg, op, d, 1.0).ok()? / (sg.kappa().max(0.0)).exp();
            Some((r, a - d))
        };
        self.consts = Constants {
            b_norm: self.b.operator_norm(),
            b2_norm: self.b2.operator_norm(),
            b_smooth: smooth(&self.b, alpha),
            b2_smooth: smooth(&self.b2, 0.0),
        };
        if let SolveMode::Analytic { alpha } = self.mode {
            if alpha > 0.0 {
                if self.b2.class() != OperatorClass::Bounded {
                    return Err(Error::InvalidArgument("analytic mode needs a bounded B2".into()));
                }
                let beta = self.b.class().smoothness().unwrap_or(0.0);
                if !(beta > alpha) && !self.allow_truncation_certificates && !self.b.is_zero() {
                    return Err(Error::InvalidArgument(format!(
                        "analytic({alpha}) needs B in L(U, X_(-1+alpha+eps)); declared smoothness {beta}"
                    )));
                }
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn semigroup(&self) -> Option<&DiagonalSemigroup> {
        self.generator.diagonal()
    }

    pub fn b(&self) -> &InputOperator {
        &self.b
    }

    pub fn b2(&self) -> &InputOperator {
        &self.b2
    }

    pub fn f(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    /// Same system with `f` replaced.
    pub fn with_nonlinearity(&self, f: Nonlinearity) -> Result<Self> {
        if f.dim() != self.f.dim() {
            return Err(Error::Dimension { expected: self.f.dim(), got: f.dim() });
        }
        let mut s = self.clone();
        s.f = f;
        Ok(s)
    }

    /// Exponent of the working norm (0 in general mode).
    pub fn alpha(&self) -> f64 {
        match self.mode {
            SolveMode::General => 0.0,
            SolveMode::Analytic { alpha } => alpha,
        }
    }

    /// Per-mode weights of the working norm.
    pub fn working_weights(&self) -> Option<Vec<f64>> {
        let a = self.alpha();
        if a == 0.0 {
            None
        } else {
            self.generator.diagonal().map(|s| s.fractional_weights(a).unwrap())
        }
    }

    /// Norm used for `K` and blow-up (`X`, or `X_α` in analytic mode).
    pub fn working_norm(&self, x: &SpectralState) -> Result<f64> {
        match self.working_weights() {
            None => x.norm_x(),
            Some(w) => x.norm_weighted(&w),
        }
    }

    pub fn m(&self) -> f64 {
        self.generator.m()
    }

    pub fn lambda(&self) -> f64 {
        self.generator.lambda()
    }

    /// Zero-class constant of the nonlinear convolution in the working norm.
    pub fn c_t(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let Some(sg) = self.generator.diagonal() else {
            return self.consts.b2_norm * phi1(self.lambda(), t);
        };
        if self.alpha() == 0.0 {
            let class = match self.b2.class() {
                OperatorClass::Bounded => self.consts.b2_norm * sg.m() * phi1(sg.lambda(), t),
                _ => self.smooth_bound(&self.b2, self.consts.b2_smooth, 0.0, t),
            };
            return class.min(modewise_h(sg, &self.b2, None, t));
        }
        let env = self.envelope.as_ref().expect("analytic envelope");
        let w = self.working_weights().unwrap();
        (self.consts.b2_norm * env.integral(t)).min(modewise_h(sg, &self.b2, Some(&w), t))
    }

    /// `L^∞` admissibility constant of `B` in the working norm.
    pub fn h_t(&self, t: f64) -> f64 {
        if t <= 0.0 || self.b.is_zero() {
            return 0.0;
        }
        let Some(sg) = self.generator.diagonal() else {
            return self.consts.b_norm * phi1(self.lambda(), t);
        };
        let alpha = self.alpha();
        let w = self.working_weights();
        let class = match (self.b.class(), alpha == 0.0) {
            (OperatorClass::Bounded, true) => self.m() * self.consts.b_norm * phi1(self.lambda(), t),
            (OperatorClass::Bounded, false) => {
                self.consts.b_norm * self.envelope.as_ref().expect("analytic envelope").integral(t)
            }
            (OperatorClass::SmoothClass { alpha: beta }, _) if beta > alpha => {
                self.smooth_bound(&self.b, self.consts.b_smooth, alpha, t)
            }
            (OperatorClass::QAdmissible { h_bound: Some(h), .. }, true) if t <= 1.0 => h,
            _ => f64::INFINITY,
        };
        class.min(modewise_h(sg, &self.b, w.as_deref(), t))
    }

    fn smooth_bound(&self, op: &InputOperator, cached: Option<(f64, f64)>, d: f64, t: f64) -> f64 {
        let sg = self.generator.diagonal().unwrap();
        match cached {
            Some((r, e)) if t <= 1.0 => r * t.powf(e) * (sg.kappa().max(0.0) * t).exp(),
            _ => upper_bound_h(sg, op, d, t).unwrap_or(f64::INFINITY),
        }
    }
}

/// Upper Riemann sums of `∫_0^t max_n w_n e^{μ_n s} ds` on a geometric grid
/// down to `2^{-60}`; each summand is monotone in `s`, so the cell maximum
/// sits at an endpoint and the sum is a rigorous upper bound.
#[derive(Debug, Clone)]
struct KernelEnvelope {
    grid: Vec<f64>,
    cumulative: Vec<f64>,
    fallback: (f64, f64, f64),
}

impl KernelEnvelope {
    const PER_OCTAVE: i32 = 16;

    fn new(sg: &DiagonalSemigroup, alpha: f64) -> Result<Self> {
        let w = sg.fractional_weights(alpha)?;
        let mus = sg.eigenvalues();
        let sup = |s: f64| mus.iter().zip(&w).map(|(mu, w)| w * (mu * s).exp()).fold(0.0, f64::max);
        let mut grid = vec![0.0];
        for k in 0..=(60 * Self::PER_OCTAVE) {
            grid.push(2f64.powf(-60.0 + k as f64 / Self::PER_OCTAVE as f64));
        }
        let vals: Vec<f64> = grid.iter().map(|s| sup(*s)).collect();
        let mut cumulative = vec![0.0];
        for i in 1..grid.len() {
            let cell = (grid[i] - grid[i - 1]) * vals[i].max(vals[i - 1]);
            cumulative.push(cumulative[i - 1] + cell);
        }
        let kappa = sg.kappa();
        let c = sg.smoothing_constant(alpha, kappa, 1.0)?;
        Ok(Self { grid, cumulative, fallback: (c, kappa.max(0.0), alpha) })
    }

    fn integral(&self, t: f64) -> f64 {
        let (c, kp, a) = self.fallback;
        let singular = c * (kp * t).exp() * t.powf(1.0 - a) / (1.0 - a);
        if t > 1.0 {
            return singular;
        }
        let i = self.grid.partition_point(|s| *s < t);
        self.cumulative[i.min(self.grid.len() - 1)].min(singular)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub substeps_per_window: usize,
    pub picard_tol: f64,
    pub max_picard_iters: usize,
    pub blowup_threshold: f64,
    pub contraction_target: f64,
    pub max_window_bisections: usize,
    pub min_window: f64,
    /// Scale of the free margin `δ = ball_margin · max(1, K)` of the invariant ball.
    pub ball_margin: f64,
    pub max_window: f64,
    /// Times that must be window boundaries.
    pub checkpoints: Vec<f64>,
    pub record_substeps: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            substeps_per_window: 32,
            picard_tol: 1e-10,
            max_picard_iters: 60,
            blowup_threshold: 1e6,
            contraction_target: 0.5,
            max_window_bisections: 40,
            min_window: 1e-9,
            ball_margin: 1.0,
            max_window: 1.0,
            checkpoints: Vec::new(),
            record_substeps: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.substeps_per_window < 8 {
            return bad("substeps_per_window must be at least 8");
        }
        if !(self.contraction_target > 0.0 && self.contraction_target < 1.0) {
            return bad("contraction_target must lie in (0, 1)");
        }
        if !(self.picard_tol > 0.0) || !(self.blowup_threshold > 0.0) || !(self.min_window > 0.0) {
            return bad("tolerances and thresholds must be positive");
        }
        if !(self.ball_margin > 0.0) || !(self.max_window > 0.0) {
            return bad("ball_margin and max_window must be positive");
        }
        if self.max_picard_iters == 0 {
            return bad("max_picard_iters must be positive");
        }
        Ok(())
    }

    /// `⌈log(tol)/log(θ)⌉ + 5`.
    pub fn iteration_budget(&self) -> usize {
        (self.picard_tol.ln() / self.contraction_target.ln()).ceil() as usize + 5
    }
}

/// Certified constants of one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepCertificate {
    pub t1: f64,
    /// Radius bound `K'` of the invariant ball.
    pub k_bound: f64,
    pub lipschitz: f64,
    pub c_t: f64,
    pub h_t: f64,
    pub rho: f64,
}

fn certify(sys: &EvolutionSystem, k: f64, u_sup: f64, cap: f64, cfg: &SolverConfig) -> std::result::Result<StepCertificate, f64> {
    let theta = cfg.contraction_target;
    let f = sys.f();
    let delta = cfg.ball_margin * k.max(1.0);
    let h_cap = sys.h_t(cap);
    let rho = if u_sup > 0.0 { h_cap * u_sup + delta } else { delta };
    let sig = f.sigma().eval(u_sup) + f.growth_c();
    let (m, lam) = (sys.m(), sys.lambda());
    let mut t = cap;
    for _ in 0..=cfg.max_window_bisections {
        let kp = m * (lam * t).exp() * k + rho;
        let l = f.lipschitz(kp.max(u_sup));
        let c = sys.c_t(t);
        let h = sys.h_t(t);
        let contraction = c * l <= theta;
        let forced = if u_sup > 0.0 { h * u_sup } else { 0.0 };
        let invariance = forced + c * (l * kp + sig) <= rho;
        if contraction && invariance {
            return Ok(StepCertificate { t1: t, k_bound: kp, lipschitz: l, c_t: c, h_t: h, rho });
        }
        t *= 0.5;
    }
    Err(t)
}

/// Largest dyadic `t₁ ≤ 1` for which the contraction and ball-invariance
/// conditions hold at state bound `k` and input bound `u_sup`.
pub fn select_step(sys: &EvolutionSystem, k: f64, u_sup: f64, cfg: &SolverConfig) -> Result<f64> {
    cfg.validate()?;
    certify(sys, k, u_sup, cfg.max_window.min(1.0), cfg)
        .map(|c| c.t1)
        .map_err(|_| Error::InvalidArgument("step selection exhausted".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowDiagnostics {
    pub t_start: f64,
    pub width: f64,
    pub k_bound: f64,
    pub lipschitz: f64,
    pub c_t: f64,
    pub h_t: f64,
    pub contraction_factor: f64,
    pub iterations: usize,
    pub bisections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    Blowup { t_m: f64, bracket: (f64, f64) },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
    pub norms_x: Vec<f64>,
    /// `X_α` norms, in analytic mode.
    pub norms_alpha: Option<Vec<f64>>,
    pub window_boundaries: Vec<f64>,
    pub windows: Vec<WindowDiagnostics>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralState {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self.status {
            TrajectoryStatus::Blowup { t_m, .. } => Some(t_m),
            _ => None,
        }
    }

    /// State recorded at time `t` (grid points only).
    pub fn state_at(&self, t: f64) -> Option<&SpectralState> {
        let tol = 1e-12 * t.abs().max(1.0);
        let i = self.times.partition_point(|s| *s < t - tol);
        match self.times.get(i) {
            Some(s) if (s - t).abs() <= tol => Some(&self.states[i]),
            _ => None,
        }
    }

    pub fn sup_norm_x(&self) -> f64 {
        self.norms_x.iter().copied().fold(0.0, f64::max)
    }

    /// JSON sidecar: status, window boundaries and per-window certificates.
    pub fn diagnostics_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status,
            "final_time": self.final_time(),
            "window_boundaries": self.window_boundaries,
            "windows": self.windows,
        })
    }
}

/// A single Picard window on the sub-grid `τ_k = k t₁ / S`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSolution {
    pub times: Vec<f64>,
    pub states: Vec<SpectralState>,
    pub contraction_factor: f64,
    pub iterations: usize,
}

enum PicardOutcome {
    Converged { ys: Vec<Vec<f64>>, iterations: usize, factor: f64 },
    Diverged(&'static str),
}

struct Working {
    w: Option<Vec<f64>>,
    b_w: InputOperator,
    b2_w: InputOperator,
}

impl Working {
    fn new(sys: &EvolutionSystem) -> Self {
        let w = sys.working_weights();
        let (b_w, b2_w) = match &w {
            None => (sys.b.clone(), sys.b2.clone()),
            Some(w) => (sys.b.scaled_rows(w), sys.b2.scaled_rows(w)),
        };
        Self { w, b_w, b2_w }
    }

    fn to_x(&self, y: &[f64]) -> SpectralState {
        match &self.w {
            None => SpectralState::from_raw(y.to_vec()),
            Some(w) => SpectralState::from_raw(y.iter().zip(w).map(|(a, b)| a / b).collect()),
        }
    }

    fn to_y(&self, x: &SpectralState) -> Vec<f64> {
        match &self.w {
            None => x.coeffs().to_vec(),
            Some(w) => x.coeffs().iter().zip(w).map(|(a, b)| a * b).collect(),
        }
    }

    fn g(&self, sys: &EvolutionSystem, y: &[f64], u: &[f64]) -> Vec<f64> {
        let fx = sys.f.eval(&self.to_x(y), u);
        self.b2_w.apply(fx.coeffs())
    }
}

fn input_step(
    sys: &EvolutionSystem,
    work: &Working,
    kernel: &StepKernel,
    u: &dyn Forcing,
    a: f64,
    b: f64,
) -> Result<Vec<f64>> {
    match &sys.generator {
        Generator::Diagonal(sg) => Ok(u.modal_convolution(sg.eigenvalues(), &work.b_w, a, b)),
        Generator::Dense(d) => {
            let pieces = u
                .constant_pieces(a, b)
                .ok_or_else(|| Error::InvalidArgument("bounded generators need piecewise-constant inputs".into()))?;
            let n = d.len();
            let mut acc = nalgebra::DVector::zeros(n);
            let single = pieces.len() == 1 && ((pieces[0].1 - pieces[0].0) - (b - a)).abs() <= 1e-14 * (b - a);
            for (ca, cb, v) in pieces {
                let bv = nalgebra::DVector::from_vec(work.b_w.apply(&v));
                if single {
                    if let StepKernel::Dense { p, .. } = kernel {
                        acc += p * bv;
                        continue;
                    }
                }
                let (_, p, _) = d.integrals(cb - ca);
                acc += d.expm(b - cb) * (p * bv);
            }
            Ok(acc.as_slice().to_vec())
        }
    }
}

fn run_picard(
    sys: &EvolutionSystem,
    work: &Working,
    y0: &[f64],
    u: &dyn Forcing,
    t0: f64,
    width: f64,
    cfg: &SolverConfig,
) -> Result<PicardOutcome> {
    let s = cfg.substeps_per_window;
    let h = width / s as f64;
    let kernel = sys.generator.step_kernel(h);
    let n = y0.len();
    let node = |k: usize| if k == s { t0 + width } else { t0 + k as f64 * h };

    let mut base = Vec::with_capacity(s + 1);
    base.push(y0.to_vec());
    let mut inp = vec![0.0; n];
    let mut free = y0.to_vec();
    let with_input = !work.b_w.is_zero();
    for k in 0..s {
        free = kernel.propagate(&free);
        if with_input {
            let step = input_step(sys, work, &kernel, u, node(k), node(k + 1))?;
            inp = kernel.propagate(&inp).iter().zip(&step).map(|(a, b)| a + b).collect();
        }
        base.push(free.iter().zip(&inp).map(|(a, b)| a + b).collect::<Vec<f64>>());
    }
    let us: Vec<Vec<f64>> = (0..=s).map(|k| if k == s { u.value_before(node(k)) } else { u.value_at(node(k)) }).collect();

    // initial iterate: the free trajectory
    let mut y: Vec<Vec<f64>> = Vec::with_capacity(s + 1);
    let mut fr = y0.to_vec();
    y.push(fr.clone());
    for _ in 0..s {
        fr = kernel.propagate(&fr);
        y.push(fr.clone());
    }

    let mut prev_diff: Option<f64> = None;
    let mut factor: f64 = 0.0;
    for it in 1..=cfg.max_picard_iters {
        let g: Vec<Vec<f64>> = y.iter().zip(&us).map(|(yk, uk)| work.g(sys, yk, uk)).collect();
        let mut next = Vec::with_capacity(s + 1);
        let mut nl = vec![0.0; n];
        next.push(base[0].clone());
        for k in 0..s {
            nl = kernel.advance(&nl, &g[k], &g[k + 1]);
            next.push(base[k + 1].iter().zip(&nl).map(|(a, b)| a + b).collect::<Vec<f64>>());
        }
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (a, b) in next.iter().zip(&y) {
            let d = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            diff = diff.max(d);
            scale = scale.max(l2(a));
        }
        if !scale.is_finite() || !diff.is_finite() || scale > 10.0 * cfg.blowup_threshold {
            return Ok(PicardOutcome::Diverged("iterate blow-up"));
        }
        let floor = 1e-13 * scale.max(1.0);
        if let Some(p) = prev_diff {
            if p > floor && diff > floor {
                factor = factor.max(diff / p);
            }
        }
        y = next;
        if diff <= cfg.picard_tol * scale.max(1.0) {
            if factor > cfg.contraction_target + 0.1 {
                return Ok(PicardOutcome::Diverged("contraction factor above target"));
            }
            return Ok(PicardOutcome::Converged { ys: y, iterations: it, factor });
        }
        prev_diff = Some(diff);
    }
    Ok(PicardOutcome::Diverged("picard divergence"))
}

/// One Picard window of width `t1` from `x0`, with the input read from time 0.
pub fn picard_window(
    sys: &EvolutionSystem,
    x0: &SpectralState,
    u: &dyn Forcing,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<WindowSolution> {
    cfg.validate()?;
    if !(t1 > 0.0) {
        return Err(Error::InvalidArgument("window width must be positive".into()));
    }
    if t1 > u.horizon() * (1.0 + 1e-12) {
        return Err(Error::BeyondHorizon { t: t1, horizon: u.horizon() });
    }
    let work = Working::new(sys);
    let y0 = work.to_y(x0);
    match run_picard(sys, &work, &y0, u, 0.0, t1, cfg)? {
        PicardOutcome::Converged { ys, iterations, factor } => {
            let s = cfg.substeps_per_window;
            Ok(WindowSolution {
                times: (0..=s).map(|k| t1 * k as f64 / s as f64).collect(),
                states: ys.iter().map(|y| work.to_x(y)).collect(),
                contraction_factor: factor,
                iterations,
            })
        }
        PicardOutcome::Diverged(why) => Err(Error::InvalidArgument(why.into())),
    }
}

fn check_inputs(sys: &EvolutionSystem, x0: &SpectralState, u: &dyn Forcing, t_end: f64) -> Result<()> {
    if x0.is_blown_up() {
        return Err(Error::BlownUpState);
    }
    if x0.len() != sys.dim() {
        return Err(Error::Dimension { expected: sys.dim(), got: x0.len() });
    }
    if u.channels() != sys.b.channels() {
        return Err(Error::Dimension { expected: sys.b.channels(), got: u.channels() });
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    if t_end > u.horizon() * (1.0 + 1e-12) {
        return Err(Error::BeyondHorizon { t: t_end, horizon: u.horizon() });
    }
    Ok(())
}

/// Mild solution on `[0, t_end]` (or up to blow-up).
pub fn solve(
    sys: &EvolutionSystem,
    x0: &SpectralState,
    u: &dyn Forcing,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_inputs(sys, x0, u, t_end)?;
    let work = Working::new(sys);
    let analytic = sys.alpha() > 0.0;

    let mut stops: Vec<f64> = cfg.checkpoints.iter().copied().filter(|c| *c > 0.0 && *c < t_end).collect();
    if let Some(pieces) = u.constant_pieces(0.0, t_end) {
        stops.extend(pieces.iter().map(|p| p.1).filter(|c| *c < t_end));
    }
    stops.push(t_end);
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.clone()],
        norms_x: vec![x0.norm_x()?],
        norms_alpha: analytic.then(|| vec![sys.working_norm(x0).unwrap()]),
        window_boundaries: vec![0.0],
        windows: Vec::new(),
        status: TrajectoryStatus::Completed,
    };
    let mut y = work.to_y(x0);
    let mut t = 0.0;
    let mut stop_idx = 0;
    let s = cfg.substeps_per_window;

    while stop_idx < stops.len() {
        let stop = stops[stop_idx];
        if stop - t <= 1e-14 * stop.max(1.0) {
            stop_idx += 1;
            continue;
        }
        let cap = cfg.max_window.min(stop - t);
        let k = l2(&y);
        let u_sup = u.sup_norm_on(t, t + cap);
        let cert = match certify(sys, k, u_sup, cap, cfg) {
            Ok(c) => c,
            Err(last) => {
                traj.status = if last < cfg.min_window || k > cfg.blowup_threshold {
                    TrajectoryStatus::Blowup { t_m: t, bracket: (t - traj.windows.last().map_or(0.0, |w| w.width), t) }
                } else {
                    TrajectoryStatus::Failed { reason: "step selection exhausted".into() }
                };
                return Ok(traj);
            }
        };
        let mut width = cert.t1;
        let mut bisections = 0;
        let outcome = loop {
            match run_picard(sys, &work, &y, u, t, width, cfg)? {
                PicardOutcome::Converged { ys, iterations, factor } => break Ok((ys, iterations, factor)),
                PicardOutcome::Diverged(why) => {
                    bisections += 1;
                    width *= 0.5;
                    if width < cfg.min_window {
                        break Err(None);
                    }
                    if bisections > cfg.max_window_bisections {
                        break Err(Some(why));
                    }
                }
            }
        };
        let (ys, iterations, factor) = match outcome {
            Ok(v) => v,
            Err(None) => {
                let prev = traj.windows.last().map_or(0.0, |w| w.width);
                traj.status = TrajectoryStatus::Blowup { t_m: t, bracket: (t - prev, t) };
                return Ok(traj);
            }
            Err(Some(why)) => {
                traj.status = TrajectoryStatus::Failed { reason: why.into() };
                return Ok(traj);
            }
        };
        let exact_stop = width == cap && cap == stop - t;
        let t_next = if exact_stop { stop } else { t + width };
        traj.windows.push(WindowDiagnostics {
            t_start: t,
            width,
            k_bound: cert.k_bound,
            lipschitz: cert.lipschitz,
            c_t: sys.c_t(width),
            h_t: sys.h_t(width),
            contraction_factor: factor,
            iterations,
            bisections,
        });
        let h = width / s as f64;
        for (kk, yk) in ys.iter().enumerate().skip(1) {
            let tk = if kk == s { t_next } else { t + kk as f64 * h };
            let wn = l2(yk);
            if wn > cfg.blowup_threshold || !wn.is_finite() {
                let lo = *traj.times.last().unwrap();
                traj.status = TrajectoryStatus::Blowup { t_m: tk, bracket: (lo, tk) };
                return Ok(traj);
            }
            if cfg.record_substeps || kk == s {
                let x = work.to_x(yk);
                traj.norms_x.push(x.norm_x().unwrap_or(f64::INFINITY));
                if let Some(na) = traj.norms_alpha.as_mut() {
                    na.push(wn);
                }
                traj.times.push(tk);
                traj.states.push(x);
            }
        }
        traj.window_boundaries.push(t_next);
        y = ys[s].clone();
        t = t_next;
        if exact_stop {
            stop_idx += 1;
        }
    }
    Ok(traj)
}

/// Solve in the `X_α` formulation; `x0` must pass the `X_α` ladder test.
pub fn solve_analytic(
    sys: &EvolutionSystem,
    x0: &SpectralState,
    u: &dyn Forcing,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let SolveMode::Analytic { alpha } = sys.mode() else {
        return Err(Error::InvalidArgument("solve_analytic needs a system in analytic mode".into()));
    };
    if alpha > 0.0 {
        let w = sys.working_weights().unwrap();
        let terms: Vec<f64> = x0.coeffs().iter().zip(&w).map(|(c, w)| (c * w) * (c * w)).collect();
        if ladder_trend(&terms).0 == LadderTrend::Divergent {
            return Err(Error::NotInFractionalSpace);
        }
    }
    solve(sys, x0, u, t_end, cfg)
}

/// A-priori bound on `‖φ(t, x0, u)‖` (working norm) from a global certificate.
///
/// General mode iterates the window estimate
/// `2(M e^{λt₁} ‖x‖ + h_{t₁} ‖u‖ + c_{t₁}(σ(‖u‖) + c))` over `⌈t/t₁⌉` windows,
/// where `c_{t₁} L ≤ θ`. Analytic mode evaluates the singular Gronwall
/// envelope with the Mittag-Leffler function.
pub fn global_bound(sys: &EvolutionSystem, x0_norm: f64, u_norm: f64, t: f64, cfg: &SolverConfig) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let f = sys.f();
    let forcing = |h: f64, c: f64| {
        let hu = if u_norm > 0.0 { h * u_norm } else { 0.0 };
        let sig = f.sigma().eval(u_norm) + f.growth_c();
        hu + if sig > 0.0 { c * sig } else { 0.0 }
    };
    match sys.mode() {
        SolveMode::Analytic { alpha } if alpha > 0.0 => {
            let l = f
                .linear_growth()
                .ok_or_else(|| Error::MissingCertificate("analytic global bound needs a linear-growth constant".into()))?;
            let sg = sys.semigroup().unwrap();
            let kappa = sg.kappa();
            let kp = kappa.max(0.0);
            let ca = sg.smoothing_constant(alpha, kappa, t.max(1.0))?;
            let b2 = sys.consts.b2_norm;
            let h = sys.h_t(t.max(1e-300));
            let c_int = ca * b2 * t.powf(1.0 - alpha) / (1.0 - alpha);
            let a = sys.m() * x0_norm + forcing(h, c_int);
            let beta = 1.0 - alpha;
            let rate = (l * b2 * ca * gamma(beta)).powf(1.0 / beta);
            Ok((kp * t).exp() * a * mittag_leffler(beta, rate * t))
        }
        _ => {
            let l = f
                .global_lipschitz()
                .ok_or_else(|| Error::MissingCertificate("global bound needs a global Lipschitz constant".into()))?;
            let theta = cfg.contraction_target;
            let mut t1 = cfg.max_window.min(1.0);
            while sys.c_t(t1) * l > theta {
                t1 *= 0.5;
                if t1 < 1e-300 {
                    return Err(Error::MissingCertificate("no window satisfies the contraction condition".into()));
                }
            }
            let (h, c) = (sys.h_t(t1), sys.c_t(t1));
            let grow = sys.m() * (sys.lambda() * t1).exp();
            let windows = ((t / t1).ceil() as usize).max(1);
            let mut x = x0_norm;
            for _ in 0..windows {
                x = 2.0 * (grow * x + forcing(h, c));
            }
            Ok(x)
        }
    }
}
