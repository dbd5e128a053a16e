//! Sampled checks of flow-map properties: control-system axioms, exponential
//! deviation, continuous dependence on `(x, u)`, robustness of the
//! equilibrium and bounded reachability sets.
//!
//! Every check draws from a seeded ChaCha8 stream, so reports (and their
//! witnesses) are replayable. Universally quantified statements are only
//! tested on the drawn samples plus axis corners.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::input::{Forcing, InputSignal};
use crate::numerics::loglog_slope;
use crate::solver::{global_bound, select_step, solve, EvolutionSystem, SolverConfig, Trajectory, TrajectoryStatus};
use crate::state::{l2, SpectralState};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropsOptions {
    pub seed: u64,
    pub samples: usize,
    /// Radius of sampled initial states (working norm).
    pub state_radius: f64,
    /// Sup-norm radius of sampled inputs.
    pub input_radius: f64,
    /// Horizon of sampled inputs and trajectories.
    pub horizon: f64,
    /// Number of constant cells in sampled inputs.
    pub input_cells: usize,
    pub report_tolerance: f64,
    pub solver: SolverConfig,
}

impl Default for PropsOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 20,
            state_radius: 1.0,
            input_radius: 1.0,
            horizon: 1.0,
            input_cells: 4,
            report_tolerance: 1e-6,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub property: String,
    pub samples: usize,
    /// Largest `measured / certified` over the samples.
    pub worst_ratio: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub witness: Value,
    pub detail: Value,
    pub notes: Vec<String>,
}

impl PropertyReport {
    fn new(property: &str, samples: usize, worst: (f64, Value), tolerance: f64, detail: Value) -> Self {
        Self {
            property: property.into(),
            samples,
            worst_ratio: worst.0,
            pass: worst.0 <= 1.0 + tolerance,
            tolerance,
            witness: worst.1,
            detail,
            notes: vec!["checked on sampled pairs only, not on the whole ball".into()],
        }
    }

    fn inapplicable(property: &str, reason: String) -> Self {
        Self {
            property: property.into(),
            samples: 0,
            worst_ratio: f64::INFINITY,
            pass: false,
            tolerance: 0.0,
            witness: Value::Null,
            detail: json!({ "inapplicable": reason }),
            notes: vec![],
        }
    }

    /// One line: `name  PASS/FAIL  worst=…  n=…`.
    pub fn summary_line(&self) -> String {
        format!(
            "{:<24} {}  worst_ratio={:.3e}  samples={}",
            self.property,
            if self.pass { "PASS" } else { "FAIL" },
            self.worst_ratio,
            self.samples
        )
    }
}

fn keep_worst(worst: &mut (f64, Value), ratio: f64, witness: impl FnOnce() -> Value) {
    let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
    if ratio > worst.0 || worst.1.is_null() {
        *worst = (ratio.max(worst.0), witness());
    }
}

/// Seeded generator of states and inputs for one system.
pub struct Sampler {
    rng: ChaCha8Rng,
    dim: usize,
    channels: usize,
    weights: Option<Vec<f64>>,
}

impl Sampler {
    pub fn new(sys: &EvolutionSystem, seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), dim: sys.dim(), channels: sys.b().channels(), weights: sys.working_weights() }
    }

    /// Uniform direction, radius uniform in `[0, r]`, in the working norm.
    pub fn state(&mut self, r: f64) -> SpectralState {
        let v: Vec<f64> = (0..self.dim).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
        let scale = r * self.rng.gen_range(0.0..=1.0f64) / l2(&v).max(1e-300);
        self.unweight(v.iter().map(|c| c * scale).collect())
    }

    /// Axis state `r e_k / w_k` (working norm `r`).
    pub fn axis_state(&self, k: usize, r: f64) -> SpectralState {
        let mut v = vec![0.0; self.dim];
        v[k % self.dim] = r;
        self.unweight(v)
    }

    fn unweight(&self, v: Vec<f64>) -> SpectralState {
        match &self.weights {
            None => SpectralState::new(v).unwrap(),
            Some(w) => SpectralState::new(v.iter().zip(w).map(|(c, w)| c / w).collect()).unwrap(),
        }
    }

    /// Piecewise-constant input with `cells` equal cells, each value of norm
    /// at most `r`.
    pub fn input(&mut self, r: f64, horizon: f64, cells: usize) -> InputSignal {
        let cells = cells.max(1);
        let grid: Vec<f64> = (0..=cells).map(|i| horizon * i as f64 / cells as f64).collect();
        let values = (0..cells)
            .map(|_| {
                let v: Vec<f64> = (0..self.channels).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
                let s = r * self.rng.gen_range(0.0..=1.0f64) / l2(&v).max(1e-300);
                v.iter().map(|c| c * s).collect()
            })
            .collect();
        InputSignal::new(grid, values).unwrap()
    }

    /// Constant input of norm exactly `r` along a random direction.
    pub fn max_input(&mut self, r: f64, horizon: f64) -> InputSignal {
        let v: Vec<f64> = (0..self.channels).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
        let s = r / l2(&v).max(1e-300);
        InputSignal::constant(v.iter().map(|c| c * s).collect(), horizon).unwrap()
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        self.rng.gen_range(a..b)
    }
}

fn state_json(x: &SpectralState) -> Value {
    json!(x.coeffs())
}

fn input_json(u: &InputSignal) -> Value {
    json!({ "grid": u.grid(), "values": u.values() })
}

fn working_distance(sys: &EvolutionSystem, a: &SpectralState, b: &SpectralState) -> Result<f64> {
    sys.working_norm(&a.sub(b)?)
}

fn solve_to(sys: &EvolutionSystem, x0: &SpectralState, u: &dyn Forcing, t: f64, cfg: &SolverConfig) -> Result<Trajectory> {
    let tr = solve(sys, x0, u, t, cfg)?;
    if !tr.is_completed() {
        return Err(Error::InvalidArgument(format!("trajectory stopped early: {:?}", tr.status)));
    }
    Ok(tr)
}

fn with_substeps(cfg: &SolverConfig, s: usize) -> SolverConfig {
    SolverConfig { substeps_per_window: s, ..cfg.clone() }
}

/// Stitching residual `‖φ(t+h, x, u) - φ(h, φ(t, x, u), u(t+·))‖` at three
/// substep counts `s, 2s, 4s`.
pub fn cocycle_residuals(
    sys: &EvolutionSystem,
    x0: &SpectralState,
    u: &InputSignal,
    t: f64,
    h: f64,
    cfg: &SolverConfig,
    base_substeps: usize,
) -> Result<[f64; 3]> {
    let shifted = u.shift(t)?;
    let mut out = [0.0; 3];
    for (i, s) in [base_substeps, 2 * base_substeps, 4 * base_substeps].into_iter().enumerate() {
        let c = with_substeps(cfg, s);
        let direct = solve_to(sys, x0, u, t + h, &c)?;
        let mid = solve_to(sys, x0, u, t, &c)?;
        let stitched = solve_to(sys, mid.final_state(), &shifted, h, &c)?;
        out[i] = working_distance(sys, direct.final_state(), stitched.final_state())?;
    }
    Ok(out)
}

/// Identity, causality, continuity in `t` and the cocycle property.
pub fn check_axioms(sys: &EvolutionSystem, opts: &PropsOptions) -> Result<Vec<PropertyReport>> {
    let mut s = Sampler::new(sys, opts.seed);
    let tol = opts.report_tolerance;
    let cfg = &opts.solver;
    let t_max = opts.horizon;
    let (mut w_id, mut w_cause, mut w_cont, mut w_coc) =
        ((0.0, Value::Null), (0.0, Value::Null), (0.0, Value::Null), (0.0, Value::Null));
    let mut slopes = Vec::new();
    let base = (cfg.substeps_per_window / 4).max(8);

    for i in 0..opts.samples {
        let x0 = if i == 0 { SpectralState::zeros(sys.dim()) } else { s.state(opts.state_radius) };
        let u = if i == 1 { s.max_input(opts.input_radius, t_max) } else { s.input(opts.input_radius, t_max, opts.input_cells) };
        let t = s.uniform(0.25, 0.6) * t_max;
        let h = s.uniform(0.1, 0.4) * t_max;
        let scale = 1.0 + sys.working_norm(&x0)?;

        let tr = solve_to(sys, &x0, &u, t, cfg)?;
        let id = working_distance(sys, &tr.states[0], &x0)?;
        keep_worst(&mut w_id, id / (tol * scale), || json!({ "x0": state_json(&x0) }));

        let other = s.input(opts.input_radius, t_max, opts.input_cells);
        let spliced = InputSignal::concat(&u.truncate(t)?, &other.shift(t)?, t)?;
        let tr2 = solve_to(sys, &x0, &spliced, t, cfg)?;
        let cause = working_distance(sys, tr.final_state(), tr2.final_state())?;
        keep_worst(&mut w_cause, cause / (tol * scale), || {
            json!({ "x0": state_json(&x0), "u": input_json(&u), "t": t })
        });

        let inc = |c: &SolverConfig| -> Result<f64> {
            let tr = solve_to(sys, &x0, &u, t, c)?;
            let mut m = 0.0f64;
            for k in 1..tr.states.len() {
                m = m.max(working_distance(sys, &tr.states[k], &tr.states[k - 1])?);
            }
            Ok(m)
        };
        let (coarse, fine) = (inc(&with_substeps(cfg, base))?, inc(&with_substeps(cfg, 4 * base))?);
        let ratio = if coarse <= 1e-300 { 0.0 } else { fine / coarse };
        keep_worst(&mut w_cont, ratio, || json!({ "x0": state_json(&x0), "u": input_json(&u), "t": t, "coarse": coarse, "fine": fine }));

        let r = cocycle_residuals(sys, &x0, &u, t, h, cfg, base)?;
        // Richardson: for a second-order residual the finest level is about a
        // third of the last decrement.
        let allowed = tol * scale + 2.0 * (r[1] - r[2]).max(0.0) / 3.0;
        keep_worst(&mut w_coc, r[2] / allowed, || {
            json!({ "x0": state_json(&x0), "u": input_json(&u), "t": t, "h": h, "residuals": r })
        });
        if r[2] > 1e-13 * scale {
            slopes.push(-loglog_slope(&[1.0, 2.0, 4.0], &r));
        }
    }
    let n = opts.samples;
    Ok(vec![
        PropertyReport::new("identity", n, w_id, tol, Value::Null),
        PropertyReport::new("causality", n, w_cause, tol, Value::Null),
        PropertyReport::new("continuity", n, w_cont, tol, json!({ "substeps": [base, 4 * base] })),
        PropertyReport::new("cocycle", n, w_coc, tol, json!({ "substeps": [base, 2 * base, 4 * base], "slopes": slopes })),
    ])
}

/// Growth rate `R = λ + ln(2M)/t₁` of the deviation estimate.
pub fn deviation_rate(sys: &EvolutionSystem, t1: f64) -> f64 {
    sys.lambda() + (2.0 * sys.m()).ln() / t1
}

fn eval_grid(tau: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| tau * i as f64 / points as f64).collect()
}

/// `‖φ(t,x₁,u) - φ(t,x₂,u)‖ ≤ 2M e^{Rt} ‖x₁ - x₂‖` on `[0, τ]`.
pub fn check_deviation(
    sys: &EvolutionSystem,
    x1: &SpectralState,
    x2: &SpectralState,
    u: &InputSignal,
    tau: f64,
    opts: &PropsOptions,
) -> Result<PropertyReport> {
    let grid = eval_grid(tau, 16);
    let cfg = SolverConfig { checkpoints: grid.clone(), ..opts.solver.clone() };
    let (t1, t2) = (solve(sys, x1, u, tau, &cfg)?, solve(sys, x2, u, tau, &cfg)?);
    if !t1.is_completed() || !t2.is_completed() {
        return Ok(PropertyReport::inapplicable("deviation", "trajectory blew up before tau".into()));
    }
    let sup = |tr: &Trajectory| -> Result<f64> {
        tr.states.iter().map(|x| sys.working_norm(x)).try_fold(0.0f64, |m, v| Ok(m.max(v?)))
    };
    let k = sup(&t1)?.max(sup(&t2)?);
    let u_sup = u.sup_norm_on(0.0, tau);
    let window = select_step(sys, k, u_sup, &opts.solver)?;
    let rate = deviation_rate(sys, window);
    let d0 = working_distance(sys, x1, x2)?;
    let mut worst = (0.0, Value::Null);
    for &t in &grid {
        let (a, b) = (t1.state_at(t).unwrap(), t2.state_at(t).unwrap());
        let d = working_distance(sys, a, b)?;
        let bound = 2.0 * sys.m() * (rate * t).exp() * d0;
        let ratio = if d == 0.0 { 0.0 } else { d / bound };
        keep_worst(&mut worst, ratio, || json!({ "t": t, "deviation": d, "bound": bound }));
    }
    let mut rep = PropertyReport::new(
        "deviation",
        grid.len(),
        worst,
        opts.report_tolerance,
        json!({ "t1": window, "rate": rate, "k_bound": k, "x1": state_json(x1), "x2": state_json(x2) }),
    );
    rep.notes.clear();
    Ok(rep)
}

/// Runs [`check_deviation`] on seeded pairs `x₂ = x₁ + small perturbation`
/// and merges the reports.
pub fn check_deviation_sampled(sys: &EvolutionSystem, opts: &PropsOptions, pairs: usize) -> Result<PropertyReport> {
    let mut s = Sampler::new(sys, opts.seed ^ 0xd1);
    let mut worst = (0.0, Value::Null);
    let mut count = 0;
    for _ in 0..pairs {
        let x1 = s.state(opts.state_radius);
        let dx = s.state(0.1 * opts.state_radius);
        let x2 = x1.add(&dx)?;
        let u = s.input(opts.input_radius, opts.horizon, opts.input_cells);
        let rep = check_deviation(sys, &x1, &x2, &u, opts.horizon, opts)?;
        if rep.samples == 0 {
            continue;
        }
        count += 1;
        if rep.worst_ratio > worst.0 || worst.1.is_null() {
            worst = (rep.worst_ratio.max(worst.0), json!({ "pair": rep.detail, "at": rep.witness }));
        }
    }
    Ok(PropertyReport::new("deviation", count, worst, opts.report_tolerance, json!({ "pairs": pairs })))
}

/// Window estimate `‖φ₁ - φ₂‖ ≤ 2M e^{λt₁}‖x₁-x₂‖ + 2h_{t₁}‖u₁-u₂‖ + q(‖u₁-u₂‖)`
/// on the first certified window.
pub fn check_continuous_dependence(
    sys: &EvolutionSystem,
    pairs: &[(SpectralState, InputSignal, SpectralState, InputSignal)],
    tau: f64,
    opts: &PropsOptions,
) -> Result<PropertyReport> {
    let Some(q) = sys.f().input_modulus().cloned() else {
        return Err(Error::MissingCertificate("continuous dependence needs the joint input modulus".into()));
    };
    let mut worst = (0.0, Value::Null);
    let mut windows = Vec::new();
    for (x1, u1, x2, u2) in pairs {
        let k = sys.working_norm(x1)?.max(sys.working_norm(x2)?);
        let u_sup = u1.sup_norm_on(0.0, tau).max(u2.sup_norm_on(0.0, tau));
        let t1 = select_step(sys, k, u_sup, &opts.solver)?.min(tau);
        let grid = eval_grid(t1, 8);
        let cfg = SolverConfig { checkpoints: grid.clone(), ..opts.solver.clone() };
        let (a, b) = (solve_to(sys, x1, u1, t1, &cfg)?, solve_to(sys, x2, u2, t1, &cfg)?);
        let du = InputSignal::difference(u1, u2)?.sup_norm_on(0.0, t1);
        let dx = working_distance(sys, x1, x2)?;
        let bound = 2.0 * sys.m() * (sys.lambda() * t1).exp() * dx + 2.0 * sys.h_t(t1) * du + q.eval(du);
        for &t in &grid {
            let d = working_distance(sys, a.state_at(t).unwrap(), b.state_at(t).unwrap())?;
            let ratio = if d == 0.0 { 0.0 } else { d / bound };
            keep_worst(&mut worst, ratio, || json!({ "t": t, "deviation": d, "bound": bound, "x1": state_json(x1), "u1": input_json(u1) }));
        }
        let windows_needed = (tau / t1).ceil();
        windows.push(json!({ "t1": t1, "factor": 2.0 * sys.m() * (sys.lambda() * t1).exp(), "windows_to_tau": windows_needed }));
    }
    Ok(PropertyReport::new(
        "continuous_dependence",
        pairs.len(),
        worst,
        opts.report_tolerance,
        json!({ "propagated": windows }),
    ))
}

/// Seeded perturbation pairs for [`check_continuous_dependence`].
pub fn perturbation_pairs(
    sys: &EvolutionSystem,
    opts: &PropsOptions,
    count: usize,
    size: f64,
) -> Vec<(SpectralState, InputSignal, SpectralState, InputSignal)> {
    let mut s = Sampler::new(sys, opts.seed ^ 0xcd);
    (0..count)
        .map(|_| {
            let x1 = s.state(opts.state_radius);
            let u1 = s.input(opts.input_radius, opts.horizon, opts.input_cells);
            let x2 = x1.add(&s.state(size)).unwrap();
            let u2 = InputSignal::sum(&u1, &s.input(size, opts.horizon, opts.input_cells)).unwrap();
            (x1, u1, x2, u2)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CepCell {
    pub eps: f64,
    pub h: f64,
    pub delta: Option<f64>,
    pub max_norm: f64,
}

/// Searches `δ = ε, ε/2, …` (down to `ε 2^{-ladder}`) until sampled
/// trajectories of the saturated system from `B_δ × B_δ` stay in `B_ε` on
/// `[0, h]`.
pub fn check_cep(sys: &EvolutionSystem, eps_grid: &[f64], h_grid: &[f64], opts: &PropsOptions) -> Result<PropertyReport> {
    let zero = sys.f().eval(&SpectralState::zeros(sys.dim()), &vec![0.0; sys.b().channels()]);
    let f00 = l2(zero.coeffs());
    if f00 > 1e-12 {
        return Err(Error::NotAnEquilibrium(f00));
    }
    let sat = sys.with_nonlinearity(sys.f().saturated(sys.working_weights()))?;
    let ladder = 20;
    let mut cells = Vec::new();
    let mut worst = (0.0, Value::Null);
    for &eps in eps_grid {
        for &h in h_grid {
            let mut found = None;
            let mut last_max = f64::INFINITY;
            for j in 0..=ladder {
                let delta = eps * 0.5f64.powi(j);
                let mut s = Sampler::new(&sat, opts.seed ^ (j as u64));
                let mut max_norm = 0.0f64;
                let mut ok = true;
                for i in 0..opts.samples.max(2) {
                    let x0 = match i {
                        0 => SpectralState::zeros(sat.dim()),
                        1 => s.axis_state(0, delta),
                        _ => s.state(delta),
                    };
                    let u = if i % 2 == 1 { s.max_input(delta, h) } else { s.input(delta, h, opts.input_cells) };
                    let tr = solve(&sat, &x0, &u, h, &opts.solver)?;
                    if !tr.is_completed() {
                        ok = false;
                        break;
                    }
                    for x in &tr.states {
                        max_norm = max_norm.max(sat.working_norm(x)?);
                    }
                    if max_norm > eps {
                        ok = false;
                        break;
                    }
                }
                last_max = max_norm;
                if ok {
                    found = Some(delta);
                    break;
                }
            }
            let ratio = if found.is_some() { last_max / eps } else { f64::INFINITY };
            keep_worst(&mut worst, ratio, || json!({ "eps": eps, "h": h, "delta": found }));
            cells.push(CepCell { eps, h, delta: found, max_norm: last_max });
        }
    }
    let mut rep = PropertyReport::new("cep", cells.len(), worst, opts.report_tolerance, json!({ "table": cells }));
    rep.notes.push("reports a delta on the ladder, not the largest admissible one".into());
    Ok(rep)
}

/// Sampled `sup ‖φ(t,x,u)‖` over `‖x‖ ≤ C`, `‖u‖ ≤ C`, `t ∈ [0, τ]`, compared
/// with [`global_bound`] when a global certificate exists.
pub fn check_brs(sys: &EvolutionSystem, c: f64, tau: f64, opts: &PropsOptions) -> Result<PropertyReport> {
    let mut s = Sampler::new(sys, opts.seed ^ 0xb5);
    let bound = global_bound(sys, c, c, tau, &opts.solver).ok();
    let mut sup = 0.0f64;
    let mut worst = (0.0, Value::Null);
    for i in 0..opts.samples.max(2) {
        let x0 = match i {
            0 => s.axis_state(0, c),
            1 => s.axis_state(1, c),
            _ => s.state(c),
        };
        let u = if i % 2 == 0 { s.max_input(c, tau) } else { s.input(c, tau, opts.input_cells) };
        let tr = solve(sys, &x0, &u, tau, &opts.solver)?;
        if let TrajectoryStatus::Blowup { t_m, .. } = tr.status {
            let mut rep = PropertyReport::new(
                "brs",
                i + 1,
                (f64::INFINITY, json!({ "x0": state_json(&x0), "u": input_json(&u), "blowup_time": t_m })),
                opts.report_tolerance,
                json!({ "sampled_sup": Value::Null, "global_bound": bound }),
            );
            rep.notes.push(format!("finite escape at t = {t_m}"));
            return Ok(rep);
        }
        if !tr.is_completed() {
            return Ok(PropertyReport::inapplicable("brs", format!("{:?}", tr.status)));
        }
        let mut m = 0.0f64;
        for x in &tr.states {
            m = m.max(sys.working_norm(x)?);
        }
        sup = sup.max(m);
        let ratio = bound.map_or(0.0, |b| m / b);
        keep_worst(&mut worst, ratio, || json!({ "x0": state_json(&x0), "u": input_json(&u), "sup": m }));
    }
    let mut rep = PropertyReport::new(
        "brs",
        opts.samples.max(2),
        worst,
        opts.report_tolerance,
        json!({ "sampled_sup": sup, "global_bound": bound }),
    );
    if bound.is_none() {
        rep.notes.push("no global certificate; only finiteness of the sampled sup is checked".into());
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissibility::InputOperator;
    use crate::nonlinearity::Nonlinearity;
    use crate::semigroup::DiagonalSemigroup;

    fn linear(n: usize) -> EvolutionSystem {
        let sg = DiagonalSemigroup::dirichlet_laplacian(n, 1.0).unwrap();
        EvolutionSystem::new(sg, InputOperator::identity(n), Nonlinearity::zero(n)).unwrap()
    }

    fn scalar(mu: f64, f: Nonlinearity) -> EvolutionSystem {
        let sg = DiagonalSemigroup::new(vec![mu], 0.0f64.max(mu) + 1.0).unwrap();
        EvolutionSystem::new(sg, InputOperator::identity(1), f).unwrap()
    }

    #[test]
    fn linear_axioms_pass() {
        let opts = PropsOptions { samples: 4, ..Default::default() };
        let reps = check_axioms(&linear(8), &opts).unwrap();
        for r in &reps {
            assert!(r.pass, "{}", r.summary_line());
        }
        assert_eq!(reps[0].worst_ratio, 0.0);
    }

    #[test]
    fn equal_states_have_zero_deviation() {
        let sys = linear(4);
        let x = SpectralState::unit(4, 1);
        let u = InputSignal::zero(4, 1.0).unwrap();
        let rep = check_deviation(&sys, &x, &x, &u, 1.0, &PropsOptions::default()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.worst_ratio, 0.0);
    }

    #[test]
    fn cubic_deviation_near_origin() {
        let f = Nonlinearity::cubic(1, 1.0);
        let sys = scalar(-1.0, f);
        let opts = PropsOptions { samples: 10, state_radius: 0.1, input_radius: 0.0, ..Default::default() };
        let rep = check_deviation_sampled(&sys, &opts, 10).unwrap();
        assert!(rep.pass && rep.worst_ratio <= 1.0, "{}", rep.summary_line());
    }

    #[test]
    fn input_difference_is_within_h_t() {
        let sys = linear(6);
        let x = SpectralState::unit(6, 2);
        let u1 = InputSignal::constant(vec![0.5; 6], 1.0).unwrap();
        let u2 = InputSignal::zero(6, 1.0).unwrap();
        let bare = sys.with_nonlinearity(Nonlinearity::coefficientwise("bare", 6, |y| 0.0 * y, |_| 0.0)).unwrap();
        let rep = check_continuous_dependence(&bare, &[(x.clone(), u1, x, u2)], 1.0, &PropsOptions::default());
        assert!(matches!(rep, Err(Error::MissingCertificate(_))));
        let f = Nonlinearity::zero(6);
        let sys = sys.with_nonlinearity(f).unwrap();
        let x = SpectralState::unit(6, 2);
        let pairs = [(x.clone(), InputSignal::constant(vec![0.5; 6], 1.0).unwrap(), x, InputSignal::zero(6, 1.0).unwrap())];
        let rep = check_continuous_dependence(&sys, &pairs, 1.0, &PropsOptions::default()).unwrap();
        assert!(rep.pass, "{}", rep.summary_line());
    }

    #[test]
    fn stable_linear_cep_finds_delta() {
        let rep = check_cep(&linear(4), &[0.5, 1.0], &[0.5, 1.0], &PropsOptions { samples: 4, ..Default::default() }).unwrap();
        assert!(rep.pass, "{:?}", rep.detail);
    }

    #[test]
    fn cep_rejects_non_equilibrium() {
        let f = Nonlinearity::coefficientwise("shift", 1, |v| v + 1.0, |_| 1.0);
        let err = check_cep(&scalar(-1.0, f), &[1.0], &[1.0], &PropsOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NotAnEquilibrium(_)));
    }

    #[test]
    fn square_brs_reports_escape() {
        let sys = scalar(0.0, Nonlinearity::scalar_square(1));
        let opts = PropsOptions { samples: 4, ..Default::default() };
        let rep = check_brs(&sys, 2.0, 1.0, &opts).unwrap();
        assert!(!rep.pass);
        assert!(rep.witness["blowup_time"].as_f64().unwrap() <= 1.0);
    }

    #[test]
    fn linear_brs_within_bound() {
        let sg = DiagonalSemigroup::dirichlet_laplacian(4, 1.0).unwrap();
        let sys = EvolutionSystem::new(sg, InputOperator::zero(4, 1), Nonlinearity::zero(4).with_global_lipschitz(0.0)).unwrap();
        let rep = check_brs(&sys, 1.0, 1.0, &PropsOptions { samples: 6, ..Default::default() }).unwrap();
        assert!(rep.pass, "{}", rep.summary_line());
        assert!(rep.detail["sampled_sup"].as_f64().unwrap() <= 1.0 + 1e-12);
    }
}
