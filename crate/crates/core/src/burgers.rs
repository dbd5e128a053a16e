//! Burgers-type equation on `(0, π)`:
//! `x_t = x_zz - x x_z + f(z, x) + u`, `x(0,t) = d(t)`, `x(π,t) = 0`.
//!
//! States are coefficients in the Dirichlet sine basis `√(2/π) sin(nz)`,
//! eigenvalues `-n²`. The quadratic term is evaluated on the `2N+1` interior
//! points `z_j = jπ/(2N+2)` and projected back with the discrete sine
//! transform; on that grid every product of two band-`N` functions projects
//! onto modes `1..=N` without aliasing.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::admissibility::{InputOperator, OperatorClass};
use crate::error::{Error, Result};
use crate::input::InputSignal;
use crate::nonlinearity::{KinfFunction, Nonlinearity};
use crate::semigroup::DiagonalSemigroup;
use crate::solver::{solve, solve_analytic, EvolutionSystem, SolverConfig, Trajectory};
use crate::state::{check_dim, l2, SpectralState};

/// Local reaction term `f(z, y)` with its envelope `|f(z,y)| ≤ h(z) g(|y|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalTerm {
    Zero,
    /// `a y`
    Linear { a: f64 },
    /// `a sin(z) arctan(y)`
    SinArctan { a: f64 },
    /// `a y³`
    Cubic { a: f64 },
}

impl LocalTerm {
    pub fn eval(&self, z: f64, y: f64) -> f64 {
        match *self {
            LocalTerm::Zero => 0.0,
            LocalTerm::Linear { a } => a * y,
            LocalTerm::SinArctan { a } => a * z.sin() * y.atan(),
            LocalTerm::Cubic { a } => a * y * y * y,
        }
    }

    /// Envelope factor `h(z)`.
    pub fn envelope_h(&self, z: f64) -> f64 {
        match *self {
            LocalTerm::Zero => 1.0,
            LocalTerm::Linear { a } | LocalTerm::Cubic { a } => a.abs(),
            LocalTerm::SinArctan { a } => a.abs() * z.sin(),
        }
    }

    /// `‖h‖_{L²(0,π)}`.
    pub fn envelope_h_norm(&self) -> f64 {
        match *self {
            LocalTerm::Zero => PI.sqrt(),
            LocalTerm::Linear { a } | LocalTerm::Cubic { a } => a.abs() * PI.sqrt(),
            LocalTerm::SinArctan { a } => a.abs() * (PI / 2.0).sqrt(),
        }
    }

    /// Envelope factor `g(r)`.
    pub fn envelope_g(&self, r: f64) -> f64 {
        match *self {
            LocalTerm::Zero | LocalTerm::Linear { .. } => r,
            LocalTerm::SinArctan { .. } => r.atan(),
            LocalTerm::Cubic { .. } => r * r * r,
        }
    }

    /// Lipschitz constant in `y` on `|y| ≤ r`, uniformly in `z`.
    pub fn lipschitz(&self, r: f64) -> f64 {
        match *self {
            LocalTerm::Zero => 0.0,
            LocalTerm::Linear { a } | LocalTerm::SinArctan { a } => a.abs(),
            LocalTerm::Cubic { a } => 3.0 * a.abs() * r * r,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BurgersSystem {
    modes: usize,
    local: LocalTerm,
    boundary_alpha: f64,
    z: Vec<f64>,
    // sin/cos tables, row-major n × p, already scaled by √(2/π)
    sin_tab: Arc<Vec<f64>>,
    cos_tab: Arc<Vec<f64>>,
}

impl BurgersSystem {
    pub fn new(modes: usize, local: LocalTerm) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("Burgers system needs at least one mode".into()));
        }
        let p = 2 * modes + 1;
        let z: Vec<f64> = (1..=p).map(|j| j as f64 * PI / (p + 1) as f64).collect();
        let s = (2.0 / PI).sqrt();
        let mut sin_tab = Vec::with_capacity(modes * p);
        let mut cos_tab = Vec::with_capacity(modes * p);
        for n in 1..=modes {
            for zj in &z {
                sin_tab.push(s * (n as f64 * zj).sin());
                cos_tab.push(s * (n as f64 * zj).cos());
            }
        }
        Ok(Self { modes, local, boundary_alpha: 0.2, z, sin_tab: Arc::new(sin_tab), cos_tab: Arc::new(cos_tab) })
    }

    /// Declared smoothness of the boundary operator (must stay below 1/4).
    pub fn with_boundary_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.25) {
            return Err(Error::InvalidArgument(format!("boundary smoothness {alpha} outside (0, 1/4)")));
        }
        self.boundary_alpha = alpha;
        Ok(self)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn local_term(&self) -> LocalTerm {
        self.local
    }

    pub fn grid(&self) -> &[f64] {
        &self.z
    }

    pub fn semigroup(&self) -> DiagonalSemigroup {
        DiagonalSemigroup::dirichlet_laplacian(self.modes, 1.0).unwrap()
    }

    fn synth(&self, tab: &[f64], c: &[f64], scale: impl Fn(usize) -> f64) -> Vec<f64> {
        let p = self.z.len();
        let mut out = vec![0.0; p];
        for (n, cn) in c.iter().enumerate() {
            let a = cn * scale(n + 1);
            if a == 0.0 {
                continue;
            }
            for (o, t) in out.iter_mut().zip(&tab[n * p..(n + 1) * p]) {
                *o += a * t;
            }
        }
        out
    }

    /// `x(z_j)` on the collocation grid.
    pub fn to_physical(&self, x: &SpectralState) -> Vec<f64> {
        self.synth(&self.sin_tab, x.coeffs(), |_| 1.0)
    }

    /// `x'(z_j)` by exact per-mode differentiation.
    pub fn derivative_physical(&self, x: &SpectralState) -> Vec<f64> {
        self.synth(&self.cos_tab, x.coeffs(), |n| n as f64)
    }

    /// Discrete sine projection of grid values onto modes `1..=N`.
    pub fn project(&self, g: &[f64]) -> SpectralState {
        let p = self.z.len();
        let w = PI / (p + 1) as f64;
        let coeffs = (0..self.modes)
            .map(|n| w * self.sin_tab[n * p..(n + 1) * p].iter().zip(g).map(|(s, v)| s * v).sum::<f64>())
            .collect();
        SpectralState::from_raw(coeffs)
    }

    /// Trapezoidal `L²(0,π)` norm of grid values (exact for band-limited data).
    pub fn quadrature_norm(&self, g: &[f64]) -> f64 {
        (PI / (self.z.len() + 1) as f64 * g.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `F(x) = -x x' + f(·, x)`, projected onto the sine modes.
    #[allow(non_snake_case)]
    pub fn nonlinearity_F(&self, x: &SpectralState) -> SpectralState {
        let v = self.to_physical(x);
        let dv = self.derivative_physical(x);
        let g: Vec<f64> = v
            .iter()
            .zip(&dv)
            .zip(&self.z)
            .map(|((y, dy), z)| -y * dy + self.local.eval(*z, *y))
            .collect();
        self.project(&g)
    }

    /// `‖x‖_{1/2} = ‖x'‖_{L²} = (Σ n² x_n²)^{1/2}`.
    pub fn sobolev_half_norm(&self, x: &SpectralState) -> f64 {
        x.coeffs().iter().enumerate().map(|(i, c)| ((i + 1) as f64 * c).powi(2)).sum::<f64>().sqrt()
    }

    /// `(max_j |x(z_j)|, √π ‖x‖_{1/2})`.
    pub fn certify_sup_bound(&self, x: &SpectralState) -> (f64, f64) {
        let sup = self.to_physical(x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (sup, PI.sqrt() * self.sobolev_half_norm(x))
    }

    /// `(‖F(x)‖, √(2π) ‖x‖²_{1/2} + √2 ‖h‖ g(√π ‖x‖_{1/2}))`.
    #[allow(non_snake_case)]
    pub fn certify_F_bound(&self, x: &SpectralState) -> (f64, f64) {
        let n = self.sobolev_half_norm(x);
        let lhs = l2(self.nonlinearity_F(x).coeffs());
        let rhs = (2.0 * PI).sqrt() * n * n
            + 2f64.sqrt() * self.local.envelope_h_norm() * self.local.envelope_g(PI.sqrt() * n).abs();
        (lhs, rhs)
    }

    /// `(‖F(x₁) - F(x₂)‖, √π(‖x₁‖ + ‖x₂‖)‖Δ‖ + πL‖Δ‖)` in the `1/2` norms, with
    /// `L` the local Lipschitz constant on `|y| ≤ √π max ‖x_i‖_{1/2}`.
    pub fn certify_lipschitz(&self, x1: &SpectralState, x2: &SpectralState) -> Result<(f64, f64)> {
        check_dim(x1.len(), x2.len())?;
        let (n1, n2) = (self.sobolev_half_norm(x1), self.sobolev_half_norm(x2));
        let dn = self.sobolev_half_norm(&x1.sub(x2)?);
        let lhs = self.nonlinearity_F(x1).distance(&self.nonlinearity_F(x2))?;
        let l = self.local.lipschitz(PI.sqrt() * n1.max(n2));
        let rhs = PI.sqrt() * (n1 + n2) * dn + PI * l * dn;
        Ok((lhs, rhs))
    }

    /// Mode coefficients `√(2/π)/n` of the lifting `1 - z/π`.
    pub fn lifting_coefficients(&self) -> Vec<f64> {
        (1..=self.modes).map(|n| (2.0 / PI).sqrt() / n as f64).collect()
    }

    /// Dirichlet input at `z = 0`: `b_n = -μ_n · √(2/π)/n = n √(2/π)`.
    pub fn boundary_operator(&self) -> InputOperator {
        let col = (1..=self.modes).map(|n| n as f64 * (2.0 / PI).sqrt()).collect();
        InputOperator::from_column(col, OperatorClass::SmoothClass { alpha: self.boundary_alpha }).unwrap()
    }

    /// `[I | b]` acting on `(u, d)` with `u` given by its sine coefficients.
    pub fn input_operator(&self) -> InputOperator {
        InputOperator::hstack(&InputOperator::identity(self.modes), &self.boundary_operator()).unwrap()
    }

    /// `F` as a nonlinearity whose Lipschitz function is measured in the
    /// `X_{1/2}` norm with weights `(1 + n²)^{1/2}` (these dominate `n`).
    pub fn nonlinearity_half(&self) -> Nonlinearity {
        let me = self.clone();
        let local = self.local;
        Nonlinearity::new(
            "burgers",
            self.modes,
            move |x, _| me.nonlinearity_F(x),
            move |r| 2.0 * PI.sqrt() * r + PI * local.lipschitz(PI.sqrt() * r),
            KinfFunction::identity(),
            0.0,
        )
        .unwrap()
        .with_input_modulus(KinfFunction::identity())
        .input_independent()
    }

    /// `F` with a Lipschitz function in the `X` norm, via `‖x‖_{1/2} ≤ N ‖x‖`.
    pub fn nonlinearity_x(&self) -> Nonlinearity {
        let me = self.clone();
        let local = self.local;
        let n = self.modes as f64;
        Nonlinearity::new(
            "burgers",
            self.modes,
            move |x, _| me.nonlinearity_F(x),
            move |r| n * (2.0 * PI.sqrt() * n * r + PI * local.lipschitz(PI.sqrt() * n * r)),
            KinfFunction::identity(),
            0.0,
        )
        .unwrap()
        .with_input_modulus(KinfFunction::identity())
        .input_independent()
    }

    /// Evolution system in the `X_{1/2}` formulation.
    pub fn evolution_system(&self) -> EvolutionSystem {
        EvolutionSystem::new(self.semigroup(), self.input_operator(), self.nonlinearity_half())
            .and_then(|s| s.with_truncation_certificates())
            .and_then(|s| s.analytic(0.5))
            .expect("Burgers system assembles")
    }

    /// Evolution system in the plain `X` formulation.
    pub fn evolution_system_x(&self) -> EvolutionSystem {
        EvolutionSystem::new(self.semigroup(), self.input_operator(), self.nonlinearity_x()).expect("Burgers system assembles")
    }

    /// Mild solution with distributed input `u` (sine coefficients, `N`
    /// channels) and boundary input `d` (one channel).
    pub fn simulate(
        &self,
        x0: &SpectralState,
        u: &InputSignal,
        d: &InputSignal,
        t_end: f64,
        cfg: &SolverConfig,
    ) -> Result<Trajectory> {
        use crate::input::Forcing;
        if u.channels() != self.modes {
            return Err(Error::Dimension { expected: self.modes, got: u.channels() });
        }
        if d.channels() != 1 {
            return Err(Error::Dimension { expected: 1, got: d.channels() });
        }
        let ud = InputSignal::stack(u, d)?;
        solve_analytic(&self.evolution_system(), x0, &ud, t_end, cfg)
    }

    /// Same as [`simulate`](Self::simulate) in the plain `X` formulation.
    pub fn simulate_x(
        &self,
        x0: &SpectralState,
        u: &InputSignal,
        d: &InputSignal,
        t_end: f64,
        cfg: &SolverConfig,
    ) -> Result<Trajectory> {
        let ud = InputSignal::stack(u, d)?;
        solve(&self.evolution_system_x(), x0, &ud, t_end, cfg)
    }

    /// Value at `z = 0` extrapolated by a least-squares line through the grid
    /// points in `[π/8, π/4]`, away from the Gibbs layer at the boundary.
    pub fn boundary_value_estimate(&self, x: &SpectralState) -> f64 {
        let v = self.to_physical(x);
        let pts: Vec<(f64, f64)> =
            self.z.iter().zip(&v).filter(|(z, _)| **z >= PI / 8.0 && **z <= PI / 4.0).map(|(z, y)| (*z, *y)).collect();
        if pts.len() < 2 {
            return v[0];
        }
        let n = pts.len() as f64;
        let (mz, my) = pts.iter().fold((0.0, 0.0), |(a, b), (z, y)| (a + z / n, b + y / n));
        let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (z, y)| (a + (z - mz) * (y - my), b + (z - mz).powi(2)));
        my - sxy / sxx * mz
    }

    /// Coefficients of `sin(kz)` (not normalized) in the sine basis.
    pub fn sine_mode(&self, k: usize, amplitude: f64) -> SpectralState {
        let mut s = SpectralState::zeros(self.modes);
        if k >= 1 && k <= self.modes {
            s = SpectralState::unit(self.modes, k).scale(amplitude * (PI / 2.0).sqrt());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sin_times_cos_lands_on_mode_two() {
        let b = BurgersSystem::new(16, LocalTerm::Zero).unwrap();
        let x = b.sine_mode(1, 1.0);
        let f = b.nonlinearity_F(&x);
        // -sin z cos z = -½ sin 2z
        let expected = -0.5 * (PI / 2.0).sqrt();
        for (i, c) in f.coeffs().iter().enumerate() {
            let e = if i == 1 { expected } else { 0.0 };
            assert!((c - e).abs() < 1e-13, "mode {}: {c}", i + 1);
        }
        assert!((f.norm_x().unwrap() - 0.5 * (PI / 2.0).sqrt()).abs() < 1e-13);
        assert_eq!(b.nonlinearity_F(&x), f);
    }

    #[test]
    fn transform_round_trip_and_parseval() {
        let b = BurgersSystem::new(24, LocalTerm::Zero).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = SpectralState::new((0..24).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let v = b.to_physical(&x);
        assert!(b.project(&v).distance(&x).unwrap() < 1e-12);
        assert!((b.quadrature_norm(&v) - x.norm_x().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sine_state_bounds() {
        let b = BurgersSystem::new(32, LocalTerm::Zero).unwrap();
        let x = b.sine_mode(1, 1.0);
        let (sup, bound) = b.certify_sup_bound(&x);
        assert!((bound - PI / 2f64.sqrt()).abs() < 1e-12);
        assert!(sup <= 1.0 && sup > 0.99);
        let (lhs, rhs) = b.certify_F_bound(&x);
        assert!((lhs - 0.5 * (PI / 2.0).sqrt()).abs() < 1e-12);
        assert!((rhs - (2.0 * PI).sqrt() * PI / 2.0 - 2f64.sqrt() * PI.sqrt() * PI.sqrt() * (PI / 2.0).sqrt()).abs() < 1e-9);
        let (l, r) = b.certify_lipschitz(&x, &SpectralState::zeros(32)).unwrap();
        assert!((l - 0.6266570686577501).abs() < 1e-12);
        assert!((r - PI * PI.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(b.certify_sup_bound(&SpectralState::zeros(32)), (0.0, 0.0));
    }

    #[test]
    fn lifting_times_eigenvalue_is_boundary_column() {
        let b = BurgersSystem::new(10, LocalTerm::Zero).unwrap();
        let lift = b.lifting_coefficients();
        let col = b.boundary_operator().column(0);
        for n in 1..=10 {
            assert!((lift[n - 1] * (n * n) as f64 - col[n - 1]).abs() < 1e-13);
        }
    }

    #[test]
    fn boundary_class_threshold_at_one_quarter() {
        use crate::admissibility::class_ladder;
        use crate::numerics::LadderTrend;
        let b = BurgersSystem::new(512, LocalTerm::Zero).unwrap();
        let sg = b.semigroup();
        let op = b.boundary_operator();
        assert_eq!(class_ladder(&sg, &op, 0.2).unwrap().0, LadderTrend::Bounded);
        assert_eq!(class_ladder(&sg, &op, 0.3).unwrap().0, LadderTrend::Divergent);
    }
    #[test]
    fn small_data_decays() {
        let b = BurgersSystem::new(32, LocalTerm::Zero).unwrap();
        let x0 = b.sine_mode(1, 0.1);
        let u = InputSignal::zero(32, 3.0).unwrap();
        let d = InputSignal::zero(1, 3.0).unwrap();
        let cfg = SolverConfig { checkpoints: vec![0.5, 1.0, 1.5, 2.0, 2.5], ..Default::default() };
        let tr = b.simulate(&x0, &u, &d, 3.0, &cfg).unwrap();
        assert!(tr.is_completed());
        let n0 = x0.norm_x().unwrap();
        for (t, n) in tr.times.iter().zip(&tr.norms_x) {
            assert!(*n <= n0 * (-0.9 * t).exp() + 1e-12, "t={t}: {n}");
        }
        for w in tr.norms_x.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn constant_boundary_input_reaches_linear_profile() {
        let b = BurgersSystem::new(64, LocalTerm::Zero).unwrap();
        let d = InputSignal::constant(vec![0.05], 8.0).unwrap();
        let u = InputSignal::zero(64, 8.0).unwrap();
        let tr = b.simulate(&SpectralState::zeros(64), &u, &d, 8.0, &SolverConfig::default()).unwrap();
        assert!(tr.is_completed());
        let est = b.boundary_value_estimate(tr.final_state());
        assert!((est - 0.05).abs() < 0.05 * 0.05, "boundary value {est}");
    }

    #[test]
    fn mode_refinement_changes_little() {
        let run = |n: usize| {
            let b = BurgersSystem::new(n, LocalTerm::SinArctan { a: 0.5 }).unwrap();
            let x0 = b.sine_mode(1, 0.3).add(&b.sine_mode(2, -0.2)).unwrap();
            let u = InputSignal::zero(n, 1.0).unwrap();
            let d = InputSignal::zero(1, 1.0).unwrap();
            let tr = b.simulate(&x0, &u, &d, 1.0, &SolverConfig::default()).unwrap();
            tr.final_state().clone()
        };
        let a = run(16);
        let b = run(32).resized(16);
        assert!(a.distance(&b).unwrap() < 1e-4);
    }
}
