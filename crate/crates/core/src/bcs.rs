//! Boundary control systems `ẋ = Âx + f`, `R̂x = u` translated into evolution
//! systems with input operator `B = ÂR - A₋₁R`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::admissibility::{class_ladder, verify_class, InputOperator, OperatorClass};
use crate::error::{Error, Result};
use crate::input::{Forcing, PolynomialInput};
use crate::nonlinearity::Nonlinearity;
use crate::numerics::{ladder_trend, LadderTrend};
use crate::semigroup::{DiagonalSemigroup, Generator};
use crate::solver::{solve, EvolutionSystem, SolverConfig, Trajectory};
use crate::state::{l2, SpectralState};

/// Spectral description of a boundary control system. `R` and `ÂR` are
/// linear, so both are stored as `N × m` coefficient tables; `trace` is the
/// `m × m` matrix of `R̂R`, which must be the identity.
#[derive(Debug, Clone)]
pub struct BoundaryControlSystem {
    name: String,
    semigroup: DiagonalSemigroup,
    lifting: Vec<Vec<f64>>,
    formal_ar: Vec<Vec<f64>>,
    trace: Vec<Vec<f64>>,
    class: OperatorClass,
}

fn table_ok(t: &[Vec<f64>], rows: usize, cols: usize) -> bool {
    t.len() == rows && t.iter().all(|r| r.len() == cols && r.iter().all(|v| v.is_finite()))
}

impl BoundaryControlSystem {
    pub fn new(
        name: impl Into<String>,
        semigroup: DiagonalSemigroup,
        lifting: Vec<Vec<f64>>,
        formal_ar: Vec<Vec<f64>>,
        trace: Vec<Vec<f64>>,
        class: OperatorClass,
    ) -> Result<Self> {
        let n = semigroup.len();
        let m = trace.len();
        if m == 0 || !table_ok(&trace, m, m) {
            return Err(Error::InvalidArgument("boundary trace must be a finite square matrix".into()));
        }
        if !table_ok(&lifting, n, m) || !table_ok(&formal_ar, n, m) {
            return Err(Error::InvalidArgument(format!("lifting tables must be finite {n} × {m}")));
        }
        let s = Self { name: name.into(), semigroup, lifting, formal_ar, trace, class };
        s.check_invariants(0x5eed, 16)?;
        Ok(s)
    }

    /// Heat equation on `(0, π)` with Dirichlet input at `z = 0`, lifting
    /// `R d = d(1 - z/π)` and `ÂR = 0`.
    pub fn dirichlet_heat(modes: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.25) {
            return Err(Error::InvalidArgument(format!("Dirichlet input smoothness {alpha} outside (0, 1/4)")));
        }
        let sg = DiagonalSemigroup::dirichlet_laplacian(modes, 1.0)?;
        let lifting = (1..=modes).map(|n| vec![(2.0 / PI).sqrt() / n as f64]).collect();
        Self::new("dirichlet_heat_0_pi", sg, lifting, vec![vec![0.0]; modes], vec![vec![1.0]], OperatorClass::SmoothClass {
            alpha,
        })
    }

    /// Looks up a builtin family by name.
    pub fn builtin(name: &str, modes: usize) -> Result<Self> {
        match name {
            "dirichlet_heat_0_pi" => Self::dirichlet_heat(modes, 0.2),
            other => Err(Error::InvalidArgument(format!("unknown boundary control system `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn semigroup(&self) -> &DiagonalSemigroup {
        &self.semigroup
    }

    pub fn channels(&self) -> usize {
        self.trace.len()
    }

    pub fn class(&self) -> OperatorClass {
        self.class
    }

    fn apply(table: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
        table.iter().map(|r| r.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
    }

    /// `Ru` in spectral coordinates.
    pub fn lift(&self, u: &[f64]) -> SpectralState {
        SpectralState::from_raw(Self::apply(&self.lifting, u))
    }

    /// `ÂRu` in spectral coordinates.
    pub fn formal_ar(&self, u: &[f64]) -> SpectralState {
        SpectralState::from_raw(Self::apply(&self.formal_ar, u))
    }

    /// Checks `R̂Ru = u` and boundedness of `ÂR` on seeded random inputs.
    pub fn check_invariants(&self, seed: u64, samples: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.channels();
        for _ in 0..samples {
            let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = Self::apply(&self.trace, &u);
            let err = l2(&back.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
            if err > 1e-12 * (1.0 + l2(&u)) {
                return Err(Error::BcsInvariant(format!("trace of lifting differs from u = {u:?} by {err:e}")));
            }
            let ar = l2(&Self::apply(&self.formal_ar, &u));
            if !ar.is_finite() {
                return Err(Error::BcsInvariant(format!("formal AR not bounded at u = {u:?}")));
            }
        }
        Ok(())
    }

    /// `B = ÂR - A₋₁R` column by column: `(ÂR e_j)_n - μ_n (R e_j)_n`.
    pub fn make_input_operator(&self) -> Result<InputOperator> {
        let mus = self.semigroup.eigenvalues();
        let rows: Vec<Vec<f64>> = self
            .formal_ar
            .iter()
            .zip(&self.lifting)
            .zip(mus)
            .map(|((a, r), mu)| a.iter().zip(r).map(|(a, r)| a - mu * r).collect())
            .collect();
        let op = InputOperator::new(rows, self.class)?;
        if class_ladder(&self.semigroup, &op, 0.0)?.0 == LadderTrend::Divergent {
            return Err(Error::BcsInvariant("input operator does not land in X_-1".into()));
        }
        if verify_class(&self.semigroup, &op)? == LadderTrend::Divergent {
            return Err(Error::BcsInvariant(format!("declared class {:?} fails the ladder test", self.class)));
        }
        Ok(op)
    }

    /// The translated evolution system with `B₂ = I` and nonlinearity `f`.
    pub fn evolution_system(&self, f: Nonlinearity) -> Result<EvolutionSystem> {
        EvolutionSystem::new(self.semigroup.clone(), self.make_input_operator()?, f)
    }

    /// Fails unless `x0 - Ru(0)` has a bounded `(ω - μ)`-weighted norm on the
    /// truncation ladder.
    pub fn check_compatibility(&self, x0: &SpectralState, u0: &[f64]) -> Result<()> {
        let c = x0.sub(&self.lift(u0))?;
        let w = self.semigroup.fractional_weights(1.0)?;
        let terms: Vec<f64> = c.coeffs().iter().zip(&w).map(|(c, w)| (c * w).powi(2)).collect();
        if ladder_trend(&terms).0 == LadderTrend::Divergent {
            return Err(Error::CompatibilityViolated("x0 - Ru(0) is not in the generator domain".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub system: String,
    pub times: Vec<f64>,
    /// `‖(a) - (c)‖` at each time
    pub diff_lifted_mild: Vec<f64>,
    /// `‖(b) - (c)‖`
    pub diff_split_mild: Vec<f64>,
    /// `‖(a) - (b)‖`
    pub diff_lifted_split: Vec<f64>,
    pub max_difference: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Nonlinear convolution `∫₀ᵗ T(t-r) B₂ f(x(r), u(r)) dr` along the trajectory
/// nodes, with `f` interpolated linearly between nodes.
fn nonlinear_convolution(sys: &EvolutionSystem, tr: &Trajectory, u: &dyn Forcing) -> Vec<Vec<f64>> {
    let gen = Generator::Diagonal(sys.semigroup().expect("diagonal system").clone());
    let g = |k: usize| {
        let t = tr.times[k];
        let uv = if k + 1 == tr.times.len() { u.value_before(t) } else { u.value_at(t) };
        sys.b2().apply(sys.f().eval(&tr.states[k], &uv).coeffs())
    };
    let mut kernels = HashMap::new();
    let mut out = vec![vec![0.0; sys.dim()]];
    let mut g0 = g(0);
    for k in 1..tr.times.len() {
        let h = tr.times[k] - tr.times[k - 1];
        let kern = kernels.entry(h.to_bits()).or_insert_with(|| gen.step_kernel(h));
        let g1 = g(k);
        let next = kern.advance(&out[k - 1], &g0, &g1);
        out.push(next);
        g0 = g1;
    }
    out
}

/// Solves the translated system for a polynomial input and compares three
/// representations of the solution on the trajectory grid:
/// (a) `T(t)(x0 - Ru(0)) + ∫T(t-r)(ÂRu - Ru̇)dr + Ru(t) + N(t)`,
/// (b) `T(t)x0 + ∫T(t-r)ÂRu dr - A∫T(t-r)Ru dr + N(t)`,
/// (c) the mild solution from the solver.
pub fn representation_crosscheck(
    bcs: &BoundaryControlSystem,
    f: Nonlinearity,
    x0: &SpectralState,
    u: &PolynomialInput,
    tau: f64,
    cfg: &SolverConfig,
    tolerance: f64,
) -> Result<CrosscheckReport> {
    if u.channels() != bcs.channels() {
        return Err(Error::Dimension { expected: bcs.channels(), got: u.channels() });
    }
    bcs.check_compatibility(x0, &u.eval(0.0))?;
    let sys = bcs.evolution_system(f)?;
    let mut cfg = cfg.clone();
    cfg.record_substeps = true;
    let tr = solve(&sys, x0, u, tau, &cfg)?;
    if !tr.is_completed() {
        return Err(Error::InvalidArgument(format!("mild solution did not reach t = {tau}: {:?}", tr.status)));
    }
    let nl = nonlinear_convolution(&sys, &tr, u);
    let sg = bcs.semigroup();
    let mus = sg.eigenvalues();
    let n = sg.len();
    let du = u.derivative();
    let lift_op = InputOperator::bounded(bcs.lifting.clone())?;
    let ar_op = InputOperator::bounded(bcs.formal_ar.clone())?;
    let x0_shift = x0.sub(&bcs.lift(&u.eval(0.0)))?;

    let (mut d_ac, mut d_bc, mut d_ab) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &t) in tr.times.iter().enumerate() {
        let conv_ar = u.modal_convolution(mus, &ar_op, 0.0, t);
        let conv_r = u.modal_convolution(mus, &lift_op, 0.0, t);
        let conv_rdot = if du.degree() == 0 && du.coeffs()[0].iter().all(|v| *v == 0.0) {
            vec![0.0; n]
        } else {
            du.modal_convolution(mus, &lift_op, 0.0, t)
        };
        let ru_t = bcs.lift(&u.eval(t));
        let free0 = sg.apply_T(t, x0)?;
        let free_shift = sg.apply_T(t, &x0_shift)?;
        let form_a: Vec<f64> = (0..n)
            .map(|i| free_shift.coeffs()[i] + conv_ar[i] - conv_rdot[i] + ru_t.coeffs()[i] + nl[k][i])
            .collect();
        let form_b: Vec<f64> =
            (0..n).map(|i| free0.coeffs()[i] + conv_ar[i] - mus[i] * conv_r[i] + nl[k][i]).collect();
        let form_c = tr.states[k].coeffs();
        let dist = |a: &[f64], b: &[f64]| l2(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>());
        d_ac.push(dist(&form_a, form_c));
        d_bc.push(dist(&form_b, form_c));
        d_ab.push(dist(&form_a, &form_b));
    }
    let max_difference = d_ac.iter().chain(&d_bc).chain(&d_ab).fold(0.0f64, |m, v| m.max(*v));
    Ok(CrosscheckReport {
        system: bcs.name.clone(),
        times: tr.times.clone(),
        diff_lifted_mild: d_ac,
        diff_split_mild: d_bc,
        diff_lifted_split: d_ab,
        max_difference,
        tolerance,
        pass: max_difference <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burgers::{BurgersSystem, LocalTerm};

    #[test]
    fn dirichlet_heat_matches_burgers_boundary_operator() {
        let b = BoundaryControlSystem::dirichlet_heat(64, 0.2).unwrap().make_input_operator().unwrap();
        let reference = BurgersSystem::new(64, LocalTerm::Zero).unwrap().boundary_operator();
        for (x, y) in b.column(0).iter().zip(reference.column(0)) {
            assert!((x - y).abs() <= 1e-13 * y.abs());
        }
        assert_eq!(b.class(), reference.class());
    }

    #[test]
    fn interior_lifting_gives_zero_operator() {
        let sg = DiagonalSemigroup::dirichlet_laplacian(8, 1.0).unwrap();
        let r: Vec<Vec<f64>> = (1..=8).map(|n| vec![1.0 / (n * n * n) as f64]).collect();
        let ar: Vec<Vec<f64>> = r.iter().zip(sg.eigenvalues()).map(|(r, mu)| vec![mu * r[0]]).collect();
        let bcs = BoundaryControlSystem::new("interior", sg, r, ar, vec![vec![1.0]], OperatorClass::Bounded).unwrap();
        assert!(bcs.make_input_operator().unwrap().is_zero());
    }

    #[test]
    fn zero_lifting_gives_formal_part() {
        let sg = DiagonalSemigroup::dirichlet_laplacian(4, 1.0).unwrap();
        let c = vec![vec![1.0], vec![0.5], vec![0.0], vec![-2.0]];
        let bcs =
            BoundaryControlSystem::new("formal", sg, vec![vec![0.0]; 4], c.clone(), vec![vec![1.0]], OperatorClass::Bounded)
                .unwrap();
        assert_eq!(bcs.make_input_operator().unwrap().rows(), &c[..]);
    }

    #[test]
    fn wrong_trace_is_rejected() {
        let sg = DiagonalSemigroup::dirichlet_laplacian(4, 1.0).unwrap();
        let err = BoundaryControlSystem::new("bad", sg, vec![vec![0.0]; 4], vec![vec![0.0]; 4], vec![vec![0.5]], OperatorClass::Bounded)
            .unwrap_err();
        assert!(matches!(err, Error::BcsInvariant(_)));
    }

    #[test]
    fn incompatible_initial_state_is_rejected() {
        let bcs = BoundaryControlSystem::dirichlet_heat(64, 0.2).unwrap();
        let u = PolynomialInput::scalar(&[1.0], 1.0).unwrap();
        let err = representation_crosscheck(
            &bcs,
            Nonlinearity::zero(64),
            &SpectralState::zeros(64),
            &u,
            0.5,
            &SolverConfig::default(),
            1e-6,
        )
        .unwrap_err();
        assert!(matches!(err, Error::CompatibilityViolated(_)));
    }

    #[test]
    fn zero_input_collapses_to_free_flow() {
        let bcs = BoundaryControlSystem::dirichlet_heat(32, 0.2).unwrap();
        let x0 = SpectralState::unit(32, 2);
        let u = PolynomialInput::scalar(&[0.0], 1.0).unwrap();
        let rep =
            representation_crosscheck(&bcs, Nonlinearity::zero(32), &x0, &u, 1.0, &SolverConfig::default(), 1e-10).unwrap();
        assert!(rep.pass, "{}", rep.max_difference);
    }

    #[test]
    fn quadratic_boundary_input_three_forms_agree() {
        let bcs = BoundaryControlSystem::dirichlet_heat(128, 0.2).unwrap();
        let u = PolynomialInput::scalar(&[0.0, 0.0, 1.0], 1.0).unwrap();
        let rep = representation_crosscheck(
            &bcs,
            Nonlinearity::zero(128),
            &SpectralState::zeros(128),
            &u,
            1.0,
            &SolverConfig::default(),
            1e-6,
        )
        .unwrap();
        assert!(rep.pass, "{}", rep.max_difference);
    }
}
