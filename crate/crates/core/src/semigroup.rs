//! Generators and their semigroups.
//!
//! The main realization is diagonal: `T(t)` multiplies mode `n` by
//! `e^{μ_n t}` and `(ωI - A)^α` by `(ω - μ_n)^α`, so the rigged spaces
//! `X_β` share the coefficient vector and differ only by per-mode weights.
//! A small dense-matrix generator covers bounded, non-diagonal `A`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::exp_moments;
use crate::state::{check_dim, SpectralState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalSemigroup {
    eigenvalues: Vec<f64>,
    m: f64,
    lambda: f64,
    omega: f64,
    kappa: Option<f64>,
}

impl DiagonalSemigroup {
    /// Real point spectrum with the quasi-contractive certificate
    /// `M = 1`, `λ = max(0, max μ_n)`.
    pub fn new(eigenvalues: Vec<f64>, omega: f64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidArgument("semigroup needs at least one eigenvalue".into()));
        }
        if eigenvalues.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidArgument("eigenvalues must be finite".into()));
        }
        for (i, mu) in eigenvalues.iter().enumerate() {
            if !(omega - mu > 0.0) {
                return Err(Error::OmegaBelowGrowthBound { mode: i + 1, gap: omega - mu });
            }
        }
        let w0 = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { eigenvalues, m: 1.0, lambda: w0.max(0.0), omega, kappa: None })
    }

    /// Dirichlet Laplacian on `(0, π)`: `μ_n = -n²`, `n = 1..=modes`.
    pub fn dirichlet_laplacian(modes: usize, omega: f64) -> Result<Self> {
        Self::new((1..=modes).map(|n| -((n * n) as f64)).collect(), omega)
    }

    /// Overrides the growth certificate `‖T(t)‖ ≤ M e^{λt}`.
    pub fn with_growth(mut self, m: f64, lambda: f64) -> Result<Self> {
        if !(m >= 1.0) || lambda < self.growth_bound() {
            return Err(Error::InvalidArgument(format!(
                "growth certificate (M={m}, lambda={lambda}) does not dominate the spectrum"
            )));
        }
        self.m = m;
        self.lambda = lambda;
        Ok(self)
    }

    /// Overrides `κ` in the smoothing bounds; must exceed the growth bound.
    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > self.growth_bound()) {
            return Err(Error::InvalidArgument(format!("kappa {kappa} must exceed the growth bound")));
        }
        self.kappa = Some(kappa);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Real spectra of self-adjoint diagonal generators always give analytic semigroups.
    pub fn is_analytic(&self) -> bool {
        true
    }

    /// `ω₀ = max μ_n`.
    pub fn growth_bound(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `κ`, defaulting to `ω₀ + 1`.
    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(self.growth_bound() + 1.0)
    }

    /// Same semigroup restricted to the first `n` modes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!("cannot truncate {} modes to {n}", self.len())));
        }
        let mut s = Self::new(self.eigenvalues[..n].to_vec(), self.omega)?;
        s.m = self.m;
        s.lambda = self.lambda;
        s.kappa = self.kappa;
        Ok(s)
    }

    #[allow(non_snake_case)]
    pub fn apply_T(&self, t: f64, x: &SpectralState) -> Result<SpectralState> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        check_dim(self.len(), x.len())?;
        Ok(SpectralState::from_raw(
            self.eigenvalues.iter().zip(x.coeffs()).map(|(mu, c)| (mu * t).exp() * c).collect(),
        ))
    }

    /// Per-mode weights `(ω - μ_n)^α`.
    pub fn fractional_weights(&self, alpha: f64) -> Result<Vec<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, mu)| {
                let gap = self.omega - mu;
                if gap <= 0.0 {
                    Err(Error::OmegaBelowGrowthBound { mode: i + 1, gap })
                } else {
                    Ok(gap.powf(alpha))
                }
            })
            .collect()
    }

    /// `(ωI - A)^α x`.
    pub fn apply_fractional(&self, alpha: f64, x: &SpectralState) -> Result<SpectralState> {
        check_dim(self.len(), x.len())?;
        if alpha == 0.0 {
            return Ok(x.clone());
        }
        let w = self.fractional_weights(alpha)?;
        Ok(SpectralState::from_raw(x.coeffs().iter().zip(&w).map(|(c, w)| c * w).collect()))
    }

    /// `‖x‖_{X_α}`.
    pub fn norm_alpha(&self, alpha: f64, x: &SpectralState) -> Result<f64> {
        x.norm_weighted(&self.fractional_weights(alpha)?)
    }

    /// Exact operator norm of `(ωI - A)^α T(t)` on the truncation.
    #[allow(non_snake_case)]
    pub fn frac_T_norm(&self, alpha: f64, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        if t == 0.0 && alpha > 0.0 {
            return Err(Error::UnboundedAtZero(alpha));
        }
        let w = self.fractional_weights(alpha)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(&w)
            .map(|(mu, w)| w * (mu * t).exp())
            .fold(0.0, f64::max))
    }

    /// Smallest `C` with `‖(ωI - A)^α T(s)‖ ≤ C s^{-α} e^{κ s}` for all
    /// `s ∈ (0, horizon]`, computed as the exact per-mode supremum.
    pub fn smoothing_constant(&self, alpha: f64, kappa: f64, horizon: f64) -> Result<f64> {
        if !(kappa > self.growth_bound()) {
            return Err(Error::InvalidArgument(format!("kappa {kappa} must exceed the growth bound")));
        }
        if alpha == 0.0 {
            return Ok(1.0);
        }
        let w = self.fractional_weights(alpha)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(&w)
            .map(|(mu, w)| {
                let s = (alpha / (kappa - mu)).min(horizon);
                w * s.powf(alpha) * ((mu - kappa) * s).exp()
            })
            .fold(0.0, f64::max))
    }

    /// `sup` of `t^α ‖(ωI - A)^α T(t)‖ e^{-κt}` over `t = 2^{-j}`, `j = 0..=jmax`.
    pub fn smoothing_constant_dyadic(&self, alpha: f64, kappa: f64, jmax: u32) -> Result<f64> {
        let mut best: f64 = 0.0;
        for j in 0..=jmax {
            let t = 0.5f64.powi(j as i32);
            best = best.max(t.powf(alpha) * self.frac_T_norm(alpha, t)? * (-kappa * t).exp());
        }
        Ok(best)
    }
}

/// Bounded generator given by a dense `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGenerator {
    a: DMatrix<f64>,
    lambda: f64,
}

impl DenseGenerator {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("dense generator must be a nonempty square matrix".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dense generator entries must be finite".into()));
        }
        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        // ‖e^{At}‖ ≤ e^{ν t} with ν the largest eigenvalue of the symmetric part
        let sym = (&a + a.transpose()) * 0.5;
        let nu = sym.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { a, lambda: nu.max(0.0) })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.a.nrows() == 0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn expm(&self, t: f64) -> DMatrix<f64> {
        (&self.a * t).exp()
    }

    /// `(e^{Ah}, ∫_0^h e^{A(h-s)} ds, ∫_0^h e^{A(h-s)} s ds)` from one
    /// augmented exponential.
    pub fn integrals(&self, h: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let n = self.len();
        let mut c = DMatrix::zeros(3 * n, 3 * n);
        c.view_mut((0, 0), (n, n)).copy_from(&(&self.a * h));
        for i in 0..n {
            c[(i, n + i)] = h;
            c[(n + i, 2 * n + i)] = h;
        }
        let e = c.exp();
        let e0 = e.view((0, 0), (n, n)).into_owned();
        let i0 = e.view((0, n), (n, n)).into_owned();
        let i1 = e.view((0, 2 * n), (n, n)).into_owned();
        (e0, i0, i1)
    }
}

/// Per-substep propagators for the piecewise-linear exponential integrator:
/// `N_{k+1} = E N_k + P g_k + Q (g_{k+1} - g_k)` with
/// `E = e^{Ah}`, `P = ∫_0^h e^{A(h-s)} ds`, `Q = h^{-1} ∫_0^h e^{A(h-s)} s ds`.
#[derive(Debug, Clone)]
pub enum StepKernel {
    Diagonal { e: Vec<f64>, p: Vec<f64>, q: Vec<f64> },
    Dense { e: DMatrix<f64>, p: DMatrix<f64>, q: DMatrix<f64> },
}

impl StepKernel {
    /// `E x + P g0 + Q (g1 - g0)`.
    pub fn advance(&self, x: &[f64], g0: &[f64], g1: &[f64]) -> Vec<f64> {
        match self {
            StepKernel::Diagonal { e, p, q } => (0..x.len())
                .map(|n| e[n] * x[n] + p[n] * g0[n] + q[n] * (g1[n] - g0[n]))
                .collect(),
            StepKernel::Dense { e, p, q } => {
                let xv = DVector::from_column_slice(x);
                let g0v = DVector::from_column_slice(g0);
                let dg = DVector::from_column_slice(g1) - &g0v;
                let r = e * xv + p * g0v + q * dg;
                r.as_slice().to_vec()
            }
        }
    }

    pub fn propagate(&self, x: &[f64]) -> Vec<f64> {
        match self {
            StepKernel::Diagonal { e, .. } => x.iter().zip(e).map(|(a, b)| a * b).collect(),
            StepKernel::Dense { e, .. } => (e * DVector::from_column_slice(x)).as_slice().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Diagonal(DiagonalSemigroup),
    Dense(DenseGenerator),
}

impl From<DiagonalSemigroup> for Generator {
    fn from(s: DiagonalSemigroup) -> Self {
        Generator::Diagonal(s)
    }
}

impl From<DenseGenerator> for Generator {
    fn from(s: DenseGenerator) -> Self {
        Generator::Dense(s)
    }
}

impl Generator {
    pub fn len(&self) -> usize {
        match self {
            Generator::Diagonal(s) => s.len(),
            Generator::Dense(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn m(&self) -> f64 {
        match self {
            Generator::Diagonal(s) => s.m(),
            Generator::Dense(_) => 1.0,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            Generator::Diagonal(s) => s.lambda(),
            Generator::Dense(d) => d.lambda(),
        }
    }

    pub fn diagonal(&self) -> Option<&DiagonalSemigroup> {
        match self {
            Generator::Diagonal(s) => Some(s),
            Generator::Dense(_) => None,
        }
    }

    #[allow(non_snake_case)]
    pub fn apply_T(&self, t: f64, x: &SpectralState) -> Result<SpectralState> {
        match self {
            Generator::Diagonal(s) => s.apply_T(t, x),
            Generator::Dense(d) => {
                if t < 0.0 {
                    return Err(Error::NegativeTime(t));
                }
                check_dim(d.len(), x.len())?;
                let y = d.expm(t) * DVector::from_column_slice(x.coeffs());
                Ok(SpectralState::from_raw(y.as_slice().to_vec()))
            }
        }
    }

    pub fn step_kernel(&self, h: f64) -> StepKernel {
        match self {
            Generator::Diagonal(s) => {
                let mut e = Vec::with_capacity(s.len());
                let mut p = Vec::with_capacity(s.len());
                let mut q = Vec::with_capacity(s.len());
                for &mu in s.eigenvalues() {
                    let m = exp_moments(mu, h, 1);
                    e.push((mu * h).exp());
                    p.push(m[0]);
                    q.push(m[1] / h);
                }
                StepKernel::Diagonal { e, p, q }
            }
            Generator::Dense(d) => {
                let (e, p, i1) = d.integrals(h);
                StepKernel::Dense { e, p, q: i1 / h }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat(n: usize) -> DiagonalSemigroup {
        DiagonalSemigroup::dirichlet_laplacian(n, 1.0).unwrap()
    }

    #[test]
    fn t_zero_is_identity_and_single_mode_decays() {
        let s = DiagonalSemigroup::new((1..=6).map(|k| -(k as f64)).collect(), 0.0).unwrap();
        let x = SpectralState::new(vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0]).unwrap();
        assert_eq!(s.apply_T(0.0, &x).unwrap(), x);
        for k in 1..=6 {
            let y = s.apply_T(0.3, &SpectralState::unit(6, k)).unwrap();
            assert!((y.norm_x().unwrap() - (-(k as f64) * 0.3).exp()).abs() < 1e-15);
        }
        assert!(s.apply_T(-1.0, &x).is_err());
    }

    #[test]
    fn fractional_powers_are_per_mode() {
        let s = heat(5);
        let y = s.apply_fractional(0.5, &SpectralState::unit(5, 3)).unwrap();
        assert!((y.coeffs()[2] - 10f64.sqrt()).abs() < 1e-14);
        let x = SpectralState::new(vec![0.3, -1.0, 2.0, 0.1, 5.0]).unwrap();
        let back = s.apply_fractional(-0.7, &s.apply_fractional(0.7, &x).unwrap()).unwrap();
        assert!(back.distance(&x).unwrap() < 1e-12);
    }

    #[test]
    fn omega_must_exceed_spectrum() {
        assert!(matches!(
            DiagonalSemigroup::new(vec![-1.0, 0.5], 0.5),
            Err(Error::OmegaBelowGrowthBound { mode: 2, .. })
        ));
    }

    #[test]
    fn frac_norm_errors_at_zero() {
        assert_eq!(heat(4).frac_T_norm(0.5, 0.0), Err(Error::UnboundedAtZero(0.5)));
        assert_eq!(heat(4).frac_T_norm(0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn exact_smoothing_constant_dominates_dyadic_sweep() {
        let s = heat(256);
        for alpha in [0.25, 0.5, 0.75] {
            let exact = s.smoothing_constant(alpha, s.kappa(), 1.0).unwrap();
            let swept = s.smoothing_constant_dyadic(alpha, s.kappa(), 40).unwrap();
            assert!(swept <= exact * (1.0 + 1e-12));
            assert!(swept >= 0.8 * exact, "{alpha}: {swept} vs {exact}");
        }
    }

    #[test]
    fn dense_integrals_match_diagonal_kernel() {
        let d = DenseGenerator::new(vec![vec![-1.0, 0.0], vec![0.0, -4.0]]).unwrap();
        let g: Generator = d.into();
        let s: Generator = DiagonalSemigroup::new(vec![-1.0, -4.0], 0.0).unwrap().into();
        let (kd, ks) = (g.step_kernel(0.1), s.step_kernel(0.1));
        let x = [1.0, 2.0];
        let (g0, g1) = ([0.5, -1.0], [0.7, 3.0]);
        let a = kd.advance(&x, &g0, &g1);
        let b = ks.advance(&x, &g0, &g1);
        for i in 0..2 {
            assert!((a[i] - b[i]).abs() < 1e-13, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn dense_growth_from_symmetric_part() {
        let d = DenseGenerator::new(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(d.lambda().abs() < 1e-14);
        let d = DenseGenerator::new(vec![vec![1.0, 0.0], vec![0.0, -3.0]]).unwrap();
        assert!((d.lambda() - 1.0).abs() < 1e-14);
    }
}
