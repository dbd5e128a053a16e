//! Input operators in spectral coordinates and their admissibility constants.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input::Forcing;
use crate::numerics::{ladder_trend, loglog_slope, phi1, LadderTrend};
use crate::semigroup::DiagonalSemigroup;
use crate::state::{l2, SpectralState};

/// Declared regularity of an input operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorClass {
    /// `B ∈ L(U, X)`.
    Bounded,
    /// `q`-admissible, optionally with a known constant valid for `t ≤ 1`.
    QAdmissible {
        q: f64,
        #[serde(default)]
        h_bound: Option<f64>,
    },
    /// `B ∈ L(U, X_{-1+α})`.
    SmoothClass { alpha: f64 },
}

impl OperatorClass {
    /// Smoothness index `α` with bounded operators counted as `α = 1`.
    pub fn smoothness(&self) -> Option<f64> {
        match self {
            OperatorClass::Bounded => Some(1.0),
            OperatorClass::SmoothClass { alpha } => Some(*alpha),
            OperatorClass::QAdmissible { .. } => None,
        }
    }
}

/// `N × m` coefficient matrix: row `n` is the response of mode `n` to the
/// input channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputOperator {
    rows: Vec<Vec<f64>>,
    class: OperatorClass,
}

impl InputOperator {
    pub fn new(rows: Vec<Vec<f64>>, class: OperatorClass) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("input operator needs at least one mode".into()));
        }
        let m = rows[0].len();
        if m == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("input operator rows must share one positive width".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("input operator coefficients must be finite".into()));
        }
        match class {
            OperatorClass::SmoothClass { alpha } if !(alpha > 0.0 && alpha <= 1.0) => {
                return Err(Error::InvalidArgument(format!("smooth class alpha {alpha} outside (0, 1]")));
            }
            OperatorClass::QAdmissible { q, .. } if !(q >= 1.0) => {
                return Err(Error::InvalidArgument(format!("admissibility exponent q = {q} below 1")));
            }
            _ => {}
        }
        Ok(Self { rows, class })
    }

    pub fn bounded(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows, OperatorClass::Bounded)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self { rows, class: OperatorClass::Bounded }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        Self { rows: vec![vec![0.0; m]; n], class: OperatorClass::Bounded }
    }

    /// Single-channel operator from its column.
    pub fn from_column(col: Vec<f64>, class: OperatorClass) -> Result<Self> {
        Self::new(col.into_iter().map(|c| vec![c]).collect(), class)
    }

    /// Block operator `[a | b]` acting on stacked inputs.
    pub fn hstack(a: &Self, b: &Self) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::Dimension { expected: a.dim(), got: b.dim() });
        }
        let rows = a.rows.iter().zip(&b.rows).map(|(x, y)| x.iter().chain(y).copied().collect()).collect();
        let class = match (a.class.smoothness(), b.class.smoothness()) {
            (Some(x), Some(y)) if x.min(y) >= 1.0 => OperatorClass::Bounded,
            (Some(x), Some(y)) => OperatorClass::SmoothClass { alpha: x.min(y) },
            _ => OperatorClass::QAdmissible { q: f64::INFINITY, h_bound: None },
        };
        Self::new(rows, class)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn channels(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn class(&self) -> OperatorClass {
        self.class
    }

    pub fn with_class(mut self, class: OperatorClass) -> Result<Self> {
        self.class = class;
        Self::new(self.rows, self.class)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|v| *v == 0.0)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn row_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| l2(r)).collect()
    }

    /// Rows multiplied by per-mode weights; the class is kept as declared.
    pub fn scaled_rows(&self, weights: &[f64]) -> Self {
        let rows = self.rows.iter().zip(weights).map(|(r, w)| r.iter().map(|v| v * w).collect()).collect();
        Self { rows, class: self.class }
    }

    /// Spectral norm `‖B‖_{L(U,X)}` of the truncation.
    pub fn operator_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let m = DMatrix::from_fn(self.dim(), self.channels(), |i, j| self.rows[i][j]);
        m.singular_values().iter().copied().fold(0.0, f64::max)
    }

    /// `‖(ωI - A)^β B‖` on the truncation.
    pub fn weighted_norm(&self, sys: &DiagonalSemigroup, beta: f64) -> Result<f64> {
        Ok(self.scaled_rows(&sys.fractional_weights(beta)?).operator_norm())
    }
}

/// `Φ(t)u = ∫_0^t T_{-1}(t-s) B u(s) ds`, exact per mode.
pub fn convolve(sys: &DiagonalSemigroup, b: &InputOperator, u: &dyn Forcing, t: f64) -> Result<SpectralState> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if t > u.horizon() * (1.0 + 1e-12) {
        return Err(Error::BeyondHorizon { t, horizon: u.horizon() });
    }
    if b.dim() != sys.len() {
        return Err(Error::Dimension { expected: sys.len(), got: b.dim() });
    }
    if b.channels() != u.channels() {
        return Err(Error::Dimension { expected: b.channels(), got: u.channels() });
    }
    Ok(SpectralState::from_raw(u.modal_convolution(sys.eigenvalues(), b, 0.0, t)))
}

/// Which `L^q` norm the input is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputNorm {
    L2,
    LInf,
}

/// Certified bracket `lower ≤ h_t ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HBracket {
    pub lower: f64,
    pub upper: f64,
}

const PROBE_CELLS: usize = 12;

/// Brackets the admissibility constant `h_t`.
///
/// The lower bound maximizes `‖Φ(t)u‖` over a probe family: all `±1` sign
/// patterns on a 12-cell subdivision per channel (`L^∞`), or normalized
/// single-cell impulses (`L²`). The upper bound comes from the declared class.
pub fn measure_h(sys: &DiagonalSemigroup, b: &InputOperator, t: f64, norm: InputNorm) -> HBracket {
    if t <= 0.0 || b.is_zero() {
        return HBracket { lower: 0.0, upper: 0.0 };
    }
    let mus = sys.eigenvalues();
    let w = t / PROBE_CELLS as f64;
    let mut lower: f64 = 0.0;
    for j in 0..b.channels() {
        let col = b.column(j);
        // v_i = response at time t to a unit pulse on cell i
        let cells: Vec<Vec<f64>> = (0..PROBE_CELLS)
            .map(|i| {
                let end = (i + 1) as f64 * w;
                mus.iter()
                    .zip(&col)
                    .map(|(mu, c)| c * (mu * (t - end)).exp() * phi1(*mu, w))
                    .collect()
            })
            .collect();
        match norm {
            InputNorm::L2 => {
                for v in &cells {
                    lower = lower.max(l2(v) / w.sqrt());
                }
            }
            InputNorm::LInf => {
                let mut gram = [[0.0; PROBE_CELLS]; PROBE_CELLS];
                for i in 0..PROBE_CELLS {
                    for k in 0..PROBE_CELLS {
                        gram[i][k] = cells[i].iter().zip(&cells[k]).map(|(a, b)| a * b).sum();
                    }
                }
                // the first sign is fixed by the symmetry s -> -s
                for mask in 0u32..(1 << (PROBE_CELLS - 1)) {
                    let s: Vec<f64> = (0..PROBE_CELLS)
                        .map(|i| if i > 0 && mask & (1 << (i - 1)) != 0 { -1.0 } else { 1.0 })
                        .collect();
                    let mut q = 0.0;
                    for i in 0..PROBE_CELLS {
                        for k in 0..PROBE_CELLS {
                            q += s[i] * s[k] * gram[i][k];
                        }
                    }
                    lower = lower.max(q.max(0.0).sqrt());
                }
            }
        }
    }
    let upper = upper_bound_for_norm(sys, b, t, norm).max(lower);
    HBracket { lower, upper }
}

fn upper_bound_for_norm(sys: &DiagonalSemigroup, b: &InputOperator, t: f64, norm: InputNorm) -> f64 {
    let (m, lam) = (sys.m(), sys.lambda());
    match (b.class(), norm) {
        (OperatorClass::Bounded, InputNorm::LInf) => m * b.operator_norm() * phi1(lam, t),
        (OperatorClass::Bounded, InputNorm::L2) => m * b.operator_norm() * phi1(2.0 * lam, t).sqrt(),
        (OperatorClass::SmoothClass { .. }, InputNorm::LInf) => upper_bound_h(sys, b, 0.0, t).unwrap_or(f64::INFINITY),
        (OperatorClass::SmoothClass { alpha }, InputNorm::L2) => {
            if alpha <= 0.5 {
                return f64::INFINITY;
            }
            let kappa = sys.kappa();
            let beta = 1.0 - alpha;
            let (Ok(c), Ok(wn)) = (sys.smoothing_constant(beta, kappa, t.max(1.0)), b.weighted_norm(sys, alpha - 1.0))
            else {
                return f64::INFINITY;
            };
            c * wn * (kappa.max(0.0) * t).exp() * (t.powf(2.0 * alpha - 1.0) / (2.0 * alpha - 1.0)).sqrt()
        }
        (OperatorClass::QAdmissible { h_bound, .. }, _) => match h_bound {
            Some(h) if t <= 1.0 => h,
            _ => f64::INFINITY,
        },
    }
}

/// `R t^{α-d} e^{κ⁺ t}` bounding `‖(ωI - A)^d Φ(t)‖` for `B ∈ L(U, X_{-1+α})`,
/// with `R = C_{1-α+d} ‖(ωI - A)^{α-1} B‖ / (α - d)`. Bounded operators count as `α = 1`.
pub fn upper_bound_h(sys: &DiagonalSemigroup, b: &InputOperator, d: f64, t: f64) -> Result<f64> {
    let alpha = b
        .class()
        .smoothness()
        .ok_or_else(|| Error::InvalidArgument("upper_bound_h needs a bounded or smooth-class operator".into()))?;
    if !(d >= 0.0 && d < alpha) {
        return Err(Error::ExponentOutOfRange { d, alpha });
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if b.is_zero() {
        return Ok(0.0);
    }
    let kappa = sys.kappa();
    let c = sys.smoothing_constant(1.0 - alpha + d, kappa, t.max(1.0))?;
    let r = c * b.weighted_norm(sys, alpha - 1.0)? / (alpha - d);
    Ok(r * t.powf(alpha - d) * (kappa.max(0.0) * t).exp())
}

/// Zero-class `L^∞` constant `c_t` of `B₂`.
pub fn c_constant(sys: &DiagonalSemigroup, b2: &InputOperator, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    match b2.class() {
        OperatorClass::Bounded => Ok(b2.operator_norm() * sys.m() * phi1(sys.lambda(), t)),
        OperatorClass::SmoothClass { .. } => upper_bound_h(sys, b2, 0.0, t),
        OperatorClass::QAdmissible { .. } => Err(Error::NotZeroClass),
    }
}

/// Truncation-level bound `(Σ_n (w_n ‖row_n‖ ∫_0^t e^{μ_n s} ds)²)^{1/2}` on
/// `‖W Φ(t)‖_{L^∞ → X}`, valid for every operator on the truncation.
pub fn modewise_h(sys: &DiagonalSemigroup, b: &InputOperator, weights: Option<&[f64]>, t: f64) -> f64 {
    let norms = b.row_norms();
    sys.eigenvalues()
        .iter()
        .enumerate()
        .map(|(n, mu)| {
            let w = weights.map_or(1.0, |w| w[n]);
            let v = w * norms[n] * phi1(*mu, t);
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityEstimate {
    pub t_grid: Vec<f64>,
    /// Nondecreasing envelope of the measured lower bounds.
    pub h_values: Vec<f64>,
    pub raw_lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Least-squares slope of `log h_t` against `log t`.
    pub fitted_exponent: f64,
}

pub fn estimate_scaling(sys: &DiagonalSemigroup, b: &InputOperator, t_grid: &[f64], norm: InputNorm) -> AdmissibilityEstimate {
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let brackets: Vec<HBracket> = ts.iter().map(|t| measure_h(sys, b, *t, norm)).collect();
    let raw_lower: Vec<f64> = brackets.iter().map(|h| h.lower).collect();
    let mut h_values = Vec::with_capacity(ts.len());
    let mut run: f64 = 0.0;
    for l in &raw_lower {
        run = run.max(*l);
        h_values.push(run);
    }
    let fitted_exponent = loglog_slope(&ts, &h_values);
    AdmissibilityEstimate { t_grid: ts, h_values, raw_lower, upper: brackets.iter().map(|h| h.upper).collect(), fitted_exponent }
}

/// Ladder test of `Σ_n (ω - μ_n)^{2(α-1)} ‖row_n‖²` for membership in `L(U, X_{-1+α})`.
pub fn class_ladder(sys: &DiagonalSemigroup, b: &InputOperator, alpha: f64) -> Result<(LadderTrend, [f64; 3])> {
    let w = sys.fractional_weights(alpha - 1.0)?;
    let terms: Vec<f64> = b.row_norms().iter().zip(&w).map(|(r, w)| (r * w) * (r * w)).collect();
    Ok(ladder_trend(&terms))
}

/// Checks the declared class against the ladder test.
pub fn verify_class(sys: &DiagonalSemigroup, b: &InputOperator) -> Result<LadderTrend> {
    let alpha = b.class().smoothness().unwrap_or(0.0);
    if alpha == 0.0 {
        return Ok(LadderTrend::Bounded);
    }
    Ok(class_ladder(sys, b, alpha)?.0)
}
