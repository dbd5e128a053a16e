//! Input signals.
//!
//! Essentially bounded inputs are represented by right-open piecewise-constant
//! signals ([`InputSignal`]); smooth inputs for the boundary-control
//! representation checks are vector polynomials in time
//! ([`PolynomialInput`]). Both implement [`Forcing`], which is what the solver
//! consumes: pointwise values plus exact per-mode exponential convolutions.

use serde::{Deserialize, Serialize};

use crate::admissibility::InputOperator;
use crate::error::{Error, Result};
use crate::numerics::{exp_moments, phi1};
use crate::state::l2;

/// What the solver needs from an input.
pub trait Forcing {
    fn channels(&self) -> usize;

    fn horizon(&self) -> f64;

    /// Right-continuous value at `t`.
    fn value_at(&self, t: f64) -> Vec<f64>;

    /// Left limit at `t` (equals `value_at(0)` for `t <= 0`).
    fn value_before(&self, t: f64) -> Vec<f64>;

    /// Essential sup of the U-norm on `[a, b]`.
    fn sup_norm_on(&self, a: f64, b: f64) -> f64;

    /// `∫_a^b e^{μ_n (b-s)} (B u(s))_n ds` for every mode `n`.
    fn modal_convolution(&self, mus: &[f64], op: &InputOperator, a: f64, b: f64) -> Vec<f64>;

    /// Constant pieces `(start, end, value)` covering `[a, b]`, when the input
    /// is piecewise constant.
    fn constant_pieces(&self, a: f64, b: f64) -> Option<Vec<(f64, f64, Vec<f64>)>>;
}

/// Right-open piecewise-constant signal: value `values[i]` on
/// `[grid[i], grid[i+1])`, with `grid[0] = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSignal {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl InputSignal {
    pub fn new(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 || values.len() != grid.len() - 1 {
            return Err(Error::InvalidArgument(format!(
                "input signal needs {} cell values for {} grid points",
                grid.len().saturating_sub(1),
                grid.len()
            )));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidArgument("input grid must start at 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument("input grid must be strictly increasing".into()));
        }
        let m = values[0].len();
        if m == 0 || values.iter().any(|v| v.len() != m) {
            return Err(Error::InvalidArgument("all cell values must share one positive dimension".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("input values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(value: Vec<f64>, horizon: f64) -> Result<Self> {
        Self::new(vec![0.0, horizon], vec![value])
    }

    pub fn zero(channels: usize, horizon: f64) -> Result<Self> {
        Self::constant(vec![0.0; channels], horizon)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| l2(v)).fold(0.0, f64::max)
    }

    fn cell_at(&self, t: f64) -> usize {
        // last i with grid[i] <= t
        let i = self.grid.partition_point(|g| *g <= t);
        i.saturating_sub(1).min(self.values.len() - 1)
    }

    fn cell_before(&self, t: f64) -> usize {
        // last i with grid[i] < t
        let i = self.grid.partition_point(|g| *g < t);
        i.saturating_sub(1).min(self.values.len() - 1)
    }

    /// `u(· + tau)` on `[0, horizon - tau]`.
    pub fn shift(&self, tau: f64) -> Result<Self> {
        if tau < 0.0 {
            return Err(Error::NegativeTime(tau));
        }
        let h = self.horizon();
        if tau >= h {
            return Err(Error::BeyondHorizon { t: tau, horizon: h });
        }
        if tau == 0.0 {
            return Ok(self.clone());
        }
        let first = self.cell_at(tau);
        let mut grid = vec![0.0];
        let mut values = Vec::new();
        for i in first..self.values.len() {
            let end = self.grid[i + 1] - tau;
            if end > *grid.last().unwrap() {
                grid.push(end);
                values.push(self.values[i].clone());
            }
        }
        Self::new(grid, values)
    }

    /// Restriction to `[0, t]`.
    pub fn truncate(&self, t: f64) -> Result<Self> {
        let h = self.horizon();
        if t > h {
            return Err(Error::BeyondHorizon { t, horizon: h });
        }
        if t <= 0.0 {
            return Err(Error::InvalidArgument("truncation time must be positive".into()));
        }
        let mut grid = vec![0.0];
        let mut values = Vec::new();
        for i in 0..self.values.len() {
            if self.grid[i] >= t {
                break;
            }
            grid.push(self.grid[i + 1].min(t));
            values.push(self.values[i].clone());
        }
        Self::new(grid, values)
    }

    /// `u1` on `[0, t)` followed by `u2(· - t)`.
    pub fn concat(u1: &Self, u2: &Self, t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        if t > u1.horizon() {
            return Err(Error::BeyondHorizon { t, horizon: u1.horizon() });
        }
        if u1.channels() != u2.channels() {
            return Err(Error::Dimension { expected: u1.channels(), got: u2.channels() });
        }
        if t == 0.0 {
            return Ok(u2.clone());
        }
        let head = u1.truncate(t)?;
        let mut grid = head.grid.clone();
        let mut values = head.values;
        for (i, v) in u2.values.iter().enumerate() {
            grid.push(t + u2.grid[i + 1]);
            values.push(v.clone());
        }
        Self::new(grid, values)
    }

    /// Channel-wise stacking of two signals on the merged grid; the result
    /// lives on the shorter of the two horizons.
    pub fn stack(a: &Self, b: &Self) -> Result<Self> {
        let h = a.horizon().min(b.horizon());
        let mut pts: Vec<f64> = a.grid.iter().chain(&b.grid).copied().filter(|g| *g < h).collect();
        pts.push(h);
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        pts.dedup();
        let values = pts[..pts.len() - 1]
            .iter()
            .map(|&t| {
                let mut v = a.value_at(t);
                v.extend(b.value_at(t));
                v
            })
            .collect();
        Self::new(pts, values)
    }

    /// Pointwise difference (on the merged grid).
    pub fn difference(a: &Self, b: &Self) -> Result<Self> {
        if a.channels() != b.channels() {
            return Err(Error::Dimension { expected: a.channels(), got: b.channels() });
        }
        let s = Self::stack(a, b)?;
        let m = a.channels();
        let values = s.values.iter().map(|v| (0..m).map(|j| v[j] - v[m + j]).collect()).collect();
        Self::new(s.grid, values)
    }

    /// Pointwise sum (on the merged grid).
    pub fn sum(a: &Self, b: &Self) -> Result<Self> {
        let neg = Self { grid: b.grid.clone(), values: b.values.iter().map(|v| v.iter().map(|x| -x).collect()).collect() };
        Self::difference(a, &neg)
    }
}

impl Forcing for InputSignal {
    fn channels(&self) -> usize {
        self.values[0].len()
    }

    fn horizon(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    fn value_at(&self, t: f64) -> Vec<f64> {
        self.values[self.cell_at(t)].clone()
    }

    fn value_before(&self, t: f64) -> Vec<f64> {
        self.values[self.cell_before(t)].clone()
    }

    fn sup_norm_on(&self, a: f64, b: f64) -> f64 {
        let (i0, i1) = (self.cell_at(a), self.cell_before(b.max(a)));
        (i0..=i1.max(i0)).map(|i| l2(&self.values[i])).fold(0.0, f64::max)
    }

    fn modal_convolution(&self, mus: &[f64], op: &InputOperator, a: f64, b: f64) -> Vec<f64> {
        let mut out = vec![0.0; mus.len()];
        if b <= a {
            return out;
        }
        for (ca, cb, v) in self.constant_pieces(a, b).unwrap() {
            let bv = op.apply(&v);
            for (n, &mu) in mus.iter().enumerate() {
                if bv[n] != 0.0 {
                    out[n] += (mu * (b - cb)).exp() * phi1(mu, cb - ca) * bv[n];
                }
            }
        }
        out
    }

    fn constant_pieces(&self, a: f64, b: f64) -> Option<Vec<(f64, f64, Vec<f64>)>> {
        let mut pieces = Vec::new();
        if b <= a {
            return Some(pieces);
        }
        let mut i = self.cell_at(a);
        let last = self.values.len() - 1;
        let mut start = a;
        loop {
            let end = if i == last { b } else { self.grid[i + 1].min(b) };
            if end > start {
                pieces.push((start, end, self.values[i].clone()));
            }
            if end >= b || i == last {
                break;
            }
            start = end;
            i += 1;
        }
        Some(pieces)
    }
}

/// `u(t) = Σ_k c_k t^k` with vector coefficients, on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialInput {
    coeffs: Vec<Vec<f64>>,
    horizon: f64,
}

impl PolynomialInput {
    pub fn new(coeffs: Vec<Vec<f64>>, horizon: f64) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > 5 {
            return Err(Error::InvalidArgument("polynomial input degree must be in 0..=4".into()));
        }
        let m = coeffs[0].len();
        if m == 0 || coeffs.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidArgument("polynomial coefficients must share one dimension".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidArgument("polynomial input horizon must be positive".into()));
        }
        Ok(Self { coeffs, horizon })
    }

    /// Scalar polynomial from coefficients of `1, t, t², ...`.
    pub fn scalar(coeffs: &[f64], horizon: f64) -> Result<Self> {
        Self::new(coeffs.iter().map(|c| vec![*c]).collect(), horizon)
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn derivative(&self) -> Self {
        let m = self.coeffs[0].len();
        let coeffs = if self.coeffs.len() == 1 {
            vec![vec![0.0; m]]
        } else {
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| c.iter().map(|x| x * (k + 1) as f64).collect())
                .collect()
        };
        Self { coeffs, horizon: self.horizon }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let m = self.coeffs[0].len();
        let mut acc = vec![0.0; m];
        for c in self.coeffs.iter().rev() {
            for (a, ci) in acc.iter_mut().zip(c) {
                *a = *a * t + ci;
            }
        }
        acc
    }

    /// Taylor coefficients at `a`: `u(a + s) = Σ_k d_k s^k`.
    fn taylor_at(&self, a: f64) -> Vec<Vec<f64>> {
        let deg = self.degree();
        let m = self.coeffs[0].len();
        (0..=deg)
            .map(|k| {
                let mut d = vec![0.0; m];
                for j in k..=deg {
                    let w = binom(j, k) * a.powi((j - k) as i32);
                    for (di, cj) in d.iter_mut().zip(&self.coeffs[j]) {
                        *di += w * cj;
                    }
                }
                d
            })
            .collect()
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Forcing for PolynomialInput {
    fn channels(&self) -> usize {
        self.coeffs[0].len()
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn value_at(&self, t: f64) -> Vec<f64> {
        self.eval(t)
    }

    fn value_before(&self, t: f64) -> Vec<f64> {
        self.eval(t)
    }

    fn sup_norm_on(&self, a: f64, b: f64) -> f64 {
        // dense sampling plus endpoints; polynomials of degree <= 4 vary slowly
        let n = 64;
        (0..=n)
            .map(|i| l2(&self.eval(a + (b - a) * i as f64 / n as f64)))
            .fold(0.0, f64::max)
    }

    fn modal_convolution(&self, mus: &[f64], op: &InputOperator, a: f64, b: f64) -> Vec<f64> {
        let dt = b - a;
        if dt <= 0.0 {
            return vec![0.0; mus.len()];
        }
        let taylor: Vec<Vec<f64>> = self.taylor_at(a).iter().map(|d| op.apply(d)).collect();
        let deg = self.degree();
        mus.iter()
            .enumerate()
            .map(|(n, &mu)| {
                let moments = exp_moments(mu, dt, deg);
                (0..=deg).map(|k| taylor[k][n] * moments[k]).sum()
            })
            .collect()
    }

    fn constant_pieces(&self, _a: f64, _b: f64) -> Option<Vec<(f64, f64, Vec<f64>)>> {
        if self.degree() == 0 {
            Some(vec![(_a, _b, self.coeffs[0].clone())])
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(grid: &[f64], vals: &[f64]) -> InputSignal {
        InputSignal::new(grid.to_vec(), vals.iter().map(|v| vec![*v]).collect()).unwrap()
    }

    #[test]
    fn concat_at_zero_is_second_signal() {
        let u = sig(&[0.0, 0.5, 2.0], &[1.0, -1.0]);
        assert_eq!(InputSignal::concat(&u, &u, 0.0).unwrap(), u);
    }

    #[test]
    fn concat_switches_at_t() {
        let a = InputSignal::constant(vec![1.0], 2.0).unwrap();
        let b = InputSignal::constant(vec![2.0], 2.0).unwrap();
        let c = InputSignal::concat(&a, &b, 1.0).unwrap();
        assert_eq!(c.value_at(0.5), vec![1.0]);
        assert_eq!(c.value_at(1.5), vec![2.0]);
        assert_eq!(c.value_at(1.0), vec![2.0]);
        assert_eq!(c.value_before(1.0), vec![1.0]);
        assert_eq!(c.horizon(), 3.0);
    }

    #[test]
    fn concat_sup_is_max_of_pieces() {
        let a = InputSignal::constant(vec![3.0], 2.0).unwrap();
        let b = InputSignal::constant(vec![-5.0], 1.0).unwrap();
        assert_eq!(InputSignal::concat(&a, &b, 2.0).unwrap().sup_norm(), 5.0);
    }

    #[test]
    fn concat_beyond_horizon_fails() {
        let a = InputSignal::constant(vec![3.0], 1.0).unwrap();
        assert!(matches!(InputSignal::concat(&a, &a, 1.5), Err(Error::BeyondHorizon { .. })));
    }

    #[test]
    fn shift_drops_past_cells() {
        let u = sig(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        let s = u.shift(1.5).unwrap();
        assert_eq!(s.grid(), &[0.0, 0.5, 1.5]);
        assert_eq!(s.value_at(0.2), vec![2.0]);
        assert_eq!(s.value_at(1.0), vec![3.0]);
    }

    #[test]
    fn stack_merges_grids() {
        let a = sig(&[0.0, 1.0, 2.0], &[1.0, 2.0]);
        let b = sig(&[0.0, 0.5, 3.0], &[5.0, 6.0]);
        let s = InputSignal::stack(&a, &b).unwrap();
        assert_eq!(s.grid(), &[0.0, 0.5, 1.0, 2.0]);
        assert_eq!(s.value_at(0.7), vec![1.0, 6.0]);
    }

    #[test]
    fn pieces_cover_interval() {
        let u = sig(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        let p = u.constant_pieces(0.5, 2.5).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!((p[0].0, p[0].1), (0.5, 1.0));
        assert_eq!((p[2].0, p[2].1), (2.0, 2.5));
    }

    #[test]
    fn polynomial_taylor_and_derivative() {
        let p = PolynomialInput::scalar(&[1.0, 1.0, 0.0, -1.0 / 6.0], 2.0).unwrap();
        let t = 0.7;
        let d = p.taylor_at(0.3);
        let direct = p.eval(t)[0];
        let via: f64 = d.iter().enumerate().map(|(k, c)| c[0] * (t - 0.3f64).powi(k as i32)).sum();
        assert!((direct - via).abs() < 1e-14);
        assert!((p.derivative().eval(t)[0] - (1.0 - t * t / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn polynomial_convolution_matches_riemann_sum() {
        let p = PolynomialInput::scalar(&[0.0, 0.0, 1.0], 2.0).unwrap();
        let op = InputOperator::bounded(vec![vec![1.0], vec![2.0]]).unwrap();
        let mus = [-1.0, -9.0];
        let got = p.modal_convolution(&mus, &op, 0.2, 1.1);
        let n = 200_000;
        let h = 0.9 / n as f64;
        for (k, mu) in mus.iter().enumerate() {
            let q: f64 = (0..n)
                .map(|i| {
                    let s = 0.2 + (i as f64 + 0.5) * h;
                    (mu * (1.1 - s)).exp() * s * s * (k + 1) as f64 * h
                })
                .sum();
            assert!((got[k] - q).abs() < 1e-9, "{} vs {q}", got[k]);
        }
    }
}
