//! Truncated eigen-coefficient states.
//!
//! A [`SpectralState`] holds the first `N` coefficients of `x` in an
//! orthonormal eigenbasis of the generator, so the norm of `X` is the
//! Euclidean norm of the coefficient vector. Fractional and extrapolation
//! norms are the same vector re-weighted per mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    coeffs: Vec<f64>,
    #[serde(default)]
    blown_up: bool,
}

impl SpectralState {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("state needs at least one mode".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient at mode {}", i + 1)));
        }
        Ok(Self { coeffs, blown_up: false })
    }

    /// Builds a state without the finiteness check; used for intermediate
    /// iterates that may overflow before blow-up is declared.
    pub(crate) fn from_raw(coeffs: Vec<f64>) -> Self {
        let blown_up = coeffs.iter().any(|c| !c.is_finite());
        Self { coeffs, blown_up }
    }

    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![0.0; n], blown_up: false }
    }

    /// Unit vector on mode `k` (1-based, matching the eigenbasis numbering).
    pub fn unit(n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= n, "mode {k} outside 1..={n}");
        let mut s = Self::zeros(n);
        s.coeffs[k - 1] = 1.0;
        s
    }

    pub fn blown_up(mut self) -> Self {
        self.blown_up = true;
        self
    }

    pub fn is_blown_up(&self) -> bool {
        self.blown_up
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `‖x‖_X` (Parseval).
    pub fn norm_x(&self) -> Result<f64> {
        if self.blown_up {
            return Err(Error::BlownUpState);
        }
        Ok(l2(&self.coeffs))
    }

    /// `(Σ w_n² x_n²)^{1/2}`; with `w_n = (ω-μ_n)^β` this is the `X_β` norm.
    pub fn norm_weighted(&self, weights: &[f64]) -> Result<f64> {
        if self.blown_up {
            return Err(Error::BlownUpState);
        }
        check_dim(self.len(), weights.len())?;
        Ok(self
            .coeffs
            .iter()
            .zip(weights)
            .map(|(c, w)| (c * w) * (c * w))
            .sum::<f64>()
            .sqrt())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(Self::from_raw(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.len(), other.len())?;
        Ok(Self::from_raw(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_raw(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Distance in the X norm, ignoring blow-up flags.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        check_dim(self.len(), other.len())?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Radial retraction onto the closed unit ball of the weighted norm.
    pub fn saturate(&self, weights: Option<&[f64]>) -> Self {
        let n = match weights {
            Some(w) => weighted_l2(&self.coeffs, w),
            None => l2(&self.coeffs),
        };
        if n <= 1.0 {
            self.clone()
        } else {
            self.scale(1.0 / n)
        }
    }

    /// Copy truncated or zero-padded to `n` modes.
    pub fn resized(&self, n: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(n, 0.0);
        Self::from_raw(c)
    }
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn weighted_l2(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(c, w)| (c * w) * (c * w)).sum::<f64>().sqrt()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::Dimension { expected, got })
    } else {
        Ok(())
    }
}
