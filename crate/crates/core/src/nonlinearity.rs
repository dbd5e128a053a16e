//! Nonlinearities `f(x, u)` with their declared certificates.
//!
//! The Lipschitz function `L(r)`, the growth pair `(σ, c)` with
//! `‖f(0,u)‖ ≤ σ(‖u‖) + c`, and the optional global constants are declared
//! by whoever builds the nonlinearity. They are never inferred; the
//! `check_*` methods only spot-check them on random samples.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::state::{l2, SpectralState};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type EvalFn = Arc<dyn Fn(&SpectralState, &[f64]) -> SpectralState + Send + Sync>;

/// A function of class `K_∞`: continuous, zero at zero, strictly increasing
/// and unbounded. The properties are certified on a sampled grid when the
/// function is constructed.
#[derive(Clone)]
pub struct KinfFunction {
    f: ScalarFn,
    name: String,
}

impl fmt::Debug for KinfFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KinfFunction({})", self.name)
    }
}

impl KinfFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        let f0 = f(0.0);
        if f0 != 0.0 {
            return Err(Error::NotKInfinity(format!("{name}(0) = {f0}")));
        }
        let grid: Vec<f64> = (-20..=60).map(|k| 2f64.powi(k)).collect();
        let vals: Vec<f64> = grid.iter().map(|r| f(*r)).collect();
        if vals[0] <= 0.0 || vals.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NotKInfinity(format!("{name} is not strictly increasing on the sample grid")));
        }
        let at_one = f(1.0);
        if !(*vals.last().unwrap() >= 10.0 * at_one) {
            return Err(Error::NotKInfinity(format!("{name} shows no unbounded growth on the sample grid")));
        }
        Ok(Self { f: Arc::new(f), name })
    }

    pub fn identity() -> Self {
        Self { f: Arc::new(|r| r), name: "identity".into() }
    }

    pub fn linear(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::NotKInfinity(format!("linear slope {a} must be positive")));
        }
        Self::new(format!("{a}*r"), move |r| a * r)
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    dim: usize,
    eval: EvalFn,
    lipschitz: ScalarFn,
    growth_sigma: KinfFunction,
    growth_c: f64,
    global_lipschitz: Option<f64>,
    linear_growth: Option<f64>,
    input_modulus: Option<KinfFunction>,
    input_independent: bool,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("growth_c", &self.growth_c)
            .field("global_lipschitz", &self.global_lipschitz)
            .finish()
    }
}

impl Nonlinearity {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        eval: impl Fn(&SpectralState, &[f64]) -> SpectralState + Send + Sync + 'static,
        lipschitz: impl Fn(f64) -> f64 + Send + Sync + 'static,
        growth_sigma: KinfFunction,
        growth_c: f64,
    ) -> Result<Self> {
        if !(growth_c >= 0.0) {
            return Err(Error::InvalidArgument("growth constant c must be nonnegative".into()));
        }
        Ok(Self {
            name: name.into(),
            dim,
            eval: Arc::new(eval),
            lipschitz: Arc::new(lipschitz),
            growth_sigma,
            growth_c,
            global_lipschitz: None,
            linear_growth: None,
            input_modulus: None,
            input_independent: false,
        })
    }

    /// Declares `L(r) ≤ l` for every `r`.
    pub fn with_global_lipschitz(mut self, l: f64) -> Self {
        self.global_lipschitz = Some(l);
        self
    }

    /// Declares `‖f(x,u)‖ ≤ l ‖x‖ + σ(‖u‖) + c` (norm of the state space in use).
    pub fn with_linear_growth(mut self, l: f64) -> Self {
        self.linear_growth = Some(l);
        self
    }

    /// Declares the joint modulus `q` with
    /// `‖f(x1,v1) - f(x2,v2)‖ ≤ L(C)(‖x1-x2‖ + q(‖v1-v2‖))`.
    pub fn with_input_modulus(mut self, q: KinfFunction) -> Self {
        self.input_modulus = Some(q);
        self
    }

    /// Marks `f` as not depending on `u` at all.
    pub fn input_independent(mut self) -> Self {
        self.input_independent = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &SpectralState, u: &[f64]) -> SpectralState {
        (self.eval)(x, u)
    }

    pub fn lipschitz(&self, r: f64) -> f64 {
        (self.lipschitz)(r)
    }

    pub fn sigma(&self) -> &KinfFunction {
        &self.growth_sigma
    }

    pub fn growth_c(&self) -> f64 {
        self.growth_c
    }

    pub fn global_lipschitz(&self) -> Option<f64> {
        self.global_lipschitz
    }

    pub fn linear_growth(&self) -> Option<f64> {
        self.linear_growth
    }

    pub fn input_modulus(&self) -> Option<&KinfFunction> {
        self.input_modulus.as_ref()
    }

    pub fn is_input_independent(&self) -> bool {
        self.input_independent
    }

    /// `f ≡ 0`.
    pub fn zero(dim: usize) -> Self {
        Self::new("zero", dim, move |x, _| SpectralState::zeros(x.len()), |_| 0.0, KinfFunction::identity(), 0.0)
            .unwrap()
            .with_global_lipschitz(0.0)
            .with_linear_growth(0.0)
            .with_input_modulus(KinfFunction::identity())
            .input_independent()
    }

    /// Coefficient-wise `x_n ↦ x_n²`; `L(r) = 2r`.
    pub fn scalar_square(dim: usize) -> Self {
        Self::coefficientwise("scalar_square", dim, |y| y * y, |r| 2.0 * r)
            .with_input_modulus(KinfFunction::identity())
            .input_independent()
    }

    /// Coefficient-wise `gain · arctan(x_n)`; globally Lipschitz with constant `|gain|`.
    pub fn arctan(dim: usize, gain: f64) -> Self {
        let g = gain.abs();
        Self::coefficientwise("arctan", dim, move |y| gain * y.atan(), move |_| g)
            .with_global_lipschitz(g)
            .with_linear_growth(g)
            .with_input_modulus(KinfFunction::identity())
            .input_independent()
    }

    /// `a · x`.
    pub fn linear(dim: usize, a: f64) -> Self {
        let g = a.abs();
        Self::coefficientwise("linear", dim, move |y| a * y, move |_| g)
            .with_global_lipschitz(g)
            .with_linear_growth(g)
            .with_input_modulus(KinfFunction::identity())
            .input_independent()
    }

    /// Coefficient-wise `a · x_n³`; `L(r) = 3|a| r²`.
    pub fn cubic(dim: usize, a: f64) -> Self {
        let g = a.abs();
        Self::coefficientwise("cubic", dim, move |y| a * y * y * y, move |r| 3.0 * g * r * r)
            .with_input_modulus(KinfFunction::identity())
            .input_independent()
    }

    /// `x ↦ (φ(x_n))_n`. The Lipschitz bound `lip(r)` must dominate `|φ'|`
    /// on `[-r, r]`; `f(0,u) = (φ(0))_n` so `c = |φ(0)| √N`.
    pub fn coefficientwise(
        name: &str,
        dim: usize,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lip: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let c = phi(0.0).abs() * (dim as f64).sqrt();
        Self::new(
            name,
            dim,
            move |x, _| SpectralState::from_raw(x.coeffs().iter().map(|y| phi(*y)).collect()),
            lip,
            KinfFunction::identity(),
            c,
        )
        .unwrap()
    }

    /// Adds an input-affine term `f(x,u) + G u`, with `G` given as an
    /// `N × m` matrix of rows.
    pub fn plus_input_map(self, g: Vec<Vec<f64>>) -> Result<Self> {
        if g.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: g.len() });
        }
        let gnorm = g.iter().map(|r| l2(r).powi(2)).sum::<f64>().sqrt();
        let base = self.clone();
        let g = Arc::new(g);
        let gg = g.clone();
        let sigma = if gnorm > 0.0 {
            KinfFunction::new(format!("{}+{gnorm}*r", base.growth_sigma.name), {
                let s = base.growth_sigma.clone();
                move |r| s.eval(r) + gnorm * r
            })?
        } else {
            base.growth_sigma.clone()
        };
        let lip = base.lipschitz.clone();
        let mut out = Self::new(
            format!("{}+Gu", base.name),
            base.dim,
            move |x, u| {
                let fx = base.eval(x, u);
                let gu: Vec<f64> = gg.iter().map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum()).collect();
                SpectralState::from_raw(fx.coeffs().iter().zip(&gu).map(|(a, b)| a + b).collect())
            },
            move |r| lip(r).max(gnorm),
            sigma,
            self.growth_c,
        )?;
        out.global_lipschitz = self.global_lipschitz.map(|l| l.max(gnorm));
        out.input_modulus = Some(KinfFunction::identity());
        drop(g);
        Ok(out)
    }

    /// The saturated nonlinearity `f̃(x,u) = f(sat(x), sat₂(u))` with radial
    /// retraction onto the unit balls (of the weighted state norm when
    /// `weights` is given). Globally Lipschitz with constant `L(1)`.
    pub fn saturated(&self, weights: Option<Vec<f64>>) -> Self {
        let base = self.clone();
        let l1 = self.lipschitz(1.0);
        let w = weights.map(Arc::new);
        let mut out = Self::new(
            format!("sat({})", self.name),
            self.dim,
            move |x, u| {
                let xs = x.saturate(w.as_deref().map(|v| v.as_slice()));
                let nu = l2(u);
                if nu > 1.0 {
                    let us: Vec<f64> = u.iter().map(|v| v / nu).collect();
                    base.eval(&xs, &us)
                } else {
                    base.eval(&xs, u)
                }
            },
            move |_| l1,
            self.growth_sigma.clone(),
            self.growth_c,
        )
        .unwrap()
        .with_global_lipschitz(l1);
        out.input_modulus = self.input_modulus.clone();
        out.input_independent = self.input_independent;
        out
    }

    /// Largest observed `‖f(y,v) - f(x,v)‖ / (L(C) ‖y - x‖)` over random
    /// pairs in `B_C` and inputs in `B_{C,U}`; `≤ 1` when the declaration holds.
    pub fn check_lipschitz<R: Rng>(&self, rng: &mut R, c: f64, channels: usize, samples: usize) -> f64 {
        let l = self.lipschitz(c);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = random_ball(rng, self.dim, c);
            let y = random_ball(rng, self.dim, c);
            let v = random_ball(rng, channels, c).into_coeffs();
            let num = self.eval(&y, &v).distance(&self.eval(&x, &v)).unwrap();
            let den = l * y.distance(&x).unwrap();
            if den > 0.0 {
                worst = worst.max(num / den);
            } else if num > 0.0 {
                worst = f64::INFINITY;
            }
        }
        worst
    }

    /// Largest observed `‖f(0,v)‖ / (σ(‖v‖) + c)`.
    pub fn check_growth<R: Rng>(&self, rng: &mut R, c: f64, channels: usize, samples: usize) -> f64 {
        let zero = SpectralState::zeros(self.dim);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let v = random_ball(rng, channels, c).into_coeffs();
            let num = self.eval(&zero, &v).norm_x().unwrap_or(f64::INFINITY);
            let den = self.growth_sigma.eval(l2(&v)) + self.growth_c;
            if den > 0.0 {
                worst = worst.max(num / den);
            } else if num > 0.0 {
                worst = f64::INFINITY;
            }
        }
        worst
    }
}

/// Uniform-direction random point of the closed ball `B_r` in `R^n`.
pub(crate) fn random_ball<R: Rng>(rng: &mut R, n: usize, r: f64) -> SpectralState {
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = l2(&v).max(1e-300);
    let rad = r * rng.gen_range(0.0..=1.0f64);
    SpectralState::from_raw(v.iter().map(|c| c * rad / nv).collect())
}
