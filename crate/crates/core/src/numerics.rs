//! Small scalar kernels shared by the convolution and certificate code.

/// Exponential moments `I_k = ∫_0^dt e^{mu (dt - s)} s^k ds` for `k = 0..=kmax`.
///
/// Uses the power series when `|mu dt| < 1` and upward integration by parts
/// otherwise; both branches stay accurate for `mu -> 0` and for strongly
/// negative `mu`.
pub fn exp_moments(mu: f64, dt: f64, kmax: usize) -> Vec<f64> {
    let z = mu * dt;
    let mut out = Vec::with_capacity(kmax + 1);
    if dt == 0.0 {
        out.resize(kmax + 1, 0.0);
        return out;
    }
    if z.abs() < 1.0 {
        // I_k = k! Σ_j mu^j dt^{j+k+1} / (j+k+1)!
        for k in 0..=kmax {
            let mut term = dt.powi(k as i32 + 1) / (k as f64 + 1.0);
            let mut sum = term;
            let mut j = 0usize;
            while j < 60 {
                j += 1;
                term *= z / (j + k + 1) as f64;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() {
                    break;
                }
            }
            out.push(sum);
        }
    } else {
        let i0 = z.exp_m1() / mu;
        out.push(i0);
        let mut dtk = 1.0;
        for k in 1..=kmax {
            dtk *= dt;
            let prev = out[k - 1];
            out.push((k as f64 * prev - dtk) / mu);
        }
    }
    out
}

/// `∫_0^dt e^{mu s} ds`, the zero-order moment.
pub fn phi1(mu: f64, dt: f64) -> f64 {
    let z = mu * dt;
    if z.abs() < 1e-6 {
        dt * (1.0 + z / 2.0 + z * z / 6.0)
    } else {
        z.exp_m1() / mu
    }
}

/// Least-squares slope of `log y` against `log x`; skips non-positive pairs.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Trend of a nonnegative series on a truncation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LadderTrend {
    Bounded,
    Divergent,
}

/// Partial sums of `terms` at `N/4`, `N/2`, `N`; the series is called
/// divergent when the last dyadic block adds at least as much as the one
/// before it (and a non-negligible amount).
pub fn ladder_trend(terms: &[f64]) -> (LadderTrend, [f64; 3]) {
    let n = terms.len();
    let partial = |m: usize| terms[..m].iter().sum::<f64>();
    let (q, h) = ((n / 4).max(1), (n / 2).max(1));
    let s = [partial(q), partial(h), partial(n)];
    let d1 = s[1] - s[0];
    let d2 = s[2] - s[1];
    let trend = if n >= 8 && d2 > 1e-12 * s[2].max(1e-300) && d2 >= d1 {
        LadderTrend::Divergent
    } else {
        LadderTrend::Bounded
    };
    (trend, s)
}

/// Mittag-Leffler function `E_β(z) = Σ z^k / Γ(kβ + 1)` for `z ≥ 0`.
pub fn mittag_leffler(beta: f64, z: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if z <= 0.0 {
        return 1.0;
    }
    let lz = z.ln();
    let mut sum = 1.0;
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        let term = (kf * lz - ln_gamma(kf * beta + 1.0)).exp();
        sum += term;
        if (term < 1e-17 * sum && kf * beta > z) || k > 20_000 || !sum.is_finite() {
            break;
        }
        k += 1;
    }
    sum
}
