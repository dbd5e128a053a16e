//! Heat equation with a piecewise-constant distributed input, compared with
//! the per-mode variation-of-constants formula.

use mildflow::{solve, DiagonalSemigroup, EvolutionSystem, InputOperator, InputSignal, Nonlinearity, SolverConfig, SpectralState};

fn main() -> mildflow::Result<()> {
    let n = 64;
    let sg = DiagonalSemigroup::dirichlet_laplacian(n, 1.0)?;
    let sys = EvolutionSystem::new(sg.clone(), InputOperator::identity(n), Nonlinearity::zero(n))?;

    let x0 = SpectralState::new((1..=n).map(|k| 1.0 / (k * k) as f64).collect())?;
    let u = InputSignal::new(vec![0.0, 0.3, 1.0], vec![vec![1.0; n], vec![-0.5; n]])?;
    let tr = solve(&sys, &x0, &u, 1.0, &SolverConfig::default())?;

    let exact = |k: usize, t: f64| {
        let mu = -(((k + 1) * (k + 1)) as f64);
        let piece = |a: f64, b: f64, v: f64| v * ((mu * (t - a)).exp() - (mu * (t - b)).exp()) / mu;
        let forced = if t <= 0.3 { piece(0.0, t, 1.0) } else { piece(0.0, 0.3, 1.0) + piece(0.3, t, -0.5) };
        (mu * t).exp() * x0.coeffs()[k] + forced
    };
    let worst = tr
        .times
        .iter()
        .zip(&tr.states)
        .flat_map(|(t, x)| (0..n).map(move |k| (x.coeffs()[k] - exact(k, *t)).abs()))
        .fold(0.0, f64::max);

    println!("windows: {}", tr.windows.len());
    println!("final norm: {:.12}", tr.final_state().norm_x()?);
    println!("max deviation from closed form: {worst:.3e}");
    Ok(())
}
