//! Fractional smoothing of the heat semigroup and a solve in `X_{1/2}` with a
//! nonlinearity that is only Lipschitz there.

use mildflow::burgers::{BurgersSystem, LocalTerm};
use mildflow::{solve_analytic, DiagonalSemigroup, InputSignal, SolverConfig};

fn main() -> mildflow::Result<()> {
    for alpha in [0.25, 0.5, 0.75] {
        let mut row = Vec::new();
        for n in [128, 256, 512] {
            let sg = DiagonalSemigroup::dirichlet_laplacian(n, 1.0)?;
            let kappa = sg.kappa();
            let sup = (0..=20)
                .map(|j| 2f64.powi(-j))
                .map(|t| t.powf(alpha) * sg.frac_T_norm(alpha, t).unwrap() * (-kappa * t).exp())
                .fold(0.0, f64::max);
            row.push(format!("N={n}: {sup:.5}"));
        }
        println!("alpha={alpha}  {}", row.join("  "));
    }

    let b = BurgersSystem::new(32, LocalTerm::Cubic { a: -1.0 })?;
    let sys = b.evolution_system();
    let x0 = b.sine_mode(1, 0.5).add(&b.sine_mode(4, 0.1))?;
    let ud = InputSignal::zero(33, 1.0)?;
    let tr = solve_analytic(&sys, &x0, &ud, 1.0, &SolverConfig::default())?;
    let last = tr.norms_alpha.as_ref().unwrap().last().unwrap();
    println!("X_1/2 norm: {:.5} -> {:.5}  ({} windows)", sys.working_norm(&x0)?, last, tr.windows.len());
    Ok(())
}
