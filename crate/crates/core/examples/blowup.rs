//! Finite escape of `ẋ = x²`: the solver brackets the escape time `1/x₀`.

use mildflow::{solve, DiagonalSemigroup, EvolutionSystem, InputOperator, InputSignal, Nonlinearity, SolverConfig, SpectralState, TrajectoryStatus};

fn main() -> mildflow::Result<()> {
    let sg = DiagonalSemigroup::new(vec![0.0], 1.0)?;
    let sys = EvolutionSystem::new(sg, InputOperator::zero(1, 1), Nonlinearity::scalar_square(1))?;
    let u = InputSignal::zero(1, 3.0)?;

    for x0 in [0.5, 1.0, 2.0] {
        for threshold in [1e4, 1e6] {
            let cfg = SolverConfig { blowup_threshold: threshold, ..Default::default() };
            let tr = solve(&sys, &SpectralState::new(vec![x0])?, &u, 3.0, &cfg)?;
            match tr.status {
                TrajectoryStatus::Blowup { t_m, bracket } => {
                    println!("x0={x0} threshold={threshold:e}: t_m={t_m:.6} bracket={bracket:?} (exact {})", 1.0 / x0)
                }
                other => println!("x0={x0}: {other:?}"),
            }
        }
    }
    Ok(())
}
