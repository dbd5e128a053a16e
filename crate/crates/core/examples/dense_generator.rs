//! Non-normal finite-dimensional generator: a rotation with damping and a
//! saturating feedback, solved with the dense step kernel.

use mildflow::solver::global_bound;
use mildflow::{solve, DenseGenerator, EvolutionSystem, InputOperator, InputSignal, Nonlinearity, SolverConfig, SpectralState};

fn main() -> mildflow::Result<()> {
    let a = DenseGenerator::new(vec![vec![-0.1, 2.0], vec![-2.0, -0.1]])?;
    println!("log-norm bound lambda = {}", a.lambda());
    let sys = EvolutionSystem::new(a, InputOperator::bounded(vec![vec![0.0], vec![1.0]])?, Nonlinearity::arctan(2, -0.5))?;

    let x0 = SpectralState::new(vec![1.0, 0.0])?;
    let u = InputSignal::new(vec![0.0, 2.0, 5.0], vec![vec![1.0], vec![0.0]])?;
    let cfg = SolverConfig::default();
    let tr = solve(&sys, &x0, &u, 5.0, &cfg)?;
    println!("sup norm on [0,5]: {:.6}", tr.sup_norm_x());
    println!("a-priori bound:    {:.6}", global_bound(&sys, 1.0, 1.0, 5.0, &cfg)?);
    println!("final state: {:?}", tr.final_state().coeffs());
    Ok(())
}
