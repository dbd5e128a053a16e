//! Heat equation with Dirichlet boundary control: the translated input
//! operator and three agreeing representations of the solution.

use mildflow::bcs::{representation_crosscheck, BoundaryControlSystem};
use mildflow::{Nonlinearity, PolynomialInput, SolverConfig};

fn main() -> mildflow::Result<()> {
    let n = 128;
    let bcs = BoundaryControlSystem::dirichlet_heat(n, 0.2)?;
    let b = bcs.make_input_operator()?;
    println!("first input coefficients: {:?}", &b.column(0)[..4]);

    let u = PolynomialInput::scalar(&[1.0, 1.0, 0.0, -1.0 / 6.0], 1.0)?;
    let x0 = bcs.lift(&[1.0]);
    for (name, f) in [("f = 0", Nonlinearity::zero(n)), ("f = 0.1 arctan", Nonlinearity::arctan(n, 0.1))] {
        let rep = representation_crosscheck(&bcs, f, &x0, &u, 1.0, &SolverConfig::default(), 1e-6)?;
        println!("{name}: max pairwise difference {:.3e} over {} times", rep.max_difference, rep.times.len());
    }
    Ok(())
}
