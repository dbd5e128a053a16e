//! Flow-map properties of a heat equation with an arctan reaction term.

use mildflow::flow_props::{
    check_axioms, check_brs, check_cep, check_continuous_dependence, check_deviation_sampled, perturbation_pairs,
    PropsOptions,
};
use mildflow::{DiagonalSemigroup, EvolutionSystem, InputOperator, Nonlinearity};

fn main() -> mildflow::Result<()> {
    let n = 16;
    let sg = DiagonalSemigroup::dirichlet_laplacian(n, 1.0)?;
    let sys = EvolutionSystem::new(sg, InputOperator::identity(n), Nonlinearity::arctan(n, 2.0))?;
    let opts = PropsOptions { seed: 42, samples: 8, ..Default::default() };

    let mut reports = check_axioms(&sys, &opts)?;
    reports.push(check_deviation_sampled(&sys, &opts, 8)?);
    reports.push(check_continuous_dependence(&sys, &perturbation_pairs(&sys, &opts, 8, 0.05), 1.0, &opts)?);
    reports.push(check_cep(&sys, &[0.5, 1.0], &[0.5, 1.0], &opts)?);
    reports.push(check_brs(&sys, 3.0, 5.0, &opts)?);
    for r in &reports {
        println!("{}", r.summary_line());
    }
    println!("cep table: {}", reports[6].detail["table"]);
    Ok(())
}
