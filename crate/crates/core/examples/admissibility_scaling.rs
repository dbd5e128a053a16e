//! How fast `h_t → 0` for the Dirichlet boundary input of the heat equation,
//! compared with the smoothing-class upper bound.

use mildflow::admissibility::{class_ladder, estimate_scaling, upper_bound_h};
use mildflow::burgers::{BurgersSystem, LocalTerm};
use mildflow::InputNorm;

fn main() -> mildflow::Result<()> {
    let b = BurgersSystem::new(1024, LocalTerm::Zero)?;
    let sg = b.semigroup();
    let op = b.boundary_operator();

    let grid: Vec<f64> = (-14..=-2).map(|k| 2f64.powi(k)).collect();
    let est = estimate_scaling(&sg, &op, &grid, InputNorm::LInf);
    println!("{:>12} {:>12} {:>12}", "t", "h lower", "upper");
    for (i, t) in est.t_grid.iter().enumerate() {
        println!("{t:>12.3e} {:>12.4e} {:>12.4e}", est.raw_lower[i], upper_bound_h(&sg, &op, 0.0, *t)?);
    }
    println!("fitted exponent: {:.3}", est.fitted_exponent);
    for alpha in [0.2, 0.24, 0.26, 0.3] {
        println!("alpha={alpha}: {:?}", class_ladder(&sg, &op, alpha)?.0);
    }
    Ok(())
}
