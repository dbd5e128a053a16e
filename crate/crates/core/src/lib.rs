//! Mild solutions of semilinear evolution equations
//! `ẋ = Ax + B₂ f(x, u) + B u` in spectral coordinates.

pub mod admissibility;
pub mod bcs;
pub mod burgers;
pub mod cli;
pub mod error;
pub mod flow_props;
pub mod input;
pub mod nonlinearity;
pub mod numerics;
pub mod semigroup;
pub mod solver;
pub mod state;

pub use admissibility::{InputNorm, InputOperator, OperatorClass};
pub use error::{Error, Result};
pub use input::{Forcing, InputSignal, PolynomialInput};
pub use nonlinearity::{KinfFunction, Nonlinearity};
pub use semigroup::{DenseGenerator, DiagonalSemigroup, Generator};
pub use state::SpectralState;
pub use solver::{solve, solve_analytic, EvolutionSystem, SolveMode, SolverConfig, Trajectory, TrajectoryStatus};
