//! Order reduction and complete solution sets for constrained generalized
//! discrete-time algebraic Riccati equations
//!
//! ```text
//! X = AᵀXA − (AᵀXB + S)(R + BᵀXB)†(BᵀXA + Sᵀ) + Q,
//! ker(R + BᵀXB) ⊆ ker(AᵀXB + S),
//! ```
//!
//! with `Π = [[Q, S], [Sᵀ, R]] ⪰ 0`. [`reduction::reduce`] strips the state
//! directions along which every solution is pinned, ending in a regular DARE
//! or a Stein equation; [`reduction::solve`] solves that and maps the result
//! back as affine families of solutions.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod pencil;
pub mod popov;
pub mod reduction;
pub mod solution;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{RealMatrix, Tolerance};
pub use pencil::{build_pencil, diagnose, is_regular, Diagnosis, PencilPair};
pub use popov::{CandidateSolution, PopovTriple, Residual, XDerived};
pub use reduction::{
    lift, reduce, solve, ReductionChain, ReductionStep, Solved, StepKind, TerminalEquation,
};
pub use solution::{SolutionFamily, SolutionSet};
pub use solvers::{
    dare_fixed_point_oracle, solve_regular_dare, solve_stein, SteinEquation, SteinStatus,
};
