//! Sparse symmetric storage, linear solves and symmetric eigenvalues.

pub mod eigen;
pub mod solve;
pub mod sparse;

pub use eigen::{condition_number, eigenvalues_sym, ConditionNumber, EigenMode};
pub use solve::{solve, SolveStats, SolverKind};
pub use sparse::{SparseSym, SymTriplets};
