//! Exact integer minimization of quasiconvex polynomials in fixed dimension.
//!
//! The feasibility test rounds the (open) feasible region with a shallow-cut
//! ellipsoid method, then either finds a lattice point near the center or
//! branches on the hyperplanes of a flat lattice direction. Minimization
//! searches on the objective value. All arithmetic is exact.

pub mod brute;
pub mod error;
pub mod exactnum;
pub mod format;
pub mod generate;
pub mod hull;
pub mod lattice;
pub mod lenstra;
pub mod oracle;
pub mod rounding;
pub mod solver;
pub mod sparsepoly;

pub use error::{Error, Result};
pub use exactnum::{QMatrix, QVector, Rational};
pub use lenstra::{integer_feasible, Feasibility, LenstraConfig, Stats};
pub use oracle::{separate, OracleConfig, Program, SeparationAnswer};
pub use rounding::{Ellipsoid, TestPointKind};
pub use solver::{derive_epsilon, minimize, normalize, Bound, Mode, ProblemSpec, Relation, SolveResult, SolverOptions, Status};
pub use sparsepoly::{SparsePoly, TransformStack};
