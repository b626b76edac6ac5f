//! Discrete fractional calculus on the uniform grid `t_n = n tau`: kernel
//! sequences, Caputo backward differences, discrete `(alpha, beta)`-resolvent
//! families of finite-dimensional generators, and the Caputo difference
//! initial value problem they solve.

pub mod calculus;
pub mod cli;
pub mod error;
pub mod io;
pub mod kernels;
pub mod operator;
mod precise;
pub mod resolvent;
pub mod solver;

pub use calculus::VecSeq;
pub use error::{Error, Result};
pub use kernels::{kernel_seq, KernelSeq};
pub use operator::{LinOp, OperatorDescriptor, ResolventHandle};
pub use resolvent::{coeff_table, family_explicit, family_recursive, family_series, CoeffTable, ResolventFamily};
pub use solver::{solve_direct, solve_vop, FdeProblem, FdeSolution, Forcing};
