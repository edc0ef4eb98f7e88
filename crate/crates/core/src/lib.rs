//! Security-constrained unit commitment toolkit.
//!
//! An instance ([`instance::UcInstance`]) is compiled into a compact MILP
//! ([`compiler::CompactModel`]) and solved by branch-and-bound
//! ([`mip::solve_mip`]) over an in-tree bounded revised simplex
//! ([`lp::solve_lp`]). [`formats`] handles MPS and solution documents and
//! [`benchmark`] runs repeated timed solves and compares environments.

pub mod benchmark;
pub mod compiler;
pub mod formats;
pub mod instance;
pub mod lp;
pub mod mip;
pub mod sparse;
pub mod synth;

pub use compiler::{compile, model_stats, CompactModel, ModelStats};
pub use instance::{parse_instance, serialize_instance, validate_instance, UcInstance};
pub use lp::{solve_lp, solve_lp_fixed, LpProblem, LpSolution, LpStatus};
pub use mip::{solve_mip, MipResult, MipStatus, SolverOptions};
pub use synth::synth_instance;
