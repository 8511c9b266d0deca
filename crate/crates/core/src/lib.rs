//! Complementarity partitions for multifold linear conic problems.
//!
//! A problem `min c·x` subject to `A^j x - b^j ∈ K_j` over a product of
//! orthants, Lorentz cones and PSD cones has two index partitions of its
//! blocks: the four-set partition `(B, N, R, T)` built from strict
//! interiority and relative-interior normal-cone complementarity, and the
//! six-set partition `(B, N, B', N', O, C)` built from the blocks whose
//! dual or slack vanishes on every solution. This crate computes both,
//! checks the relations between them, characterizes them dually for
//! polyhedral feasibility problems, and tracks how they change under
//! linear lifts such as the SOCP to SDP arrow embedding.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod cones;
pub mod examples;
pub mod generate;
pub mod homogeneous;
pub mod lifting;
pub mod model;
pub mod partition;
pub mod rational;
pub mod solver;

pub use cones::{ConeKind, ConeSpec, Membership, MembershipClass};
pub use model::{ConicProblem, PrimalDualPair, ResidualReport};
pub use partition::{classify, FourPartition, PartitionReport, SixPartition};
pub use solver::{solve, SolveOptions, SolveResult, SolveStatus};
