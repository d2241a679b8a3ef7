//! Barrier-synchronization processes: semantics, control graphs, exact
//! execution counting through the order polytope, and uniform sampling.

// `!(x > 0.0)` style guards are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod calculus;
pub mod polynomials;
pub mod ctlgraph;
pub mod random;
pub mod oracles;
pub mod bits;
pub mod sampler;
pub mod subclasses;
pub mod cli;
