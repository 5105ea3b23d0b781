//! Bouchaud trap model on implicit regular graphs: lazy random landscapes,
//! scale sequences, exact clock-process simulation with deep-trap
//! bookkeeping, the limiting extremal process and the statistics that
//! compare the two.

// `!(x > 0.0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod extremal;
pub mod graphs;
pub mod landscape;
pub mod rng;
pub mod scales;
pub mod stats;
