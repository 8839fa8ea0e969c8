//! Graph polynomials over prime fields and the c₂ invariant of
//! primitive-log-divergent graphs.
//!
//! Modules, bottom up: [`graph`] (labelled multigraphs and spanning
//! forests), [`fp`] (prime fields and dense matrices), [`polys`] (Kirchhoff,
//! Dodgson and spanning forest polynomials), [`c2`] (the invariant itself),
//! [`families`] (circulants, toroidal grids, X-ladders) and [`recurrence`]
//! (transfer matrices for recursive families at p = 2).

pub mod c2;
pub mod families;
pub mod fp;
mod frontier;
pub mod graph;
pub mod polys;
pub mod recurrence;

pub use c2::{c2_assign, c2_brute, c2_formula, C2Error, C2Result, Method};
pub use fp::{FpMatrix, PrimeField};
pub use graph::{EdgeId, LabeledGraph, VertexId, VertexSubsetPartition};
