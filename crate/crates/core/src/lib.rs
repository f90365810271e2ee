//! Exact-arithmetic engine for properads.
//!
//! The crate computes connected composition products of S-bimodules, free
//! properads as decorated-graph bases, quadratic presentations and their
//! Koszul duals (both the kernel route and the presentation route through
//! R-perp), bar / cobar / Koszul chain complexes with exact rational
//! homology, and the Poincaré-series functional equations. Everything is
//! over Q; there is no floating point anywhere.

pub mod barkoszul;
pub mod freeprop;
pub mod graphcore;
pub mod presets;
pub mod quadratic;
pub mod ratlin;
pub mod sbimod;
pub mod spaces;
pub mod series;
pub mod symgroup;

pub use ratlin::Q;
