//! Numerical toolkit for discrete nonlinear potential theory on weighted graphs.
//!
//! The crate computes p-Green functions of balls, p-capacities, the unit
//! p-current induced by a Green function together with a path decomposition of
//! it, and the volume-growth series governing nonexistence of nonnegative
//! solutions of `−Δ_p u ≥ u^σ`. Every inequality linking these objects can be
//! checked numerically on finite graphs.
//!
//! Modules, bottom-up:
//!
//! * [`graph`]: weighted graphs, generators, ball profiles, JSON files.
//! * [`operator`]: `Φ_p`, `Δ_p`, energies and supersolution defects.
//! * [`green`]: the Dirichlet problem on balls, capacities and `L_R`.
//! * [`flow`]: unit currents, path measures, the current lower bound on `L_R`.
//! * [`criterion`]: volume and cut series, dyadic comparisons, classification.
//! * [`verify`]: standalone inequality harnesses and radial supersolutions.
//! * [`report`]: the end-to-end pipeline bundle.

pub mod criterion;
pub mod error;
pub mod exec;
pub mod flow;
pub mod graph;
pub mod green;
pub mod operator;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use graph::{BallProfile, VertexId, WeightedGraph};
pub use operator::{ExponentParams, VertexFunction};
