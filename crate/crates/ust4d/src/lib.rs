//! Simulation and exact-analytics toolkit for uniform spanning trees (UST)
//! and loop-erased random walks (LERW) on hypercubic lattices.
//!
//! The crate is organised around a handful of subsystems:
//!
//! * [`lattice`] — `Z^d` geometry, simple random walks, Green's function
//!   estimation;
//! * [`paths`] — loop erasure with full index bookkeeping, cut times, and
//!   certified LERW prefixes;
//! * [`wilson`] — UST samplers (finite multigraphs, wired boxes, the
//!   0-wired variant) plus an exact spanning-tree enumeration oracle;
//! * [`tree`] — exact analytics on sampled trees: intrinsic balls, pasts,
//!   meeting points, effective resistance, geodesic counts, weighted
//!   metrics;
//! * [`capacity`] — discrete capacity via independent estimators, the
//!   greedy covering construction, and path-goodness classifiers;
//! * [`typical_time`] — escape probabilities and rejection-sampled
//!   conditional walk durations;
//! * [`walk_stats`] — random walk on a sampled tree and ensemble
//!   estimators for displacement, range, return probability, exit times;
//! * [`experiments`] — config-driven sweeps, exponent fitting, and the
//!   exact-oracle batteries.
//!
//! Exact kernels (resistance recursion, harmonic solves, weighted
//! distances) are generic over [`scalar::Scalar`] so they run in `f64` for
//! production and in exact rational arithmetic inside tests. Everything
//! Monte Carlo is pinned to [`Real`].

pub mod capacity;
pub mod error;
pub mod estimates;
mod hashing;
pub mod experiments;
pub mod io;
pub mod lattice;
pub mod paths;
pub mod scalar;
pub mod tree;
pub mod typical_time;
pub mod walk_stats;
pub mod wilson;

/// Scalar type used by all Monte Carlo estimators and fitted statistics.
pub type Real = f64;

pub use error::{Error, Result};
pub use estimates::{CapacityEstimate, EstimateMethod};
pub use lattice::{LatticePoint, LatticeBox, RngSeed};
pub use paths::{LoopErasureRecord, Path};
pub use wilson::{FiniteGraph, SpanningTree};
