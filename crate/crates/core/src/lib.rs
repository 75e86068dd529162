//! Constrained constructive optimization (CCO) of synthetic vascular trees.
//!
//! A tree is grown inside a [`PerfusionDomain`] one terminal at a time: each
//! new terminal is connected to the nearby segment whose optimal bifurcation
//! gives the smallest total vessel volume, subject to staying inside the
//! domain and clear of the existing vessels. Radii follow Poiseuille flow and
//! Murray's law exactly.
//!
//! ```no_run
//! use cco_core::{grow, CcoParams, PerfusionDomain, Point};
//!
//! let domain = PerfusionDomain::disk(Point::new2(0.0, 0.0), 1.0).unwrap();
//! let params = CcoParams { k_term: 100, seed: 42, ..CcoParams::default() };
//! let tree = grow(&params, &domain, None).unwrap();
//! assert!(tree.validate(&domain).unwrap().passes());
//! ```

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod growth;
pub mod io;
pub mod kamiya;
pub mod tree;

pub use domain::{DomainKind, PerfusionDomain, VoxelMask};
pub use error::{CcoError, Result, TreeFileFault};
pub use geometry::{Point, SegmentGeometry};
pub use growth::{grow, grow_with, CandidateEvaluation, EvaluationRecord, GrowOptions, Infeasibility, SpatialIndex};
pub use kamiya::{
    brute_force_bifurcation, local_cost, optimal_bifurcation, solve_radii, BifurcationSolution,
    LocalBifurcationProblem, LocalRadii, SolverSettings,
};
pub use tree::{CcoParams, SegmentId, SegmentRecord, TreeReport, VesselTree};
