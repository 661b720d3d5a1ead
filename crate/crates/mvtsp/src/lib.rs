//! Approximation algorithms for the metric many-visits path TSP.
//!
//! An instance consists of a complete graph with self-loops, metric edge
//! costs, a request `r(v) >= 1` for every city and two endpoints `s`, `t`.
//! A feasible solution is an `s`-`t`-walk visiting each city `v` exactly
//! `r(v)` times. Since requests may be astronomically large, walks are
//! represented compactly by edge multiplicities and path-cycle
//! decompositions; all arithmetic is exact (`BigInt` multiplicities,
//! `BigRational` costs).
//!
//! The crate provides:
//!
//! * [`transport::approx_25`] — a 5/2-approximation combining a single-visit
//!   path with an optimal transportation-problem solution,
//! * [`pathtsp::approx_15`] — a 3/2-approximation built on the many-visits
//!   Held-Karp relaxation, a dynamic program for a minimum-cost point that is
//!   well-behaved on all low-load `s`-`t`-cuts, a degree-bounded connected
//!   multigraph from g-polymatroid iterative rounding, and a parity matching,
//! * [`pathtsp::mvtsp_15`] — the closed-tour variant via endpoint splitting,
//! * [`oracle`] — exact reference solvers for desk-scale verification.

pub mod instance;
pub mod instgen;
pub mod lp;
pub mod matching;
pub mod oracle;
pub mod rational;
pub mod transport;

pub mod gpolymatroid;
pub mod pathtsp;

pub use instance::{CompactMultigraph, Instance, PathCycleDecomposition, TourSolution};
pub use rational::{Int, Rat};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Unreadable input: malformed JSON or number syntax.
    #[error("parse error: {0}")]
    Parse(String),
    /// Malformed input: asymmetric cost matrix, negative entries, bad indices.
    #[error("structural error: {0}")]
    Structural(String),
    /// Degree parity rules out any path-cycle decomposition.
    #[error("infeasible decomposition: vertex {vertex} has wrong degree parity")]
    ParityViolation { vertex: usize },
    /// A walk cannot be shortcut down to the requested visit counts.
    #[error("infeasible shortcut: vertex {vertex} is visited {visits} times, {required} required")]
    VisitDeficit {
        vertex: usize,
        visits: Int,
        required: Int,
    },
    /// The auxiliary trail graph is disconnected.
    #[error("disconnected traversal: no trail covers all edges")]
    Disconnected,
    /// A linear program (or the polytope it describes) is empty.
    #[error("infeasible linear program")]
    Infeasible(lp::InfeasibilityCertificate),
    /// The optimization direction is unbounded; callers violated a contract.
    #[error("unbounded linear program")]
    Unbounded,
    /// Instance exceeds a solver's configured exhaustive-search limits.
    #[error("caps exceeded: {0}")]
    CapsExceeded(String),
    /// An internal invariant failed; indicates a bug, not a bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
