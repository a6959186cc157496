//! Digraph algorithms around bounded circumference.
//!
//! The crate has three layers:
//!
//! * [`digraph`] — a directed multigraph with stable arc identities,
//!   strongly connected components, reachability and the structural
//!   transformations (line digraph, bidirection, pendant terminals) the
//!   rest of the crate is built on.
//! * [`cycles`], [`decomposition`], [`game`] — bounded-circumference
//!   computation, the DAG-decomposition data model with its validator,
//!   and the cops-and-robber pursuit engine that turns a bounded
//!   circumference promise into a width-bounded DAG-decomposition.
//! * [`linkage`] — vertex- and arc-disjoint path solvers: the pebble
//!   algorithm for acyclic digraphs, the circumference-2 reductions that
//!   feed it, and the hitting-set pipeline for digraphs that are
//!   circumference-2 once a small vertex set is removed.
//!
//! Everything is deterministic: iteration orders are fixed by ascending
//! identifiers, so repeated runs over the same input produce identical
//! artifacts byte for byte. With the default `parallel` feature the
//! heavy kernels fan out through rayon; disabling the feature selects
//! the sequential fallbacks without changing any result.

pub mod cycles;
pub mod decomposition;
pub mod digraph;
pub mod game;
pub mod linkage;
mod par;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Self-loops are rejected at construction: every cycle here has at
    /// least two vertices, and a loop would corrupt circumference
    /// bookkeeping downstream.
    #[error("self-loop on vertex {0} is not supported")]
    SelfLoop(usize),
    /// An arc endpoint or lookup referenced a vertex that is not present.
    #[error("vertex {0} is not present in the digraph")]
    MissingVertex(usize),
    /// An arc id that is not present (never existed or was deleted).
    #[error("arc {0} is not present in the digraph")]
    MissingArc(usize),
    /// Malformed input text.
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A caller-facing precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An operation that requires a strongly connected input got one that
    /// is not strong.
    #[error("digraph is not strongly connected")]
    NotStrong,
    /// A cycle longer than the promised circumference bound turned up.
    #[error("circumference promise broken: found a cycle longer than {bound}")]
    CircumferenceExceeded { bound: usize },
    /// An enumeration or search exhausted its explicit budget.
    #[error("budget exhausted: {0}")]
    Budget(String),
    /// Internal consistency tripwire; reaching this is a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),
    /// A game replay was handed a move or position that does not fit the
    /// current state.
    #[error("simulation fault: {0}")]
    SimulationFault(String),
}

pub type Result<T> = std::result::Result<T, Error>;
