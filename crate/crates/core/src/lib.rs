//! Geometric embeddings of bounded-degree trees into arbitrary finite-dimensional
//! normed spaces.
//!
//! A map `zeta: V -> X` is a *geometric embedding* of a graph `G = (V, E)` into a
//! normed space `X` when `||zeta(u) - zeta(v)||_X <= 1` holds exactly for the pairs
//! `{u, v}` that are edges. This crate provides:
//!
//! - [`normspace`]: normed spaces in isotropic position (`l_p`, symmetric polytopes,
//!   ellipsoids) with exact unit-ball samplers and a John-type basis;
//! - [`tree`]: tree generators and LCA-backed distance/path queries;
//! - [`embedder`]: the randomized embedding built from per-edge ball vectors and a
//!   Gaussian regularizer, with targeted edge resampling;
//! - [`verifier`]: the embedding predicate, short-sum event enumeration, distortion
//!   profiling, and the volumetric lower-bound certificate;
//! - [`lll`]: the path-dependency graph, weight schedule, local-lemma condition
//!   checker, and the constructive resampling loop;
//! - [`experiments`]: Monte Carlo validators and the parameter sweep harness.
//!
//! The `geomtree` binary exposes all of it as subcommands (`gen-tree`, `embed`,
//! `verify`, `check`, `sweep`).

pub mod embedder;
pub mod experiments;
pub mod lll;
pub mod normspace;
pub mod rng;
pub mod tree;
pub mod verifier;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("randomized check failed: {0}")]
    CheckFailed(String),
    #[error("invalid vertex id {0}")]
    InvalidVertex(usize),
    #[error("unknown edge with child vertex {0}")]
    UnknownEdge(usize),
    #[error("infeasible construction: {0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
