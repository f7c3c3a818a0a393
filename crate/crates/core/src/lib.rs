//! Blind deconvolution of sparse graph signals that stays robust to errors in
//! the graph eigenbasis.
//!
//! The crate covers the whole pipeline: graph and filter synthesis, the convex
//! single-basis estimator ([`bdog`]), the alternating estimator that also
//! denoises the eigenbasis on the orthogonal group ([`rbdogs`]), closed-form
//! recovery and stability bounds ([`bounds`]), and a seeded experiment harness
//! ([`experiments`]). Figures of merit live in [`metrics`]; CSV, SVG and
//! manifest output in [`io`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdog;
pub mod bounds;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod filters;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod perturbation;
pub mod rbdogs;
pub mod rng;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
