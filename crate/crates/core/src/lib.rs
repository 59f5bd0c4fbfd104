//! Discrete kinematics of anelastic bodies.
//!
//! A body is an oriented simplicial mesh with one reference chart. A configuration is a
//! discrete vector-bundle morphism: a placement of the vertices together with a
//! piecewise-constant field of linear maps acting on reference vectors. Two configurations
//! are compatible when one is the push-forward of the other by a displacement of space;
//! the per-cell invariant `(T base)^-1 * field` labels the compatibility class and doubles
//! as the plastic factor of the multiplicative decomposition `field = F_e * F_p`.
//!
//! The crate also carries the finite-set version of the same constructions (point
//! configurations, their groupoid of displacements and the induced body points) and a
//! small laboratory of synthetic defect data: Volterra edge dislocations, Burgers
//! circuits and cut-and-project quasicrystals.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod configuration;
pub mod decomposition;
pub mod equivalence;
pub mod geometry;
pub mod groupoid;
pub mod io;
pub mod lattice;

pub use configuration::{Configuration, GradientVerdict, HolonomyReport, StandaloneField, DEFAULT_TOLERANCE};
pub use decomposition::{DecompositionResult, Embodiment, TangentRule, ViewIFactors};
pub use geometry::{AffineMap, LinearMap, SimplicialBody, SpaceDiffeo, Vector};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell {cell} is degenerate (|det| = {det:e})")]
    DegenerateCell { cell: usize, det: f64 },

    #[error("cell {cell} violates orientation (det = {det:e})")]
    OrientationViolation { cell: usize, det: f64 },

    #[error("cell {cell}: tangent map is ill-conditioned (cond = {cond:e})")]
    IllConditioned { cell: usize, cond: f64 },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("body is not connected through interior facets")]
    DisconnectedBody,

    #[error("configurations live on different bodies")]
    BodyMismatch,

    #[error("invalid diffeomorphism: {0}")]
    InvalidDiffeo(String),

    #[error("dislocation core lies on a facet or outside the grid")]
    CoreOnFacet,

    #[error("invalid dislocation spec: {0}")]
    InvalidDislocation(String),

    #[error("loop segment {segment} runs along a facet with an ambiguous field; perturb the loop")]
    SegmentOnFacet { segment: usize },

    #[error("loop segment {segment} leaves the body")]
    SegmentOutsideBody { segment: usize },

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("acceptance window is unbounded or malformed")]
    WindowUnbounded,

    #[error("projection frame is degenerate")]
    DegenerateFrame,

    #[error("groupoid axioms are not satisfied")]
    AxiomsNotVerified,

    #[error("morphism closure exceeded the bound of {bound}")]
    ClosureExplosion { bound: usize },

    #[error("witness {from}->{to} sends {point:?} outside the image of configuration {to}")]
    WitnessInconsistency { from: usize, to: usize, point: Vec<f64> },

    #[error("provided representative {index} is not a member of class {class}")]
    ProvidedRepresentativeNotInClass { class: usize, index: usize },

    #[error("invalid point configuration set: {0}")]
    InvalidPointSet(String),

    #[error("document error at {path}: {message}")]
    Document { path: String, message: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
