//! blap: a spectral workbench for Laplacians on symmetric bilinear forms
//! over discretized compact Riemannian manifolds.
//!
//! The crate builds a small catalog of manifolds (flat tori, round 2- and
//! 3-spheres) with analytic frames and curvature, assembles the Bourguignon
//! and Lichnerowicz Laplacians with exact discrete adjoints, solves their
//! eigenproblems on full, trace, traceless and transverse-traceless
//! subspaces, and checks the computed spectra against closed-form references
//! and curvature lower bounds.
//!
//! Start with the runnable examples (`cargo run --example ...`); the `blap`
//! binary exposes the same flows behind a config file.

pub mod error;
pub mod fields;
pub mod manifold;
pub mod operators;
pub mod oracles;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
