//! Numerical estimation of holomorphically invariant metrics.
//!
//! The crate brackets the Carathéodory, Kobayashi–Royden, Kobayashi–Buseman
//! and the pseudoconvex-hull metric `K̃` on a family of model domains in
//! complex n-space. Upper bounds always come with a certified analytic-disk
//! witness; lower bounds come from holomorphic functionals or from closed-form
//! lemma constants.
//!
//! Module map:
//!
//! * [`geometry`]: complex vectors, hermitian products, boundary frames.
//! * [`domains`]: model domains, defining functions, membership.
//! * [`disks`]: polynomial analytic disks and containment certificates.
//! * [`metrics`]: closed-form oracles, Kobayashi upper bounds, Carathéodory
//!   lower bounds.
//! * [`ktilde`]: indicatrix sampling, the convex gauge and the Hartogs-figure
//!   bound for `K̃`.
//! * [`certificates`]: regime classifiers, lemma constants and growth rates.
//! * [`harness`]: boundary scans, exponent fits, chain checks, reports.

pub mod certificates;
pub mod disks;
pub mod domains;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod ktilde;
pub mod metrics;
pub mod search;
pub mod simplex;

pub use error::{Error, Result};
pub use num_complex::Complex64;
