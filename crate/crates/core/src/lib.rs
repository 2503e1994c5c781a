//! Determinantal hypertrees: exact construction, sampling at scale, and
//! measurement of the quantities that make them interesting.
//!
//! A `d`-dimensional hypertree on `[n]` is a complex with complete
//! `(d-1)`-skeleton, exactly `C(n-1,d)` top faces, and finite integral
//! homology `H_{d-1}`. Kalai's identity `Σ |H_{d-1}(T)|² = n^C(n-2,d)`
//! normalizes the measure that weights each hypertree by `|H_{d-1}|²`;
//! that measure is determinantal, generated by the orthogonal projection
//! onto the coboundary space of the full simplex.
//!
//! The crate provides:
//!
//! * [`simplicial`] — faces, complexes, links, weighted norms;
//! * [`f2`] — bit-packed F₂ cohomology, coset-minimal norms, and exact
//!   coboundary-expansion constants;
//! * [`snf`] / [`homology`] — integer Smith normal form, homology orders,
//!   exhaustive hypertree enumeration with exact measure weights;
//! * [`detproc`] — generic finite determinantal processes: validation,
//!   exact subset probabilities, sampling, count laws;
//! * [`kernels`] — the concrete hypertree kernels, their incidence
//!   factorization, and fast samplers;
//! * [`lab`] — seed-reproducible statistical verification experiments;
//! * a `hypertree` CLI binary wrapping all of the above.

pub mod combinatorics;
pub mod config;
pub mod detproc;
pub mod error;
pub mod f2;
pub mod homology;
pub mod kernels;
pub mod lab;
pub mod rng;
pub mod simplicial;
pub mod snf;
pub mod stats;

pub use config::Caps;
pub use error::{Error, Result};
pub use simplicial::{Cochain, Complex, Face};
