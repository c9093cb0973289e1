//! Exact integral cohomology of Bott manifolds.
//!
//! A Bott tower is an iterated CP^1-bundle; its top space is encoded by a
//! strictly upper-triangular integer matrix [`BottMatrix`]. This crate
//! computes in the cohomology ring H*(B_n) with exact integer arithmetic and
//! builds on that to provide:
//!
//! - [`ring`]: normal-form arithmetic over the square-free monomial basis;
//! - [`invariants`]: square-vanishing elements, Q-triviality,
//!   well-orderedness, and a serializable isomorphism fingerprint;
//! - [`moves`]: diffeomorphism-producing rewrites (stage swaps and bundle
//!   changes), each shipping a verified induced ring isomorphism, plus
//!   well-ordering normalization and bounded move closures;
//! - [`iso`]: verification, search, and stage-4 case classification of
//!   graded ring isomorphisms;
//! - [`census`]: enumeration of all towers within entry bounds and a
//!   certificate-carrying classification report.
//!
//! Every capability has a runnable demo under `examples/`; the `bott`
//! binary exposes the same operations for batch use.

pub mod census;
pub mod cli;
pub mod error;
pub mod invariants;
pub mod iso;
pub mod jsonio;
pub mod matrix;
pub mod moves;
pub mod ring;
pub mod smith;

pub use error::{Error, Result};
pub use matrix::BottMatrix;
pub use ring::{DegreeTwoClass, Monomial, Ring, RingElement};
