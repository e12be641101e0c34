//! Search, sieving and certification of genus-two curves over the rationals
//! whose jacobians are attached to weight-2 newforms with quadratic
//! coefficient field.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: exact quadratic-field arithmetic, truncated q-series, polynomials.
//! * [`characters`]: Dirichlet characters with values in a quadratic field.
//! * [`newform`]: Hecke expansion, the rational basis `(h1, h2)` and bound checks.
//! * [`curvefit`]: the functions `x, y` on the modular curve, the fitted
//!   polynomial, residuals and the certification criterion.
//! * [`hyperelliptic`]: point counts, Frobenius polynomials, Clebsch invariants,
//!   involutions and isomorphisms of genus-two curves.
//! * [`collector`]: the bounded search over newform coefficient data.
//! * [`pipeline`]: sieves, level search and newform matching.
//! * [`ingest`]: bundled tables, record formats and coefficient sources.

pub mod arith;
pub mod characters;
pub mod collector;
pub mod curvefit;
mod error;
pub mod hyperelliptic;
pub mod ingest;
pub mod newform;
pub mod pipeline;

pub use error::{Error, Result};
