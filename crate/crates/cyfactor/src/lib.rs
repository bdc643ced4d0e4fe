//! Conjectural Euler factors of one-parameter Calabi-Yau-type differential
//! operators, computed with the deformation method and a p-adically truncated
//! period recurrence.
//!
//! The pipeline, per prime p:
//! 1. run the truncated recurrence for the holomorphic and companion period
//!    series to degree M = ceil(C*p) + nadd at working accuracy p^A,
//! 2. assemble the log-free period matrix E, invert W = E^T sigma E to low
//!    order, and form U = E(phi^p)^{-1} U_p(0) E(phi) mod p^B,
//! 3. check that the entries of U terminate as polynomials of degree <= ceil(C*p),
//! 4. evaluate U at every Teichmueller point of F_p^* and read off the Euler
//!    factor coefficients with Newton's identities, completing the degree-b
//!    polynomial through the functional equation.

pub mod analytics;
pub mod bench;
pub mod error;
pub mod evaluate;
pub mod frobenius;
pub mod io;
pub mod operator;
pub mod oracle;
pub mod padic;
pub mod pipeline;
pub mod recurrence;
pub mod series;

pub use error::Error;
