//! Construction and spectral analysis of two families of Ramanujan graphs —
//! supersingular isogeny graphs over F_{p^2} and LPS Cayley graphs on
//! PSL_2(F_p) — together with a toy SIDH key exchange and the reduction of
//! shared-key recovery to path-finding in the isogeny graph.
//!
//! Everything is sized for desk-scale parameters (p < 2^31). The crate is
//! `no_std` (alloc required); IO, file formats and the CLI live in the
//! companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ec;
pub mod ff;
pub mod graph;
pub mod isogeny;
pub mod lps;
pub mod pizer;
pub(crate) mod poly2;
pub mod sidh;
pub mod ssig;

use core::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the arguments was violated.
    Parameter(&'static str),
    /// An internal invariant failed; indicates a bug rather than bad input.
    Internal(&'static str),
    /// The requested computation is outside the supported range.
    Unsupported(&'static str),
    /// The instance is too large for the requested algorithm.
    TooLarge(&'static str),
    /// Iterative eigenvalue estimation did not converge; carries the last
    /// iterate and its residual.
    NoConvergence { estimate: f64, residual: f64 },
    /// The point is not in the span of the given basis.
    NotInSpan,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(msg) => write!(f, "parameter error: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::TooLarge(msg) => write!(f, "instance too large: {msg}"),
            Error::NoConvergence { estimate, residual } => {
                write!(
                    f,
                    "no convergence: estimate {estimate}, residual {residual}"
                )
            }
            Error::NotInSpan => write!(f, "point is not in the span of the basis"),
        }
    }
}

impl core::error::Error for Error {}

/// Splitmix64 step, used wherever a reproducible pseudo-random sequence is
/// needed (power-iteration start vectors, randomized tests).
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
