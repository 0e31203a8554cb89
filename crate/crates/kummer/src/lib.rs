//! Arithmetic of 2-torsion Brauer classes on split Kummer surfaces.
//!
//! The surfaces treated here are double covers
//!
//! ```text
//! z^2 = x(x-a)(x-b) * u(u-a')(u-b')
//! ```
//!
//! i.e. singular models of `Kum(E x E')` for two elliptic curves with
//! rational 2-torsion.  The crate provides
//!
//! * exact square-class and Hilbert-symbol arithmetic over `Q`, `Q_p`
//!   and `R` ([`localfields`]),
//! * the 4x4 square-class matrix whose `F_2`-kernel enumerates the
//!   2-torsion transcendental Brauer classes, together with normal-form
//!   transformations ([`surface`]),
//! * elliptic-curve utilities: bad primes, point counts, j-invariants
//!   and isogeny heuristics ([`ellcurve`]),
//! * local evaluation of Brauer classes and the box-subdivision
//!   algorithm computing the induced colouring of `S(Q_p)`
//!   ([`evaluation`]),
//! * a memory-friendly rational point search on products of two binary
//!   quartics, with hash-join and multiplicative paging
//!   ([`pointsearch`]),
//! * survey drivers enumerating all surfaces with small coefficients
//!   that carry a 2-torsion class ([`survey`]).
//!
//! A narrative introduction with worked examples lives in the `book/`
//! directory (mdbook).
//!
//! # Quick example
//!
//! The surface with coefficients `(1, 25, -25, -36)` carries a
//! transcendental Brauer class and fails weak approximation at 5:
//!
//! ```
//! use kummer::localfields::Field;
//! use kummer::surface::{KummerSurface, kernel};
//! use kummer::evaluation::{constancy, Constancy};
//!
//! let s = KummerSurface::new(1, 25, -25, -36).unwrap();
//! let ker = kernel(&s, Field::Rational);
//! assert_eq!(ker.nonzero_vectors(), vec![0b0001]); // e1
//!
//! let alpha = s.brauer_class(0b0001).unwrap();
//! assert_eq!(constancy(&s, &alpha, 5).unwrap(), Constancy::NonConstant);
//! assert_eq!(constancy(&s, &alpha, 3).unwrap(), Constancy::ConstantZero);
//! ```

pub mod ellcurve;
pub mod evaluation;
pub mod localfields;
pub mod pointsearch;
pub mod surface;
pub mod survey;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("{0} is not an odd prime")]
    NotOddPrime(i64),
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("p = {p} divides {n}; unit argument required")]
    NotAUnit { p: i64, n: i64 },
    #[error("degenerate surface: {0}")]
    DegenerateSurface(String),
    #[error("kernel vector must be nonzero")]
    ZeroVector,
    #[error("vector {0:#06b} is not in the kernel over the requested field")]
    NotInKernel(u8),
    #[error("no kernel vector of the requested type exists")]
    NoKernelVector,
    #[error("evaluation undefined: {0}")]
    BadPoint(String),
    #[error("colouring at p = {p} exceeded the level cap {cap}; the class is not locally constant-decidable")]
    LevelCapExceeded { p: i64, cap: u32 },
    #[error("prime bound {0} too small (need >= 100)")]
    PrimeBoundTooSmall(i64),
    #[error("table length {requested} exceeds the memory budget {budget}")]
    TableBudget { requested: u64, budget: u64 },
    #[error("trivial point: a linear factor vanishes")]
    TrivialPoint,
    #[error("lambda has odd valuation at p = {0}; point outside the colouring")]
    OddValuation(i64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
