//! Exact computer algebra for truncated formal power series in commutative or
//! noncommutative free variables `z = (z1, ..., zn)` with a central parameter `t`,
//! over the rationals.
//!
//! The crate is organized around five layers:
//!
//! - [`series`]: the truncated series ring `Q[[t]]<<z>>` with hard bivariate
//!   truncation bounds, substitution and t-differentiation. All coefficients
//!   are exact rationals; there is no floating-point mode.
//! - [`diffop`]: derivations `[u dz]` with occurrence-replacement semantics,
//!   differential operators as composition words, the multi-replacement
//!   operator `B+`, and operator equality as equal action on the truncated
//!   monomial basis.
//! - [`autgroup`]: the group of formal automorphisms `F_t(z) = z - H_t(z)`,
//!   with composition, inversion, the derivation logarithm (D-Log) and its
//!   inverse exponential, and the graded-form subgroup test.
//! - [`nsym`]: the free algebra on the elementary family `L_m`, the five
//!   classical families solved from their defining generating-function
//!   equations, basis conversion, Hopf operations and abelianization.
//! - [`ncs`]: the five operator families attached to an automorphism, the
//!   generic five-axiom system verifier, the specialization homomorphism
//!   from `nsym` into operators, and the randomized separation search.
//!
//! The `ncsys` binary exposes the batch operations and verification suites
//! on the command line; all randomness flows from a single seed so runs are
//! byte-reproducible.
//!
//! ```
//! use ncsys::autgroup::Automorphism;
//! use ncsys::rational::q;
//! use ncsys::series::{Monomial, RingContext, SeriesVector, TruncSeries};
//!
//! // F = z - t z^2 in one commutative variable, truncated at z^9, t^8.
//! let ctx = RingContext::new(1, true, 9, 8)?;
//! let h = SeriesVector::new(vec![TruncSeries::term(&ctx, 1, Monomial::exps(&[2]), q(1))]);
//! let f = Automorphism::new(2, h)?;
//!
//! // The displacement of the inverse has Catalan coefficients.
//! let m = f.invert().h().neg();
//! assert_eq!(m[0].coeff(4, &Monomial::exps(&[5])), q(14));
//! assert!(f.compose(&f.invert())?.is_identity());
//! # Ok::<(), ncsys::Error>(())
//! ```

pub mod autgroup;
pub mod diffop;
pub mod error;
pub mod ncs;
pub mod nsym;
pub mod rational;
pub mod series;
pub mod wire;

pub use error::{Error, Result};
pub use rational::Rational;

/// Default seed for every randomized operation (CLI `--seed` default).
pub const DEFAULT_SEED: u64 = 20260809;
