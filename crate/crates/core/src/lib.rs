//! Integer-valued polynomials on compact subsets of `Z_p` and of `Ẑ = ∏ Z_p`.
//!
//! The crate computes p-orderings and their valuation sequences, regular
//! bases of `Int_Q(E, Ẑ)`, characteristic ideals, adelic orderings,
//! Mahler-type expansions of locally constant functions, and rational
//! polynomials that approximate given functions at several primes at once.
//! All arithmetic is exact; p-adic quantities carry explicit precision.

pub mod adelic;
pub mod approx;
pub mod error;
pub mod globalbasis;
mod json;
pub mod mahler;
pub mod padic;
pub mod poly;
pub mod pordering;
pub mod rat;
pub mod sets;

pub use error::{Error, Result};
pub use padic::{embed, PAdicInt, PAdicNumber};
pub use poly::RatPoly;
pub use rat::{Rat, Valuation};
pub use sets::{AdelicSet, Ball, CompactSet, DefaultFamily};
