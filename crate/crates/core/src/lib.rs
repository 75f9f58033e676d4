//! Exact computation toolkit for binomial exponential sums over prime fields.
//!
//! The crate evaluates the sums `S_{k,n}(a,b) = sum_x e_p(a x^k + b x^n)`,
//! counts solutions of the associated diagonal systems, factors the bivariate
//! families `F_n` and `F_{k,n}` over `F_p`, and checks every explicit bound
//! against the exact values.

pub mod bifactor;
pub mod bipoly;
pub mod bounds;
pub mod expsum;
pub mod modarith;
pub mod solcount;
pub mod upoly;

pub use modarith::{ExponentPair, PrimeContext, Residue};

use thiserror::Error;

/// Largest supported modulus. Sweeps target much smaller primes; this cap
/// keeps all intermediate counts inside u64/u128 arithmetic.
pub const MAX_PRIME: u64 = 1 << 20;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("{what} = {value} outside supported range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: u64,
        lo: u64,
        hi: u64,
    },
    #[error("family F_{{k,n}} is identically zero for k = n = {0}")]
    DegenerateFamily(u64),
    #[error("exact identity violated: {0}")]
    IdentityViolation(String),
    #[error("missing exact input: {0}")]
    MissingInput(&'static str),
    #[error("no applicable (p,k,n) instance for bound {0}")]
    NoApplicableInstance(&'static str),
    #[error("moment sum {0} is not within tolerance of an integer multiple of p^2")]
    MomentNotInteger(f64),
    #[error("no usable specialization point found (tried shears and swaps)")]
    UnluckySpecialization,
}

pub type Result<T> = std::result::Result<T, Error>;
