//! Arithmetic over `F_p` and the shared gcd/orbit parameters.
//!
//! Residues are machine integers in `[0, p)`; the context carries the modulus
//! and does all reductions. Primality is certified by deterministic trial
//! division, which is exact and fast at the supported scale.

use crate::{Error, Result, MAX_PRIME};

/// A validated odd prime modulus.
///
/// Immutable after construction; every operation is pure, so a context can be
/// shared freely between threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeContext {
    p: u64,
}

/// An element of `F_p` tagged with its modulus.
///
/// Mixing residues from different contexts is a contract violation, caught by
/// `debug_assert` in the operations that combine them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Residue {
    pub value: u64,
    pub modulus: u64,
}

/// Exponent pair `(k, n)` with the derived gcd data `r = gcd(k, n)` and
/// `s = gcd(r, p-1) = gcd(k, n, p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentPair {
    pub k: u64,
    pub n: u64,
    pub r: u64,
    pub s: u64,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeContext {
    /// Build a context for an odd prime `p` with `3 <= p <= MAX_PRIME`.
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p > MAX_PRIME {
            return Err(Error::OutOfRange {
                what: "p",
                value: p,
                lo: 3,
                hi: MAX_PRIME,
            });
        }
        if !is_prime(p) {
            return Err(Error::CompositeModulus(p));
        }
        Ok(PrimeContext { p })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.p
    }

    pub fn residue(&self, x: u64) -> Residue {
        Residue {
            value: x % self.p,
            modulus: self.p,
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.p && b < self.p);
        a * b % self.p
    }

    /// `x^e mod p` by square-and-multiply, with the `0^0 = 1` convention.
    pub fn pow(&self, x: u64, e: u64) -> u64 {
        debug_assert!(x < self.p);
        let mut base = x;
        let mut e = e;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero residue via Fermat.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    /// Precomputed table `x -> x^e` for all residues `x`.
    pub fn pow_table(&self, e: u64) -> Vec<u64> {
        (0..self.p).map(|x| self.pow(x, e)).collect()
    }
}

/// `x^e mod p` on a tagged residue (same convention as [`PrimeContext::pow`]).
pub fn mod_pow(ctx: &PrimeContext, x: Residue, e: u64) -> Residue {
    debug_assert_eq!(x.modulus, ctx.p(), "mixed-modulus residue");
    ctx.residue(ctx.pow(x.value, e))
}

/// Validate `1 <= k, n < p` and derive the gcd data.
pub fn exponent_pair(ctx: &PrimeContext, k: u64, n: u64) -> Result<ExponentPair> {
    for (what, v) in [("k", k), ("n", n)] {
        if v < 1 || v >= ctx.p() {
            return Err(Error::OutOfRange {
                what,
                value: v,
                lo: 1,
                hi: ctx.p() - 1,
            });
        }
    }
    let r = gcd(k, n);
    let s = gcd(r, ctx.p() - 1);
    Ok(ExponentPair { k, n, r, s })
}

/// Divide out of `(k, n)` the largest divisor `d` of `r = gcd(k,n)` that is
/// coprime to `p-1`. The reduced pair has the same `T_{k,n}` count and
/// satisfies `gcd(r/d, p-1) = s`.
pub fn reduce_exponents(ctx: &PrimeContext, pair: &ExponentPair) -> ExponentPair {
    let pm1 = ctx.p() - 1;
    // Peel from r every prime power that shares nothing with p-1.
    let mut d = 1u64;
    let mut rest = pair.r;
    let mut q = 2u64;
    while q * q <= rest {
        if rest % q == 0 {
            let mut qpow = 1u64;
            while rest % q == 0 {
                rest /= q;
                qpow *= q;
            }
            if gcd(q, pm1) == 1 {
                d *= qpow;
            }
        }
        q += 1;
    }
    if rest > 1 && gcd(rest, pm1) == 1 {
        d *= rest;
    }
    let k = pair.k / d;
    let n = pair.n / d;
    let r = pair.r / d;
    ExponentPair {
        k,
        n,
        r,
        s: gcd(r, pm1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_accepts_primes() {
        assert_eq!(PrimeContext::new(7).unwrap().p(), 7);
        assert_eq!(PrimeContext::new(67).unwrap().p(), 67);
    }

    #[test]
    fn context_rejects_composites_and_small() {
        assert_eq!(PrimeContext::new(9).unwrap_err(), Error::CompositeModulus(9));
        assert!(matches!(
            PrimeContext::new(2).unwrap_err(),
            Error::OutOfRange { .. }
        ));
        assert!(matches!(
            PrimeContext::new(MAX_PRIME + 7).unwrap_err(),
            Error::OutOfRange { .. }
        ));
    }

    #[test]
    fn pow_basics() {
        let c5 = PrimeContext::new(5).unwrap();
        assert_eq!(c5.pow(2, 3), 3);
        let c7 = PrimeContext::new(7).unwrap();
        assert_eq!(c7.pow(0, 5), 0);
        assert_eq!(c7.pow(3, 0), 1);
        assert_eq!(c7.pow(0, 0), 1);
    }

    #[test]
    fn exponent_pair_gcds() {
        let c13 = PrimeContext::new(13).unwrap();
        let pr = exponent_pair(&c13, 4, 6).unwrap();
        assert_eq!((pr.r, pr.s), (2, 2));
        let c7 = PrimeContext::new(7).unwrap();
        let pr = exponent_pair(&c7, 1, 3).unwrap();
        assert_eq!((pr.r, pr.s), (1, 1));
        let c11 = PrimeContext::new(11).unwrap();
        let pr = exponent_pair(&c11, 5, 10).unwrap();
        assert_eq!((pr.r, pr.s), (5, 5));
        assert!(exponent_pair(&c11, 0, 3).is_err());
        assert!(exponent_pair(&c11, 3, 11).is_err());
    }

    #[test]
    fn reduce_exponents_examples() {
        let c13 = PrimeContext::new(13).unwrap();
        let pr = exponent_pair(&c13, 4, 6).unwrap();
        let red = reduce_exponents(&c13, &pr);
        assert_eq!((red.k, red.n), (4, 6));

        let c7 = PrimeContext::new(7).unwrap();
        let pr = ExponentPair {
            k: 5,
            n: 10,
            r: 5,
            s: gcd(5, 6),
        };
        let red = reduce_exponents(&c7, &pr);
        assert_eq!((red.k, red.n), (1, 2));

        let c11 = PrimeContext::new(11).unwrap();
        let pr = exponent_pair(&c11, 6, 9).unwrap();
        let red = reduce_exponents(&c11, &pr);
        assert_eq!((red.k, red.n), (2, 3));
    }

    #[test]
    fn reduce_exponents_idempotent_and_s_preserved() {
        for p in [5u64, 7, 11, 13, 17, 19] {
            let ctx = PrimeContext::new(p).unwrap();
            for k in 1..p {
                for n in 1..p {
                    let pr = exponent_pair(&ctx, k, n).unwrap();
                    let red = reduce_exponents(&ctx, &pr);
                    assert_eq!(gcd(red.r, p - 1), pr.s);
                    assert_eq!(gcd(red.k, red.n), red.r);
                    let again = reduce_exponents(&ctx, &red);
                    assert_eq!(red, again);
                }
            }
        }
    }

    #[test]
    fn pow_multiplicative_in_exponent() {
        let ctx = PrimeContext::new(101).unwrap();
        for x in 1..101 {
            for (e1, e2) in [(0u64, 5u64), (3, 4), (17, 25), (50, 51)] {
                assert_eq!(
                    ctx.pow(x, e1 + e2),
                    ctx.mul(ctx.pow(x, e1), ctx.pow(x, e2))
                );
            }
        }
    }
}
