//! Exact solution counts for the diagonal systems attached to `S_{k,n}`:
//! the quadruple count `T_{k,n}`, the curve point count `N_{k,n}`, and the
//! decomposition `T_n = A0 + (p-1) N_n` for the one-parameter family.
//!
//! The primary algorithm is the O(p^2) pair spectrum; the O(p^4) brute-force
//! quadruple count is kept as a test oracle.

use serde::Serialize;

use crate::modarith::{ExponentPair, PrimeContext};
use crate::{Error, Result};

/// Largest modulus for which the dense p x p spectrum is built.
pub const MAX_SPECTRUM_PRIME: u64 = 1 << 13;

/// Dense table `r[c][d] = #{(u,v): u^k + v^k = c, u^n + v^n = d}`.
pub struct PairSpectrum {
    p: u64,
    counts: Vec<u64>,
}

impl PairSpectrum {
    pub fn get(&self, c: u64, d: u64) -> u64 {
        self.counts[(c * self.p + d) as usize]
    }

    /// Sum of all entries; always `p^2`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `Σ r[c][d]^2`, the quadruple count.
    pub fn sum_of_squares(&self) -> u64 {
        self.counts.iter().map(|&x| x * x).sum()
    }
}

/// Exact counts for one `(p, k, n)` instance.
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub p: u64,
    pub k: u64,
    pub n: u64,
    pub t: u64,
    /// Point count of `F_{k,n}`; absent for the degenerate `k = n` family.
    pub n_points: Option<u64>,
    /// Degenerate-solution count from the `k = 1` decomposition.
    pub a0: Option<u64>,
}

fn check_scale(ctx: &PrimeContext) -> Result<()> {
    let p = ctx.p();
    if p > MAX_SPECTRUM_PRIME {
        return Err(Error::OutOfRange {
            what: "p (pair spectrum)",
            value: p,
            lo: 3,
            hi: MAX_SPECTRUM_PRIME,
        });
    }
    // p^3 <= 2^60 keeps every count far from u64 overflow.
    debug_assert!(p.pow(3) <= 1 << 60);
    Ok(())
}

/// Build the spectrum in one pass over all `(u, v)`.
pub fn pair_spectrum(ctx: &PrimeContext, pair: &ExponentPair) -> Result<PairSpectrum> {
    check_scale(ctx)?;
    let p = ctx.p();
    let xk = ctx.pow_table(pair.k);
    let xn = ctx.pow_table(pair.n);
    let mut counts = vec![0u64; (p * p) as usize];
    for u in 0..p as usize {
        for v in 0..p as usize {
            let c = ctx.add(xk[u], xk[v]);
            let d = ctx.add(xn[u], xn[v]);
            counts[(c * p + d) as usize] += 1;
        }
    }
    Ok(PairSpectrum { p, counts })
}

/// `T_{k,n}`: solutions of `u^k+v^k = x^k+y^k`, `u^n+v^n = x^n+y^n`.
pub fn count_t(ctx: &PrimeContext, pair: &ExponentPair) -> Result<u64> {
    Ok(pair_spectrum(ctx, pair)?.sum_of_squares())
}

/// O(p^4) quadruple enumeration; test oracle for [`count_t`].
pub fn brute_force_t(ctx: &PrimeContext, pair: &ExponentPair) -> u64 {
    let p = ctx.p();
    let xk = ctx.pow_table(pair.k);
    let xn = ctx.pow_table(pair.n);
    let mut t = 0u64;
    for u in 0..p as usize {
        for v in 0..p as usize {
            let ck = ctx.add(xk[u], xk[v]);
            let cn = ctx.add(xn[u], xn[v]);
            for x in 0..p as usize {
                for y in 0..p as usize {
                    if ctx.add(xk[x], xk[y]) == ck && ctx.add(xn[x], xn[y]) == cn {
                        t += 1;
                    }
                }
            }
        }
    }
    t
}

/// `N_{k,n}`: F_p-points of `F_{k,n}`, evaluated from the closed form
/// `(x^n+y^n-1)^{k/r} - (x^k+y^k-1)^{n/r}`.
pub fn count_n(ctx: &PrimeContext, pair: &ExponentPair) -> Result<u64> {
    if pair.k == pair.n {
        return Err(Error::DegenerateFamily(pair.k));
    }
    check_scale(ctx)?;
    let p = ctx.p();
    let xk = ctx.pow_table(pair.k);
    let xn = ctx.pow_table(pair.n);
    let (ek, en) = (pair.k / pair.r, pair.n / pair.r);
    let mut count = 0u64;
    for x in 0..p as usize {
        for y in 0..p as usize {
            let sk = ctx.sub(ctx.add(xk[x], xk[y]), 1);
            let sn = ctx.sub(ctx.add(xn[x], xn[y]), 1);
            if ctx.pow(sn, ek) == ctx.pow(sk, en) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// For the `k = 1` family: `A0 = #{(x,y): (x+y)^n = x^n + y^n}`, `N = N_{1,n}`,
/// and `T = T_{1,n}`, asserting the exact identity `T = A0 + (p-1) N`.
pub fn decompose_t(ctx: &PrimeContext, n: u64) -> Result<(u64, u64, u64)> {
    if n < 1 || n >= ctx.p() {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            lo: 1,
            hi: ctx.p() - 1,
        });
    }
    check_scale(ctx)?;
    let p = ctx.p();
    let xn = ctx.pow_table(n);
    let mut a0 = 0u64;
    let mut n_points = 0u64;
    for x in 0..p as usize {
        for y in 0..p as usize {
            let s = ctx.add(x as u64, y as u64);
            let rhs = ctx.add(xn[x], xn[y]);
            if xn[s as usize] == rhs {
                a0 += 1;
            }
            // F_{1,n}(x,y) = x^n + y^n - 1 - (x + y - 1)^n.
            let t = ctx.sub(s, 1);
            if ctx.sub(rhs, 1) == xn[t as usize] {
                n_points += 1;
            }
        }
    }
    let pair = crate::modarith::exponent_pair(ctx, 1, n)?;
    let t = count_t(ctx, &pair)?;
    if t != a0 + (p - 1) * n_points {
        return Err(Error::IdentityViolation(format!(
            "T_{{1,{n}}} = {t} != A0 + (p-1)N = {a0} + {} * {n_points} over F_{p}",
            p - 1
        )));
    }
    Ok((a0, n_points, t))
}

/// All exact counts for one instance, for reports and serialization.
pub fn count_report(ctx: &PrimeContext, pair: &ExponentPair) -> Result<CountReport> {
    let t = count_t(ctx, pair)?;
    let n_points = if pair.k == pair.n {
        None
    } else {
        Some(count_n(ctx, pair)?)
    };
    let a0 = if pair.k == 1 {
        Some(decompose_t(ctx, pair.n)?.0)
    } else {
        None
    };
    Ok(CountReport {
        p: ctx.p(),
        k: pair.k,
        n: pair.n,
        t,
        n_points,
        a0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::{exponent_pair, reduce_exponents};

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn spectrum_totals_and_cell() {
        let c = ctx(5);
        let pair = exponent_pair(&c, 1, 3).unwrap();
        let spec = pair_spectrum(&c, &pair).unwrap();
        assert_eq!(spec.total(), 25);
        // u + v = 0 forces u^3 + v^3 = 0 as well; 5 such pairs.
        assert_eq!(spec.get(0, 0), 5);
    }

    #[test]
    fn spectrum_diagonal_when_k_equals_n() {
        let c = ctx(3);
        let pair = exponent_pair(&c, 1, 1).unwrap();
        let spec = pair_spectrum(&c, &pair).unwrap();
        let mut diag = 0;
        for cc in 0..3 {
            for d in 0..3 {
                if cc == d {
                    diag += spec.get(cc, d);
                } else {
                    assert_eq!(spec.get(cc, d), 0);
                }
            }
        }
        assert_eq!(diag, 9);
    }

    #[test]
    fn t_known_values() {
        let c5 = ctx(5);
        assert_eq!(count_t(&c5, &exponent_pair(&c5, 1, 3).unwrap()).unwrap(), 61);
        assert_eq!(count_t(&c5, &exponent_pair(&c5, 1, 1).unwrap()).unwrap(), 125);
        let c7 = ctx(7);
        assert_eq!(count_t(&c7, &exponent_pair(&c7, 1, 2).unwrap()).unwrap(), 91);
    }

    #[test]
    fn t_matches_brute_force() {
        for p in [5u64, 7, 11, 13] {
            let c = ctx(p);
            for k in 1..p.min(6) {
                for n in (k + 1)..p.min(7) {
                    let pair = exponent_pair(&c, k, n).unwrap();
                    assert_eq!(
                        count_t(&c, &pair).unwrap(),
                        brute_force_t(&c, &pair),
                        "p={p} k={k} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn t_symmetric_and_bounded_below() {
        for p in [5u64, 7, 11] {
            let c = ctx(p);
            for k in 1..p {
                for n in 1..p {
                    let t = count_t(&c, &exponent_pair(&c, k, n).unwrap()).unwrap();
                    let ts = count_t(&c, &exponent_pair(&c, n, k).unwrap()).unwrap();
                    assert_eq!(t, ts);
                    assert!(t >= 2 * p * p - p, "p={p} k={k} n={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn n_known_values() {
        let c = ctx(5);
        assert_eq!(count_n(&c, &exponent_pair(&c, 1, 2).unwrap()).unwrap(), 9);
        assert_eq!(count_n(&c, &exponent_pair(&c, 1, 3).unwrap()).unwrap(), 12);
    }

    #[test]
    fn n_degenerate_guard() {
        let c = ctx(7);
        assert!(matches!(
            count_n(&c, &exponent_pair(&c, 3, 3).unwrap()),
            Err(Error::DegenerateFamily(3))
        ));
        // k=1, n=7 is out of range (n < p required), not degenerate.
        assert!(exponent_pair(&c, 1, 7).is_err());
    }

    #[test]
    fn decompose_t_examples() {
        let c = ctx(5);
        assert_eq!(decompose_t(&c, 3).unwrap(), (13, 12, 61));
        assert_eq!(decompose_t(&c, 2).unwrap(), (9, 9, 45));
        let c7 = ctx(7);
        let (a0, n, t) = decompose_t(&c7, 1).unwrap();
        assert_eq!((a0, n, t), (49, 49, 343));
    }

    #[test]
    fn decompose_t_identity_sweep() {
        for p in [5u64, 7, 11, 13] {
            let c = ctx(p);
            for n in 2..p {
                decompose_t(&c, n).unwrap();
            }
        }
    }

    #[test]
    fn exponent_reduction_preserves_t() {
        for p in [5u64, 7, 11] {
            let c = ctx(p);
            for k in 1..p {
                for n in (k + 1)..p {
                    let pair = exponent_pair(&c, k, n).unwrap();
                    let red = reduce_exponents(&c, &pair);
                    assert_eq!(
                        count_t(&c, &pair).unwrap(),
                        count_t(&c, &red).unwrap(),
                        "p={p} k={k} n={n} -> k*={} n*={}",
                        red.k,
                        red.n
                    );
                }
            }
        }
    }
}
