//! Numerical evaluation of the binomial exponential sums
//! `S_{k,n}(a,b) = sum_{x mod p} e_p(a x^k + b x^n)`, the orbit-reduced
//! maximum `M_{k,n}`, and the fourth-moment identity.
//!
//! All values are certified floating point: each result carries an absolute
//! error bound derived from the per-term rounding constant.

use num_complex::Complex64;

use crate::modarith::{ExponentPair, PrimeContext};
use crate::{Error, Result};

/// Per-term rounding constant: each table entry and each accumulation step
/// contributes a handful of ulps; 8 eps per term is a comfortable envelope.
pub const C_EPS: f64 = 8.0 * f64::EPSILON;

/// Table of the `p`-th roots of unity `ω_t = e^{2πi t/p}`.
pub struct RootOfUnityTable {
    omega: Vec<Complex64>,
    /// Per-entry absolute error bound.
    pub eps_omega: f64,
}

impl RootOfUnityTable {
    pub fn new(ctx: &PrimeContext) -> Self {
        let p = ctx.p();
        let omega = (0..p)
            .map(|t| {
                if t == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    // Arguments computed per entry (not by repeated
                    // multiplication) so errors do not accumulate.
                    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / p as f64)
                }
            })
            .collect();
        RootOfUnityTable {
            omega,
            eps_omega: 4.0 * f64::EPSILON,
        }
    }

    #[inline]
    pub fn get(&self, t: u64) -> Complex64 {
        self.omega[t as usize]
    }
}

/// A complex sum value with a certified absolute error bound.
#[derive(Debug, Clone, Copy)]
pub struct SumValue {
    pub value: Complex64,
    pub err: f64,
}

/// Result of a maximum scan over coefficient pairs.
#[derive(Debug, Clone, Copy)]
pub struct MaxSumResult {
    pub m_value: f64,
    pub argmax: (u64, u64),
    pub err: f64,
    pub scanned: usize,
}

/// Which coefficient pairs a [`max_sum`] scan visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// All `(p-1)^2` pairs of nonzero residues.
    Full,
    /// One representative per orbit of `(a,b) -> (a z^k, b z^n)`.
    Orbit,
}

fn sum_from_tables(
    ctx: &PrimeContext,
    table: &RootOfUnityTable,
    xk: &[u64],
    xn: &[u64],
    a: u64,
    b: u64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..ctx.p() as usize {
        let t = ctx.add(ctx.mul(a, xk[x]), ctx.mul(b, xn[x]));
        acc += table.get(t);
    }
    acc
}

/// Evaluate `S_{k,n}(a,b)`; `a` and `b` may be any residues including zero.
pub fn eval_sum(ctx: &PrimeContext, pair: &ExponentPair, a: u64, b: u64) -> SumValue {
    let table = RootOfUnityTable::new(ctx);
    let xk = ctx.pow_table(pair.k);
    let xn = ctx.pow_table(pair.n);
    let value = sum_from_tables(ctx, &table, &xk, &xn, ctx.reduce(a), ctx.reduce(b));
    SumValue {
        value,
        err: ctx.p() as f64 * C_EPS,
    }
}

/// One representative per orbit of the nonzero pairs under
/// `(a,b) -> (a z^k, b z^n)`. There are exactly `s(p-1)` orbits, each of
/// size `(p-1)/s`.
pub fn orbit_representatives(ctx: &PrimeContext, pair: &ExponentPair) -> Vec<(u64, u64)> {
    let p = ctx.p();
    let zk = ctx.pow_table(pair.k);
    let zn = ctx.pow_table(pair.n);
    let mut visited = vec![false; (p * p) as usize];
    let mut reps = Vec::with_capacity((pair.s * (p - 1)) as usize);
    for a in 1..p {
        for b in 1..p {
            if visited[(a * p + b) as usize] {
                continue;
            }
            reps.push((a, b));
            for z in 1..p {
                let oa = ctx.mul(a, zk[z as usize]);
                let ob = ctx.mul(b, zn[z as usize]);
                visited[(oa * p + ob) as usize] = true;
            }
        }
    }
    debug_assert_eq!(reps.len() as u64, pair.s * (p - 1));
    reps
}

/// Maximum of `|S_{k,n}(a,b)|` over nonzero coefficient pairs.
///
/// Ties go to the lexicographically smallest `(a,b)`, so both modes return a
/// deterministic argmax.
pub fn max_sum(ctx: &PrimeContext, pair: &ExponentPair, mode: ScanMode) -> MaxSumResult {
    let table = RootOfUnityTable::new(ctx);
    let xk = ctx.pow_table(pair.k);
    let xn = ctx.pow_table(pair.n);
    let pairs: Vec<(u64, u64)> = match mode {
        ScanMode::Full => (1..ctx.p())
            .flat_map(|a| (1..ctx.p()).map(move |b| (a, b)))
            .collect(),
        ScanMode::Orbit => orbit_representatives(ctx, pair),
    };
    let mut best = f64::NEG_INFINITY;
    let mut argmax = (0, 0);
    for &(a, b) in &pairs {
        let v = sum_from_tables(ctx, &table, &xk, &xn, a, b).norm();
        if v > best {
            best = v;
            argmax = (a, b);
        }
    }
    MaxSumResult {
        m_value: best,
        argmax,
        err: ctx.p() as f64 * C_EPS,
        scanned: pairs.len(),
    }
}

/// `Σ_{λ,μ in F_p} |S_{k,n}(λ,μ)|^4`, with its certified error bound.
pub fn fourth_moment(ctx: &PrimeContext, pair: &ExponentPair) -> (f64, f64) {
    moment(ctx, pair, 4)
}

/// `Σ_{λ,μ in F_p} |S_{k,n}(λ,μ)|^2` (orthogonality check).
pub fn second_moment(ctx: &PrimeContext, pair: &ExponentPair) -> (f64, f64) {
    moment(ctx, pair, 2)
}

fn moment(ctx: &PrimeContext, pair: &ExponentPair, power: u32) -> (f64, f64) {
    let p = ctx.p();
    let table = RootOfUnityTable::new(ctx);
    let xk = ctx.pow_table(pair.k);
    let xn = ctx.pow_table(pair.n);
    let mut acc = 0.0f64;
    let pf = p as f64;
    let term_err = pf * C_EPS;
    for a in 0..p {
        for b in 0..p {
            let m = sum_from_tables(ctx, &table, &xk, &xn, a, b).norm();
            acc += m.powi(power as i32);
        }
    }
    // |S| <= p, d|S^w| <= w p^{w-1} dS; plus accumulation rounding.
    let per_pair = power as f64 * pf.powi(power as i32 - 1) * term_err;
    let err = (pf * pf) * (per_pair + acc.abs() * f64::EPSILON);
    (acc, err)
}

/// Round the fourth moment to `p^2 * T` and return the integer `T`.
///
/// Fails with [`Error::MomentNotInteger`] if the moment is farther than
/// `tol` (in units of `p^2`) from an integer multiple of `p^2`.
pub fn fourth_moment_t(ctx: &PrimeContext, pair: &ExponentPair, tol: f64) -> Result<u64> {
    let (m4, _) = fourth_moment(ctx, pair);
    let p2 = (ctx.p() * ctx.p()) as f64;
    let t = m4 / p2;
    let rounded = t.round();
    if (t - rounded).abs() > tol || rounded < 0.0 {
        return Err(Error::MomentNotInteger(m4));
    }
    Ok(rounded as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::exponent_pair;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn zero_coefficients_sum_to_p() {
        let c = ctx(5);
        let pair = exponent_pair(&c, 1, 3).unwrap();
        let s = eval_sum(&c, &pair, 0, 0);
        assert!((s.value - Complex64::new(5.0, 0.0)).norm() <= s.err);
    }

    #[test]
    fn linear_sums_collapse_or_vanish() {
        let c = ctx(7);
        let pair = exponent_pair(&c, 1, 1).unwrap();
        let s = eval_sum(&c, &pair, 2, 5); // 2 + 5 = 0 mod 7
        assert!((s.value - Complex64::new(7.0, 0.0)).norm() <= s.err);
        let s = eval_sum(&c, &pair, 1, 1);
        assert!(s.value.norm() <= s.err);
    }

    #[test]
    fn gauss_sum_magnitude() {
        for p in [5u64, 7] {
            let c = ctx(p);
            let pair = exponent_pair(&c, 1, 2).unwrap();
            let m = max_sum(&c, &pair, ScanMode::Full);
            assert!(
                (m.m_value - (p as f64).sqrt()).abs() <= 2.0 * m.err,
                "p = {p}: {} vs sqrt(p)",
                m.m_value
            );
        }
    }

    #[test]
    fn orbit_representative_counts() {
        let c5 = ctx(5);
        let pair = exponent_pair(&c5, 1, 3).unwrap();
        assert_eq!(orbit_representatives(&c5, &pair).len(), 4);
        let c7 = ctx(7);
        let pair = exponent_pair(&c7, 2, 4).unwrap();
        assert_eq!(orbit_representatives(&c7, &pair).len(), 12);
    }

    #[test]
    fn orbits_partition_nonzero_pairs() {
        for (p, k, n) in [(5u64, 1u64, 3u64), (7, 2, 4), (11, 3, 6), (13, 4, 6)] {
            let c = ctx(p);
            let pair = exponent_pair(&c, k, n).unwrap();
            let reps = orbit_representatives(&c, &pair);
            let zk = c.pow_table(k);
            let zn = c.pow_table(n);
            let mut seen = vec![0u32; (p * p) as usize];
            for &(a, b) in &reps {
                let mut members = std::collections::HashSet::new();
                for z in 1..p {
                    members.insert((c.mul(a, zk[z as usize]), c.mul(b, zn[z as usize])));
                }
                assert_eq!(members.len() as u64, (p - 1) / pair.s);
                for (oa, ob) in members {
                    seen[(oa * p + ob) as usize] += 1;
                }
            }
            for a in 1..p {
                for b in 1..p {
                    assert_eq!(seen[(a * p + b) as usize], 1, "p={p} pair ({a},{b})");
                }
            }
        }
    }

    #[test]
    fn full_and_orbit_scans_agree() {
        for (p, k, n) in [(5u64, 1u64, 3u64), (7, 2, 4), (11, 1, 5), (13, 4, 6)] {
            let c = ctx(p);
            let pair = exponent_pair(&c, k, n).unwrap();
            let full = max_sum(&c, &pair, ScanMode::Full);
            let orbit = max_sum(&c, &pair, ScanMode::Orbit);
            assert!(
                (full.m_value - orbit.m_value).abs() <= 2.0 * full.err,
                "p={p} k={k} n={n}"
            );
            assert_eq!(full.scanned as u64, (p - 1) * (p - 1));
            assert_eq!(orbit.scanned as u64, pair.s * (p - 1));
        }
    }

    #[test]
    fn scaling_invariance() {
        let c = ctx(11);
        let pair = exponent_pair(&c, 2, 5).unwrap();
        let s0 = eval_sum(&c, &pair, 3, 7);
        for z in 1..11u64 {
            let a = c.mul(3, c.pow(z, pair.k));
            let b = c.mul(7, c.pow(z, pair.n));
            let s1 = eval_sum(&c, &pair, a, b);
            assert!((s0.value.norm() - s1.value.norm()).abs() <= 2.0 * s0.err);
        }
    }

    #[test]
    fn swap_symmetry() {
        let c = ctx(13);
        let pkn = exponent_pair(&c, 3, 7).unwrap();
        let pnk = exponent_pair(&c, 7, 3).unwrap();
        for (a, b) in [(1u64, 1u64), (2, 9), (5, 12)] {
            let s1 = eval_sum(&c, &pkn, a, b);
            let s2 = eval_sum(&c, &pnk, b, a);
            assert!((s1.value.norm() - s2.value.norm()).abs() <= 2.0 * s1.err);
        }
    }

    #[test]
    fn fourth_moment_known_values() {
        let c5 = ctx(5);
        let pair = exponent_pair(&c5, 1, 3).unwrap();
        assert_eq!(fourth_moment_t(&c5, &pair, 1e-3).unwrap(), 61);
        let c3 = ctx(3);
        let pair = exponent_pair(&c3, 1, 2).unwrap();
        assert_eq!(fourth_moment_t(&c3, &pair, 1e-3).unwrap(), 15);
        let c5 = ctx(5);
        let pair = exponent_pair(&c5, 1, 1).unwrap();
        assert_eq!(fourth_moment_t(&c5, &pair, 1e-3).unwrap(), 125);
    }

    #[test]
    fn second_moment_orthogonality() {
        // p^2 (1 + (p-1) s); reduces to p^3 when s = 1.
        for (p, k, n) in [(5u64, 1u64, 3u64), (7, 1, 4), (7, 2, 4), (11, 3, 6)] {
            let c = ctx(p);
            let pair = exponent_pair(&c, k, n).unwrap();
            let (m2, err) = second_moment(&c, &pair);
            let expect = (p * p * (1 + (p - 1) * pair.s)) as f64;
            assert!((m2 - expect).abs() <= err.max(1e-3), "p={p} k={k} n={n}");
            if pair.s == 1 {
                assert!((m2 - (p * p * p) as f64).abs() <= err.max(1e-3));
            }
        }
    }
}
