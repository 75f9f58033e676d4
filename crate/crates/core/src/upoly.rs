//! Dense univariate polynomials over `F_p`.
//!
//! Provides the arithmetic the bivariate factorizer needs (division, gcd,
//! modular powering) together with complete univariate factorization:
//! squarefree decomposition in characteristic `p` followed by Berlekamp
//! splitting with a seeded generator.

use crate::modarith::PrimeContext;
use rand::Rng;

/// Coefficients `c[i]` of `X^i`, highest entry nonzero; empty vector = zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UPoly(pub Vec<u64>);

impl UPoly {
    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn constant(c: u64) -> Self {
        if c == 0 {
            Self::zero()
        } else {
            UPoly(vec![c])
        }
    }

    pub fn x() -> Self {
        UPoly(vec![0, 1])
    }

    pub fn from_coeffs(mut c: Vec<u64>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    /// Degree; zero polynomial reports 0.
    pub fn deg(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lc(&self) -> u64 {
        *self.0.last().unwrap_or(&0)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn eval(&self, ctx: &PrimeContext, x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.0.iter().rev() {
            acc = ctx.add(ctx.mul(acc, x), c);
        }
        acc
    }

    pub fn add(&self, ctx: &PrimeContext, other: &UPoly) -> UPoly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = ctx.add(self.coeff(i), other.coeff(i));
        }
        UPoly::from_coeffs(out)
    }

    pub fn sub(&self, ctx: &PrimeContext, other: &UPoly) -> UPoly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0u64; n];
        for (i, o) in out.iter_mut().enumerate() {
            *o = ctx.sub(self.coeff(i), other.coeff(i));
        }
        UPoly::from_coeffs(out)
    }

    pub fn scale(&self, ctx: &PrimeContext, c: u64) -> UPoly {
        if c == 0 {
            return UPoly::zero();
        }
        UPoly(self.0.iter().map(|&a| ctx.mul(a, c)).collect())
    }

    pub fn mul(&self, ctx: &PrimeContext, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let p = ctx.p();
        let mut acc = vec![0u64; self.0.len() + other.0.len() - 1];
        // Products stay below 2^40 for p <= 2^20, so partial sums can be
        // accumulated in u64 with periodic reduction.
        let budget = u64::MAX - p * p;
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                let t = &mut acc[i + j];
                *t += a * b;
                if *t > budget {
                    *t %= p;
                }
            }
        }
        for t in acc.iter_mut() {
            *t %= p;
        }
        UPoly::from_coeffs(acc)
    }

    pub fn derivative(&self, ctx: &PrimeContext) -> UPoly {
        if self.0.len() <= 1 {
            return UPoly::zero();
        }
        let out = self.0[1..]
            .iter()
            .enumerate()
            .map(|(i, &c)| ctx.mul(c, (i as u64 + 1) % ctx.p()))
            .collect();
        UPoly::from_coeffs(out)
    }

    /// Substitute `X -> X + a`.
    pub fn translate(&self, ctx: &PrimeContext, a: u64) -> UPoly {
        // Horner on the shifted variable.
        let mut acc = UPoly::zero();
        for &c in self.0.iter().rev() {
            acc = acc.mul_linear_shift(ctx, a);
            if c != 0 {
                let mut v = acc.0;
                if v.is_empty() {
                    v.push(c);
                } else {
                    v[0] = ctx.add(v[0], c);
                }
                acc = UPoly::from_coeffs(v);
            }
        }
        acc
    }

    // self * (X + a)
    fn mul_linear_shift(&self, ctx: &PrimeContext, a: u64) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![0u64; self.0.len() + 1];
        for (i, &c) in self.0.iter().enumerate() {
            out[i + 1] = ctx.add(out[i + 1], c);
            out[i] = ctx.add(out[i], ctx.mul(c, a));
        }
        UPoly::from_coeffs(out)
    }

    pub fn monic(&self, ctx: &PrimeContext) -> (u64, UPoly) {
        let l = self.lc();
        if l == 0 || l == 1 {
            return (l.max(1), self.clone());
        }
        (l, self.scale(ctx, ctx.inv(l)))
    }
}

/// Quotient and remainder of `f / g`; `g` must be nonzero.
pub fn divrem(ctx: &PrimeContext, f: &UPoly, g: &UPoly) -> (UPoly, UPoly) {
    assert!(!g.is_zero(), "division by zero polynomial");
    if f.0.len() < g.0.len() {
        return (UPoly::zero(), f.clone());
    }
    let ginv = ctx.inv(g.lc());
    let mut rem = f.0.clone();
    let dq = f.0.len() - g.0.len();
    let mut quot = vec![0u64; dq + 1];
    for i in (0..=dq).rev() {
        let c = ctx.mul(rem[i + g.0.len() - 1], ginv);
        if c == 0 {
            continue;
        }
        quot[i] = c;
        for (j, &gc) in g.0.iter().enumerate() {
            rem[i + j] = ctx.sub(rem[i + j], ctx.mul(c, gc));
        }
    }
    (UPoly::from_coeffs(quot), UPoly::from_coeffs(rem))
}

/// `f / g` if the division is exact.
pub fn exact_div(ctx: &PrimeContext, f: &UPoly, g: &UPoly) -> Option<UPoly> {
    let (q, r) = divrem(ctx, f, g);
    r.is_zero().then_some(q)
}

/// Monic gcd.
pub fn gcd(ctx: &PrimeContext, f: &UPoly, g: &UPoly) -> UPoly {
    let mut a = f.clone();
    let mut b = g.clone();
    while !b.is_zero() {
        let (_, r) = divrem(ctx, &a, &b);
        a = b;
        b = r;
    }
    if a.is_zero() {
        a
    } else {
        a.monic(ctx).1
    }
}

/// Extended gcd for coprime monic inputs: returns `(s, t)` with
/// `s*f + t*g = 1`.
pub fn bezout_coprime(ctx: &PrimeContext, f: &UPoly, g: &UPoly) -> (UPoly, UPoly) {
    let (mut r0, mut r1) = (f.clone(), g.clone());
    let (mut s0, mut s1) = (UPoly::constant(1), UPoly::zero());
    let (mut t0, mut t1) = (UPoly::zero(), UPoly::constant(1));
    while !r1.is_zero() {
        let (q, r) = divrem(ctx, &r0, &r1);
        let s = s0.sub(ctx, &q.mul(ctx, &s1));
        let t = t0.sub(ctx, &q.mul(ctx, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    assert!(r0.is_constant() && !r0.is_zero(), "inputs not coprime");
    let inv = ctx.inv(r0.lc());
    (s0.scale(ctx, inv), t0.scale(ctx, inv))
}

pub fn mulmod(ctx: &PrimeContext, a: &UPoly, b: &UPoly, m: &UPoly) -> UPoly {
    let (_, r) = divrem(ctx, &a.mul(ctx, b), m);
    r
}

pub fn pow_mod(ctx: &PrimeContext, base: &UPoly, mut e: u64, m: &UPoly) -> UPoly {
    let (_, mut b) = divrem(ctx, base, m);
    let mut acc = UPoly::constant(1);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(ctx, &acc, &b, m);
        }
        b = mulmod(ctx, &b, &b, m);
        e >>= 1;
    }
    acc
}

/// Squarefree decomposition of a monic polynomial in characteristic `p`.
/// Returns pairwise-coprime monic squarefree parts with multiplicities.
pub fn squarefree_decomposition(ctx: &PrimeContext, f: &UPoly) -> Vec<(UPoly, u32)> {
    assert!(!f.is_zero());
    let mut out = Vec::new();
    sqf_inner(ctx, &f.monic(ctx).1, 1, &mut out);
    out.sort_by(|a, b| cmp_poly(&a.0, &b.0).then(a.1.cmp(&b.1)));
    out
}

fn sqf_inner(ctx: &PrimeContext, f: &UPoly, mult: u32, out: &mut Vec<(UPoly, u32)>) {
    if f.is_constant() {
        return;
    }
    let df = f.derivative(ctx);
    if df.is_zero() {
        // f = g(X^p): take the p-th root (a^p = a for coefficients in F_p).
        let p = ctx.p() as usize;
        let mut root = vec![0u64; f.deg() / p + 1];
        for (i, &c) in f.0.iter().enumerate() {
            if c != 0 {
                debug_assert_eq!(i % p, 0);
                root[i / p] = c;
            }
        }
        sqf_inner(ctx, &UPoly::from_coeffs(root), mult * ctx.p() as u32, out);
        return;
    }
    let mut g = gcd(ctx, f, &df); // product of repeated parts
    let mut w = exact_div(ctx, f, &g).unwrap(); // squarefree, mult not divisible by p
    let mut i = 1u32;
    while !w.is_constant() {
        let y = gcd(ctx, &w, &g);
        let z = exact_div(ctx, &w, &y).unwrap();
        if !z.is_constant() {
            out.push((z, mult * i));
        }
        g = exact_div(ctx, &g, &y).unwrap();
        w = y;
        i += 1;
    }
    if !g.is_constant() {
        // leftover multiplicities divisible by p
        sqf_inner(ctx, &g, mult, out);
    }
}

/// Canonical ordering: by degree, then lexicographic on coefficients from the
/// top. Used to make factor lists deterministic.
pub fn cmp_poly(a: &UPoly, b: &UPoly) -> std::cmp::Ordering {
    a.deg()
        .cmp(&b.deg())
        .then_with(|| a.0.iter().rev().cmp(b.0.iter().rev()))
}

/// Berlekamp factorization of a monic squarefree polynomial.
/// Returns the monic irreducible factors in canonical order.
pub fn berlekamp(ctx: &PrimeContext, f: &UPoly, rng: &mut impl Rng) -> Vec<UPoly> {
    let d = f.deg();
    if d <= 1 {
        return vec![f.clone()];
    }
    let p = ctx.p();
    // Frobenius matrix rows: X^{ip} mod f, built by repeated application of
    // the multiplication-by-(X^p mod f) matrix.
    let h = pow_mod(ctx, &UPoly::x(), p, f);
    // mul_by_h[j] = X^j * h mod f
    let mut mul_by_h: Vec<Vec<u64>> = Vec::with_capacity(d);
    let mut cur = {
        let mut v = vec![0u64; d];
        for (i, &c) in h.0.iter().enumerate() {
            v[i] = c;
        }
        v
    };
    mul_by_h.push(cur.clone());
    for _ in 1..d {
        cur = shift_reduce(ctx, &cur, f);
        mul_by_h.push(cur.clone());
    }
    let mut q: Vec<Vec<u64>> = Vec::with_capacity(d);
    let mut row = vec![0u64; d];
    row[0] = 1;
    q.push(row.clone());
    let budget = u64::MAX - p * p;
    for _ in 1..d {
        let mut next = vec![0u64; d];
        for (j, &rj) in row.iter().enumerate() {
            if rj == 0 {
                continue;
            }
            let col = &mul_by_h[j];
            for (t, &m) in col.iter().enumerate() {
                let acc = &mut next[t];
                *acc += rj * m;
                if *acc > budget {
                    *acc %= p;
                }
            }
        }
        for t in next.iter_mut() {
            *t %= p;
        }
        q.push(next.clone());
        row = next;
    }
    // Left nullspace of Q - I.
    let mut b: Vec<Vec<u64>> = (0..d)
        .map(|i| {
            let mut r = q[i].clone();
            r[i] = ctx.sub(r[i], 1);
            r
        })
        .collect();
    let basis = left_nullspace(ctx, &mut b, d);
    let nfactors = basis.len();
    if nfactors == 1 {
        return vec![f.clone()];
    }

    let mut components = vec![f.clone()];
    let e = (p - 1) / 2;
    while components.len() < nfactors {
        // Random element of the Berlekamp subalgebra.
        let mut v = vec![0u64; d];
        for bv in &basis {
            let c = rng.gen_range(0..p);
            if c != 0 {
                for (t, &x) in bv.iter().enumerate() {
                    v[t] = ctx.add(v[t], ctx.mul(c, x));
                }
            }
        }
        let v = UPoly::from_coeffs(v);
        let mut next = Vec::with_capacity(components.len());
        for g in components.into_iter() {
            if g.deg() <= 1 {
                next.push(g);
                continue;
            }
            let w = divrem(ctx, &v, &g).1;
            if w.is_constant() {
                next.push(g);
                continue;
            }
            let u = pow_mod(ctx, &w, e, &g);
            let mut um1 = u.clone();
            if um1.0.is_empty() {
                um1 = UPoly::constant(ctx.neg(1));
            } else {
                um1.0[0] = ctx.sub(um1.0[0], 1);
                um1 = UPoly::from_coeffs(um1.0);
            }
            let g1 = gcd(ctx, &g, &um1);
            if !g1.is_constant() && g1.deg() < g.deg() {
                let g2 = exact_div(ctx, &g, &g1).unwrap();
                next.push(g1);
                if !g2.is_constant() {
                    next.push(g2);
                }
            } else {
                next.push(g);
            }
        }
        components = next;
    }
    components.sort_by(cmp_poly);
    components
}

// (X * v) mod f for v given as a dense length-deg(f) vector.
fn shift_reduce(ctx: &PrimeContext, v: &[u64], f: &UPoly) -> Vec<u64> {
    let d = f.deg();
    let mut out = vec![0u64; d];
    let top = v[d - 1];
    out[1..d].copy_from_slice(&v[..d - 1]);
    if top != 0 {
        // subtract top * (f - X^d), f monic
        for j in 0..d {
            out[j] = ctx.sub(out[j], ctx.mul(top, f.0[j]));
        }
    }
    out
}

// Basis of { v : v * B = 0 } for a d x d matrix given by rows.
fn left_nullspace(ctx: &PrimeContext, b: &mut [Vec<u64>], d: usize) -> Vec<Vec<u64>> {
    // Row-reduce B^T; free columns of B^T correspond to null vectors of v*B.
    let mut m: Vec<Vec<u64>> = (0..d).map(|i| (0..d).map(|j| b[j][i]).collect()).collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; d];
    let mut rank = 0usize;
    for col in 0..d {
        let mut piv = None;
        for (r, row) in m.iter().enumerate().skip(rank) {
            if row[col] != 0 {
                piv = Some(r);
                break;
            }
        }
        let Some(pr) = piv else { continue };
        m.swap(rank, pr);
        let inv = ctx.inv(m[rank][col]);
        for x in m[rank].iter_mut() {
            *x = ctx.mul(*x, inv);
        }
        for r in 0..d {
            if r != rank && m[r][col] != 0 {
                let c = m[r][col];
                let (head, tail) = if r < rank {
                    let (a, bb) = m.split_at_mut(rank);
                    (&mut a[r], &bb[0])
                } else {
                    let (a, bb) = m.split_at_mut(r);
                    (&mut bb[0], &a[rank])
                };
                for (x, &y) in head.iter_mut().zip(tail.iter()) {
                    *x = ctx.sub(*x, ctx.mul(c, y));
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
    }
    let mut basis = Vec::new();
    for col in 0..d {
        if pivot_of_col[col].is_some() {
            continue;
        }
        let mut v = vec![0u64; d];
        v[col] = 1;
        for (c2, piv) in pivot_of_col.iter().enumerate() {
            if let Some(r) = piv {
                v[c2] = ctx.neg(m[*r][col]);
            }
        }
        basis.push(v);
    }
    basis
}

/// Complete factorization: unit constant and monic irreducible factors with
/// multiplicities, in canonical order.
pub fn factor(ctx: &PrimeContext, f: &UPoly, rng: &mut impl Rng) -> (u64, Vec<(UPoly, u32)>) {
    assert!(!f.is_zero());
    let (unit, monic) = f.monic(ctx);
    if monic.is_constant() {
        return (unit, Vec::new());
    }
    let mut out = Vec::new();
    for (part, mult) in squarefree_decomposition(ctx, &monic) {
        for irr in berlekamp(ctx, &part, rng) {
            out.push((irr, mult));
        }
    }
    out.sort_by(|a, b| cmp_poly(&a.0, &b.0));
    (unit, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    fn poly(c: &[u64]) -> UPoly {
        UPoly::from_coeffs(c.to_vec())
    }

    #[test]
    fn divrem_roundtrip() {
        let c = ctx(13);
        let f = poly(&[1, 0, 5, 2, 9]);
        let g = poly(&[3, 1, 4]);
        let (q, r) = divrem(&c, &f, &g);
        let back = q.mul(&c, &g).add(&c, &r);
        assert_eq!(back, f);
        assert!(r.deg() < g.deg());
    }

    #[test]
    fn gcd_of_products() {
        let c = ctx(7);
        let a = poly(&[1, 1]); // X + 1
        let b = poly(&[3, 1]); // X + 3
        let d = poly(&[5, 1]); // X + 5
        let f = a.mul(&c, &b);
        let g = a.mul(&c, &d);
        assert_eq!(gcd(&c, &f, &g), a);
    }

    #[test]
    fn translate_matches_eval() {
        let c = ctx(31);
        let f = poly(&[4, 0, 7, 1, 22]);
        let g = f.translate(&c, 5);
        for x in 0..31 {
            assert_eq!(g.eval(&c, x), f.eval(&c, c.add(x, 5)));
        }
    }

    #[test]
    fn squarefree_frobenius_identity() {
        // X^p - 1 = (X - 1)^p
        let c = ctx(5);
        let mut v = vec![0u64; 6];
        v[0] = c.neg(1);
        v[5] = 1;
        let f = UPoly::from_coeffs(v);
        let parts = squarefree_decomposition(&c, &f);
        assert_eq!(parts, vec![(poly(&[4, 1]), 5)]);
    }

    #[test]
    fn squarefree_mixed_multiplicities() {
        let c = ctx(7);
        let a = poly(&[6, 1]); // X - 1
        let b = poly(&[5, 1]); // X - 2
        let f = a.mul(&c, &a).mul(&c, &b);
        let parts = squarefree_decomposition(&c, &f);
        assert_eq!(parts, vec![(b.clone(), 1), (a.clone(), 2)]);
    }

    #[test]
    fn factor_random_products_reconstruct() {
        let c = ctx(13);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let deg = rng.gen_range(1..10usize);
            let mut coeffs: Vec<u64> = (0..=deg).map(|_| rng.gen_range(0..13)).collect();
            if coeffs[deg] == 0 {
                coeffs[deg] = 1;
            }
            let f = UPoly::from_coeffs(coeffs);
            if f.is_constant() {
                continue;
            }
            let (unit, factors) = factor(&c, &f, &mut rng);
            let mut back = UPoly::constant(unit);
            for (g, m) in &factors {
                for _ in 0..*m {
                    back = back.mul(&c, g);
                }
            }
            assert_eq!(back, f);
            // irreducibles of degree <= 3 have no roots unless linear
            for (g, _) in &factors {
                if g.deg() >= 2 && g.deg() <= 3 {
                    for x in 0..13 {
                        assert_ne!(g.eval(&c, x), 0, "claimed irreducible has a root");
                    }
                }
            }
        }
    }

    #[test]
    fn berlekamp_counts_factors_of_xp_minus_x() {
        // X^p - X splits into all p linear factors.
        let c = ctx(11);
        let mut v = vec![0u64; 12];
        v[1] = c.neg(1);
        v[11] = 1;
        let f = UPoly::from_coeffs(v);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let factors = berlekamp(&c, &f, &mut rng);
        assert_eq!(factors.len(), 11);
        for g in &factors {
            assert_eq!(g.deg(), 1);
        }
    }
}
