//! Complete factorization of bivariate polynomials over `F_p`, and the
//! `F_n` / `F_{k,n}` family builders and trivial-factor reports.
//!
//! Pipeline: pull out the contents in both variables (univariate
//! factorization), peel homogeneous factors shared by the top and bottom
//! homogeneous parts, then either
//!   - certify the remainder irreducible by intersecting specialization
//!     factor-degree patterns over several evaluation points, or
//!   - run squarefree decomposition followed by univariate factorization at a
//!     good specialization point, Hensel lifting in the power-series ring and
//!     subset recombination.
//!
//! The second route is complete; the first one is a cheap certificate that
//! handles the high-degree `F_{k,n}` instances where dense lifting would be
//! too expensive.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bipoly::BivariatePolynomial;
use crate::modarith::{ExponentPair, PrimeContext};
use crate::upoly::{self, UPoly};
use crate::{Error, Result};

/// Seed used by [`factor`]; recorded in the output for reproducibility.
pub const DEFAULT_FACTOR_SEED: u64 = 0x5b1a_70e5;

#[derive(Debug, Clone)]
pub struct Factorization {
    /// Nonzero scalar such that `unit * prod factors^mult = input`.
    pub unit: u64,
    /// Irreducible factors, monic under lex leading term (X > Y), in
    /// canonical order, with multiplicities.
    pub factors: Vec<(BivariatePolynomial, u32)>,
    /// RNG seed used for the randomized splitting steps.
    pub seed: u64,
}

impl Factorization {
    /// Multiply the factorization back out.
    pub fn expand(&self, ctx: &PrimeContext) -> BivariatePolynomial {
        let mut acc = BivariatePolynomial::constant(ctx, self.unit);
        for (f, m) in &self.factors {
            for _ in 0..*m {
                acc = acc.mul(ctx, f);
            }
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Family builders
// ---------------------------------------------------------------------------

/// `F_n = X^n + Y^n - (X+Y-1)^n - 1`.
pub fn build_fn(ctx: &PrimeContext, n: u64) -> Result<BivariatePolynomial> {
    if n < 2 || n >= ctx.p() {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            lo: 2,
            hi: ctx.p() - 1,
        });
    }
    let n = n as u32;
    let tri = BivariatePolynomial::from_terms(
        ctx,
        [((1, 0), 1), ((0, 1), 1), ((0, 0), ctx.neg(1))],
    );
    let mut f = BivariatePolynomial::from_terms(ctx, [((n, 0), 1), ((0, n), 1)]);
    f = f.sub(ctx, &tri.pow(ctx, n));
    f = f.sub(ctx, &BivariatePolynomial::constant(ctx, 1));
    Ok(f)
}

/// `F_{k,n} = (X^n + Y^n - 1)^{k/r} - (X^k + Y^k - 1)^{n/r}` with
/// `r = gcd(k,n)`; requires `k != n`.
pub fn build_fkn(ctx: &PrimeContext, pair: &ExponentPair) -> Result<BivariatePolynomial> {
    if pair.k == pair.n {
        return Err(Error::DegenerateFamily(pair.k));
    }
    let (k, n, r) = (pair.k as u32, pair.n as u32, pair.r as u32);
    let base_n = BivariatePolynomial::from_terms(
        ctx,
        [((n, 0), 1), ((0, n), 1), ((0, 0), ctx.neg(1))],
    );
    let base_k = BivariatePolynomial::from_terms(
        ctx,
        [((k, 0), 1), ((0, k), 1), ((0, 0), ctx.neg(1))],
    );
    Ok(base_n.pow(ctx, k / r).sub(ctx, &base_k.pow(ctx, n / r)))
}

// ---------------------------------------------------------------------------
// Dense representation: polynomial in Y with coefficients in F_p[X]
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
struct Dense {
    /// `cols[j]` is the coefficient of `Y^j`; the last entry is nonzero.
    cols: Vec<UPoly>,
}

impl Dense {
    fn zero() -> Self {
        Dense { cols: Vec::new() }
    }

    fn normalize(mut self) -> Self {
        while self.cols.last().map_or(false, |c| c.is_zero()) {
            self.cols.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    fn is_constant(&self) -> bool {
        match self.cols.len() {
            0 => true,
            1 => self.cols[0].is_constant(),
            _ => false,
        }
    }

    fn deg_y(&self) -> usize {
        self.cols.len().saturating_sub(1)
    }

    fn deg_x(&self) -> usize {
        self.cols.iter().map(|c| c.deg()).max().unwrap_or(0)
    }

    fn total_degree(&self) -> usize {
        self.cols
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| j + c.deg())
            .max()
            .unwrap_or(0)
    }

    fn lc_y(&self) -> &UPoly {
        self.cols.last().expect("zero polynomial")
    }

    fn from_sparse(f: &BivariatePolynomial) -> Self {
        if f.is_zero() {
            return Dense::zero();
        }
        let dy = f.deg_y() as usize;
        let dx = f.deg_x() as usize;
        let mut cols = vec![vec![0u64; dx + 1]; dy + 1];
        for (&(i, j), &c) in f.terms() {
            cols[j as usize][i as usize] = c;
        }
        Dense {
            cols: cols.into_iter().map(UPoly::from_coeffs).collect(),
        }
        .normalize()
    }

    fn to_sparse(&self, ctx: &PrimeContext) -> BivariatePolynomial {
        let mut out = BivariatePolynomial::zero(ctx);
        for (j, col) in self.cols.iter().enumerate() {
            for (i, &c) in col.0.iter().enumerate() {
                if c != 0 {
                    out.add_term(ctx, i as u32, j as u32, c);
                }
            }
        }
        out
    }

    /// Exact division in `F_p[X][Y]`; `None` if not divisible.
    fn exact_div(&self, ctx: &PrimeContext, g: &Dense) -> Option<Dense> {
        assert!(!g.is_zero());
        if self.is_zero() {
            return Some(Dense::zero());
        }
        if self.cols.len() < g.cols.len() {
            return None;
        }
        let mut rem = self.cols.clone();
        let dq = self.cols.len() - g.cols.len();
        let mut quot = vec![UPoly::zero(); dq + 1];
        for i in (0..=dq).rev() {
            let top = std::mem::replace(&mut rem[i + g.cols.len() - 1], UPoly::zero());
            if top.is_zero() {
                continue;
            }
            let q = upoly::exact_div(ctx, &top, g.lc_y())?;
            for (j, gc) in g.cols.iter().enumerate().take(g.cols.len() - 1) {
                if !gc.is_zero() {
                    rem[i + j] = rem[i + j].sub(ctx, &q.mul(ctx, gc));
                }
            }
            quot[i] = q;
        }
        if rem.iter().all(|c| c.is_zero()) {
            Some(Dense { cols: quot }.normalize())
        } else {
            None
        }
    }

    /// gcd in `F_p[X]` of all coefficients.
    fn content_y(&self, ctx: &PrimeContext) -> UPoly {
        let mut acc = UPoly::zero();
        for c in &self.cols {
            if !c.is_zero() {
                acc = upoly::gcd(ctx, &acc, c);
                if acc.is_constant() {
                    break;
                }
            }
        }
        acc
    }

    fn div_content(&self, ctx: &PrimeContext, content: &UPoly) -> Dense {
        if content.is_constant() {
            let inv = ctx.inv(content.lc());
            return Dense {
                cols: self.cols.iter().map(|c| c.scale(ctx, inv)).collect(),
            };
        }
        Dense {
            cols: self
                .cols
                .iter()
                .map(|c| {
                    if c.is_zero() {
                        UPoly::zero()
                    } else {
                        upoly::exact_div(ctx, c, content).expect("content must divide")
                    }
                })
                .collect(),
        }
    }

    fn primitive(&self, ctx: &PrimeContext) -> Dense {
        if self.is_zero() {
            return Dense::zero();
        }
        let c = self.content_y(ctx);
        self.div_content(ctx, &c)
    }

    fn specialize(&self, ctx: &PrimeContext, x0: u64) -> UPoly {
        UPoly::from_coeffs(self.cols.iter().map(|c| c.eval(ctx, x0)).collect())
    }

    /// Substitute `X -> X + a` in every coefficient.
    fn translate_x(&self, ctx: &PrimeContext, a: u64) -> Dense {
        Dense {
            cols: self.cols.iter().map(|c| c.translate(ctx, a)).collect(),
        }
    }

    fn transpose(&self, ctx: &PrimeContext) -> Dense {
        Dense::from_sparse(&self.to_sparse(ctx).swap_vars(ctx))
    }

    fn derivative_x(&self, ctx: &PrimeContext) -> Dense {
        Dense {
            cols: self.cols.iter().map(|c| c.derivative(ctx)).collect(),
        }
        .normalize()
    }

    fn derivative_y(&self, ctx: &PrimeContext) -> Dense {
        if self.cols.len() <= 1 {
            return Dense::zero();
        }
        let cols = self.cols[1..]
            .iter()
            .enumerate()
            .map(|(j, c)| c.scale(ctx, (j as u64 + 1) % ctx.p()))
            .collect();
        Dense { cols }.normalize()
    }
}

// ---------------------------------------------------------------------------
// Bivariate gcd (primitive pseudo-remainder sequence) and squarefree split
// ---------------------------------------------------------------------------

fn bigcd(ctx: &PrimeContext, f: &Dense, g: &Dense) -> Dense {
    if f.is_zero() {
        return g.clone();
    }
    if g.is_zero() {
        return f.clone();
    }
    if f.deg_y() == 0 || g.deg_y() == 0 {
        // One side is univariate in X: gcd with the other's content.
        let (uni, other) = if f.deg_y() == 0 { (f, g) } else { (g, f) };
        let c = upoly::gcd(ctx, &uni.cols[0], &other.content_y(ctx));
        return Dense { cols: vec![c] };
    }
    let cf = f.content_y(ctx);
    let cg = g.content_y(ctx);
    let content = upoly::gcd(ctx, &cf, &cg);
    let mut a = f.div_content(ctx, &cf);
    let mut b = g.div_content(ctx, &cg);
    if a.deg_y() < b.deg_y() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let r = pseudo_rem(ctx, &a, &b);
        if r.is_zero() {
            break;
        }
        if r.deg_y() == 0 {
            // Coprime as polynomials in Y.
            b = Dense {
                cols: vec![UPoly::constant(1)],
            };
            break;
        }
        a = b;
        b = r.primitive(ctx);
    }
    let mut out = b.primitive(ctx);
    if !content.is_constant() || content.lc() != 1 {
        out = Dense {
            cols: out.cols.iter().map(|c| c.mul(ctx, &content)).collect(),
        };
    }
    // Scalar-normalize so the result is canonical.
    let lc = out.lc_y().lc();
    if lc != 1 {
        let inv = ctx.inv(lc);
        out = Dense {
            cols: out.cols.iter().map(|c| c.scale(ctx, inv)).collect(),
        };
    }
    out
}

/// Pseudo-remainder of `a` by `b` in `F_p[X][Y]` (deg_Y a >= deg_Y b >= 1).
fn pseudo_rem(ctx: &PrimeContext, a: &Dense, b: &Dense) -> Dense {
    let mut rem = a.clone();
    let db = b.deg_y();
    while !rem.is_zero() && rem.deg_y() >= db {
        let shift = rem.deg_y() - db;
        let rl = rem.lc_y().clone();
        let bl = b.lc_y().clone();
        let mut cols = vec![UPoly::zero(); rem.deg_y()];
        for (j, c) in rem.cols.iter().enumerate().take(rem.deg_y()) {
            cols[j] = c.mul(ctx, &bl);
        }
        for (j, c) in b.cols.iter().enumerate().take(db) {
            if !c.is_zero() {
                let t = c.mul(ctx, &rl);
                cols[shift + j] = cols[shift + j].sub(ctx, &t);
            }
        }
        rem = Dense { cols }.normalize();
    }
    rem
}

/// Bivariate squarefree decomposition in characteristic `p`; the parts are
/// pairwise coprime and multiply (up to a scalar) to the input.
fn sqf_dense(ctx: &PrimeContext, f: &Dense) -> Vec<(Dense, u32)> {
    let mut out = Vec::new();
    sqf_dense_inner(ctx, f, 1, &mut out);
    out
}

fn sqf_dense_inner(ctx: &PrimeContext, f: &Dense, mult: u32, out: &mut Vec<(Dense, u32)>) {
    if f.is_constant() {
        return;
    }
    let fx = f.derivative_x(ctx);
    let fy = f.derivative_y(ctx);
    if fx.is_zero() && fy.is_zero() {
        // All exponents divisible by p: take the p-th root.
        let p = ctx.p() as usize;
        let mut cols = Vec::with_capacity(f.deg_y() / p + 1);
        for (j, c) in f.cols.iter().enumerate() {
            if j % p == 0 {
                let mut root = vec![0u64; c.deg() / p + 1];
                for (i, &v) in c.0.iter().enumerate() {
                    if v != 0 {
                        root[i / p] = v;
                    }
                }
                cols.push(UPoly::from_coeffs(root));
            } else {
                debug_assert!(c.is_zero());
            }
        }
        let root = Dense { cols }.normalize();
        sqf_dense_inner(ctx, &root, mult * ctx.p() as u32, out);
        return;
    }
    let mut g = bigcd(ctx, &bigcd(ctx, f, &fx), &fy);
    let mut w = f.exact_div(ctx, &g).expect("gcd divides");
    let mut i = 1u32;
    while !w.is_constant() {
        let y = bigcd(ctx, &w, &g);
        let z = w.exact_div(ctx, &y).expect("gcd divides");
        if !z.is_constant() {
            out.push((z, mult * i));
        }
        g = g.exact_div(ctx, &y).expect("gcd divides");
        w = y;
        i += 1;
    }
    if !g.is_constant() {
        // Remaining multiplicities are all divisible by p.
        sqf_dense_inner(ctx, &g, mult, out);
    }
}

/// Public squarefree decomposition on the sparse type.
pub fn squarefree_decomposition(
    ctx: &PrimeContext,
    poly: &BivariatePolynomial,
) -> Vec<(BivariatePolynomial, u32)> {
    assert!(!poly.is_zero(), "squarefree decomposition of zero");
    let dense = Dense::from_sparse(poly);
    let mut parts: Vec<(BivariatePolynomial, u32)> = sqf_dense(ctx, &dense)
        .into_iter()
        .map(|(d, m)| (d.to_sparse(ctx).monic_lex(ctx).1, m))
        .collect();
    parts.sort_by(|a, b| a.0.cmp_canonical(&b.0).then(a.1.cmp(&b.1)));
    parts
}

// ---------------------------------------------------------------------------
// Truncated power series in t over F_p, and polynomials in Y over them
// ---------------------------------------------------------------------------

type Series = Vec<u64>; // fixed length = precision

fn series_from(u: &UPoly, m: usize) -> Series {
    let mut s = vec![0u64; m];
    for (i, &c) in u.0.iter().enumerate().take(m) {
        s[i] = c;
    }
    s
}

fn series_mul(ctx: &PrimeContext, a: &Series, b: &Series, m: usize) -> Series {
    if m <= 64 {
        return series_mul_naive(ctx, a, b, m);
    }
    let fa = &a[..a.len().min(m)];
    let fb = &b[..b.len().min(m)];
    let mut out = kara_full(ctx, fa, fb);
    out.truncate(m);
    out.resize(m, 0);
    out
}

fn series_mul_naive(ctx: &PrimeContext, a: &Series, b: &Series, m: usize) -> Series {
    let p = ctx.p();
    let budget = u64::MAX - p * p;
    let mut out = vec![0u64; m];
    for (i, &x) in a.iter().enumerate().take(m) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().take(m - i).enumerate() {
            let t = &mut out[i + j];
            *t += x * y;
            if *t > budget {
                *t %= p;
            }
        }
    }
    for t in out.iter_mut() {
        *t %= p;
    }
    out
}

/// Full (untruncated) product of coefficient slices, Karatsuba above a
/// small-size base case. Inputs and output are reduced mod p.
fn kara_full(ctx: &PrimeContext, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p = ctx.p();
    if a.len().min(b.len()) <= 32 {
        let budget = u64::MAX - p * p;
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                let t = &mut out[i + j];
                *t += x * y;
                if *t > budget {
                    *t %= p;
                }
            }
        }
        for t in out.iter_mut() {
            *t %= p;
        }
        return out;
    }
    let h = a.len().max(b.len()).div_ceil(2);
    let (a0, a1) = a.split_at(a.len().min(h));
    let (b0, b1) = b.split_at(b.len().min(h));
    let mut out = vec![0u64; a.len() + b.len() - 1];
    let acc = |out: &mut Vec<u64>, part: &[u64], at: usize, negate: bool| {
        for (i, &v) in part.iter().enumerate() {
            let t = &mut out[at + i];
            *t = if negate { ctx.sub(*t, v) } else { ctx.add(*t, v) };
        }
    };
    // Skewed operands: one half is empty, fall back to a plain split.
    if a1.is_empty() || b1.is_empty() {
        let z0 = kara_full(ctx, a0, b0);
        acc(&mut out, &z0, 0, false);
        if !a1.is_empty() {
            let z = kara_full(ctx, a1, b0);
            acc(&mut out, &z, h, false);
        }
        if !b1.is_empty() {
            let z = kara_full(ctx, a0, b1);
            acc(&mut out, &z, h, false);
        }
        return out;
    }
    let z0 = kara_full(ctx, a0, b0);
    let z2 = kara_full(ctx, a1, b1);
    let mut sa = a0.to_vec();
    for (i, &v) in a1.iter().enumerate() {
        sa[i] = ctx.add(sa[i], v);
    }
    let mut sb = b0.to_vec();
    for (i, &v) in b1.iter().enumerate() {
        sb[i] = ctx.add(sb[i], v);
    }
    let z1 = kara_full(ctx, &sa, &sb);
    acc(&mut out, &z0, 0, false);
    acc(&mut out, &z2, 2 * h, false);
    acc(&mut out, &z1, h, false);
    acc(&mut out, &z0, h, true);
    acc(&mut out, &z2, h, true);
    out
}

fn series_inv(ctx: &PrimeContext, a: &Series, m: usize) -> Series {
    assert!(a[0] != 0, "series not a unit");
    let inv0 = ctx.inv(a[0]);
    let mut out = vec![0u64; m];
    out[0] = inv0;
    for k in 1..m {
        let mut acc = 0u64;
        for i in 1..=k {
            if a.get(i).copied().unwrap_or(0) != 0 {
                acc = ctx.add(acc, ctx.mul(a[i], out[k - i]));
            }
        }
        out[k] = ctx.mul(inv0, ctx.neg(acc));
    }
    out
}

/// Rough operation count of one `series_mul` at precision `m`, used to pick
/// between schoolbook loops and transform-based fast paths.
fn series_mul_cost(m: usize) -> f64 {
    if m <= 64 {
        (m * m) as f64
    } else {
        (m as f64).powf(1.585)
    }
}

// ---------------------------------------------------------------------------
// Number-theoretic transform for exact integer convolution
// ---------------------------------------------------------------------------

#[cfg(feature = "prof")]
pub mod prof {
    use std::cell::Cell;
    thread_local! {
        pub static MUL_NTT: Cell<(u64, u64)> = const { Cell::new((0, 0)) };
        pub static MUL_NAIVE: Cell<(u64, u64)> = const { Cell::new((0, 0)) };
        pub static DIV_NEWTON: Cell<(u64, u64)> = const { Cell::new((0, 0)) };
        pub static DIV_SCHOOL: Cell<(u64, u64)> = const { Cell::new((0, 0)) };
    }
    pub fn bump(c: &'static std::thread::LocalKey<Cell<(u64, u64)>>, ns: u64) {
        c.with(|x| {
            let (n, t) = x.get();
            x.set((n + 1, t + ns));
        });
    }
    pub fn dump() {
        let g = |c: &'static std::thread::LocalKey<Cell<(u64, u64)>>| c.with(|x| x.get());
        eprintln!(
            "prof: mul_ntt={:?} mul_naive={:?} div_newton={:?} div_school={:?}",
            g(&MUL_NTT),
            g(&MUL_NAIVE),
            g(&DIV_NEWTON),
            g(&DIV_SCHOOL)
        );
    }
}

/// NTT-friendly prime: 998244353 = 119 * 2^23 + 1, primitive root 3.
const NTT_P: u64 = 998_244_353;
const NTT_G: u64 = 3;

/// Montgomery reduction helpers with R = 2^32: twiddle factors are stored in
/// Montgomery form, so each butterfly costs two machine multiplications.
const NTT_NEG_PINV: u32 = {
    // p^{-1} mod 2^32 by Newton iteration, then negated.
    let mut inv: u32 = 1;
    let p = NTT_P as u32;
    let mut i = 0;
    while i < 5 {
        inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        i += 1;
    }
    0u32.wrapping_sub(inv)
};
const NTT_R2: u64 = {
    // 2^64 mod p, giving to-Montgomery conversion via mont_mul(x, R2).
    let r = (1u128 << 64) % (NTT_P as u128);
    r as u64
};

/// `a * b / 2^32 mod p` for `a, b < p`; if `b` is in Montgomery form this is
/// the plain product of `a` and the value `b` represents.
#[inline(always)]
fn mont_mul(a: u64, b: u64) -> u64 {
    let t = a * b;
    let m = (t as u32).wrapping_mul(NTT_NEG_PINV) as u64;
    let r = (t.wrapping_add(m * NTT_P)) >> 32;
    if r >= NTT_P {
        r - NTT_P
    } else {
        r
    }
}

fn ntt_pow(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % NTT_P;
        }
        b = b * b % NTT_P;
        e >>= 1;
    }
    r
}

/// In-place radix-2 transform; the length must be a power of two `<= 2^23`.
fn ntt(a: &mut [u64], invert: bool) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    let mut wtab: Vec<u64> = Vec::with_capacity(n / 2);
    while len <= n {
        let mut w = ntt_pow(NTT_G, (NTT_P - 1) / len as u64);
        if invert {
            w = ntt_pow(w, NTT_P - 2);
        }
        wtab.clear();
        let wm = mont_mul(w, NTT_R2);
        let mut wn = mont_mul(1, NTT_R2);
        for _ in 0..len / 2 {
            wtab.push(wn);
            wn = mont_mul(wn, wm);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for ((x, y), &wn) in lo.iter_mut().zip(hi.iter_mut()).zip(&wtab) {
                let u = *x;
                let v = mont_mul(*y, wn);
                *x = u + v;
                if *x >= NTT_P {
                    *x -= NTT_P;
                }
                *y = u + NTT_P - v;
                if *y >= NTT_P {
                    *y -= NTT_P;
                }
            }
        }
        len <<= 1;
    }
    if invert {
        let ninv = ntt_pow(n as u64, NTT_P - 2);
        for x in a.iter_mut() {
            *x = *x * ninv % NTT_P;
        }
    }
}

#[cfg(feature = "prof")]
struct DeferProf(
    &'static std::thread::LocalKey<std::cell::Cell<(u64, u64)>>,
    std::time::Instant,
);
#[cfg(feature = "prof")]
impl Drop for DeferProf {
    fn drop(&mut self) {
        prof::bump(self.0, self.1.elapsed().as_nanos() as u64);
    }
}

/// Polynomial in Y over `F_p[t]/(t^m)`.
#[derive(Debug, Clone)]
struct SPoly {
    c: Vec<Series>,
}

impl SPoly {
    fn zero() -> Self {
        SPoly { c: Vec::new() }
    }

    fn constant(s: Series) -> Self {
        SPoly { c: vec![s] }
    }

    fn normalize(mut self) -> Self {
        while self
            .c
            .last()
            .map_or(false, |s| s.iter().all(|&x| x == 0))
        {
            self.c.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn from_univariate(u: &UPoly, m: usize) -> Self {
        SPoly {
            c: u.0
                .iter()
                .map(|&x| {
                    let mut s = vec![0u64; m];
                    s[0] = x;
                    s
                })
                .collect(),
        }
        .normalize()
    }

    fn from_dense(d: &Dense, m: usize) -> Self {
        SPoly {
            c: d.cols.iter().map(|u| series_from(u, m)).collect(),
        }
        .normalize()
    }

    fn to_dense(&self) -> Dense {
        Dense {
            cols: self.c.iter().map(|s| UPoly::from_coeffs(s.clone())).collect(),
        }
        .normalize()
    }

    /// Coefficient of `Y^i t^j`; series shorter than the working precision
    /// are zero-extended (a truncation is a genuine polynomial in `t`).
    #[inline]
    fn at(&self, i: usize, j: usize) -> u64 {
        self.c
            .get(i)
            .and_then(|v| v.get(j))
            .copied()
            .unwrap_or(0)
    }

    fn add(&self, ctx: &PrimeContext, other: &SPoly, m: usize) -> SPoly {
        let n = self.c.len().max(other.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = vec![0u64; m];
            for (t, slot) in s.iter_mut().enumerate() {
                *slot = ctx.add(self.at(i, t), other.at(i, t));
            }
            out.push(s);
        }
        SPoly { c: out }.normalize()
    }

    fn sub(&self, ctx: &PrimeContext, other: &SPoly, m: usize) -> SPoly {
        let n = self.c.len().max(other.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = vec![0u64; m];
            for (t, slot) in s.iter_mut().enumerate() {
                *slot = ctx.sub(self.at(i, t), other.at(i, t));
            }
            out.push(s);
        }
        SPoly { c: out }.normalize()
    }

    fn mul(&self, ctx: &PrimeContext, other: &SPoly, m: usize) -> SPoly {
        if self.is_zero() || other.is_zero() {
            return SPoly::zero();
        }
        #[cfg(feature = "prof")]
        let t0 = std::time::Instant::now();
        if let Some(out) = self.mul_ntt(ctx, other, m) {
            #[cfg(feature = "prof")]
            prof::bump(&prof::MUL_NTT, t0.elapsed().as_nanos() as u64);
            return out;
        }
        #[cfg(feature = "prof")]
        let _guard = DeferProf(&prof::MUL_NAIVE, t0);
        let mut out = vec![vec![0u64; m]; self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                let prod = series_mul(ctx, a, b, m);
                let dst = &mut out[i + j];
                for t in 0..m {
                    dst[t] = ctx.add(dst[t], prod[t]);
                }
            }
        }
        SPoly { c: out }.normalize()
    }

    /// Kronecker-substitution product through the NTT. Columns are packed
    /// with stride `2m - 1`, so t-degrees of the product (at most `2m - 2`)
    /// never wrap between Y-slots, and the packed integer product equals the
    /// packed product of the bivariate polynomials. Every product coefficient
    /// is a sum of at most `(min_deg + 1) * m` terms below `p^2`; when that
    /// bound stays under the transform modulus the convolution is exact over
    /// the integers and reduces correctly mod `p`. Returns `None` when
    /// exactness cannot be guaranteed or the schoolbook loop is cheaper.
    fn mul_ntt(&self, ctx: &PrimeContext, other: &SPoly, m: usize) -> Option<SPoly> {
        let p = ctx.p();
        let (da, db) = (self.c.len() - 1, other.c.len() - 1);
        let cnt = ((da.min(db) + 1) * m) as u64;
        let bound = cnt.checked_mul((p - 1) * (p - 1))?;
        if bound >= NTT_P {
            return None;
        }
        let stride = 2 * m - 1;
        let plen = (da + db + 1) * stride;
        let n = plen.next_power_of_two();
        if n > 1 << 23 {
            return None;
        }
        let naive = (da + 1) as f64 * (db + 1) as f64 * series_mul_cost(m);
        let fft = 4.0 * n as f64 * ((n as f64).log2() + 1.0);
        if fft >= naive {
            return None;
        }
        let pack = |s: &SPoly| {
            let mut v = vec![0u64; n];
            for (i, col) in s.c.iter().enumerate() {
                let base = i * stride;
                for (t, &x) in col.iter().take(m).enumerate() {
                    v[base + t] = x;
                }
            }
            v
        };
        let mut fa = pack(self);
        let mut fb = pack(other);
        ntt(&mut fa, false);
        ntt(&mut fb, false);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x = *x * *y % NTT_P;
        }
        ntt(&mut fa, true);
        let mut out = Vec::with_capacity(da + db + 1);
        for i in 0..=da + db {
            let base = i * stride;
            let col: Series = fa[base..base + m].iter().map(|&x| x % p).collect();
            out.push(col);
        }
        Some(SPoly { c: out }.normalize())
    }

    /// Product truncated to Y-degree `< ycap`.
    fn mul_trunc_y(&self, ctx: &PrimeContext, other: &SPoly, m: usize, ycap: usize) -> SPoly {
        let a = self.trunc_y(ycap);
        let b = other.trunc_y(ycap);
        let mut out = a.mul(ctx, &b, m);
        out.c.truncate(ycap);
        out.normalize()
    }

    fn trunc_y(&self, ycap: usize) -> SPoly {
        SPoly {
            c: self.c.iter().take(ycap).cloned().collect(),
        }
        .normalize()
    }

    /// Coefficients in reverse order, treating `self` as having exact
    /// Y-degree `deg` (missing columns read as zero).
    fn reverse_y(&self, deg: usize, m: usize) -> SPoly {
        let mut out = Vec::with_capacity(deg + 1);
        for i in (0..=deg).rev() {
            let mut s = vec![0u64; m];
            if let Some(col) = self.c.get(i) {
                let k = col.len().min(m);
                s[..k].copy_from_slice(&col[..k]);
            }
            out.push(s);
        }
        SPoly { c: out }.normalize()
    }

    /// Inverse modulo `Y^ycap` by Newton iteration; the constant Y-coefficient
    /// must be a unit series.
    fn inv_y(&self, ctx: &PrimeContext, m: usize, ycap: usize) -> SPoly {
        let mut c0 = self.c[0].clone();
        c0.resize(m.max(1), 0);
        let mut v = SPoly::constant(series_inv(ctx, &c0, m));
        let two = {
            let mut s = vec![0u64; m];
            s[0] = ctx.reduce(2);
            SPoly::constant(s)
        };
        let mut prec = 1usize;
        while prec < ycap {
            let nprec = (2 * prec).min(ycap);
            let sv = self.mul_trunc_y(ctx, &v, m, nprec);
            let corr = two.sub(ctx, &sv, m);
            v = v.mul_trunc_y(ctx, &corr, m, nprec);
            prec = nprec;
        }
        v
    }

    fn derivative_y(&self, ctx: &PrimeContext) -> SPoly {
        if self.c.len() <= 1 {
            return SPoly::zero();
        }
        let mut out = Vec::with_capacity(self.c.len() - 1);
        for (i, s) in self.c.iter().enumerate().skip(1) {
            let k = ctx.reduce(i as u64);
            out.push(s.iter().map(|&x| ctx.mul(x, k)).collect());
        }
        SPoly { c: out }.normalize()
    }

    fn scale_series(&self, ctx: &PrimeContext, s: &Series, m: usize) -> SPoly {
        SPoly {
            c: self.c.iter().map(|a| series_mul(ctx, a, s, m)).collect(),
        }
        .normalize()
    }

    fn one_minus(&self, ctx: &PrimeContext, m: usize) -> SPoly {
        let mut one = vec![0u64; m];
        one[0] = 1;
        SPoly::constant(one).sub(ctx, self, m)
    }

    /// Division by a monic divisor (leading coefficient series `1`).
    /// Production divisions go through the cached-inverse path; this
    /// standalone version stays as its reference oracle.
    #[cfg_attr(not(test), allow(dead_code))]
    fn divrem_monic(&self, ctx: &PrimeContext, g: &SPoly, m: usize) -> (SPoly, SPoly) {
        if self.c.len() < g.c.len() {
            return (SPoly::zero(), self.clone());
        }
        {
            let dg = g.c.len() - 1;
            let dq = self.c.len() - g.c.len();
            // Balanced large divisions go through reversal and a Newton
            // inverse (a handful of fast products); the schoolbook loop wins
            // for skewed shapes where either side is small.
            if dg >= 24 && dq >= 24 && (dq * dg) as f64 * series_mul_cost(m) > 4.0e6 {
                #[cfg(feature = "prof")]
                let _guard = DeferProf(&prof::DIV_NEWTON, std::time::Instant::now());
                let df = self.c.len() - 1;
                let rg = g.reverse_y(dg, m);
                let rginv = rg.inv_y(ctx, m, dq + 1);
                let rf = self.reverse_y(df, m);
                let rq = rf.mul_trunc_y(ctx, &rginv, m, dq + 1);
                let quot = rq.reverse_y(dq, m);
                let qg = quot.mul(ctx, g, m);
                let mut rem = self.sub(ctx, &qg, m);
                rem.c.truncate(dg);
                return (quot, rem.normalize());
            }
        }
        #[cfg(feature = "prof")]
        let _guard = DeferProf(&prof::DIV_SCHOOL, std::time::Instant::now());
        let mut rem: Vec<Series> = self
            .c
            .iter()
            .map(|s| {
                let mut v = s.clone();
                v.resize(m, 0);
                v
            })
            .collect();
        let dg = g.c.len() - 1;
        let dq = self.c.len() - g.c.len();
        let mut quot = vec![vec![0u64; m]; dq + 1];
        for i in (0..=dq).rev() {
            let q = rem[i + dg].clone();
            if q.iter().all(|&x| x == 0) {
                continue;
            }
            for (j, gc) in g.c.iter().enumerate().take(dg) {
                let prod = series_mul(ctx, &q, gc, m);
                let dst = &mut rem[i + j];
                for t in 0..m {
                    dst[t] = ctx.sub(dst[t], prod[t]);
                }
            }
            rem[i + dg] = vec![0u64; m];
            quot[i] = q;
        }
        rem.truncate(dg);
        (
            SPoly { c: quot }.normalize(),
            SPoly { c: rem }.normalize(),
        )
    }

    /// Top slice of the quotient by a monic divisor: the coefficients of
    /// `Y^i` for `i >= kstop` (lower ones are left zero). Remainder positions
    /// below `kstop + deg(g)` can no longer influence those coefficients and
    /// are skipped, so the cost is proportional to the slice length times the
    /// divisor degree.
    fn div_top_monic(&self, ctx: &PrimeContext, g: &SPoly, m: usize, kstop: usize) -> SPoly {
        if self.c.len() < g.c.len() {
            return SPoly::zero();
        }
        let dg = g.c.len() - 1;
        let dq = self.c.len() - g.c.len();
        if kstop > dq {
            return SPoly::zero();
        }
        let floor = kstop + dg;
        let mut rem: Vec<Series> = self
            .c
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i < floor {
                    Vec::new()
                } else {
                    let mut v = s.clone();
                    v.resize(m, 0);
                    v
                }
            })
            .collect();
        let mut quot = vec![vec![0u64; m]; dq + 1];
        for i in (kstop..=dq).rev() {
            let q = std::mem::take(&mut rem[i + dg]);
            if q.iter().all(|&x| x == 0) {
                continue;
            }
            for (j, gc) in g.c.iter().enumerate().take(dg) {
                if i + j < floor {
                    continue;
                }
                let prod = series_mul(ctx, &q, gc, m);
                let dst = &mut rem[i + j];
                for t in 0..m {
                    dst[t] = ctx.sub(dst[t], prod[t]);
                }
            }
            quot[i] = q;
        }
        SPoly { c: quot }.normalize()
    }

    fn truncate_prec(&self, k: usize, m: usize) -> SPoly {
        SPoly {
            c: self
                .c
                .iter()
                .map(|s| {
                    let mut v = vec![0u64; m];
                    v[..k.min(s.len())].copy_from_slice(&s[..k.min(s.len())]);
                    v
                })
                .collect(),
        }
        .normalize()
    }
}

/// Inverse of a reversed monic divisor modulo `Y^ycap`, kept alongside the
/// Hensel iteration so each division costs two products instead of a full
/// Newton recomputation.
struct RevInvCache {
    v: SPoly,
    ycap: usize,
    /// t-precision to which `v` is a valid inverse of the current reversed
    /// divisor; the owner lowers this when the divisor changes.
    tvalid: usize,
}

/// Division by monic `g` through the cached inverse. On the first call the
/// inverse is built from scratch (cheap: the t-precision is still tiny); on
/// later calls one Newton step restores full precision, which is valid
/// because between calls the t-precision at most doubles and `g` only ever
/// changes by terms divisible by the previous precision.
fn divrem_cached(
    ctx: &PrimeContext,
    f: &SPoly,
    g: &SPoly,
    cache: &mut Option<RevInvCache>,
    m: usize,
    cap: usize,
) -> (SPoly, SPoly) {
    if f.c.len() < g.c.len() {
        return (SPoly::zero(), f.clone());
    }
    let dg = g.c.len() - 1;
    let df = f.c.len() - 1;
    let dq = df - dg;
    let rg = g.reverse_y(dg, m);
    match cache {
        None => {
            *cache = Some(RevInvCache {
                v: rg.inv_y(ctx, m, cap),
                ycap: cap,
                tvalid: m,
            });
        }
        Some(c) => {
            debug_assert!(c.ycap >= dq + 1);
            while c.tvalid < m {
                let sv = rg.mul_trunc_y(ctx, &c.v, m, c.ycap);
                let mut two = vec![0u64; m];
                two[0] = ctx.reduce(2);
                let corr = SPoly::constant(two).sub(ctx, &sv, m);
                c.v = c.v.mul_trunc_y(ctx, &corr, m, c.ycap);
                c.tvalid = (c.tvalid * 2).min(m);
            }
        }
    }
    let v = &cache.as_ref().unwrap().v;
    let rf = f.reverse_y(df, m);
    let rq = rf.mul_trunc_y(ctx, v, m, dq + 1);
    let quot = rq.reverse_y(dq, m);
    let qg = quot.mul(ctx, g, m);
    let mut rem = f.sub(ctx, &qg, m);
    rem.c.truncate(dg);
    (quot, rem.normalize())
}

// ---------------------------------------------------------------------------
// Hensel lifting
// ---------------------------------------------------------------------------

/// Lift `f = prod(factors)` from a factorization mod `t` to mod `t^m`.
/// `f` must be monic in Y over the series ring; the `factors` are monic,
/// pairwise coprime univariate polynomials with product `f mod t`.
fn hensel_lift_tree(
    ctx: &PrimeContext,
    f: &SPoly,
    factors: &[UPoly],
    m: usize,
) -> Vec<SPoly> {
    if factors.len() == 1 {
        return vec![f.clone()];
    }
    // Split so the two halves have near-equal total degree: the lift cost is
    // governed by the node degrees, and a lopsided split makes them decay
    // slowly down the tree.
    let total: usize = factors.iter().map(|u| u.deg()).sum();
    let mut half = 1usize;
    let mut acc = 0usize;
    let mut best = usize::MAX;
    for (i, u) in factors.iter().enumerate().take(factors.len() - 1) {
        acc += u.deg();
        let diff = (2 * acc).abs_diff(total);
        if diff < best {
            best = diff;
            half = i + 1;
        }
    }
    let (lo, hi) = factors.split_at(half);
    let mut g0 = UPoly::constant(1);
    for u in lo {
        g0 = g0.mul(ctx, u);
    }
    let mut h0 = UPoly::constant(1);
    for u in hi {
        h0 = h0.mul(ctx, u);
    }
    let (s0, t0) = upoly::bezout_coprime(ctx, &g0, &h0);
    let (gl, hl) = hensel_lift_pair(ctx, f, &g0, &h0, &s0, &t0, m);
    let mut out = hensel_lift_tree(ctx, &gl, lo, m);
    out.extend(hensel_lift_tree(ctx, &hl, hi, m));
    out
}

/// Quadratic two-factor Hensel lifting.
fn hensel_lift_pair(
    ctx: &PrimeContext,
    f: &SPoly,
    g0: &UPoly,
    h0: &UPoly,
    s0: &UPoly,
    t0: &UPoly,
    m: usize,
) -> (SPoly, SPoly) {
    let mut g = SPoly::from_univariate(g0, m);
    let mut h = SPoly::from_univariate(h0, m);
    let mut s = SPoly::from_univariate(s0, m);
    let mut t = SPoly::from_univariate(t0, m);
    // Dividends below stay under deg f + deg h - 2, so quotients stay under
    // deg f - 1; one cache at that cap serves every division by h.
    let cap = (f.c.len() - 1).max(2);
    let mut hinv: Option<RevInvCache> = None;
    let mut prec = 1usize;
    while prec < m {
        let next = (prec * 2).min(m);
        // e = f - g h
        let e = f.sub(ctx, &g.mul(ctx, &h, next), next).truncate_prec(next, m);
        // (q, r) = divrem(s e, h); g' = g + t e + q g; h' = h + r
        let se = s.mul(ctx, &e, next);
        let (q, r) = divrem_cached(ctx, &se, &h, &mut hinv, next, cap);
        let te = t.mul(ctx, &e, next);
        let qg = q.mul(ctx, &g, next);
        g = g.add(ctx, &te.add(ctx, &qg, next), next);
        h = h.add(ctx, &r, next);
        if let Some(c) = hinv.as_mut() {
            // h just changed by terms divisible by t^prec.
            c.tvalid = c.tvalid.min(prec);
        }
        if next < m {
            // b = s g' + t h' - 1 = -(1 - (s g' + t h'))
            let sg_th = s
                .mul(ctx, &g, next)
                .add(ctx, &t.mul(ctx, &h, next), next);
            let b = SPoly::zero().sub(ctx, &sg_th.one_minus(ctx, next), next);
            let sb = s.mul(ctx, &b, next);
            let (c, d) = divrem_cached(ctx, &sb, &h, &mut hinv, next, cap);
            s = s.sub(ctx, &d, next);
            let tb = t.mul(ctx, &b, next);
            let cg = c.mul(ctx, &g, next);
            t = t.sub(ctx, &tb.add(ctx, &cg, next), next);
        }
        prec = next;
    }
    (g, h)
}

// ---------------------------------------------------------------------------
// Specialization-pattern irreducibility certificate
// ---------------------------------------------------------------------------

/// Bitset-based subset sums of the irreducible-factor degree multiset of a
/// univariate polynomial.
fn degree_subset_sums(ctx: &PrimeContext, u: &UPoly, rng: &mut impl Rng) -> Vec<u64> {
    let d = u.deg();
    let words = d / 64 + 1;
    let mut bits = vec![0u64; words];
    bits[0] = 1;
    for (part, mult) in upoly::squarefree_decomposition(ctx, u) {
        for irr in upoly::berlekamp(ctx, &part, rng) {
            for _ in 0..mult {
                bits = or_shifted(&bits, irr.deg(), d);
            }
        }
    }
    bits
}

fn or_shifted(bits: &[u64], shift: usize, maxdeg: usize) -> Vec<u64> {
    let words = bits.len();
    let mut out = bits.to_vec();
    let (wshift, bshift) = (shift / 64, shift % 64);
    for i in (0..words).rev() {
        if i < wshift {
            break;
        }
        let mut v = bits[i - wshift] << bshift;
        if bshift > 0 && i > wshift {
            v |= bits[i - wshift - 1] >> (64 - bshift);
        }
        out[i] |= v;
    }
    // Mask out sums beyond maxdeg.
    for (i, w) in out.iter_mut().enumerate() {
        let lo = i * 64;
        if lo > maxdeg {
            *w = 0;
        } else if maxdeg - lo < 63 {
            *w &= (1u64 << (maxdeg - lo + 1)) - 1;
        }
    }
    out
}

/// Try to certify that a primitive polynomial (trivial content in both
/// variables) is irreducible by intersecting specialization degree patterns.
/// `false` means "unknown", never "reducible".
///
/// Axis-aligned specializations of the symmetric families often factor with
/// identical uniform degree patterns whose subset sums cover everything, so
/// shears are tried as well; they break the symmetry and make the
/// specializations factor generically.
fn certify_irreducible(ctx: &PrimeContext, h: &Dense, seed: u64) -> bool {
    let mut orientations: Vec<Dense> = vec![h.clone(), h.transpose(ctx)];
    // Shearing a large dense polynomial is more expensive than the whole
    // certificate; past this size the log-derivative certificate takes over.
    if h.total_degree() <= 200 {
        for a in 1..ctx.p().min(4) {
            let sh = shear_x(ctx, h, a);
            orientations.push(sh.transpose(ctx));
            orientations.push(sh);
        }
    }
    for oriented in orientations {
        if sieve_orientation(ctx, &oriented, seed) {
            return true;
        }
    }
    false
}

fn sieve_orientation(ctx: &PrimeContext, h: &Dense, seed: u64) -> bool {
    let d = h.deg_y();
    if d == 0 {
        return false;
    }
    // A factor of Y-degree 0 would be invisible to the degree patterns, so
    // the certificate is only sound for trivial content. Nontrivial content
    // can appear after a shear; it proves reducibility, so nothing to do.
    if !h.content_y(ctx).is_constant() {
        return false;
    }
    if d == 1 {
        return true; // primitive and linear in Y
    }
    let words = d / 64 + 1;
    // Candidate degrees of a proper factor: 1..d-1.
    let mut cand = vec![u64::MAX; words];
    cand[0] &= !1u64; // drop 0
    for i in 0..words {
        let lo = i * 64;
        if lo + 63 >= d {
            let keep = d - lo; // bits lo..d-1 valid
            cand[i] &= (1u64 << keep).wrapping_sub(1);
        }
    }
    let mut stale = 0;
    for x0 in 0..ctx.p() {
        if h.lc_y().eval(ctx, x0) == 0 {
            continue;
        }
        let u = h.specialize(ctx, x0);
        debug_assert_eq!(u.deg(), d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (x0 << 20));
        let sums = degree_subset_sums(ctx, &u, &mut rng);
        let mut changed = false;
        for i in 0..words {
            let before = cand[i];
            cand[i] &= sums[i];
            if cand[i] != before {
                changed = true;
            }
        }
        // 0 and d are always achievable; they were masked out of cand.
        cand[0] &= !1u64;
        if cand.iter().all(|&w| w == 0) {
            return true;
        }
        stale = if changed { 0 } else { stale + 1 };
        if stale >= 6 {
            break;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Line-geometry irreducibility certificate
// ---------------------------------------------------------------------------
//
// The vertical sieve above fails on the structured family remainders whose
// curves pass through almost every rational point of the plane: every
// specialization then contains many linear factors and the subset sums cover
// everything. This certificate works with arbitrary lines `Y = c X + a` and
// splits the analysis of a hypothetical proper factor `G` in two:
//
//  * Degree sieve. A line is *degree-preserving* when `deg(h|_L)` equals the
//    total degree of `h`; the top homogeneous form of a product is the
//    product of the top forms, so every factor also restricts with its full
//    total degree. The degree of a proper factor therefore lies in the
//    subset sums of the restriction's irreducible degree pattern on every
//    such line; intersecting a few lines leaves either nothing (irreducible)
//    or a thin set of small degrees `e <= E` together with the mirrored
//    cofactor degrees `d - e`.
//
//  * Branch exclusion. Fix a line `L`. Either `G` has a rational point on
//    `L`, or `G|_L` has no rational root and so divides the product of the
//    nonlinear irreducible factors of `h|_L`, confining `deg G` to the
//    subset sums of the nonlinear degrees alone. In the first case, let
//    `P = (t0, y0)` be such a point with `y0` a simple root of `h(t0, Y)`.
//    Exactly one of `G`, `h/G` vanishes at `P` (both would make the root
//    multiple), and the unique power-series branch `y(x)` of `h` through `P`
//    is owned by that factor, so `G(x, y(x)) = 0` identically. Whether some
//    nonzero polynomial of total degree at most `E` vanishes on the branch
//    to high order is a linear (Hermite-Pade) condition on its coefficients;
//    if only zero does, no small factor passes through any rational point of
//    the line. Lines whose nonlinear subset sums intersect trivially then
//    finish the argument.
//
// A `true` answer is sound; `false` means inconclusive, never "reducible".

/// Restriction of `h` to the line `Y = c X + a`, by Horner in `Y`.
fn specialize_line(ctx: &PrimeContext, h: &Dense, c: u64, a: u64) -> UPoly {
    let mut res: Vec<u64> = Vec::new();
    for col in h.cols.iter().rev() {
        // res = res * (c t + a) + col
        let mut next = vec![0u64; res.len() + 1];
        for (i, &v) in res.iter().enumerate() {
            next[i] = ctx.add(next[i], ctx.mul(v, a));
            next[i + 1] = ctx.add(next[i + 1], ctx.mul(v, c));
        }
        for (i, &v) in col.0.iter().enumerate() {
            if i < next.len() {
                next[i] = ctx.add(next[i], v);
            } else {
                next.push(v);
            }
        }
        while next.last() == Some(&0) {
            next.pop();
        }
        res = next;
    }
    UPoly(res)
}

/// Coefficient columns `u_j(X)` of `sum_j u_j(X) Y^j`, skipping zero columns
/// so that sparse inputs evaluate in time proportional to their support.
struct TermCols {
    cols: Vec<(u32, UPoly)>,
}

impl TermCols {
    fn from_sparse(ctx: &PrimeContext, poly: &BivariatePolynomial) -> (TermCols, TermCols) {
        let mut cols: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
        for (&(i, j), &v) in poly.terms() {
            let col = cols.entry(j).or_default();
            if col.len() <= i as usize {
                col.resize(i as usize + 1, 0);
            }
            col[i as usize] = v;
        }
        let f = TermCols {
            cols: cols.iter().map(|(&j, c)| (j, UPoly(c.clone()))).collect(),
        };
        let fy = TermCols {
            cols: cols
                .iter()
                .filter(|&(&j, _)| j >= 1)
                .map(|(&j, c)| (j - 1, UPoly(c.clone()).scale(ctx, j as u64 % ctx.p())))
                .filter(|(_, u)| !u.is_zero())
                .collect(),
        };
        (f, fy)
    }

    fn from_dense(ctx: &PrimeContext, h: &Dense) -> (TermCols, TermCols) {
        let f = TermCols {
            cols: h
                .cols
                .iter()
                .enumerate()
                .filter(|(_, u)| !u.is_zero())
                .map(|(j, u)| (j as u32, u.clone()))
                .collect(),
        };
        let fy = TermCols {
            cols: h
                .cols
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, u)| (j as u32 - 1, u.scale(ctx, j as u64 % ctx.p())))
                .filter(|(_, u)| !u.is_zero())
                .collect(),
        };
        (f, fy)
    }

    fn eval(&self, ctx: &PrimeContext, x0: u64, y0: u64) -> u64 {
        let mut acc = 0u64;
        for (j, u) in &self.cols {
            acc = ctx.add(acc, ctx.mul(u.eval(ctx, x0), ctx.pow(y0, *j as u64)));
        }
        acc
    }

    /// Taylor expansions of the columns at `x = t0`, to precision `m`.
    fn taylor(&self, ctx: &PrimeContext, t0: u64, m: usize) -> Vec<(u32, Series)> {
        self.cols
            .iter()
            .map(|(j, u)| (*j, taylor_prefix(ctx, u, t0, m)))
            .collect()
    }
}

/// `y^e` with shared memoization of intermediate powers.
fn series_pow_memo(
    ctx: &PrimeContext,
    y: &Series,
    e: u32,
    m: usize,
    memo: &mut HashMap<u32, Series>,
) -> Series {
    if e == 0 {
        let mut one = vec![0u64; m];
        one[0] = 1;
        return one;
    }
    if e == 1 {
        return y[..m.min(y.len())].to_vec();
    }
    if let Some(v) = memo.get(&e) {
        return v.clone();
    }
    let half = series_pow_memo(ctx, y, e / 2, m, memo);
    let mut v = series_mul(ctx, &half, &half, m);
    if e % 2 == 1 {
        v = series_mul(ctx, &v, y, m);
    }
    memo.insert(e, v.clone());
    v
}

/// Evaluate `sum_j u_j(t0 + xi) y(xi)^j` to precision `m`, by Horner over
/// the exponent gaps of the nonzero columns.
fn eval_cols_at_series(
    ctx: &PrimeContext,
    tays: &[(u32, Series)],
    y: &Series,
    m: usize,
) -> Series {
    let mut memo: HashMap<u32, Series> = HashMap::new();
    let mut acc: Option<Series> = None;
    let mut prev_j = 0u32;
    for (j, tay) in tays.iter().rev() {
        acc = Some(match acc {
            None => tay[..m.min(tay.len())].to_vec(),
            Some(cur) => {
                let gap = prev_j - j;
                let pw = series_pow_memo(ctx, y, gap, m, &mut memo);
                let mut next = series_mul(ctx, &cur, &pw, m);
                for (t, &v) in tay.iter().take(m).enumerate() {
                    next[t] = ctx.add(next[t], v);
                }
                next
            }
        });
        prev_j = *j;
    }
    let mut out = acc.unwrap_or_else(|| vec![0u64; m]);
    out.resize(m, 0);
    if prev_j > 0 {
        let pw = series_pow_memo(ctx, y, prev_j, m, &mut memo);
        out = series_mul(ctx, &out, &pw, m);
    }
    out
}

/// The power-series branch of `F` through the simple point `(t0, y0)`, as a
/// series in `xi = x - t0`, by Newton iteration with doubling precision.
/// `ftay`/`fytay` are the column Taylor expansions of `F` and `dF/dY` at
/// `t0`; requires `F(t0, y0) = 0` and `dF/dY(t0, y0) != 0`.
fn branch_series(
    ctx: &PrimeContext,
    ftay: &[(u32, Series)],
    fytay: &[(u32, Series)],
    y0: u64,
    target: usize,
) -> Series {
    let mut y = vec![y0];
    let mut m = 1usize;
    while m < target {
        let m2 = (2 * m).min(target);
        y.resize(m2, 0);
        let fv = eval_cols_at_series(ctx, ftay, &y, m2);
        let fyv = eval_cols_at_series(ctx, fytay, &y, m2);
        let inv = series_inv(ctx, &fyv, m2);
        let delta = series_mul(ctx, &fv, &inv, m2);
        for t in 0..m2 {
            y[t] = ctx.sub(y[t], delta[t]);
        }
        m = m2;
    }
    y
}

/// Does a nonzero vector `(q_0, ..., q_{s-1})` with `deg q_i <= bounds[i]`
/// and `sum_i q_i f_i = 0 mod xi^order` exist? Iterative order basis with
/// degree shifts; the basis stays row reduced (pivots take the minimal
/// shifted degree, and shifted degrees are recomputed exactly after each
/// update), so "no basis row within the bounds" soundly means "no solution".
fn hermite_pade_exists(
    ctx: &PrimeContext,
    f: &[Series],
    bounds: &[usize],
    order: usize,
) -> bool {
    let s = f.len();
    let p = ctx.p();
    let mut res: Vec<Vec<u64>> = f
        .iter()
        .map(|fi| {
            let mut r = fi[..order.min(fi.len())].to_vec();
            r.resize(order, 0);
            r
        })
        .collect();
    // pi[i][j]: coefficient polynomial j of basis row i.
    let mut pi: Vec<Vec<Vec<u64>>> = (0..s)
        .map(|i| {
            let mut row = vec![Vec::new(); s];
            row[i] = vec![1u64];
            row
        })
        .collect();
    let sdeg = |row: &[Vec<u64>]| -> i64 {
        let mut d = i64::MIN;
        for (j, q) in row.iter().enumerate() {
            if let Some(k) = q.iter().rposition(|&v| v != 0) {
                d = d.max(k as i64 - bounds[j] as i64);
            }
        }
        d
    };
    let mut sd: Vec<i64> = (0..s).map(|i| -(bounds[i] as i64)).collect();
    for sigma in 0..order {
        let mut piv = usize::MAX;
        for i in 0..s {
            if res[i][sigma] != 0 && (piv == usize::MAX || sd[i] < sd[piv]) {
                piv = i;
            }
        }
        if piv == usize::MAX {
            continue;
        }
        let rp_inv = ctx.inv(res[piv][sigma]);
        for i in 0..s {
            if i == piv || res[i][sigma] == 0 {
                continue;
            }
            let c = ctx.mul(res[i][sigma], rp_inv);
            let cneg = p - c;
            // res_i -= c * res_piv (coordinates below sigma are zero).
            let (head, tail) = res.split_at_mut(i.max(piv));
            let (ri, rp) = if i < piv {
                (&mut head[i], &tail[0])
            } else {
                (&mut tail[0], &head[piv])
            };
            for t in sigma..order {
                ri[t] = (ri[t] + cneg * rp[t]) % p;
            }
            // pi_i -= c * pi_piv
            let (phead, ptail) = pi.split_at_mut(i.max(piv));
            let (qi, qp) = if i < piv {
                (&mut phead[i], &ptail[0])
            } else {
                (&mut ptail[0], &phead[piv])
            };
            for j in 0..s {
                if qp[j].is_empty() {
                    continue;
                }
                if qi[j].len() < qp[j].len() {
                    qi[j].resize(qp[j].len(), 0);
                }
                for (t, &v) in qp[j].iter().enumerate() {
                    qi[j][t] = ctx.sub(qi[j][t], ctx.mul(c, v));
                }
            }
            sd[i] = sdeg(&pi[i]);
        }
        for t in ((sigma + 1)..order).rev() {
            res[piv][t] = res[piv][t - 1];
        }
        res[piv][sigma] = 0;
        for q in pi[piv].iter_mut() {
            if !q.is_empty() {
                q.insert(0, 0);
            }
        }
        sd[piv] += 1;
    }
    sd.iter().any(|&v| v <= 0)
}

/// Degree pattern data of one degree-preserving line.
struct LineData {
    roots: Vec<(u64, u64)>,
    nonlinear: Vec<(usize, u32)>,
}

/// Largest candidate degree `E` within `1..=d/2`, requiring the mirrored
/// band `(E, d-E)` to be empty of candidates.
fn small_candidate_cut(cand: &[u64], d: usize) -> Option<usize> {
    let bit = |i: usize| cand[i / 64] >> (i % 64) & 1 == 1;
    let e = (1..=d / 2).rev().find(|&i| bit(i))?;
    if (e + 1..d - e).any(bit) {
        return None;
    }
    Some(e)
}

fn certify_irreducible_geometric(
    ctx: &PrimeContext,
    h: &Dense,
    seed: u64,
    orig: Option<&BivariatePolynomial>,
) -> bool {
    let p = ctx.p();
    let d = h.total_degree();
    if d < 4 || h.deg_y() == 0 || (p as usize) < 5 {
        return false;
    }
    let debug = std::env::var_os("BINSUM_GEOM_DEBUG").is_some();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c69_6e65);
    let words = d / 64 + 1;
    let mut cand = vec![u64::MAX; words];
    cand[0] &= !1u64;
    for i in 0..words {
        let lo = i * 64;
        if lo + 63 >= d {
            let keep = d.saturating_sub(lo);
            cand[i] &= (1u64 << keep).wrapping_sub(1);
        }
    }
    let mut lines: Vec<LineData> = Vec::new();
    let mut seen: HashSet<(u64, u64)> = HashSet::new();
    let mut stale = 0;
    for _ in 0..60 {
        if lines.len() >= 8 {
            break;
        }
        let c = rng.gen_range(1..p);
        let a = rng.gen_range(0..p);
        if !seen.insert((c, a)) {
            continue;
        }
        let u = specialize_line(ctx, h, c, a);
        if u.deg() != d {
            continue;
        }
        let (_, parts) = upoly::factor(ctx, &u, &mut rng);
        let mut sums = vec![0u64; words];
        sums[0] = 1;
        let mut roots = Vec::new();
        let mut nonlinear = Vec::new();
        for (g, mult) in &parts {
            for _ in 0..*mult {
                sums = or_shifted(&sums, g.deg(), d);
            }
            if g.deg() == 1 {
                let t0 = ctx.neg(g.0[0]);
                roots.push((t0, ctx.add(ctx.mul(c, t0), a)));
            } else {
                nonlinear.push((g.deg(), *mult));
            }
        }
        let mut changed = false;
        for i in 0..words {
            let before = cand[i];
            cand[i] &= sums[i];
            changed |= cand[i] != before;
        }
        cand[0] &= !1u64;
        if debug {
            let ncand: u32 = cand.iter().map(|w| w.count_ones()).sum();
            eprintln!(
                "geom line c={c} a={a}: roots={} nl={:?} cand={ncand}",
                roots.len(),
                nonlinear
            );
        }
        if cand.iter().all(|&w| w == 0) {
            return true;
        }
        lines.push(LineData { roots, nonlinear });
        stale = if changed { 0 } else { stale + 1 };
        if stale >= 3 && lines.len() >= 3 {
            break;
        }
    }
    // Branch-exclusion phase for the surviving small degrees.
    let Some(e_max) = small_candidate_cut(&cand, d) else {
        if debug {
            eprintln!("geom: no clean small/mirror split, giving up");
        }
        return false;
    };
    if debug {
        eprintln!("geom: d={d} e_max={e_max}");
    }
    if e_max > 64 {
        return false;
    }
    let bit = |i: usize| cand[i / 64] >> (i % 64) & 1 == 1;
    let mut small: Vec<bool> = (0..=e_max).map(|e| e >= 1 && bit(e)).collect();
    let sparse_eval = orig.map(|f| TermCols::from_sparse(ctx, f));
    let dense_eval = TermCols::from_dense(ctx, h);
    // Taylor caches per expansion point, per evaluator.
    let mut tay_sparse: HashMap<u64, (Vec<(u32, Series)>, Vec<(u32, Series)>)> = HashMap::new();
    let mut tay_dense: HashMap<u64, (Vec<(u32, Series)>, Vec<(u32, Series)>)> = HashMap::new();
    let mut excluded: HashSet<(u64, u64)> = HashSet::new();
    for line in &lines {
        if small.iter().all(|&b| !b) {
            return true;
        }
        let e_cur = small.iter().rposition(|&b| b).unwrap();
        let unknowns = (e_cur + 1) * (e_cur + 2) / 2;
        let order = unknowns + 4 * (e_cur + 1);
        let mut usable = true;
        for &(t0, y0) in &line.roots {
            // Prefer the sparse evaluator; fall back to the (slower) dense
            // one at points where an already-stripped factor also vanishes.
            let use_sparse = match &sparse_eval {
                Some((_, fy)) => fy.eval(ctx, t0, y0) != 0,
                None => false,
            };
            if !use_sparse && dense_eval.1.eval(ctx, t0, y0) == 0 {
                // Multiple root: no unique branch through this point.
                usable = false;
                break;
            }
            if excluded.contains(&(t0, y0)) {
                continue;
            }
            let (ftay, fytay) = if use_sparse {
                let (fe, fye) = sparse_eval.as_ref().unwrap();
                let entry = tay_sparse.entry(t0).or_insert_with(|| {
                    (fe.taylor(ctx, t0, order), fye.taylor(ctx, t0, order))
                });
                (&entry.0, &entry.1)
            } else {
                let entry = tay_dense.entry(t0).or_insert_with(|| {
                    (
                        dense_eval.0.taylor(ctx, t0, order),
                        dense_eval.1.taylor(ctx, t0, order),
                    )
                });
                (&entry.0, &entry.1)
            };
            let y = branch_series(ctx, ftay, fytay, y0, order);
            debug_assert!(
                eval_cols_at_series(ctx, ftay, &y, order).iter().all(|&v| v == 0),
                "branch does not satisfy its defining equation"
            );
            let mut powers: Vec<Series> = Vec::with_capacity(e_cur + 1);
            let mut one = vec![0u64; order];
            one[0] = 1;
            powers.push(one);
            for j in 1..=e_cur {
                powers.push(series_mul(ctx, &powers[j - 1], &y, order));
            }
            let bounds: Vec<usize> = (0..=e_cur).map(|j| e_cur - j).collect();
            if hermite_pade_exists(ctx, &powers, &bounds, order) {
                // Some small polynomial vanishes on this branch to high
                // order: possibly a genuine factor, leave it to the engine.
                if debug {
                    eprintln!("geom: branch at ({t0},{y0}) admits a small annihilator");
                }
                return false;
            }
            excluded.insert((t0, y0));
        }
        if !usable {
            continue;
        }
        // No small factor passes through a rational point of this line, so
        // its degree shows up among the nonlinear subset sums.
        let mut nl = vec![false; e_cur + 1];
        nl[0] = true;
        for &(dg, mult) in &line.nonlinear {
            for _ in 0..mult {
                if dg > e_cur {
                    break;
                }
                for i in (0..=e_cur - dg).rev() {
                    if nl[i] {
                        nl[i + dg] = true;
                    }
                }
            }
        }
        for e in 1..=e_cur {
            if small[e] && !nl[e] {
                small[e] = false;
            }
        }
        if debug {
            let live: Vec<usize> = (1..=e_cur).filter(|&e| small[e]).collect();
            eprintln!("geom: after line, surviving small degrees {live:?}");
        }
    }
    small.iter().all(|&b| !b)
}

// ---------------------------------------------------------------------------
// Logarithmic-derivative irreducibility certificate
// ---------------------------------------------------------------------------

/// First `m` Taylor coefficients of `u` at `x = a`, by repeated synthetic
/// division. Costs `O(deg(u) * m)` instead of the full `O(deg(u)^2)`
/// translation.
fn taylor_prefix(ctx: &PrimeContext, u: &UPoly, a: u64, m: usize) -> Series {
    let mut w = u.0.clone();
    let mut out = vec![0u64; m];
    for slot in out.iter_mut() {
        if w.is_empty() {
            break;
        }
        let mut carry = 0u64;
        for c in w.iter_mut().rev() {
            *c = ctx.add(*c, ctx.mul(carry, a));
            carry = *c;
        }
        *slot = w[0];
        w.remove(0);
    }
    out
}

/// Irreducibility certificate from logarithmic derivatives of the analytic
/// factorizations at several expansion points.
///
/// For a factor `G` of `h`, the rational function `h * dG/dY / G` is a
/// polynomial of X-degree at most `deg_x(h)`. At a point `x = a` with unit
/// leading coefficient and squarefree specialization, `h` splits into monic
/// local factors over `F_p[[x - a]]`, and `G` selects a subset `S` of them,
/// so the expansion of `h * dG/dY / G` is the 0/1 combination
/// `sum_{i in S} (h / f_i) * df_i/dY` of per-factor expansions. Once the
/// combined precision over all points exceeds `deg_x(h)`, "the combination
/// is a polynomial of degree <= deg_x(h)" becomes a system of linear
/// conditions on the selection vector. The all-ones vector (`G = h`) always
/// satisfies it; if the solution space has dimension exactly one, no proper
/// factor exists. A `true` answer is therefore sound over any field; `false`
/// means inconclusive, never "reducible".
fn certify_irreducible_logderiv(ctx: &PrimeContext, h: &Dense, rng: &mut ChaCha8Rng) -> bool {
    let d = h.deg_y();
    let dx = h.deg_x();
    if d < 2 || !h.content_y(ctx).is_constant() {
        return false;
    }
    let p = ctx.p();
    // Admissible expansion points: unit leading coefficient and squarefree
    // specialization (anything else has no clean analytic factorization).
    let mut points: Vec<u64> = Vec::new();
    for a in 0..p {
        if h.lc_y().eval(ctx, a) == 0 {
            continue;
        }
        let u = h.specialize(ctx, a);
        if upoly::gcd(ctx, &u, &u.derivative(ctx)).is_constant() {
            points.push(a);
        }
    }
    if points.is_empty() {
        return false;
    }

    // Each extra point adds unknowns (its local factors) but divides the
    // per-point lifting precision; balance lifting against the final rank
    // computation using the factor count at the first point as an estimate.
    let (_, f0) = upoly::factor(ctx, &h.specialize(ctx, points[0]), rng);
    if f0.len() == 1 {
        return true; // irreducible specialization of full degree
    }
    let sigma = f0.len();
    let pextra = 2 * p as usize + 16;
    // Cost model per candidate point count `t` (in rough operation units):
    // each extra point costs one univariate factorization (~d^3), per-point
    // lifting is quasi-linear in the jet size d*m thanks to the transform
    // fast paths, the per-factor quotients cost a schoolbook division, and
    // the rank computation is cubic in the column count.
    let mut best = (1usize, f64::INFINITY);
    for t in 1..=points.len().min(24) {
        let q = 8usize.max((sigma * t + 64) / d + 4) + pextra;
        let m = (dx + q) / t + 1;
        let dm = (d * m) as f64;
        let fac = (t - 1) as f64 * 1.5 * (d as f64).powi(3);
        let lift = t as f64 * 60.0 * dm * (dm.log2() + 1.0) * ((sigma as f64).log2() + 1.0);
        let quo = t as f64 * 0.1 * (d * d) as f64 * series_mul_cost(m);
        let rank = ((sigma * t) as f64).powi(3);
        let total = fac + lift + quo + rank;
        if total < best.1 {
            best = (t, total);
        }
    }
    let t = best.0;

    let mut locals: Vec<(u64, Vec<UPoly>)> = Vec::with_capacity(t);
    locals.push((points[0], f0.into_iter().map(|(f, _)| f).collect()));
    for &a in points.iter().take(t).skip(1) {
        let (_, fs) = upoly::factor(ctx, &h.specialize(ctx, a), rng);
        if fs.len() == 1 {
            return true;
        }
        locals.push((a, fs.into_iter().map(|(f, _)| f).collect()));
    }
    let cols: usize = locals.iter().map(|(_, fs)| fs.len()).sum();
    if cols > 6_000 {
        return false; // rank computation would dominate everything else
    }
    // In characteristic p the kernel can contain spurious vectors that are
    // only visible at limited precision; a margin growing with p clears them
    // in practice, and one escalation retry covers the stragglers. The
    // functional count is capped: past `qp_cap` the extra conditions per
    // Y-power are redundant long before the Y-powers run out.
    let qp_cap = 8usize.max((cols + 64) / d + 4);
    let extra = qp_cap + pextra;
    if std::env::var("BINSUM_LD_DEBUG").is_ok() {
        eprintln!("logderiv start: d={d} dx={dx} sigma={sigma} t={t} cols={cols}");
    }
    // Escalation ladder: a lean top window first, then the full window, then
    // the full window at doubled precision.
    let jwin0 = 64usize.max(3 * cols / qp_cap + 1);
    let mut rounds = vec![(extra, jwin0)];
    if jwin0 < d {
        rounds.push((extra, d));
    }
    rounds.push((2 * extra + d / 4, d));
    for (e, w) in rounds {
        if logderiv_round(ctx, h, &locals, cols, e, qp_cap, w) {
            return true;
        }
    }
    false
}

/// One precision round of the log-derivative certificate: lift to combined
/// precision `deg_x + 1 + extra`, generate the residue conditions, and check
/// whether the solution space is exactly the all-ones line.
fn logderiv_round(
    ctx: &PrimeContext,
    h: &Dense,
    locals: &[(u64, Vec<UPoly>)],
    cols: usize,
    extra: usize,
    qp_cap: usize,
    jwin: usize,
) -> bool {
    let p = ctx.p();
    let d = h.deg_y();
    let dx = h.deg_x();
    let t = locals.len();
    let m = (dx + 1 + extra + t - 1) / t;
    let mtot = m * t;
    let qp = (mtot - dx - 1).min(qp_cap);

    // Residue functionals: for c < qp and any polynomial P of degree <= dx,
    // sum_s Res_{x=a_s}( P(x) x^c / prod_j (x - a_j)^m ) = -Res_infinity = 0,
    // and against x^{dx+1}, ..., x^{dx+qp} the matrix of these functionals is
    // triangular with unit antidiagonal, so they span the annihilator of the
    // admissible polynomials. Each residue is a linear functional of the
    // order-m jet at a_s.
    let mut nfun: Vec<Vec<u64>> = Vec::with_capacity(t);
    for (s, &(a, _)) in locals.iter().enumerate() {
        let mut dprod = vec![0u64; m];
        dprod[0] = 1;
        for (s2, &(a2, _)) in locals.iter().enumerate() {
            if s2 == s {
                continue;
            }
            let mut lin = vec![0u64; m];
            lin[0] = ctx.sub(a, a2);
            if m > 1 {
                lin[1] = 1;
            }
            for _ in 0..m {
                dprod = series_mul(ctx, &dprod, &lin, m);
            }
        }
        let mut g = series_inv(ctx, &dprod, m);
        let mut rows = vec![0u64; qp * m];
        for c in 0..qp {
            for r in 0..m {
                rows[c * m + r] = g[m - 1 - r];
            }
            // g <- g * (x_local + a), the expansion of x^{c+1} / prod(..).
            for i in (0..m).rev() {
                let lower = if i > 0 { g[i - 1] } else { 0 };
                g[i] = ctx.add(ctx.mul(g[i], a), lower);
            }
        }
        nfun.push(rows);
    }

    // Lift the local factorizations and condense each per-factor expansion
    // (h / f_i) * df_i/dY down to its functional values, indexed by the pair
    // (Y-power j, functional c).
    // Y-coefficients of each expansion are taken from a top window: the
    // conditions are heavily redundant (a handful of Y-degrees already
    // covers the column count), and the top of the quotient is the cheap
    // end of the division.
    let jmax = d;
    let jlo = jmax.saturating_sub(jwin);
    let nrows = (jmax - jlo) * qp;
    let budget = u64::MAX - p * p;
    let debug = std::env::var("BINSUM_LD_DEBUG").is_ok();
    let mut cond: Vec<Vec<u32>> = Vec::with_capacity(cols);
    for (s, (a, fs)) in locals.iter().enumerate() {
        let t_point = std::time::Instant::now();
        let ht = SPoly {
            c: h
                .cols
                .iter()
                .map(|u| taylor_prefix(ctx, u, *a, m))
                .collect(),
        }
        .normalize();
        let l = taylor_prefix(ctx, h.lc_y(), *a, m);
        let linv = series_inv(ctx, &l, m);
        let hmonic = ht.scale_series(ctx, &linv, m);
        let lifted = hensel_lift_tree(ctx, &hmonic, fs, m);
        let t_lift = t_point.elapsed();
        for fi in &lifted {
            let dgf = fi.c.len() - 1;
            let fd = fi.derivative_y(ctx);
            let kstop = (jlo + 1).saturating_sub(dgf);
            let quot = ht.div_top_monic(ctx, fi, m, kstop);
            let mut vals = vec![0u32; nrows];
            let mut nu_j = vec![0u64; m];
            for j in jlo..jmax {
                // nu_j = coefficient of Y^j in (ht / fi) * dfi/dY
                for x in nu_j.iter_mut() {
                    *x = 0;
                }
                for (r, fr) in fd.c.iter().enumerate() {
                    if j >= r && j - r < quot.c.len() {
                        let prod = series_mul(ctx, &quot.c[j - r], fr, m);
                        for t in 0..m {
                            nu_j[t] = ctx.add(nu_j[t], prod[t]);
                        }
                    }
                }
                for c in 0..qp {
                    let mut acc = 0u64;
                    for (r, &v) in nu_j.iter().enumerate() {
                        acc += nfun[s][c * m + r] * v;
                        if acc > budget {
                            acc %= p;
                        }
                    }
                    vals[(j - jlo) * qp + c] = (acc % p) as u32;
                }
            }
            cond.push(vals);
        }
        if debug {
            eprintln!(
                "logderiv point a={a} m={m} factors={} lift={:.2?} total={:.2?}",
                fs.len(),
                t_lift,
                t_point.elapsed()
            );
            #[cfg(feature = "prof")]
            prof::dump();
        }
    }
    let t_rank = std::time::Instant::now();

    // Rank of the condition matrix. The all-ones vector is always in the
    // kernel, so the rank is at most cols - 1; reaching that proves the
    // kernel is exactly the scalar multiples of all-ones.
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    let reduce_every = (u64::MAX / (p * p)).max(1) as usize;
    for row_id in 0..nrows {
        let mut row: Vec<u64> = cond.iter().map(|v| v[row_id] as u64).collect();
        debug_assert_eq!(
            row.iter().sum::<u64>() % p,
            0,
            "all-ones selection must satisfy every condition"
        );
        let mut since_reduce = 0usize;
        for (piv, b) in &basis {
            let f = row[*piv] % p;
            if f == 0 {
                continue;
            }
            let mult = p - f;
            for (x, y) in row.iter_mut().zip(b) {
                *x += mult * *y;
            }
            since_reduce += 1;
            if since_reduce >= reduce_every {
                for x in row.iter_mut() {
                    *x %= p;
                }
                since_reduce = 0;
            }
        }
        for x in row.iter_mut() {
            *x %= p;
        }
        if let Some(piv) = row.iter().position(|&x| x != 0) {
            let inv = ctx.inv(row[piv]);
            for x in row.iter_mut() {
                *x = ctx.mul(*x, inv);
            }
            basis.push((piv, row));
            if basis.len() + 1 == cols {
                if debug {
                    eprintln!("logderiv rank full after {:.2?}", t_rank.elapsed());
                }
                return true;
            }
        }
    }

    // The kernel still has extra dimensions. True factors always correspond
    // to 0/1 kernel vectors, so if the kernel (a superset of the exact
    // solution space) contains no proper 0/1 vector, `h` is irreducible all
    // the same; spurious char-p solutions usually have scattered values.
    let dim = cols - basis.len();
    if (p as f64).powi(dim as i32) > 3.0e7 {
        if std::env::var("BINSUM_LD_DEBUG").is_ok() {
            eprintln!(
                "logderiv round inconclusive: d={d} dx={dx} t={t} m={m} qp={qp} cols={cols} rank={} dim={dim}",
                basis.len()
            );
        }
        return false;
    }
    basis.sort_by_key(|(piv, _)| *piv);
    let mut is_pivot = vec![false; cols];
    for (piv, _) in &basis {
        is_pivot[*piv] = true;
    }
    let free: Vec<usize> = (0..cols).filter(|&c| !is_pivot[c]).collect();
    debug_assert_eq!(free.len(), dim);
    // Kernel basis by back-substitution through the (non-reduced) echelon.
    let mut kernel: Vec<Vec<u64>> = Vec::with_capacity(dim);
    for &f in &free {
        let mut v = vec![0u64; cols];
        v[f] = 1;
        for (piv, row) in basis.iter().rev() {
            let mut acc = 0u64;
            for (c, &rc) in row.iter().enumerate().skip(piv + 1) {
                if v[c] != 0 {
                    acc = ctx.add(acc, ctx.mul(rc, v[c]));
                }
            }
            v[*piv] = ctx.neg(acc);
        }
        kernel.push(v);
    }
    debug_assert!(kernel
        .iter()
        .all(|v| logderiv_in_kernel_check(ctx, &basis, v)));
    // Enumerate the span looking for a proper 0/1 vector.
    let mut coeffs = vec![0u64; dim];
    'combos: loop {
        // advance the odometer
        let mut pos = 0;
        loop {
            if pos == dim {
                break 'combos;
            }
            coeffs[pos] += 1;
            if coeffs[pos] < p {
                break;
            }
            coeffs[pos] = 0;
            pos += 1;
        }
        let mut all_zero = true;
        let mut all_one = true;
        for c in 0..cols {
            let mut x = 0u64;
            for (i, &a) in coeffs.iter().enumerate() {
                if a != 0 {
                    x = ctx.add(x, ctx.mul(a, kernel[i][c]));
                }
            }
            if x > 1 {
                continue 'combos;
            }
            all_zero &= x == 0;
            all_one &= x == 1;
        }
        if !all_zero && !all_one {
            // A proper 0/1 kernel vector: possibly a genuine factor.
            if std::env::var("BINSUM_LD_DEBUG").is_ok() {
                eprintln!(
                    "logderiv round found 0/1 kernel vector: d={d} dx={dx} t={t} m={m} cols={cols} dim={dim}"
                );
            }
            return false;
        }
    }
    true
}

#[cfg(debug_assertions)]
fn logderiv_in_kernel_check(
    ctx: &PrimeContext,
    basis: &[(usize, Vec<u64>)],
    v: &[u64],
) -> bool {
    basis.iter().all(|(_, row)| {
        let mut acc = 0u64;
        for (x, y) in row.iter().zip(v) {
            acc = ctx.add(acc, ctx.mul(*x, *y));
        }
        acc == 0
    })
}

#[cfg(not(debug_assertions))]
fn logderiv_in_kernel_check(_: &PrimeContext, _: &[(usize, Vec<u64>)], _: &[u64]) -> bool {
    true
}

// ---------------------------------------------------------------------------
// The Hensel + recombination engine (squarefree primitive input)
// ---------------------------------------------------------------------------

/// Factor one squarefree component with trivial content in both variables.
/// The certificates run first; the engine handles genuine splits, and a
/// partial split (budgeted recombination) recurses on the cofactor so that a
/// large cofactor is re-certified instead of recombined exhaustively.
fn factor_component(
    ctx: &PrimeContext,
    h: &Dense,
    seed: u64,
    rng: &mut ChaCha8Rng,
    orig: Option<&BivariatePolynomial>,
) -> Result<Vec<Dense>> {
    if h.deg_y() == 0 || h.is_constant() {
        // Trivial content means this can only be a constant.
        return Ok(Vec::new());
    }
    if h.deg_y() == 1 {
        // a(X) Y + b(X) with gcd(a, b) = 1: irreducible.
        return Ok(vec![h.clone()]);
    }
    if certify_component(ctx, h, seed, rng, orig) {
        return Ok(vec![h.clone()]);
    }
    factor_squarefree(ctx, h, seed, rng, orig)
}

/// Irreducibility certificates in cost order: the specialization-pattern
/// sieve is cheapest when the degree is small relative to `p`, and for the
/// large structured remainders the line-geometry certificate avoids both the
/// per-point cost of the sieve and the high-precision lifts of the
/// log-derivative certificate. `orig` is a known polynomial multiple of `h`
/// (typically the sparse input before trivial factors were stripped), used
/// only to evaluate along power-series branches cheaply.
fn certify_component(
    ctx: &PrimeContext,
    h: &Dense,
    seed: u64,
    rng: &mut ChaCha8Rng,
    orig: Option<&BivariatePolynomial>,
) -> bool {
    let big = h.deg_y().min(h.deg_x()) as u64 > 2 * ctx.p();
    if big {
        certify_irreducible_geometric(ctx, h, seed, orig)
            || certify_irreducible_logderiv(ctx, h, rng)
            || certify_irreducible(ctx, h, seed)
    } else {
        certify_irreducible(ctx, h, seed)
            || certify_irreducible_logderiv(ctx, h, rng)
            || certify_irreducible_geometric(ctx, h, seed, orig)
    }
}

/// Engine driver for a squarefree component the certificates could not
/// settle. Returns irreducible dense factors (up to scalars).
fn factor_squarefree(
    ctx: &PrimeContext,
    h: &Dense,
    seed: u64,
    rng: &mut ChaCha8Rng,
    orig: Option<&BivariatePolynomial>,
) -> Result<Vec<Dense>> {
    // Orientation attempts: identity, swap, then shears in each orientation.
    // Shears are priced out for large inputs (substitution cost grows like
    // degree cubed); those rely on partial splits plus recursion instead.
    let p = ctx.p();
    let mut attempts: Vec<(bool, u64)> = vec![(false, 0), (true, 0)];
    if h.total_degree() <= 200 {
        for a in 1..p.min(9) {
            attempts.push((false, a));
            attempts.push((true, a));
        }
    }
    for (swapped, shear) in attempts {
        let mut cur = if swapped { h.transpose(ctx) } else { h.clone() };
        if shear != 0 {
            cur = shear_x(ctx, &cur, shear);
        }
        if let Some((factors, leftover)) = try_factor_oriented(ctx, &cur, rng) {
            // Undo the transform on each factor.
            let undo = |f: Dense| {
                let mut g = f;
                if shear != 0 {
                    g = shear_x(ctx, &g, ctx.neg(shear));
                }
                if swapped {
                    g = g.transpose(ctx);
                }
                g
            };
            let mut out: Vec<Dense> = factors.into_iter().map(undo).collect();
            if let Some(rem) = leftover {
                out.extend(factor_component(ctx, &undo(rem), seed, rng, orig)?);
            }
            return Ok(out);
        }
    }
    Err(Error::UnluckySpecialization)
}

/// `X -> X + a Y`.
fn shear_x(ctx: &PrimeContext, f: &Dense, a: u64) -> Dense {
    let sparse = f.to_sparse(ctx);
    let sub = BivariatePolynomial::from_terms(ctx, [((1, 0), 1), ((0, 1), a)]);
    let mut acc = BivariatePolynomial::zero(ctx);
    for (&(i, j), &c) in sparse.terms() {
        let term = sub
            .pow(ctx, i)
            .mul(ctx, &BivariatePolynomial::from_terms(ctx, [((0, j), c)]));
        acc = acc.add(ctx, &term);
    }
    Dense::from_sparse(&acc)
}

fn try_factor_oriented(
    ctx: &PrimeContext,
    h: &Dense,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<Dense>, Option<Dense>)> {
    let d = h.deg_y();
    // Find up to three usable specialization points and keep the one whose
    // specialization has the fewest irreducible factors.
    let mut best: Option<(u64, Vec<UPoly>, u64)> = None; // (x0, monic factors, unit)
    let mut seen = 0;
    for x0 in 0..ctx.p() {
        if h.lc_y().eval(ctx, x0) == 0 {
            continue;
        }
        let u = h.specialize(ctx, x0);
        if u.deg() != d {
            continue;
        }
        let du = u.derivative(ctx);
        if !upoly::gcd(ctx, &u, &du).is_constant() {
            continue;
        }
        let (unit, factors) = upoly::factor(ctx, &u, rng);
        let flat: Vec<UPoly> = factors.into_iter().map(|(f, _)| f).collect();
        let better = best.as_ref().map_or(true, |(_, bf, _)| flat.len() < bf.len());
        if better {
            best = Some((x0, flat, unit));
        }
        seen += 1;
        if seen >= 3 || best.as_ref().unwrap().1.len() == 1 {
            break;
        }
    }
    let (x0, uni_factors, _unit) = best?;
    if uni_factors.len() == 1 {
        // Irreducible specialization of full degree: h is irreducible.
        return Some((vec![h.clone()], None));
    }

    // Work at the origin: translate X by x0.
    let ht = h.translate_x(ctx, x0);
    let m = ht.deg_x() + ht.lc_y().deg() + 1;
    let l = series_from(ht.lc_y(), m);
    let linv = series_inv(ctx, &l, m);
    let f_monic = SPoly::from_dense(&ht, m).scale_series(ctx, &linv, m);
    let lifted = hensel_lift_tree(ctx, &f_monic, &uni_factors, m);

    let (factors_t, leftover_t) = match recombine(ctx, ht, lifted, m) {
        Recombined::Done(f) => (f, None),
        Recombined::Partial(f, rem) => (f, Some(rem)),
        Recombined::Stuck => return None,
    };
    let back = |f: Dense| f.translate_x(ctx, ctx.neg(x0));
    Some((
        factors_t.into_iter().map(back).collect(),
        leftover_t.map(back),
    ))
}

enum Recombined {
    /// Fully recombined into irreducible factors.
    Done(Vec<Dense>),
    /// Budget ran out after splitting off some verified factors; the cofactor
    /// needs another pass.
    Partial(Vec<Dense>, Dense),
    /// Budget ran out with nothing found.
    Stuck,
}

/// Zassenhaus recombination over the lifted factors.
fn recombine(ctx: &PrimeContext, mut hcur: Dense, mut active: Vec<SPoly>, m: usize) -> Recombined {
    let mut out = Vec::new();
    let mut size = 1usize;
    // Exhausting all subsets is exponential in the worst case; a capped
    // budget turns a pathological input into a partial split (every factor
    // pushed so far was verified by exact division) or an orientation retry.
    let mut budget = 50_000usize;
    'outer: while 2 * size <= active.len() {
        let mut combo = Combinations::new(active.len(), size);
        while let Some(sel) = combo.next() {
            budget -= 1;
            if budget == 0 {
                return if out.is_empty() {
                    Recombined::Stuck
                } else {
                    Recombined::Partial(out, hcur)
                };
            }
            // candidate = lc(hcur) * prod(active[sel])
            let lseries = series_from(hcur.lc_y(), m);
            let mut cand = SPoly::constant(lseries);
            for &i in sel {
                cand = cand.mul(ctx, &active[i], m);
            }
            let cd = cand.to_dense().primitive(ctx);
            if cd.is_constant() {
                continue;
            }
            if let Some(q) = hcur.exact_div(ctx, &cd) {
                out.push(cd);
                hcur = q;
                let mut keep = Vec::with_capacity(active.len() - size);
                for (i, f) in active.into_iter().enumerate() {
                    if !sel.contains(&i) {
                        keep.push(f);
                    }
                }
                active = keep;
                continue 'outer;
            }
        }
        size += 1;
    }
    if !hcur.is_constant() {
        out.push(hcur.primitive(ctx));
    }
    Recombined::Done(out)
}

/// Lexicographic fixed-size index combinations.
struct Combinations {
    n: usize,
    k: usize,
    cur: Vec<usize>,
    started: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            k,
            cur: (0..k).collect(),
            started: false,
        }
    }

    fn next(&mut self) -> Option<&[usize]> {
        if self.k > self.n {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.cur);
        }
        let mut i = self.k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if self.cur[i] != i + self.n - self.k {
                break;
            }
        }
        self.cur[i] += 1;
        for j in i + 1..self.k {
            self.cur[j] = self.cur[j - 1] + 1;
        }
        Some(&self.cur)
    }
}

// ---------------------------------------------------------------------------
// Top-level factorization
// ---------------------------------------------------------------------------

/// Factor with the default seed.
pub fn factor(ctx: &PrimeContext, poly: &BivariatePolynomial) -> Result<Factorization> {
    factor_with_seed(ctx, poly, DEFAULT_FACTOR_SEED)
}

/// Complete factorization into irreducibles over `F_p`, deterministic for a
/// fixed seed.
pub fn factor_with_seed(
    ctx: &PrimeContext,
    poly: &BivariatePolynomial,
    seed: u64,
) -> Result<Factorization> {
    assert!(!poly.is_zero(), "factor of the zero polynomial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = poly
        .lex_leading()
        .map(|(_, c)| c)
        .expect("nonzero polynomial");
    let mut factors: Vec<(Dense, u32)> = Vec::new();
    let mut h = Dense::from_sparse(poly);

    // Content in X direction: pure-X factors.
    let cy = h.content_y(ctx);
    if !cy.is_constant() {
        let (_, parts) = upoly::factor(ctx, &cy, &mut rng);
        for (u, mult) in parts {
            factors.push((Dense { cols: vec![u] }, mult));
        }
        h = h.div_content(ctx, &cy);
    }
    // Pure-Y factors via the transposed content.
    let ht = h.transpose(ctx);
    let cx = ht.content_y(ctx);
    if !cx.is_constant() {
        let (_, parts) = upoly::factor(ctx, &cx, &mut rng);
        for (u, mult) in parts {
            let g = Dense {
                cols: u.0.iter().map(|&c| UPoly::constant(c)).collect(),
            }
            .normalize();
            for _ in 0..mult {
                h = h.exact_div(ctx, &g).expect("content_x factor divides");
            }
            factors.push((g, mult));
        }
    }

    // Homogeneous factors shared by the extreme homogeneous parts.
    for (g, mult) in peel_homogeneous(ctx, &mut h, &mut rng) {
        factors.push((g, mult));
    }

    if !h.is_constant() {
        // The certificates are orders of magnitude cheaper than the lifting
        // engine, and the family remainders are usually irreducible: try
        // them first (a non-squarefree input can never be certified).
        if certify_component(ctx, &h, seed, &mut rng, Some(poly)) {
            factors.push((h, 1));
        } else {
            for (part, mult) in sqf_dense(ctx, &h) {
                for irr in factor_component(ctx, &part, seed, &mut rng, Some(poly))? {
                    factors.push((irr, mult));
                }
            }
        }
    }

    let mut out: Vec<(BivariatePolynomial, u32)> = factors
        .into_iter()
        .map(|(d, m)| (d.to_sparse(ctx).monic_lex(ctx).1, m))
        .collect();
    // Merge duplicates (a factor can appear through different peels).
    out.sort_by(|a, b| a.0.cmp_canonical(&b.0));
    let mut merged: Vec<(BivariatePolynomial, u32)> = Vec::with_capacity(out.len());
    for (f, m) in out {
        if let Some(last) = merged.last_mut() {
            if last.0 == f {
                last.1 += m;
                continue;
            }
        }
        merged.push((f, m));
    }

    let result = Factorization {
        unit,
        factors: merged,
        seed,
    };
    debug_assert!(
        poly.total_degree() > 40 || &result.expand(ctx) == poly,
        "factorization does not reconstruct input"
    );
    Ok(result)
}

/// Factors of the top and bottom homogeneous parts that divide the whole
/// polynomial (this is where `X + Y` and the factors of `X^r + Y^r` appear).
fn peel_homogeneous(
    ctx: &PrimeContext,
    h: &mut Dense,
    rng: &mut ChaCha8Rng,
) -> Vec<(Dense, u32)> {
    let sparse = h.to_sparse(ctx);
    if sparse.is_zero() || sparse.is_constant() {
        return Vec::new();
    }
    let dmax = sparse.total_degree();
    let dmin = sparse.terms().map(|(&(i, j), _)| i + j).min().unwrap_or(0);
    if dmin == 0 {
        return Vec::new();
    }
    // Dehomogenize the two extreme parts with Z = X/Y.
    let mut top = vec![0u64; dmax as usize + 1];
    let mut bot = vec![0u64; dmax as usize + 1];
    for (&(i, j), &c) in sparse.terms() {
        if i + j == dmax {
            top[i as usize] = c;
        }
        if i + j == dmin {
            bot[i as usize] = c;
        }
    }
    let g = upoly::gcd(
        ctx,
        &UPoly::from_coeffs(top),
        &UPoly::from_coeffs(bot),
    );
    if g.is_constant() {
        return Vec::new();
    }
    let (_, parts) = upoly::factor(ctx, &g, rng);
    let mut out = Vec::new();
    for (u, _) in parts {
        // Homogenize u(Z) -> Y^deg u(X/Y).
        let e = u.deg() as u32;
        let cand = Dense::from_sparse(&BivariatePolynomial::from_terms(
            ctx,
            u.0.iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| ((i as u32, e - i as u32), c)),
        ));
        let mut mult = 0u32;
        while let Some(q) = h.exact_div(ctx, &cand) {
            *h = q;
            mult += 1;
        }
        if mult > 0 {
            out.push((cand, mult));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Trivial-factor reports
// ---------------------------------------------------------------------------

/// Partition of a family factorization into the lemma-excluded trivial
/// factors and the nontrivial remainder, with the degree-bound data.
#[derive(Debug, Clone)]
pub struct FactorReport {
    pub p: u64,
    pub k: u64,
    pub n: u64,
    pub unit: u64,
    pub trivial: Vec<(BivariatePolynomial, u32)>,
    pub nontrivial: Vec<(BivariatePolynomial, u32)>,
    pub min_nontrivial_degree: Option<u32>,
    /// `min(p/n, n)` for the `k = 1` family, the max-min expression otherwise.
    pub degree_bound_value: f64,
    pub ratio: Option<f64>,
}

/// The excluded-list polynomials for the family of `pair`: `X-1, Y-1, X+Y`
/// when `k = 1`, otherwise the irreducible factors of `X^r-1`, `Y^r-1`,
/// `X^r+Y^r`.
pub fn trivial_candidates(ctx: &PrimeContext, pair: &ExponentPair) -> Vec<BivariatePolynomial> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_FACTOR_SEED);
    let mut out = Vec::new();
    if pair.k == 1 {
        out.push(BivariatePolynomial::from_terms(
            ctx,
            [((1, 0), 1), ((0, 0), ctx.neg(1))],
        ));
        out.push(BivariatePolynomial::from_terms(
            ctx,
            [((0, 1), 1), ((0, 0), ctx.neg(1))],
        ));
        out.push(BivariatePolynomial::from_terms(ctx, [((1, 0), 1), ((0, 1), 1)]));
        return out;
    }
    let r = pair.r as usize;
    // X^r - 1 and Y^r - 1.
    let mut xr = vec![0u64; r + 1];
    xr[0] = ctx.neg(1);
    xr[r] = 1;
    let (_, parts) = upoly::factor(ctx, &UPoly::from_coeffs(xr), &mut rng);
    for (u, _) in &parts {
        out.push(
            BivariatePolynomial::from_terms(
                ctx,
                u.0.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, &c)| ((i as u32, 0), c)),
            )
            .monic_lex(ctx)
            .1,
        );
        out.push(
            BivariatePolynomial::from_terms(
                ctx,
                u.0.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, &c)| ((0, i as u32), c)),
            )
            .monic_lex(ctx)
            .1,
        );
    }
    // X^r + Y^r via the factors of Z^r + 1, homogenized.
    let mut zr = vec![0u64; r + 1];
    zr[0] = 1;
    zr[r] = 1;
    let (_, parts) = upoly::factor(ctx, &UPoly::from_coeffs(zr), &mut rng);
    for (u, _) in &parts {
        let e = u.deg() as u32;
        out.push(
            BivariatePolynomial::from_terms(
                ctx,
                u.0.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, &c)| ((i as u32, e - i as u32), c)),
            )
            .monic_lex(ctx)
            .1,
        );
    }
    out.sort_by(|a, b| a.cmp_canonical(b));
    out.dedup();
    out
}

/// Split a family factorization into trivial and nontrivial factors and
/// evaluate the applicable degree-bound expression.
pub fn strip_trivial(
    ctx: &PrimeContext,
    pair: &ExponentPair,
    f: &Factorization,
) -> FactorReport {
    let candidates = trivial_candidates(ctx, pair);
    let mut trivial = Vec::new();
    let mut nontrivial = Vec::new();
    for (g, m) in &f.factors {
        if candidates.iter().any(|c| c == g) {
            trivial.push((g.clone(), *m));
        } else {
            nontrivial.push((g.clone(), *m));
        }
    }
    let p = ctx.p() as f64;
    let (kf, nf, rf) = (pair.k as f64, pair.n as f64, pair.r as f64);
    let degree_bound_value = if pair.k == 1 {
        (p / nf).min(nf)
    } else {
        let a = (p / kf).min((kf / 3.0).sqrt() - rf);
        let b = (p / nf).min((nf / 3.0).sqrt() - rf);
        a.max(b)
    };
    let min_nontrivial_degree = nontrivial.iter().map(|(g, _)| g.total_degree()).min();
    let ratio = min_nontrivial_degree.and_then(|d| {
        (degree_bound_value > 0.0).then(|| d as f64 / degree_bound_value)
    });
    FactorReport {
        p: ctx.p(),
        k: pair.k,
        n: pair.n,
        unit: f.unit,
        trivial,
        nontrivial,
        min_nontrivial_degree,
        degree_bound_value,
        ratio,
    }
}
