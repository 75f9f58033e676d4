//! Sparse bivariate polynomials over `F_p`.
//!
//! The exponent-to-coefficient map never stores zeros. The canonical text
//! form (terms by total degree, then X-degree, descending; coefficients as
//! symmetric residues) is what reports and golden tests compare against.

use std::collections::BTreeMap;
use std::fmt;

use crate::modarith::PrimeContext;
use crate::upoly::UPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BivariatePolynomial {
    p: u64,
    terms: BTreeMap<(u32, u32), u64>,
}

impl BivariatePolynomial {
    pub fn zero(ctx: &PrimeContext) -> Self {
        BivariatePolynomial {
            p: ctx.p(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &PrimeContext, c: u64) -> Self {
        let mut f = Self::zero(ctx);
        f.set(ctx, 0, 0, ctx.reduce(c));
        f
    }

    pub fn from_terms<I>(ctx: &PrimeContext, terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), u64)>,
    {
        let mut f = Self::zero(ctx);
        for ((i, j), c) in terms {
            f.add_term(ctx, i, j, c);
        }
        f
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &u64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&(i, j)| i == 0 && j == 0)
    }

    pub fn coeff(&self, i: u32, j: u32) -> u64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0)
    }

    fn set(&mut self, _ctx: &PrimeContext, i: u32, j: u32, c: u64) {
        if c == 0 {
            self.terms.remove(&(i, j));
        } else {
            self.terms.insert((i, j), c);
        }
    }

    pub fn add_term(&mut self, ctx: &PrimeContext, i: u32, j: u32, c: u64) {
        let cur = self.coeff(i, j);
        self.set(ctx, i, j, ctx.add(cur, ctx.reduce(c)));
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn deg_x(&self) -> u32 {
        self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> u32 {
        self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }

    pub fn add(&self, ctx: &PrimeContext, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        let mut out = self.clone();
        for (&(i, j), &c) in &other.terms {
            out.add_term(ctx, i, j, c);
        }
        out
    }

    pub fn neg(&self, ctx: &PrimeContext) -> Self {
        let mut out = Self::zero(ctx);
        for (&(i, j), &c) in &self.terms {
            out.set(ctx, i, j, ctx.neg(c));
        }
        out
    }

    pub fn sub(&self, ctx: &PrimeContext, other: &Self) -> Self {
        self.add(ctx, &other.neg(ctx))
    }

    pub fn scale(&self, ctx: &PrimeContext, c: u64) -> Self {
        let c = ctx.reduce(c);
        let mut out = Self::zero(ctx);
        if c == 0 {
            return out;
        }
        for (&(i, j), &a) in &self.terms {
            out.set(ctx, i, j, ctx.mul(a, c));
        }
        out
    }

    pub fn mul(&self, ctx: &PrimeContext, other: &Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        let mut out = Self::zero(ctx);
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &other.terms {
                out.add_term(ctx, i1 + i2, j1 + j2, ctx.mul(c1, c2));
            }
        }
        out
    }

    pub fn pow(&self, ctx: &PrimeContext, e: u32) -> Self {
        let mut acc = Self::constant(ctx, 1);
        for _ in 0..e {
            acc = acc.mul(ctx, self);
        }
        acc
    }

    pub fn eval(&self, ctx: &PrimeContext, x: u64, y: u64) -> u64 {
        // Exponents can be large for the sparse families; powers are cheap.
        let mut acc = 0u64;
        for (&(i, j), &c) in &self.terms {
            let t = ctx.mul(ctx.pow(x, i as u64), ctx.pow(y, j as u64));
            acc = ctx.add(acc, ctx.mul(c, t));
        }
        acc
    }

    /// Specialize `X = x0`, producing a univariate polynomial in `Y`.
    pub fn specialize_x(&self, ctx: &PrimeContext, x0: u64) -> UPoly {
        let mut out = vec![0u64; self.deg_y() as usize + 1];
        for (&(i, j), &c) in &self.terms {
            let v = ctx.mul(c, ctx.pow(x0, i as u64));
            out[j as usize] = ctx.add(out[j as usize], v);
        }
        UPoly::from_coeffs(out)
    }

    pub fn swap_vars(&self, ctx: &PrimeContext) -> Self {
        let mut out = Self::zero(ctx);
        for (&(i, j), &c) in &self.terms {
            out.set(ctx, j, i, c);
        }
        out
    }

    pub fn derivative_x(&self, ctx: &PrimeContext) -> Self {
        let mut out = Self::zero(ctx);
        for (&(i, j), &c) in &self.terms {
            if i > 0 {
                out.add_term(ctx, i - 1, j, ctx.mul(c, i as u64 % ctx.p()));
            }
        }
        out
    }

    pub fn derivative_y(&self, ctx: &PrimeContext) -> Self {
        let mut out = Self::zero(ctx);
        for (&(i, j), &c) in &self.terms {
            if j > 0 {
                out.add_term(ctx, i, j - 1, ctx.mul(c, j as u64 % ctx.p()));
            }
        }
        out
    }

    /// Leading term under lex order with X > Y.
    pub fn lex_leading(&self) -> Option<((u32, u32), u64)> {
        self.terms
            .iter()
            .max_by_key(|(&(i, j), _)| (i, j))
            .map(|(&k, &c)| (k, c))
    }

    /// Scale so the lex-leading coefficient is 1; returns the removed scalar.
    pub fn monic_lex(&self, ctx: &PrimeContext) -> (u64, Self) {
        match self.lex_leading() {
            None => (1, self.clone()),
            Some((_, c)) if c == 1 => (1, self.clone()),
            Some((_, c)) => (c, self.scale(ctx, ctx.inv(c))),
        }
    }

    /// Deterministic ordering for factor lists: total degree, then the sorted
    /// term list.
    pub fn cmp_canonical(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.terms.iter().cmp(other.terms.iter()))
    }

    /// Symmetric representative in `[-(p-1)/2, (p-1)/2]`.
    fn symmetric(&self, c: u64) -> i64 {
        if c > self.p / 2 {
            c as i64 - self.p as i64
        } else {
            c as i64
        }
    }

    fn fmt_term(i: u32, j: u32, c: u64, out: &mut String) {
        let mut parts: Vec<String> = Vec::new();
        if c != 1 || (i == 0 && j == 0) {
            parts.push(c.to_string());
        }
        match i {
            0 => {}
            1 => parts.push("X".into()),
            _ => parts.push(format!("X^{i}")),
        }
        match j {
            0 => {}
            1 => parts.push("Y".into()),
            _ => parts.push(format!("Y^{j}")),
        }
        out.push_str(&parts.join("*"));
    }

    /// Canonical text without the `(mod p)` suffix.
    pub fn to_term_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut keys: Vec<(u32, u32)> = self.terms.keys().copied().collect();
        keys.sort_by(|&(i1, j1), &(i2, j2)| {
            (i2 + j2, i2).cmp(&(i1 + j1, i1))
        });
        let mut out = String::new();
        for (idx, &(i, j)) in keys.iter().enumerate() {
            let c = self.symmetric(self.terms[&(i, j)]);
            if idx == 0 {
                if c < 0 {
                    out.push('-');
                }
            } else if c < 0 {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            Self::fmt_term(i, j, c.unsigned_abs(), &mut out);
        }
        out
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.to_term_string(), self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    #[test]
    fn display_canonical_form() {
        let c = ctx(5);
        // -2XY + 2X + 2Y - 2
        let f = BivariatePolynomial::from_terms(
            &c,
            [((1, 1), 3), ((1, 0), 2), ((0, 1), 2), ((0, 0), 3)],
        );
        assert_eq!(f.to_string(), "-2*X*Y + 2*X + 2*Y - 2 (mod 5)");
    }

    #[test]
    fn display_powers_and_unit_coeff() {
        let c = ctx(7);
        let f = BivariatePolynomial::from_terms(&c, [((2, 0), 1), ((0, 0), 6)]);
        assert_eq!(f.to_string(), "X^2 - 1 (mod 7)");
    }

    #[test]
    fn mul_matches_eval() {
        let c = ctx(13);
        let f = BivariatePolynomial::from_terms(&c, [((2, 1), 5), ((0, 1), 1), ((1, 0), 7)]);
        let g = BivariatePolynomial::from_terms(&c, [((1, 1), 2), ((0, 0), 11)]);
        let h = f.mul(&c, &g);
        for x in 0..13 {
            for y in 0..13 {
                assert_eq!(
                    h.eval(&c, x, y),
                    c.mul(f.eval(&c, x, y), g.eval(&c, x, y))
                );
            }
        }
    }

    #[test]
    fn specialize_consistent_with_eval() {
        let c = ctx(11);
        let f = BivariatePolynomial::from_terms(&c, [((3, 2), 4), ((1, 4), 9), ((0, 0), 1)]);
        for x0 in 0..11 {
            let u = f.specialize_x(&c, x0);
            for y in 0..11 {
                assert_eq!(u.eval(&c, y), f.eval(&c, x0, y));
            }
        }
    }

    #[test]
    fn no_zero_terms_stored() {
        let c = ctx(5);
        let f = BivariatePolynomial::from_terms(&c, [((1, 1), 2), ((1, 1), 3)]);
        assert!(f.is_zero());
        assert_eq!(f.num_terms(), 0);
    }
}
