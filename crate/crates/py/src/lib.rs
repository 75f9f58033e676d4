//! Python bindings for the binomial exponential sum toolkit.
//!
//! Build with `cargo build -p binsum-py --release` and place the produced
//! `libbinsum_py.so` on the Python path as `binsum_py.so` (see
//! `python/smoke_test.py`).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use binsum::bifactor::{
    build_fkn, build_fn, factor_with_seed, strip_trivial, DEFAULT_FACTOR_SEED,
};
use binsum::expsum::{eval_sum, fourth_moment, max_sum, ScanMode};
use binsum::modarith::{exponent_pair, reduce_exponents};
use binsum::solcount::{count_n, count_t, decompose_t};
use binsum::PrimeContext;

fn err(e: binsum::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Arithmetic context for one prime `p`; every toolkit operation hangs off
/// an instance of this class.
#[pyclass]
struct PrimeField {
    ctx: PrimeContext,
}

#[pymethods]
impl PrimeField {
    #[new]
    fn new(p: u64) -> PyResult<Self> {
        Ok(PrimeField {
            ctx: PrimeContext::new(p).map_err(err)?,
        })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.ctx.p()
    }

    /// `S_{k,n}(a, b)` as `(re, im, err)` with a certified error bound.
    fn eval_sum(&self, k: u64, n: u64, a: u64, b: u64) -> PyResult<(f64, f64, f64)> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        let s = eval_sum(&self.ctx, &pair, a, b);
        Ok((s.value.re, s.value.im, s.err))
    }

    /// Maximum of `|S_{k,n}|` over nonzero coefficient pairs:
    /// `(m, (a, b), err, scanned)`. `full=True` scans all `(p-1)^2` pairs
    /// instead of one representative per orbit.
    #[pyo3(signature = (k, n, full=false))]
    fn max_sum(
        &self,
        k: u64,
        n: u64,
        full: bool,
    ) -> PyResult<(f64, (u64, u64), f64, usize)> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        let mode = if full { ScanMode::Full } else { ScanMode::Orbit };
        let r = max_sum(&self.ctx, &pair, mode);
        Ok((r.m_value, r.argmax, r.err, r.scanned))
    }

    /// `sum |S_{k,n}(a,b)|^4` over all coefficient pairs, with its error.
    fn fourth_moment(&self, k: u64, n: u64) -> PyResult<(f64, f64)> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        Ok(fourth_moment(&self.ctx, &pair))
    }

    /// Exact quadruple count `T_{k,n}`.
    fn count_t(&self, k: u64, n: u64) -> PyResult<u64> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        count_t(&self.ctx, &pair).map_err(err)
    }

    /// Exact point count `N_{k,n}` of the curve `F_{k,n} = 0`.
    fn count_n(&self, k: u64, n: u64) -> PyResult<u64> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        count_n(&self.ctx, &pair).map_err(err)
    }

    /// The `k = 1` decomposition `T_n = A0 + (p-1) N_n` as `(a0, n, t)`.
    fn decompose_t(&self, n: u64) -> PyResult<(u64, u64, u64)> {
        decompose_t(&self.ctx, n).map_err(err)
    }

    /// Reduced exponents `(k*, n*)` with `T_{k,n} = T_{k*,n*}`.
    fn reduce_exponents(&self, k: u64, n: u64) -> PyResult<(u64, u64)> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        let red = reduce_exponents(&self.ctx, &pair);
        Ok((red.k, red.n))
    }

    /// Canonical text of `F_n = X^n + Y^n - (X+Y-1)^n - 1`.
    fn build_fn(&self, n: u64) -> PyResult<String> {
        Ok(build_fn(&self.ctx, n).map_err(err)?.to_term_string())
    }

    /// Canonical text of
    /// `F_{k,n} = (X^n+Y^n-1)^{k/r} - (X^k+Y^k-1)^{n/r}`.
    fn build_fkn(&self, k: u64, n: u64) -> PyResult<String> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        Ok(build_fkn(&self.ctx, &pair).map_err(err)?.to_term_string())
    }

    /// Factor the family polynomial of `(k, n)` into irreducibles.
    ///
    /// Returns a dict with the unit, the full factor list, and the
    /// trivial/nontrivial partition (factors as canonical strings with
    /// multiplicities).
    #[pyo3(signature = (k, n, seed=DEFAULT_FACTOR_SEED))]
    fn factor(&self, py: Python<'_>, k: u64, n: u64, seed: u64) -> PyResult<PyObject> {
        let pair = exponent_pair(&self.ctx, k, n).map_err(err)?;
        let poly = if pair.k == 1 {
            build_fn(&self.ctx, pair.n).map_err(err)?
        } else {
            build_fkn(&self.ctx, &pair).map_err(err)?
        };
        let fac = factor_with_seed(&self.ctx, &poly, seed).map_err(err)?;
        let rep = strip_trivial(&self.ctx, &pair, &fac);
        let render = |fs: &[(binsum::bipoly::BivariatePolynomial, u32)]| -> Vec<(String, u32)> {
            fs.iter().map(|(g, m)| (g.to_term_string(), *m)).collect()
        };
        let dict = pyo3::types::PyDict::new_bound(py);
        dict.set_item("p", self.ctx.p())?;
        dict.set_item("k", pair.k)?;
        dict.set_item("n", pair.n)?;
        dict.set_item("seed", fac.seed)?;
        dict.set_item("unit", fac.unit)?;
        dict.set_item("factors", render(&fac.factors))?;
        dict.set_item("trivial", render(&rep.trivial))?;
        dict.set_item("nontrivial", render(&rep.nontrivial))?;
        dict.set_item("min_nontrivial_degree", rep.min_nontrivial_degree)?;
        dict.set_item("degree_bound_value", rep.degree_bound_value)?;
        Ok(dict.into())
    }
}

#[pymodule]
fn binsum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PrimeField>()?;
    m.add("DEFAULT_FACTOR_SEED", DEFAULT_FACTOR_SEED)?;
    Ok(())
}
