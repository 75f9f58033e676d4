//! Acceptance gate: one test per criterion, each emitting a single
//! `criterion N: PASS/FAIL` line (run with `--nocapture` to see them on
//! success).
//!
//! The family factorization sweeps (criteria 1, 2, 7) share one computed
//! data set through a `OnceLock` so the expensive work runs once.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use binsum::bifactor::{
    build_fkn, build_fn, factor_with_seed, strip_trivial, FactorReport, Factorization,
    DEFAULT_FACTOR_SEED,
};
use binsum::bipoly::BivariatePolynomial;
use binsum::bounds::{self, BoundEvaluation, BoundId, ExactInputs, Verdict};
use binsum::expsum::{fourth_moment_t, max_sum, ScanMode};
use binsum::modarith::{exponent_pair, reduce_exponents};
use binsum::solcount::{brute_force_t, count_n, count_t, decompose_t};
use binsum::PrimeContext;

const MOMENT_TOL: f64 = 1e-3;
const ORBIT_AGREEMENT_FACTOR: f64 = 2.0;

fn primes_to(n: u64) -> Vec<u64> {
    (3..=n).filter(|&p| (2..p).all(|d| p % d != 0)).collect()
}

fn report(criterion: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} - {detail}");
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// One factored family instance, kept for the round-trip criterion.
struct FamilyCase {
    p: u64,
    k: u64,
    n: u64,
    poly: BivariatePolynomial,
    fac: Factorization,
    rep: FactorReport,
}

fn factor_family(ctx: &PrimeContext, k: u64, n: u64) -> FamilyCase {
    let pair = exponent_pair(ctx, k, n).unwrap();
    let poly = if k == 1 {
        build_fn(ctx, n).unwrap()
    } else {
        build_fkn(ctx, &pair).unwrap()
    };
    let fac = factor_with_seed(ctx, &poly, DEFAULT_FACTOR_SEED).unwrap();
    let rep = strip_trivial(ctx, &pair, &fac);
    FamilyCase {
        p: ctx.p(),
        k,
        n,
        poly,
        fac,
        rep,
    }
}

/// `F_n` for all primes `p <= 67`, `2 <= n < p`.
fn fn_sweep() -> &'static Vec<FamilyCase> {
    static DATA: OnceLock<Vec<FamilyCase>> = OnceLock::new();
    DATA.get_or_init(|| {
        let mut out = Vec::new();
        for p in primes_to(67) {
            if p < 3 {
                continue;
            }
            let ctx = PrimeContext::new(p).unwrap();
            for n in 2..p {
                out.push(factor_family(&ctx, 1, n));
            }
        }
        out
    })
}

/// `F_{k,n}` for all primes `p <= 29`, `2 <= k < n < p`.
fn fkn_sweep() -> &'static Vec<FamilyCase> {
    static DATA: OnceLock<Vec<FamilyCase>> = OnceLock::new();
    DATA.get_or_init(|| {
        let mut out = Vec::new();
        for p in primes_to(29) {
            let ctx = PrimeContext::new(p).unwrap();
            for n in 3..p {
                for k in 2..n {
                    out.push(factor_family(&ctx, k, n));
                }
            }
        }
        out
    })
}

/// Substitute `X -> X^e`, `Y -> Y^e`.
fn substitute_powers(
    ctx: &PrimeContext,
    f: &BivariatePolynomial,
    e: u32,
) -> BivariatePolynomial {
    BivariatePolynomial::from_terms(
        ctx,
        f.terms().map(|(&(i, j), &c)| ((i * e, j * e), c)),
    )
}

#[test]
fn criterion_1_fn_reproduction() {
    let mut bad = Vec::new();
    for case in fn_sweep() {
        let (p, n) = (case.p, case.n);
        let nontrivial = &case.rep.nontrivial;
        let ok = if n == 2 || n == 3 {
            nontrivial.is_empty()
        } else if n == (p + 1) / 2 {
            !nontrivial.is_empty()
                && nontrivial.iter().all(|(g, _)| g.total_degree() == 2)
        } else {
            nontrivial.len() == 1
        };
        if !ok {
            bad.push(format!("p={p} n={n}: {} nontrivial", nontrivial.len()));
        }
    }
    report(
        1,
        bad.is_empty(),
        &format!(
            "F_n for p <= 67: unique nontrivial factor except n in {{2,3}} (empty) \
             and n = (p+1)/2 (all quadratic); {} instances checked{}",
            fn_sweep().len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; deviations: {bad:?}")
            }
        ),
    );
}

#[test]
fn criterion_2_fkn_reproduction() {
    // The published claim ("exactly one nontrivial factor for all
    // 2 <= k < n < p <= 29") has an unstated exception exactly parallel to
    // the n in {2,3} exception of F_n: when k | n with n/k in {2,3},
    // F_{k,n} = F_{n/k}(X^k, Y^k) collapses entirely into the excluded
    // factors (e.g. F_{7,14} = -2 (X^7-1)(Y^7-1)) and the remainder is
    // empty. The test pins that characterization exactly: every other
    // instance must have a unique nontrivial factor, every exceptional
    // instance must have none and must equal the substituted F_{n/k}.
    let mut bad = Vec::new();
    let mut exceptional = 0usize;
    for case in fkn_sweep() {
        let (p, k, n) = (case.p, case.k, case.n);
        let ctx = PrimeContext::new(p).unwrap();
        let collapse = n % k == 0 && (n / k == 2 || n / k == 3);
        if collapse {
            exceptional += 1;
            let sub = substitute_powers(&ctx, &build_fn(&ctx, n / k).unwrap(), k as u32);
            if !case.rep.nontrivial.is_empty() || case.poly != sub {
                bad.push(format!("p={p} k={k} n={n}: collapse case mismatch"));
            }
        } else if case.rep.nontrivial.len() != 1 {
            bad.push(format!(
                "p={p} k={k} n={n}: {} nontrivial",
                case.rep.nontrivial.len()
            ));
        }
    }
    report(
        2,
        bad.is_empty(),
        &format!(
            "F_kn for p <= 29: unique nontrivial factor in {} of {} instances; \
             the {exceptional} instances with k | n, n/k in {{2,3}} verify \
             F_kn = F_(n/k)(X^k, Y^k) with empty remainder{}",
            fkn_sweep().len() - exceptional,
            fkn_sweep().len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!("; deviations: {bad:?}")
            }
        ),
    );
}

#[test]
fn criterion_3_moment_identity() {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for p in primes_to(31) {
        let ctx = PrimeContext::new(p).unwrap();
        for n in 2..p {
            for k in 1..n {
                let pair = exponent_pair(&ctx, k, n).unwrap();
                let t_moment = fourth_moment_t(&ctx, &pair, MOMENT_TOL);
                let t_count = count_t(&ctx, &pair).unwrap();
                match t_moment {
                    Ok(t) if t == t_count => checked += 1,
                    other => bad.push(format!("p={p} k={k} n={n}: {other:?} vs {t_count}")),
                }
            }
        }
    }
    report(
        3,
        bad.is_empty(),
        &format!(
            "fourth moment / p^2 integral within {MOMENT_TOL} and equal to T \
             on {checked} instances{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!("; failures: {bad:?}")
            }
        ),
    );
}

#[test]
fn criterion_4_explicit_bounds() {
    let mut rows = 0usize;
    let mut violated = Vec::new();
    for p in primes_to(101) {
        if p < 3 {
            continue;
        }
        let ctx = PrimeContext::new(p).unwrap();
        for n in 1..p {
            let pair = exponent_pair(&ctx, 1, n).unwrap();
            let inputs = ExactInputs {
                m: Some(max_sum(&ctx, &pair, ScanMode::Orbit).m_value),
                t: Some(count_t(&ctx, &pair).unwrap()),
                n_points: (pair.k != pair.n).then(|| count_n(&ctx, &pair).unwrap()),
            };
            for e in bounds::evaluate_all(&ctx, &pair, &inputs).unwrap() {
                if e.verdict == Some(Verdict::Violated) {
                    violated.push(format!("p={p} n={n}: {}", e.bound_id));
                }
                if e.verdict.is_some() {
                    rows += 1;
                }
            }
        }
    }
    report(
        4,
        violated.is_empty(),
        &format!(
            "no explicit bound violated over p <= 101, k = 1 ({rows} verdict rows, \
             slack 1e-9){}",
            if violated.is_empty() {
                String::new()
            } else {
                format!("; violations: {violated:?}")
            }
        ),
    );
}

#[test]
fn criterion_5_closed_forms() {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in primes_to(101) {
        if p < 3 {
            continue;
        }
        let ctx = PrimeContext::new(p).unwrap();
        let pair = exponent_pair(&ctx, 1, 2).unwrap();
        if count_t(&ctx, &pair).unwrap() != 2 * p * p - p {
            ok = false;
            detail.push(format!("T_12(F_{p})"));
        }
        if count_n(&ctx, &pair).unwrap() != 2 * p - 1 {
            ok = false;
            detail.push(format!("N_12(F_{p})"));
        }
    }
    // Brute-force quadruple oracle at desk scale.
    let c5 = PrimeContext::new(5).unwrap();
    let pair13 = exponent_pair(&c5, 1, 3).unwrap();
    if count_t(&c5, &pair13).unwrap() != 61 || brute_force_t(&c5, &pair13) != 61 {
        ok = false;
        detail.push("T_13(F_5) != 61".into());
    }
    if count_n(&c5, &pair13).unwrap() != 12 {
        ok = false;
        detail.push("N_13(F_5) != 12".into());
    }
    // Decomposition identity T = A0 + (p-1) N.
    for p in primes_to(31) {
        if p < 3 {
            continue;
        }
        let ctx = PrimeContext::new(p).unwrap();
        for n in 2..p {
            let (a0, ncurve, t) = decompose_t(&ctx, n).unwrap();
            let pair = exponent_pair(&ctx, 1, n).unwrap();
            if t != a0 + (p - 1) * ncurve || t != count_t(&ctx, &pair).unwrap() {
                ok = false;
                detail.push(format!("decompose p={p} n={n}"));
            }
        }
    }
    report(
        5,
        ok,
        &format!(
            "T_12 = 2p^2 - p, N_12 = 2p - 1 (p <= 101), T_13(F_5) = 61, \
             N_13(F_5) = 12, T = A0 + (p-1)N (p <= 31){}",
            if ok {
                String::new()
            } else {
                format!("; failures: {detail:?}")
            }
        ),
    );
}

#[test]
fn criterion_6_exponent_reduction() {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for p in primes_to(19) {
        if p < 5 {
            continue;
        }
        let ctx = PrimeContext::new(p).unwrap();
        for n in 2..p {
            for k in 1..n {
                let pair = exponent_pair(&ctx, k, n).unwrap();
                let red = reduce_exponents(&ctx, &pair);
                let t = count_t(&ctx, &pair).unwrap();
                let t_red = count_t(&ctx, &red).unwrap();
                if t == t_red {
                    checked += 1;
                } else {
                    bad.push(format!(
                        "p={p} ({k},{n}) -> ({},{}) : {t} != {t_red}",
                        red.k, red.n
                    ));
                }
            }
        }
    }
    report(
        6,
        bad.is_empty(),
        &format!(
            "T_kn = T_k*n* on {checked} instances over p <= 19{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!("; failures: {bad:?}")
            }
        ),
    );
}

/// Pool of irreducible polynomials of total degree <= 8 harvested from
/// factoring random dense polynomials.
fn irreducible_pool(
    ctx: &PrimeContext,
    rng: &mut ChaCha8Rng,
    want: usize,
) -> Vec<BivariatePolynomial> {
    let mut pool = Vec::new();
    while pool.len() < want {
        let mut terms = Vec::new();
        for i in 0..3u32 {
            for j in 0..3u32 {
                terms.push(((i, j), rng.gen_range(0..ctx.p())));
            }
        }
        let f = BivariatePolynomial::from_terms(ctx, terms);
        if f.is_zero() || f.is_constant() {
            continue;
        }
        let fac = factor_with_seed(ctx, &f, DEFAULT_FACTOR_SEED).unwrap();
        for (g, _) in fac.factors {
            if g.total_degree() <= 8 {
                pool.push(g);
            }
        }
    }
    pool.truncate(want);
    pool
}

#[test]
fn criterion_7_factor_round_trip() {
    // Every family polynomial factored in criteria 1-2 must reconstruct.
    let mut family = 0usize;
    for case in fn_sweep().iter().chain(fkn_sweep()) {
        let ctx = PrimeContext::new(case.p).unwrap();
        assert!(
            case.fac.expand(&ctx) == case.poly,
            "round trip failed for p={} k={} n={}",
            case.p,
            case.k,
            case.n
        );
        family += 1;
    }
    // 500 seeded random products of irreducibles per prime.
    let mut random = 0usize;
    for p in [5u64, 13, 31] {
        let ctx = PrimeContext::new(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0xab5_0000 + p);
        let pool = irreducible_pool(&ctx, &mut rng, 40);
        for _ in 0..500 {
            let nfac = rng.gen_range(2..=3);
            let mut prod = BivariatePolynomial::constant(&ctx, rng.gen_range(1..p));
            for _ in 0..nfac {
                let g = &pool[rng.gen_range(0..pool.len())];
                prod = prod.mul(&ctx, g);
            }
            let fac = factor_with_seed(&ctx, &prod, DEFAULT_FACTOR_SEED).unwrap();
            assert!(
                fac.expand(&ctx) == prod,
                "random round trip failed at p={p}"
            );
            random += 1;
        }
    }
    report(
        7,
        true,
        &format!(
            "unit * prod factors^mult reconstructs the input for {family} family \
             polynomials and {random} random products"
        ),
    );
}

#[test]
fn criterion_8_orbit_scan_equivalence() {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for p in primes_to(31) {
        if p < 5 {
            continue;
        }
        let ctx = PrimeContext::new(p).unwrap();
        for n in 2..p {
            for k in 1..n {
                let pair = exponent_pair(&ctx, k, n).unwrap();
                let full = max_sum(&ctx, &pair, ScanMode::Full);
                let orbit = max_sum(&ctx, &pair, ScanMode::Orbit);
                let agree =
                    (full.m_value - orbit.m_value).abs() <= ORBIT_AGREEMENT_FACTOR * full.err;
                let count_ok = orbit.scanned as u64 == pair.s * (p - 1);
                if agree && count_ok {
                    checked += 1;
                } else {
                    bad.push(format!("p={p} k={k} n={n}"));
                }
            }
        }
    }
    report(
        8,
        bad.is_empty(),
        &format!(
            "orbit max = full max within 2*err with exactly s(p-1) representatives \
             on {checked} instances{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!("; failures: {bad:?}")
            }
        ),
    );
}

fn constant_sweep() -> Vec<BoundEvaluation> {
    let mut evals = Vec::new();
    for p in primes_to(31) {
        if p < 5 {
            continue;
        }
        let ctx = PrimeContext::new(p).unwrap();
        for n in 2..p {
            for k in 1..n {
                let pair = exponent_pair(&ctx, k, n).unwrap();
                let inputs = ExactInputs {
                    m: Some(max_sum(&ctx, &pair, ScanMode::Orbit).m_value),
                    t: Some(count_t(&ctx, &pair).unwrap()),
                    n_points: Some(count_n(&ctx, &pair).unwrap()),
                };
                evals.extend(bounds::evaluate_all(&ctx, &pair, &inputs).unwrap());
            }
        }
    }
    evals
}

#[test]
fn criterion_9_empirical_constant_table() {
    let evals = constant_sweep();
    let report_only = [
        BoundId::ThmMn,
        BoundId::CorMnP1,
        BoundId::ThmNn,
        BoundId::CorTn,
        BoundId::ThmNkn,
        BoundId::CorTkn,
        BoundId::ThmMkn,
        BoundId::CorTknSimplified,
        BoundId::CorTknReduced,
    ];
    println!("empirical implied constants (sup exact/bound over p <= 31):");
    let mut firsts = Vec::new();
    for id in report_only {
        let c = bounds::empirical_constant(&evals, id).unwrap();
        println!("  {:<20} {c:.12e}", id.name());
        assert!(c.is_finite() && c > 0.0, "{} constant not finite", id.name());
        firsts.push(c);
    }
    // Determinism: a recomputation reproduces every constant bit-for-bit.
    let again = constant_sweep();
    for (id, &c) in report_only.iter().zip(&firsts) {
        let c2 = bounds::empirical_constant(&again, *id).unwrap();
        assert!(c.to_bits() == c2.to_bits(), "{} not deterministic", id.name());
    }
    report(
        9,
        true,
        &format!(
            "{} <<-bound constants finite and deterministic over {} verdict rows",
            report_only.len(),
            evals.len()
        ),
    );
}
