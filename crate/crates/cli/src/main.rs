//! `binsum` — command-line surface for the binomial exponential sum toolkit.
//!
//! Subcommands: `sum`, `max`, `count`, `factor` for single instances;
//! `sweep` to compute and persist result tables over a prime range;
//! `verify` to run the full pipeline and check every hard invariant.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use binsum::bifactor::{
    build_fkn, build_fn, factor_with_seed, strip_trivial, FactorReport, Factorization,
    DEFAULT_FACTOR_SEED,
};
use binsum::bounds::{self, BoundEvaluation, BoundId, ExactInputs, Verdict};
use binsum::expsum::{eval_sum, fourth_moment_t, max_sum, ScanMode};
use binsum::modarith::exponent_pair;
use binsum::solcount::{count_report, decompose_t};
use binsum::{Error, PrimeContext};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance (in units of `p^2`) for rounding the fourth moment to `p^2 T`.
const MOMENT_TOL: f64 = 1e-3;
/// Largest prime the moment identity is cross-checked at during `verify`
/// (the `p^3` per-instance cost grows quickly past desk scale).
const MOMENT_CHECK_PMAX: u64 = 31;

#[derive(Parser)]
#[command(
    name = "binsum",
    version,
    about = "Binomial exponential sums over prime fields: evaluation, counting, \
             factorization, and bound verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate S_{k,n}(a,b) = sum_x e_p(a x^k + b x^n) for one instance.
    Sum(SumArgs),
    /// Maximum of |S_{k,n}(a,b)| over nonzero coefficient pairs.
    Max(InstanceArgs),
    /// Exact solution counts T_{k,n} and N_{k,n}.
    Count(InstanceArgs),
    /// Complete factorization of the family polynomial over F_p.
    Factor(FactorArgs),
    /// Run the pipeline over a prime range and check every hard invariant.
    Verify(SweepArgs),
    /// Compute result tables over a prime range and persist them.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SumArgs {
    /// Prime modulus.
    #[arg(long)]
    p: u64,
    /// First exponent.
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Second exponent.
    #[arg(long)]
    n: u64,
    /// Coefficient of x^k.
    #[arg(long, default_value_t = 1)]
    a: u64,
    /// Coefficient of x^n.
    #[arg(long, default_value_t = 1)]
    b: u64,
}

#[derive(Args)]
struct InstanceArgs {
    /// Prime modulus.
    #[arg(long)]
    p: u64,
    /// First exponent.
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Second exponent.
    #[arg(long)]
    n: u64,
}

#[derive(Args)]
struct FactorArgs {
    /// Prime modulus.
    #[arg(long)]
    p: u64,
    /// First exponent (1 selects the single-parameter family F_n).
    #[arg(long, default_value_t = 1)]
    k: u64,
    /// Second exponent.
    #[arg(long)]
    n: u64,
    /// RNG seed for the randomized splitting steps.
    #[arg(long, default_value_t = DEFAULT_FACTOR_SEED)]
    seed: u64,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Single prime (sets both ends of the range).
    #[arg(long, conflicts_with_all = ["pmin", "pmax"])]
    p: Option<u64>,
    /// Smallest prime of the sweep.
    #[arg(long, default_value_t = 3)]
    pmin: u64,
    /// Largest prime of the sweep.
    #[arg(long)]
    pmax: Option<u64>,
    /// Only the single-parameter family k = 1, 2 <= n < p.
    #[arg(long, conflicts_with = "all_kn")]
    k1_only: bool,
    /// All pairs 2 <= k < n < p.
    #[arg(long)]
    all_kn: bool,
    /// Explicit first exponent (with --n: a single instance per prime).
    #[arg(long, requires = "n", conflicts_with_all = ["k1_only", "all_kn"])]
    k: Option<u64>,
    /// Explicit second exponent.
    #[arg(long, requires = "k")]
    n: Option<u64>,
    /// Comma-separated subset of sum,max,count,factor,verify.
    #[arg(long)]
    tasks: String,
    /// Output format for emitted tables.
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Directory for emitted result tables (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory: one JSON file per (p, task), reused when the
    /// version and seed match.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// RNG seed for the factorization steps.
    #[arg(long, default_value_t = DEFAULT_FACTOR_SEED)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Task {
    Sum,
    Max,
    Count,
    Factor,
    Verify,
}

impl Task {
    const ALL: [Task; 5] = [Task::Sum, Task::Max, Task::Count, Task::Factor, Task::Verify];

    fn name(self) -> &'static str {
        match self {
            Task::Sum => "sum",
            Task::Max => "max",
            Task::Count => "count",
            Task::Factor => "factor",
            Task::Verify => "verify",
        }
    }

    /// Largest prime the task is run at during sweeps.
    fn prime_cap(self) -> u64 {
        match self {
            Task::Sum => 1 << 12,
            Task::Max => 101,
            Task::Count => 127,
            Task::Factor => 67,
            Task::Verify => 101,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Selector {
    K1Only,
    AllKn,
    Explicit(u64, u64),
}

#[derive(Debug, Clone)]
struct SweepSpec {
    pmin: u64,
    pmax: u64,
    selector: Selector,
    tasks: Vec<Task>,
    format: String,
    out: Option<PathBuf>,
    cache: Option<PathBuf>,
    workers: usize,
    seed: u64,
}

// ---------------------------------------------------------------------------
// Records: flat rows shared by the JSON and CSV emissions
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SumRecord {
    p: u64,
    k: u64,
    n: u64,
    a: u64,
    b: u64,
    re: f64,
    im: f64,
    magnitude: f64,
    err: f64,
}

#[derive(Serialize)]
struct MaxRecord {
    p: u64,
    k: u64,
    n: u64,
    m_value: f64,
    argmax_a: u64,
    argmax_b: u64,
    err: f64,
    scanned: u64,
}

#[derive(Serialize)]
struct CountRecord {
    p: u64,
    k: u64,
    n: u64,
    t: u64,
    n_points: Option<u64>,
    a0: Option<u64>,
}

#[derive(Serialize)]
struct FactorRecord {
    p: u64,
    k: u64,
    n: u64,
    seed: u64,
    unit: i64,
    trivial: String,
    nontrivial: String,
    num_nontrivial: u64,
    min_nontrivial_degree: Option<u32>,
    degree_bound_value: f64,
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct VerifyRecord {
    p: u64,
    k: u64,
    n: u64,
    bound_id: String,
    applicable: bool,
    reason: String,
    bound_value: Option<f64>,
    exact_value: Option<f64>,
    ratio: Option<f64>,
    verdict: Option<String>,
}

/// Cache payload: one file per `(p, task)`; byte-identical on recompute
/// with the same toolkit version and seed.
#[derive(Serialize)]
struct CacheFile<'a> {
    version: &'a str,
    task: &'a str,
    p: u64,
    seed: u64,
    records: &'a [Value],
}

/// Everything computed for one prime: per-task record tables, hard-invariant
/// violations, and the rows of the reproduction summary tables.
struct PrimeOutput {
    p: u64,
    /// Loaded from the cache directory rather than recomputed.
    from_cache: bool,
    records: BTreeMap<Task, Vec<Value>>,
    violations: Vec<String>,
    /// (k, n, #nontrivial, min nontrivial degree) per factored instance.
    factor_rows: Vec<(u64, u64, usize, Option<u32>)>,
    /// Degrees of the nontrivial factors at n = (p+1)/2 (k = 1 only).
    quadratic_rows: Vec<(u64, Vec<u32>)>,
}

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

/// Render with 12 significant digits.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let prec = (11 - mag).max(0) as usize;
    let s = format!("{x:.prec$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Symmetric representative of a residue in `[-(p-1)/2, (p-1)/2]`.
fn symmetric(p: u64, c: u64) -> i64 {
    if c > p / 2 {
        c as i64 - p as i64
    } else {
        c as i64
    }
}

/// `unit * (f1)^m1 * (f2)^m2 * ...` with the unit in symmetric form.
fn factorization_string(p: u64, unit: u64, factors: &[(String, u32)]) -> String {
    let mut parts = Vec::new();
    let u = symmetric(p, unit);
    if u != 1 || factors.is_empty() {
        parts.push(u.to_string());
    }
    for (f, m) in factors {
        if *m == 1 {
            parts.push(format!("({f})"));
        } else {
            parts.push(format!("({f})^{m}"));
        }
    }
    parts.join(" * ")
}

/// Display order: descending lex-leading term (X before Y), so e.g.
/// `(X - 1)` prints ahead of `(Y - 1)`.
fn display_sorted(
    fs: &[(binsum::bipoly::BivariatePolynomial, u32)],
) -> Vec<(binsum::bipoly::BivariatePolynomial, u32)> {
    let mut v = fs.to_vec();
    v.sort_by(|a, b| {
        b.0.lex_leading()
            .map(|(t, _)| t)
            .cmp(&a.0.lex_leading().map(|(t, _)| t))
            .then_with(|| a.0.cmp_canonical(&b.0))
    });
    v
}

fn factor_list_string(fs: &[(binsum::bipoly::BivariatePolynomial, u32)]) -> String {
    display_sorted(fs)
        .iter()
        .map(|(g, m)| {
            if *m == 1 {
                format!("({})", g.to_term_string())
            } else {
                format!("({})^{}", g.to_term_string(), m)
            }
        })
        .collect::<Vec<_>>()
        .join(" * ")
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("record serialization")
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// Single-instance commands
// ---------------------------------------------------------------------------

fn cmd_sum(args: &SumArgs) -> Result<(), Error> {
    let ctx = PrimeContext::new(args.p)?;
    let pair = exponent_pair(&ctx, args.k, args.n)?;
    let s = eval_sum(&ctx, &pair, args.a, args.b);
    println!(
        "S_{{{},{}}}({}, {}) over F_{} = {} + {}i",
        pair.k,
        pair.n,
        args.a,
        args.b,
        args.p,
        sig12(s.value.re),
        sig12(s.value.im)
    );
    println!(
        "|S| = {}   (err <= {})",
        sig12(s.value.norm()),
        sig12(s.err)
    );
    Ok(())
}

fn cmd_max(args: &InstanceArgs) -> Result<(), Error> {
    let ctx = PrimeContext::new(args.p)?;
    let pair = exponent_pair(&ctx, args.k, args.n)?;
    let r = max_sum(&ctx, &pair, ScanMode::Orbit);
    println!(
        "M_{{{},{}}}(F_{}) = {}   (err <= {})",
        pair.k,
        pair.n,
        args.p,
        sig12(r.m_value),
        sig12(r.err)
    );
    println!(
        "argmax (a, b) = ({}, {})   orbit representatives scanned: {}",
        r.argmax.0, r.argmax.1, r.scanned
    );
    Ok(())
}

fn cmd_count(args: &InstanceArgs) -> Result<(), Error> {
    let ctx = PrimeContext::new(args.p)?;
    let pair = exponent_pair(&ctx, args.k, args.n)?;
    let rep = count_report(&ctx, &pair)?;
    println!(
        "T_{{{},{}}}(F_{}) = {}",
        pair.k, pair.n, args.p, rep.t
    );
    match rep.n_points {
        Some(np) => println!("N_{{{},{}}}(F_{}) = {}", pair.k, pair.n, args.p, np),
        None => println!("N undefined for the degenerate family k = n"),
    }
    if pair.k == 1 {
        let (a0, n_curve, t) = decompose_t(&ctx, pair.n)?;
        println!(
            "decomposition: T = A0 + (p-1) N = {} + {} * {} = {}",
            a0,
            args.p - 1,
            n_curve,
            t
        );
    }
    Ok(())
}

fn cmd_factor(args: &FactorArgs) -> Result<(), Error> {
    let ctx = PrimeContext::new(args.p)?;
    let pair = exponent_pair(&ctx, args.k, args.n)?;
    let poly = if pair.k == 1 {
        build_fn(&ctx, pair.n)?
    } else {
        build_fkn(&ctx, &pair)?
    };
    let fac = factor_with_seed(&ctx, &poly, args.seed)?;
    let rep = strip_trivial(&ctx, &pair, &fac);
    let family = if pair.k == 1 {
        format!("F_{}", pair.n)
    } else {
        format!("F_{{{},{}}}", pair.k, pair.n)
    };
    let rendered: Vec<(String, u32)> = display_sorted(&fac.factors)
        .iter()
        .map(|(g, m)| (g.to_term_string(), *m))
        .collect();
    println!("{family} over F_{} (seed {}):", args.p, fac.seed);
    println!("  {}", factorization_string(args.p, fac.unit, &rendered));
    println!(
        "trivial: {}",
        if rep.trivial.is_empty() {
            "none".to_string()
        } else {
            factor_list_string(&rep.trivial)
        }
    );
    println!(
        "nontrivial: {}",
        if rep.nontrivial.is_empty() {
            "none".to_string()
        } else {
            factor_list_string(&rep.nontrivial)
        }
    );
    if let Some(d) = rep.min_nontrivial_degree {
        println!(
            "min nontrivial degree {} vs bound {} (ratio {})",
            d,
            sig12(rep.degree_bound_value),
            rep.ratio.map(sig12).unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweep computation
// ---------------------------------------------------------------------------

fn instances(p: u64, selector: Selector) -> Vec<(u64, u64)> {
    match selector {
        Selector::K1Only => (2..p).map(|n| (1, n)).collect(),
        Selector::AllKn => (3..p)
            .flat_map(|n| (2..n).map(move |k| (k, n)))
            .collect(),
        Selector::Explicit(k, n) => {
            if k < p && n < p {
                vec![(k, n)]
            } else {
                Vec::new()
            }
        }
    }
}

fn factor_report(ctx: &PrimeContext, k: u64, n: u64, seed: u64) -> Result<FactorReport, Error> {
    let pair = exponent_pair(ctx, k, n)?;
    let poly = if pair.k == 1 {
        build_fn(ctx, pair.n)?
    } else {
        build_fkn(ctx, &pair)?
    };
    let fac: Factorization = factor_with_seed(ctx, &poly, seed)?;
    Ok(strip_trivial(ctx, &pair, &fac))
}

fn verify_rows(evals: &[BoundEvaluation]) -> Vec<Value> {
    evals
        .iter()
        .map(|e| {
            to_value(&VerifyRecord {
                p: e.p,
                k: e.k,
                n: e.n,
                bound_id: e.bound_id.to_string(),
                applicable: e.applicable,
                reason: e.reason.to_string(),
                bound_value: e.bound_value,
                exact_value: e.exact_value,
                ratio: e.ratio,
                verdict: e.verdict.map(|v| format!("{v:?}")),
            })
        })
        .collect()
}

/// Compute every requested task for one prime.
fn compute_prime(p: u64, spec: &SweepSpec) -> Result<PrimeOutput, Error> {
    let ctx = PrimeContext::new(p)?;
    let mut out = PrimeOutput {
        p,
        from_cache: false,
        records: BTreeMap::new(),
        violations: Vec::new(),
        factor_rows: Vec::new(),
        quadratic_rows: Vec::new(),
    };
    let want = |t: Task| spec.tasks.contains(&t) && p <= t.prime_cap();
    // Bound verdicts need both the maxima and the counts.
    let want_bounds = want(Task::Verify)
        || (want(Task::Max) && want(Task::Count));

    for (k, n) in instances(p, spec.selector) {
        let pair = exponent_pair(&ctx, k, n)?;
        let mut inputs = ExactInputs::default();

        if want(Task::Sum) {
            let s = eval_sum(&ctx, &pair, 1, 1);
            out.records.entry(Task::Sum).or_default().push(to_value(&SumRecord {
                p,
                k,
                n,
                a: 1,
                b: 1,
                re: s.value.re,
                im: s.value.im,
                magnitude: s.value.norm(),
                err: s.err,
            }));
        }
        if want(Task::Max) || want_bounds {
            let r = max_sum(&ctx, &pair, ScanMode::Orbit);
            inputs.m = Some(r.m_value);
            if want(Task::Max) {
                out.records.entry(Task::Max).or_default().push(to_value(&MaxRecord {
                    p,
                    k,
                    n,
                    m_value: r.m_value,
                    argmax_a: r.argmax.0,
                    argmax_b: r.argmax.1,
                    err: r.err,
                    scanned: r.scanned as u64,
                }));
            }
        }
        if want(Task::Count) || want_bounds {
            let rep = count_report(&ctx, &pair)?;
            inputs.t = Some(rep.t);
            inputs.n_points = rep.n_points;
            if want(Task::Count) {
                out.records.entry(Task::Count).or_default().push(to_value(&CountRecord {
                    p,
                    k,
                    n,
                    t: rep.t,
                    n_points: rep.n_points,
                    a0: rep.a0,
                }));
            }
            if want(Task::Count) && p <= MOMENT_CHECK_PMAX {
                // Moment identity: fourth_moment / p^2 rounds to T exactly.
                let t_moment = fourth_moment_t(&ctx, &pair, MOMENT_TOL)?;
                if t_moment != rep.t {
                    out.violations.push(format!(
                        "p={p} k={k} n={n}: moment T {} != count T {}",
                        t_moment, rep.t
                    ));
                }
            }
        }
        if want_bounds {
            let evals = bounds::evaluate_all(&ctx, &pair, &inputs)?;
            for e in &evals {
                if e.verdict == Some(Verdict::Violated) {
                    out.violations.push(format!(
                        "p={p} k={k} n={n}: {} VIOLATED (exact {} > bound {})",
                        e.bound_id,
                        sig12(e.exact_value.unwrap_or(f64::NAN)),
                        sig12(e.bound_value.unwrap_or(f64::NAN)),
                    ));
                }
            }
            out.records
                .entry(Task::Verify)
                .or_default()
                .extend(verify_rows(&evals));
        }
        if want(Task::Factor) && pair.k != pair.n {
            let rep = factor_report(&ctx, k, n, spec.seed)?;
            check_factor_claims(&rep, &mut out);
            let nontrivial_degs: Vec<u32> = rep
                .nontrivial
                .iter()
                .map(|(g, _)| g.total_degree())
                .collect();
            if pair.k == 1 && pair.n == (p + 1) / 2 {
                out.quadratic_rows.push((pair.n, nontrivial_degs));
            }
            out.factor_rows
                .push((k, n, rep.nontrivial.len(), rep.min_nontrivial_degree));
            out.records.entry(Task::Factor).or_default().push(to_value(&FactorRecord {
                p,
                k,
                n,
                seed: spec.seed,
                unit: symmetric(p, rep.unit),
                trivial: factor_list_string(&rep.trivial),
                nontrivial: factor_list_string(&rep.nontrivial),
                num_nontrivial: rep.nontrivial.len() as u64,
                min_nontrivial_degree: rep.min_nontrivial_degree,
                degree_bound_value: rep.degree_bound_value,
                ratio: rep.ratio,
            }));
        }
    }
    Ok(out)
}

/// The factorization shape claims checked by `verify`.
fn check_factor_claims(rep: &FactorReport, out: &mut PrimeOutput) {
    let (p, k, n) = (rep.p, rep.k, rep.n);
    if k == 1 {
        // At most one nontrivial factor; exactly one except n in {2, 3}
        // (empty remainder) and n = (p+1)/2, where every nontrivial factor
        // is a quadratic.
        if n == (p + 1) / 2 && n > 3 {
            if rep.nontrivial.iter().any(|(g, _)| g.total_degree() != 2) {
                out.violations.push(format!(
                    "p={p} n={n}: expected only quadratic nontrivial factors"
                ));
            }
        } else if n == 2 || n == 3 {
            if !rep.nontrivial.is_empty() {
                out.violations.push(format!(
                    "p={p} n={n}: expected no nontrivial factor, got {}",
                    rep.nontrivial.len()
                ));
            }
        } else if rep.nontrivial.len() != 1 {
            out.violations.push(format!(
                "p={p} n={n}: expected a unique nontrivial factor, got {}",
                rep.nontrivial.len()
            ));
        }
    } else if n % k == 0 && (n / k == 2 || n / k == 3) {
        // F_{k,n} = F_{n/k}(X^k, Y^k) collapses entirely into the excluded
        // factors (the bivariate analogue of the empty n in {2,3} case), so
        // the remainder must be empty.
        if !rep.nontrivial.is_empty() {
            out.violations.push(format!(
                "p={p} k={k} n={n}: expected an empty remainder for n/k = {}",
                n / k
            ));
        }
    } else if rep.nontrivial.len() != 1 {
        out.violations.push(format!(
            "p={p} k={k} n={n}: expected a unique nontrivial factor, got {}",
            rep.nontrivial.len()
        ));
    }
}

// ---------------------------------------------------------------------------
// Orchestration: worker pool, cache, emission
// ---------------------------------------------------------------------------

fn cache_path(dir: &Path, p: u64, task: Task) -> PathBuf {
    dir.join(format!("p{p}_{}.json", task.name()))
}

fn cache_bytes(p: u64, task: Task, seed: u64, records: &[Value]) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&CacheFile {
        version: VERSION,
        task: task.name(),
        p,
        seed,
        records,
    })
    .expect("cache serialization");
    bytes.push(b'\n');
    bytes
}

/// Load cached records if the file exists and its version and seed match.
fn cache_load(dir: &Path, p: u64, task: Task, seed: u64) -> Option<Vec<Value>> {
    let bytes = std::fs::read(cache_path(dir, p, task)).ok()?;
    let v: Value = serde_json::from_slice(&bytes).ok()?;
    if v.get("version")? == VERSION && v.get("seed")? == &Value::from(seed) {
        Some(v.get("records")?.as_array()?.clone())
    } else {
        None
    }
}

/// Reconstruct a prime's output from the cache, if every requested task has
/// a matching file. Cached runs carry no violation checks, so `verify`
/// always recomputes.
fn load_prime(p: u64, spec: &SweepSpec) -> Option<PrimeOutput> {
    let dir = spec.cache.as_deref()?;
    let mut records = BTreeMap::new();
    for &task in &spec.tasks {
        if p > task.prime_cap() {
            continue;
        }
        records.insert(task, cache_load(dir, p, task, spec.seed)?);
    }
    Some(PrimeOutput {
        p,
        from_cache: true,
        records,
        violations: Vec::new(),
        factor_rows: Vec::new(),
        quadratic_rows: Vec::new(),
    })
}

/// Schedule the per-prime jobs across the worker pool; results are merged
/// back in prime order so the output is independent of scheduling.
fn run_pool(
    primes: &[u64],
    workers: usize,
    spec: &SweepSpec,
    reuse_cache: bool,
) -> Result<Vec<PrimeOutput>, Error> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<PrimeOutput, Error>)>> =
        Mutex::new(Vec::with_capacity(primes.len()));
    std::thread::scope(|s| {
        for _ in 0..workers.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= primes.len() {
                    break;
                }
                let p = primes[i];
                let r = if reuse_cache {
                    load_prime(p, spec).map_or_else(|| compute_prime(p, spec), Ok)
                } else {
                    compute_prime(p, spec)
                };
                results.lock().unwrap().push((i, r));
            });
        }
    });
    let mut v = results.into_inner().unwrap();
    v.sort_by_key(|(i, _)| *i);
    v.into_iter().map(|(_, r)| r).collect()
}

fn emit_csv(records: &[Value]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = records.first() {
        let cols: Vec<&String> = first.as_object().expect("flat record").keys().collect();
        w.write_record(&cols).expect("csv header");
        for r in records {
            let obj = r.as_object().expect("flat record");
            let row: Vec<String> = cols
                .iter()
                .map(|c| match &obj[*c] {
                    Value::Null => String::new(),
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                })
                .collect();
            w.write_record(&row).expect("csv row");
        }
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

fn emit_task_table(
    spec: &SweepSpec,
    task: Task,
    records: &[Value],
) -> std::io::Result<()> {
    let body = if spec.format == "csv" {
        emit_csv(records)
    } else {
        let mut s = serde_json::to_string_pretty(&serde_json::json!({
            "version": VERSION,
            "task": task.name(),
            "seed": spec.seed,
            "records": records,
        }))
        .expect("json emission");
        s.push('\n');
        s
    };
    match &spec.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("sweep_{}.{}", task.name(), spec.format));
            std::fs::write(path, body)
        }
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn sweep_primes(spec: &SweepSpec) -> Vec<u64> {
    (spec.pmin..=spec.pmax).filter(|&p| is_prime(p)).collect()
}

/// Run the sweep: compute (or reuse cached) records per prime, write the
/// cache, and emit one table per task.
fn run_sweep(spec: &SweepSpec, reuse_cache: bool) -> Result<Vec<PrimeOutput>, Error> {
    let primes = sweep_primes(spec);
    let outputs = run_pool(&primes, spec.workers, spec, reuse_cache)?;
    if let Some(dir) = &spec.cache {
        std::fs::create_dir_all(dir).map_err(io_err)?;
        for o in outputs.iter().filter(|o| !o.from_cache) {
            for (&task, records) in &o.records {
                let bytes = cache_bytes(o.p, task, spec.seed, records);
                std::fs::write(cache_path(dir, o.p, task), bytes).map_err(io_err)?;
            }
        }
    }
    for &task in &Task::ALL {
        if !spec.tasks.contains(&task) && task != Task::Verify {
            continue;
        }
        let all: Vec<Value> = outputs
            .iter()
            .flat_map(|o| o.records.get(&task).cloned().unwrap_or_default())
            .collect();
        if !all.is_empty() {
            emit_task_table(spec, task, &all).map_err(io_err)?;
        }
    }
    Ok(outputs)
}

fn io_err(e: std::io::Error) -> Error {
    Error::IdentityViolation(format!("io error: {e}"))
}

fn cmd_verify(spec: &SweepSpec) -> Result<bool, Error> {
    // Violations come from fresh computation, never from cached tables.
    let outputs = run_sweep(spec, false)?;
    let mut violations = Vec::new();
    for o in &outputs {
        violations.extend(o.violations.iter().cloned());
    }

    // Verdict table: one row per bound, aggregated over the sweep.
    let verify_values: Vec<Value> = outputs
        .iter()
        .flat_map(|o| o.records.get(&Task::Verify).cloned().unwrap_or_default())
        .collect();
    if !verify_values.is_empty() {
        println!("bound verdicts:");
        println!(
            "  {:<20} {:>6} {:>6} {:>9} {:>16}",
            "bound", "rows", "holds", "violated", "sup ratio"
        );
        for id in BoundId::ALL {
            let rows: Vec<&Value> = verify_values
                .iter()
                .filter(|v| v["bound_id"] == id.name() && v["applicable"] == true)
                .collect();
            if rows.is_empty() {
                continue;
            }
            let holds = rows.iter().filter(|v| v["verdict"] == "Holds").count();
            let viol = rows.iter().filter(|v| v["verdict"] == "Violated").count();
            let sup = rows
                .iter()
                .filter_map(|v| v["ratio"].as_f64())
                .fold(f64::NEG_INFINITY, f64::max);
            println!(
                "  {:<20} {:>6} {:>6} {:>9} {:>16}",
                id.name(),
                rows.len(),
                holds,
                viol,
                sig12(sup)
            );
        }
    }

    // Factorization reproduction tables.
    if spec.tasks.contains(&Task::Factor) {
        println!("factorization summary (nontrivial pieces after stripping):");
        for o in &outputs {
            if o.factor_rows.is_empty() {
                continue;
            }
            let unique = o.factor_rows.iter().filter(|r| r.2 == 1).count();
            println!(
                "  p={:<3} instances={:<4} unique-nontrivial={:<4} other={}",
                o.p,
                o.factor_rows.len(),
                unique,
                o.factor_rows.len() - unique
            );
        }
        let quads: Vec<(u64, &(u64, Vec<u32>))> = outputs
            .iter()
            .flat_map(|o| o.quadratic_rows.iter().map(move |r| (o.p, r)))
            .collect();
        if !quads.is_empty() {
            println!("n = (p+1)/2 nontrivial factor degrees:");
            for (p, (n, degs)) in quads {
                println!("  p={p:<3} n={n:<3} degrees={degs:?}");
            }
        }
    }

    if violations.is_empty() {
        println!("verify: all checks HOLD");
        Ok(true)
    } else {
        println!("verify: {} violation(s)", violations.len());
        for v in &violations {
            println!("  {v}");
        }
        Ok(false)
    }
}

// ---------------------------------------------------------------------------
// Argument validation and entry point
// ---------------------------------------------------------------------------

fn parse_tasks(s: &str) -> Result<Vec<Task>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let t = match part.trim() {
            "sum" => Task::Sum,
            "max" => Task::Max,
            "count" => Task::Count,
            "factor" => Task::Factor,
            "verify" => Task::Verify,
            other => return Err(format!("unknown task '{other}'")),
        };
        if !out.contains(&t) {
            out.push(t);
        }
    }
    if out.is_empty() {
        return Err("empty task list".into());
    }
    out.sort();
    Ok(out)
}

fn build_spec(args: &SweepArgs) -> Result<SweepSpec, String> {
    let tasks = parse_tasks(&args.tasks)?;
    let (pmin, pmax) = match (args.p, args.pmax) {
        (Some(p), _) => (p, p),
        (None, Some(pmax)) => (args.pmin, pmax),
        (None, None) => return Err("one of --p or --pmax is required".into()),
    };
    if pmin < 3 {
        return Err("--pmin must be at least 3".into());
    }
    if pmax < pmin {
        return Err("--pmax must be at least --pmin".into());
    }
    for &t in &tasks {
        if pmax > t.prime_cap() {
            return Err(format!(
                "task '{}' is capped at p <= {} (got --pmax {})",
                t.name(),
                t.prime_cap(),
                pmax
            ));
        }
    }
    let selector = match (args.k1_only, args.all_kn, args.k, args.n) {
        (true, _, _, _) => Selector::K1Only,
        (_, true, _, _) => Selector::AllKn,
        (_, _, Some(k), Some(n)) => Selector::Explicit(k, n),
        _ => Selector::K1Only,
    };
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err("--workers must be positive".into());
    }
    Ok(SweepSpec {
        pmin,
        pmax,
        selector,
        tasks,
        format: args.format.clone(),
        out: args.out.clone(),
        cache: args.cache.clone(),
        workers,
        seed: args.seed,
    })
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn run(cmd: &Cmd) -> Result<bool, Error> {
    match cmd {
        Cmd::Sum(a) => cmd_sum(a).map(|()| true),
        Cmd::Max(a) => cmd_max(a).map(|()| true),
        Cmd::Count(a) => cmd_count(a).map(|()| true),
        Cmd::Factor(a) => cmd_factor(a).map(|()| true),
        Cmd::Sweep(a) => {
            let spec = build_spec(a).map_err(Error::IdentityViolation)?;
            run_sweep(&spec, true).map(|_| true)
        }
        Cmd::Verify(a) => {
            let spec = build_spec(a).map_err(Error::IdentityViolation)?;
            cmd_verify(&spec)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Spec-construction problems are usage errors; everything the core
    // reports as invalid input likewise maps to exit code 2.
    match run(&cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => usage_error(&e.to_string()),
    }
}
