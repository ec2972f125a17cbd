//! Critical value `β₀ = log limsup (Aⁿ_vv)^{1/n}` from loop counts and
//! spectral radii of truncations.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, GraphFamily, NwClass, VertexId};
use crate::structure::nontrivial_sccs;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 100_000;

/// Output of power iteration on a nonnegative irreducible matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PerronPair {
    pub rho: f64,
    /// Collatz–Wielandt bracket `min (Mx)_i/x_i ≤ ρ ≤ max (Mx)_i/x_i`.
    pub lower: f64,
    pub upper: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on `M + cI`, which is primitive whenever `M` is
/// irreducible. Stops once the Collatz–Wielandt bracket is relatively
/// narrower than `tol`. `rows[i]` lists `(j, M_ij)`.
pub fn perron(rows: &[Vec<(usize, f64)>], tol: f64, max_iter: usize) -> PerronPair {
    perron_with(rows, tol, tol, max_iter)
}

const STAGNATION_WINDOW: usize = 200;

/// Like [`perron`], but keeps iterating towards `target` and stops when the
/// bracket has not narrowed for a while; `converged` then reports whether
/// the bracket reached `accept`.
pub fn perron_with(rows: &[Vec<(usize, f64)>], target: f64, accept: f64, max_iter: usize) -> PerronPair {
    let n = rows.len();
    let max_row = rows
        .iter()
        .map(|r| r.iter().map(|(_, a)| a).sum::<f64>())
        .fold(0.0, f64::max);
    let shift = (0.5 * max_row).max(1.0);
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let (mut lower, mut upper) = (0.0, f64::INFINITY);
    let mut last_gain = 0;
    let mut iterations = max_iter;
    for iter in 1..=max_iter {
        for (i, row) in rows.iter().enumerate() {
            y[i] = shift * x[i] + row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if lo - shift > lower || hi - shift < upper {
            last_gain = iter;
        }
        lower = lower.max(lo - shift);
        upper = upper.min(hi - shift);
        let scale = y.iter().copied().fold(0.0, f64::max);
        for i in 0..n {
            x[i] = y[i] / scale;
        }
        let width = upper - lower;
        let size = upper.abs().max(f64::MIN_POSITIVE);
        if width <= target * size || (width <= accept * size && iter - last_gain > STAGNATION_WINDOW) {
            iterations = iter;
            break;
        }
    }
    PerronPair {
        rho: 0.5 * (lower + upper),
        lower,
        upper,
        vector: x,
        iterations,
        converged: upper - lower <= accept * upper.abs().max(f64::MIN_POSITIVE),
    }
}

/// Rows of the adjacency matrix restricted to `comp` (sorted vertex
/// indices), re-indexed.
pub(crate) fn component_rows(g: &FiniteGraph, comp: &[usize], weight: impl Fn(usize) -> f64) -> Vec<Vec<(usize, f64)>> {
    comp.iter()
        .map(|&v| {
            let wv = weight(v);
            g.successors(v)
                .iter()
                .filter_map(|&(w, a)| comp.binary_search(&w).ok().map(|j| (j, a as f64 * wv)))
                .collect()
        })
        .collect()
}

/// Largest Perron radius over the nontrivial strongly connected components,
/// i.e. the spectral radius of the matrix induced on the cycle vertices.
fn cycle_radius(g: &FiniteGraph, tol: f64) -> Option<PerronPair> {
    nontrivial_sccs(g)
        .iter()
        .map(|c| perron(&component_rows(g, c, |_| 1.0), tol, MAX_ITERATIONS))
        .max_by(|a, b| a.rho.total_cmp(&b.rho))
}

/// `(Aⁿ_vv)` for `n = 1..=n_max`, exactly.
pub fn loop_counts(g: &FiniteGraph, v: usize, n_max: usize) -> Vec<BigUint> {
    let n = g.vertex_count();
    let mut x = vec![BigUint::zero(); n];
    x[v] = BigUint::from(1u8);
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let mut y = vec![BigUint::zero(); n];
        for u in 0..n {
            if x[u].is_zero() {
                continue;
            }
            for &(w, a) in g.successors(u) {
                y[w] += &x[u] * a;
            }
        }
        out.push(y[v].clone());
        x = y;
    }
    out
}

/// Natural logarithm of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    if let Some(f) = x.to_f64().filter(|f| f.is_finite()) {
        return f.ln();
    }
    let bits = x.bits();
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Beta0Method {
    ExactClosedForm,
    FinitePerron,
    TruncationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Beta0Bound {
    Exact,
    LowerBoundOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthEstimate {
    pub depth: usize,
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beta0Result {
    pub value: f64,
    pub bound: Beta0Bound,
    pub method: Beta0Method,
    pub certificate: Vec<DepthEstimate>,
    pub tolerance: f64,
    /// Certificate estimates are nondecreasing in depth and below `value`.
    pub monotone: bool,
    /// Estimates were still growing at the deepest truncation.
    pub diverging: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Beta0Options {
    pub schedule: Vec<usize>,
    pub tol: f64,
}

impl Beta0Options {
    /// Depths `D/8, D/4, D/2, 3D/4, D`.
    pub fn with_depth(depth: usize) -> Self {
        Self {
            schedule: depth_schedule(depth),
            tol: DEFAULT_TOL,
        }
    }
}

impl Default for Beta0Options {
    fn default() -> Self {
        Self::with_depth(50)
    }
}

pub fn depth_schedule(depth: usize) -> Vec<usize> {
    let mut s: Vec<usize> = [depth / 8, depth / 4, depth / 2, 3 * depth / 4, depth]
        .into_iter()
        .map(|d| d.max(1))
        .collect();
    s.dedup();
    s
}

/// Real root of `x³ − x − n`, the exponential of `β₀` for the arms family.
pub fn arms_alpha(arms: usize) -> f64 {
    let n = arms as f64;
    let p = |x: f64| x * x * x - x - n;
    // p is increasing for x ≥ 1 and p(1) < 0 < p(1 + n).
    let (mut lo, mut hi) = (1.0, 1.0 + n);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const CERTIFICATE_TOL: f64 = 1e-10;
const MONOTONE_SLACK: f64 = 1e-9;

fn truncation_estimates(family: &GraphFamily, schedule: &[usize]) -> Result<Vec<DepthEstimate>> {
    let mut out = Vec::new();
    for &depth in schedule {
        let g = family.truncation(depth)?;
        if let Some(p) = cycle_radius(&g, CERTIFICATE_TOL) {
            // The lower Collatz–Wielandt bound never exceeds the true radius.
            out.push(DepthEstimate {
                depth,
                estimate: p.lower.ln(),
            });
        }
    }
    Ok(out)
}

fn is_monotone(cert: &[DepthEstimate], value: f64) -> bool {
    cert.windows(2).all(|w| w[0].estimate <= w[1].estimate + MONOTONE_SLACK)
        && cert.iter().all(|e| e.estimate <= value + MONOTONE_SLACK)
}

pub fn beta0(family: &GraphFamily, opts: &Beta0Options) -> Result<Beta0Result> {
    if family.metadata().nw_class == Some(NwClass::Empty) {
        return Err(Error::NoLoops);
    }
    if let Some(g) = family.finite_graph() {
        let p = cycle_radius(&g, opts.tol).ok_or(Error::NoLoops)?;
        if !p.converged {
            return Err(Error::NonConvergence(format!(
                "power iteration bracket [{}, {}] after {} iterations",
                p.lower, p.upper, p.iterations
            )));
        }
        return Ok(Beta0Result {
            value: p.rho.ln(),
            bound: Beta0Bound::Exact,
            method: Beta0Method::FinitePerron,
            certificate: vec![],
            tolerance: opts.tol,
            monotone: true,
            diverging: false,
        });
    }

    let certificate = truncation_estimates(family, &opts.schedule)?;
    let closed = match family {
        GraphFamily::Arms { arms } => Some(arms_alpha(*arms).ln()),
        GraphFamily::LatticeWalk(w) => Some(w.minimize_mgf(DEFAULT_TOL)?.beta0),
        _ => None,
    };
    if let Some(value) = closed {
        return Ok(Beta0Result {
            monotone: is_monotone(&certificate, value),
            value,
            bound: Beta0Bound::Exact,
            method: Beta0Method::ExactClosedForm,
            certificate,
            tolerance: opts.tol,
            diverging: false,
        });
    }

    let last = certificate.last().ok_or(Error::NoLoops)?;
    let value = last.estimate;
    let n = certificate.len();
    let step = |i: usize| certificate[i].estimate - certificate[i - 1].estimate;
    let settled = n >= 2 && step(n - 1).abs() < opts.tol;
    let diverging = !settled && n >= 3 && step(n - 1) >= step(n - 2);
    Ok(Beta0Result {
        monotone: is_monotone(&certificate, value),
        value,
        bound: if settled {
            Beta0Bound::Exact
        } else {
            Beta0Bound::LowerBoundOnly
        },
        method: Beta0Method::TruncationLimit,
        certificate,
        tolerance: opts.tol,
        diverging,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecurrenceVerdict {
    Divergent,
    ConvergentSoFar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceResult {
    pub beta: f64,
    pub vertex: VertexId,
    pub n_max: usize,
    pub period: u64,
    pub verdict: RecurrenceVerdict,
    /// `Σ_{n=0}^{n_max} Aⁿ_vv e^{−nβ}`.
    pub partial_sum: f64,
    /// `n·tₙ` did not decrease over the second half of the range.
    pub nondecaying: bool,
    pub tail_estimate: Option<f64>,
}

pub const DEFAULT_SUM_BOUND: f64 = 10.0;

/// Partial sums of `Σ Aⁿ_vv e^{−nβ}`, used to decide uniqueness at `β₀`.
pub fn recurrence_test(
    family: &GraphFamily,
    beta: f64,
    v: &VertexId,
    n_max: usize,
    bound: f64,
) -> Result<RecurrenceResult> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let g = family.truncation(n_max)?;
    let vi = g.require(v)?;
    let counts = loop_counts(&g, vi, n_max);
    let period = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .fold(0u64, |acc, (i, _)| acc.gcd(&(i as u64 + 1)));

    // Terms along multiples of the period; index j stands for n = j·period.
    let mut terms: Vec<(usize, f64)> = vec![(0, 1.0)];
    for (i, c) in counts.iter().enumerate() {
        if !c.is_zero() {
            let n = i + 1;
            terms.push((n, (ln_big(c) - n as f64 * beta).exp()));
        }
    }
    let partial_sum: f64 = terms.iter().map(|(_, t)| t).sum();

    let k = terms.len();
    let nondecaying = k >= 4 && {
        let (n_mid, t_mid) = terms[k / 2];
        let (n_last, t_last) = terms[k - 1];
        n_last as f64 * t_last >= (1.0 - 1e-3) * n_mid as f64 * t_mid
    };
    let divergent = nondecaying && partial_sum > bound;

    let tail_estimate = if divergent || k < 3 {
        None
    } else {
        let (n1, t1) = terms[k - 2];
        let (n2, t2) = terms[k - 1];
        let q = (t2 / t1).powf(1.0 / (n2 - n1) as f64);
        if q < 1.0 - 1e-6 {
            Some(t2 * q.powi(period as i32) / (1.0 - q.powi(period as i32)))
        } else {
            let (nm, tm) = terms[k / 2];
            let p = -(t2 / tm).ln() / (n2 as f64 / nm as f64).ln();
            (p > 1.0).then(|| t2 * n2 as f64 / ((p - 1.0) * period.max(1) as f64))
        }
    };

    Ok(RecurrenceResult {
        beta,
        vertex: v.clone(),
        n_max,
        period,
        verdict: if divergent {
            RecurrenceVerdict::Divergent
        } else {
            RecurrenceVerdict::ConvergentSoFar
        },
        partial_sum,
        nondecaying,
        tail_estimate,
    })
}
