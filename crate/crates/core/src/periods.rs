//! Period invariants `d_G` and `d'_G`, the Γ-invariant sandwich
//! `ℤd'_Gβ ⊆ Γ ⊆ ℤd_Gβ`, and the resulting factor type.

use std::collections::{BTreeSet, VecDeque};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, FiniteGraph, GraphFamily, VertexId};
use crate::structure::hereditary_closure;

/// `d_v`: generator of the group of length differences of paths from `v`
/// with a common endpoint. BFS assigns reference lengths; each edge `u → w`
/// reachable from `v` contributes `ref(u) + 1 − ref(w)`.
pub fn vertex_period(g: &FiniteGraph, v: usize) -> u64 {
    let n = g.vertex_count();
    let mut reference = vec![usize::MAX; n];
    reference[v] = 0;
    let mut queue = VecDeque::from([v]);
    let mut d = 0u64;
    while let Some(u) = queue.pop_front() {
        for &(w, _) in g.successors(u) {
            if reference[w] == usize::MAX {
                reference[w] = reference[u] + 1;
                queue.push_back(w);
            } else {
                let gen = (reference[u] as i64 + 1 - reference[w] as i64).unsigned_abs();
                d = d.gcd(&gen);
            }
        }
    }
    d
}

/// Generator of `⋂_v ℤd_v` over `core` (all vertices when `None`): the lcm of
/// the `d_v`, or 0 as soon as one `d_v` is 0.
pub fn d_g_of(g: &FiniteGraph, core: Option<&BTreeSet<usize>>) -> u64 {
    let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
    let mut acc = 1u64;
    for &v in core.unwrap_or(&all) {
        let d = vertex_period(g, v);
        if d == 0 {
            return 0;
        }
        acc = acc.lcm(&d);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgMethod {
    ExactFinite,
    TruncationStabilized,
    /// The schedule ran out before three consecutive depths agreed.
    TruncationUnstable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgResult {
    pub value: u64,
    pub method: DgMethod,
    /// `(depth, value)` per probed truncation.
    pub history: Vec<(usize, u64)>,
}

pub const DEFAULT_PERIOD_SCHEDULE: [usize; 6] = [4, 6, 8, 10, 12, 16];

/// `d_G`, exactly for finite graphs and from truncations otherwise. On a
/// truncation of depth `k` only vertices of the depth-`⌊k/2⌋` truncation are
/// used, so that cut-off edges near the frontier do not inflate `d_v`.
pub fn d_g(family: &GraphFamily, schedule: &[usize]) -> Result<DgResult> {
    if let Some(g) = family.finite_graph() {
        let value = d_g_of(&g, None);
        return Ok(DgResult {
            value,
            method: DgMethod::ExactFinite,
            history: vec![],
        });
    }
    let mut history = Vec::new();
    for &k in schedule {
        let g = family.truncation(k)?;
        let core_ids = family.truncation((k / 2).max(1))?;
        let core: BTreeSet<usize> = core_ids
            .vertices()
            .iter()
            .map(|id| g.require(id))
            .collect::<Result<_>>()?;
        history.push((k, d_g_of(&g, Some(&core))));
        let n = history.len();
        if n >= 3 && history[n - 3..].iter().all(|h| h.1 == history[n - 1].1) {
            return Ok(DgResult {
                value: history[n - 1].1,
                method: DgMethod::TruncationStabilized,
                history,
            });
        }
    }
    let value = history
        .last()
        .map(|h| h.1)
        .ok_or_else(|| Error::InvalidArgument("empty depth schedule".into()))?;
    Ok(DgResult {
        value,
        method: DgMethod::TruncationUnstable,
        history,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub mu: Vec<EdgeId>,
    pub longer: Vec<EdgeId>,
    pub shorter: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedDifference {
    pub d: u64,
    /// Generators of the hereditary set `H`.
    pub hereditary_seed: Vec<VertexId>,
    pub m: usize,
    pub l: usize,
    /// Number of length-`m` paths checked (saturating).
    pub paths_covered: u64,
    /// One witness per endpoint pair; every length-`m` path shares its
    /// endpoints with one of them, and the condition only depends on those.
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DPrimeSearch {
    pub m_max: usize,
    pub l_max: usize,
    pub candidates: usize,
    pub certified: Vec<CertifiedDifference>,
    /// gcd of the certified differences; `ℤ·gcd ⊆ ℙ`.
    pub gcd: u64,
}

pub const DEFAULT_M_MAX: usize = 8;
pub const DEFAULT_L_MAX: usize = 8;

type Bits = Vec<u64>;

fn bit(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

/// `reach[ℓ]` = vertices at the end of a length-`ℓ` path from `s`.
fn layers(g: &FiniteGraph, s: usize, max_len: usize) -> Vec<Bits> {
    let words = g.vertex_count().div_ceil(64);
    let mut out = Vec::with_capacity(max_len + 1);
    let mut cur = vec![0u64; words];
    set_bit(&mut cur, s);
    out.push(cur.clone());
    for _ in 0..max_len {
        let mut next = vec![0u64; words];
        for v in 0..g.vertex_count() {
            if bit(&cur, v) {
                for &(w, _) in g.successors(v) {
                    set_bit(&mut next, w);
                }
            }
        }
        out.push(next.clone());
        cur = next;
    }
    out
}

/// A length-`len` path from the layer source to `r`, rebuilt backwards.
fn rebuild(g: &FiniteGraph, in_edges: &[Vec<usize>], reach: &[Bits], r: usize, len: usize) -> Vec<EdgeId> {
    let mut at = r;
    let mut edges = Vec::with_capacity(len);
    for l in (1..=len).rev() {
        let e = *in_edges[at]
            .iter()
            .find(|&&e| bit(&reach[l - 1], g.edge(e).src))
            .expect("layered reachability guarantees a predecessor");
        edges.push(g.edge(e).id.clone());
        at = g.edge(e).src;
    }
    edges.reverse();
    edges
}

fn count_paths(g: &FiniteGraph, s: usize, len: usize) -> u64 {
    let mut x = vec![0u64; g.vertex_count()];
    x[s] = 1;
    for _ in 0..len {
        let mut y = vec![0u64; g.vertex_count()];
        for v in 0..g.vertex_count() {
            for &(w, a) in g.successors(v) {
                y[w] = y[w].saturating_add(x[v].saturating_mul(a));
            }
        }
        x = y;
    }
    x.iter().fold(0u64, |a, b| a.saturating_add(*b))
}

/// Searches for `d` such that for every length-`M` path `μ` starting in
/// `starts` there are paths `l₊`, `l₋` of length at most `L` with the same
/// endpoints as `μ` and `|l₊| − |l₋| = d`. Paths of length below `M` from
/// `starts` must avoid the frontier.
fn search_from(
    g: &FiniteGraph,
    seed: &[VertexId],
    starts: &[usize],
    m_max: usize,
    l_max: usize,
    found: &mut Vec<CertifiedDifference>,
    stop_at: u64,
) -> Result<()> {
    let mut in_edges = vec![Vec::new(); g.vertex_count()];
    for (i, e) in g.edges().iter().enumerate() {
        in_edges[e.dst].push(i);
    }
    let max_len = m_max.max(l_max);
    let reach: Vec<Vec<Bits>> = starts.iter().map(|&s| layers(g, s, max_len)).collect();
    let known = |found: &Vec<CertifiedDifference>| found.iter().fold(0u64, |a, c| a.gcd(&c.d));

    for m in 1..=m_max {
        for r in &reach {
            for layer in &r[..m] {
                if let Some(v) = g.frontier().find(|&v| bit(layer, v)) {
                    return Err(Error::FrontierReached(g.vertex(v).to_string()));
                }
            }
        }
        for l in 1..=l_max {
            // Positive differences available for every endpoint pair.
            let mut common: Option<u64> = None;
            let mut pairs: Vec<(usize, usize, u64)> = Vec::new();
            for si in 0..starts.len() {
                for r in 0..g.vertex_count() {
                    if !bit(&reach[si][m], r) {
                        continue;
                    }
                    let lens: u64 = (0..=l)
                        .filter(|&k| bit(&reach[si][k], r))
                        .fold(0, |acc, k| acc | 1 << k);
                    let mut diffs = 0u64;
                    for a in 0..=l {
                        for b in 0..a {
                            if lens >> a & 1 == 1 && lens >> b & 1 == 1 {
                                diffs |= 1 << (a - b);
                            }
                        }
                    }
                    common = Some(common.map_or(diffs, |c| c & diffs));
                    pairs.push((si, r, lens));
                }
            }
            let common = common.unwrap_or(0);
            for d in 1..=l as u64 {
                if common >> d & 1 == 0 || found.iter().any(|c| c.d == d) {
                    continue;
                }
                let witnesses = pairs
                    .iter()
                    .map(|&(si, r, lens)| {
                        let b = (0..=l)
                            .find(|&b| lens >> b & 1 == 1 && lens >> (b + d as usize) & 1 == 1)
                            .expect("d is common");
                        Witness {
                            mu: rebuild(g, &in_edges, &reach[si], r, m),
                            longer: rebuild(g, &in_edges, &reach[si], r, b + d as usize),
                            shorter: rebuild(g, &in_edges, &reach[si], r, b),
                        }
                    })
                    .collect();
                found.push(CertifiedDifference {
                    d,
                    hereditary_seed: seed.to_vec(),
                    m,
                    l,
                    paths_covered: starts.iter().fold(0u64, |a, &s| a.saturating_add(count_paths(g, s, m))),
                    witnesses,
                });
                if stop_at > 0 && known(found) == stop_at {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}

/// Exhaustive search on a finite graph over the forward closures of single
/// vertices. Stops early once the certified gcd reaches `d_g` (when `> 0`).
pub fn d_prime_search(g: &FiniteGraph, m_max: usize, l_max: usize, d_g: u64) -> Result<DPrimeSearch> {
    check_bounds(m_max, l_max)?;
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let mut found = Vec::new();
    let mut candidates = 0;
    for v in 0..g.vertex_count() {
        let h = hereditary_closure(g, &BTreeSet::from([v]));
        if !seen.insert(h.clone()) {
            continue;
        }
        candidates += 1;
        let starts: Vec<usize> = h.into_iter().collect();
        search_from(g, &[g.vertex(v).clone()], &starts, m_max, l_max, &mut found, d_g)?;
        if d_g > 0 && gcd_of(&found) == d_g {
            break;
        }
    }
    Ok(finish(found, m_max, l_max, candidates))
}

/// Search on a family with a shift symmetry: only paths from the
/// fundamental domain are checked, on a truncation deep enough to contain
/// them and their witnesses.
pub fn d_prime_search_family(
    family: &GraphFamily,
    m_max: usize,
    l_max: usize,
    d_g: u64,
) -> Result<Option<DPrimeSearch>> {
    if let Some(g) = family.finite_graph() {
        return d_prime_search(&g, m_max, l_max, d_g).map(Some);
    }
    check_bounds(m_max, l_max)?;
    let Some(sym) = family.metadata().symmetry else {
        return Ok(None);
    };
    let g = family.truncation(sym.window_depth(m_max + l_max))?;
    let starts = sym
        .fundamental_domain
        .iter()
        .map(|v| g.require(v))
        .collect::<Result<Vec<_>>>()?;
    let mut found = Vec::new();
    search_from(&g, &sym.fundamental_domain, &starts, m_max, l_max, &mut found, d_g)?;
    Ok(Some(finish(found, m_max, l_max, 1)))
}

fn check_bounds(m_max: usize, l_max: usize) -> Result<()> {
    if m_max == 0 || l_max == 0 || l_max > 62 {
        return Err(Error::InvalidArgument("need 1 ≤ M_max and 1 ≤ L_max ≤ 62".into()));
    }
    Ok(())
}

fn gcd_of(found: &[CertifiedDifference]) -> u64 {
    found.iter().fold(0u64, |a, c| a.gcd(&c.d))
}

fn finish(mut found: Vec<CertifiedDifference>, m_max: usize, l_max: usize, candidates: usize) -> DPrimeSearch {
    found.sort_by_key(|c| c.d);
    DPrimeSearch {
        m_max,
        l_max,
        candidates,
        gcd: gcd_of(&found),
        certified: found,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DPrimeSource {
    Search,
    Declared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DPrime {
    Exact {
        value: u64,
        source: DPrimeSource,
    },
    /// `d'_G` divides `lower_certificate` and is a multiple of `upper_bound`
    /// (i.e. `ℤ·lower_certificate ⊆ ℤd'_G ⊆ ℤ·upper_bound`).
    Interval {
        lower_certificate: u64,
        upper_bound: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Gamma {
    Exact {
        d: u64,
        description: String,
    },
    Sandwich {
        lower: String,
        upper: String,
        description: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypotheses {
    /// `None` when undetermined.
    pub cofinal: Option<bool>,
    pub out_degree_bound: Option<usize>,
    /// Factor-type statements concern extremal weights.
    pub extremal_weight_assumed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub d_g: u64,
    pub d_g_method: DgMethod,
    pub d_g_history: Vec<(usize, u64)>,
    pub d_prime: DPrime,
    pub certificate: Option<DPrimeSearch>,
    pub gamma: Gamma,
    pub hypotheses: Hypotheses,
    /// Certified values agree with `ℤd'_G ⊆ ℤd_G`.
    pub consistent: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodOptions {
    pub schedule: Vec<usize>,
    pub m_max: usize,
    pub l_max: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        Self {
            schedule: DEFAULT_PERIOD_SCHEDULE.to_vec(),
            m_max: DEFAULT_M_MAX,
            l_max: DEFAULT_L_MAX,
        }
    }
}

fn group(d: u64) -> String {
    if d == 0 {
        "{0}".into()
    } else {
        format!("ℤ·{d}β")
    }
}

pub fn periods(family: &GraphFamily, opts: &PeriodOptions) -> Result<PeriodReport> {
    let dg = d_g(family, &opts.schedule)?;
    let meta = family.metadata();
    let mut notes = Vec::new();
    let search = d_prime_search_family(family, opts.m_max, opts.l_max, dg.value)?;
    let found = search.as_ref().map_or(0, |s| s.gcd);
    if search.is_none() {
        notes.push("no shift symmetry: paths beyond a truncation cannot be covered, so no d' search was run".into());
    }

    let d_prime = if dg.value > 0 && found == dg.value {
        DPrime::Exact {
            value: found,
            source: DPrimeSource::Search,
        }
    } else if let Some(declared) = meta.d_prime {
        notes.push(format!("d'_G = {declared} declared by the {} family", family.kind()));
        DPrime::Exact {
            value: declared,
            source: DPrimeSource::Declared,
        }
    } else {
        DPrime::Interval {
            lower_certificate: found,
            upper_bound: dg.value,
        }
    };

    // ℤd'_G ⊆ ℤd_G: d_G divides d'_G (0 is divisible by everything), and a
    // declared value must divide every certified difference.
    let divides = |a: u64, b: u64| if a == 0 { b == 0 } else { b.is_multiple_of(a) };
    let consistent = match &d_prime {
        DPrime::Exact { value, .. } => divides(dg.value, *value) && divides(*value, found),
        DPrime::Interval {
            lower_certificate,
            upper_bound,
        } => divides(*upper_bound, *lower_certificate),
    };

    let gamma = match &d_prime {
        DPrime::Exact { value, .. } if *value == dg.value => Gamma::Exact {
            d: dg.value,
            description: format!("Γ = {}", group(dg.value)),
        },
        DPrime::Exact { value, .. } => Gamma::Sandwich {
            lower: group(*value),
            upper: group(dg.value),
            description: format!("{} ⊆ Γ ⊆ {}", group(*value), group(dg.value)),
        },
        DPrime::Interval {
            lower_certificate,
            upper_bound,
        } => Gamma::Sandwich {
            lower: group(*lower_certificate),
            upper: group(*upper_bound),
            description: format!("{} ⊆ Γ ⊆ {}", group(*lower_certificate), group(*upper_bound)),
        },
    };

    let cofinal = if let Some(g) = family.finite_graph() {
        Some(crate::structure::is_cofinal(&g)?)
    } else {
        meta.cofinal
    };
    let out_degree_bound = family
        .finite_graph()
        .map(|g| g.max_out_degree())
        .or(meta.out_degree_bound);

    Ok(PeriodReport {
        d_g: dg.value,
        d_g_method: dg.method,
        d_g_history: dg.history,
        d_prime,
        certificate: search,
        gamma,
        hypotheses: Hypotheses {
            cofinal,
            out_degree_bound,
            extremal_weight_assumed: true,
        },
        consistent,
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FactorType {
    IiiLambda { lambda: f64, log_lambda: f64 },
    IiInfinity,
    Inconclusive { sandwich: String },
}

impl FactorType {
    pub fn label(&self) -> String {
        match self {
            FactorType::IiiLambda { lambda, .. } => format!("III_λ (λ = {lambda})"),
            FactorType::IiInfinity => "II_∞".into(),
            FactorType::Inconclusive { sandwich } => format!("inconclusive: {sandwich}"),
        }
    }
}

pub fn factor_type(report: &PeriodReport, beta: f64) -> FactorType {
    let agreed = match report.d_prime {
        DPrime::Exact { value, .. } if value == report.d_g => Some(value),
        _ => None,
    };
    match agreed {
        Some(d) if d > 0 && beta != 0.0 => {
            let log_lambda = -(d as f64) * beta.abs();
            FactorType::IiiLambda {
                lambda: log_lambda.exp(),
                log_lambda,
            }
        }
        Some(_) if beta == 0.0 => FactorType::IiInfinity,
        _ => {
            let (lo, hi) = match report.d_prime {
                DPrime::Exact { value, .. } => (value, report.d_g),
                DPrime::Interval {
                    lower_certificate,
                    upper_bound,
                } => (lower_certificate, upper_bound),
            };
            let show = |d: u64| {
                if d == 0 {
                    "{0}".to_string()
                } else {
                    format!("ℤ·{d}·({beta})")
                }
            };
            FactorType::Inconclusive {
                sandwich: format!("{} ⊆ Γ ⊆ {}", show(lo), show(hi)),
            }
        }
    }
}
