//! Nonnegative solutions of `Σ_w A_vw ξ_w = e^{βF₀(v)} ξ_v`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, FinitePath, GraphFamily, VertexId};
use crate::lattice::RayStructure;
use crate::spectral::{arms_alpha, component_rows, perron_with, DEFAULT_TOL, MAX_ITERATIONS};
use crate::structure::is_strongly_connected;

pub const VERIFY_TOL: f64 = 1e-10;

/// `F₀ : V → ℝ`, given as a default value plus per-vertex overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexPotential {
    #[serde(default = "one")]
    pub default: f64,
    #[serde(default)]
    pub overrides: BTreeMap<VertexId, f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    Mixed,
}

impl Default for VertexPotential {
    fn default() -> Self {
        Self::gauge()
    }
}

impl VertexPotential {
    /// The gauge action, `F₀ ≡ 1`.
    pub fn gauge() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            default: c,
            overrides: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::Parse(format!("not a vertex potential: {e}")))?;
        if !p.default.is_finite() || p.overrides.values().any(|x| !x.is_finite()) {
            return Err(Error::Parse("vertex potential values must be finite".into()));
        }
        Ok(p)
    }

    pub fn value(&self, v: &VertexId) -> f64 {
        self.overrides.get(v).copied().unwrap_or(self.default)
    }

    pub fn on(&self, g: &FiniteGraph) -> Vec<f64> {
        g.vertices().iter().map(|v| self.value(v)).collect()
    }

    /// `F₀(μ) = Σ F₀(s(eᵢ))`.
    pub fn path_value(&self, g: &FiniteGraph, mu: &FinitePath) -> f64 {
        mu.edge_sources(g).map(|v| self.value(g.vertex(v))).sum()
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.overrides
            .values()
            .all(|&x| x == self.default)
            .then_some(self.default)
    }

    pub fn is_gauge(&self) -> bool {
        self.constant_value() == Some(1.0)
    }

    pub fn sign_on(&self, g: &FiniteGraph) -> Sign {
        let vals = self.on(g);
        if vals.iter().all(|&x| x > 0.0) {
            Sign::Positive
        } else if vals.iter().all(|&x| x < 0.0) {
            Sign::Negative
        } else {
            Sign::Mixed
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    ClosedForm,
    Numeric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSolution {
    pub beta: f64,
    pub potential: VertexPotential,
    pub graph: Arc<FiniteGraph>,
    pub xi: Vec<f64>,
    pub base: usize,
    pub residual: f64,
    pub exactness: Exactness,
}

/// Serialized form of an [`EigenSolution`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub beta: f64,
    pub base_vertex: VertexId,
    pub xi: BTreeMap<VertexId, f64>,
    pub residual: f64,
    pub exactness: Exactness,
}

impl EigenSolution {
    pub fn xi_of(&self, v: &VertexId) -> Result<f64> {
        Ok(self.xi[self.graph.require(v)?])
    }

    pub fn base_vertex(&self) -> &VertexId {
        self.graph.vertex(self.base)
    }

    pub fn report(&self) -> EigenReport {
        EigenReport {
            beta: self.beta,
            base_vertex: self.base_vertex().clone(),
            xi: self
                .graph
                .vertices()
                .iter()
                .cloned()
                .zip(self.xi.iter().copied())
                .collect(),
            residual: self.residual,
            exactness: self.exactness,
        }
    }

    /// Rescales so that `ξ_base = 1` at the given vertex.
    pub fn normalized_at(mut self, base: usize) -> Result<Self> {
        let b = self.xi[base];
        if b <= 0.0 {
            return Err(Error::ZeroEntry(self.graph.vertex(base).to_string()));
        }
        for x in &mut self.xi {
            *x /= b;
        }
        self.base = base;
        self.residual = verify(&self.graph, self.beta, &self.potential, &self.xi)?.max_residual;
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub per_vertex: Vec<(VertexId, f64)>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub nonnegative: bool,
    pub pass: bool,
    pub frontier_excluded: Vec<VertexId>,
}

/// Residuals `|Σ_w A_vw ξ_w − e^{βF₀(v)} ξ_v| / max(1, ξ_v)` on the
/// non-frontier vertices, checked against [`VERIFY_TOL`].
pub fn verify(g: &FiniteGraph, beta: f64, f0: &VertexPotential, xi: &[f64]) -> Result<ResidualReport> {
    verify_with_tol(g, beta, f0, xi, VERIFY_TOL)
}

pub fn verify_with_tol(
    g: &FiniteGraph,
    beta: f64,
    f0: &VertexPotential,
    xi: &[f64],
    tol: f64,
) -> Result<ResidualReport> {
    if xi.len() < g.vertex_count() {
        return Err(Error::MissingValue(g.vertex(xi.len()).to_string()));
    }
    let ax = g.apply(xi);
    let mut per_vertex = Vec::new();
    let mut frontier_excluded = Vec::new();
    let mut max_residual = 0.0f64;
    for v in 0..g.vertex_count() {
        let id = g.vertex(v).clone();
        if g.is_frontier(v) {
            frontier_excluded.push(id);
            continue;
        }
        let r = (ax[v] - (beta * f0.value(&id)).exp() * xi[v]).abs() / xi[v].abs().max(1.0);
        max_residual = max_residual.max(r);
        per_vertex.push((id, r));
    }
    let nonnegative = xi.iter().all(|&x| x >= 0.0) && xi.iter().any(|&x| x > 0.0);
    Ok(ResidualReport {
        per_vertex,
        max_residual,
        tolerance: tol,
        nonnegative,
        pass: nonnegative && max_residual <= tol,
        frontier_excluded,
    })
}

/// [`verify`] for a vector given by vertex id.
pub fn verify_map(
    g: &FiniteGraph,
    beta: f64,
    f0: &VertexPotential,
    xi: &BTreeMap<VertexId, f64>,
) -> Result<ResidualReport> {
    let v = g
        .vertices()
        .iter()
        .map(|id| xi.get(id).copied().ok_or_else(|| Error::MissingValue(id.to_string())))
        .collect::<Result<Vec<_>>>()?;
    verify(g, beta, f0, &v)
}

fn resolve_base(g: &FiniteGraph, base: Option<&VertexId>) -> Result<usize> {
    match base {
        Some(b) => g.require(b),
        None => Ok(0),
    }
}

/// Target for the final eigenvector; iteration stops earlier once the
/// bracket stagnates at rounding level.
const POLISH_TOL: f64 = 1e-15;

/// Perron pair of `D(β)⁻¹A` with `D(β) = diag(e^{βF₀(v)})`.
fn scaled_perron(g: &FiniteGraph, f0: &[f64], beta: f64, target: f64) -> Result<crate::spectral::PerronPair> {
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    let rows = component_rows(g, &all, |v| (-beta * f0[v]).exp());
    let p = perron_with(&rows, target, DEFAULT_TOL, MAX_ITERATIONS);
    if !p.converged {
        return Err(Error::NonConvergence(format!(
            "power iteration bracket [{}, {}] after {} iterations",
            p.lower, p.upper, p.iterations
        )));
    }
    Ok(p)
}

/// The unique admissible `β` and its eigenvector on a strongly connected
/// finite graph, normalized at `base` (default: smallest vertex id).
pub fn solve_finite(g: &FiniteGraph, f0: &VertexPotential, base: Option<&VertexId>) -> Result<EigenSolution> {
    if g.has_frontier() {
        return Err(Error::InvalidArgument(
            "solve_finite needs a complete graph, not a truncation".into(),
        ));
    }
    if !is_strongly_connected(g) {
        return Err(Error::NotStronglyConnected);
    }
    let base = resolve_base(g, base)?;
    let fv = f0.on(g);
    let sign = f0.sign_on(g);
    if sign == Sign::Mixed {
        return Err(Error::MixedSignPotential);
    }

    let (beta, vector) = if let Some(c) = fv.iter().all(|&x| x == fv[0]).then_some(fv[0]) {
        let p = scaled_perron(g, &fv, 0.0, POLISH_TOL)?;
        (p.rho.ln() / c, p.vector)
    } else {
        // ρ(D(β)⁻¹A) is strictly monotone in β for sign-definite F₀.
        let h = |beta: f64| -> Result<f64> { Ok(scaled_perron(g, &fv, beta, DEFAULT_TOL)?.rho.ln()) };
        let decreasing = sign == Sign::Positive;
        let above = |x: f64| if decreasing { x > 0.0 } else { x < 0.0 };
        let (mut lo, mut hi) = (-1.0, 1.0);
        let mut width = 1.0;
        while !above(h(lo)?) || above(h(hi)?) {
            width *= 2.0;
            lo = -width;
            hi = width;
            if width > 1e6 {
                return Err(Error::NonConvergence("β bracket expansion failed".into()));
            }
        }
        while hi - lo > DEFAULT_TOL * lo.abs().max(hi.abs()).max(1.0) {
            let mid = 0.5 * (lo + hi);
            if above(h(mid)?) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let beta = 0.5 * (lo + hi);
        (beta, scaled_perron(g, &fv, beta, POLISH_TOL)?.vector)
    };

    let scale = vector[base];
    let xi: Vec<f64> = vector.iter().map(|x| x / scale).collect();
    let residual = verify(g, beta, f0, &xi)?.max_residual;
    Ok(EigenSolution {
        beta,
        potential: f0.clone(),
        graph: Arc::new(g.clone()),
        xi,
        base,
        residual,
        exactness: Exactness::Numeric,
    })
}

/// Frontier handling for the truncation iteration.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryPolicy {
    /// Frontier pinned to 0 and the base vertex to 1; yields the minimal
    /// solution through the base.
    Zero,
    /// Frontier pinned to user values (missing entries are 0); no base pin.
    Profile(BTreeMap<VertexId, f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Closed forms for built-in families, numeric otherwise.
    Auto,
    /// Always the truncation iteration.
    Numeric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilySolveOptions {
    pub depth: usize,
    pub boundary: BoundaryPolicy,
    pub base: Option<VertexId>,
    pub method: SolveMethod,
    /// Distance from `β₀` treated as `β = β₀`.
    pub beta_tol: f64,
}

impl Default for FamilySolveOptions {
    fn default() -> Self {
        Self {
            depth: 50,
            boundary: BoundaryPolicy::Zero,
            base: None,
            method: SolveMethod::Auto,
            beta_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RayKind {
    /// The solution is unique up to scaling.
    Unique,
    /// All extreme rays of the solution cone.
    ExtremeRays,
    /// Representative rays of a continuum of extreme rays.
    Sampled,
    /// The minimal solution of the truncation iteration only.
    Minimal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilySolutions {
    pub beta: f64,
    pub kind: RayKind,
    pub rays: Vec<EigenSolution>,
    pub notes: Vec<String>,
}

/// Per-arm positivity floor `e^{−2β}/(1−e^{−2β})` on `ξ_{x₁}`.
pub fn arms_floor(beta: f64) -> f64 {
    let q = (-2.0 * beta).exp();
    q / (1.0 - q)
}

fn arm_letters(g: &FiniteGraph) -> Vec<char> {
    let mut letters: Vec<char> = g
        .vertices()
        .iter()
        .filter_map(|v| v.as_str().strip_suffix("-1").and_then(|s| s.chars().next()))
        .collect();
    letters.sort_unstable();
    letters
}

/// Closed-form solution on an arms truncation with `ξ₁ = 1` and the given
/// excess `ξ_{x₁} − floor` on each arm.
pub fn arms_solution(g: Arc<FiniteGraph>, beta: f64, excess: &[f64]) -> Result<EigenSolution> {
    let letters = arm_letters(&g);
    if letters.len() != excess.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} arm parameters, got {}",
            letters.len(),
            excess.len()
        )));
    }
    let denom = 1.0 - (-2.0 * beta).exp();
    let mut xi = vec![0.0; g.vertex_count()];
    let base = g.require(&"1".into())?;
    xi[base] = 1.0;
    for (v, id) in g.vertices().iter().enumerate() {
        let s = id.as_str();
        let Some(letter) = s.chars().next().filter(|c| c.is_ascii_lowercase()) else {
            continue;
        };
        let arm = letters.iter().position(|&l| l == letter).expect("arm letter");
        let n: i64 = s[1..].parse().map_err(|_| Error::UnknownVertex(s.to_string()))?;
        xi[v] = if n < 0 {
            (beta * n as f64).exp()
        } else {
            let k = n as f64;
            (beta * (k - 1.0)).exp() * excess[arm] + (-beta * (k + 1.0)).exp() / denom
        };
    }
    let potential = VertexPotential::gauge();
    let residual = verify(&g, beta, &potential, &xi)?.max_residual;
    Ok(EigenSolution {
        beta,
        potential,
        graph: g,
        xi,
        base,
        residual,
        exactness: Exactness::ClosedForm,
    })
}

/// `r = e^{2β}/(1+e^β)`; the ladder solution is `ξ_{yₙ} = r^{n+1}`,
/// `ξ_{xₙ} = e^{−β} r^{n+1}`.
pub fn ladder_ratio(beta: f64) -> f64 {
    (2.0 * beta).exp() / (1.0 + beta.exp())
}

pub fn ladder_closed_form(id: &VertexId, beta: f64) -> Option<f64> {
    let s = id.as_str();
    if s == "1" {
        return Some(1.0);
    }
    let n: i32 = s.get(1..)?.parse().ok()?;
    // ln r^{n+1}, kept in log form so large depths do not overflow early.
    let ln_y = (n + 1) as f64 * (2.0 * beta - beta.exp().ln_1p());
    match s.as_bytes()[0] {
        b'y' => Some(ln_y.exp()),
        b'x' => Some((ln_y - beta).exp()),
        _ => None,
    }
}

fn ladder_solution(g: Arc<FiniteGraph>, beta: f64) -> Result<EigenSolution> {
    let xi = g
        .vertices()
        .iter()
        .map(|v| ladder_closed_form(v, beta).ok_or_else(|| Error::UnknownVertex(v.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let base = g.require(&"1".into())?;
    let potential = VertexPotential::gauge();
    let residual = verify(&g, beta, &potential, &xi)?.max_residual;
    Ok(EigenSolution {
        beta,
        potential,
        graph: g,
        xi,
        base,
        residual,
        exactness: Exactness::ClosedForm,
    })
}

const SWEEP_LIMIT: usize = 100_000;

/// Monotone Gauss–Seidel iteration `u_v ← e^{−βF₀(v)} Σ_w A_vw u_w` from
/// `u = 0` on the free vertices, with `pinned` values held fixed.
fn truncation_iteration(g: &FiniteGraph, beta: f64, f0: &[f64], pinned: &BTreeMap<usize, f64>) -> Result<Vec<f64>> {
    let n = g.vertex_count();
    let mut u = vec![0.0; n];
    for (&v, &x) in pinned {
        u[v] = x;
    }
    let free: Vec<usize> = (0..n).rev().filter(|v| !pinned.contains_key(v)).collect();
    let weight: Vec<f64> = f0.iter().map(|&f| (-beta * f).exp()).collect();
    for _ in 0..SWEEP_LIMIT {
        let mut changed = false;
        for &v in &free {
            let new = weight[v] * g.successors(v).iter().map(|&(w, a)| a as f64 * u[w]).sum::<f64>();
            if !new.is_finite() {
                return Err(Error::NonConvergence("truncation iteration overflowed".into()));
            }
            if (new - u[v]).abs() > 1e-15 * new.abs() {
                changed = true;
            }
            u[v] = new;
        }
        if !changed {
            return Ok(u);
        }
    }
    Err(Error::NonConvergence(format!(
        "truncation iteration did not settle within {SWEEP_LIMIT} sweeps"
    )))
}

fn numeric_solution(
    family: &GraphFamily,
    beta: f64,
    f0: &VertexPotential,
    opts: &FamilySolveOptions,
    depth: usize,
) -> Result<EigenSolution> {
    let g = Arc::new(family.truncation(depth)?);
    let fv = f0.on(&g);
    let base_id = opts.base.clone().unwrap_or_else(|| family.default_base(&g));
    let base = g.require(&base_id)?;
    let mut pinned = BTreeMap::new();
    for v in g.frontier() {
        pinned.insert(v, 0.0);
    }
    match &opts.boundary {
        BoundaryPolicy::Zero => {
            if g.is_frontier(base) {
                return Err(Error::InvalidArgument(format!(
                    "base vertex {base_id} is on the frontier"
                )));
            }
            pinned.insert(base, 1.0);
        }
        BoundaryPolicy::Profile(profile) => {
            for (id, &x) in profile {
                let v = g.require(id)?;
                if !g.is_frontier(v) {
                    return Err(Error::InvalidArgument(format!(
                        "profile vertex {id} is not on the frontier"
                    )));
                }
                pinned.insert(v, x);
            }
        }
    }
    let xi = truncation_iteration(&g, beta, &fv, &pinned)?;
    let residual = verify(&g, beta, f0, &xi)?.max_residual;
    Ok(EigenSolution {
        beta,
        potential: f0.clone(),
        graph: g,
        xi,
        base,
        residual,
        exactness: Exactness::Numeric,
    })
}

/// Checks that minimal-solution iterates grow pointwise with depth.
fn depth_monotone(coarse: &EigenSolution, fine: &EigenSolution) -> bool {
    coarse
        .graph
        .vertices()
        .iter()
        .zip(&coarse.xi)
        .all(|(id, &x)| fine.xi_of(id).map(|y| x <= y * (1.0 + 1e-12) + 1e-300).unwrap_or(false))
}

pub fn solve_family(
    family: &GraphFamily,
    beta: f64,
    f0: &VertexPotential,
    opts: &FamilySolveOptions,
) -> Result<FamilySolutions> {
    let closed = opts.method == SolveMethod::Auto && f0.is_gauge();
    match family {
        GraphFamily::Explicit(_) | GraphFamily::Rose { .. } => {
            let g = family.finite_graph().expect("finite family");
            let base = opts.base.clone().unwrap_or_else(|| family.default_base(&g));
            let s = solve_finite(&g, f0, Some(&base))?;
            if (s.beta - beta).abs() > opts.beta_tol {
                return Err(Error::Infeasible {
                    beta,
                    reason: format!(
                        "a strongly connected finite graph admits a nonnegative eigenvector only at β = {}",
                        s.beta
                    ),
                });
            }
            Ok(FamilySolutions {
                beta: s.beta,
                kind: RayKind::Unique,
                rays: vec![s],
                notes: vec![],
            })
        }
        GraphFamily::Arms { arms } if closed => {
            let n = *arms;
            if beta <= 0.0 {
                return Err(Error::Infeasible {
                    beta,
                    reason: "the arm floor e^{−2β}/(1−e^{−2β}) is not finite and positive for β ≤ 0".into(),
                });
            }
            let beta0 = arms_alpha(n).ln();
            let floor = arms_floor(beta);
            if beta < beta0 - opts.beta_tol {
                return Err(Error::Infeasible {
                    beta,
                    reason: format!(
                        "{n}·e^{{−2β}}/(1−e^{{−2β}}) = {} exceeds e^β = {}",
                        n as f64 * floor,
                        beta.exp()
                    ),
                });
            }
            let g = Arc::new(family.truncation(opts.depth)?);
            if (beta - beta0).abs() <= opts.beta_tol {
                let s = arms_solution(g, beta, &vec![0.0; n])?;
                return Ok(FamilySolutions {
                    beta,
                    kind: RayKind::Unique,
                    rays: vec![s],
                    notes: vec!["every arm sits at its floor".into()],
                });
            }
            let slack = beta.exp() - n as f64 * floor;
            let rays = (0..n)
                .map(|i| {
                    let mut excess = vec![0.0; n];
                    excess[i] = slack;
                    arms_solution(g.clone(), beta, &excess)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FamilySolutions {
                beta,
                kind: RayKind::ExtremeRays,
                rays,
                notes: vec!["one extreme ray per arm carrying the excess over the floor".into()],
            })
        }
        GraphFamily::Ladder if closed => {
            let g = Arc::new(family.truncation(opts.depth)?);
            Ok(FamilySolutions {
                beta,
                kind: RayKind::Unique,
                rays: vec![ladder_solution(g, beta)?],
                notes: vec![],
            })
        }
        GraphFamily::LatticeWalk(walk) if closed => {
            let report = walk.ray_structure(beta, opts.beta_tol)?;
            let radius = opts.depth.max(walk.support_radius());
            match report.structure {
                RayStructure::SingleRay { c } => Ok(FamilySolutions {
                    beta,
                    kind: RayKind::Unique,
                    rays: vec![walk.exponential_eigenvector(&c, radius)?],
                    notes: report.note.into_iter().collect(),
                }),
                RayStructure::Sphere {
                    sphere_dimension,
                    samples,
                } => Ok(FamilySolutions {
                    beta,
                    kind: if sphere_dimension == 0 {
                        RayKind::ExtremeRays
                    } else {
                        RayKind::Sampled
                    },
                    rays: samples
                        .iter()
                        .map(|p| walk.exponential_eigenvector(&p.c, radius))
                        .collect::<Result<Vec<_>>>()?,
                    notes: vec![format!(
                        "extreme rays form a sphere of dimension {sphere_dimension}, parametrized by direction"
                    )],
                }),
            }
        }
        _ => {
            let s = numeric_solution(family, beta, f0, opts, opts.depth)?;
            let mut notes = vec![];
            if opts.boundary == BoundaryPolicy::Zero {
                if s.residual > VERIFY_TOL {
                    return Err(Error::Undetermined(format!(
                        "the minimal truncation solution misses the eigen-equation by {:e} (at the base vertex); \
                         β = {beta} may not be admissible",
                        s.residual
                    )));
                }
                let coarse_depth = opts.depth / 2;
                if coarse_depth >= 1 {
                    if let Ok(coarse) = numeric_solution(family, beta, f0, opts, coarse_depth) {
                        if !depth_monotone(&coarse, &s) {
                            return Err(Error::NonConvergence(
                                "minimal-solution iterates are not monotone in depth".into(),
                            ));
                        }
                        notes.push(format!(
                            "iterates nondecreasing from depth {coarse_depth} to {}",
                            opts.depth
                        ));
                    }
                }
            } else if s.residual > VERIFY_TOL {
                notes.push(format!("residual {:e} exceeds the verify tolerance", s.residual));
            }
            Ok(FamilySolutions {
                beta,
                kind: if opts.boundary == BoundaryPolicy::Zero {
                    RayKind::Minimal
                } else {
                    RayKind::Unique
                },
                rays: vec![s],
                notes,
            })
        }
    }
}

/// Row-stochastic `B_vw = e^{−βF₀(v)} ξ_v⁻¹ ξ_w A_vw`; frontier rows are
/// left empty.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl StochasticMatrix {
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|(_, b)| b).sum()).collect()
    }
}

pub fn to_stochastic(g: &FiniteGraph, beta: f64, f0: &VertexPotential, xi: &[f64]) -> Result<StochasticMatrix> {
    if xi.len() < g.vertex_count() {
        return Err(Error::MissingValue(g.vertex(xi.len()).to_string()));
    }
    let rows = (0..g.vertex_count())
        .map(|v| {
            if g.is_frontier(v) {
                return Ok(vec![]);
            }
            if xi[v] <= 0.0 {
                return Err(Error::ZeroEntry(g.vertex(v).to_string()));
            }
            let c = (-beta * f0.value(g.vertex(v))).exp() / xi[v];
            Ok(g.successors(v)
                .iter()
                .map(|&(w, a)| (w, c * xi[w] * a as f64))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StochasticMatrix { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;

    fn cycle(n: usize) -> FiniteGraph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.vertex(format!("c{i}"));
            b.edge(format!("e{}", i + 1), format!("c{i}"), format!("c{}", (i + 1) % n));
        }
        b.build().unwrap()
    }

    fn rose(n: usize) -> FiniteGraph {
        GraphFamily::rose(n).unwrap().finite_graph().unwrap()
    }

    #[test]
    fn verify_examples() {
        let g = rose(2);
        let gauge = VertexPotential::gauge();
        let r = verify(&g, 2f64.ln(), &gauge, &[1.0]).unwrap();
        assert!(r.pass);
        assert!(r.max_residual < 1e-15);
        let r = verify(&g, 3f64.ln(), &gauge, &[1.0]).unwrap();
        assert!(!r.pass);
        assert!((r.max_residual - 1.0).abs() < 1e-12);
        assert!(matches!(verify(&g, 0.0, &gauge, &[]), Err(Error::MissingValue(_))));
    }

    #[test]
    fn ladder_closed_form_verifies() {
        for beta in [-2.0, -0.5, 0.0, 0.3, 1.0, 2.5] {
            let g = Arc::new(GraphFamily::Ladder.truncation(30).unwrap());
            let s = ladder_solution(g, beta).unwrap();
            assert!(s.residual < 1e-12, "β = {beta}: residual {}", s.residual);
            assert_eq!(s.xi_of(&"1".into()).unwrap(), 1.0);
        }
        let x0 = ladder_closed_form(&"x0".into(), 1.0).unwrap();
        assert!((x0 - 1f64.exp() / (1.0 + 1f64.exp())).abs() < 1e-15);
    }

    #[test]
    fn solve_finite_examples() {
        for n in 1..5 {
            let s = solve_finite(&rose(n), &VertexPotential::gauge(), None).unwrap();
            assert!((s.beta - (n as f64).ln()).abs() < 1e-12);
            assert_eq!(s.xi, vec![1.0]);
        }
        let s = solve_finite(&rose(3), &VertexPotential::constant(2.0), None).unwrap();
        assert!((s.beta - 0.5 * 3f64.ln()).abs() < 1e-12);
        let s = solve_finite(&cycle(3), &VertexPotential::gauge(), None).unwrap();
        assert!(s.beta.abs() < 1e-12);
        assert!(s.xi.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn solve_finite_nonconstant_potential() {
        // Two vertices a ⇄ b with a double loop at a; F₀(a) = 1, F₀(b) = 2.
        let mut b = GraphBuilder::new();
        b.vertex("a").vertex("b");
        b.edges("aa", "a", "a", 2).edge("ab", "a", "b").edge("ba", "b", "a");
        let g = b.build().unwrap();
        let mut f0 = VertexPotential::gauge();
        f0.overrides.insert("b".into(), 2.0);
        let s = solve_finite(&g, &f0, None).unwrap();
        assert!(s.residual < 1e-10);
        // Independent check: e^{2β}(e^β − 2) = 1 after eliminating ξ_b.
        let t = s.beta.exp();
        assert!((t * t * (t - 2.0) - 1.0).abs() < 1e-9);

        f0.overrides.insert("b".into(), -1.0);
        assert_eq!(solve_finite(&g, &f0, None).unwrap_err(), Error::MixedSignPotential);
    }

    #[test]
    fn solve_finite_rejects_reducible() {
        let mut b = GraphBuilder::new();
        b.vertex("a").vertex("b").edge("ab", "a", "b").edge("bb", "b", "b");
        let g = b.build().unwrap();
        assert_eq!(
            solve_finite(&g, &VertexPotential::gauge(), None).unwrap_err(),
            Error::NotStronglyConnected
        );
    }

    #[test]
    fn arms_rays() {
        let f = GraphFamily::arms(3).unwrap();
        let opts = FamilySolveOptions::default();
        let beta0 = arms_alpha(3).ln();
        let s = solve_family(&f, beta0, &VertexPotential::gauge(), &opts).unwrap();
        assert_eq!(s.kind, RayKind::Unique);
        let floor = arms_floor(beta0);
        for a in ["a1", "b1", "c1"] {
            assert!((s.rays[0].xi_of(&a.into()).unwrap() - floor).abs() < 1e-15);
        }
        assert!(s.rays[0].residual < 1e-10);

        let beta = beta0 + 0.5;
        let s = solve_family(&f, beta, &VertexPotential::gauge(), &opts).unwrap();
        assert_eq!(s.kind, RayKind::ExtremeRays);
        assert_eq!(s.rays.len(), 3);
        for r in &s.rays {
            assert!(r.residual < 1e-10);
        }

        let err = solve_family(&f, 0.3, &VertexPotential::gauge(), &opts).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn numeric_ladder_with_profile_matches_closed_form() {
        let depth = 20;
        let beta = 0.7;
        let mut profile = BTreeMap::new();
        let y = VertexId::from(format!("y{depth}"));
        profile.insert(y.clone(), ladder_closed_form(&y, beta).unwrap());
        let opts = FamilySolveOptions {
            depth,
            boundary: BoundaryPolicy::Profile(profile),
            method: SolveMethod::Numeric,
            ..Default::default()
        };
        let s = solve_family(&GraphFamily::Ladder, beta, &VertexPotential::gauge(), &opts).unwrap();
        let sol = &s.rays[0];
        for (id, &x) in sol.graph.vertices().iter().zip(&sol.xi) {
            let c = ladder_closed_form(id, beta).unwrap();
            assert!((x - c).abs() <= 1e-12 * c.max(1.0), "{id}: {x} vs {c}");
        }
    }

    #[test]
    fn numeric_minimal_solution_for_arms() {
        let opts = FamilySolveOptions {
            depth: 40,
            method: SolveMethod::Numeric,
            ..Default::default()
        };
        let f = GraphFamily::arms(3).unwrap();
        let beta0 = arms_alpha(3).ln();
        let s = solve_family(&f, beta0, &VertexPotential::gauge(), &opts).unwrap();
        assert_eq!(s.kind, RayKind::Minimal);
        let x = s.rays[0].xi_of(&"a1".into()).unwrap();
        assert!((x - arms_floor(beta0)).abs() < 1e-10);
        assert!(matches!(
            solve_family(&f, beta0 + 0.5, &VertexPotential::gauge(), &opts),
            Err(Error::Undetermined(_))
        ));
    }

    #[test]
    fn stochastic_examples() {
        let b = to_stochastic(&rose(2), 2f64.ln(), &VertexPotential::gauge(), &[1.0]).unwrap();
        assert_eq!(b.rows, vec![vec![(0, 1.0)]]);
        let b = to_stochastic(&cycle(3), 0.0, &VertexPotential::gauge(), &[1.0; 3]).unwrap();
        assert_eq!(b.rows, vec![vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 1.0)]]);

        let g = Arc::new(GraphFamily::Ladder.truncation(20).unwrap());
        let s = ladder_solution(g.clone(), 1.0).unwrap();
        let b = to_stochastic(&g, 1.0, &VertexPotential::gauge(), &s.xi).unwrap();
        for (v, sum) in b.row_sums().iter().enumerate() {
            if !g.is_frontier(v) {
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(
            to_stochastic(&rose(1), 0.0, &VertexPotential::gauge(), &[0.0]),
            Err(Error::ZeroEntry(_))
        ));
    }

    #[test]
    fn potential_document() {
        let p = VertexPotential::from_json(r#"{"default": 2, "overrides": {"v": 3}}"#).unwrap();
        assert_eq!(p.value(&"v".into()), 3.0);
        assert_eq!(p.value(&"w".into()), 2.0);
        assert!(VertexPotential::from_json("42").is_err());
    }
}
