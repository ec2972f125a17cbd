//! Translation-invariant graphs on `ℤ^d`.
//!
//! A finitely supported `μ : ℤ^d → ℕ` defines `A_vw = μ(w − v)`. The
//! exponentials `f_c(v) = exp(<c, v>)` are positive eigenvectors with
//! `e^β = Σ_w μ(w) e^{<c, w>}`, so the critical value `β₀` is the log of the
//! minimum of that moment generating function over `c ∈ ℝ^d`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::eigen::{verify, EigenSolution, Exactness, VertexPotential};
use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, GraphBuilder, VertexId};

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeWalk {
    dim: usize,
    steps: Vec<(Vec<i64>, u64)>,
}

/// Result of the bounded check that the support generates `ℤ^d` as a
/// semigroup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupCheck {
    pub max_word_length: usize,
    pub zero_expressible: bool,
    pub units_reachable: bool,
    pub spans: bool,
}

impl SemigroupCheck {
    pub fn generates(&self) -> bool {
        self.zero_expressible && self.units_reachable
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MgfEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfSolution {
    pub c_min: Vec<f64>,
    pub beta0: f64,
    pub drift: Vec<f64>,
    /// Drift `Σ μ(w) w` vanishes.
    pub degenerate: bool,
    pub gradient_norm: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RayStructure {
    /// `β = β₀`: the level set `{c : MGF(c) = e^β}` is the single point
    /// `c_min`.
    SingleRay { c: Vec<f64> },
    /// `β > β₀`: extreme rays correspond to the points of a sphere
    /// `S^{d−1}`, parametrized by direction from `c_min`. `samples` are the
    /// level-set points in the `±e_i` directions.
    Sphere {
        sphere_dimension: usize,
        samples: Vec<LevelSetPoint>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetPoint {
    pub direction: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayReport {
    pub beta: f64,
    pub beta0: f64,
    pub drift_zero: bool,
    pub structure: RayStructure,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

const NEWTON_MAX_ITER: usize = 200;

impl LatticeWalk {
    pub fn new(dim: usize, steps: impl IntoIterator<Item = (Vec<i64>, u64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("lattice dimension must be positive".into()));
        }
        let mut merged: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        for (w, count) in steps {
            if w.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "step {w:?} does not have dimension {dim}"
                )));
            }
            if count > 0 {
                *merged.entry(w).or_insert(0) += count;
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidArgument("μ has empty support".into()));
        }
        Ok(Self {
            dim,
            steps: merged.into_iter().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> &[(Vec<i64>, u64)] {
        &self.steps
    }

    pub fn total_mass(&self) -> u64 {
        self.steps.iter().map(|(_, c)| c).sum()
    }

    /// Largest coordinate of a support vector in absolute value (at least 1).
    pub fn support_radius(&self) -> usize {
        self.steps
            .iter()
            .flat_map(|(w, _)| w.iter().map(|x| x.unsigned_abs() as usize))
            .max()
            .unwrap_or(0)
            .max(1)
    }

    pub fn drift(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (w, c) in &self.steps {
            for (di, wi) in d.iter_mut().zip(w) {
                *di += *c as f64 * *wi as f64;
            }
        }
        d
    }

    pub fn to_params(&self) -> serde_json::Value {
        let mu: Vec<_> = self.steps.iter().map(|(w, c)| json!({"w": w, "count": c})).collect();
        json!({"d": self.dim, "mu": mu})
    }

    pub fn vertex_id(&self, v: &[i64]) -> VertexId {
        let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        VertexId::new(format!("({})", parts.join(",")))
    }

    pub fn parse_vertex(&self, id: &VertexId) -> Option<Vec<i64>> {
        let s = id.as_str().strip_prefix('(')?.strip_suffix(')')?;
        let v: Vec<i64> = s.split(',').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
        (v.len() == self.dim).then_some(v)
    }

    fn box_points(&self, radius: i64) -> Vec<Vec<i64>> {
        let mut points = vec![vec![]];
        for _ in 0..self.dim {
            points = points
                .into_iter()
                .flat_map(|p| {
                    (-radius..=radius).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        points
    }

    /// The induced graph on the box `[−R, R]^d`. Vertices with a step
    /// leaving the box form the frontier.
    pub fn truncation(&self, radius: usize) -> Result<FiniteGraph> {
        if radius == 0 {
            return Err(Error::InvalidArgument("truncation radius must be at least 1".into()));
        }
        let r = radius as i64;
        let inside = |p: &[i64]| p.iter().all(|x| x.abs() <= r);
        let mut b = GraphBuilder::new();
        for p in self.box_points(r) {
            let id = self.vertex_id(&p);
            b.vertex(id.clone());
            for (w, count) in &self.steps {
                let q: Vec<i64> = p.iter().zip(w).map(|(a, b)| a + b).collect();
                if inside(&q) {
                    let qid = self.vertex_id(&q);
                    b.edges(format!("{id}>{qid}"), id.clone(), qid, *count);
                } else {
                    b.frontier(id.clone());
                }
            }
        }
        b.build()
    }

    /// Bounded search: is `0` a non-empty word in the support, and are all
    /// `±e_i` reachable with words of length at most `max_word_length`?
    pub fn semigroup_check(&self, max_word_length: usize) -> SemigroupCheck {
        let targets: Vec<Vec<i64>> = (0..self.dim)
            .flat_map(|i| {
                [1i64, -1].map(|s| {
                    let mut e = vec![0; self.dim];
                    e[i] = s;
                    e
                })
            })
            .collect();
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut layer: BTreeSet<Vec<i64>> = self.steps.iter().map(|(w, _)| w.clone()).collect();
        let bound = (max_word_length * self.support_radius()) as i64;
        for _ in 1..=max_word_length {
            seen.extend(layer.iter().cloned());
            let mut next = BTreeSet::new();
            for p in &layer {
                for (w, _) in &self.steps {
                    let q: Vec<i64> = p.iter().zip(w).map(|(a, b)| a + b).collect();
                    if q.iter().all(|x| x.abs() <= bound) && !seen.contains(&q) {
                        next.insert(q);
                    }
                }
            }
            layer = next;
        }
        SemigroupCheck {
            max_word_length,
            zero_expressible: seen.contains(&vec![0; self.dim]),
            units_reachable: targets.iter().all(|t| seen.contains(t)),
            spans: self.span_basis().ncols() == self.dim,
        }
    }

    /// Orthonormal basis (columns) of the span of the support.
    fn span_basis(&self) -> DMatrix<f64> {
        let m = self.steps.len();
        let w = DMatrix::from_fn(self.dim, m, |i, j| self.steps[j].0[i] as f64);
        let svd = w.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let smax = svd.singular_values.max();
        let cols: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-10 * smax.max(1.0))
            .collect();
        DMatrix::from_fn(self.dim, cols.len(), |i, j| u[(i, cols[j])])
    }

    /// Value, gradient and Hessian of `c ↦ Σ μ(w) e^{<c, w>}`.
    pub fn mgf(&self, c: &[f64]) -> MgfEval {
        let d = self.dim;
        let mut value = 0.0;
        let mut gradient = vec![0.0; d];
        let mut hessian = vec![vec![0.0; d]; d];
        for (w, count) in &self.steps {
            let dot: f64 = c.iter().zip(w).map(|(ci, wi)| ci * *wi as f64).sum();
            let t = *count as f64 * dot.exp();
            value += t;
            for i in 0..d {
                gradient[i] += t * w[i] as f64;
                for j in 0..d {
                    hessian[i][j] += t * (w[i] * w[j]) as f64;
                }
            }
        }
        MgfEval {
            value,
            gradient,
            hessian,
        }
    }

    /// `β` for which `f_c` is an `e^β`-eigenvector.
    pub fn beta_for(&self, c: &[f64]) -> f64 {
        self.mgf(c).value.ln()
    }

    /// Newton's method with step halving on the moment generating function,
    /// started at `c = 0`. When the support does not span `ℝ^d` the search
    /// is restricted to its span.
    pub fn minimize_mgf(&self, tol: f64) -> Result<MgfSolution> {
        let basis = self.span_basis();
        let r = basis.ncols();
        let mut y = DVector::<f64>::zeros(r);
        let to_c = |y: &DVector<f64>| -> Vec<f64> { (&basis * y).iter().copied().collect() };

        let reduced = |c: &[f64]| -> (f64, DVector<f64>, DMatrix<f64>) {
            let e = self.mgf(c);
            let g = DVector::from_vec(e.gradient);
            let h = DMatrix::from_fn(self.dim, self.dim, |i, j| e.hessian[i][j]);
            (e.value, basis.transpose() * g, basis.transpose() * h * &basis)
        };

        for iter in 0..NEWTON_MAX_ITER {
            let c = to_c(&y);
            let (f, g, h) = reduced(&c);
            let gnorm = g.norm();
            // Scaled by min(1, f) so that a minimizing sequence running off
            // to infinity (where f and its gradient both vanish) never
            // counts as converged.
            if gnorm < tol * f.min(1.0) {
                return Ok(self.solution(c, gnorm, iter));
            }
            let step = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => h
                    .lu()
                    .solve(&(-&g))
                    .ok_or_else(|| Error::NonConvergence("singular MGF Hessian".into()))?,
            };
            let slope = g.dot(&step);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-30 {
                let cand = &y + &step * t;
                let fc = self.mgf(&to_c(&cand)).value;
                if fc <= f + 1e-4 * t * slope {
                    y = cand;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                // No representable decrease left: accept if the gradient is
                // already at rounding level relative to the value.
                if gnorm < 1e3 * f64::EPSILON * f {
                    return Ok(self.solution(c, gnorm, iter));
                }
                return Err(Error::NonConvergence(format!(
                    "MGF line search stalled with gradient norm {gnorm:e}"
                )));
            }
        }
        Err(Error::NonConvergence(format!(
            "Newton did not reach gradient norm {tol:e} in {NEWTON_MAX_ITER} iterations; \
             the support may not surround the origin"
        )))
    }

    fn solution(&self, c_min: Vec<f64>, gradient_norm: f64, iterations: usize) -> MgfSolution {
        let drift = self.drift();
        MgfSolution {
            beta0: self.beta_for(&c_min),
            degenerate: drift.iter().all(|x| *x == 0.0),
            c_min,
            drift,
            gradient_norm,
            iterations,
        }
    }

    /// `f_c` restricted to the box of the given radius, as an
    /// `e^β`-eigenvector with `β` from the moment generating function.
    pub fn exponential_eigenvector(&self, c: &[f64], radius: usize) -> Result<EigenSolution> {
        if c.len() != self.dim {
            return Err(Error::InvalidArgument(format!("c must have dimension {}", self.dim)));
        }
        if radius < self.support_radius() {
            return Err(Error::InvalidArgument(format!(
                "window radius {radius} is smaller than the support radius {}",
                self.support_radius()
            )));
        }
        let g = Arc::new(self.truncation(radius)?);
        let beta = self.beta_for(c);
        let xi: Vec<f64> = g
            .vertices()
            .iter()
            .map(|id| {
                let v = self.parse_vertex(id).expect("lattice vertex id");
                c.iter().zip(&v).map(|(ci, vi)| ci * *vi as f64).sum::<f64>().exp()
            })
            .collect();
        let base = g.require(&self.vertex_id(&vec![0; self.dim]))?;
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

    /// Point `c_min + t·u` (`t ≥ 0`) of the level set `MGF = e^β`.
    pub fn level_set_point(&self, c_min: &[f64], direction: &[f64], beta: f64) -> Result<Vec<f64>> {
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("direction must be non-zero".into()));
        }
        let u: Vec<f64> = direction.iter().map(|x| x / norm).collect();
        let at = |t: f64| -> Vec<f64> { c_min.iter().zip(&u).map(|(c, ui)| c + t * ui).collect() };
        let target = beta;
        let h = |t: f64| self.beta_for(&at(t)) - target;
        if h(0.0) > 0.0 {
            return Err(Error::Infeasible {
                beta,
                reason: "β is below the minimum of the moment generating function".into(),
            });
        }
        let mut hi = 1.0;
        while h(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::NonConvergence(
                    "moment generating function does not grow in this direction".into(),
                ));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        Ok(at(0.5 * (lo + hi)))
    }

    /// Extreme-ray structure of the positive `e^β`-eigenvectors.
    pub fn ray_structure(&self, beta: f64, tol: f64) -> Result<RayReport> {
        let sol = self.minimize_mgf(1e-12)?;
        if beta < sol.beta0 - tol {
            return Err(Error::Infeasible {
                beta,
                reason: format!("β is below β₀ = {}", sol.beta0),
            });
        }
        let drift_zero = sol.degenerate;
        let note = (drift_zero && self.dim <= 2).then(|| {
            "drift-zero walk in dimension 1 or 2 (recurrent case): uniqueness at β₀ is quoted from \
             the recurrent theory, not derived computationally"
                .to_string()
        });
        let structure = if (beta - sol.beta0).abs() <= tol {
            RayStructure::SingleRay { c: sol.c_min.clone() }
        } else {
            let mut samples = Vec::with_capacity(2 * self.dim);
            for i in 0..self.dim {
                for s in [1.0, -1.0] {
                    let mut u = vec![0.0; self.dim];
                    u[i] = s;
                    let c = self.level_set_point(&sol.c_min, &u, beta)?;
                    samples.push(LevelSetPoint { direction: u, c });
                }
            }
            RayStructure::Sphere {
                sphere_dimension: self.dim - 1,
                samples,
            }
        };
        Ok(RayReport {
            beta,
            beta0: sol.beta0,
            drift_zero,
            structure,
            note,
        })
    }
}
