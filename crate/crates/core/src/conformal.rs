//! Conformal measures on cylinder sets, `m(Z(μ)) = e^{−βF₀(μ)} ξ_{r(μ)}`,
//! and the state/weight decision.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::eigen::{arms_floor, ladder_ratio, EigenSolution};
use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, FinitePath, GraphFamily, VertexId};

pub const DEFECT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMeasure {
    solution: EigenSolution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub checked: usize,
    pub worst_defect: f64,
    pub worst_path: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuelleReport {
    /// `Σ_e m(Z(μe))`.
    pub lhs: f64,
    /// `e^{−βF₀(s(μ))} m(σZ(μ))`.
    pub rhs: f64,
    pub defect: f64,
    pub pass: bool,
}

fn relative_defect(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

impl CylinderMeasure {
    pub fn new(solution: EigenSolution) -> Self {
        Self { solution }
    }

    pub fn solution(&self) -> &EigenSolution {
        &self.solution
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.solution.graph
    }

    fn check_path(&self, mu: &FinitePath) -> Result<()> {
        let g = self.graph();
        if mu.source() >= g.vertex_count() || mu.edges().iter().any(|&e| e >= g.edge_count()) {
            return Err(Error::InvalidArgument("path does not belong to this graph".into()));
        }
        FinitePath::from_edges(g, mu.edges().to_vec()).map(|_| ()).or_else(
            |e| {
                if mu.is_empty() {
                    Ok(())
                } else {
                    Err(e)
                }
            },
        )
    }

    /// `m(Z(μ))`; the empty path at `v` gives `m(C_v) = ξ_v`.
    pub fn measure_of(&self, mu: &FinitePath) -> Result<f64> {
        self.check_path(mu)?;
        Ok(self.eval(mu))
    }

    fn eval(&self, mu: &FinitePath) -> f64 {
        let g = self.graph();
        let s = &self.solution;
        (-s.beta * s.potential.path_value(g, mu)).exp() * s.xi[mu.range(g)]
    }

    fn refinement_sum(&self, mu: &FinitePath) -> Result<f64> {
        let g = self.graph();
        let r = mu.range(g);
        if g.is_frontier(r) {
            return Err(Error::FrontierReached(g.vertex(r).to_string()));
        }
        let mut sum = 0.0;
        for e in g.out_edge_indices(r) {
            sum += self.eval(&mu.extended(g, e)?);
        }
        Ok(sum)
    }

    /// Refines `Z(μ)` into one-edge extensions recursively, `depth` levels
    /// deep, and reports the largest relative defect of
    /// `m(Z(ν)) = Σ_e m(Z(νe))`.
    pub fn check_additivity(&self, mu: &FinitePath, depth: usize) -> Result<AdditivityReport> {
        self.check_path(mu)?;
        let g = self.graph();
        let mut worst = (0.0f64, mu.display(g).to_string());
        let mut checked = 0;
        let mut level = vec![mu.clone()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for nu in &level {
                let d = relative_defect(self.eval(nu), self.refinement_sum(nu)?);
                checked += 1;
                if d > worst.0 {
                    worst = (d, nu.display(g).to_string());
                }
                for e in g.out_edge_indices(nu.range(g)) {
                    next.push(nu.extended(g, e)?);
                }
            }
            level = next;
        }
        Ok(AdditivityReport {
            checked,
            worst_defect: worst.0,
            worst_path: worst.1,
            pass: worst.0 <= DEFECT_TOL,
        })
    }

    /// Dual Ruelle identity on `Z(μ)`: the measure of `Z(μ)`, taken through
    /// its one-step refinement, equals `e^{−βF₀(s(μ))}` times the measure of
    /// the shifted cylinder (`ξ_{r(e)}` when `μ = e`).
    pub fn ruelle_dual_check(&self, mu: &FinitePath) -> Result<RuelleReport> {
        self.check_path(mu)?;
        let g = self.graph();
        let s = &self.solution;
        let shifted = mu
            .shifted(g)
            .ok_or_else(|| Error::InvalidArgument("the Ruelle check needs a non-empty path".into()))?;
        let lhs = self.refinement_sum(mu)?;
        let src = g.vertex(mu.source());
        let rhs = (-s.beta * s.potential.value(src)).exp() * self.eval(&shifted);
        let defect = relative_defect(lhs, rhs);
        Ok(RuelleReport {
            lhs,
            rhs,
            defect,
            pass: defect <= DEFECT_TOL,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateVerdict {
    StateWithNormalization,
    WeightOnly,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub depth: usize,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateCheck {
    pub beta: f64,
    pub verdict: StateVerdict,
    /// `Σ_v ξ_v` when finite.
    pub total: Option<f64>,
    /// `ξ/Σξ` on the analyzed vertices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized: Option<BTreeMap<VertexId, f64>>,
    pub partial_sums: Vec<PartialSum>,
    pub certificate: String,
}

/// Excess over the floor below which an arm counts as sitting at it.
const ARM_EXCESS_TOL: f64 = 1e-9;

fn partial_sums(family: &GraphFamily, s: &EigenSolution, schedule: &[usize]) -> Result<Vec<PartialSum>> {
    let mut out = Vec::new();
    for &depth in schedule {
        let t = family.truncation(depth)?;
        let ids: BTreeSet<&VertexId> = t.vertices().iter().collect();
        if !ids.iter().all(|id| s.graph.index_of(id).is_some()) {
            continue;
        }
        let sum = s
            .graph
            .vertices()
            .iter()
            .zip(&s.xi)
            .filter(|(id, _)| ids.contains(id))
            .map(|(_, x)| x)
            .sum();
        out.push(PartialSum { depth, sum });
    }
    Ok(out)
}

fn normalized(s: &EigenSolution, total: f64) -> BTreeMap<VertexId, f64> {
    s.graph
        .vertices()
        .iter()
        .cloned()
        .zip(s.xi.iter().map(|x| x / total))
        .collect()
}

/// Decides whether the weight given by `solution` normalizes to a state,
/// i.e. whether `Σ_v ξ_v < ∞`.
pub fn state_check(family: &GraphFamily, solution: &EigenSolution, schedule: &[usize]) -> Result<StateCheck> {
    let s = solution;
    let beta = s.beta;
    let gauge = s.potential.is_gauge();

    if family.is_finite() {
        let total: f64 = s.xi.iter().sum();
        return Ok(StateCheck {
            beta,
            verdict: StateVerdict::StateWithNormalization,
            total: Some(total),
            normalized: Some(normalized(s, total)),
            partial_sums: vec![],
            certificate: "finite vertex set: exact sum".into(),
        });
    }
    let sums = partial_sums(family, s, schedule)?;

    match family {
        GraphFamily::Arms { arms } if gauge && beta > 0.0 => {
            let one = s.xi_of(&"1".into())?;
            let floor = arms_floor(beta);
            let letters: Vec<char> = "abcdefghijklmnopqrstuvwxyz".chars().take(*arms).collect();
            let mut worst: Option<(char, f64)> = None;
            for l in &letters {
                let excess = s.xi_of(&format!("{l}1").into())? / one - floor;
                if excess > ARM_EXCESS_TOL * beta.exp() && worst.is_none_or(|(_, e)| excess > e) {
                    worst = Some((*l, excess));
                }
            }
            if let Some((l, excess)) = worst {
                return Ok(StateCheck {
                    beta,
                    verdict: StateVerdict::WeightOnly,
                    total: None,
                    normalized: None,
                    partial_sums: sums,
                    certificate: format!(
                        "arm {l} exceeds its floor by {excess:e}, so ξ_{{{l}(n+1)}} ≥ e^{{nβ}}·{excess:e} grows without bound"
                    ),
                });
            }
            let q = (-beta).exp();
            let per_arm = q / (1.0 - q) + q * q / ((1.0 - q) * (1.0 - q * q));
            let total = one * (1.0 + *arms as f64 * per_arm);
            Ok(StateCheck {
                beta,
                verdict: StateVerdict::StateWithNormalization,
                total: Some(total),
                normalized: Some(normalized(s, total)),
                partial_sums: sums,
                certificate: format!("every arm at its floor: geometric tails with ratio e^{{−β}} = {q}"),
            })
        }
        GraphFamily::Ladder if gauge => {
            let one = s.xi_of(&"1".into())?;
            let r = ladder_ratio(beta);
            if r < 1.0 {
                let total = one * (1.0 + (1.0 + (-beta).exp()) * r / (1.0 - r));
                Ok(StateCheck {
                    beta,
                    verdict: StateVerdict::StateWithNormalization,
                    total: Some(total),
                    normalized: Some(normalized(s, total)),
                    partial_sums: sums,
                    certificate: format!("geometric columns with ratio e^{{2β}}/(1+e^β) = {r} < 1"),
                })
            } else {
                Ok(StateCheck {
                    beta,
                    verdict: StateVerdict::WeightOnly,
                    total: None,
                    normalized: None,
                    partial_sums: sums,
                    certificate: format!("ratio e^{{2β}}/(1+e^β) = {r} ≥ 1, so ξ_{{yₙ}} does not tend to 0"),
                })
            }
        }
        GraphFamily::LatticeWalk(walk) => {
            let origin = s.xi_of(&walk.vertex_id(&vec![0; walk.dim()]))?;
            // Recover c from ξ(±e_i) and pick the axis direction along which
            // e^{<c, v>} ≥ 1.
            let mut e = vec![0i64; walk.dim()];
            e[0] = 1;
            let plus = s.xi_of(&walk.vertex_id(&e))? / origin;
            let (dir, growth) = if plus >= 1.0 {
                ("+e1", plus)
            } else {
                ("−e1", 1.0 / plus)
            };
            Ok(StateCheck {
                beta,
                verdict: StateVerdict::WeightOnly,
                total: None,
                normalized: None,
                partial_sums: sums,
                certificate: format!(
                    "along {dir} the terms satisfy ξ(k·{dir})/ξ(0) = {growth}^k ≥ 1 for every k ≥ 0, so Σ_v ξ_v diverges"
                ),
            })
        }
        _ => Ok(StateCheck {
            beta,
            verdict: StateVerdict::Undetermined,
            total: None,
            normalized: None,
            partial_sums: sums,
            certificate: "no certified tail test for this family; partial sums only".into(),
        }),
    }
}
