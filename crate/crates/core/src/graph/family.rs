use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FiniteGraph, GraphBuilder, VertexId};
use crate::error::{Error, Result};
use crate::lattice::LatticeWalk;

/// Classification of the non-wandering part `NW_G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NwClass {
    Empty,
    NonemptyFinite,
    NonemptyInfinite,
    Undetermined,
}

/// A graph endomorphism argument for period witnesses: every vertex of a
/// hereditary set is the image of a vertex in `fundamental_domain` under a
/// shift that maps paths to paths of the same length. Checking the witness
/// condition on paths starting in the fundamental domain is then enough.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftSymmetry {
    pub fundamental_domain: Vec<VertexId>,
    pub description: String,
    /// Truncation depth needed before any path of `k` steps from the
    /// fundamental domain is visible: `base_depth + k * depth_per_step`.
    pub base_depth: usize,
    pub depth_per_step: usize,
}

impl ShiftSymmetry {
    pub fn window_depth(&self, steps: usize) -> usize {
        self.base_depth + steps * self.depth_per_step
    }
}

/// Certified structural facts a family carries with it. Anything `None` is
/// computed from truncations (and may end up undetermined).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FamilyMetadata {
    pub nw_class: Option<NwClass>,
    pub cofinal: Option<bool>,
    pub out_degree_bound: Option<usize>,
    pub base_vertex: Option<VertexId>,
    pub symmetry: Option<ShiftSymmetry>,
    pub d_prime: Option<u64>,
}

/// A user-supplied infinite family presented by nested truncations.
pub trait FamilyOracle: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Truncation at `depth`. Truncations must be nested and every
    /// non-frontier vertex must carry its full out-edge set.
    fn truncation(&self, depth: usize) -> Result<FiniteGraph>;

    fn metadata(&self) -> FamilyMetadata {
        FamilyMetadata::default()
    }
}

#[derive(Clone, Debug)]
pub enum GraphFamily {
    Explicit(Arc<FiniteGraph>),
    /// Example graph with `arms` arms `x₁ → x₂ → …` glued at vertex `1`,
    /// every `xₙ` also stepping across to `x₋ₙ`, and `x₋ₙ` descending back.
    Arms {
        arms: usize,
    },
    /// Two columns `x₀, x₁, …` and `y₀, y₁, …` above a corner vertex `1`.
    Ladder,
    Rose {
        loops: usize,
    },
    LatticeWalk(LatticeWalk),
    Oracle(Arc<dyn FamilyOracle>),
}

const ARM_LETTERS: &str = "abcdefghijklmnopqrstuvwxyz";

impl GraphFamily {
    pub fn explicit(g: FiniteGraph) -> Self {
        GraphFamily::Explicit(Arc::new(g))
    }

    pub fn arms(arms: usize) -> Result<Self> {
        if arms == 0 || arms > ARM_LETTERS.len() {
            return Err(Error::InvalidArgument(format!(
                "arms must be in 1..={}, got {arms}",
                ARM_LETTERS.len()
            )));
        }
        Ok(GraphFamily::Arms { arms })
    }

    pub fn rose(loops: usize) -> Result<Self> {
        if loops == 0 {
            return Err(Error::InvalidArgument("a rose needs at least one loop".into()));
        }
        Ok(GraphFamily::Rose { loops })
    }

    pub fn kind(&self) -> &str {
        match self {
            GraphFamily::Explicit(_) => "explicit-finite",
            GraphFamily::Arms { .. } => "arms",
            GraphFamily::Ladder => "ladder",
            GraphFamily::Rose { .. } => "rose",
            GraphFamily::LatticeWalk(_) => "lattice-walk",
            GraphFamily::Oracle(_) => "user-oracle",
        }
    }

    /// `true` when every truncation is the whole (finite) graph.
    pub fn is_finite(&self) -> bool {
        matches!(self, GraphFamily::Explicit(_) | GraphFamily::Rose { .. })
    }

    /// The graph itself for finite kinds.
    pub fn finite_graph(&self) -> Option<FiniteGraph> {
        match self {
            GraphFamily::Explicit(g) => Some((**g).clone()),
            GraphFamily::Rose { loops } => Some(rose_graph(*loops)),
            _ => None,
        }
    }

    pub fn truncation(&self, depth: usize) -> Result<FiniteGraph> {
        match self {
            GraphFamily::Explicit(g) => Ok((**g).clone()),
            GraphFamily::Rose { loops } => Ok(rose_graph(*loops)),
            GraphFamily::Arms { arms } => arms_truncation(*arms, depth),
            GraphFamily::Ladder => ladder_truncation(depth),
            GraphFamily::LatticeWalk(walk) => walk.truncation(depth),
            GraphFamily::Oracle(o) => o.truncation(depth),
        }
    }

    pub fn metadata(&self) -> FamilyMetadata {
        match self {
            GraphFamily::Explicit(_) => FamilyMetadata::default(),
            GraphFamily::Rose { loops } => FamilyMetadata {
                nw_class: Some(NwClass::NonemptyFinite),
                cofinal: Some(true),
                out_degree_bound: Some(*loops),
                base_vertex: Some("v".into()),
                symmetry: None,
                d_prime: None,
            },
            GraphFamily::Arms { .. } => FamilyMetadata {
                nw_class: Some(NwClass::NonemptyInfinite),
                cofinal: Some(true),
                out_degree_bound: Some(2.max(self.arm_count())),
                base_vertex: Some("1".into()),
                symmetry: None,
                // Far out on an arm the only short route between two vertices
                // is the arm itself, so no non-zero difference is uniform.
                d_prime: Some(0),
            },
            GraphFamily::Ladder => FamilyMetadata {
                nw_class: Some(NwClass::Empty),
                cofinal: Some(true),
                out_degree_bound: Some(2),
                base_vertex: Some("1".into()),
                symmetry: Some(ShiftSymmetry {
                    fundamental_domain: vec!["y0".into(), "x1".into()],
                    description: "level shift xₙ ↦ xₙ₊₁, yₙ ↦ yₙ₊₁ on the hereditary set generated by y0".into(),
                    base_depth: 2,
                    depth_per_step: 1,
                }),
                d_prime: None,
            },
            GraphFamily::LatticeWalk(walk) => FamilyMetadata {
                nw_class: Some(NwClass::NonemptyInfinite),
                cofinal: Some(true),
                out_degree_bound: Some(walk.total_mass() as usize),
                base_vertex: Some(walk.vertex_id(&vec![0; walk.dim()])),
                symmetry: Some(ShiftSymmetry {
                    fundamental_domain: vec![walk.vertex_id(&vec![0; walk.dim()])],
                    description: "translation invariance A(v,w) = A(v+u,w+u)".into(),
                    base_depth: 1,
                    depth_per_step: walk.support_radius(),
                }),
                d_prime: None,
            },
            GraphFamily::Oracle(o) => o.metadata(),
        }
    }

    fn arm_count(&self) -> usize {
        match self {
            GraphFamily::Arms { arms } => *arms,
            _ => 0,
        }
    }

    /// Vertex that solutions are normalized at: the family's declared base,
    /// otherwise the smallest vertex id of the given truncation.
    pub fn default_base(&self, g: &FiniteGraph) -> VertexId {
        self.metadata()
            .base_vertex
            .filter(|v| g.index_of(v).is_some())
            .unwrap_or_else(|| g.vertex(0).clone())
    }

    /// JSON description used to echo the input in reports.
    pub fn describe(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            GraphFamily::Explicit(g) => json!({
                "family": "explicit-finite",
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
            }),
            GraphFamily::Arms { arms } => json!({"family": "arms", "params": {"arms": arms}}),
            GraphFamily::Ladder => json!({"family": "ladder", "params": {}}),
            GraphFamily::Rose { loops } => json!({"family": "rose", "params": {"n": loops}}),
            GraphFamily::LatticeWalk(w) => json!({"family": "lattice-walk", "params": w.to_params()}),
            GraphFamily::Oracle(o) => json!({"family": "user-oracle", "name": o.name()}),
        }
    }
}

pub(crate) fn rose_graph(loops: usize) -> FiniteGraph {
    let mut b = GraphBuilder::new();
    b.vertex("v");
    for k in 1..=loops {
        b.edge(format!("e{k}"), "v", "v");
    }
    b.build().expect("rose is well formed")
}

fn arm_vertex(letter: char, n: i64) -> String {
    format!("{letter}{n}")
}

fn arms_truncation(arms: usize, depth: usize) -> Result<FiniteGraph> {
    if depth == 0 {
        return Err(Error::InvalidArgument("truncation depth must be at least 1".into()));
    }
    let depth = depth as i64;
    let mut b = GraphBuilder::new();
    b.vertex("1");
    for letter in ARM_LETTERS.chars().take(arms) {
        let up = |n: i64| arm_vertex(letter, n);
        let down = |n: i64| arm_vertex(letter, -n);
        for n in 1..=depth {
            b.vertex(up(n)).vertex(down(n));
        }
        b.edge(format!("1>{}", up(1)), "1", up(1));
        b.edge(format!("{}>1", down(1)), down(1), "1");
        for n in 1..=depth {
            b.edge(format!("{}>{}", up(n), down(n)), up(n), down(n));
            if n < depth {
                b.edge(format!("{}>{}", up(n), up(n + 1)), up(n), up(n + 1));
                b.edge(format!("{}>{}", down(n + 1), down(n)), down(n + 1), down(n));
            }
        }
        b.frontier(up(depth));
    }
    b.build()
}

fn ladder_truncation(depth: usize) -> Result<FiniteGraph> {
    if depth == 0 {
        return Err(Error::InvalidArgument("truncation depth must be at least 1".into()));
    }
    let x = |n: usize| format!("x{n}");
    let y = |n: usize| format!("y{n}");
    let mut b = GraphBuilder::new();
    b.vertex("1");
    for n in 0..=depth {
        b.vertex(x(n)).vertex(y(n));
    }
    b.edge("1>y0", "1", y(0)).edge("1>x0", "1", x(0));
    for n in 0..=depth {
        b.edge(format!("{}>{}", x(n), y(n)), x(n), y(n));
        if n < depth {
            b.edge(format!("{}>{}", y(n), y(n + 1)), y(n), y(n + 1));
            b.edge(format!("{}>{}", y(n), x(n + 1)), y(n), x(n + 1));
        }
    }
    b.frontier(y(depth));
    b.build()
}
