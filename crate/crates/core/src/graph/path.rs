use std::fmt;

use super::{EdgeId, FiniteGraph, VertexId};
use crate::error::{Error, Result};

/// A finite path `e₁…eₙ` with `r(eᵢ) = s(eᵢ₊₁)`. The empty path at `v`
/// stands for the set `C_v` of infinite paths starting at `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinitePath {
    start: usize,
    edges: Vec<usize>,
}

impl FinitePath {
    pub(crate) fn from_raw(start: usize, edges: Vec<usize>) -> Self {
        Self { start, edges }
    }

    pub fn empty(v: usize) -> Self {
        Self {
            start: v,
            edges: Vec::new(),
        }
    }

    /// Builds a path from edge indices, checking composability.
    pub fn from_edges(g: &FiniteGraph, edges: Vec<usize>) -> Result<Self> {
        let Some(&first) = edges.first() else {
            return Err(Error::InvalidArgument("an empty path needs an explicit vertex".into()));
        };
        if edges.iter().any(|&e| e >= g.edge_count()) {
            return Err(Error::InvalidArgument("edge index out of range".into()));
        }
        for (i, w) in edges.windows(2).enumerate() {
            if g.edge(w[0]).dst != g.edge(w[1]).src {
                return Err(Error::NotComposable(i + 1));
            }
        }
        Ok(Self {
            start: g.edge(first).src,
            edges,
        })
    }

    pub fn from_edge_ids<S: AsRef<str>>(g: &FiniteGraph, ids: &[S]) -> Result<Self> {
        let edges = ids
            .iter()
            .map(|s| {
                let id = EdgeId::new(s.as_ref());
                g.edge_index_of(&id).ok_or_else(|| Error::UnknownEdge(id.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_edges(g, edges)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn source(&self) -> usize {
        self.start
    }

    pub fn range(&self, g: &FiniteGraph) -> usize {
        self.edges.last().map_or(self.start, |&e| g.edge(e).dst)
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Source vertices `s(e₁), …, s(eₙ)` of the edges, in order.
    pub fn edge_sources<'a>(&'a self, g: &'a FiniteGraph) -> impl Iterator<Item = usize> + 'a {
        self.edges.iter().map(move |&e| g.edge(e).src)
    }

    /// `μe` for an edge `e` emitted by `r(μ)`.
    pub fn extended(&self, g: &FiniteGraph, e: usize) -> Result<Self> {
        if g.edge(e).src != self.range(g) {
            return Err(Error::NotComposable(self.len()));
        }
        let mut edges = self.edges.clone();
        edges.push(e);
        Ok(Self {
            start: self.start,
            edges,
        })
    }

    /// The shifted path `e₂…eₙ`; for a single edge this is the empty path at
    /// its range.
    pub fn shifted(&self, g: &FiniteGraph) -> Option<Self> {
        let (&first, rest) = self.edges.split_first()?;
        Some(Self {
            start: g.edge(first).dst,
            edges: rest.to_vec(),
        })
    }

    pub fn edge_ids<'a>(&'a self, g: &'a FiniteGraph) -> Vec<&'a EdgeId> {
        self.edges.iter().map(|&e| &g.edge(e).id).collect()
    }

    pub fn display<'a>(&'a self, g: &'a FiniteGraph) -> PathDisplay<'a> {
        PathDisplay { path: self, graph: g }
    }

    pub fn source_id<'a>(&self, g: &'a FiniteGraph) -> &'a VertexId {
        g.vertex(self.start)
    }
}

pub struct PathDisplay<'a> {
    path: &'a FinitePath,
    graph: &'a FiniteGraph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return write!(f, "({})", self.graph.vertex(self.path.start));
        }
        let ids: Vec<_> = self.path.edge_ids(self.graph).iter().map(|e| e.as_str()).collect();
        f.write_str(&ids.join(","))
    }
}
