//! Row-finite, sink-free directed multigraphs.
//!
//! A [`FiniteGraph`] is either a complete finite graph or a truncation of an
//! infinite family. Truncations carry an explicit frontier: vertices whose
//! out-edges were cut by the truncation. Frontier vertices are boundary data
//! for the solvers and are never treated as sinks.
//!
//! Vertices and edges are stored in a deterministic order (natural ordering of
//! their identifiers) so that every derived report is reproducible.

pub(crate) mod document;
mod family;
mod ids;
mod path;

pub use document::{load_graph, GraphDocument};
pub use family::{FamilyMetadata, FamilyOracle, GraphFamily, NwClass, ShiftSymmetry};
pub use ids::{natural_cmp, EdgeId, VertexId};
pub use path::FinitePath;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub src: usize,
    pub dst: usize,
}

/// Incrementally collects vertices and edges, then validates them into a
/// [`FiniteGraph`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    vertices: BTreeSet<VertexId>,
    edges: Vec<(EdgeId, VertexId, VertexId)>,
    frontier: BTreeSet<VertexId>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, v: impl Into<VertexId>) -> &mut Self {
        self.vertices.insert(v.into());
        self
    }

    pub fn edge(&mut self, id: impl Into<EdgeId>, src: impl Into<VertexId>, dst: impl Into<VertexId>) -> &mut Self {
        self.edges.push((id.into(), src.into(), dst.into()));
        self
    }

    /// Adds `count` parallel edges `src -> dst`. The first copy gets `id`, the
    /// following ones `id#2`, `id#3`, ...
    pub fn edges(
        &mut self,
        id: impl Into<EdgeId>,
        src: impl Into<VertexId>,
        dst: impl Into<VertexId>,
        count: u64,
    ) -> &mut Self {
        let id = id.into();
        let src = src.into();
        let dst = dst.into();
        for k in 1..=count {
            let eid = if k == 1 {
                id.clone()
            } else {
                EdgeId::new(format!("{}#{}", id.as_str(), k))
            };
            self.edges.push((eid, src.clone(), dst.clone()));
        }
        self
    }

    pub fn frontier(&mut self, v: impl Into<VertexId>) -> &mut Self {
        self.frontier.insert(v.into());
        self
    }

    pub fn build(&self) -> Result<FiniteGraph> {
        let vertices: Vec<VertexId> = self.vertices.iter().cloned().collect();
        let index: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();

        let lookup = |v: &VertexId| -> Result<usize> {
            index.get(v).copied().ok_or_else(|| Error::UnknownVertex(v.to_string()))
        };

        let mut edges = Vec::with_capacity(self.edges.len());
        let mut seen = BTreeSet::new();
        for (id, s, d) in &self.edges {
            if !seen.insert(id.clone()) {
                return Err(Error::Duplicate(id.to_string()));
            }
            edges.push(Edge {
                id: id.clone(),
                src: lookup(s)?,
                dst: lookup(d)?,
            });
        }
        let mut frontier = vec![false; vertices.len()];
        for v in &self.frontier {
            frontier[lookup(v)?] = true;
        }
        FiniteGraph::from_parts(vertices, edges, frontier)
    }
}

/// A finite directed multigraph, possibly a truncation with a marked frontier.
#[derive(Clone, Debug)]
pub struct FiniteGraph {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    edges: Vec<Edge>,
    edge_index: HashMap<EdgeId, usize>,
    out_offsets: Vec<usize>,
    adjacency: Vec<Vec<(usize, u64)>>,
    frontier: Vec<bool>,
}

impl PartialEq for FiniteGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges && self.frontier == other.frontier
    }
}

impl FiniteGraph {
    fn from_parts(vertices: Vec<VertexId>, mut edges: Vec<Edge>, frontier: Vec<bool>) -> Result<Self> {
        let n = vertices.len();
        edges.sort_by(|a, b| a.src.cmp(&b.src).then_with(|| a.id.cmp(&b.id)));

        let mut out_offsets = vec![0usize; n + 1];
        for e in &edges {
            out_offsets[e.src + 1] += 1;
        }
        for v in 0..n {
            out_offsets[v + 1] += out_offsets[v];
        }

        let mut adjacency = vec![BTreeMap::<usize, u64>::new(); n];
        for e in &edges {
            *adjacency[e.src].entry(e.dst).or_insert(0) += 1;
        }
        let adjacency = adjacency.into_iter().map(|row| row.into_iter().collect()).collect();

        for v in 0..n {
            if out_offsets[v + 1] == out_offsets[v] && !frontier[v] {
                return Err(Error::Sink(vertices[v].to_string()));
            }
        }

        let index = vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let edge_index = edges.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();

        Ok(Self {
            vertices,
            index,
            edges,
            edge_index,
            out_offsets,
            adjacency,
            frontier,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &VertexId {
        &self.vertices[v]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn require(&self, v: &VertexId) -> Result<usize> {
        self.index_of(v).ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_index_of(&self, id: &EdgeId) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// Edges emitted by `v`, sorted by id.
    pub fn out_edges(&self, v: usize) -> &[Edge] {
        &self.edges[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// Indices (into [`Self::edges`]) of the edges emitted by `v`.
    pub fn out_edge_indices(&self, v: usize) -> std::ops::Range<usize> {
        self.out_offsets[v]..self.out_offsets[v + 1]
    }

    /// Lookup by identifier; realizes `s⁻¹(v)`.
    pub fn out_edges_of(&self, v: &VertexId) -> Result<&[Edge]> {
        Ok(self.out_edges(self.require(v)?))
    }

    /// Aggregated row of the adjacency matrix: `(w, A_vw)` with `A_vw > 0`,
    /// sorted by `w`.
    pub fn successors(&self, v: usize) -> &[(usize, u64)] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self, v: usize, w: usize) -> u64 {
        self.adjacency[v]
            .binary_search_by_key(&w, |&(x, _)| x)
            .map(|i| self.adjacency[v][i].1)
            .unwrap_or(0)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn max_out_degree(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.out_degree(v)).max().unwrap_or(0)
    }

    pub fn is_frontier(&self, v: usize) -> bool {
        self.frontier[v]
    }

    pub fn has_frontier(&self) -> bool {
        self.frontier.iter().any(|&f| f)
    }

    pub fn frontier(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(|&v| self.frontier[v])
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.adjacency
            .iter()
            .map(|row| row.iter().map(|&(w, a)| a as f64 * x[w]).sum())
            .collect()
    }

    /// All length-`n` paths starting at `v`, in lexicographic order of their
    /// edge sequences. Their number equals `Σ_w (Aⁿ)_vw`.
    pub fn enumerate_paths(&self, v: usize, n: usize) -> Vec<FinitePath> {
        let mut out = Vec::new();
        let mut stack = Vec::with_capacity(n);
        self.extend_paths(v, v, n, &mut stack, &mut out);
        out
    }

    fn extend_paths(
        &self,
        start: usize,
        at: usize,
        remaining: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<FinitePath>,
    ) {
        if remaining == 0 {
            out.push(FinitePath::from_raw(start, stack.clone()));
            return;
        }
        for e in self.out_edge_indices(at) {
            stack.push(e);
            self.extend_paths(start, self.edges[e].dst, remaining - 1, stack, out);
            stack.pop();
        }
    }

    /// Subgraph induced on `keep` (vertex indices). Frontier marks are kept
    /// and any vertex that loses an out-edge becomes frontier.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> Result<FiniteGraph> {
        let mut b = GraphBuilder::new();
        for &v in keep {
            b.vertex(self.vertices[v].clone());
            if self.frontier[v] {
                b.frontier(self.vertices[v].clone());
            }
        }
        for e in &self.edges {
            let (s, d) = (e.src, e.dst);
            if keep.contains(&s) {
                if keep.contains(&d) {
                    b.edge(e.id.clone(), self.vertices[s].clone(), self.vertices[d].clone());
                } else {
                    b.frontier(self.vertices[s].clone());
                }
            }
        }
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rose(n: u64) -> FiniteGraph {
        let mut b = GraphBuilder::new();
        b.vertex("v");
        for k in 1..=n {
            b.edge(format!("e{k}"), "v", "v");
        }
        b.build().unwrap()
    }

    #[test]
    fn sink_is_rejected() {
        let mut b = GraphBuilder::new();
        b.vertex("a").vertex("b").edge("e1", "a", "b");
        assert_eq!(b.build().unwrap_err(), Error::Sink("b".into()));
    }

    #[test]
    fn frontier_exempts_sink() {
        let mut b = GraphBuilder::new();
        b.vertex("a").vertex("b").edge("e1", "a", "b").frontier("b");
        let g = b.build().unwrap();
        assert!(g.is_frontier(1));
        assert_eq!(g.out_degree(1), 0);
    }

    #[test]
    fn duplicate_edge_id() {
        let mut b = GraphBuilder::new();
        b.vertex("a").edge("e", "a", "a").edge("e", "a", "a");
        assert!(matches!(b.build(), Err(Error::Duplicate(_))));
    }

    #[test]
    fn unknown_endpoint() {
        let mut b = GraphBuilder::new();
        b.vertex("a").edge("e", "a", "z");
        assert_eq!(b.build().unwrap_err(), Error::UnknownVertex("z".into()));
    }

    #[test]
    fn multiplicity_is_aggregated() {
        let g = rose(2);
        assert_eq!(g.adjacency(0, 0), 2);
        assert_eq!(g.out_edges(0).len(), 2);
        assert_eq!(g.out_edges(0)[0].id.as_str(), "e1");
    }

    #[test]
    fn path_counts() {
        let g = rose(2);
        assert_eq!(g.enumerate_paths(0, 3).len(), 8);
        let empty = g.enumerate_paths(0, 0);
        assert_eq!(empty.len(), 1);
        assert!(empty[0].is_empty());
    }

    #[test]
    fn unknown_vertex_lookup() {
        let g = rose(1);
        assert!(matches!(
            g.out_edges_of(&VertexId::from("w")),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn parallel_edge_ids() {
        let mut b = GraphBuilder::new();
        b.vertex("a").edges("a>a", "a", "a", 3);
        let g = b.build().unwrap();
        let ids: Vec<_> = g.out_edges(0).iter().map(|e| e.id.as_str().to_string()).collect();
        assert_eq!(ids, vec!["a>a", "a>a#2", "a>a#3"]);
    }
}
