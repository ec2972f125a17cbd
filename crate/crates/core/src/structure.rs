//! Non-wandering part, cofinality, hereditary sets and higher-block recoding.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FiniteGraph, FinitePath, GraphBuilder, GraphFamily, NwClass, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub depth: usize,
    pub nw_vertices: Vec<VertexId>,
    pub nw_class: NwClass,
    /// `None` means undetermined.
    pub cofinal: Option<bool>,
    pub notes: Vec<String>,
}

/// Strongly connected components in reverse topological order (sinks of the
/// condensation first), each sorted by vertex index.
pub fn sccs(g: &FiniteGraph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (vertex, position in its successor list)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = g.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos].0;
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Components that carry at least one edge (size > 1 or a self-loop).
pub fn nontrivial_sccs(g: &FiniteGraph) -> Vec<Vec<usize>> {
    sccs(g)
        .into_iter()
        .filter(|c| c.len() > 1 || g.adjacency(c[0], c[0]) > 0)
        .collect()
}

pub fn is_strongly_connected(g: &FiniteGraph) -> bool {
    g.vertex_count() > 0 && sccs(g).len() == 1 && !nontrivial_sccs(g).is_empty()
}

/// Vertices lying on a directed cycle of `g`.
pub fn cycle_vertices(g: &FiniteGraph) -> BTreeSet<usize> {
    nontrivial_sccs(g).into_iter().flatten().collect()
}

pub fn non_wandering(family: &GraphFamily, depth: usize) -> Result<StructureReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let g = family.truncation(depth)?;
    let nw: BTreeSet<usize> = cycle_vertices(&g);
    let nw_vertices: Vec<VertexId> = nw.iter().map(|&v| g.vertex(v).clone()).collect();
    let meta = family.metadata();
    let mut notes = Vec::new();

    let nw_class = if family.is_finite() {
        if nw.is_empty() {
            NwClass::Empty
        } else {
            NwClass::NonemptyFinite
        }
    } else if let Some(class) = meta.nw_class {
        notes.push(format!("nw_class declared by the {} family", family.kind()));
        class
    } else {
        notes.push(format!(
            "nw_class undetermined: {} cycle vertices found at truncation depth {depth}, \
             but finiteness of the non-wandering part cannot be decided from a truncation",
            nw.len()
        ));
        NwClass::Undetermined
    };

    let cofinal = if family.is_finite() {
        Some(is_cofinal(&g)?)
    } else if let Some(c) = meta.cofinal {
        notes.push(format!("cofinality declared by the {} family", family.kind()));
        Some(c)
    } else {
        notes.push("cofinality undetermined: it quantifies over infinite paths".into());
        None
    };

    Ok(StructureReport {
        depth,
        nw_vertices,
        nw_class,
        cofinal,
        notes,
    })
}

fn reverse_reach(g: &FiniteGraph, preds: &[Vec<usize>], targets: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; g.vertex_count()];
    let mut queue: VecDeque<usize> = targets.iter().copied().collect();
    for &t in targets {
        seen[t] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &u in &preds[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// Every vertex reaches every terminal strongly connected component.
pub fn is_cofinal(g: &FiniteGraph) -> Result<bool> {
    if g.has_frontier() {
        return Err(Error::Undetermined(
            "cofinality of a truncation is not decidable; use family metadata".into(),
        ));
    }
    let comps = sccs(g);
    let mut comp_of = vec![0usize; g.vertex_count()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let mut preds = vec![Vec::new(); g.vertex_count()];
    for v in 0..g.vertex_count() {
        for &(w, _) in g.successors(v) {
            preds[w].push(v);
        }
    }
    for (i, c) in comps.iter().enumerate() {
        let terminal = c.iter().all(|&v| g.successors(v).iter().all(|&(w, _)| comp_of[w] == i));
        if terminal && !reverse_reach(g, &preds, c).iter().all(|&b| b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest superset of `seeds` closed under following out-edges.
pub fn hereditary_closure(g: &FiniteGraph, seeds: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = seeds.clone();
    let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for &(w, _) in g.successors(v) {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// [`hereditary_closure`] by vertex id.
pub fn hereditary_closure_ids(g: &FiniteGraph, seeds: &[VertexId]) -> Result<Vec<VertexId>> {
    let s = seeds.iter().map(|v| g.require(v)).collect::<Result<BTreeSet<_>>>()?;
    Ok(hereditary_closure(g, &s)
        .into_iter()
        .map(|v| g.vertex(v).clone())
        .collect())
}

fn path_id(g: &FiniteGraph, p: &FinitePath) -> String {
    let ids: Vec<&str> = p.edge_ids(g).iter().map(|e| e.as_str()).collect();
    ids.join(".")
}

/// Higher-block recoding: vertices are the length-`k` paths, and each
/// length-`k+1` path `e₁…e_{k+1}` is an edge from `e₁…e_k` to `e₂…e_{k+1}`.
/// Paths ending at a frontier vertex of `g` become frontier vertices.
pub fn recode(g: &FiniteGraph, k: usize) -> Result<FiniteGraph> {
    if k == 0 {
        return Err(Error::InvalidArgument("recoding length must be at least 1".into()));
    }
    let mut b = GraphBuilder::new();
    for v in 0..g.vertex_count() {
        for p in g.enumerate_paths(v, k) {
            let id = path_id(g, &p);
            b.vertex(id.clone());
            if g.is_frontier(p.range(g)) {
                b.frontier(id);
            }
        }
        for p in g.enumerate_paths(v, k + 1) {
            let head = FinitePath::from_edges(g, p.edges()[..k].to_vec())?;
            let tail = FinitePath::from_edges(g, p.edges()[1..].to_vec())?;
            b.edge(path_id(g, &p), path_id(g, &head), path_id(g, &tail));
        }
    }
    b.build()
}
