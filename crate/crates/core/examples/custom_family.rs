//! A user-defined infinite family given by nested truncations: a walk on
//! the half-line ℕ with two edges up and one edge down at every vertex.

use kms_graph_lab::graph::{FamilyMetadata, FamilyOracle, FiniteGraph, GraphBuilder, GraphFamily, NwClass};
use kms_graph_lab::periods::{periods, PeriodOptions};
use kms_graph_lab::spectral::{beta0, Beta0Options};
use std::sync::Arc;

#[derive(Debug)]
struct HalfLine;

impl FamilyOracle for HalfLine {
    fn name(&self) -> &str {
        "half-line"
    }

    fn truncation(&self, depth: usize) -> kms_graph_lab::Result<FiniteGraph> {
        let mut b = GraphBuilder::new();
        for n in 0..=depth {
            b.vertex(format!("n{n}"));
        }
        for n in 0..depth {
            b.edges(format!("up{n}"), format!("n{n}"), format!("n{}", n + 1), 2);
            b.edge(format!("down{}", n + 1), format!("n{}", n + 1), format!("n{n}"));
        }
        b.frontier(format!("n{depth}"));
        b.build()
    }

    fn metadata(&self) -> FamilyMetadata {
        FamilyMetadata {
            nw_class: Some(NwClass::NonemptyInfinite),
            cofinal: Some(true),
            out_degree_bound: Some(3),
            base_vertex: Some("n0".into()),
            ..Default::default()
        }
    }
}

fn main() -> kms_graph_lab::Result<()> {
    let family = GraphFamily::Oracle(Arc::new(HalfLine));
    let b = beta0(&family, &Beta0Options::with_depth(200))?;
    println!(
        "beta0 ≈ {:.6} ({:?}), limit ln(2√2) = {:.6}",
        b.value,
        b.bound,
        (8f64.sqrt()).ln()
    );
    for e in &b.certificate {
        println!("  depth {:>3}: {:.6}", e.depth, e.estimate);
    }
    let p = periods(&family, &PeriodOptions::default())?;
    println!("d_G = {}, d'_G = {:?}", p.d_g, p.d_prime);
    Ok(())
}
