//! Conformal measure on cylinder sets of a finite graph, its additivity and
//! Ruelle identities, and the associated stochastic matrix.

use kms_graph_lab::conformal::CylinderMeasure;
use kms_graph_lab::eigen::{solve_finite, to_stochastic, VertexPotential};
use kms_graph_lab::graph::{FinitePath, GraphBuilder};

fn main() -> kms_graph_lab::Result<()> {
    let mut b = GraphBuilder::new();
    b.vertex("a").vertex("b");
    b.edge("aa", "a", "a").edge("ab", "a", "b").edges("ba", "b", "a", 2);
    let g = b.build()?;

    let s = solve_finite(&g, &VertexPotential::gauge(), Some(&"a".into()))?;
    println!("beta = {:.12}, xi = {:?}", s.beta, s.report().xi);
    let p = to_stochastic(&g, s.beta, &s.potential, &s.xi)?;
    println!("row sums: {:?}", p.row_sums());

    let m = CylinderMeasure::new(s);
    for ids in [vec!["aa"], vec!["ab", "ba"], vec!["ab", "ba#2", "aa"]] {
        let mu = FinitePath::from_edge_ids(m.graph(), &ids)?;
        let add = m.check_additivity(&mu, 3)?;
        let ruelle = m.ruelle_dual_check(&mu)?;
        println!(
            "Z({}) = {:.10}  additivity defect {:.1e} over {} refinements, Ruelle defect {:.1e}",
            ids.join(","),
            m.measure_of(&mu)?,
            add.worst_defect,
            add.checked,
            ruelle.defect
        );
    }
    Ok(())
}
