//! Ladder graph: closed-form weights for every β, the numeric truncation
//! solver against them, and the state threshold log of the golden ratio.

use std::collections::BTreeMap;

use kms_graph_lab::classify::{classify, ClassifyOptions};
use kms_graph_lab::eigen::{
    ladder_closed_form, ladder_ratio, solve_family, BoundaryPolicy, FamilySolveOptions, SolveMethod, VertexPotential,
};
use kms_graph_lab::graph::{GraphFamily, VertexId};

fn main() -> kms_graph_lab::Result<()> {
    let family = GraphFamily::Ladder;
    for beta in [-1.0, 0.0, 1.0] {
        let edge: VertexId = "y40".into();
        let opts = FamilySolveOptions {
            depth: 40,
            boundary: BoundaryPolicy::Profile(BTreeMap::from([(
                edge.clone(),
                ladder_closed_form(&edge, beta).unwrap(),
            )])),
            method: SolveMethod::Numeric,
            ..Default::default()
        };
        let s = &solve_family(&family, beta, &VertexPotential::gauge(), &opts)?.rays[0];
        let x0 = s.xi_of(&"x0".into())?;
        println!(
            "beta {beta:>4}: r = {:.6}, x0 numeric {x0:.12}, closed {:.12}",
            ladder_ratio(beta),
            ladder_closed_form(&"x0".into(), beta).unwrap()
        );
    }

    let report = classify(&family, &ClassifyOptions::default())?;
    println!("weights: {}", report.kms_weight_range.describe());
    println!("states:  {}", report.kms_state_range.description);
    Ok(())
}
