//! Loading a graph document, its structure, and a weight for a vertex
//! potential that is not constant.

use std::sync::Arc;

use kms_graph_lab::eigen::{solve_finite, verify, VertexPotential};
use kms_graph_lab::graph::load_graph;
use kms_graph_lab::structure::{hereditary_closure_ids, is_cofinal, non_wandering};

const DOC: &str = r#"{
  "vertices": ["s", "t", "u"],
  "edges": [
    {"src": "s", "dst": "t"},
    {"src": "t", "dst": "t"},
    {"src": "t", "dst": "u", "count": 2},
    {"src": "u", "dst": "t"}
  ]
}"#;

fn main() -> kms_graph_lab::Result<()> {
    let family = load_graph(DOC)?;
    let g = family.finite_graph().expect("explicit graphs are finite");
    let s = non_wandering(&family, 1)?;
    println!(
        "non-wandering: {:?} ({:?}), cofinal: {}",
        s.nw_vertices,
        s.nw_class,
        is_cofinal(&g)?
    );
    println!(
        "hereditary closure of u: {:?}",
        hereditary_closure_ids(&g, &["u".into()])?
    );

    // Only the strongly connected part carries a positive eigenvector.
    let keep = [g.require(&"t".into())?, g.require(&"u".into())?].into();
    let core = Arc::new(g.induced(&keep)?);
    let f0 = VertexPotential::from_json(r#"{"default": 1.0, "overrides": {"u": 2.5}}"#)?;
    let sol = solve_finite(&core, &f0, None)?;
    let check = verify(&core, sol.beta, &f0, &sol.xi)?;
    println!(
        "beta = {:.12}, xi = {:?}, residual {:.1e}",
        sol.beta,
        sol.report().xi,
        check.max_residual
    );
    Ok(())
}
