//! Higher-block recoding leaves β₀ unchanged.

use std::sync::Arc;

use kms_graph_lab::graph::GraphFamily;
use kms_graph_lab::spectral::{beta0, Beta0Options};
use kms_graph_lab::structure::recode;

fn main() -> kms_graph_lab::Result<()> {
    let rose = GraphFamily::rose(2)?;
    let g = rose.finite_graph().expect("rose is finite");
    let opts = Beta0Options::default();
    println!("rose(2): beta0 = {:.12}", beta0(&rose, &opts)?.value);
    for k in 1..=3 {
        let h = recode(&g, k)?;
        let b = beta0(&GraphFamily::Explicit(Arc::new(h.clone())), &opts)?.value;
        println!(
            "k = {k}: {} vertices, {} edges, beta0 = {b:.12}",
            h.vertex_count(),
            h.edge_count()
        );
    }
    let h = recode(&g, 2)?;
    println!("vertices of the 2-block graph: {:?}", h.vertices());
    Ok(())
}
