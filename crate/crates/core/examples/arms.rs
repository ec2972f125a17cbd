//! Arms graph: threshold β₀ = log α, a single ray at β₀ and one extreme ray
//! per arm above it.

use kms_graph_lab::eigen::{arms_floor, solve_family, FamilySolveOptions, VertexPotential};
use kms_graph_lab::graph::GraphFamily;
use kms_graph_lab::spectral::{arms_alpha, beta0, Beta0Options};

fn main() -> kms_graph_lab::Result<()> {
    let family = GraphFamily::arms(3)?;
    let b0 = beta0(&family, &Beta0Options::default())?;
    println!(
        "alpha = {:.10}, beta0 = {:.10} ({:?})",
        arms_alpha(3),
        b0.value,
        b0.method
    );
    for e in &b0.certificate {
        println!("  truncation depth {:>2}: {:.10}", e.depth, e.estimate);
    }

    let gauge = VertexPotential::gauge();
    let opts = FamilySolveOptions::default();
    for beta in [b0.value, b0.value + 0.5] {
        let sols = solve_family(&family, beta, &gauge, &opts)?;
        println!(
            "beta = {beta:.4}: {:?}, {} ray(s), floor {:.6}",
            sols.kind,
            sols.rays.len(),
            arms_floor(beta)
        );
        for ray in &sols.rays {
            let firsts: Vec<String> = ["a1", "b1", "c1"]
                .iter()
                .map(|v| format!("{v}={:.6}", ray.xi_of(&(*v).into()).unwrap()))
                .collect();
            println!("  {}  residual {:.1e}", firsts.join(" "), ray.residual);
        }
    }

    match solve_family(&family, b0.value - 0.2, &gauge, &opts) {
        Err(e) => println!("beta0 - 0.2: {e}"),
        Ok(_) => println!("beta0 - 0.2 unexpectedly feasible"),
    }
    Ok(())
}
