//! Translation-invariant walks on ℤᵈ: β₀ from the moment generating function,
//! truncation estimates from below, and the ray structure above β₀.

use kms_graph_lab::graph::GraphFamily;
use kms_graph_lab::lattice::{LatticeWalk, RayStructure};
use kms_graph_lab::spectral::{beta0, Beta0Options};

fn main() -> kms_graph_lab::Result<()> {
    let walks = [
        ("symmetric d=1", LatticeWalk::new(1, vec![(vec![1], 1), (vec![-1], 1)])?),
        (
            "mu(1)=2, mu(-1)=1",
            LatticeWalk::new(1, vec![(vec![1], 2), (vec![-1], 1)])?,
        ),
        (
            "simple walk d=2",
            LatticeWalk::new(
                2,
                vec![(vec![1, 0], 1), (vec![-1, 0], 1), (vec![0, 1], 1), (vec![0, -1], 1)],
            )?,
        ),
    ];
    for (name, walk) in walks {
        let sol = walk.minimize_mgf(1e-12)?;
        println!(
            "{name}: c_min = {:?}, beta0 = {:.12}, drift = {:?}",
            sol.c_min, sol.beta0, sol.drift
        );
        let family = GraphFamily::LatticeWalk(walk.clone());
        let est = beta0(
            &family,
            &Beta0Options {
                schedule: vec![5, 10, 20],
                tol: 1e-12,
            },
        )?;
        for e in &est.certificate {
            println!("  radius {:>2}: {:.6}", e.depth, e.estimate);
        }
        for beta in [sol.beta0, sol.beta0 + 0.5] {
            let rays = walk.ray_structure(beta, 1e-10)?;
            match rays.structure {
                RayStructure::SingleRay { c } => println!("  beta {beta:.4}: single ray, c = {c:?}"),
                RayStructure::Sphere {
                    sphere_dimension,
                    samples,
                } => {
                    println!(
                        "  beta {beta:.4}: sphere of dimension {sphere_dimension}, {} sampled rays",
                        samples.len()
                    )
                }
            }
        }
    }
    Ok(())
}
