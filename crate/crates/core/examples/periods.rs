//! Period invariants d_G and d'_G with search certificates, and the factor
//! type they determine.

use kms_graph_lab::graph::GraphFamily;
use kms_graph_lab::lattice::LatticeWalk;
use kms_graph_lab::periods::{factor_type, periods, PeriodOptions};

fn main() -> kms_graph_lab::Result<()> {
    let families = [
        GraphFamily::Ladder,
        GraphFamily::arms(3)?,
        GraphFamily::LatticeWalk(LatticeWalk::new(1, vec![(vec![1], 1), (vec![-1], 1)])?),
        GraphFamily::rose(3)?,
    ];
    for family in families {
        let p = periods(&family, &PeriodOptions::default())?;
        println!(
            "{}: d_G = {} ({:?}), d'_G = {:?}",
            family.kind(),
            p.d_g,
            p.d_g_method,
            p.d_prime
        );
        if let Some(cert) = p.certificate.as_ref().and_then(|c| c.certified.first()) {
            let w = &cert.witnesses[0];
            println!(
                "  d = {} certified with M = {}, L = {} over {} paths; e.g. mu {:?}: {:?} vs {:?}",
                cert.d, cert.m, cert.l, cert.paths_covered, w.mu, w.longer, w.shorter
            );
        }
        for n in &p.notes {
            println!("  note: {n}");
        }
        for beta in [0.0, 0.3] {
            println!("  beta {beta}: {}", factor_type(&p, beta).label());
        }
    }
    Ok(())
}
