//! Weight ranges for the three regimes of the non-wandering part: empty
//! (ladder), finite (rose) and infinite (arms).

use kms_graph_lab::classify::{classify, ClassifyOptions};
use kms_graph_lab::graph::GraphFamily;

fn main() -> kms_graph_lab::Result<()> {
    let opts = ClassifyOptions::default();
    for family in [GraphFamily::Ladder, GraphFamily::rose(2)?, GraphFamily::arms(3)?] {
        let r = classify(&family, &opts)?;
        println!(
            "{:<6} nw {:?}: weights {}, states {}, uniqueness at beta0 {:?}",
            family.kind(),
            r.structure.nw_class,
            r.kms_weight_range.describe(),
            r.kms_state_range.description,
            r.uniqueness_at_beta0.verdict
        );
        for s in &r.samples {
            let status = if s.feasible {
                format!("{} ray(s)", s.rays)
            } else {
                "infeasible".into()
            };
            println!("    beta {:>8.4}: {status}", s.beta);
        }
    }
    Ok(())
}
