//! Golden table for the worked examples.

use kms_graph_lab::classify::reproduce_examples;

fn main() -> kms_graph_lab::Result<()> {
    let golden = reproduce_examples()?;
    for r in &golden.rows {
        let got = r.computed.map_or("-".to_string(), |c| format!("{c:.12}"));
        println!(
            "{:<5} {:<30} {:<24} expected {:<16} got {got}",
            if r.pass { "ok" } else { "FAIL" },
            r.example,
            r.quantity,
            r.expected
        );
    }
    golden.ensure_pass()
}
