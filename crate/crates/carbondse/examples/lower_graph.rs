//! Lower a model to its operator graph and inspect shapes, MAC counts,
//! and the parameter total.
//!
//! Run with: `cargo run --example lower_graph`

use carbondse::presets;
use carbondse::workload::{lower_to_graph, param_count, Operator};

fn main() {
    let model = presets::clip_b16();
    let graph = lower_to_graph(&model);

    println!("model: {}", model.fingerprint());
    println!("parameters: {:.1} M", param_count(&model) as f64 / 1e6);
    println!(
        "total MACs per inference: {:.2} G",
        graph.total_macs as f64 / 1e9
    );
    println!(
        "\n{:<24} {:>8} {:>8} {:>8} {:>7} {:>10}",
        "operator", "M", "K", "N", "repeat", "MACs"
    );
    for op in &graph.operators {
        match op {
            Operator::Gemm {
                name,
                m,
                k,
                n,
                repeat,
            } => {
                println!(
                    "{name:<24} {m:>8} {k:>8} {n:>8} {repeat:>7} {:>10.2e}",
                    op.macs() as f64
                );
            }
            Operator::Vector {
                name,
                element_count,
                repeat,
                vector_kind,
            } => {
                println!(
                    "{name:<24} {:>8} {:>8} {:>8} {repeat:>7} {:>10}",
                    element_count,
                    "-",
                    format!("{vector_kind:?}"),
                    "-"
                );
            }
        }
    }
}
