//! Build the legal prune space of a dual-encoder base model, inspect its
//! axes, and validate configurations against it.
//!
//! Run with: `cargo run --example prune_space`

use carbondse::presets;
use carbondse::workload::{build_prune_space, validate_model_config, PruneSteps, PrunedDims};

fn main() {
    let base = presets::clip_b16();
    let space = build_prune_space(&base, PruneSteps::default()).unwrap();

    println!("base model: {}", base.fingerprint());
    println!("prune space size: {} configurations\n", space.size());
    for axes in &space.axes {
        println!("encoder '{}':", axes.name);
        println!("  layers: {:?}", axes.layers);
        println!("  ffn:    {:?}", axes.ffn);
        println!("  hidden: {:?}", axes.hidden);
        println!("  heads:  {:?}", axes.heads);
    }

    // A published compact variant is a member of the space.
    let compact = base
        .pruned(&[
            PrunedDims {
                num_layers: 6,
                ffn_dim: 1024,
                hidden_dim: 512,
                num_heads: 6,
            },
            PrunedDims {
                num_layers: 8,
                ffn_dim: 1920,
                hidden_dim: 672,
                num_heads: 6,
            },
        ])
        .unwrap();
    println!(
        "\n{} -> violations: {:?}",
        compact.fingerprint(),
        validate_model_config(&compact, &space)
    );

    // Off-grid and below-floor dimensions are reported per (encoder,
    // dimension, value).
    let mut bad = compact.clone();
    bad.encoders[0].config.hidden_dim = 100;
    println!(
        "{} -> violations: {:?}",
        bad.fingerprint(),
        validate_model_config(&bad, &space)
    );
}
