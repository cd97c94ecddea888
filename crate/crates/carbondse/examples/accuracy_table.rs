//! Accuracy proxies: the analytic sensitivity model, a measurement table
//! imported from CSV, and the rank correlation between the two.
//!
//! Run with: `cargo run --example accuracy_table`

use carbondse::presets;
use carbondse::proxy::{
    analytic_proxy, spearman, table_proxy, AccuracyTable, LookupPolicy, SensitivityProfile,
};
use carbondse::workload::{build_prune_space, PruneSteps, PrunedDims};

fn main() {
    let base = presets::clip_b16();
    let profile = SensitivityProfile::default_dual();

    // A small measurement table in the CSV interchange format.
    let csv = "text_layers,text_ffn,text_hidden,text_heads,vision_layers,vision_ffn,vision_hidden,vision_heads,accuracy\n\
               12,2048,512,8,12,3072,768,12,0.532\n\
               6,2048,512,8,12,2048,512,8,0.450\n\
               3,1024,256,4,10,1024,256,4,0.307\n";
    let table = AccuracyTable::from_csv(csv, LookupPolicy::NearestNeighbor).unwrap();
    println!("loaded {} measured rows", table.len());

    let space = build_prune_space(&base, PruneSteps::default()).unwrap();
    let configs = [
        vec![
            PrunedDims {
                num_layers: 12,
                ffn_dim: 2048,
                hidden_dim: 512,
                num_heads: 8,
            },
            PrunedDims {
                num_layers: 12,
                ffn_dim: 3072,
                hidden_dim: 768,
                num_heads: 12,
            },
        ],
        vec![
            PrunedDims {
                num_layers: 6,
                ffn_dim: 2048,
                hidden_dim: 512,
                num_heads: 8,
            },
            PrunedDims {
                num_layers: 12,
                ffn_dim: 2048,
                hidden_dim: 512,
                num_heads: 8,
            },
        ],
        vec![
            PrunedDims {
                num_layers: 7,
                ffn_dim: 1024,
                hidden_dim: 256,
                num_heads: 4,
            },
            PrunedDims {
                num_layers: 9,
                ffn_dim: 1664,
                hidden_dim: 384,
                num_heads: 6,
            },
        ],
    ];

    let mut analytic = Vec::new();
    let mut measured = Vec::new();
    println!("\n{:<44} {:>9} {:>9}", "model", "analytic", "table");
    for dims in &configs {
        let cfg = space.member(dims).unwrap();
        let a = analytic_proxy(&cfg, &profile);
        let t = table_proxy(&cfg, &table).unwrap();
        println!("{:<44} {a:>9.4} {t:>9.4}", cfg.fingerprint());
        analytic.push(a);
        measured.push(t);
    }
    println!(
        "\nrank correlation (analytic vs table): {:.3}",
        spearman(&analytic, &measured).unwrap()
    );
}
