//! Seeded evolutionary search of the desk benchmark in carbon mode, with
//! the run directory written under target/.
//!
//! Run with: `cargo run --example search_carbon`

use carbondse::config::RunConfig;
use carbondse::optimize::nsga2_search;
use carbondse::presets;

fn main() {
    let space = presets::desk_space();
    let ctx = presets::desk_context(carbondse::optimize::ModeKind::Carbon);
    let record = nsga2_search(&space, &ctx, 512, 7).unwrap();

    println!(
        "evaluated {} candidates over a {}-point joint space (seed {})",
        record.evaluations,
        space.valid_size(),
        record.seed
    );
    println!("hypervolume: {:.6}\n", record.hypervolume.unwrap());
    println!(
        "{:<10} {:>9} {:>12} {:>12}  candidate",
        "objective", "accuracy", "latency_ms", "carbon_kg"
    );
    for c in &record.front.members {
        let m = c.metrics.unwrap();
        println!(
            "{:<10} {:>9.4} {:>12.4} {:>12.6}  {}",
            "front",
            m.accuracy,
            m.latency_s * 1e3,
            m.carbon_kg,
            c.fingerprint()
        );
    }

    let out = std::path::Path::new("target/runs/search_carbon");
    let snapshot = RunConfig::desk().snapshot_json().unwrap();
    record.write_dir(out, &snapshot, true).unwrap();
    println!("\nrun directory: {}", out.display());
}
