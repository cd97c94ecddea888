//! Iso-accuracy comparison: at a shared accuracy target, how do the best
//! candidates of carbon-, latency-, and energy-optimized runs differ?
//!
//! Run with: `cargo run --example iso_accuracy`

use carbondse::optimize::{exhaustive_search, ModeKind};
use carbondse::presets;
use carbondse::report::{iso_accuracy, iso_accuracy_csv, DEFAULT_ISO_TOLERANCE};

fn main() {
    let space = presets::desk_space();
    let modes = [
        ModeKind::Carbon,
        ModeKind::Latency,
        ModeKind::Energy,
        ModeKind::CarbonLatency,
    ];
    let runs: Vec<_> = modes
        .iter()
        .map(|&kind| exhaustive_search(&space, &presets::desk_context(kind), 0).unwrap())
        .collect();

    // Targets drawn from the carbon run's front, plus one no run can hit.
    let accuracies: Vec<f64> = runs[0]
        .front
        .members
        .iter()
        .map(|c| c.metrics.unwrap().accuracy)
        .collect();
    let targets = vec![accuracies[0], *accuracies.last().unwrap(), 0.99];

    let rows = iso_accuracy(&runs, &targets, DEFAULT_ISO_TOLERANCE);
    print!("{}", iso_accuracy_csv(&rows));

    println!("\nat the shared target {:.3}:", targets[0]);
    for cell in &rows[0].cells {
        match &cell.candidate {
            Some(p) => println!(
                "  {:<14} -> {:.6} kg, {:.3} ms ({})",
                cell.mode.as_str(),
                p.carbon_kg,
                p.latency_s * 1e3,
                p.fingerprint
            ),
            None => println!("  {:<14} -> no candidate in the window", cell.mode.as_str()),
        }
    }
}
