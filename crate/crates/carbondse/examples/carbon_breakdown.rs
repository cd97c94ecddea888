//! Embodied/operational carbon breakdown of a run, recomputed through
//! the carbon module from the logged candidates.
//!
//! Run with: `cargo run --example carbon_breakdown`

use carbondse::optimize::{exhaustive_search, ModeKind};
use carbondse::presets;
use carbondse::report::breakdown;

fn main() {
    let space = presets::desk_space();
    let ctx = presets::desk_context(ModeKind::Carbon);
    let record = exhaustive_search(&space, &ctx, 0).unwrap();
    let rows = breakdown(&record, &ctx);

    println!(
        "{} candidates, sorted by total carbon; first and last ten:\n",
        rows.len()
    );
    println!(
        "{:>10} {:>12} {:>12} {:>7}  candidate",
        "embodied", "operational", "total_kg", "op %"
    );
    let show = |row: &carbondse::report::BreakdownRow| {
        println!(
            "{:>10.6} {:>12.6} {:>12.6} {:>6.1}%  {}",
            row.embodied_kg,
            row.operational_kg,
            row.total_kg,
            row.operational_share * 100.0,
            row.candidate
        );
    };
    for row in rows.iter().take(10) {
        show(row);
    }
    println!("{:>56}", "...");
    for row in rows.iter().rev().take(10).rev() {
        show(row);
    }
}
