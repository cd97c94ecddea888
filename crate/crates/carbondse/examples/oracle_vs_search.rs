//! Compare the evolutionary search against the exhaustive desk-scale
//! oracle: front coverage and the hypervolume ratio across seeds.
//!
//! Run with: `cargo run --example oracle_vs_search`

use carbondse::optimize::{dominates, exhaustive_search, hypervolume, nsga2_search, ModeKind};
use carbondse::presets;

fn main() {
    let space = presets::desk_space();
    let ctx = presets::desk_context(ModeKind::Carbon);

    let oracle = exhaustive_search(&space, &ctx, 0).unwrap();
    let reference = oracle.front.ref_point.clone().unwrap();
    let oracle_hv = hypervolume(&oracle.front, &reference).unwrap();
    println!(
        "oracle: {} evaluations, true front {} members, hv {:.6}",
        oracle.evaluations,
        oracle.front.len(),
        oracle_hv
    );

    for seed in 1..=5 {
        let run = nsga2_search(&space, &ctx, 512, seed).unwrap();
        let hv = hypervolume(&run.front, &reference).unwrap();
        let covered =
            run.front.members.iter().all(|m| {
                oracle.front.members.iter().any(|o| {
                    dominates(o, m, &ctx.mode).unwrap() || o.objectives() == m.objectives()
                })
            });
        println!(
            "seed {seed}: front {} members, hv ratio {:.4}, covered by oracle: {covered}",
            run.front.len(),
            hv / oracle_hv
        );
    }
}
