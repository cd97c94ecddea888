//! Evaluate one (model, hardware) candidate end to end: lowering, the
//! roofline cost model, carbon composition, and the accuracy proxy.
//!
//! Run with: `cargo run --example evaluate_candidate`

use carbondse::carbon::total_carbon;
use carbondse::optimize::{evaluate_candidate, ModeKind, Provenance};
use carbondse::perf::graph_cost;
use carbondse::presets;
use carbondse::workload::lower_to_graph;

fn main() {
    let model = presets::clip_b16();
    let hw = presets::table_min_carbon_hw();
    let mut ctx = presets::desk_context(ModeKind::CarbonLatency);

    let candidate = evaluate_candidate(&model, &hw, &ctx, Provenance::default());
    println!("model: {}", model.fingerprint());
    println!("hw:    {}", hw.fingerprint());
    println!(
        "feasible: {} {:?}",
        candidate.feasible, candidate.violations
    );

    let m = candidate.metrics.unwrap();
    println!("\naccuracy (proxy): {:.3}", m.accuracy);
    println!("latency:          {:.2} ms", m.latency_s * 1e3);
    println!("energy:           {:.2} mJ/inference", m.energy_j * 1e3);
    println!("total carbon:     {:.3} kgCO2e", m.carbon_kg);

    let perf = graph_cost(&lower_to_graph(&model), &hw, &ctx.platform, &ctx.coeffs).unwrap();
    let carbon = total_carbon(&perf, &ctx.platform, &ctx.factors, &ctx.schedule, &ctx.grid);
    println!("\narea:        {:.2} mm2", perf.area_mm2);
    println!("utilization: {:.1} %", perf.utilization * 100.0);
    println!(
        "embodied:    {:.3} kg ({:.0} %)",
        carbon.embodied_kg,
        100.0 * (1.0 - carbon.operational_share())
    );
    println!(
        "operational: {:.3} kg ({:.0} %)",
        carbon.operational_kg,
        100.0 * carbon.operational_share()
    );
    println!("lifetime inferences: {}", carbon.lifetime_inferences);

    // The same candidate under a dirtier grid: only operational carbon
    // moves.
    ctx.grid = carbondse::carbon::GridIntensity::override_value(561.0);
    let dirty = evaluate_candidate(&model, &hw, &ctx, Provenance::default());
    println!(
        "\nsame candidate on a 561 g/kWh grid: {:.3} kgCO2e",
        dirty.metrics.unwrap().carbon_kg
    );
}
