//! Acceptance suite: one test per criterion, each printing a PASS line
//! and asserting its own runtime budget. Criteria share one set of desk
//! benchmark runs, built once.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use carbondse::archspace::{peak_tops, ArchSpace, HardwareConfig, Platform, KIB, MIB};
use carbondse::carbon::{
    lifetime_inferences, operational_carbon, DeploymentSchedule, GridIntensity,
};
use carbondse::config::RunConfig;
use carbondse::optimize::{
    dominates, dominates_vec, exhaustive_search, hypervolume, hypervolume_points,
    non_dominated_indices, nsga2_search, Candidate, JointSpace, ModeKind, ObjectiveMode, RunRecord,
};
use carbondse::perf::{area, gemm_cost, BoundKind, CostCoefficients};
use carbondse::presets;
use carbondse::proxy::{analytic_proxy, spearman, SensitivityProfile};
use carbondse::report::{
    consistency, parse_breakdown_csv, parse_iso_accuracy_csv, parse_sweep_csv,
};
use carbondse::workload::{build_prune_space, PruneSteps, PrunedDims};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const MODES: [ModeKind; 4] = [
    ModeKind::Carbon,
    ModeKind::Latency,
    ModeKind::Energy,
    ModeKind::CarbonLatency,
];

struct DeskRuns {
    /// One exhaustive oracle per mode over the 4096-candidate benchmark.
    oracles: Vec<RunRecord>,
    /// Three seeded evolutionary runs per mode at budget 512.
    nsga2: Vec<Vec<RunRecord>>,
    /// Exhaustive runs at TOPS budgets 20/4/1 over a space where the
    /// budget actually filters hardware.
    tops_runs: Vec<(f64, RunRecord)>,
}

fn tops_stress_space(budget: f64) -> JointSpace {
    let prune = build_prune_space(
        &presets::desk_model(),
        PruneSteps {
            layers: 64,
            ffn: 32,
            hidden: 4096,
            heads: 64,
        },
    )
    .unwrap();
    let arch = ArchSpace {
        tc: vec![1, 2],
        pe_x: vec![64, 256],
        pe_y: vec![16, 64],
        glb_bytes: vec![2 * MIB],
        l2_bytes: vec![64 * KIB, 128 * KIB],
        l2_bw: vec![64],
        platform: Platform::default().with_tops(budget),
    };
    JointSpace { prune, arch }
}

fn desk_runs() -> &'static DeskRuns {
    static RUNS: OnceLock<DeskRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let space = presets::desk_space();
        let oracles = MODES
            .iter()
            .map(|&kind| exhaustive_search(&space, &presets::desk_context(kind), 0).unwrap())
            .collect();
        let nsga2 = MODES
            .iter()
            .map(|&kind| {
                let ctx = presets::desk_context(kind);
                (1..=3)
                    .map(|seed| nsga2_search(&space, &ctx, 512, seed).unwrap())
                    .collect()
            })
            .collect();
        let tops_runs = [20.0, 4.0, 1.0]
            .into_iter()
            .map(|budget| {
                let space = tops_stress_space(budget);
                let mut ctx = presets::desk_context(ModeKind::Carbon);
                ctx.platform = ctx.platform.with_tops(budget);
                (budget, exhaustive_search(&space, &ctx, 0).unwrap())
            })
            .collect();
        DeskRuns {
            oracles,
            nsga2,
            tops_runs,
        }
    })
}

fn assert_runtime(start: Instant, limit: Duration, label: &str) {
    let elapsed = start.elapsed();
    assert!(
        elapsed < limit,
        "{label} took {elapsed:?}, over the {limit:?} budget"
    );
}

#[test]
fn criterion_1_arithmetic_anchors() {
    let start = Instant::now();
    let p = Platform::default();
    let hw = HardwareConfig {
        tc: 1,
        pe_x: 256,
        pe_y: 8,
        glb_bytes: 2 * MIB,
        l2_bytes: 64 * KIB,
        l2_bw: 128,
    };
    assert_eq!(peak_tops(&hw, &p), 2.048);
    assert_eq!(
        lifetime_inferences(&DeploymentSchedule::default()),
        23_652_000
    );
    let points = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
    assert_eq!(hypervolume_points(&points, &[4.0, 4.0]).unwrap(), 6.0);
    assert_runtime(start, Duration::from_secs(1), "criterion 1");
    println!("ACCEPTANCE 1 arithmetic-anchors: PASS");
}

#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let runs = desk_runs();
    let space = presets::desk_space();
    assert!(space.valid_size() <= 4096);
    for (kind, oracle) in MODES.iter().zip(&runs.oracles) {
        // Brute-force O(n^2) filter over the full evaluation log.
        let feasible: Vec<&Candidate> = oracle.feasible_candidates().collect();
        let vectors: Vec<Vec<f64>> = feasible.iter().map(|c| c.objectives().unwrap()).collect();
        let expect: std::collections::BTreeSet<String> = non_dominated_indices(&vectors)
            .into_iter()
            .map(|i| feasible[i].fingerprint())
            .collect();
        let got: std::collections::BTreeSet<String> = oracle
            .front
            .members
            .iter()
            .map(|c| c.fingerprint())
            .collect();
        assert_eq!(got, expect, "front mismatch in mode {kind:?}");

        // Every evolutionary front member is dominated-or-equalled by an
        // oracle member.
        let mode = ObjectiveMode::new(*kind);
        for run in &runs.nsga2[MODES.iter().position(|k| k == kind).unwrap()] {
            for m in &run.front.members {
                let covered =
                    oracle.front.members.iter().any(|o| {
                        dominates(o, m, &mode).unwrap() || o.objectives() == m.objectives()
                    });
                assert!(covered, "mode {kind:?}: {:?} not covered", m.objectives());
            }
        }
    }
    assert_runtime(start, Duration::from_secs(120), "criterion 2");
    println!("ACCEPTANCE 2 oracle-equivalence: PASS");
}

#[test]
fn criterion_3_search_quality() {
    let start = Instant::now();
    let runs = desk_runs();
    let space = presets::desk_space();
    let ctx = presets::desk_context(ModeKind::Carbon);
    let oracle = &runs.oracles[0];
    let reference = oracle.front.ref_point.clone().unwrap();
    let oracle_hv = hypervolume(&oracle.front, &reference).unwrap();
    let mut ratios: Vec<f64> = (101..=105u64)
        .map(|seed| {
            let run = nsga2_search(&space, &ctx, 512, seed).unwrap();
            hypervolume(&run.front, &reference).unwrap() / oracle_hv
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    assert!(
        median >= 0.90,
        "median hypervolume ratio {median} (all: {ratios:?})"
    );
    assert_runtime(start, Duration::from_secs(300), "criterion 3");
    println!("ACCEPTANCE 3 search-quality: PASS (median ratio {median:.4})");
}

#[test]
fn criterion_4_consistency() {
    let start = Instant::now();
    let runs = desk_runs();
    for (kind, seeded) in MODES.iter().zip(&runs.nsga2) {
        let stats = consistency(seeded).unwrap();
        assert!(
            stats.cv <= 0.05,
            "mode {kind:?}: hypervolume CV {} over 5% (hvs {:?})",
            stats.cv,
            stats.hvs
        );
    }
    assert_runtime(start, Duration::from_secs(120), "criterion 4");
    println!("ACCEPTANCE 4 consistency: PASS");
}

#[test]
fn criterion_5_directional_carbon_latency_tradeoff() {
    let start = Instant::now();
    let runs = desk_runs();
    let pick = |kind: ModeKind| {
        let oracle = &runs.oracles[MODES.iter().position(|&k| k == kind).unwrap()];
        oracle
            .front
            .argmin(|m| m.carbon_kg)
            .unwrap()
            .metrics
            .unwrap()
    };
    let carbon_mode = pick(ModeKind::Carbon);
    let latency_mode = pick(ModeKind::Latency);
    let joint_mode = pick(ModeKind::CarbonLatency);
    assert!(carbon_mode.carbon_kg <= latency_mode.carbon_kg);
    assert!(carbon_mode.latency_s >= latency_mode.latency_s);
    assert!(carbon_mode.carbon_kg <= joint_mode.carbon_kg);
    assert!(joint_mode.carbon_kg <= latency_mode.carbon_kg);
    assert_runtime(start, Duration::from_secs(120), "criterion 5");
    println!("ACCEPTANCE 5 directional-carbon-vs-latency: PASS");
}

#[test]
fn criterion_6_directional_hardware_size() {
    let start = Instant::now();
    let runs = desk_runs();
    let coeffs = CostCoefficients::default();
    let latency_oracle = &runs.oracles[1];
    let carbon_oracle = &runs.oracles[0];
    let fastest = latency_oracle.front.argmin(|m| m.latency_s).unwrap();
    let greenest = carbon_oracle.front.argmin(|m| m.carbon_kg).unwrap();
    assert!(
        area(&fastest.hw, &coeffs) >= area(&greenest.hw, &coeffs),
        "latency-opt hw {:?} smaller than carbon-opt hw {:?}",
        fastest.hw,
        greenest.hw
    );
    assert_runtime(start, Duration::from_secs(120), "criterion 6");
    println!("ACCEPTANCE 6 directional-hardware-size: PASS");
}

#[test]
fn criterion_7_constraint_soundness() {
    let start = Instant::now();
    let runs = desk_runs();
    let mut fronts_checked = 0usize;
    let mut check = |record: &RunRecord, budget: f64| {
        let platform = Platform::default().with_tops(budget);
        for c in &record.front.members {
            assert!(
                peak_tops(&c.hw, &platform) <= budget,
                "front member over the {budget} TOPS budget: {:?}",
                c.hw
            );
            if let Some(cap) = record.mode.latency_cap_s {
                assert!(c.metrics.unwrap().latency_s <= cap);
            }
            assert!(c.feasible && c.violations.is_empty());
        }
        fronts_checked += 1;
    };
    for record in &runs.oracles {
        check(record, 20.0);
    }
    for seeded in &runs.nsga2 {
        for record in seeded {
            check(record, 20.0);
        }
    }
    for (budget, record) in &runs.tops_runs {
        check(record, *budget);
        // The tighter budgets genuinely exclude hardware.
        if *budget < 20.0 {
            let space = tops_stress_space(*budget);
            assert!(space.arch.enumerate().len() < 8);
        }
    }
    assert!(fronts_checked >= 19);
    assert_runtime(start, Duration::from_secs(120), "criterion 7");
    println!("ACCEPTANCE 7 constraint-soundness: PASS ({fronts_checked} fronts)");
}

#[test]
fn criterion_8_numerical_invariants() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0xACCE);

    // Roofline dominance over random GEMMs and hardware.
    let p = Platform::default();
    let c = CostCoefficients::default();
    let mut mapped = 0;
    for _ in 0..1000 {
        let hw = HardwareConfig {
            tc: 1 << rng.gen_range(0..=2),
            pe_x: 1 << rng.gen_range(0..=8),
            pe_y: 1 << rng.gen_range(0..=8),
            glb_bytes: MIB << rng.gen_range(0..=3),
            l2_bytes: (64 * KIB) << rng.gen_range(0..=4),
            l2_bw: 1 << rng.gen_range(0..=8),
        };
        let (m, k, n) = (
            rng.gen_range(1..=512),
            rng.gen_range(1..=4096),
            rng.gen_range(1..=4096),
        );
        let Ok(cost) = gemm_cost("x", m, k, n, 1, &hw, &p, &c) else {
            continue;
        };
        mapped += 1;
        let glb = cost.glb_bytes.div_ceil(p.glb_bw);
        let dram = cost.dram_bytes.div_ceil(c.dram_bw_bytes_per_cycle);
        let l2 = cost.l2_bytes.div_ceil(hw.tc as u64 * hw.l2_bw);
        assert!(cost.cycles >= glb && cost.cycles >= dram && cost.cycles >= l2);
        let max_traffic = glb.max(dram).max(l2);
        match cost.bound {
            BoundKind::Compute => assert!(cost.cycles >= max_traffic),
            BoundKind::Glb => assert_eq!(cost.cycles, glb),
            BoundKind::Dram => assert_eq!(cost.cycles, dram),
            BoundKind::L2 => assert_eq!(cost.cycles, l2),
        }
    }
    assert!(mapped >= 900);

    // Carbon additivity plus region and schedule linearity.
    let factors = carbondse::carbon::CarbonFactors::default();
    for _ in 0..1000 {
        let area_mm2 = rng.gen_range(0.0..100.0);
        let energy = rng.gen_range(0.0..1.0);
        let schedule = DeploymentSchedule {
            lifetime_years: rng.gen_range(0.5..10.0),
            active_hours_per_day: rng.gen_range(1.0..24.0),
            inferences_per_second: rng.gen_range(0.1..100.0),
        };
        let g = rng.gen_range(1.0..1000.0);
        let grid = GridIntensity::override_value(g);
        let embodied = carbondse::carbon::embodied_carbon(area_mm2, &p, &factors);
        let operational = operational_carbon(energy, &schedule, &grid);
        let perf = carbondse::perf::PerfReport {
            latency_s: 0.01,
            energy_j: energy,
            dyn_energy_j: energy,
            area_mm2,
            total_cycles: 1,
            total_macs: 1,
            utilization: 0.1,
            op_costs: vec![],
        };
        let report = carbondse::carbon::total_carbon(&perf, &p, &factors, &schedule, &grid);
        assert_eq!(report.total_kg, report.embodied_kg + report.operational_kg);
        assert_eq!(report.embodied_kg, embodied);
        assert_eq!(report.operational_kg, operational);
        // Doubling the grid intensity doubles the operational term
        // exactly; doubling a schedule field doubles it up to the integer
        // flooring of the lifetime inference count (relative error below
        // 1/count, well under 1e-4 for these schedules).
        let double_grid = GridIntensity::override_value(2.0 * g);
        let exact = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        let floored = |a: f64, b: f64| (a - b).abs() <= 1e-4 * b.abs().max(1e-300);
        assert!(exact(
            operational_carbon(energy, &schedule, &double_grid),
            2.0 * operational
        ));
        let mut s2 = schedule;
        s2.inferences_per_second *= 2.0;
        assert!(floored(
            operational_carbon(energy, &s2, &grid),
            2.0 * operational
        ));
        let mut s3 = schedule;
        s3.active_hours_per_day *= 2.0;
        assert!(floored(
            operational_carbon(energy, &s3, &grid),
            2.0 * operational
        ));
    }

    // Proxy bounds and monotonicity over random prune-space members.
    let base = presets::clip_b16();
    let space = build_prune_space(&base, PruneSteps::default()).unwrap();
    let profile = SensitivityProfile::default_dual();
    for _ in 0..1000 {
        let dims: Vec<PrunedDims> = space
            .axes
            .iter()
            .map(|a| PrunedDims {
                num_layers: a.layers[rng.gen_range(0..a.layers.len())],
                ffn_dim: a.ffn[rng.gen_range(0..a.ffn.len())],
                hidden_dim: a.hidden[rng.gen_range(0..a.hidden.len())],
                num_heads: a.heads[rng.gen_range(0..a.heads.len())],
            })
            .collect();
        let cfg = space.member(&dims).unwrap();
        let acc = analytic_proxy(&cfg, &profile);
        assert!((0.0..=1.0).contains(&acc));
        let mut grown = dims.clone();
        let e = rng.gen_range(0..grown.len());
        grown[e].num_layers = *space.axes[e].layers.last().unwrap();
        grown[e].hidden_dim = *space.axes[e].hidden.last().unwrap();
        let bigger = space.member(&grown).unwrap();
        assert!(analytic_proxy(&bigger, &profile) >= acc);
    }

    // Rank correlation on the three worked examples. The tied case is
    // frozen from the average-rank derivation: rx = [1, 2.5, 2.5, 4],
    // ry = [1, 3, 2, 4], Pearson = 18/sqrt(360).
    assert_eq!(
        spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(),
        1.0
    );
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    let rho = spearman(&[1.0, 2.0, 2.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((rho - 18.0 / 360.0_f64.sqrt()).abs() < 1e-12);

    // CSV round-trips over real run artifacts.
    let runs = desk_runs();
    let oracle = &runs.oracles[0];
    let csv = oracle.pareto_csv();
    let rows = carbondse::optimize::parse_pareto_csv(&csv).unwrap();
    assert_eq!(rows.len(), oracle.front.len());
    for (row, member) in rows.iter().zip(&oracle.front.members) {
        assert_eq!(row.carbon_kg, member.metrics.unwrap().carbon_kg);
        assert_eq!(row.model, member.model.fingerprint());
    }
    let iso = carbondse::report::iso_accuracy(
        std::slice::from_ref(oracle),
        &[oracle.front.members[0].metrics.unwrap().accuracy, 2.0],
        0.01,
    );
    let iso_csv = carbondse::report::iso_accuracy_csv(&iso);
    assert_eq!(parse_iso_accuracy_csv(&iso_csv).unwrap(), iso);
    let ctx = presets::desk_context(ModeKind::Carbon);
    let rows = carbondse::report::breakdown(oracle, &ctx);
    let breakdown_csv = carbondse::report::breakdown_csv(&rows);
    assert_eq!(parse_breakdown_csv(&breakdown_csv).unwrap(), rows);
    let points: Vec<carbondse::report::SweepPoint> = runs
        .tops_runs
        .iter()
        .map(|(budget, record)| carbondse::report::SweepPoint {
            axis: "tops".into(),
            point: budget.to_string(),
            record: record.clone(),
        })
        .collect();
    let sweep = carbondse::report::sweep_csv(&points);
    let parsed = parse_sweep_csv(&sweep).unwrap();
    assert_eq!(parsed.len(), 3);
    for (row, point) in parsed.iter().zip(&points) {
        assert_eq!(*row, point.row());
    }

    assert_runtime(start, Duration::from_secs(120), "criterion 8");
    println!("ACCEPTANCE 8 numerical-invariants: PASS");
}

#[test]
fn criterion_9_order_of_magnitude_sanity() {
    let start = Instant::now();
    let cfg = RunConfig::clip_b16();
    let ctx = cfg.eval_context().unwrap();
    let candidate = carbondse::optimize::evaluate_candidate(
        &presets::clip_b16(),
        &presets::table_min_carbon_hw(),
        &ctx,
        Default::default(),
    );
    let metrics = candidate.metrics.expect("mapping is feasible");
    assert!(
        (0.05..=5.0).contains(&metrics.carbon_kg),
        "total carbon {} kg outside [0.05, 5]",
        metrics.carbon_kg
    );
    let latency_ms = metrics.latency_s * 1e3;
    assert!(
        (1.0..=200.0).contains(&latency_ms),
        "latency {latency_ms} ms outside [1, 200]"
    );
    assert_runtime(start, Duration::from_secs(10), "criterion 9");
    println!(
        "ACCEPTANCE 9 order-of-magnitude: PASS ({:.3} kgCO2e, {latency_ms:.1} ms)",
        metrics.carbon_kg
    );
}

#[test]
fn dominance_oracle_agreement_on_every_desk_front() {
    // Cross-check used by several criteria: no stored front member
    // strictly dominates another under the vector-level definition.
    let runs = desk_runs();
    for oracle in &runs.oracles {
        for a in &oracle.front.members {
            for b in &oracle.front.members {
                let va = a.objectives().unwrap();
                let vb = b.objectives().unwrap();
                assert!(
                    !dominates_vec(&va, &vb),
                    "front member dominated inside its own front"
                );
            }
        }
    }
}
