//! Post-run analytics over run records: iso-accuracy comparison tables,
//! embodied/operational breakdowns, axis sweeps, and run-to-run
//! consistency statistics. Every row is recomputed from the candidate
//! logs; nothing is cached.

use serde::{Deserialize, Serialize};

use crate::carbon::{embodied_carbon, operational_carbon};
use crate::error::{Error, Result};
use crate::optimize::{
    hypervolume_points, Candidate, EvalContext, ModeKind, ObjectiveMode, RunRecord,
};
use crate::perf::area;

/// One iso-accuracy cell: the best candidate of one mode within the
/// accuracy window, judged by the mode's lead objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoCell {
    pub mode: ModeKind,
    pub candidate: Option<IsoPick>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoPick {
    pub fingerprint: String,
    pub accuracy: f64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub carbon_kg: f64,
}

/// One accuracy target with a cell per compared run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoAccuracyRow {
    pub target: f64,
    pub tolerance: f64,
    pub cells: Vec<IsoCell>,
}

pub const DEFAULT_ISO_TOLERANCE: f64 = 0.01;

fn best_in_window(run: &RunRecord, target: f64, tol: f64) -> Option<IsoPick> {
    run.feasible_candidates()
        .filter_map(|c| c.metrics.map(|m| (c, m)))
        .filter(|(_, m)| (m.accuracy - target).abs() <= tol)
        .min_by(|(ca, ma), (cb, mb)| {
            run.mode
                .lead_objective(ma)
                .total_cmp(&run.mode.lead_objective(mb))
                .then_with(|| ca.fingerprint().cmp(&cb.fingerprint()))
        })
        .map(|(c, m)| IsoPick {
            fingerprint: c.fingerprint(),
            accuracy: m.accuracy,
            latency_s: m.latency_s,
            energy_j: m.energy_j,
            carbon_kg: m.carbon_kg,
        })
}

/// For each target and each run, select the tolerance-window candidate
/// minimizing that run's lead objective; a cell stays empty when no
/// logged candidate qualifies. The comparison only means something when
/// the runs share a platform and evaluation context.
pub fn iso_accuracy(runs: &[RunRecord], targets: &[f64], tol: f64) -> Vec<IsoAccuracyRow> {
    targets
        .iter()
        .map(|&target| IsoAccuracyRow {
            target,
            tolerance: tol,
            cells: runs
                .iter()
                .map(|run| IsoCell {
                    mode: run.mode.kind,
                    candidate: best_in_window(run, target, tol),
                })
                .collect(),
        })
        .collect()
}

/// Iso-accuracy table as CSV. Header:
/// `target,tolerance,mode,found,fingerprint,accuracy,latency_s,energy_j,carbon_kg`.
pub fn iso_accuracy_csv(rows: &[IsoAccuracyRow]) -> String {
    let mut out = String::from(
        "target,tolerance,mode,found,fingerprint,accuracy,latency_s,energy_j,carbon_kg\n",
    );
    for row in rows {
        for cell in &row.cells {
            match &cell.candidate {
                Some(p) => out.push_str(&format!(
                    "{},{},{},true,{},{},{},{},{}\n",
                    row.target,
                    row.tolerance,
                    cell.mode.as_str(),
                    p.fingerprint,
                    p.accuracy,
                    p.latency_s,
                    p.energy_j,
                    p.carbon_kg
                )),
                None => out.push_str(&format!(
                    "{},{},{},false,,,,,\n",
                    row.target,
                    row.tolerance,
                    cell.mode.as_str()
                )),
            }
        }
    }
    out
}

/// Parse [`iso_accuracy_csv`] output back into rows.
pub fn parse_iso_accuracy_csv(csv: &str) -> Result<Vec<IsoAccuracyRow>> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    if header != "target,tolerance,mode,found,fingerprint,accuracy,latency_s,energy_j,carbon_kg" {
        return Err(Error::Config(format!(
            "unexpected iso csv header: {header}"
        )));
    }
    let mut rows: Vec<IsoAccuracyRow> = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Config(format!("iso csv row has {} fields", f.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Config(format!("bad number '{s}' in iso csv")))
        };
        let target = num(f[0])?;
        let tolerance = num(f[1])?;
        let cell = IsoCell {
            mode: ModeKind::parse(f[2])?,
            candidate: if f[3] == "true" {
                Some(IsoPick {
                    fingerprint: f[4].to_string(),
                    accuracy: num(f[5])?,
                    latency_s: num(f[6])?,
                    energy_j: num(f[7])?,
                    carbon_kg: num(f[8])?,
                })
            } else {
                None
            },
        };
        match rows.last_mut() {
            Some(row) if row.target == target && row.tolerance == tolerance => row.cells.push(cell),
            _ => rows.push(IsoAccuracyRow {
                target,
                tolerance,
                cells: vec![cell],
            }),
        }
    }
    Ok(rows)
}

/// Embodied/operational split of one candidate, recomputed through the
/// carbon module from the logged energy and the hardware point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub candidate: String,
    pub embodied_kg: f64,
    pub operational_kg: f64,
    pub total_kg: f64,
    pub operational_share: f64,
}

/// Carbon breakdown of every feasible design in a run (re-evaluated
/// designs count once), sorted by total carbon ascending (ties by
/// fingerprint).
pub fn breakdown(run: &RunRecord, ctx: &EvalContext) -> Vec<BreakdownRow> {
    let mut seen = std::collections::BTreeSet::new();
    let mut rows: Vec<BreakdownRow> = run
        .feasible_candidates()
        .filter(|c| seen.insert(c.fingerprint()))
        .filter_map(|c| c.metrics.map(|m| (c, m)))
        .map(|(c, m)| {
            let embodied_kg =
                embodied_carbon(area(&c.hw, &ctx.coeffs), &ctx.platform, &ctx.factors);
            let operational_kg = operational_carbon(m.energy_j, &ctx.schedule, &ctx.grid);
            let total_kg = embodied_kg + operational_kg;
            BreakdownRow {
                candidate: c.fingerprint(),
                embodied_kg,
                operational_kg,
                total_kg,
                operational_share: if total_kg > 0.0 {
                    operational_kg / total_kg
                } else {
                    0.0
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.total_kg
            .total_cmp(&b.total_kg)
            .then_with(|| a.candidate.cmp(&b.candidate))
    });
    rows
}

/// Breakdown table as CSV. Header:
/// `candidate,embodied_kg,operational_kg,total_kg,operational_share`.
pub fn breakdown_csv(rows: &[BreakdownRow]) -> String {
    let mut out = String::from("candidate,embodied_kg,operational_kg,total_kg,operational_share\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.candidate, r.embodied_kg, r.operational_kg, r.total_kg, r.operational_share
        ));
    }
    out
}

/// Parse [`breakdown_csv`] output back into rows.
pub fn parse_breakdown_csv(csv: &str) -> Result<Vec<BreakdownRow>> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    if header != "candidate,embodied_kg,operational_kg,total_kg,operational_share" {
        return Err(Error::Config(format!(
            "unexpected breakdown csv header: {header}"
        )));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Config(format!(
                    "breakdown csv row has {} fields",
                    f.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::Config(format!("bad number '{s}' in breakdown csv")))
            };
            Ok(BreakdownRow {
                candidate: f[0].to_string(),
                embodied_kg: num(f[1])?,
                operational_kg: num(f[2])?,
                total_kg: num(f[3])?,
                operational_share: num(f[4])?,
            })
        })
        .collect()
}

/// One swept axis with the points to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "points", rename_all = "snake_case")]
pub enum SweepAxis {
    /// Peak-compute budgets in TOPS (the published presets are 20/4/1).
    Tops(Vec<f64>),
    /// Operating-region codes from the grid dataset.
    Region(Vec<String>),
    /// Latency caps in seconds (0.010 / 0.050 / 0.100 tiers).
    LatencyTier(Vec<f64>),
}

/// One sweep point's search outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: String,
    pub point: String,
    pub record: RunRecord,
}

/// Summary line of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub point: String,
    pub evaluations: usize,
    pub front_size: usize,
    pub hypervolume: Option<f64>,
    pub min_carbon_kg: Option<f64>,
    pub latency_at_min_carbon_s: Option<f64>,
    pub min_latency_s: Option<f64>,
    pub carbon_at_min_latency_kg: Option<f64>,
}

impl SweepPoint {
    pub fn row(&self) -> SweepRow {
        let min_carbon = self.record.front.argmin(|m| m.carbon_kg);
        let min_latency = self.record.front.argmin(|m| m.latency_s);
        SweepRow {
            axis: self.axis.clone(),
            point: self.point.clone(),
            evaluations: self.record.evaluations,
            front_size: self.record.front.len(),
            hypervolume: self.record.hypervolume,
            min_carbon_kg: min_carbon.and_then(|c| c.metrics).map(|m| m.carbon_kg),
            latency_at_min_carbon_s: min_carbon.and_then(|c| c.metrics).map(|m| m.latency_s),
            min_latency_s: min_latency.and_then(|c| c.metrics).map(|m| m.latency_s),
            carbon_at_min_latency_kg: min_latency.and_then(|c| c.metrics).map(|m| m.carbon_kg),
        }
    }
}

/// Joined comparison table keyed by axis value. Header:
/// `axis,point,evaluations,front_size,hypervolume,min_carbon_kg,latency_at_min_carbon_s,min_latency_s,carbon_at_min_latency_kg`.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(
        "axis,point,evaluations,front_size,hypervolume,min_carbon_kg,latency_at_min_carbon_s,min_latency_s,carbon_at_min_latency_kg\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in points {
        let r = p.row();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.axis,
            r.point,
            r.evaluations,
            r.front_size,
            opt(r.hypervolume),
            opt(r.min_carbon_kg),
            opt(r.latency_at_min_carbon_s),
            opt(r.min_latency_s),
            opt(r.carbon_at_min_latency_kg),
        ));
    }
    out
}

/// Parse [`sweep_csv`] output back into summary rows.
pub fn parse_sweep_csv(csv: &str) -> Result<Vec<SweepRow>> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("axis,point,evaluations,front_size,hypervolume") {
        return Err(Error::Config(format!(
            "unexpected sweep csv header: {header}"
        )));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(Error::Config(format!(
                    "sweep csv row has {} fields",
                    f.len()
                )));
            }
            let opt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse()
                        .map(Some)
                        .map_err(|_| Error::Config(format!("bad number '{s}' in sweep csv")))
                }
            };
            Ok(SweepRow {
                axis: f[0].to_string(),
                point: f[1].to_string(),
                evaluations: f[2]
                    .parse()
                    .map_err(|_| Error::Config("bad evaluations".into()))?,
                front_size: f[3]
                    .parse()
                    .map_err(|_| Error::Config("bad front_size".into()))?,
                hypervolume: opt(f[4])?,
                min_carbon_kg: opt(f[5])?,
                latency_at_min_carbon_s: opt(f[6])?,
                min_latency_s: opt(f[7])?,
                carbon_at_min_latency_kg: opt(f[8])?,
            })
        })
        .collect()
}

/// Run-to-run hypervolume consistency over same-configuration records:
/// objectives normalized to [0, 1] over the union of feasible candidates,
/// reference point 1.1 per objective, then mean / sample std / CV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyStats {
    pub hvs: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub cv: f64,
}

pub fn consistency(runs: &[RunRecord]) -> Result<ConsistencyStats> {
    if runs.len() < 2 {
        return Err(Error::Config("consistency needs at least two runs".into()));
    }
    let mode = runs[0].mode;
    if runs.iter().any(|r| r.mode != mode) {
        return Err(Error::ModeMismatch);
    }
    let dims = mode.objective_names().len();
    let mut lo = vec![f64::INFINITY; dims];
    let mut hi = vec![f64::NEG_INFINITY; dims];
    let objective = |c: &Candidate| c.objectives().expect("feasible candidates carry metrics");
    for run in runs {
        for c in run.feasible_candidates() {
            for (d, v) in objective(c).iter().enumerate() {
                lo[d] = lo[d].min(*v);
                hi[d] = hi[d].max(*v);
            }
        }
    }
    if lo.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(
            "consistency needs feasible candidates in every run".into(),
        ));
    }
    let normalize = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(d, x)| {
                if hi[d] > lo[d] {
                    (x - lo[d]) / (hi[d] - lo[d])
                } else {
                    0.0
                }
            })
            .collect()
    };
    let reference = vec![1.1; dims];
    let mut hvs = Vec::with_capacity(runs.len());
    for run in runs {
        let points: Vec<Vec<f64>> = run
            .front
            .members
            .iter()
            .map(|c| normalize(&objective(c)))
            .collect();
        hvs.push(hypervolume_points(&points, &reference)?);
    }
    let n = hvs.len() as f64;
    let mean = hvs.iter().sum::<f64>() / n;
    let var = hvs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    let cv = if mean != 0.0 { std / mean } else { 0.0 };
    Ok(ConsistencyStats { hvs, mean, std, cv })
}

/// Consistency table as CSV. Header: `mode,seeds,hv_mean,hv_std,hv_cv`.
pub fn consistency_csv(mode: ModeKind, stats: &ConsistencyStats) -> String {
    format!(
        "mode,seeds,hv_mean,hv_std,hv_cv\n{},{},{},{},{}\n",
        mode.as_str(),
        stats.hvs.len(),
        stats.mean,
        stats.std,
        stats.cv
    )
}

/// The mode objectives of a sweep are kept identical across points; only
/// the swept knob changes, and every point reuses the same seed.
pub fn describe_axis(axis: &SweepAxis) -> (&'static str, Vec<String>) {
    match axis {
        SweepAxis::Tops(v) => ("tops", v.iter().map(|x| x.to_string()).collect()),
        SweepAxis::Region(v) => ("region", v.clone()),
        SweepAxis::LatencyTier(v) => ("latency_tier", v.iter().map(|x| x.to_string()).collect()),
    }
}

/// Apply one sweep point to an evaluation context.
pub fn apply_axis_point(
    ctx: &EvalContext,
    axis: &SweepAxis,
    index: usize,
    provider: &dyn crate::carbon::GridProvider,
) -> Result<EvalContext> {
    let mut ctx = ctx.clone();
    match axis {
        SweepAxis::Tops(values) => {
            ctx.platform.tops_budget = values[index];
        }
        SweepAxis::Region(regions) => {
            ctx.grid = provider.intensity(&regions[index])?;
        }
        SweepAxis::LatencyTier(caps) => {
            ctx.mode = ObjectiveMode::with_latency_cap(ctx.mode.kind, caps[index])?;
        }
    }
    Ok(ctx)
}

/// Run the identical search configuration at every axis point (same
/// strategy, budget, and seed; only the swept knob changes).
pub fn run_sweep(cfg: &crate::config::RunConfig, axis: &SweepAxis) -> Result<Vec<SweepPoint>> {
    let space = cfg.joint_space()?;
    let base_ctx = cfg.eval_context()?;
    let (axis_name, labels) = describe_axis(axis);
    let mut points = Vec::with_capacity(labels.len());
    for (i, label) in labels.iter().enumerate() {
        let ctx = apply_axis_point(&base_ctx, axis, i, &cfg.grid)?;
        let mut space = space.clone();
        space.arch.platform = ctx.platform;
        let record = cfg.run_search_in(&space, &ctx)?;
        points.push(SweepPoint {
            axis: axis_name.to_string(),
            point: label.clone(),
            record,
        });
    }
    Ok(points)
}
