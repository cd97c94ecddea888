//! Constrained multi-objective search over the joint model x hardware
//! space: candidate evaluation, Pareto extraction, hypervolume, an
//! exhaustive desk-scale oracle, and a seeded evolutionary strategy.

mod exhaustive;
mod hypervolume;
mod nsga2;
mod record;

pub use exhaustive::{exhaustive_search, ExhaustiveSearch};
pub use hypervolume::{hypervolume, hypervolume_points};
pub use nsga2::{nsga2_search, Nsga2Config, Nsga2Search};
pub use record::{parse_pareto_csv, ParetoRow, RunMeta, RunRecord};

use serde::{Deserialize, Serialize};

use crate::archspace::Platform;
use crate::archspace::{peak_tops, validate_hw, ArchSpace, HardwareConfig};
use crate::carbon::{total_carbon, CarbonFactors, DeploymentSchedule, GridIntensity};
use crate::error::{Error, Result};
use crate::perf::{graph_cost, CostCoefficients};
use crate::proxy::{analytic_proxy, table_proxy, AccuracyTable, SensitivityProfile};
use crate::workload::{lower_to_graph, ModelConfig, PruneSpace, PrunedDims};

/// The four optimization modes. Accuracy is always maximized; the named
/// metrics are minimized. Modes without a latency objective enforce a
/// latency cap instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    /// Accuracy and total carbon, latency-constrained.
    Carbon,
    /// Accuracy and latency.
    Latency,
    /// Accuracy and energy, latency-constrained.
    Energy,
    /// Accuracy, latency, and total carbon.
    CarbonLatency,
}

impl ModeKind {
    pub fn has_latency_objective(self) -> bool {
        matches!(self, ModeKind::Latency | ModeKind::CarbonLatency)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "carbon" => Ok(ModeKind::Carbon),
            "latency" => Ok(ModeKind::Latency),
            "energy" => Ok(ModeKind::Energy),
            "carbon+latency" | "carbon-latency" => Ok(ModeKind::CarbonLatency),
            other => Err(Error::Config(format!(
                "unknown mode '{other}' (expected carbon|latency|energy|carbon+latency)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::Carbon => "carbon",
            ModeKind::Latency => "latency",
            ModeKind::Energy => "energy",
            ModeKind::CarbonLatency => "carbon+latency",
        }
    }
}

pub const DEFAULT_LATENCY_CAP_S: f64 = 0.050;

/// An objective mode plus its latency cap. The cap is present exactly
/// when the mode lacks a latency objective; the compute budget rides on
/// the [`Platform`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveMode {
    pub kind: ModeKind,
    pub latency_cap_s: Option<f64>,
}

impl ObjectiveMode {
    /// Mode with the default 50 ms cap where one applies.
    pub fn new(kind: ModeKind) -> Self {
        let latency_cap_s = (!kind.has_latency_objective()).then_some(DEFAULT_LATENCY_CAP_S);
        Self {
            kind,
            latency_cap_s,
        }
    }

    /// Mode with an explicit cap; rejected when the mode already
    /// optimizes latency.
    pub fn with_latency_cap(kind: ModeKind, cap_s: f64) -> Result<Self> {
        if kind.has_latency_objective() {
            return Err(Error::Config(format!(
                "mode '{}' optimizes latency and takes no cap",
                kind.as_str()
            )));
        }
        if cap_s.is_nan() || cap_s <= 0.0 {
            return Err(Error::Config("latency cap must be > 0".into()));
        }
        Ok(Self {
            kind,
            latency_cap_s: Some(cap_s),
        })
    }

    /// Active objective names, accuracy first.
    pub fn objective_names(&self) -> Vec<&'static str> {
        match self.kind {
            ModeKind::Carbon => vec!["accuracy", "carbon_kg"],
            ModeKind::Latency => vec!["accuracy", "latency_s"],
            ModeKind::Energy => vec!["accuracy", "energy_j"],
            ModeKind::CarbonLatency => vec!["accuracy", "latency_s", "carbon_kg"],
        }
    }

    /// The metric vector projected onto the active objectives, oriented
    /// so every component is minimized (accuracy negated).
    pub fn objective_values(&self, m: &Metrics) -> Vec<f64> {
        match self.kind {
            ModeKind::Carbon => vec![-m.accuracy, m.carbon_kg],
            ModeKind::Latency => vec![-m.accuracy, m.latency_s],
            ModeKind::Energy => vec![-m.accuracy, m.energy_j],
            ModeKind::CarbonLatency => vec![-m.accuracy, m.latency_s, m.carbon_kg],
        }
    }

    /// The minimized metric the mode is named after; used by the
    /// iso-accuracy tables to pick "best" within a window.
    pub fn lead_objective(&self, m: &Metrics) -> f64 {
        match self.kind {
            ModeKind::Carbon | ModeKind::CarbonLatency => m.carbon_kg,
            ModeKind::Latency => m.latency_s,
            ModeKind::Energy => m.energy_j,
        }
    }
}

/// The full metric vector of an evaluated candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub carbon_kg: f64,
}

/// Why a candidate is infeasible, with a magnitude so the search can
/// prefer near-feasible points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Violation {
    Tops { peak_tops: f64, budget_tops: f64 },
    HwRange { field: String, bound: String },
    Mapping { required: u64, available: u64 },
    LatencyCap { latency_s: f64, cap_s: f64 },
}

impl Violation {
    pub fn magnitude(&self) -> f64 {
        match self {
            Violation::Tops {
                peak_tops,
                budget_tops,
            } => (peak_tops - budget_tops) / budget_tops,
            Violation::HwRange { .. } => 1.0,
            Violation::Mapping {
                required,
                available,
            } => 1.0 + (*required as f64 - *available as f64) / *available as f64,
            Violation::LatencyCap { latency_s, cap_s } => (latency_s - cap_s) / cap_s,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Violation::Tops { .. } => "TOPS",
            Violation::HwRange { .. } => "hw-range",
            Violation::Mapping { .. } => "mapping",
            Violation::LatencyCap { .. } => "latency-cap",
        }
    }
}

/// Where a candidate came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub trial: usize,
    pub seed: u64,
    pub strategy: String,
}

/// One evaluated (model, hardware) pair. Infeasible candidates carry
/// their violation reasons and never enter fronts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub model: ModelConfig,
    pub hw: HardwareConfig,
    pub mode: ObjectiveMode,
    pub feasible: bool,
    pub metrics: Option<Metrics>,
    pub violations: Vec<Violation>,
    pub provenance: Provenance,
}

impl Candidate {
    pub fn fingerprint(&self) -> String {
        format!("{}||{}", self.model.fingerprint(), self.hw.fingerprint())
    }

    pub fn violation_magnitude(&self) -> f64 {
        self.violations.iter().map(Violation::magnitude).sum()
    }

    /// Objective vector in minimized orientation; None when metrics were
    /// not computable.
    pub fn objectives(&self) -> Option<Vec<f64>> {
        self.metrics.as_ref().map(|m| self.mode.objective_values(m))
    }
}

/// The accuracy estimator a run is configured with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AccuracyProxy {
    Analytic { profile: SensitivityProfile },
    Table { table: AccuracyTable },
}

impl AccuracyProxy {
    pub fn accuracy(&self, cfg: &ModelConfig) -> Result<f64> {
        match self {
            AccuracyProxy::Analytic { profile } => Ok(analytic_proxy(cfg, profile)),
            AccuracyProxy::Table { table } => table_proxy(cfg, table),
        }
    }
}

/// Everything needed to score one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalContext {
    pub platform: Platform,
    pub coeffs: CostCoefficients,
    pub factors: CarbonFactors,
    pub schedule: DeploymentSchedule,
    pub grid: GridIntensity,
    pub proxy: AccuracyProxy,
    pub mode: ObjectiveMode,
}

/// Evaluate one candidate end to end: hardware validation, lowering,
/// graph costing, carbon composition, and the accuracy proxy. Evaluation
/// never fails; problems become infeasibility records on the candidate.
pub fn evaluate_candidate(
    model: &ModelConfig,
    hw: &HardwareConfig,
    ctx: &EvalContext,
    provenance: Provenance,
) -> Candidate {
    let mut violations = Vec::new();
    for v in validate_hw(hw, &ctx.platform) {
        if v.field == "peak_tops" {
            violations.push(Violation::Tops {
                peak_tops: peak_tops(hw, &ctx.platform),
                budget_tops: ctx.platform.tops_budget,
            });
        } else {
            violations.push(Violation::HwRange {
                field: v.field,
                bound: v.bound,
            });
        }
    }

    let graph = lower_to_graph(model);
    let metrics = match graph_cost(&graph, hw, &ctx.platform, &ctx.coeffs) {
        Ok(perf) => {
            let carbon = total_carbon(&perf, &ctx.platform, &ctx.factors, &ctx.schedule, &ctx.grid);
            let accuracy = ctx.proxy.accuracy(model).unwrap_or(0.0);
            if let Some(cap_s) = ctx.mode.latency_cap_s {
                if perf.latency_s > cap_s {
                    violations.push(Violation::LatencyCap {
                        latency_s: perf.latency_s,
                        cap_s,
                    });
                }
            }
            Some(Metrics {
                accuracy,
                latency_s: perf.latency_s,
                energy_j: perf.energy_j,
                carbon_kg: carbon.total_kg,
            })
        }
        Err(Error::InfeasibleMapping {
            required,
            available,
        }) => {
            violations.push(Violation::Mapping {
                required,
                available,
            });
            None
        }
        Err(_) => unreachable!("graph_cost only fails on mapping"),
    };

    Candidate {
        model: model.clone(),
        hw: *hw,
        mode: ctx.mode,
        feasible: violations.is_empty(),
        metrics,
        violations,
        provenance,
    }
}

/// Strict Pareto dominance over minimized vectors: `a` no worse anywhere
/// and strictly better somewhere.
pub fn dominates_vec(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// Dominance between feasible candidates under a mode's objective subset.
/// Errors when either candidate was evaluated under a different mode;
/// an infeasible candidate never dominates and is never dominated here.
pub fn dominates(a: &Candidate, b: &Candidate, mode: &ObjectiveMode) -> Result<bool> {
    if a.mode != *mode || b.mode != *mode {
        return Err(Error::ModeMismatch);
    }
    match (a.objectives(), b.objectives()) {
        (Some(va), Some(vb)) if a.feasible && b.feasible => Ok(dominates_vec(&va, &vb)),
        _ => Ok(false),
    }
}

/// Constraint-domination: feasible beats infeasible, infeasible points
/// rank by violation magnitude, feasible points by Pareto dominance
/// under their own (shared) mode.
pub fn constrained_dominates(a: &Candidate, b: &Candidate) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation_magnitude() < b.violation_magnitude(),
        (true, true) => match (a.objectives(), b.objectives()) {
            (Some(va), Some(vb)) => dominates_vec(&va, &vb),
            _ => false,
        },
    }
}

/// Indices of the non-dominated members of a set of minimized vectors.
pub fn non_dominated_indices(vectors: &[Vec<f64>]) -> Vec<usize> {
    (0..vectors.len())
        .filter(|&i| {
            !vectors
                .iter()
                .enumerate()
                .any(|(j, v)| j != i && dominates_vec(v, &vectors[i]))
        })
        .collect()
}

/// A set of mutually non-dominated feasible candidates, in deterministic
/// order (lexicographic by objective vector, then fingerprint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub mode: ObjectiveMode,
    pub members: Vec<Candidate>,
    /// Reference point the run's hypervolume was computed against.
    pub ref_point: Option<Vec<f64>>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member minimizing a metric projection (ties to the first in the
    /// deterministic order).
    pub fn argmin<F: Fn(&Metrics) -> f64>(&self, f: F) -> Option<&Candidate> {
        self.members
            .iter()
            .filter_map(|c| c.metrics.as_ref().map(|m| (c, f(m))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(c, _)| c)
    }
}

fn sort_candidates(members: &mut [Candidate]) {
    members.sort_by(|a, b| {
        let va = a.objectives().unwrap_or_default();
        let vb = b.objectives().unwrap_or_default();
        va.iter()
            .zip(&vb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| a.fingerprint().cmp(&b.fingerprint()))
    });
}

/// Exact non-dominated subset of the feasible candidates. A design
/// re-evaluated under several trials counts once (first occurrence);
/// distinct designs with identical objective vectors are mutually
/// non-dominated and all kept.
pub fn pareto_front(candidates: &[Candidate], mode: &ObjectiveMode) -> Result<ParetoFront> {
    let mut seen = std::collections::BTreeSet::new();
    let feasible: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| c.feasible)
        .filter(|c| seen.insert(c.fingerprint()))
        .collect();
    for c in &feasible {
        if c.mode != *mode {
            return Err(Error::ModeMismatch);
        }
    }
    // Incremental archive: new points evict dominated members and are
    // dropped when dominated themselves.
    let mut archive: Vec<(&Candidate, Vec<f64>)> = Vec::new();
    for c in feasible {
        let Some(v) = c.objectives() else { continue };
        if archive.iter().any(|(_, mv)| dominates_vec(mv, &v)) {
            continue;
        }
        archive.retain(|(_, mv)| !dominates_vec(&v, mv));
        archive.push((c, v));
    }
    let mut members: Vec<Candidate> = archive.into_iter().map(|(c, _)| c.clone()).collect();
    sort_candidates(&mut members);
    Ok(ParetoFront {
        mode: *mode,
        members,
        ref_point: None,
    })
}

/// Reference point 10% beyond the per-objective worst feasible value, so
/// every feasible point strictly dominates it.
pub fn reference_from_worst(candidates: &[Candidate]) -> Option<Vec<f64>> {
    let mut worst: Option<Vec<f64>> = None;
    for c in candidates.iter().filter(|c| c.feasible) {
        let Some(v) = c.objectives() else { continue };
        match &mut worst {
            None => worst = Some(v),
            Some(w) => {
                for (wi, vi) in w.iter_mut().zip(&v) {
                    *wi = wi.max(*vi);
                }
            }
        }
    }
    worst.map(|w| w.iter().map(|&x| x + (0.1 * x.abs()).max(1e-9)).collect())
}

/// The joint search space: a model prune space crossed with a hardware
/// space. Genomes index into the per-dimension candidate lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpace {
    pub prune: PruneSpace,
    pub arch: ArchSpace,
}

impl JointSpace {
    /// Cardinality of each gene: four model dims per encoder, then the
    /// six hardware tunables.
    pub fn gene_cardinalities(&self) -> Vec<usize> {
        let mut card = Vec::new();
        for axes in &self.prune.axes {
            card.extend([
                axes.layers.len(),
                axes.ffn.len(),
                axes.hidden.len(),
                axes.heads.len(),
            ]);
        }
        card.extend([
            self.arch.tc.len(),
            self.arch.pe_x.len(),
            self.arch.pe_y.len(),
            self.arch.glb_bytes.len(),
            self.arch.l2_bytes.len(),
            self.arch.l2_bw.len(),
        ]);
        card
    }

    pub fn num_genes(&self) -> usize {
        4 * self.prune.axes.len() + 6
    }

    /// Joint cartesian size before hardware validity filtering.
    pub fn cartesian_size(&self) -> u128 {
        self.prune.size() * self.arch.cartesian_size()
    }

    /// Model space size times the number of *valid* hardware members;
    /// this is what the exhaustive oracle evaluates.
    pub fn valid_size(&self) -> u128 {
        self.prune.size() * self.arch.enumerate().len() as u128
    }

    /// Decode a genome into a candidate pair. Hardware validity is not
    /// enforced here; evaluation marks violations.
    pub fn decode(&self, genome: &[usize]) -> (ModelConfig, HardwareConfig) {
        debug_assert_eq!(genome.len(), self.num_genes());
        let mut dims = Vec::with_capacity(self.prune.axes.len());
        let mut g = genome.iter();
        for axes in &self.prune.axes {
            dims.push(PrunedDims {
                num_layers: axes.layers[*g.next().unwrap()],
                ffn_dim: axes.ffn[*g.next().unwrap()],
                hidden_dim: axes.hidden[*g.next().unwrap()],
                num_heads: axes.heads[*g.next().unwrap()],
            });
        }
        let model = self
            .prune
            .base
            .pruned(&dims)
            .expect("genome dims come from the axes");
        let hw = self.arch.member(&[
            *g.next().unwrap(),
            *g.next().unwrap(),
            *g.next().unwrap(),
            *g.next().unwrap(),
            *g.next().unwrap(),
            *g.next().unwrap(),
        ]);
        (model, hw)
    }

    /// Every (model, valid hardware) pair, models varying slowest.
    pub fn enumerate_valid(&self) -> Vec<(ModelConfig, HardwareConfig)> {
        let hw = self.arch.enumerate();
        let mut out = Vec::new();
        for model in self.prune.enumerate() {
            for h in &hw {
                out.push((model.clone(), *h));
            }
        }
        out
    }
}

/// A pluggable search strategy producing a reproducible run record.
pub trait SearchStrategy {
    fn name(&self) -> &'static str;
    fn run(
        &self,
        space: &JointSpace,
        ctx: &EvalContext,
        budget: usize,
        seed: u64,
    ) -> Result<RunRecord>;
}
