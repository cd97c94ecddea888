//! Run configuration: one serializable struct that fully determines a
//! run. A resolved snapshot is written into every run directory before
//! work starts, so (snapshot, seed) reproduces all outputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::archspace::{ArchSpace, Platform, KIB, MIB};
use crate::carbon::{
    grid_intensity, CarbonFactors, DeploymentSchedule, GridProvider, StaticGridDataset,
};
use crate::error::{Error, Result};
use crate::optimize::{
    AccuracyProxy, EvalContext, ExhaustiveSearch, JointSpace, ModeKind, Nsga2Config, Nsga2Search,
    ObjectiveMode, RunRecord, SearchStrategy,
};
use crate::perf::CostCoefficients;
use crate::presets;
use crate::proxy::SensitivityProfile;
use crate::workload::{build_prune_space, ModelConfig, PruneSteps};

/// Candidate value lists for the six hardware tunables. Lists omitted
/// in a config file keep the full-template defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchLists {
    pub tc: Vec<usize>,
    pub pe_x: Vec<usize>,
    pub pe_y: Vec<usize>,
    pub glb_bytes: Vec<u64>,
    pub l2_bytes: Vec<u64>,
    pub l2_bw: Vec<u64>,
}

impl Default for ArchLists {
    fn default() -> Self {
        let full = ArchSpace::full_template(Platform::default());
        Self {
            tc: full.tc,
            pe_x: full.pe_x,
            pe_y: full.pe_y,
            glb_bytes: full.glb_bytes,
            l2_bytes: full.l2_bytes,
            l2_bw: full.l2_bw,
        }
    }
}

impl ArchLists {
    pub fn to_space(&self, platform: Platform) -> ArchSpace {
        ArchSpace {
            tc: self.tc.clone(),
            pe_x: self.pe_x.clone(),
            pe_y: self.pe_y.clone(),
            glb_bytes: self.glb_bytes.clone(),
            l2_bytes: self.l2_bytes.clone(),
            l2_bw: self.l2_bw.clone(),
            platform,
        }
    }
}

/// Which search strategy a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Nsga2,
    Exhaustive,
}

/// Pointer to an accuracy-measurement CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTableRef {
    pub path: PathBuf,
    #[serde(default)]
    pub policy: crate::proxy::LookupPolicy,
}

fn default_schema_version() -> u32 {
    1
}
fn default_region() -> String {
    "CA-US".into()
}
fn default_seed() -> u64 {
    0
}
fn default_budget() -> usize {
    3200
}
fn default_population() -> usize {
    32
}
fn default_strategy() -> StrategyKind {
    StrategyKind::Nsga2
}
fn default_mode() -> ModeKind {
    ModeKind::Carbon
}
fn default_proxy() -> AccuracyProxy {
    AccuracyProxy::Analytic {
        profile: SensitivityProfile::default_dual(),
    }
}
fn default_grid() -> StaticGridDataset {
    StaticGridDataset::bundled()
}

/// A complete run description. Optional `*_path` fields point at external
/// data files; loading resolves them into the inline values (relative to
/// the config file) and clears the paths, so snapshots are
/// self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub model: ModelConfig,
    #[serde(default)]
    pub prune_steps: PruneSteps,
    #[serde(default)]
    pub arch: ArchLists,
    #[serde(default)]
    pub platform: Platform,
    #[serde(default)]
    pub coefficients: CostCoefficients,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients_path: Option<PathBuf>,
    #[serde(default)]
    pub factors: CarbonFactors,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors_path: Option<PathBuf>,
    #[serde(default = "default_grid")]
    pub grid: StaticGridDataset,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_path: Option<PathBuf>,
    #[serde(default = "default_region")]
    pub region: String,
    /// When set, the fab grid intensity is looked up here instead of
    /// taking `factors.ci_fab_g_per_kwh` as-is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fab_region: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_override_g_per_kwh: Option<f64>,
    #[serde(default)]
    pub schedule: DeploymentSchedule,
    #[serde(default = "default_proxy")]
    pub proxy: AccuracyProxy,
    /// Measurement CSV replacing the configured proxy on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy_table: Option<AccuracyTableRef>,
    #[serde(default = "default_mode")]
    pub mode: ModeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_cap_s: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyKind,
    #[serde(default = "default_population")]
    pub population: usize,
}

impl RunConfig {
    /// The desk benchmark: small dual encoder, 64x64 joint space.
    pub fn desk() -> Self {
        let space = presets::desk_space();
        Self {
            schema_version: 1,
            model: space.prune.base.clone(),
            prune_steps: space.prune.steps,
            arch: ArchLists {
                tc: space.arch.tc.clone(),
                pe_x: space.arch.pe_x.clone(),
                pe_y: space.arch.pe_y.clone(),
                glb_bytes: space.arch.glb_bytes.clone(),
                l2_bytes: space.arch.l2_bytes.clone(),
                l2_bw: space.arch.l2_bw.clone(),
            },
            platform: Platform::default(),
            coefficients: CostCoefficients::default(),
            coefficients_path: None,
            factors: CarbonFactors::default(),
            factors_path: None,
            grid: StaticGridDataset::bundled(),
            grid_path: None,
            region: default_region(),
            fab_region: None,
            grid_override_g_per_kwh: None,
            schedule: DeploymentSchedule::default(),
            proxy: default_proxy(),
            accuracy_table: None,
            mode: ModeKind::Carbon,
            latency_cap_s: None,
            seed: 0,
            budget: default_budget(),
            strategy: StrategyKind::Nsga2,
            population: default_population(),
        }
    }

    /// The published dual-encoder base over the full hardware template.
    pub fn clip_b16() -> Self {
        Self {
            model: presets::clip_b16(),
            prune_steps: PruneSteps::default(),
            arch: ArchLists::default(),
            ..Self::desk()
        }
    }

    /// B/32 variant: shorter vision sequence, wider patch.
    pub fn clip_b32() -> Self {
        Self {
            model: presets::clip_b32(),
            ..Self::clip_b16()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "clip-b16" => Ok(Self::clip_b16()),
            "clip-b32" => Ok(Self::clip_b32()),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected desk|clip-b16|clip-b32)"
            ))),
        }
    }

    /// Load from a JSON file, resolving `*_path` references relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let json = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&json)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) -> Result<()> {
        let join = |base: &Path, p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        if let Some(p) = self.coefficients_path.take() {
            self.coefficients = serde_json::from_str(&fs::read_to_string(join(base, &p))?)?;
        }
        if let Some(p) = self.factors_path.take() {
            self.factors = serde_json::from_str(&fs::read_to_string(join(base, &p))?)?;
        }
        if let Some(p) = self.grid_path.take() {
            self.grid = StaticGridDataset::from_json(&fs::read_to_string(join(base, &p))?)?;
        }
        if let Some(table_ref) = self.accuracy_table.take() {
            let csv = fs::read_to_string(join(base, &table_ref.path))?;
            let table = crate::proxy::AccuracyTable::from_csv(&csv, table_ref.policy)?;
            self.proxy = AccuracyProxy::Table { table };
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::Config(format!(
                "unsupported config schema_version {}",
                self.schema_version
            )));
        }
        self.coefficients.validate()?;
        self.factors.validate()?;
        self.schedule.validate()?;
        if let AccuracyProxy::Analytic { profile } = &self.proxy {
            profile.validate()?;
        }
        self.objective_mode()?;
        Ok(())
    }

    /// The run's objective mode; the cap applies exactly when the mode
    /// lacks a latency objective.
    pub fn objective_mode(&self) -> Result<ObjectiveMode> {
        match (self.mode.has_latency_objective(), self.latency_cap_s) {
            (false, Some(cap)) => ObjectiveMode::with_latency_cap(self.mode, cap),
            (false, None) => Ok(ObjectiveMode::new(self.mode)),
            (true, None) => Ok(ObjectiveMode::new(self.mode)),
            (true, Some(_)) => Err(Error::Config(format!(
                "mode '{}' optimizes latency and takes no latency cap",
                self.mode.as_str()
            ))),
        }
    }

    pub fn joint_space(&self) -> Result<JointSpace> {
        let prune = build_prune_space(self.model.base(), self.prune_steps)?;
        Ok(JointSpace {
            prune,
            arch: self.arch.to_space(self.platform),
        })
    }

    pub fn eval_context(&self) -> Result<EvalContext> {
        let grid = grid_intensity(&self.region, &self.grid, self.grid_override_g_per_kwh)?;
        let mut factors = self.factors;
        if let Some(fab) = &self.fab_region {
            factors.ci_fab_g_per_kwh = self.grid.intensity(fab)?.g_per_kwh;
        }
        Ok(EvalContext {
            platform: self.platform,
            coeffs: self.coefficients.clone(),
            factors,
            schedule: self.schedule,
            grid,
            proxy: self.proxy.clone(),
            mode: self.objective_mode()?,
        })
    }

    /// The fully resolved snapshot written into run directories.
    pub fn snapshot_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Dispatch the configured strategy.
    pub fn run_search(&self) -> Result<RunRecord> {
        let space = self.joint_space()?;
        let ctx = self.eval_context()?;
        self.run_search_in(&space, &ctx)
    }

    /// Run the configured strategy against an explicit space and context
    /// (sweeps vary the context point by point).
    pub fn run_search_in(&self, space: &JointSpace, ctx: &EvalContext) -> Result<RunRecord> {
        match self.strategy {
            StrategyKind::Nsga2 => {
                let search = Nsga2Search {
                    config: Nsga2Config {
                        population: self.population,
                        ..Nsga2Config::default()
                    },
                };
                search.run(space, ctx, self.budget, self.seed)
            }
            StrategyKind::Exhaustive => {
                ExhaustiveSearch::default().run(space, ctx, self.budget, self.seed)
            }
        }
    }
}

/// Byte sizes accept raw numbers in JSON; the CLI accepts `64K`/`2M`
/// shorthand for overrides.
pub fn parse_bytes(s: &str) -> Result<u64> {
    let s = s.trim();
    let (num, mult) = match s.as_bytes().last() {
        Some(b'K') | Some(b'k') => (&s[..s.len() - 1], KIB),
        Some(b'M') | Some(b'm') => (&s[..s.len() - 1], MIB),
        _ => (s, 1),
    };
    num.parse::<u64>()
        .map(|v| v * mult)
        .map_err(|_| Error::Config(format!("bad byte size '{s}' (use e.g. 65536, 64K, 2M)")))
}
