//! Reproducible run records: the append-only candidate log, the final
//! front, the hypervolume reference, and the on-disk run directory layout.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    hypervolume, pareto_front, reference_from_worst, Candidate, ObjectiveMode, ParetoFront,
};

/// Everything one search run produced. Replaying the log through
/// [`pareto_front`] reproduces the stored front exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub strategy: String,
    pub seed: u64,
    pub mode: ObjectiveMode,
    pub budget: usize,
    pub evaluations: usize,
    pub candidates: Vec<Candidate>,
    pub front: ParetoFront,
    pub hypervolume: Option<f64>,
}

impl RunRecord {
    /// Build a record from an evaluation log: extract the front, derive
    /// the reference point from the worst feasible values, and compute
    /// the hypervolume.
    pub fn finalize(
        strategy: &str,
        seed: u64,
        mode: ObjectiveMode,
        budget: usize,
        candidates: Vec<Candidate>,
    ) -> Result<Self> {
        let mut front = pareto_front(&candidates, &mode)?;
        front.ref_point = reference_from_worst(&candidates);
        let hv = match &front.ref_point {
            Some(reference) if !front.is_empty() => Some(hypervolume(&front, reference)?),
            _ => None,
        };
        Ok(Self {
            schema_version: 1,
            strategy: strategy.to_string(),
            seed,
            mode,
            budget,
            evaluations: candidates.len(),
            candidates,
            front,
            hypervolume: hv,
        })
    }

    /// Recompute the front from the log alone.
    pub fn replay_front(&self) -> Result<ParetoFront> {
        let mut front = pareto_front(&self.candidates, &self.mode)?;
        front.ref_point = self.front.ref_point.clone();
        Ok(front)
    }

    pub fn feasible_candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| c.feasible)
    }

    /// Plot-ready front table. Header:
    /// `trial,accuracy,latency_s,energy_j,carbon_kg,model,hw`.
    pub fn pareto_csv(&self) -> String {
        let mut out = String::from("trial,accuracy,latency_s,energy_j,carbon_kg,model,hw\n");
        for c in &self.front.members {
            let m = c.metrics.expect("front members carry metrics");
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.provenance.trial,
                m.accuracy,
                m.latency_s,
                m.energy_j,
                m.carbon_kg,
                c.model.fingerprint(),
                c.hw.fingerprint(),
            ));
        }
        out
    }

    /// Persist the run directory: `config.json` (caller-provided
    /// snapshot), `run.json`, `candidates.jsonl`, `pareto.csv`.
    pub fn write_dir(&self, dir: &Path, config_snapshot_json: &str, force: bool) -> Result<()> {
        if dir.exists() && dir.read_dir()?.next().is_some() && !force {
            return Err(Error::OutputDirNotEmpty(dir.display().to_string()));
        }
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.json"), config_snapshot_json)?;
        let meta = RunMeta {
            schema_version: self.schema_version,
            strategy: self.strategy.clone(),
            seed: self.seed,
            mode: self.mode,
            budget: self.budget,
            evaluations: self.evaluations,
            objectives: self
                .mode
                .objective_names()
                .iter()
                .map(|s| s.to_string())
                .collect(),
            ref_point: self.front.ref_point.clone(),
            hypervolume: self.hypervolume,
            front_size: self.front.len(),
            oracle_hv_ratio: None,
        };
        fs::write(dir.join("run.json"), serde_json::to_string_pretty(&meta)?)?;
        let mut log = fs::File::create(dir.join("candidates.jsonl"))?;
        for c in &self.candidates {
            writeln!(log, "{}", serde_json::to_string(c)?)?;
        }
        fs::write(dir.join("pareto.csv"), self.pareto_csv())?;
        Ok(())
    }

    /// Load a run directory back; the front is rebuilt from the log and
    /// checked against the stored metadata.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let meta: RunMeta = serde_json::from_str(&fs::read_to_string(dir.join("run.json"))?)?;
        let mut candidates = Vec::new();
        for line in fs::read_to_string(dir.join("candidates.jsonl"))?.lines() {
            if !line.trim().is_empty() {
                candidates.push(serde_json::from_str(line)?);
            }
        }
        let mut record = Self::finalize(
            &meta.strategy,
            meta.seed,
            meta.mode,
            meta.budget,
            candidates,
        )?;
        record.schema_version = meta.schema_version;
        if record.front.len() != meta.front_size {
            return Err(Error::Config(format!(
                "run dir {} is inconsistent: replayed front has {} members, run.json says {}",
                dir.display(),
                record.front.len(),
                meta.front_size
            )));
        }
        Ok(record)
    }
}

/// `run.json` payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub schema_version: u32,
    pub strategy: String,
    pub seed: u64,
    pub mode: ObjectiveMode,
    pub budget: usize,
    pub evaluations: usize,
    pub objectives: Vec<String>,
    pub ref_point: Option<Vec<f64>>,
    pub hypervolume: Option<f64>,
    pub front_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_hv_ratio: Option<f64>,
}

/// One parsed `pareto.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoRow {
    pub trial: usize,
    pub accuracy: f64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub carbon_kg: f64,
    pub model: String,
    pub hw: String,
}

/// Parse the `pareto.csv` format emitted by [`RunRecord::pareto_csv`].
pub fn parse_pareto_csv(csv: &str) -> Result<Vec<ParetoRow>> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or_default();
    if header != "trial,accuracy,latency_s,energy_j,carbon_kg,model,hw" {
        return Err(Error::Config(format!(
            "unexpected pareto.csv header: {header}"
        )));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::Config(format!(
                "pareto.csv row {} has {} fields",
                i + 2,
                f.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Config(format!("bad number '{s}' in pareto.csv")))
        };
        rows.push(ParetoRow {
            trial: f[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad trial '{}'", f[0])))?,
            accuracy: num(f[1])?,
            latency_s: num(f[2])?,
            energy_j: num(f[3])?,
            carbon_kg: num(f[4])?,
            model: f[5].to_string(),
            hw: f[6].to_string(),
        });
    }
    Ok(rows)
}
