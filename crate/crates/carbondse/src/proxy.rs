//! Pluggable accuracy estimation for candidate models: an analytic
//! sensitivity proxy, an ingested measurement table, and rank-correlation
//! utilities for validating either against reference scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::ModelConfig;

/// Sensitivity exponents for the four prunable dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimSensitivity {
    pub hidden: f64,
    pub layers: f64,
    pub ffn: f64,
    pub heads: f64,
}

/// Analytic proxy profile. Per-encoder weights sum to one; exponents are
/// nonnegative and ordered so hidden-width pruning hurts at least as much
/// as layer pruning, which hurts at least as much as FFN pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityProfile {
    pub base_accuracy: f64,
    /// (encoder name, weight, per-dimension exponents).
    pub encoders: Vec<EncoderSensitivity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSensitivity {
    pub name: String,
    pub weight: f64,
    pub alpha: DimSensitivity,
}

impl SensitivityProfile {
    /// Default profile for a dual encoder: vision weighted above text,
    /// hidden width the most sensitive axis.
    pub fn default_dual() -> Self {
        let alpha = DimSensitivity {
            hidden: 1.0,
            layers: 0.6,
            ffn: 0.3,
            heads: 0.3,
        };
        Self {
            base_accuracy: 0.6,
            encoders: vec![
                EncoderSensitivity {
                    name: "text".into(),
                    weight: 0.4,
                    alpha,
                },
                EncoderSensitivity {
                    name: "vision".into(),
                    weight: 0.6,
                    alpha,
                },
            ],
        }
    }

    /// Default profile for a single-encoder model.
    pub fn default_single(name: &str) -> Self {
        Self {
            base_accuracy: 0.6,
            encoders: vec![EncoderSensitivity {
                name: name.into(),
                weight: 1.0,
                alpha: DimSensitivity {
                    hidden: 1.0,
                    layers: 0.6,
                    ffn: 0.3,
                    heads: 0.3,
                },
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.base_accuracy) {
            return Err(Error::Config("base_accuracy must be in [0, 1]".into()));
        }
        let weight_sum: f64 = self.encoders.iter().map(|e| e.weight).sum();
        if (weight_sum - 1.0).abs() > 1e-9 || self.encoders.iter().any(|e| e.weight < 0.0) {
            return Err(Error::Config(
                "encoder weights must be >= 0 and sum to 1".into(),
            ));
        }
        for e in &self.encoders {
            let a = e.alpha;
            if [a.hidden, a.layers, a.ffn, a.heads]
                .iter()
                .any(|&x| x < 0.0)
            {
                return Err(Error::Config("sensitivity exponents must be >= 0".into()));
            }
            if !(a.hidden >= a.layers && a.layers >= a.ffn && a.hidden >= a.heads) {
                return Err(Error::Config(
                    "exponents must order hidden >= layers >= ffn and hidden >= heads".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Accuracy of a pruned model as a weighted product of per-dimension
/// retention ratios: `acc0 * sum_e w_e * prod_d (dim/base)^alpha_d`.
/// Strictly increasing in every ratio with a positive exponent; the
/// unpruned model returns `acc0` exactly.
pub fn analytic_proxy(cfg: &ModelConfig, prof: &SensitivityProfile) -> f64 {
    let base = cfg.base();
    let mut acc = 0.0;
    for es in &prof.encoders {
        let (Some(e), Some(b)) = (cfg.encoder(&es.name), base.encoder(&es.name)) else {
            continue;
        };
        let ratio =
            |dim: usize, base_dim: usize, alpha: f64| (dim as f64 / base_dim as f64).powf(alpha);
        acc += es.weight
            * ratio(e.hidden_dim, b.hidden_dim, es.alpha.hidden)
            * ratio(e.num_layers, b.num_layers, es.alpha.layers)
            * ratio(e.ffn_dim, b.ffn_dim, es.alpha.ffn)
            * ratio(e.num_heads, b.num_heads, es.alpha.heads);
    }
    (prof.base_accuracy * acc).clamp(0.0, 1.0)
}

/// What to do on a fingerprint miss.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookupPolicy {
    #[default]
    Strict,
    NearestNeighbor,
}

/// Measured accuracies keyed by model fingerprint, imported from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub policy: LookupPolicy,
    rows: BTreeMap<String, f64>,
}

impl AccuracyTable {
    pub fn new(policy: LookupPolicy) -> Self {
        Self {
            policy,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, cfg: &ModelConfig, accuracy: f64) {
        self.rows.insert(cfg.fingerprint(), accuracy);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Parse the CSV interchange format. The header names dimension
    /// columns `<encoder>_layers,<encoder>_ffn,<encoder>_hidden,
    /// <encoder>_heads` per encoder plus a final `accuracy` column.
    pub fn from_csv(csv: &str, policy: LookupPolicy) -> Result<Self> {
        let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty accuracy table".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.last() != Some(&"accuracy") {
            return Err(Error::Config(
                "accuracy table header must end with 'accuracy'".into(),
            ));
        }
        if !(cols.len() - 1).is_multiple_of(4) {
            return Err(Error::Config(
                "accuracy table needs 4 dimension columns per encoder".into(),
            ));
        }
        let mut encoders = Vec::new();
        for chunk in cols[..cols.len() - 1].chunks(4) {
            let name = chunk[0].strip_suffix("_layers").ok_or_else(|| {
                Error::Config(format!("expected '<encoder>_layers', got '{}'", chunk[0]))
            })?;
            let expect = [
                format!("{name}_layers"),
                format!("{name}_ffn"),
                format!("{name}_hidden"),
                format!("{name}_heads"),
            ];
            if chunk != expect {
                return Err(Error::Config(format!(
                    "encoder columns must be {expect:?}, got {chunk:?}"
                )));
            }
            encoders.push(name.to_string());
        }
        let mut table = Self::new(policy);
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(Error::Config(format!(
                    "row {} has {} fields, expected {}",
                    i + 2,
                    fields.len(),
                    cols.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{s}' in row {}", i + 2)))
            };
            let mut parts = Vec::new();
            for (e, chunk) in encoders.iter().zip(fields.chunks(4)) {
                parts.push(format!(
                    "{e}:{}/{}/{}/{}",
                    parse(chunk[0])? as usize,
                    parse(chunk[1])? as usize,
                    parse(chunk[2])? as usize,
                    parse(chunk[3])? as usize
                ));
            }
            let accuracy = parse(fields[cols.len() - 1])?;
            if !(0.0..=1.0).contains(&accuracy) {
                return Err(Error::Config(format!(
                    "accuracy out of [0,1] in row {}",
                    i + 2
                )));
            }
            table.rows.insert(parts.join("|"), accuracy);
        }
        Ok(table)
    }
}

fn fingerprint_dims(fp: &str) -> Vec<f64> {
    fp.split('|')
        .flat_map(|enc| {
            enc.split(':')
                .nth(1)
                .unwrap_or("")
                .split('/')
                .map(|d| d.parse::<f64>().unwrap_or(0.0))
        })
        .collect()
}

/// Look a model up in a measurement table. A strict miss is an error; the
/// nearest-neighbor policy falls back to the row closest in normalized
/// dimension space, breaking exact ties toward the lexicographically
/// smaller fingerprint (BTreeMap iteration order).
pub fn table_proxy(cfg: &ModelConfig, table: &AccuracyTable) -> Result<f64> {
    let fp = cfg.fingerprint();
    if let Some(&acc) = table.rows.get(&fp) {
        return Ok(acc);
    }
    match table.policy {
        LookupPolicy::Strict => Err(Error::TableMiss(fp)),
        LookupPolicy::NearestNeighbor => {
            let target = fingerprint_dims(&fp);
            let base_dims: Vec<f64> = fingerprint_dims(&cfg.base().fingerprint());
            let mut best: Option<(f64, &str, f64)> = None;
            for (row_fp, &acc) in &table.rows {
                let dims = fingerprint_dims(row_fp);
                if dims.len() != target.len() {
                    continue;
                }
                let dist: f64 = dims
                    .iter()
                    .zip(&target)
                    .zip(&base_dims)
                    .map(|((a, b), base)| {
                        let norm = if *base > 0.0 { *base } else { 1.0 };
                        ((a - b) / norm).powi(2)
                    })
                    .sum();
                if best.as_ref().map(|(d, _, _)| dist < *d).unwrap_or(true) {
                    best = Some((dist, row_fp, acc));
                }
            }
            best.map(|(_, _, acc)| acc).ok_or(Error::TableMiss(fp))
        }
    }
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Tied values share the average of the ranks they span.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties: the Pearson
/// correlation of the two rank vectors. Errors on length mismatch and on
/// constant inputs (correlation undefined).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    let constant = |v: &[f64]| v.iter().all(|x| x == &v[0]);
    if constant(xs) || constant(ys) {
        return Err(Error::ConstantInput);
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean).powi(2);
        var_y += (b - mean).powi(2);
    }
    Ok(cov / (var_x * var_y).sqrt())
}
