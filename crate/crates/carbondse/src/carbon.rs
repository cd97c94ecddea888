//! Embodied and operational carbon accounting.
//!
//! Embodied carbon scales with die area through fab-grid intensity, process
//! gas, and material factors, plus fixed DRAM and packaging terms.
//! Operational carbon scales per-inference energy over the deployment
//! schedule through the operating region's grid intensity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::archspace::Platform;
use crate::error::{Error, Result};
use crate::perf::PerfReport;

/// Manufacturing carbon factors. The per-area factors follow the usual
/// area-times-(fab energy + gas + material) composition over yield; values
/// ship in an editable data file with provenance notes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CarbonFactors {
    pub schema_version: u32,
    /// Grid intensity of the fab region, gCO2e/kWh.
    pub ci_fab_g_per_kwh: f64,
    /// Fab energy per die area, kWh/cm2.
    pub energy_per_area_kwh_per_cm2: f64,
    /// Direct gas emissions per die area, gCO2e/cm2.
    pub gas_per_area_g_per_cm2: f64,
    /// Material footprint per die area, gCO2e/cm2.
    pub material_per_area_g_per_cm2: f64,
    pub yield_frac: f64,
    /// Off-chip DRAM, gCO2e per GB.
    pub dram_g_per_gb: f64,
    pub packaging_g: f64,
}

impl Default for CarbonFactors {
    fn default() -> Self {
        Self {
            schema_version: 1,
            ci_fab_g_per_kwh: 561.0,
            energy_per_area_kwh_per_cm2: 2.0,
            gas_per_area_g_per_cm2: 200.0,
            material_per_area_g_per_cm2: 500.0,
            yield_frac: 0.875,
            dram_g_per_gb: 150.0,
            packaging_g: 150.0,
        }
    }
}

impl CarbonFactors {
    pub fn validate(&self) -> Result<()> {
        if !(self.yield_frac > 0.0 && self.yield_frac <= 1.0) {
            return Err(Error::Config("yield_frac must be in (0, 1]".into()));
        }
        for (name, v) in [
            ("ci_fab_g_per_kwh", self.ci_fab_g_per_kwh),
            (
                "energy_per_area_kwh_per_cm2",
                self.energy_per_area_kwh_per_cm2,
            ),
            ("gas_per_area_g_per_cm2", self.gas_per_area_g_per_cm2),
            (
                "material_per_area_g_per_cm2",
                self.material_per_area_g_per_cm2,
            ),
            ("dram_g_per_gb", self.dram_g_per_gb),
            ("packaging_g", self.packaging_g),
        ] {
            if v < 0.0 {
                return Err(Error::Config(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// How long and how hard the device runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeploymentSchedule {
    pub lifetime_years: f64,
    pub active_hours_per_day: f64,
    pub inferences_per_second: f64,
}

impl Default for DeploymentSchedule {
    fn default() -> Self {
        Self {
            lifetime_years: 3.0,
            active_hours_per_day: 6.0,
            inferences_per_second: 1.0,
        }
    }
}

impl DeploymentSchedule {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lifetime_years", self.lifetime_years),
            ("active_hours_per_day", self.active_hours_per_day),
            ("inferences_per_second", self.inferences_per_second),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Config(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Where a grid intensity number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSource {
    Static,
    Override,
}

/// Carbon intensity of one region's electricity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridIntensity {
    pub region: String,
    pub g_per_kwh: f64,
    pub source: GridSource,
}

impl GridIntensity {
    pub fn override_value(g_per_kwh: f64) -> Self {
        Self {
            region: "override".into(),
            g_per_kwh,
            source: GridSource::Override,
        }
    }
}

/// Resolves region codes to grid intensities. The bundled static dataset
/// is the default implementation; a service-backed provider only needs to
/// answer the same question (region code in, gCO2e/kWh out).
pub trait GridProvider {
    fn intensity(&self, region: &str) -> Result<GridIntensity>;
    fn regions(&self) -> Vec<String>;
}

/// Read-only dataset of yearly-average regional intensities loaded from
/// the bundled JSON file (or a user-supplied one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticGridDataset {
    pub schema_version: u32,
    pub notes: String,
    pub regions: BTreeMap<String, f64>,
}

impl StaticGridDataset {
    pub fn from_json(json: &str) -> Result<Self> {
        let ds: Self = serde_json::from_str(json)?;
        for (region, v) in &ds.regions {
            if v.is_nan() || *v <= 0.0 {
                return Err(Error::Config(format!(
                    "grid intensity for {region} must be > 0"
                )));
            }
        }
        Ok(ds)
    }

    /// The dataset shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(include_str!("../data/grid_intensity.json"))
            .expect("bundled grid dataset parses")
    }
}

impl GridProvider for StaticGridDataset {
    fn intensity(&self, region: &str) -> Result<GridIntensity> {
        match self.regions.get(region) {
            Some(&g_per_kwh) => Ok(GridIntensity {
                region: region.to_string(),
                g_per_kwh,
                source: GridSource::Static,
            }),
            None => Err(Error::UnknownRegion {
                region: region.to_string(),
                available: self.regions.keys().cloned().collect::<Vec<_>>().join(", "),
            }),
        }
    }

    fn regions(&self) -> Vec<String> {
        self.regions.keys().cloned().collect()
    }
}

/// Look a region up through a provider, or take an override value.
pub fn grid_intensity(
    region: &str,
    provider: &dyn GridProvider,
    override_g_per_kwh: Option<f64>,
) -> Result<GridIntensity> {
    match override_g_per_kwh {
        Some(v) => Ok(GridIntensity {
            region: region.to_string(),
            g_per_kwh: v,
            source: GridSource::Override,
        }),
        None => provider.intensity(region),
    }
}

/// Inferences served over the deployment schedule, rounded down.
pub fn lifetime_inferences(s: &DeploymentSchedule) -> u64 {
    (s.lifetime_years * 365.0 * s.active_hours_per_day * 3600.0 * s.inferences_per_second) as u64
}

/// Embodied kgCO2e for a die of `area_mm2` plus the platform's DRAM and
/// packaging.
pub fn embodied_carbon(area_mm2: f64, p: &Platform, f: &CarbonFactors) -> f64 {
    let area_cm2 = area_mm2 / 100.0;
    let die_g = area_cm2
        * (f.ci_fab_g_per_kwh * f.energy_per_area_kwh_per_cm2
            + f.gas_per_area_g_per_cm2
            + f.material_per_area_g_per_cm2)
        / f.yield_frac;
    let dram_gb = p.dram_bytes as f64 / (1u64 << 30) as f64;
    (die_g + dram_gb * f.dram_g_per_gb + f.packaging_g) / 1000.0
}

/// Operational kgCO2e: per-inference joules scaled over the lifetime
/// inference count and the operating grid.
pub fn operational_carbon(energy_per_inf_j: f64, s: &DeploymentSchedule, g: &GridIntensity) -> f64 {
    let kwh = energy_per_inf_j * lifetime_inferences(s) as f64 / 3.6e6;
    kwh * g.g_per_kwh / 1000.0
}

/// Embodied + operational breakdown for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarbonReport {
    pub embodied_kg: f64,
    pub operational_kg: f64,
    pub total_kg: f64,
    pub lifetime_inferences: u64,
}

impl CarbonReport {
    /// Fraction of the total that is operational (0 when the total is 0).
    pub fn operational_share(&self) -> f64 {
        if self.total_kg > 0.0 {
            self.operational_kg / self.total_kg
        } else {
            0.0
        }
    }
}

/// Compose embodied and operational carbon for a costed candidate.
pub fn total_carbon(
    perf: &PerfReport,
    p: &Platform,
    f: &CarbonFactors,
    s: &DeploymentSchedule,
    g: &GridIntensity,
) -> CarbonReport {
    let embodied_kg = embodied_carbon(perf.area_mm2, p, f);
    let operational_kg = operational_carbon(perf.energy_j, s, g);
    CarbonReport {
        embodied_kg,
        operational_kg,
        total_kg: embodied_kg + operational_kg,
        lifetime_inferences: lifetime_inferences(s),
    }
}
