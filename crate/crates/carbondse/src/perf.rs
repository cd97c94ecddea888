//! Analytical latency, energy, and area model for the accelerator template
//! executing an operator graph.
//!
//! GEMMs map output-stationary onto the `pe_x` x `pe_y` systolic arrays,
//! cores parallelize the tile grid, and every operator is bounded by the
//! slowest of compute and the three traffic levels (roofline). Operators
//! execute sequentially, a conservative edge-inference bound.

use serde::{Deserialize, Serialize};

use crate::archspace::{HardwareConfig, Platform};
use crate::error::{Error, Result};
use crate::workload::{Operator, OperatorGraph, VectorKind};

/// Cycles a vector lane spends per element, by operator flavor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CyclesPerElement {
    pub softmax: u64,
    pub layernorm: u64,
    pub gelu: u64,
    pub residual_add: u64,
}

impl Default for CyclesPerElement {
    fn default() -> Self {
        Self {
            softmax: 4,
            layernorm: 3,
            gelu: 2,
            residual_add: 1,
        }
    }
}

impl CyclesPerElement {
    pub fn for_kind(&self, kind: VectorKind) -> u64 {
        match kind {
            VectorKind::Softmax => self.softmax,
            VectorKind::Layernorm => self.layernorm,
            VectorKind::Gelu => self.gelu,
            VectorKind::ResidualAdd => self.residual_add,
        }
    }
}

/// Technology cost coefficients. These are representative planning values
/// for a 22nm-class 8-bit design, shipped in a versioned data file; tests
/// rely on orderings and monotonicity, never on absolute joules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostCoefficients {
    pub schema_version: u32,
    /// pJ per multiply-accumulate.
    pub e_mac_pj: f64,
    /// pJ per byte moved at each memory level.
    pub e_l2_pj_per_byte: f64,
    pub e_glb_pj_per_byte: f64,
    pub e_dram_pj_per_byte: f64,
    /// pJ per element-cycle in the vector unit.
    pub e_vec_pj_per_element: f64,
    /// mm2 per processing element / SRAM byte / vector lane, plus a fixed
    /// block for control, NoC, and PHY.
    pub a_pe_mm2: f64,
    pub a_sram_mm2_per_byte: f64,
    pub a_vec_mm2_per_lane: f64,
    pub a_fixed_mm2: f64,
    /// Static power density, mW per mm2.
    pub p_static_mw_per_mm2: f64,
    /// Off-chip bandwidth, bytes per cycle.
    pub dram_bw_bytes_per_cycle: u64,
    pub cycles_per_element: CyclesPerElement,
}

impl Default for CostCoefficients {
    fn default() -> Self {
        Self {
            schema_version: 1,
            e_mac_pj: 0.2,
            e_l2_pj_per_byte: 1.0,
            e_glb_pj_per_byte: 2.0,
            e_dram_pj_per_byte: 20.0,
            e_vec_pj_per_element: 0.2,
            a_pe_mm2: 5.0e-4,
            a_sram_mm2_per_byte: 1.5e-6,
            a_vec_mm2_per_lane: 2.0e-3,
            a_fixed_mm2: 2.0,
            p_static_mw_per_mm2: 20.0,
            dram_bw_bytes_per_cycle: 64,
            cycles_per_element: CyclesPerElement::default(),
        }
    }
}

impl CostCoefficients {
    /// Sanity-check orderings the energy model depends on.
    pub fn validate(&self) -> Result<()> {
        if !(self.e_dram_pj_per_byte > self.e_glb_pj_per_byte
            && self.e_glb_pj_per_byte > self.e_l2_pj_per_byte
            && self.e_l2_pj_per_byte > 0.0)
        {
            return Err(Error::Config(
                "energy per byte must order dram > glb > l2 > 0".into(),
            ));
        }
        if self.e_mac_pj <= 0.0 {
            return Err(Error::Config("e_mac must be positive".into()));
        }
        for (name, a) in [
            ("a_pe_mm2", self.a_pe_mm2),
            ("a_sram_mm2_per_byte", self.a_sram_mm2_per_byte),
            ("a_vec_mm2_per_lane", self.a_vec_mm2_per_lane),
            ("a_fixed_mm2", self.a_fixed_mm2),
        ] {
            if a < 0.0 {
                return Err(Error::Config(format!("{name} must be >= 0")));
            }
        }
        if self.dram_bw_bytes_per_cycle == 0 {
            return Err(Error::Config(
                "dram bandwidth must be >= 1 byte/cycle".into(),
            ));
        }
        Ok(())
    }
}

/// Which roofline term limits an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Compute,
    Glb,
    Dram,
    L2,
}

/// Cost of one operator entry (all `repeat` instances folded in).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpCost {
    pub name: String,
    pub cycles: u64,
    pub bound: BoundKind,
    pub dyn_energy_j: f64,
    pub macs: u64,
    pub dram_bytes: u64,
    pub glb_bytes: u64,
    pub l2_bytes: u64,
}

/// Whole-graph cost: sequential latency, dynamic plus static energy, die
/// area, and the per-operator breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfReport {
    pub latency_s: f64,
    pub energy_j: f64,
    pub dyn_energy_j: f64,
    pub area_mm2: f64,
    pub total_cycles: u64,
    pub total_macs: u64,
    /// Achieved MACs/cycle over peak MACs/cycle, in [0, 1].
    pub utilization: f64,
    pub op_costs: Vec<OpCost>,
}

const PJ_TO_J: f64 = 1e-12;

fn div_ceil(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Pick the binding term; ties resolve to the earliest in
/// compute > glb > dram > l2 order.
fn roofline(compute: u64, glb: u64, dram: u64, l2: u64) -> (u64, BoundKind) {
    let mut best = (compute, BoundKind::Compute);
    for (v, k) in [
        (glb, BoundKind::Glb),
        (dram, BoundKind::Dram),
        (l2, BoundKind::L2),
    ] {
        if v > best.0 {
            best = (v, k);
        }
    }
    best
}

/// Cost one GEMM on the tensor cores.
///
/// The output tile grid has `ceil(M/pe_x) * ceil(N/pe_y)` tiles split
/// round-robin across cores; each tile streams K and pays the systolic
/// fill/drain latency once. When a tile's working set
/// (`pe_x*K + K*pe_y + pe_x*pe_y` bytes at 8 bit) overflows the local
/// buffer, K is processed in the smallest chunk count that fits and each
/// extra chunk spills and reloads the `pe_x*pe_y` partials through the
/// local buffer, charged as L2 traffic.
#[allow(clippy::too_many_arguments)]
pub fn gemm_cost(
    name: &str,
    m: usize,
    k: usize,
    n: usize,
    repeat: usize,
    hw: &HardwareConfig,
    p: &Platform,
    c: &CostCoefficients,
) -> Result<OpCost> {
    debug_assert!(m >= 1 && k >= 1 && n >= 1 && repeat >= 1);
    let (m, k, n, repeat) = (m as u64, k as u64, n as u64, repeat as u64);
    let (pe_x, pe_y, tc) = (hw.pe_x as u64, hw.pe_y as u64, hw.tc as u64);

    let floor_bytes = pe_x + pe_y + pe_x * pe_y;
    if floor_bytes > hw.l2_bytes {
        return Err(Error::InfeasibleMapping {
            required: floor_bytes,
            available: hw.l2_bytes,
        });
    }
    let working_set = pe_x * k + k * pe_y + pe_x * pe_y;
    let chunks = div_ceil(working_set, hw.l2_bytes).max(1);

    let tiles_m = div_ceil(m, pe_x);
    let tiles_n = div_ceil(n, pe_y);
    let tiles = tiles_m * tiles_n;
    let per_tile_cycles = k + pe_x + pe_y - 2;
    let compute_cycles = div_ceil(tiles, tc) * per_tile_cycles * repeat;

    let dram_bytes = (m * k + k * n + m * n) * repeat;
    let glb_bytes = (m * k + k * n * tiles_m + m * n) * repeat;
    let spill_bytes = 2 * pe_x * pe_y * (chunks - 1) * tiles;
    let l2_bytes = (m * k * tiles_n + k * n * tiles_m + m * n + spill_bytes) * repeat;

    let (cycles, bound) = roofline(
        compute_cycles,
        div_ceil(glb_bytes, p.glb_bw),
        div_ceil(dram_bytes, c.dram_bw_bytes_per_cycle),
        div_ceil(l2_bytes, tc * hw.l2_bw),
    );

    let macs = m * k * n * repeat;
    let dyn_energy_j = (macs as f64 * c.e_mac_pj
        + dram_bytes as f64 * c.e_dram_pj_per_byte
        + glb_bytes as f64 * c.e_glb_pj_per_byte
        + l2_bytes as f64 * c.e_l2_pj_per_byte)
        * PJ_TO_J;

    Ok(OpCost {
        name: name.to_string(),
        cycles,
        bound,
        dyn_energy_j,
        macs,
        dram_bytes,
        glb_bytes,
        l2_bytes,
    })
}

/// Cost one element-wise operator on the vector units. Elements stream
/// through the global buffer (read + write) and all lanes across cores
/// work in parallel.
pub fn vector_cost(
    name: &str,
    kind: VectorKind,
    element_count: usize,
    repeat: usize,
    hw: &HardwareConfig,
    _p: &Platform,
    c: &CostCoefficients,
) -> OpCost {
    debug_assert!(element_count >= 1 && repeat >= 1);
    let (elems, repeat) = (element_count as u64, repeat as u64);
    let cpe = c.cycles_per_element.for_kind(kind);
    let lanes = hw.tc as u64 * hw.v_pe() as u64;
    let cycles = div_ceil(elems * cpe, lanes) * repeat;
    let glb_bytes = 2 * elems * repeat;
    let dyn_energy_j = ((elems * cpe * repeat) as f64 * c.e_vec_pj_per_element
        + glb_bytes as f64 * c.e_glb_pj_per_byte)
        * PJ_TO_J;
    OpCost {
        name: name.to_string(),
        cycles,
        bound: BoundKind::Compute,
        dyn_energy_j,
        macs: 0,
        dram_bytes: 0,
        glb_bytes,
        l2_bytes: 0,
    }
}

/// Die area of a hardware point under the given coefficients.
pub fn area(hw: &HardwareConfig, c: &CostCoefficients) -> f64 {
    hw.tc as f64
        * (hw.pe_x as f64 * hw.pe_y as f64 * c.a_pe_mm2
            + hw.l2_bytes as f64 * c.a_sram_mm2_per_byte
            + hw.v_pe() as f64 * c.a_vec_mm2_per_lane)
        + hw.glb_bytes as f64 * c.a_sram_mm2_per_byte
        + c.a_fixed_mm2
}

/// Total energy for a run: dynamic plus leakage over the latency window.
pub fn total_energy(
    dyn_energy_j: f64,
    area_mm2: f64,
    p_static_mw_per_mm2: f64,
    latency_s: f64,
) -> f64 {
    dyn_energy_j + p_static_mw_per_mm2 * 1e-3 * area_mm2 * latency_s
}

fn op_cost(
    op: &Operator,
    hw: &HardwareConfig,
    p: &Platform,
    c: &CostCoefficients,
) -> Result<OpCost> {
    match op {
        Operator::Gemm {
            name,
            m,
            k,
            n,
            repeat,
        } => gemm_cost(name, *m, *k, *n, *repeat, hw, p, c),
        Operator::Vector {
            name,
            vector_kind,
            element_count,
            repeat,
        } => Ok(vector_cost(
            name,
            *vector_kind,
            *element_count,
            *repeat,
            hw,
            p,
            c,
        )),
    }
}

/// Cost a whole graph under sequential execution. Propagates an
/// infeasible mapping on any operator.
pub fn graph_cost(
    g: &OperatorGraph,
    hw: &HardwareConfig,
    p: &Platform,
    c: &CostCoefficients,
) -> Result<PerfReport> {
    let op_costs = g
        .operators
        .iter()
        .map(|op| op_cost(op, hw, p, c))
        .collect::<Result<Vec<_>>>()?;
    let total_cycles: u64 = op_costs.iter().map(|o| o.cycles).sum();
    let total_macs: u64 = op_costs.iter().map(|o| o.macs).sum();
    let dyn_energy_j: f64 = op_costs.iter().map(|o| o.dyn_energy_j).sum();
    let latency_s = total_cycles as f64 / p.freq_hz;
    let area_mm2 = area(hw, c);
    let energy_j = total_energy(dyn_energy_j, area_mm2, c.p_static_mw_per_mm2, latency_s);
    let utilization = if total_cycles == 0 {
        0.0
    } else {
        (total_macs as f64 / total_cycles as f64) / hw.total_pes() as f64
    };
    Ok(PerfReport {
        latency_s,
        energy_j,
        dyn_energy_j,
        area_mm2,
        total_cycles,
        total_macs,
        utilization,
        op_costs,
    })
}

/// Per-operator cost table as CSV. Header:
/// `op,kind,m,k,n,repeat,cycles,bound,dyn_energy_pj,dram_bytes,glb_bytes,l2_bytes`.
pub fn op_cost_csv(g: &OperatorGraph, report: &PerfReport) -> String {
    let mut out = String::from(
        "op,kind,m,k,n,repeat,cycles,bound,dyn_energy_pj,dram_bytes,glb_bytes,l2_bytes\n",
    );
    for (op, cost) in g.operators.iter().zip(&report.op_costs) {
        let (kind, m, k, n) = match op {
            Operator::Gemm { m, k, n, .. } => ("gemm", *m, *k, *n),
            Operator::Vector { element_count, .. } => ("vector", *element_count, 0, 0),
        };
        let bound = match cost.bound {
            BoundKind::Compute => "compute",
            BoundKind::Glb => "glb",
            BoundKind::Dram => "dram",
            BoundKind::L2 => "l2",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            cost.name,
            kind,
            m,
            k,
            n,
            op.repeat(),
            cost.cycles,
            bound,
            cost.dyn_energy_j / PJ_TO_J,
            cost.dram_bytes,
            cost.glb_bytes,
            cost.l2_bytes,
        ));
    }
    out
}
