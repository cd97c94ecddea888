//! Hardware configuration types, the tunable design space, and platform
//! constraint checks (peak-TOPS budget).

use serde::{Deserialize, Serialize};

pub const KIB: u64 = 1024;
pub const MIB: u64 = 1024 * 1024;

/// One point of the accelerator template: `tc` tensor cores, each a
/// `pe_x` x `pe_y` systolic array with a private local buffer, sharing a
/// global buffer. The vector unit width always equals `pe_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HardwareConfig {
    pub tc: usize,
    pub pe_x: usize,
    pub pe_y: usize,
    pub glb_bytes: u64,
    pub l2_bytes: u64,
    pub l2_bw: u64,
}

impl HardwareConfig {
    /// Vector unit width, by construction equal to the PE array X dim.
    pub fn v_pe(&self) -> usize {
        self.pe_x
    }

    /// Total processing elements across cores.
    pub fn total_pes(&self) -> u64 {
        self.tc as u64 * self.pe_x as u64 * self.pe_y as u64
    }

    /// Compact identifier: tc/pe_x/pe_y/glb/l2/l2_bw.
    pub fn fingerprint(&self) -> String {
        format!(
            "hw:{}/{}/{}/{}/{}/{}",
            self.tc, self.pe_x, self.pe_y, self.glb_bytes, self.l2_bytes, self.l2_bw
        )
    }
}

/// Fixed platform parameters shared by every candidate, plus the
/// peak-compute budget the search must respect. Fields omitted in a
/// config file keep their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Platform {
    /// Global buffer bandwidth, words/cycle (one byte per word at 8 bit).
    pub glb_bw: u64,
    pub dram_bytes: u64,
    pub tech_nm: u32,
    pub bitwidth: u32,
    pub tops_budget: f64,
    pub freq_hz: f64,
    /// Validation bounds for the local buffer; the published table and the
    /// searched configurations disagree, so the range stays configurable.
    pub l2_min_bytes: u64,
    pub l2_max_bytes: u64,
}

impl Default for Platform {
    fn default() -> Self {
        Self {
            glb_bw: 256,
            dram_bytes: 1 << 30,
            tech_nm: 22,
            bitwidth: 8,
            tops_budget: 20.0,
            freq_hz: 500.0e6,
            l2_min_bytes: 64 * KIB,
            l2_max_bytes: 4 * MIB,
        }
    }
}

impl Platform {
    pub fn with_tops(self, tops_budget: f64) -> Self {
        Self {
            tops_budget,
            ..self
        }
    }
}

/// Peak 8-bit tera-operations per second: 2 ops per MAC times total PEs
/// times clock frequency.
pub fn peak_tops(hw: &HardwareConfig, p: &Platform) -> f64 {
    hw.total_pes() as f64 * 2.0 * p.freq_hz / 1e12
}

/// A range-or-budget violation found by [`validate_hw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HwViolation {
    pub field: String,
    pub value: f64,
    pub bound: String,
}

fn pow2_in_range(v: u64, lo: u64, hi: u64) -> bool {
    v.is_power_of_two() && (lo..=hi).contains(&v)
}

/// Check a hardware point against the template ranges and the TOPS budget.
/// Returns the violating fields; empty means ok.
pub fn validate_hw(hw: &HardwareConfig, p: &Platform) -> Vec<HwViolation> {
    let mut v = Vec::new();
    let mut range = |field: &str, value: u64, lo: u64, hi: u64| {
        if !pow2_in_range(value, lo, hi) {
            v.push(HwViolation {
                field: field.to_string(),
                value: value as f64,
                bound: format!("power of two in [{lo}, {hi}]"),
            });
        }
    };
    range("tc", hw.tc as u64, 1, 4);
    range("pe_x", hw.pe_x as u64, 1, 256);
    range("pe_y", hw.pe_y as u64, 1, 256);
    range("glb_bytes", hw.glb_bytes, MIB, 8 * MIB);
    range("l2_bytes", hw.l2_bytes, p.l2_min_bytes, p.l2_max_bytes);
    range("l2_bw", hw.l2_bw, 1, 256);
    let tops = peak_tops(hw, p);
    if tops > p.tops_budget {
        v.push(HwViolation {
            field: "peak_tops".into(),
            value: tops,
            bound: format!("<= {} TOPS", p.tops_budget),
        });
    }
    v
}

/// Candidate value lists per tunable, with the attached platform. The
/// joint cartesian size is the product of the list lengths; enumeration
/// yields only the members that pass [`validate_hw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchSpace {
    pub tc: Vec<usize>,
    pub pe_x: Vec<usize>,
    pub pe_y: Vec<usize>,
    pub glb_bytes: Vec<u64>,
    pub l2_bytes: Vec<u64>,
    pub l2_bw: Vec<u64>,
    pub platform: Platform,
}

impl ArchSpace {
    /// The full published template under a given budget: local buffer list
    /// follows the searched configurations (64 KB - 1 MB) rather than the
    /// wider table range; both are representable.
    pub fn full_template(platform: Platform) -> Self {
        let pow2 = |lo: u32, hi: u32| (lo..=hi).map(|e| 1usize << e).collect::<Vec<_>>();
        Self {
            tc: vec![1, 2, 4],
            pe_x: pow2(0, 8),
            pe_y: pow2(0, 8),
            glb_bytes: (0..=3).map(|e| MIB << e).collect(),
            l2_bytes: (0..=4).map(|e| (64 * KIB) << e).collect(),
            l2_bw: (0..=8).map(|e| 1u64 << e).collect(),
            platform,
        }
    }

    /// Cartesian size before the validity filter.
    pub fn cartesian_size(&self) -> u128 {
        [
            self.tc.len(),
            self.pe_x.len(),
            self.pe_y.len(),
            self.glb_bytes.len(),
            self.l2_bytes.len(),
            self.l2_bw.len(),
        ]
        .iter()
        .map(|&n| n as u128)
        .product()
    }

    /// The member at a cartesian index tuple, unvalidated.
    pub fn member(&self, idx: &[usize; 6]) -> HardwareConfig {
        HardwareConfig {
            tc: self.tc[idx[0]],
            pe_x: self.pe_x[idx[1]],
            pe_y: self.pe_y[idx[2]],
            glb_bytes: self.glb_bytes[idx[3]],
            l2_bytes: self.l2_bytes[idx[4]],
            l2_bw: self.l2_bw[idx[5]],
        }
    }

    /// Exactly the valid cartesian members, in deterministic lexicographic
    /// order over the field lists (tc slowest, l2_bw fastest).
    pub fn enumerate(&self) -> Vec<HardwareConfig> {
        let mut out = Vec::new();
        for &tc in &self.tc {
            for &pe_x in &self.pe_x {
                for &pe_y in &self.pe_y {
                    for &glb_bytes in &self.glb_bytes {
                        for &l2_bytes in &self.l2_bytes {
                            for &l2_bw in &self.l2_bw {
                                let hw = HardwareConfig {
                                    tc,
                                    pe_x,
                                    pe_y,
                                    glb_bytes,
                                    l2_bytes,
                                    l2_bw,
                                };
                                if validate_hw(&hw, &self.platform).is_empty() {
                                    out.push(hw);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
