//! Ready-made model configs, spaces, and evaluation contexts: the
//! published dual-encoder bases, the hardware points quoted alongside
//! them, and the small deterministic "desk benchmark" the test suite and
//! examples run against.

use crate::archspace::{ArchSpace, HardwareConfig, Platform, KIB, MIB};
use crate::carbon::{CarbonFactors, DeploymentSchedule, GridProvider, StaticGridDataset};
use crate::optimize::{AccuracyProxy, EvalContext, JointSpace, ModeKind, ObjectiveMode};
use crate::perf::CostCoefficients;
use crate::proxy::SensitivityProfile;
use crate::workload::{
    build_prune_space, EmbeddingKind, EncoderConfig, ModelConfig, ModelFamily, NamedEncoder,
    PruneSteps,
};

/// Dual-encoder base with a 16-pixel patch vision tower: text
/// {12, 2048, 512, 8} at 77 tokens, vision {12, 3072, 768, 12} at 197
/// tokens.
pub fn clip_b16() -> ModelConfig {
    ModelConfig::new(
        ModelFamily::DualEncoder,
        vec![
            NamedEncoder {
                name: "text".into(),
                config: EncoderConfig {
                    num_layers: 12,
                    ffn_dim: 2048,
                    hidden_dim: 512,
                    num_heads: 8,
                    head_dim: 64,
                    seq_len: 77,
                    embedding: EmbeddingKind::Token { vocab_size: 49408 },
                },
            },
            NamedEncoder {
                name: "vision".into(),
                config: EncoderConfig {
                    num_layers: 12,
                    ffn_dim: 3072,
                    hidden_dim: 768,
                    num_heads: 12,
                    head_dim: 64,
                    seq_len: 197,
                    embedding: EmbeddingKind::Patch {
                        patch_size: 16,
                        channels: 3,
                    },
                },
            },
        ],
    )
    .expect("preset is well-formed")
}

/// Same towers with a 32-pixel patch: the vision sequence drops to 50.
pub fn clip_b32() -> ModelConfig {
    let mut cfg = clip_b16();
    cfg.encoders[1].config.seq_len = 50;
    cfg.encoders[1].config.embedding = EmbeddingKind::Patch {
        patch_size: 32,
        channels: 3,
    };
    cfg
}

/// The minimum-carbon hardware point quoted for the B/16 base:
/// one core of 256x8 PEs, 64 KB local / 2 MB global, 128 words/cycle.
pub fn table_min_carbon_hw() -> HardwareConfig {
    HardwareConfig {
        tc: 1,
        pe_x: 256,
        pe_y: 8,
        glb_bytes: 2 * MIB,
        l2_bytes: 64 * KIB,
        l2_bw: 128,
    }
}

/// Tiny dual-encoder base for the desk benchmark: 2 layers per tower.
pub fn desk_model() -> ModelConfig {
    ModelConfig::new(
        ModelFamily::DualEncoder,
        vec![
            NamedEncoder {
                name: "text".into(),
                config: EncoderConfig {
                    num_layers: 2,
                    ffn_dim: 64,
                    hidden_dim: 32,
                    num_heads: 2,
                    head_dim: 16,
                    seq_len: 16,
                    embedding: EmbeddingKind::Token { vocab_size: 256 },
                },
            },
            NamedEncoder {
                name: "vision".into(),
                config: EncoderConfig {
                    num_layers: 2,
                    ffn_dim: 64,
                    hidden_dim: 32,
                    num_heads: 2,
                    head_dim: 16,
                    seq_len: 17,
                    embedding: EmbeddingKind::Patch {
                        patch_size: 4,
                        channels: 3,
                    },
                },
            },
        ],
    )
    .expect("preset is well-formed")
}

/// The desk benchmark joint space: 64 model configs (8 per encoder) x
/// 64 hardware configs = 4096 candidates, all hardware valid under the
/// default 20 TOPS budget and every latency far under the 50 ms cap.
pub fn desk_space() -> JointSpace {
    let prune = build_prune_space(
        &desk_model(),
        PruneSteps {
            layers: 1,
            ffn: 32,
            hidden: 16,
            heads: 2,
        },
    )
    .expect("desk model prunes");
    let arch = ArchSpace {
        tc: vec![1, 2],
        pe_x: vec![8, 16],
        pe_y: vec![4, 8],
        glb_bytes: vec![MIB, 2 * MIB],
        l2_bytes: vec![64 * KIB, 128 * KIB],
        l2_bw: vec![16, 32],
        platform: Platform::default(),
    };
    JointSpace { prune, arch }
}

/// A 16-candidate slice of the desk benchmark for fast unit tests.
pub fn small_desk_space() -> JointSpace {
    let prune = build_prune_space(
        &desk_model(),
        PruneSteps {
            layers: 1,
            ffn: 64,
            hidden: 32,
            heads: 2,
        },
    )
    .expect("desk model prunes");
    let arch = ArchSpace {
        tc: vec![1],
        pe_x: vec![8, 16],
        pe_y: vec![4, 8],
        glb_bytes: vec![MIB],
        l2_bytes: vec![64 * KIB],
        l2_bw: vec![32],
        platform: Platform::default(),
    };
    JointSpace { prune, arch }
}

/// Default evaluation context: shipped coefficients and factors, the
/// default 3-year/6-hour/1-Hz schedule, California operation, and the
/// analytic dual-encoder proxy.
pub fn desk_context(kind: ModeKind) -> EvalContext {
    EvalContext {
        platform: Platform::default(),
        coeffs: CostCoefficients::default(),
        factors: CarbonFactors::default(),
        schedule: DeploymentSchedule::default(),
        grid: StaticGridDataset::bundled()
            .intensity("CA-US")
            .expect("bundled region"),
        proxy: AccuracyProxy::Analytic {
            profile: SensitivityProfile::default_dual(),
        },
        mode: ObjectiveMode::new(kind),
    }
}
