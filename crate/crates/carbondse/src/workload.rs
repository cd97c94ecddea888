//! Model configurations, the legal pruning space, and lowering to an
//! operator graph with concrete GEMM and vector shapes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an encoder turns raw input into tokens; only contributes parameters,
/// never operators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingKind {
    /// Token lookup table of `vocab_size` rows.
    Token { vocab_size: usize },
    /// Linear patch projection from `patch_size` x `patch_size` x `channels`
    /// pixels, plus a class token.
    Patch { patch_size: usize, channels: usize },
}

/// One Transformer encoder stack.
///
/// `head_dim` is frozen at the base model's `hidden_dim / num_heads`, so
/// pruning heads shrinks the attention inner width (`num_heads * head_dim`)
/// independently of `hidden_dim`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub num_layers: usize,
    pub ffn_dim: usize,
    pub hidden_dim: usize,
    pub num_heads: usize,
    pub head_dim: usize,
    pub seq_len: usize,
    pub embedding: EmbeddingKind,
}

impl EncoderConfig {
    /// Attention inner width; need not equal `hidden_dim` after pruning.
    pub fn attn_width(&self) -> usize {
        self.num_heads * self.head_dim
    }

    fn check(&self, name: &str) -> Result<()> {
        for (field, v) in [
            ("num_layers", self.num_layers),
            ("ffn_dim", self.ffn_dim),
            ("hidden_dim", self.hidden_dim),
            ("num_heads", self.num_heads),
            ("head_dim", self.head_dim),
            ("seq_len", self.seq_len),
        ] {
            if v == 0 {
                return Err(Error::Config(format!(
                    "encoder '{name}': {field} must be >= 1"
                )));
            }
        }
        Ok(())
    }
}

/// Model family tag; all families lower with the same per-layer recipe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    EncoderOnly,
    DecoderOnly,
    DualEncoder,
}

/// A named encoder inside a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedEncoder {
    pub name: String,
    pub config: EncoderConfig,
}

/// A full model: one or two named encoders plus a reference to the
/// unpruned base it was derived from (`None` when this *is* the base).
///
/// Dual-encoder models carry independent encoder configs; each encoder is
/// pruned on its own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: ModelFamily,
    pub encoders: Vec<NamedEncoder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<ModelConfig>>,
}

impl ModelConfig {
    pub fn new(family: ModelFamily, encoders: Vec<NamedEncoder>) -> Result<Self> {
        if encoders.is_empty() || encoders.len() > 2 {
            return Err(Error::Config("a model carries one or two encoders".into()));
        }
        if family == ModelFamily::DualEncoder && encoders.len() != 2 {
            return Err(Error::Config(
                "dual-encoder models need exactly two encoders".into(),
            ));
        }
        for e in &encoders {
            e.config.check(&e.name)?;
        }
        Ok(Self {
            family,
            encoders,
            base: None,
        })
    }

    /// The unpruned config this model was derived from (itself for a base).
    pub fn base(&self) -> &ModelConfig {
        self.base.as_deref().unwrap_or(self)
    }

    pub fn encoder(&self, name: &str) -> Option<&EncoderConfig> {
        self.encoders
            .iter()
            .find(|e| e.name == name)
            .map(|e| &e.config)
    }

    /// Derive a pruned variant of a base model. Dimensions are given per
    /// encoder, in encoder order, as (layers, ffn, hidden, heads); head_dim
    /// and seq_len are inherited from the base.
    pub fn pruned(&self, dims: &[PrunedDims]) -> Result<ModelConfig> {
        if dims.len() != self.encoders.len() {
            return Err(Error::Config(format!(
                "expected dims for {} encoders, got {}",
                self.encoders.len(),
                dims.len()
            )));
        }
        let base = self.base().clone();
        let encoders = base
            .encoders
            .iter()
            .zip(dims)
            .map(|(e, d)| NamedEncoder {
                name: e.name.clone(),
                config: EncoderConfig {
                    num_layers: d.num_layers,
                    ffn_dim: d.ffn_dim,
                    hidden_dim: d.hidden_dim,
                    num_heads: d.num_heads,
                    head_dim: e.config.head_dim,
                    seq_len: e.config.seq_len,
                    embedding: e.config.embedding.clone(),
                },
            })
            .collect::<Vec<_>>();
        for e in &encoders {
            e.config.check(&e.name)?;
        }
        Ok(ModelConfig {
            family: base.family,
            encoders,
            base: Some(Box::new(base)),
        })
    }

    /// Compact identifier: per-encoder layers/ffn/hidden/heads.
    pub fn fingerprint(&self) -> String {
        self.encoders
            .iter()
            .map(|e| {
                format!(
                    "{}:{}/{}/{}/{}",
                    e.name,
                    e.config.num_layers,
                    e.config.ffn_dim,
                    e.config.hidden_dim,
                    e.config.num_heads
                )
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Width of the shared embedding space both encoders project into:
    /// the *base* hidden width of the first text-like encoder (falls back
    /// to the first encoder).
    pub fn shared_embed_dim(&self) -> usize {
        let base = self.base();
        base.encoders
            .iter()
            .find(|e| e.name == "text")
            .or_else(|| base.encoders.first())
            .map(|e| e.config.hidden_dim)
            .unwrap_or(0)
    }
}

/// The four prunable dimensions of one encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedDims {
    pub num_layers: usize,
    pub ffn_dim: usize,
    pub hidden_dim: usize,
    pub num_heads: usize,
}

/// Per-dimension prune step sizes, shared by all encoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneSteps {
    pub layers: usize,
    pub ffn: usize,
    pub hidden: usize,
    pub heads: usize,
}

impl Default for PruneSteps {
    fn default() -> Self {
        Self {
            layers: 1,
            ffn: 128,
            hidden: 32,
            heads: 1,
        }
    }
}

/// Candidate values for the four prunable dimensions of one encoder,
/// sorted ascending, no duplicates. Every value `c` satisfies
/// `ceil(base/2) <= c <= base` with `base - c` divisible by the step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderPruneAxes {
    pub name: String,
    pub layers: Vec<usize>,
    pub ffn: Vec<usize>,
    pub hidden: Vec<usize>,
    pub heads: Vec<usize>,
}

impl EncoderPruneAxes {
    /// Number of distinct configurations for this encoder.
    pub fn size(&self) -> u128 {
        self.layers.len() as u128
            * self.ffn.len() as u128
            * self.hidden.len() as u128
            * self.heads.len() as u128
    }
}

/// The legal model search space derived from a base config: candidate
/// value lists per dimension per encoder, plus the step sizes used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneSpace {
    pub base: ModelConfig,
    pub steps: PruneSteps,
    pub axes: Vec<EncoderPruneAxes>,
}

/// One dimension of one encoder that fails prune-space membership.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimViolation {
    pub encoder: String,
    pub dimension: String,
    pub value: usize,
}

fn prune_axis(base: usize, step: usize, dimension: &str) -> Result<Vec<usize>> {
    if step == 0 {
        return Err(Error::ZeroPruneStep {
            dimension: dimension.to_string(),
        });
    }
    let floor = base.div_ceil(2);
    let mut values: Vec<usize> = (0..)
        .map(|k| base.checked_sub(k * step))
        .take_while(|v| matches!(v, Some(v) if *v >= floor))
        .flatten()
        .collect();
    values.reverse();
    Ok(values)
}

/// Build the legal prune space for a base model.
///
/// A step larger than half the base range leaves only the base value in
/// that axis; that is legal, not an error.
pub fn build_prune_space(base: &ModelConfig, steps: PruneSteps) -> Result<PruneSpace> {
    if base.base.is_some() {
        return Err(Error::Config(
            "prune spaces are built from an unpruned base model".into(),
        ));
    }
    for e in &base.encoders {
        for (dim, v) in [
            ("num_layers", e.config.num_layers),
            ("ffn_dim", e.config.ffn_dim),
            ("hidden_dim", e.config.hidden_dim),
            ("num_heads", e.config.num_heads),
        ] {
            if v < 2 {
                return Err(Error::Config(format!(
                    "encoder '{}': base {dim} must be >= 2 to prune",
                    e.name
                )));
            }
        }
    }
    let axes = base
        .encoders
        .iter()
        .map(|e| {
            Ok(EncoderPruneAxes {
                name: e.name.clone(),
                layers: prune_axis(e.config.num_layers, steps.layers, "layers")?,
                ffn: prune_axis(e.config.ffn_dim, steps.ffn, "ffn")?,
                hidden: prune_axis(e.config.hidden_dim, steps.hidden, "hidden")?,
                heads: prune_axis(e.config.num_heads, steps.heads, "heads")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PruneSpace {
        base: base.clone(),
        steps,
        axes,
    })
}

impl PruneSpace {
    /// Total number of model configurations in the space.
    pub fn size(&self) -> u128 {
        self.axes.iter().map(|a| a.size()).product()
    }

    /// Materialize one member from per-encoder dimension choices.
    pub fn member(&self, dims: &[PrunedDims]) -> Result<ModelConfig> {
        let cfg = self.base.pruned(dims)?;
        let violations = validate_model_config(&cfg, self);
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(format!(
                "dims outside the prune space: {violations:?}"
            )))
        }
    }

    /// Every member, lexicographic over the axis lists (first encoder's
    /// layers vary slowest).
    pub fn enumerate(&self) -> Vec<ModelConfig> {
        let mut out = Vec::new();
        let mut dims = vec![
            PrunedDims {
                num_layers: 0,
                ffn_dim: 0,
                hidden_dim: 0,
                num_heads: 0
            };
            self.axes.len()
        ];
        self.enumerate_rec(0, &mut dims, &mut out);
        out
    }

    fn enumerate_rec(&self, enc: usize, dims: &mut Vec<PrunedDims>, out: &mut Vec<ModelConfig>) {
        if enc == self.axes.len() {
            out.push(
                self.base
                    .pruned(dims)
                    .expect("enumerated dims are in-space"),
            );
            return;
        }
        let axes = &self.axes[enc];
        for &l in &axes.layers {
            for &f in &axes.ffn {
                for &h in &axes.hidden {
                    for &n in &axes.heads {
                        dims[enc] = PrunedDims {
                            num_layers: l,
                            ffn_dim: f,
                            hidden_dim: h,
                            num_heads: n,
                        };
                        self.enumerate_rec(enc + 1, dims, out);
                    }
                }
            }
        }
    }
}

/// Check that every dimension of every encoder is a member of its
/// candidate list. Returns the violating (encoder, dimension, value)
/// triples; empty means ok.
pub fn validate_model_config(cfg: &ModelConfig, space: &PruneSpace) -> Vec<DimViolation> {
    let mut violations = Vec::new();
    for e in &cfg.encoders {
        let Some(axes) = space.axes.iter().find(|a| a.name == e.name) else {
            violations.push(DimViolation {
                encoder: e.name.clone(),
                dimension: "encoder".into(),
                value: 0,
            });
            continue;
        };
        for (dim, value, list) in [
            ("num_layers", e.config.num_layers, &axes.layers),
            ("ffn_dim", e.config.ffn_dim, &axes.ffn),
            ("hidden_dim", e.config.hidden_dim, &axes.hidden),
            ("num_heads", e.config.num_heads, &axes.heads),
        ] {
            if !list.contains(&value) {
                violations.push(DimViolation {
                    encoder: e.name.clone(),
                    dimension: dim.into(),
                    value,
                });
            }
        }
    }
    violations
}

/// Element-wise operator flavors, costed per element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorKind {
    Softmax,
    Layernorm,
    Gelu,
    ResidualAdd,
}

/// One operator of the lowered graph. `repeat` folds identical instances
/// (per layer, per head) into a single entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    Gemm {
        name: String,
        m: usize,
        k: usize,
        n: usize,
        repeat: usize,
    },
    Vector {
        name: String,
        vector_kind: VectorKind,
        element_count: usize,
        repeat: usize,
    },
}

impl Operator {
    pub fn name(&self) -> &str {
        match self {
            Operator::Gemm { name, .. } | Operator::Vector { name, .. } => name,
        }
    }

    pub fn repeat(&self) -> usize {
        match self {
            Operator::Gemm { repeat, .. } | Operator::Vector { repeat, .. } => *repeat,
        }
    }

    /// Multiply-accumulates contributed by this operator (zero for vector ops).
    pub fn macs(&self) -> u64 {
        match self {
            Operator::Gemm {
                m, k, n, repeat, ..
            } => *m as u64 * *k as u64 * *n as u64 * *repeat as u64,
            Operator::Vector { .. } => 0,
        }
    }
}

/// The lowered workload: ordered operators with totals used by the cost
/// model and by accounting cross-checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorGraph {
    pub operators: Vec<Operator>,
    pub total_macs: u64,
    pub total_params: u64,
    pub batch_size: usize,
}

impl OperatorGraph {
    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

fn lower_encoder(name: &str, e: &EncoderConfig, batch: usize, ops: &mut Vec<Operator>) {
    let seq = e.seq_len * batch;
    let layers = e.num_layers;
    let inner = e.attn_width();
    let gemm = |op: &str, m: usize, k: usize, n: usize, repeat: usize| Operator::Gemm {
        name: format!("{name}.{op}"),
        m,
        k,
        n,
        repeat,
    };
    let vector = |op: &str, kind: VectorKind, elems: usize, repeat: usize| Operator::Vector {
        name: format!("{name}.{op}"),
        vector_kind: kind,
        element_count: elems,
        repeat,
    };
    ops.push(gemm("qkv_proj", seq, e.hidden_dim, 3 * inner, layers));
    ops.push(gemm(
        "attn_scores",
        seq,
        e.head_dim,
        seq,
        e.num_heads * layers,
    ));
    ops.push(vector(
        "softmax",
        VectorKind::Softmax,
        e.num_heads * seq * seq,
        layers,
    ));
    ops.push(gemm(
        "attn_context",
        seq,
        seq,
        e.head_dim,
        e.num_heads * layers,
    ));
    ops.push(gemm("out_proj", seq, inner, e.hidden_dim, layers));
    ops.push(vector(
        "ln_attn",
        VectorKind::Layernorm,
        seq * e.hidden_dim,
        layers,
    ));
    ops.push(vector(
        "residual_attn",
        VectorKind::ResidualAdd,
        seq * e.hidden_dim,
        layers,
    ));
    ops.push(gemm("ffn_up", seq, e.hidden_dim, e.ffn_dim, layers));
    ops.push(vector("gelu", VectorKind::Gelu, seq * e.ffn_dim, layers));
    ops.push(gemm("ffn_down", seq, e.ffn_dim, e.hidden_dim, layers));
    ops.push(vector(
        "ln_ffn",
        VectorKind::Layernorm,
        seq * e.hidden_dim,
        layers,
    ));
    ops.push(vector(
        "residual_ffn",
        VectorKind::ResidualAdd,
        seq * e.hidden_dim,
        layers,
    ));
}

/// Lower a model to its operator graph at batch size 1.
pub fn lower_to_graph(cfg: &ModelConfig) -> OperatorGraph {
    lower_to_graph_batched(cfg, 1)
}

/// Lower a model to its operator graph. Lowering is a pure function:
/// identical configs produce identical graphs.
pub fn lower_to_graph_batched(cfg: &ModelConfig, batch_size: usize) -> OperatorGraph {
    let mut ops = Vec::new();
    for e in &cfg.encoders {
        lower_encoder(&e.name, &e.config, batch_size, &mut ops);
    }
    if cfg.family == ModelFamily::DualEncoder {
        // Pooled-token projection of each encoder into the shared space.
        let embed = cfg.shared_embed_dim();
        for e in &cfg.encoders {
            ops.push(Operator::Gemm {
                name: format!("{}.embed_proj", e.name),
                m: batch_size,
                k: e.config.hidden_dim,
                n: embed,
                repeat: 1,
            });
        }
    }
    let total_macs = ops.iter().map(Operator::macs).sum();
    OperatorGraph {
        operators: ops,
        total_macs,
        total_params: param_count(cfg),
        batch_size,
    }
}

fn encoder_params(e: &EncoderConfig, shared_embed: Option<usize>) -> u64 {
    let h = e.hidden_dim as u64;
    let inner = e.attn_width() as u64;
    let ffn = e.ffn_dim as u64;
    // Projection and FFN weights carry biases; a layernorm is scale + shift.
    let per_layer = h * 3 * inner + 3 * inner    // qkv
        + inner * h + h                          // output projection
        + h * ffn + ffn                          // ffn up
        + ffn * h + h                            // ffn down
        + 2 * 2 * h; // two layernorms
    let embedding = match e.embedding {
        EmbeddingKind::Token { vocab_size } => vocab_size as u64 * h,
        EmbeddingKind::Patch {
            patch_size,
            channels,
        } => {
            (patch_size * patch_size * channels) as u64 * h + h // patch kernel + class token
        }
    };
    let positional = e.seq_len as u64 * h;
    let final_norms = 2 * 2 * h; // pre/post (or final) norm pair
    let projection = shared_embed.map(|d| h * d as u64).unwrap_or(0);
    e.num_layers as u64 * per_layer + embedding + positional + final_norms + projection
}

/// Deterministic parameter count: per-layer projection and FFN weights,
/// layernorm params, token/patch embedding tables, and (for dual encoders)
/// the shared-space projections.
pub fn param_count(cfg: &ModelConfig) -> u64 {
    let shared = (cfg.family == ModelFamily::DualEncoder).then(|| cfg.shared_embed_dim());
    cfg.encoders
        .iter()
        .map(|e| encoder_params(&e.config, shared))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn prune_axis_hidden_768_step_96() {
        let space = prune_axis(768, 96, "hidden").unwrap();
        assert_eq!(space, vec![384, 480, 576, 672, 768]);
    }

    #[test]
    fn prune_axis_step_exceeds_half_range_keeps_base_only() {
        let space = prune_axis(12, 12, "heads").unwrap();
        assert_eq!(space, vec![12]);
    }

    #[test]
    fn prune_axis_layers_12_step_1() {
        let space = prune_axis(12, 1, "layers").unwrap();
        assert_eq!(space, vec![6, 7, 8, 9, 10, 11, 12]);
    }

    #[test]
    fn prune_axis_odd_base_floor_is_ceil_half() {
        assert_eq!(prune_axis(3, 1, "layers").unwrap(), vec![2, 3]);
    }

    #[test]
    fn zero_step_is_an_error() {
        let base = presets::clip_b16();
        let err = build_prune_space(
            &base,
            PruneSteps {
                layers: 0,
                ffn: 128,
                hidden: 32,
                heads: 1,
            },
        );
        assert!(matches!(err, Err(Error::ZeroPruneStep { .. })));
    }

    #[test]
    fn base_always_member_of_its_own_space() {
        let base = presets::clip_b16();
        let space = build_prune_space(&base, PruneSteps::default()).unwrap();
        assert!(validate_model_config(&base, &space).is_empty());
        // Table row for the base text encoder: {12, 2048, 512, 8}.
        let text = base.encoder("text").unwrap();
        assert_eq!(
            (
                text.num_layers,
                text.ffn_dim,
                text.hidden_dim,
                text.num_heads
            ),
            (12, 2048, 512, 8)
        );
    }

    #[test]
    fn below_floor_and_off_grid_dimensions_are_violations() {
        let base = presets::clip_b16();
        let space = build_prune_space(
            &base,
            PruneSteps {
                layers: 1,
                ffn: 128,
                hidden: 96,
                heads: 1,
            },
        )
        .unwrap();
        // Vision hidden 100 is below ceil(768/2).
        let mut cfg = base.clone();
        cfg.encoders[1].config.hidden_dim = 100;
        let violations = validate_model_config(&cfg, &space);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].dimension, "hidden_dim");
        assert_eq!(violations[0].value, 100);
        // Vision hidden 500 is above the floor but off the 96-grid.
        cfg.encoders[1].config.hidden_dim = 500;
        let violations = validate_model_config(&cfg, &space);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].value, 500);
    }

    #[test]
    fn lowering_one_tiny_layer_by_hand() {
        // 1 layer, seq 4, hidden 8, ffn 16, heads 2, head_dim 4.
        let enc = EncoderConfig {
            num_layers: 1,
            ffn_dim: 16,
            hidden_dim: 8,
            num_heads: 2,
            head_dim: 4,
            seq_len: 4,
            embedding: EmbeddingKind::Token { vocab_size: 10 },
        };
        let cfg = ModelConfig::new(
            ModelFamily::EncoderOnly,
            vec![NamedEncoder {
                name: "text".into(),
                config: enc,
            }],
        )
        .unwrap();
        let graph = lower_to_graph(&cfg);
        let qkv = graph
            .operators
            .iter()
            .find(|o| o.name() == "text.qkv_proj")
            .unwrap();
        assert_eq!(
            qkv,
            &Operator::Gemm {
                name: "text.qkv_proj".into(),
                m: 4,
                k: 8,
                n: 24,
                repeat: 1
            }
        );
        let up = graph
            .operators
            .iter()
            .find(|o| o.name() == "text.ffn_up")
            .unwrap();
        assert_eq!(
            up,
            &Operator::Gemm {
                name: "text.ffn_up".into(),
                m: 4,
                k: 8,
                n: 16,
                repeat: 1
            }
        );
        let scores = graph
            .operators
            .iter()
            .find(|o| o.name() == "text.attn_scores")
            .unwrap();
        assert_eq!(
            scores,
            &Operator::Gemm {
                name: "text.attn_scores".into(),
                m: 4,
                k: 4,
                n: 4,
                repeat: 2
            }
        );
        let softmax = graph
            .operators
            .iter()
            .find(|o| o.name() == "text.softmax")
            .unwrap();
        assert_eq!(
            softmax,
            &Operator::Vector {
                name: "text.softmax".into(),
                vector_kind: VectorKind::Softmax,
                element_count: 2 * 4 * 4,
                repeat: 1
            }
        );
    }

    #[test]
    fn clip_b16_param_count_near_149m() {
        let params = param_count(&presets::clip_b16()) as f64;
        let reported = 149.0e6;
        assert!(
            (params - reported).abs() / reported < 0.03,
            "expected ~149M params, got {params}"
        );
    }

    #[test]
    fn compact_dual_encoder_param_count_near_83m() {
        // Published 83M variant: text {6, 2048, 512, 8}, vision
        // {12, 2048, 512, 8}.
        let cfg = presets::clip_b16()
            .pruned(&[
                PrunedDims {
                    num_layers: 6,
                    ffn_dim: 2048,
                    hidden_dim: 512,
                    num_heads: 8,
                },
                PrunedDims {
                    num_layers: 12,
                    ffn_dim: 2048,
                    hidden_dim: 512,
                    num_heads: 8,
                },
            ])
            .unwrap();
        let params = param_count(&cfg) as f64;
        assert!((params - 83.0e6).abs() / 83.0e6 < 0.03, "got {params}");
    }

    #[test]
    fn decoder_only_family_lowers_with_the_same_layer_recipe() {
        let enc = EncoderConfig {
            num_layers: 2,
            ffn_dim: 64,
            hidden_dim: 32,
            num_heads: 4,
            head_dim: 8,
            seq_len: 24,
            embedding: EmbeddingKind::Token { vocab_size: 512 },
        };
        let decoder = ModelConfig::new(
            ModelFamily::DecoderOnly,
            vec![NamedEncoder {
                name: "decoder".into(),
                config: enc.clone(),
            }],
        )
        .unwrap();
        let encoder = ModelConfig::new(
            ModelFamily::EncoderOnly,
            vec![NamedEncoder {
                name: "decoder".into(),
                config: enc,
            }],
        )
        .unwrap();
        let dg = lower_to_graph(&decoder);
        let eg = lower_to_graph(&encoder);
        assert_eq!(dg.operators, eg.operators);
        // Single-encoder families have no shared-space projection.
        assert!(!dg
            .operators
            .iter()
            .any(|o| o.name().ends_with("embed_proj")));
    }

    #[test]
    fn pruned_dual_encoder_param_count_matches_hand_expansion() {
        // Dims of a published compact dual encoder: text {3,1024,256,4},
        // vision {10,1024,256,4}. The expected value below is the closed-form
        // expansion of the same accounting that reproduces the 149M base.
        let base = presets::clip_b16();
        let cfg = base
            .pruned(&[
                PrunedDims {
                    num_layers: 3,
                    ffn_dim: 1024,
                    hidden_dim: 256,
                    num_heads: 4,
                },
                PrunedDims {
                    num_layers: 10,
                    ffn_dim: 1024,
                    hidden_dim: 256,
                    num_heads: 4,
                },
            ])
            .unwrap();
        // text: 3*(256*768+768 + 256*256+256 + 256*1024+1024 + 1024*256+256 + 4*256)
        //       + 49408*256 + 77*256 + 4*256 + 256*512
        // vision: 10 layers of the same stack + 16*16*3*256 + 256 + 197*256 + 4*256 + 256*512
        let text_layer =
            256u64 * 768 + 768 + 256 * 256 + 256 + 256 * 1024 + 1024 + 1024 * 256 + 256 + 4 * 256;
        let text = 3 * text_layer + 49408 * 256 + 77 * 256 + 4 * 256 + 256 * 512;
        let vision = 10 * text_layer + 16 * 16 * 3 * 256 + 256 + 197 * 256 + 4 * 256 + 256 * 512;
        assert_eq!(param_count(&cfg), text + vision);
    }

    #[test]
    fn zero_layer_encoder_counts_embedding_tables_only() {
        // Degenerate stack: only the token table, positional table, and
        // final norms remain.
        let zero = EncoderConfig {
            num_layers: 0,
            ffn_dim: 16,
            hidden_dim: 8,
            num_heads: 2,
            head_dim: 4,
            seq_len: 4,
            embedding: EmbeddingKind::Token { vocab_size: 100 },
        };
        assert_eq!(
            encoder_params(&zero, None),
            (100 * 8 + 4 * 8 + 4 * 8) as u64
        );
    }

    #[test]
    fn doubling_layers_doubles_layer_local_repeats_and_macs() {
        let base = presets::clip_b16();
        let g1 = lower_to_graph(&base);
        let mut doubled = base.clone();
        doubled.encoders[0].config.num_layers *= 2;
        doubled.encoders[1].config.num_layers *= 2;
        let g2 = lower_to_graph(&doubled);
        for (a, b) in g1.operators.iter().zip(&g2.operators) {
            if a.name().ends_with("embed_proj") {
                assert_eq!(a.repeat(), b.repeat());
            } else {
                assert_eq!(2 * a.repeat(), b.repeat(), "{}", a.name());
                assert_eq!(2 * a.macs(), b.macs(), "{}", a.name());
            }
        }
    }

    #[test]
    fn graph_macs_match_brute_force_per_layer_expansion() {
        let base = presets::clip_b16();
        let graph = lower_to_graph(&base);
        let mut expect = 0u64;
        for e in &base.encoders {
            let c = &e.config;
            let (s, h, f, inner) = (
                c.seq_len as u64,
                c.hidden_dim as u64,
                c.ffn_dim as u64,
                c.attn_width() as u64,
            );
            for _layer in 0..c.num_layers {
                expect += s * h * 3 * inner;
                for _head in 0..c.num_heads {
                    expect += s * c.head_dim as u64 * s; // scores
                    expect += s * s * c.head_dim as u64; // context
                }
                expect += s * inner * h;
                expect += s * h * f + s * f * h;
            }
            expect += h * base.shared_embed_dim() as u64;
        }
        assert_eq!(graph.total_macs, expect);
        let from_ops: u64 = graph.operators.iter().map(Operator::macs).sum();
        assert_eq!(graph.total_macs, from_ops);
    }

    #[test]
    fn lowering_is_deterministic_byte_for_byte() {
        let base = presets::clip_b16();
        let a = serde_json::to_string(&lower_to_graph(&base)).unwrap();
        let b = serde_json::to_string(&lower_to_graph(&base)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monotone_in_every_dimension() {
        let base = presets::clip_b16();
        let space = build_prune_space(&base, PruneSteps::default()).unwrap();
        let baseline_dims: Vec<PrunedDims> = space
            .axes
            .iter()
            .map(|a| PrunedDims {
                num_layers: a.layers[0],
                ffn_dim: a.ffn[0],
                hidden_dim: a.hidden[0],
                num_heads: a.heads[0],
            })
            .collect();
        let small = space.member(&baseline_dims).unwrap();
        let small_params = param_count(&small);
        let small_macs = lower_to_graph(&small).total_macs;
        for enc in 0..space.axes.len() {
            for dim in 0..4 {
                let mut dims = baseline_dims.clone();
                let axes = &space.axes[enc];
                match dim {
                    0 => dims[enc].num_layers = *axes.layers.last().unwrap(),
                    1 => dims[enc].ffn_dim = *axes.ffn.last().unwrap(),
                    2 => dims[enc].hidden_dim = *axes.hidden.last().unwrap(),
                    _ => dims[enc].num_heads = *axes.heads.last().unwrap(),
                }
                let bigger = space.member(&dims).unwrap();
                assert!(param_count(&bigger) >= small_params);
                assert!(lower_to_graph(&bigger).total_macs >= small_macs);
            }
        }
    }

    #[test]
    fn enumerated_members_all_validate() {
        let space = presets::desk_space().prune;
        let members = space.enumerate();
        assert_eq!(members.len() as u128, space.size());
        for m in &members {
            assert!(validate_model_config(m, &space).is_empty());
        }
    }
}
