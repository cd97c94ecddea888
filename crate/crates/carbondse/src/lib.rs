//! Carbon-aware design-space exploration for Transformer models and edge
//! accelerators.
//!
//! The crate co-searches model configurations (uniform pruning of layers,
//! FFN width, hidden width, and attention heads) and hardware configurations
//! (systolic tensor cores, vector units, and a two-level buffer hierarchy)
//! to minimize total carbon — embodied plus operational — alongside
//! accuracy, latency, and energy.
//!
//! The pipeline is: lower a model to an operator graph ([`workload`]),
//! cost it on a hardware point ([`perf`]), convert area and energy into
//! carbon ([`carbon`]), score accuracy with a pluggable proxy ([`proxy`]),
//! and search the joint space ([`optimize`]) with either an exhaustive
//! oracle or a seeded evolutionary strategy. Post-run analytics live in
//! [`report`].
//!
//! Each major capability has a runnable example under `examples/`; the
//! `carbondse` binary wraps the same library calls behind subcommands.

pub mod archspace;
pub mod carbon;
pub mod config;
pub mod error;
pub mod optimize;
pub mod perf;
pub mod presets;
pub mod proxy;
pub mod report;
pub mod workload;

pub use error::{Error, Result};
