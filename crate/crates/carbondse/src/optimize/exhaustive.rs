//! Exhaustive evaluation of a joint space: the desk-scale ground-truth
//! oracle. The resulting front is the true front by construction.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{evaluate_candidate, EvalContext, JointSpace, Provenance, RunRecord, SearchStrategy};

/// Evaluates every (model, valid hardware) member of the joint space, up
/// to a size cap.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustiveSearch {
    pub cap: u128,
}

impl Default for ExhaustiveSearch {
    fn default() -> Self {
        Self { cap: 1_000_000 }
    }
}

impl SearchStrategy for ExhaustiveSearch {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn run(
        &self,
        space: &JointSpace,
        ctx: &EvalContext,
        _budget: usize,
        seed: u64,
    ) -> Result<RunRecord> {
        let size = space.valid_size();
        if size > self.cap {
            return Err(Error::SpaceTooLarge {
                size,
                cap: self.cap,
            });
        }
        let members = space.enumerate_valid();
        let candidates: Vec<_> = members
            .par_iter()
            .enumerate()
            .map(|(trial, (model, hw))| {
                evaluate_candidate(
                    model,
                    hw,
                    ctx,
                    Provenance {
                        trial,
                        seed,
                        strategy: "exhaustive".into(),
                    },
                )
            })
            .collect();
        RunRecord::finalize("exhaustive", seed, ctx.mode, candidates.len(), candidates)
    }
}

/// Convenience wrapper with the default cap.
pub fn exhaustive_search(space: &JointSpace, ctx: &EvalContext, seed: u64) -> Result<RunRecord> {
    ExhaustiveSearch::default().run(space, ctx, 0, seed)
}
