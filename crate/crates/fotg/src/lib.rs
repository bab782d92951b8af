//! Fault-oriented test generation. Instead of searching forward from the
//! initial states, start from a targeted fault: derive the triggering
//! conditions and the state dependency table from the transition rules,
//! synthesize the minimal global state that can exercise the fault, run
//! forward implication to find the resulting error, then backward implication
//! to construct an event sequence from an initial state — or declare the
//! synthesized state unreachable.

mod backward;
mod crash;
mod dependency;
mod forward;
mod interleave;
mod mintopo;
mod synthesize;

pub use backward::{
    backward_imply, backward_imply_to, check_consistency, BackwardChain, BackwardConfig,
    BackwardOutcome, BackwardStats,
};
pub use crash::{crash_analysis, CrashClassification, CrashScenario, ProbeOutcome};
pub use dependency::{build_dependency_table, DepEntry, DependencyTable};
pub use forward::{forward_imply, ForwardBranch, ForwardOutcome};
pub use interleave::{interleave_timer_clear, raw_steps_for_chain, realize_raw_steps, InterleaveScenario};
pub use mintopo::{build_min_topos, check_min_topo, MinTopoTable};
pub use synthesize::{infer_closure, synthesize_global_state};

use gfsm_core::condition::PreCondition;
use gfsm_core::{ProtocolModel, StimulusId};

/// The automatic pre-condition derivation: every post-condition entry
/// "σ triggers stimulus s under transition t" contributes the condition
/// "σ.t" to s's pre-conditions. Returned per stimulus, in rule order.
pub fn derive_preconditions(model: &ProtocolModel) -> Vec<Vec<PreCondition>> {
    (0..model.stimuli.len())
        .map(|stim| {
            let declared = &model.rule(stim).pre;
            if declared
                .iter()
                .any(|p| !matches!(p, PreCondition::Triggered { .. }))
            {
                // external / timer rules keep their markers
                return declared
                    .iter()
                    .filter(|p| !matches!(p, PreCondition::Triggered { .. }))
                    .cloned()
                    .collect();
            }
            model
                .derived_preconditions(stim)
                .iter()
                .map(|d| PreCondition::Triggered {
                    stimulus: d.by,
                    start: d.start.unwrap_or(d.end),
                    end: d.end,
                })
                .collect()
        })
        .collect()
}

/// Convenience: the derived trigger pairs (stimulus, originator state) for
/// one stimulus, the semantic content of its pre-condition column entry.
pub fn derived_pre_pairs(model: &ProtocolModel, stim: StimulusId) -> Vec<(StimulusId, usize)> {
    model
        .derived_preconditions(stim)
        .iter()
        .map(|d| (d.by, d.end))
        .collect()
}
