//! Forward implication: run the target stimulus from a synthesized global
//! state to its stable successor(s), with or without the fault, and judge
//! them under both correctness definitions.

use gfsm_core::{
    check_correctness, complete_transition, CorrectnessDef, FaultSpec, GlobalState, LossRecord,
    ModelError, OrderedState, ProtocolModel, StimulusId, Verdict,
};

#[derive(Debug, Clone)]
pub struct ForwardBranch {
    pub stable: GlobalState,
    pub fault: Option<LossRecord>,
    pub verdict_def1: Verdict,
    pub verdict_def2: Verdict,
    pub transients: Vec<GlobalState>,
    /// The internal steps of the completion: stimulus, whether this step was
    /// the lost delivery, and the canonical state after it.
    pub steps: Vec<(StimulusId, bool, GlobalState)>,
}

#[derive(Debug, Clone)]
pub struct ForwardOutcome {
    /// Router index in the candidate representative that originates the
    /// target stimulus.
    pub origin: usize,
    pub branches: Vec<ForwardBranch>,
}

/// Apply `target` from the candidate state; with `with_loss`, also branch
/// into every admissible selective-loss scenario of the target message.
pub fn forward_imply(
    model: &ProtocolModel,
    def1: &CorrectnessDef,
    def2: &CorrectnessDef,
    candidate: &GlobalState,
    target: StimulusId,
    with_loss: bool,
) -> Result<ForwardOutcome, ModelError> {
    let ordered = OrderedState::representative(candidate);
    let origin = ordered
        .routers()
        .find(|&r| model.pre_allows(target, ordered.get(r)))
        .or_else(|| {
            // external events carry no trigger condition; originate wherever
            // the application is productive
            if model.rule(target).is_external() {
                ordered.routers().find(|&r| {
                    let probe = gfsm_core::apply::apply_raw(model, &ordered, target, r, None);
                    probe.changed || !probe.queued.is_empty()
                })
            } else {
                None
            }
        })
        .ok_or_else(|| ModelError::InapplicableFault(model.stimuli[target].name.clone()))?;
    let fault = if with_loss {
        Some(FaultSpec::loss(target))
    } else {
        None
    };
    let branches = complete_transition(model, &ordered, target, origin, fault.as_ref(), with_loss)?;
    let mut out = Vec::new();
    for b in branches {
        let stable = b.stable.canonical(model.states.len());
        out.push(ForwardBranch {
            verdict_def1: check_correctness(model, &stable, def1)?,
            verdict_def2: check_correctness(model, &stable, def2)?,
            transients: b
                .steps
                .iter()
                .map(|s| s.after.canonical(model.states.len()))
                .collect(),
            steps: b
                .steps
                .iter()
                .map(|s| {
                    (
                        s.stimulus,
                        s.lost_at.is_some(),
                        s.after.canonical(model.states.len()),
                    )
                })
                .collect(),
            stable,
            fault: b.fault,
        });
    }
    Ok(ForwardOutcome {
        origin,
        branches: out,
    })
}
