//! Timer-clearing interleavings: convert the timing race around an
//! acknowledged, retransmitted message into a sequencing problem. The
//! dependency table names the transition that clears the protective timer;
//! inserting that clearing stimulus between the loss and the timer expiry
//! defeats the retransmission and exposes the error.

use gfsm_core::apply::apply_raw;
use gfsm_core::{
    check_correctness, CorrectnessDef, GlobalState, LossRecord, ModelError, OrderedState,
    ProtocolModel, StimulusId, StimulusKind, Trace, TraceMode, TraceStep, Verdict,
};

use crate::backward::{backward_imply, backward_imply_to, BackwardChain, BackwardConfig, BackwardOutcome};
use crate::dependency::DependencyTable;
use crate::mintopo::{check_min_topo, MinTopoTable};
use crate::synthesize::synthesize_global_state;

#[derive(Debug, Clone)]
pub struct InterleaveScenario {
    pub candidate: GlobalState,
    /// Rolled back to the beginning of the complete transition.
    pub start: GlobalState,
    pub clearing_stimulus: StimulusId,
    pub error_state: GlobalState,
    pub verdict: Verdict,
    /// I.S. to the clearing-stimulus topology.
    pub grounding: BackwardChain,
    /// Clearing-stimulus topology to `start` (the adversary interleaving).
    pub bridge: BackwardChain,
    /// Full replayable event sequence from the initial state to the error.
    pub trace: Trace,
}

/// For a lost-and-retransmitted target message, synthesize the interleaving
/// where a stale acknowledgement clears the retransmission timer and the
/// loss goes unrepaired. Returns one scenario per applicable candidate.
pub fn interleave_timer_clear(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    dep: &DependencyTable,
    topos: &MinTopoTable,
    target: StimulusId,
    config: &BackwardConfig,
) -> Result<Vec<InterleaveScenario>, ModelError> {
    let alphabet = model.states.len();
    // pending-timer symbols: start states of timer-rule posts
    let timer_info: Vec<(usize, StimulusId)> = model
        .timer_rules()
        .iter()
        .flat_map(|r| {
            r.post
                .iter()
                .filter_map(|p| p.transition.map(|(a, _)| (a, r.stimulus)))
        })
        .collect();

    let mut out = Vec::new();
    for candidate in synthesize_global_state(model, dep, target) {
        let Some(&(pending, timer_stim)) = timer_info
            .iter()
            .find(|(sym, _)| candidate.count(*sym) > 0)
        else {
            continue; // no protective timer in this candidate
        };
        // the clearing transition: pending -> cleared by an in-flight message
        // (an external host event legitimately cancels the timer; the
        // adversary is a stale protocol message)
        let mut clearing: Option<(StimulusId, usize)> = None;
        'scan: for cleared in 0..alphabet {
            for (start, stim) in dep.steps(cleared) {
                if start == pending
                    && stim != timer_stim
                    && !model.rule(stim).is_external()
                    && model.rule(stim).timer_name().is_none()
                    && model.stimuli[stim].kind.is_message()
                {
                    clearing = Some((stim, cleared));
                    break 'scan;
                }
            }
        }
        let Some((clear_stim, _cleared)) = clearing else {
            continue; // no timer-clearing transition exists
        };
        // roll the candidate to the start of its complete transition: undo the
        // local event that armed the timer
        let Some((armed_from, arm_stim)) = dep
            .steps(pending)
            .find(|&(_, stim)| model.stimuli[stim].kind == StimulusKind::Orig)
        else {
            continue;
        };
        let start_state = candidate.replace_one(pending, armed_from);

        // forward: arm the timer, lose the target, insert the stale clearing
        // stimulus before the timer fires
        let mut ordered = OrderedState::representative(&start_state);
        let mut tail: Vec<TraceStep> = Vec::new();
        let arm_actor = ordered
            .routers()
            .find(|&r| ordered.get(r) == armed_from)
            .expect("armed router present");
        let applied = apply_raw(model, &ordered, arm_stim, arm_actor, None);
        ordered = applied.state;
        tail.push(TraceStep {
            stimulus: arm_stim,
            actor: arm_actor,
            fault: None,
            inserted: false,
            after: ordered.canonical(alphabet),
        });
        // the target message is in flight; it is lost at its destination
        let recv = gfsm_core::apply::receivers(model, &ordered, target, arm_actor);
        let lost = apply_raw(model, &ordered, target, arm_actor, Some(&recv));
        ordered = lost.state;
        tail.push(TraceStep {
            stimulus: target,
            actor: arm_actor,
            fault: Some(LossRecord::Loss {
                stimulus: target,
                lost_at: recv,
            }),
            inserted: false,
            after: ordered.canonical(alphabet),
        });
        // stale acknowledgement clears the timer
        let clear_origin = ordered
            .routers()
            .find(|&r| ordered.get(r) != pending)
            .unwrap_or(0);
        let cleared = apply_raw(model, &ordered, clear_stim, clear_origin, None);
        ordered = cleared.state;
        tail.push(TraceStep {
            stimulus: clear_stim,
            actor: clear_origin,
            fault: None,
            inserted: true,
            after: ordered.canonical(alphabet),
        });
        let error_state = ordered.canonical(alphabet);
        let verdict = check_correctness(model, &error_state, def)?;
        if !verdict.is_error() {
            continue; // the interleaving is harmless for this candidate
        }

        // the pre-state that makes the stale clearing stimulus available
        let goal = |g: &GlobalState| check_min_topo(topos, g, clear_stim);
        let (bridge_outcome, _) =
            backward_imply_to(model, dep, topos, &start_state, &goal, config);
        let BackwardOutcome::Reached(bridge) = bridge_outcome else {
            continue;
        };
        let (ground_outcome, _) = backward_imply(model, dep, topos, &bridge.states[0], config);
        let BackwardOutcome::Reached(grounding) = ground_outcome else {
            continue;
        };

        // assemble the full raw trace: I.S. -> clearing topology -> start ->
        // armed/lost/cleared tail
        let mut states = grounding.states.clone();
        let mut stimuli = grounding.stimuli.clone();
        stimuli.extend(bridge.stimuli.iter().copied());
        states.extend(bridge.states[1..].iter().cloned());
        let mut steps = raw_steps_for_chain(model, &states, &stimuli)?;
        steps.extend(tail);
        let trace = Trace {
            model: model.name.clone(),
            n: start_state.routers(),
            definition: 2,
            mode: TraceMode::Raw,
            initial: states[0].clone(),
            steps,
            verdict: verdict.clone(),
        };
        out.push(InterleaveScenario {
            candidate,
            start: start_state,
            clearing_stimulus: clear_stim,
            error_state,
            verdict,
            grounding,
            bridge,
            trace,
        });
    }
    Ok(out)
}

/// Realize a canonical chain as raw trace steps with concrete actors: for
/// each link, the lowest-index actor whose single application reproduces the
/// recorded successor.
pub fn raw_steps_for_chain(
    model: &ProtocolModel,
    states: &[GlobalState],
    stimuli: &[StimulusId],
) -> Result<Vec<TraceStep>, ModelError> {
    let specs: Vec<(gfsm_core::StimulusId, bool, GlobalState)> = stimuli
        .iter()
        .zip(&states[1..])
        .map(|(&s, g)| (s, false, g.clone()))
        .collect();
    let mut ordered = OrderedState::representative(&states[0]);
    realize_raw_steps(model, &mut ordered, &specs)
}

/// Realize steps given as (stimulus, lossy, canonical successor) against a
/// concrete router ordering, searching actors (and loss subsets for lossy
/// deliveries) until the recorded successor reproduces.
pub fn realize_raw_steps(
    model: &ProtocolModel,
    ordered: &mut OrderedState,
    specs: &[(gfsm_core::StimulusId, bool, GlobalState)],
) -> Result<Vec<TraceStep>, ModelError> {
    let alphabet = model.states.len();
    let mut steps = Vec::new();
    for (i, (stim, lossy, target)) in specs.iter().enumerate() {
        let mut found = None;
        'actors: for actor in ordered.routers() {
            if *lossy {
                let fault = gfsm_core::FaultSpec::loss(*stim);
                for subset in
                    gfsm_core::apply::loss_subsets(model, ordered, *stim, actor, &fault)
                {
                    let applied = apply_raw(model, ordered, *stim, actor, Some(&subset));
                    if applied.state.canonical(alphabet) == *target {
                        found = Some((
                            actor,
                            applied.state,
                            Some(LossRecord::Loss {
                                stimulus: *stim,
                                lost_at: subset,
                            }),
                        ));
                        break 'actors;
                    }
                }
            } else {
                let applied = apply_raw(model, ordered, *stim, actor, None);
                if applied.state.canonical(alphabet) == *target {
                    found = Some((actor, applied.state, None));
                    break 'actors;
                }
            }
        }
        let (actor, next, fault) = found.ok_or_else(|| {
            ModelError::Invalid(format!(
                "chain link {} via {} does not replay",
                i, model.stimuli[*stim].name
            ))
        })?;
        steps.push(TraceStep {
            stimulus: *stim,
            actor,
            fault,
            inserted: false,
            after: target.clone(),
        });
        *ordered = next;
    }
    Ok(steps)
}
