//! Complete transitions: apply one external stimulus, cascade every
//! dependent internally-triggered stimulus to quiescence, then fire pending
//! event-triggered timers. Only the resulting stable states are checked for
//! correctness.

use std::collections::VecDeque;

use crate::apply::{apply_raw, loss_subsets, QueuedStim};
use crate::error::ModelError;
use crate::fault::{FaultSpec, LossRecord};
use crate::model::ProtocolModel;
use crate::state::{OrderedState, RouterId};
use crate::stimulus::StimulusId;

/// One internal step inside a complete transition.
#[derive(Debug, Clone)]
pub struct InternalStep {
    pub stimulus: StimulusId,
    pub origin: RouterId,
    pub lost_at: Option<Vec<RouterId>>,
    pub after: OrderedState,
}

/// One stable outcome of a complete transition. Loss enumeration makes a
/// completion branch: each admissible loss subset yields its own branch.
#[derive(Debug, Clone)]
pub struct CompletionBranch {
    pub stable: OrderedState,
    pub steps: Vec<InternalStep>,
    pub fault: Option<LossRecord>,
    /// Transient states visited (every post-application state).
    pub transients: usize,
}

struct Pending {
    state: OrderedState,
    queue: VecDeque<QueuedStim>,
    steps: Vec<InternalStep>,
    fault: Option<LossRecord>,
    quiescent_seen: Vec<OrderedState>,
    /// steps in the current cascade segment (resets at timer rounds)
    step_count: usize,
    /// total transient states visited
    transients: usize,
}

/// Apply external stimulus `ext` at `actor` and run the machine to its stable
/// state(s). `fault` (with `budget_left`) folds selective loss of the target
/// message into the cascade, branching per loss subset.
pub fn complete_transition(
    model: &ProtocolModel,
    start: &OrderedState,
    ext: StimulusId,
    actor: RouterId,
    fault: Option<&FaultSpec>,
    budget_left: bool,
) -> Result<Vec<CompletionBranch>, ModelError> {
    let bound = cascade_bound(start.len());
    let probe = apply_raw(model, start, ext, actor, None);
    if !probe.changed && probe.queued.is_empty() {
        return Err(ModelError::NotEnabled(model.stimuli[ext].name.clone()));
    }
    let mut work = vec![Pending {
        state: start.clone(),
        queue: VecDeque::from(vec![QueuedStim {
            stimulus: ext,
            origin: actor,
        }]),
        steps: Vec::new(),
        fault: None,
        quiescent_seen: Vec::new(),
        step_count: 0,
        transients: 0,
    }];
    let mut done = Vec::new();

    while let Some(mut p) = work.pop() {
        loop {
            let next = match p.queue.pop_front() {
                Some(q) => q,
                None => {
                    // Quiescent: fire pending timers, or stop on a fixpoint
                    // (a retransmission round that reproduces a quiescent
                    // state already seen is a steady state, not progress).
                    let pending = pending_timers(model, &p.state);
                    if pending.is_empty() || p.quiescent_seen.contains(&p.state) {
                        done.push(CompletionBranch {
                            transients: p.transients,
                            stable: p.state,
                            steps: p.steps,
                            fault: p.fault,
                        });
                        break;
                    }
                    if p.quiescent_seen.len() > 2 * start.len() + 2 {
                        return Err(ModelError::CascadeDivergence(bound));
                    }
                    p.quiescent_seen.push(p.state.clone());
                    p.queue.extend(pending);
                    // the step bound applies per cascade segment
                    p.step_count = 0;
                    continue;
                }
            };
            // Re-check the trigger at processing time; the originator may have
            // moved on (e.g. a queued Assert from a router already demoted).
            // External stimuli are forced and carry no trigger condition.
            if !model.rule(next.stimulus).is_external()
                && !model.pre_allows(next.stimulus, p.state.get(next.origin))
            {
                continue;
            }
            p.step_count += 1;
            p.transients += 1;
            if p.step_count > bound {
                return Err(ModelError::CascadeDivergence(bound));
            }
            let lossy = fault
                .and_then(|f| f.loss_target())
                .map(|t| t == next.stimulus)
                .unwrap_or(false)
                && budget_left
                && p.fault.is_none()
                && model.stimuli[next.stimulus].kind.is_message();
            if lossy {
                for subset in loss_subsets(model, &p.state, next.stimulus, next.origin, fault.unwrap())
                {
                    let applied =
                        apply_raw(model, &p.state, next.stimulus, next.origin, Some(&subset));
                    let mut branch = Pending {
                        state: applied.state.clone(),
                        queue: p.queue.clone(),
                        steps: p.steps.clone(),
                        fault: Some(LossRecord::Loss {
                            stimulus: next.stimulus,
                            lost_at: subset.clone(),
                        }),
                        quiescent_seen: p.quiescent_seen.clone(),
                        step_count: p.step_count,
                        transients: p.transients,
                    };
                    branch.queue.extend(applied.queued);
                    branch.steps.push(InternalStep {
                        stimulus: next.stimulus,
                        origin: next.origin,
                        lost_at: Some(subset),
                        after: applied.state,
                    });
                    work.push(branch);
                }
            }
            let applied = apply_raw(model, &p.state, next.stimulus, next.origin, None);
            p.state = applied.state.clone();
            p.queue.extend(applied.queued);
            p.steps.push(InternalStep {
                stimulus: next.stimulus,
                origin: next.origin,
                lost_at: None,
                after: applied.state,
            });
        }
    }
    // Deterministic order: fault-free branch first, then by loss record.
    done.sort_by_key(cmp_branch);
    Ok(done)
}

fn cmp_branch(b: &CompletionBranch) -> (usize, Vec<usize>, Vec<RouterId>) {
    match &b.fault {
        None => (0, Vec::new(), Vec::new()),
        Some(LossRecord::Loss { stimulus, lost_at }) => (1, vec![*stimulus], lost_at.clone()),
        Some(LossRecord::Crash { router }) => (2, Vec::new(), vec![*router]),
    }
}

/// Routers whose current state arms a timer rule, paired with that rule's
/// stimulus. Rule order, then router order.
fn pending_timers(model: &ProtocolModel, state: &OrderedState) -> Vec<QueuedStim> {
    let mut out = Vec::new();
    for rule in model.timer_rules() {
        for post in &rule.post {
            if let Some((a, _)) = post.transition {
                for r in state.routers() {
                    if state.get(r) == a {
                        out.push(QueuedStim {
                            stimulus: rule.stimulus,
                            origin: r,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Internal steps allowed per complete transition before the engine calls the
/// model divergent: 4·n, generous against the deepest bundled cascade.
pub fn cascade_bound(n: usize) -> usize {
    (4 * n).max(8)
}
