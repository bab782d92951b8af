//! Single-stimulus application: the inner step of the global machine.

use crate::error::ModelError;
use crate::fault::FaultSpec;
use crate::model::ProtocolModel;
use crate::rule::ActorSel;
use crate::state::{OrderedState, RouterId};
use crate::stimulus::{StimulusId, StimulusKind};
use crate::symbol::Role;

/// A stimulus waiting to be processed in the current complete transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueuedStim {
    pub stimulus: StimulusId,
    pub origin: RouterId,
}

/// Result of one raw application.
#[derive(Debug, Clone)]
pub struct AppliedStep {
    pub state: OrderedState,
    pub queued: Vec<QueuedStim>,
    pub changed: bool,
}

/// Routers that receive a message stimulus (excluding the originator), in
/// delivery order. Empty for local events.
pub fn receivers(
    model: &ProtocolModel,
    state: &OrderedState,
    stim: StimulusId,
    origin: RouterId,
) -> Vec<RouterId> {
    let rule = model.rule(stim);
    match model.stimuli[stim].kind {
        StimulusKind::Orig => Vec::new(),
        StimulusKind::Dst => resolve_dst(model, state, stim, origin, None)
            .map(|r| vec![r])
            .unwrap_or_default(),
        StimulusKind::Mcast => state.routers().filter(|&r| r != origin).collect(),
        StimulusKind::McastDownstream => {
            let mut out: Vec<RouterId> = state
                .routers()
                .filter(|&r| {
                    r != origin && model.states[state.get(r)].role == Role::Downstream
                })
                .collect();
            if let Some(dst) = resolve_dst(model, state, stim, origin, Some(Role::Upstream)) {
                out.push(dst);
            }
            out.sort_unstable();
            let _ = rule;
            out
        }
    }
}

/// The destination of a dst-targeted stimulus: the first router (in
/// post-condition order, then router index) whose state matches a @dst
/// transition start. None when nobody can process the message.
fn resolve_dst(
    model: &ProtocolModel,
    state: &OrderedState,
    stim: StimulusId,
    origin: RouterId,
    role: Option<Role>,
) -> Option<RouterId> {
    let rule = model.rule(stim);
    for post in &rule.post {
        if post.actor != ActorSel::Dst {
            continue;
        }
        let guard = match post.guard.or(post.transition.map(|(a, _)| a)) {
            Some(g) => g,
            None => continue,
        };
        for r in state.routers() {
            if r == origin {
                continue;
            }
            if let Some(role) = role {
                if model.states[state.get(r)].role != role {
                    continue;
                }
            }
            if state.get(r) == guard {
                return Some(r);
            }
        }
    }
    None
}

/// Apply `stim` once, from `origin`, optionally dropping delivery at the
/// routers in `lost_at`. Post-conditions are evaluated in rule order against
/// the running state: each router takes at most one transition per
/// application, while trigger-only post-conditions fire for any router whose
/// current state satisfies them (including a state just entered).
pub fn apply_raw(
    model: &ProtocolModel,
    state: &OrderedState,
    stim: StimulusId,
    origin: RouterId,
    lost_at: Option<&[RouterId]>,
) -> AppliedStep {
    let rule = model.rule(stim);
    let kind = model.stimuli[stim].kind;
    let recv = receivers(model, state, stim, origin);
    let lost = lost_at.unwrap_or(&[]);
    let delivered: Vec<RouterId> = recv.iter().copied().filter(|r| !lost.contains(r)).collect();
    let dst = match kind {
        StimulusKind::Dst => delivered.first().copied(),
        StimulusKind::McastDownstream => delivered
            .iter()
            .copied()
            .find(|&r| model.states[state.get(r)].role == Role::Upstream),
        _ => None,
    };

    let mut next = state.clone();
    let mut queued = Vec::new();
    let mut changed = false;
    let mut transitioned = vec![false; state.len()];

    for post in &rule.post {
        let targets: Vec<RouterId> = match post.actor {
            ActorSel::Orig => {
                if kind == StimulusKind::Orig {
                    vec![origin]
                } else {
                    delivered.iter().copied().filter(|&r| r == origin).collect()
                }
            }
            ActorSel::Dst => dst.into_iter().collect(),
            ActorSel::Other => delivered.iter().copied().filter(|&r| r != origin).collect(),
            ActorSel::Any => {
                if kind == StimulusKind::Orig {
                    vec![origin]
                } else {
                    delivered.clone()
                }
            }
        };
        for r in targets {
            match (post.guard, post.transition, post.triggers) {
                // transition, with or without a triggered stimulus
                (guard, Some((a, b)), trig) => {
                    let guard = guard.unwrap_or(a);
                    if !transitioned[r] && next.get(r) == guard && next.get(r) == a {
                        next.set(r, b);
                        transitioned[r] = true;
                        changed = true;
                        if let Some(t) = trig {
                            if model.pre_allows(t, next.get(r)) {
                                queued.push(QueuedStim {
                                    stimulus: t,
                                    origin: r,
                                });
                            }
                        }
                    } else if let Some(t) = trig {
                        // Multicast sends are level-triggered: they also
                        // happen when the sender is already in a state
                        // satisfying the triggered stimulus's pre-condition
                        // (a forwarder keeps forwarding data). Unicast and
                        // downstream-directed sends fire only on their
                        // triggering transition.
                        if !transitioned[r]
                            && model.stimuli[t].kind == StimulusKind::Mcast
                            && model.pre_allows(t, next.get(r))
                        {
                            queued.push(QueuedStim {
                                stimulus: t,
                                origin: r,
                            });
                        }
                    }
                }
                // condition.stimulus: pure trigger
                (Some(g), None, Some(t))
                    if next.get(r) == g => {
                        queued.push(QueuedStim {
                            stimulus: t,
                            origin: r,
                        });
                    }
                _ => {}
            }
        }
    }

    AppliedStep {
        state: next,
        queued,
        changed,
    }
}

/// Spec-level operation: transient successors of applying `stim` at `actor`.
///
/// Without a fault this is a single successor. Under selective loss of `stim`
/// every admissible loss subset of the receivers yields one successor
/// (canonically deduplicated by the callers that search).
pub fn apply_stimulus(
    model: &ProtocolModel,
    state: &OrderedState,
    stim: StimulusId,
    actor: RouterId,
    fault: Option<&FaultSpec>,
) -> Result<Vec<OrderedState>, ModelError> {
    let plain = apply_raw(model, state, stim, actor, None);
    if !plain.changed && plain.queued.is_empty() {
        return Err(ModelError::NotEnabled(model.stimuli[stim].name.clone()));
    }
    let mut out = Vec::new();
    let loss_applies = fault.and_then(|f| f.loss_target()) == Some(stim)
        && model.stimuli[stim].kind.is_message();
    if loss_applies {
        out.push(plain.state.clone());
        for subset in loss_subsets(model, state, stim, actor, fault.unwrap()) {
            let lossy = apply_raw(model, state, stim, actor, Some(&subset));
            out.push(lossy.state);
        }
    } else {
        out.push(plain.state);
    }
    Ok(out)
}

/// Admissible loss subsets for one occurrence of a message stimulus:
/// dst messages are lost whole; multicast messages lose every non-empty
/// subset of their receivers, excluding total loss when there is more than
/// one receiver (loss is selective).
pub fn loss_subsets(
    model: &ProtocolModel,
    state: &OrderedState,
    stim: StimulusId,
    origin: RouterId,
    fault: &FaultSpec,
) -> Vec<Vec<RouterId>> {
    let recv = receivers(model, state, stim, origin);
    if recv.is_empty() {
        return Vec::new();
    }
    if let crate::fault::FaultKind::SelectiveLoss {
        loss_set: Some(set),
        ..
    } = &fault.kind
    {
        let subset: Vec<RouterId> = set.iter().copied().filter(|r| recv.contains(r)).collect();
        return if subset.is_empty() { Vec::new() } else { vec![subset] };
    }
    match model.stimuli[stim].kind {
        StimulusKind::Dst => vec![recv],
        _ => {
            let k = recv.len();
            if k == 1 {
                return vec![recv];
            }
            let mut out = Vec::new();
            for mask in 1..((1usize << k) - 1) {
                let subset: Vec<RouterId> = (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| recv[i])
                    .collect();
                out.push(subset);
            }
            out
        }
    }
}
