//! Global-state synthesis: starting from a target stimulus and an empty
//! global state, add the post-condition component the stimulus acts on, then
//! walk the pre-condition chain toward an external event, adding every state
//! that cannot be inferred from what is already there. Pre/post alternatives
//! branch into distinct candidates.

use gfsm_core::{GlobalState, ProtocolModel, StimulusId, SymbolId};

use crate::dependency::DependencyTable;

/// Symbols inferable from `g`: present, or reachable backward from a member
/// through dependency steps of non-external stimuli (the member's router was
/// in that state earlier within the same complete transition).
pub fn infer_closure(
    model: &ProtocolModel,
    dep: &DependencyTable,
    g: &GlobalState,
) -> Vec<SymbolId> {
    let mut seen: Vec<bool> = vec![false; model.states.len()];
    let mut stack: Vec<SymbolId> = g.present().collect();
    for &s in &stack {
        seen[s] = true;
    }
    while let Some(s) = stack.pop() {
        for (start, stim) in dep.steps(s) {
            if model.rule(stim).is_external() {
                continue;
            }
            if !seen[start] {
                seen[start] = true;
                stack.push(start);
            }
        }
    }
    seen.iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(s, _)| s)
        .collect()
}

fn inferable(model: &ProtocolModel, dep: &DependencyTable, g: &GlobalState, s: SymbolId) -> bool {
    infer_closure(model, dep, g).contains(&s)
}

fn add_one(g: &GlobalState, s: SymbolId) -> GlobalState {
    let mut counts = g.counts().to_vec();
    counts[s] += 1;
    GlobalState::from_counts(counts)
}

/// Candidate global states that can exercise `target`, one per branch point,
/// deduplicated, in discovery order.
pub fn synthesize_global_state(
    model: &ProtocolModel,
    dep: &DependencyTable,
    target: StimulusId,
) -> Vec<GlobalState> {
    let mut out: Vec<GlobalState> = Vec::new();
    let rule = model.rule(target);
    for post in &rule.post {
        // the component the target acts on: a transition start or a guard
        let seed = match (post.transition, post.guard) {
            (Some((a, _)), _) => a,
            (None, Some(g)) => g,
            _ => continue,
        };
        // for dst/other posts the target's originator is a different router
        // than the component acted on; for orig posts they coincide
        let exclude = if post.actor == gfsm_core::ActorSel::Orig {
            None
        } else {
            Some(seed)
        };
        let g = add_one(&GlobalState::empty(model.states.len()), seed);
        chase(model, dep, target, g, exclude, &mut Vec::new(), &mut out);
    }
    out
}

/// Walk one pre-condition level: satisfy the originator state, then either
/// stop at an external root or recurse into the triggering stimulus.
fn chase(
    model: &ProtocolModel,
    dep: &DependencyTable,
    stim: StimulusId,
    g: GlobalState,
    exclude_post_seed: Option<SymbolId>,
    visited: &mut Vec<(StimulusId, GlobalState)>,
    out: &mut Vec<GlobalState>,
) {
    let key = (stim, g.clone());
    if visited.contains(&key) {
        return;
    }
    visited.push(key);
    let derived = model.derived_preconditions(stim).to_vec();
    if derived.is_empty() {
        // externally or timer rooted with nothing to trigger it: only an
        // external rule is a valid root
        if model.rule(stim).is_external() {
            push_unique(out, g);
        }
        return;
    }
    for d in derived {
        let mut g2 = g.clone();
        // the originator of `stim` must be a router ending in d.end, distinct
        // from the component the target's own post-condition consumes
        let need = d.end;
        let satisfied = match exclude_post_seed {
            Some(seed) => {
                let mut base = g2.clone();
                if base.count(seed) > 0 {
                    base = remove_one(&base, seed);
                }
                base.count(need) > 0 || inferable(model, dep, &base, need)
            }
            None => g2.count(need) > 0 || inferable(model, dep, &g2, need),
        };
        if !satisfied {
            g2 = add_one(&g2, need);
        }
        if model.rule(d.by).is_external() {
            push_unique(out, g2);
            continue;
        }
        // the triggering stimulus's own post-conditions: any start state whose
        // effect is already entailed by the candidate must be inferable too
        for post in &model.rule(d.by).post {
            if let Some((a, b)) = post.transition {
                if inferable(model, dep, &g2, b) && !inferable(model, dep, &g2, a) {
                    g2 = add_one(&g2, a);
                }
            }
        }
        chase(model, dep, d.by, g2, None, visited, out);
    }
}

fn remove_one(g: &GlobalState, s: SymbolId) -> GlobalState {
    let mut counts = g.counts().to_vec();
    counts[s] -= 1;
    GlobalState::from_counts(counts)
}

fn push_unique(v: &mut Vec<GlobalState>, g: GlobalState) {
    if !v.contains(&g) {
        v.push(g);
    }
}
