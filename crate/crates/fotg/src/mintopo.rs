//! Minimum topologies: the smallest partial global states containing the
//! components necessary to trigger each stimulus, built by walking the
//! derived pre-condition chains back to an originator-local event.

use gfsm_core::{GlobalState, ModelError, ProtocolModel, StimulusId, StimulusKind};

#[derive(Debug, Clone)]
pub struct MinTopoTable {
    /// Indexed by stimulus: alternative fragments (partial multisets).
    pub fragments: Vec<Vec<GlobalState>>,
}

impl MinTopoTable {
    pub fn for_stimulus(&self, stim: StimulusId) -> &[GlobalState] {
        &self.fragments[stim]
    }
}

pub fn build_min_topos(model: &ProtocolModel) -> Result<MinTopoTable, ModelError> {
    let mut memo: Vec<Option<Vec<GlobalState>>> = vec![None; model.stimuli.len()];
    let mut visiting = vec![false; model.stimuli.len()];
    for stim in 0..model.stimuli.len() {
        build(model, stim, &mut memo, &mut visiting)?;
    }
    Ok(MinTopoTable {
        fragments: memo.into_iter().map(|f| f.unwrap()).collect(),
    })
}

fn build(
    model: &ProtocolModel,
    stim: StimulusId,
    memo: &mut Vec<Option<Vec<GlobalState>>>,
    visiting: &mut Vec<bool>,
) -> Result<(), ModelError> {
    if memo[stim].is_some() {
        return Ok(());
    }
    if visiting[stim] {
        return Err(ModelError::Invalid(format!(
            "cyclic pre-condition chain through `{}` with no external root",
            model.stimuli[stim].name
        )));
    }
    visiting[stim] = true;
    let alphabet = model.states.len();
    let mut fragments: Vec<GlobalState> = Vec::new();
    let derived = model.derived_preconditions(stim).to_vec();
    if derived.is_empty() {
        // externally or timer driven: triggerable anywhere
        fragments.push(GlobalState::empty(alphabet));
    }
    for d in derived {
        let mut one = GlobalState::empty(alphabet);
        one = add_one(one, d.end);
        if model.stimuli[d.by].kind == StimulusKind::Orig {
            push_unique(&mut fragments, one);
        } else {
            build(model, d.by, memo, visiting)?;
            for base in memo[d.by].as_ref().unwrap().clone() {
                let mut frag = base;
                frag = add_one(frag, d.end);
                push_unique(&mut fragments, frag);
            }
        }
    }
    visiting[stim] = false;
    memo[stim] = Some(fragments);
    Ok(())
}

fn add_one(g: GlobalState, s: usize) -> GlobalState {
    let mut counts = g.counts().to_vec();
    counts[s] += 1;
    GlobalState::from_counts(counts)
}

fn push_unique(v: &mut Vec<GlobalState>, g: GlobalState) {
    if !v.contains(&g) {
        v.push(g);
    }
}

/// True iff some fragment for the stimulus is a sub-multiset of `g`.
pub fn check_min_topo(table: &MinTopoTable, g: &GlobalState, stim: StimulusId) -> bool {
    table
        .fragments[stim]
        .iter()
        .any(|frag| g.contains_all(frag))
}
