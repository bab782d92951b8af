//! Crash scenarios: synthesize a topology exhibiting the targeted state,
//! crash that router, then probe with host stimuli and judge the stable
//! outcomes. Recovery in this protocol family is data-driven, so the
//! classification separates states that stay correct under membership churn
//! from those that rest in a stable error until data arrives.

use gfsm_core::{
    check_correctness, complete_transition, CorrectnessDef, GlobalState, ModelError, OrderedState,
    ProtocolModel, StimulusId, StimulusKind, SymbolId, Verdict,
};

use crate::dependency::DependencyTable;
use crate::forward::forward_imply;
use crate::synthesize::synthesize_global_state;

#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub stimulus: StimulusId,
    pub actor_symbol: SymbolId,
    pub stable: GlobalState,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashClassification {
    /// Correct after the crash and under every membership probe.
    Recovery,
    /// Some stable error arises from the crash or membership probing alone.
    PersistentError,
}

#[derive(Debug, Clone)]
pub struct CrashScenario {
    pub symbol: SymbolId,
    pub pre: GlobalState,
    pub post_crash: GlobalState,
    pub post_verdict: Verdict,
    pub probes: Vec<ProbeOutcome>,
    /// First stable error reachable from the crash via membership-only
    /// (non-data) probing, depth two.
    pub membership_error: Option<GlobalState>,
    pub classification: CrashClassification,
}

/// Analyze crashing a router currently in `symbol`. Topologies are reused
/// from the stimulus syntheses that create the state.
pub fn crash_analysis(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    dep: &DependencyTable,
    symbol: SymbolId,
    crash: StimulusId,
) -> Result<Vec<CrashScenario>, ModelError> {
    let def1 = def; // verdicts below use the caller's definition
    let alphabet = model.states.len();
    let mut pre_states: Vec<GlobalState> = Vec::new();
    if model.states[symbol].initial {
        let mut counts = vec![0u16; alphabet];
        counts[symbol] = 1;
        pre_states.push(GlobalState::from_counts(counts));
    }
    for (_, stim) in dep.steps(symbol) {
        if stim == crash {
            continue;
        }
        for candidate in synthesize_global_state(model, dep, stim) {
            let fwd = match forward_imply(model, def1, def1, &candidate, stim, false) {
                Ok(f) => f,
                Err(ModelError::InapplicableFault(_)) | Err(ModelError::NotEnabled(_)) => continue,
                Err(e) => return Err(e),
            };
            for b in &fwd.branches {
                for state in b.transients.iter().chain(std::iter::once(&b.stable)) {
                    if state.count(symbol) > 0 && !pre_states.contains(state) {
                        pre_states.push(state.clone());
                        break;
                    }
                }
            }
        }
    }

    let mut out = Vec::new();
    for pre in pre_states {
        let ordered = OrderedState::representative(&pre);
        let victim = ordered
            .routers()
            .find(|&r| ordered.get(r) == symbol)
            .expect("victim present");
        let branches = match complete_transition(model, &ordered, crash, victim, None, false) {
            Ok(b) => b,
            Err(ModelError::NotEnabled(_)) => continue,
            Err(e) => return Err(e),
        };
        let stable = branches[0].stable.clone();
        let post_crash = stable.canonical(alphabet);
        let post_verdict = check_correctness(model, &post_crash, def)?;
        let probes = run_probes(model, def, &stable, crash)?;
        let membership_error =
            membership_closure_error(model, def, &stable, crash, &post_verdict)?;
        let classification = if membership_error.is_some() {
            CrashClassification::PersistentError
        } else {
            CrashClassification::Recovery
        };
        out.push(CrashScenario {
            symbol,
            pre,
            post_crash,
            post_verdict,
            probes,
            membership_error,
            classification,
        });
    }
    Ok(out)
}

fn run_probes(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    state: &OrderedState,
    crash: StimulusId,
) -> Result<Vec<ProbeOutcome>, ModelError> {
    let alphabet = model.states.len();
    let mut out: Vec<ProbeOutcome> = Vec::new();
    for ext in model.external_stimuli() {
        if ext == crash {
            continue;
        }
        for actor in state.routers() {
            let actor_symbol = state.get(actor);
            if out
                .iter()
                .any(|p| p.stimulus == ext && p.actor_symbol == actor_symbol)
            {
                continue;
            }
            match complete_transition(model, state, ext, actor, None, false) {
                Ok(branches) => {
                    for b in branches {
                        let stable = b.stable.canonical(alphabet);
                        let verdict = check_correctness(model, &stable, def)?;
                        out.push(ProbeOutcome {
                            stimulus: ext,
                            actor_symbol,
                            stable,
                            verdict,
                        });
                    }
                }
                Err(ModelError::NotEnabled(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

/// Does any data-injecting post-condition hang off this external stimulus?
fn injects_data(model: &ProtocolModel, ext: StimulusId) -> bool {
    model.rule(ext).post.iter().any(|p| {
        p.triggers
            .map(|t| model.stimuli[t].kind == StimulusKind::Mcast)
            .unwrap_or(false)
    })
}

fn membership_closure_error(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    start: &OrderedState,
    crash: StimulusId,
    post_verdict: &Verdict,
) -> Result<Option<GlobalState>, ModelError> {
    let alphabet = model.states.len();
    if post_verdict.is_error() {
        return Ok(Some(start.canonical(alphabet)));
    }
    let membership: Vec<StimulusId> = model
        .external_stimuli()
        .into_iter()
        .filter(|&e| e != crash && !injects_data(model, e))
        .collect();
    let mut frontier = vec![start.clone()];
    let mut seen = vec![start.canonical(alphabet)];
    for _depth in 0..2 {
        let mut next = Vec::new();
        for state in &frontier {
            for &ext in &membership {
                for actor in state.routers() {
                    match complete_transition(model, state, ext, actor, None, false) {
                        Ok(branches) => {
                            for b in branches {
                                let canon = b.stable.canonical(alphabet);
                                if seen.contains(&canon) {
                                    continue;
                                }
                                if check_correctness(model, &canon, def)?.is_error() {
                                    return Ok(Some(canon));
                                }
                                seen.push(canon);
                                next.push(b.stable);
                            }
                        }
                        Err(ModelError::NotEnabled(_)) => continue,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}
