//! Backward implication: invert the transition rules via the dependency
//! table and search depth-first for a path from the queried global state
//! back to an initial state, validating every reverse step by originator
//! existence, minimum topology and forward/backward consistency.

use std::collections::HashSet;

use gfsm_core::{GlobalState, ProtocolModel, StimulusId, StimulusKind, SymbolId};

use crate::dependency::DependencyTable;
use crate::mintopo::{check_min_topo, MinTopoTable};

#[derive(Debug, Clone)]
pub struct BackwardConfig {
    /// Rewind-call budget; the case studies need a few hundred.
    pub budget: u64,
}

impl Default for BackwardConfig {
    fn default() -> Self {
        BackwardConfig { budget: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BackwardStats {
    pub backward_calls: u64,
    pub rewind_calls: u64,
    pub backtracks: u64,
}

/// An event-sequence fragment: `states[i] --stimuli[i]--> states[i+1]`,
/// chronological, ending at the queried state.
#[derive(Debug, Clone)]
pub struct BackwardChain {
    pub states: Vec<GlobalState>,
    pub stimuli: Vec<StimulusId>,
}

impl BackwardChain {
    /// The chain with timer steps folded into the following message step,
    /// i.e. the stable-state milestones the search reports.
    pub fn folded(&self, model: &ProtocolModel) -> (Vec<GlobalState>, Vec<StimulusId>) {
        let mut states = vec![self.states[0].clone()];
        let mut stimuli = Vec::new();
        for (i, &stim) in self.stimuli.iter().enumerate() {
            if model.rule(stim).timer_name().is_some() {
                // timer expiry belongs to the enclosing complete transition
                let last = states.len() - 1;
                states[last] = self.states[i + 1].clone();
                continue;
            }
            stimuli.push(stim);
            states.push(self.states[i + 1].clone());
        }
        (states, stimuli)
    }
}

#[derive(Debug, Clone)]
pub enum BackwardOutcome {
    Reached(BackwardChain),
    Unreachable,
    BudgetExceeded,
}

/// Is `g` reachable from an initial state? All backward branches are
/// exhausted before declaring it unreachable.
pub fn backward_imply(
    model: &ProtocolModel,
    dep: &DependencyTable,
    topos: &MinTopoTable,
    g: &GlobalState,
    config: &BackwardConfig,
) -> (BackwardOutcome, BackwardStats) {
    backward_imply_to(model, dep, topos, g, &|s| model.is_initial_state(s), config)
}

/// Generalized backward search toward any goal predicate (the interleaving
/// analysis grounds at the clearing stimulus's minimum topology first).
pub fn backward_imply_to(
    model: &ProtocolModel,
    dep: &DependencyTable,
    topos: &MinTopoTable,
    g: &GlobalState,
    goal: &dyn Fn(&GlobalState) -> bool,
    config: &BackwardConfig,
) -> (BackwardOutcome, BackwardStats) {
    let mut ctx = Ctx {
        model,
        dep,
        topos,
        goal,
        budget: config.budget,
        stats: BackwardStats::default(),
        visited: HashSet::new(),
        over_budget: false,
    };
    let res = search(&mut ctx, g);
    let stats = ctx.stats;
    let outcome = match res {
        Some(chain) => BackwardOutcome::Reached(chain.into_chain()),
        None if ctx.over_budget => BackwardOutcome::BudgetExceeded,
        None => BackwardOutcome::Unreachable,
    };
    (outcome, stats)
}

struct Ctx<'a> {
    model: &'a ProtocolModel,
    dep: &'a DependencyTable,
    topos: &'a MinTopoTable,
    goal: &'a dyn Fn(&GlobalState) -> bool,
    budget: u64,
    stats: BackwardStats,
    visited: HashSet<GlobalState>,
    over_budget: bool,
}

// built ground-first while the recursion unwinds, so already chronological
struct PartialChain {
    states: Vec<GlobalState>,
    stimuli: Vec<StimulusId>,
}

impl PartialChain {
    fn into_chain(self) -> BackwardChain {
        BackwardChain {
            states: self.states,
            stimuli: self.stimuli,
        }
    }
}

fn search(ctx: &mut Ctx, g: &GlobalState) -> Option<PartialChain> {
    if (ctx.goal)(g) {
        return Some(PartialChain {
            states: vec![g.clone()],
            stimuli: Vec::new(),
        });
    }
    ctx.stats.backward_calls += 1;
    if !ctx.visited.insert(g.clone()) {
        return None;
    }

    // all rewinds of all components, then rank
    let mut candidates: Vec<(GlobalState, StimulusId)> = Vec::new();
    for s in g.present() {
        let steps: Vec<(SymbolId, StimulusId)> = ctx.dep.steps(s).collect();
        for (start, stim) in steps {
            ctx.stats.rewind_calls += 1;
            if ctx.stats.rewind_calls > ctx.budget {
                ctx.over_budget = true;
                return None;
            }
            match rewind(ctx.model, ctx.topos, g, s, start, stim) {
                Rewound::Backtrack => ctx.stats.backtracks += 1,
                Rewound::News(list) => {
                    let mut any = false;
                    for new in list {
                        let is_goal = (ctx.goal)(&new);
                        if !is_goal && (dead(ctx, &new) || ctx.visited.contains(&new)) {
                            continue;
                        }
                        if candidates.iter().any(|(c, _)| *c == new) {
                            continue;
                        }
                        any = true;
                        candidates.push((new, stim));
                    }
                    if !any {
                        ctx.stats.backtracks += 1;
                    }
                }
            }
        }
    }

    // Prefer rewinds that ground immediately, then those gaining initial
    // symbols; ties keep dependency-table discovery order.
    let score = |st: &GlobalState| -> (i32, i32) {
        let goal_hit = if (ctx.goal)(st) { 0 } else { 1 };
        let initials: i32 = st
            .present()
            .filter(|&s| ctx.model.states[s].initial)
            .map(|s| st.count(s) as i32)
            .sum();
        (goal_hit, -initials)
    };
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&i| (score(&candidates[i].0), i));

    for idx in order {
        let (new, stim) = &candidates[idx];
        if let Some(mut chain) = search(ctx, new) {
            chain.stimuli.push(*stim);
            chain.states.push(g.clone());
            return Some(chain);
        }
        if ctx.over_budget {
            return None;
        }
    }
    None
}

fn dead(ctx: &Ctx, g: &GlobalState) -> bool {
    g.present().any(|s| {
        !ctx.model.states[s].initial && ctx.dep.steps(s).next().is_none()
    })
}

enum Rewound {
    Backtrack,
    News(Vec<GlobalState>),
}

/// Every backward step has an equivalent forward step: no post-condition
/// transition of `stim` may have its start state present in `g`, otherwise
/// the forward application would move it and land elsewhere.
pub fn check_consistency(model: &ProtocolModel, stim: StimulusId, g: &GlobalState) -> bool {
    !model.rule(stim).post.iter().any(|p| {
        p.transition
            .map(|(a, _)| g.count(a) > 0)
            .unwrap_or(false)
    })
}

fn src_exists(model: &ProtocolModel, stim: StimulusId, g: &GlobalState) -> bool {
    model
        .pre_end_states(stim)
        .iter()
        .any(|&end| g.count(end) > 0)
}

fn rewind(
    model: &ProtocolModel,
    topos: &MinTopoTable,
    g: &GlobalState,
    s: SymbolId,
    start: SymbolId,
    stim: StimulusId,
) -> Rewound {
    match model.stimuli[stim].kind {
        StimulusKind::Orig => Rewound::News(vec![g.replace_one(s, start)]),
        StimulusKind::Dst => {
            if !src_exists(model, stim, g) {
                return Rewound::Backtrack;
            }
            let new = g.replace_one(s, start);
            if check_min_topo(topos, &new, stim) {
                Rewound::News(vec![new])
            } else {
                Rewound::Backtrack
            }
        }
        StimulusKind::Mcast | StimulusKind::McastDownstream => {
            if !src_exists(model, stim, g) {
                return Rewound::Backtrack;
            }
            if !check_consistency(model, stim, g) {
                return Rewound::Backtrack;
            }
            let news = multicast_rollback(model, g, s, start, stim);
            let news: Vec<GlobalState> = news
                .into_iter()
                .filter(|n| check_min_topo(topos, n, stim))
                .collect();
            if news.is_empty() {
                Rewound::Backtrack
            } else {
                Rewound::News(news)
            }
        }
    }
}

/// Roll back every end-state instance of the stimulus's transitions, keeping
/// one instance for the originator; a downstream-directed multicast rolls
/// back exactly one upstream instance (the destination). End states with
/// several possible start states branch.
fn multicast_rollback(
    model: &ProtocolModel,
    g: &GlobalState,
    s: SymbolId,
    start: SymbolId,
    stim: StimulusId,
) -> Vec<GlobalState> {
    let downstream_only = model.stimuli[stim].kind == StimulusKind::McastDownstream;
    // end -> possible starts, in post order
    let mut ends: Vec<(SymbolId, Vec<SymbolId>)> = Vec::new();
    for p in &model.rule(stim).post {
        if let Some((a, b)) = p.transition {
            match ends.iter_mut().find(|(e, _)| *e == b) {
                Some((_, starts)) => {
                    if !starts.contains(&a) {
                        starts.push(a);
                    }
                }
                None => ends.push((b, vec![a])),
            }
        }
    }
    // the originator keeps its state
    let src_symbol = model
        .pre_end_states(stim)
        .iter()
        .copied()
        .find(|&e| g.count(e) > 0);

    // per end symbol: how many instances roll and to which start(s)
    struct Roll {
        end: SymbolId,
        count: u16,
        starts: Vec<SymbolId>,
    }
    let mut rolls: Vec<Roll> = Vec::new();
    for (end, starts) in ends {
        let mut count = g.count(end);
        if Some(end) == src_symbol {
            count = count.saturating_sub(1);
        }
        if count == 0 {
            continue;
        }
        if downstream_only && model.states[end].role == gfsm_core::Role::Upstream {
            // only one upstream router (the destination) is rolled back
            count = 1;
        }
        let starts = if end == s { vec![start] } else { starts };
        rolls.push(Roll { end, count, starts });
    }
    // the component being rolled must actually roll
    if !rolls.iter().any(|r| r.end == s) {
        return Vec::new();
    }

    // cartesian product over ambiguous start choices (uniform per symbol)
    let mut news = vec![g.clone()];
    for r in &rolls {
        let mut next = Vec::new();
        for base in &news {
            for &st in &r.starts {
                let mut counts = base.counts().to_vec();
                counts[r.end] -= r.count;
                counts[st] += r.count;
                let candidate = GlobalState::from_counts(counts);
                if !next.contains(&candidate) {
                    next.push(candidate);
                }
            }
        }
        news = next;
    }
    news
}
