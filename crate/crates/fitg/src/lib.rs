//! Fault-independent test generation: forward search from the initial
//! states, with counting-equivalence reductions applied in three stages
//! (equivalent initial states, equivalent visited-state comparison, and
//! redundant-transition elimination). Faults are folded into the transition
//! relation; stable states are checked for correctness and error traces are
//! extracted with their full event sequence.

use std::collections::{HashMap, VecDeque};

use gfsm_core::complete::CompletionBranch;
use gfsm_core::{
    check_correctness, complete_transition, CorrectnessDef, FaultSpec, GlobalState, LossRecord,
    ModelError, OrderedState, ProtocolModel, StimulusId, SymbolId, Trace, TraceMode, TraceStep,
    Verdict,
};

/// Which reduction stages the search applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Ordered initial states, ordered visited set.
    Exhaustive,
    /// Equivalent (multiset) initial states only.
    Equiv,
    /// Plus equivalent visited/working-set comparison.
    EquivPlus,
    /// Plus per-state redundant transition elimination.
    Reduced,
}

impl Algorithm {
    pub fn parse(s: &str) -> Option<Algorithm> {
        match s {
            "exhaustive" => Some(Algorithm::Exhaustive),
            "equiv" => Some(Algorithm::Equiv),
            "equiv+" => Some(Algorithm::EquivPlus),
            "reduced" => Some(Algorithm::Reduced),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Equiv => "equiv",
            Algorithm::EquivPlus => "equiv+",
            Algorithm::Reduced => "reduced",
        }
    }

    fn canonical_visited(self) -> bool {
        matches!(self, Algorithm::EquivPlus | Algorithm::Reduced)
    }

    fn equivalent_inits(self) -> bool {
        !matches!(self, Algorithm::Exhaustive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    BreadthFirst,
    DepthFirst,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub n: usize,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub fault: Option<FaultSpec>,
    /// After a stable error, probe with one data packet; a state that
    /// recovers is downgraded to a false-error candidate.
    pub probe_false_errors: bool,
    /// Stop expanding once this many stable states were visited.
    pub max_expanded: usize,
}

impl SearchConfig {
    pub fn new(n: usize, algorithm: Algorithm) -> Self {
        SearchConfig {
            n,
            algorithm,
            strategy: Strategy::BreadthFirst,
            fault: None,
            probe_false_errors: true,
            max_expanded: 5_000_000,
        }
    }
}

/// Search counters, mirroring the forward-algorithm statistics: stable states
/// expanded, state-machine advances, transient states visited, stable errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded_states: u64,
    pub forwards: u64,
    pub transitions: u64,
    pub error_states: u64,
}

#[derive(Debug)]
pub struct SearchResult {
    pub stats: SearchStats,
    /// Canonical forms of hard errors, deduplicated.
    pub error_classes: Vec<GlobalState>,
    /// Canonical forms downgraded by the data-packet probe.
    pub false_error_classes: Vec<GlobalState>,
    pub error_traces: Vec<Trace>,
    /// Canonical forms of every state visited, stable and transient, for use
    /// as a reachability oracle.
    pub visited_canonical: Vec<GlobalState>,
    /// Search hit `max_expanded` and holds partial results only.
    pub truncated: bool,
}

/// All |IS|^n ordered initial assignments.
pub fn enum_init_exhaustive(n: usize, initial: &[SymbolId]) -> Vec<OrderedState> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, initial: &[SymbolId], cur: &mut Vec<SymbolId>, out: &mut Vec<OrderedState>) {
        if cur.len() == n {
            out.push(OrderedState::new(cur.clone()));
            return;
        }
        for &s in initial {
            cur.push(s);
            rec(n, initial, cur, out);
            cur.pop();
        }
    }
    rec(n, initial, &mut cur, &mut out);
    out
}

/// The C(n+|IS|-1, n) equivalent initial multisets, canonical order.
pub fn enum_init_equiv(
    alphabet_len: usize,
    n: usize,
    initial: &[SymbolId],
) -> Vec<GlobalState> {
    let mut out = Vec::new();
    let mut counts = vec![0u16; alphabet_len];
    fn rec(
        n_left: usize,
        idx: usize,
        initial: &[SymbolId],
        counts: &mut Vec<u16>,
        out: &mut Vec<GlobalState>,
    ) {
        if idx == initial.len() {
            if n_left == 0 {
                out.push(GlobalState::from_counts(counts.clone()));
            }
            return;
        }
        if idx == initial.len() - 1 {
            counts[initial[idx]] = n_left as u16;
            out.push(GlobalState::from_counts(counts.clone()));
            counts[initial[idx]] = 0;
            return;
        }
        for k in 0..=n_left {
            counts[initial[idx]] = k as u16;
            rec(n_left - k, idx + 1, initial, counts, out);
            counts[initial[idx]] = 0;
        }
    }
    if n == 0 {
        return vec![GlobalState::from_counts(counts)];
    }
    rec(n, 0, initial, &mut counts, &mut out);
    out
}

/// Search node: the ordered state plus whether the single fault is spent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeKey {
    state: Vec<u16>,
    fault_used: bool,
}

#[derive(Debug, Clone)]
struct Node {
    state: OrderedState,
    fault_used: bool,
}

#[derive(Debug, Clone)]
struct Edge {
    parent: Option<NodeKey>,
    stimulus: StimulusId,
    actor: usize,
    fault: Option<LossRecord>,
    stable: OrderedState,
}

fn node_key(model: &ProtocolModel, alg: Algorithm, node: &Node) -> NodeKey {
    let state = if alg.canonical_visited() {
        node.state.canonical(model.states.len()).counts().to_vec()
    } else {
        node.state.symbols().iter().map(|&s| s as u16).collect()
    };
    NodeKey {
        state,
        fault_used: node.fault_used,
    }
}

/// Forward reachability search per the configured algorithm. Every stable
/// state reached by a complete transition is checked for correctness; error
/// traces replay from an initial state.
pub fn expand_space(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    config: &SearchConfig,
) -> Result<SearchResult, ModelError> {
    let externals = model.external_stimuli();
    let inits: Vec<Node> = if config.algorithm.equivalent_inits() {
        enum_init_equiv(model.states.len(), config.n, &model.initial_symbols())
            .into_iter()
            .map(|g| Node {
                state: OrderedState::representative(&g),
                fault_used: false,
            })
            .collect()
    } else {
        enum_init_exhaustive(config.n, &model.initial_symbols())
            .into_iter()
            .map(|state| Node {
                state,
                fault_used: false,
            })
            .collect()
    };

    let mut stats = SearchStats::default();
    let mut visited: HashMap<NodeKey, Edge> = HashMap::new();
    let mut work: VecDeque<Node> = VecDeque::new();
    let mut error_classes: Vec<GlobalState> = Vec::new();
    let mut false_error_classes: Vec<GlobalState> = Vec::new();
    let mut error_traces: Vec<Trace> = Vec::new();
    let mut error_keys: Vec<(NodeKey, Verdict)> = Vec::new();
    let mut visited_canonical: Vec<GlobalState> = Vec::new();
    let mut truncated = false;

    let mut crash_stim: Option<StimulusId> = None;
    if let Some(f) = &config.fault {
        if let gfsm_core::FaultKind::Crash { .. } = f.kind {
            crash_stim = model.stimulus_id("Crash").ok();
            if crash_stim.is_none() {
                return Err(ModelError::Invalid(
                    "crash fault requires the crash extension".into(),
                ));
            }
        }
    }

    for init in inits {
        let key = node_key(model, config.algorithm, &init);
        if visited.contains_key(&key) {
            continue;
        }
        visited.insert(
            key,
            Edge {
                parent: None,
                stimulus: usize::MAX,
                actor: 0,
                fault: None,
                stable: init.state.clone(),
            },
        );
        note_canonical(model, &init.state, &mut visited_canonical);
        work.push_back(init);
    }

    while let Some(node) = match config.strategy {
        Strategy::BreadthFirst => work.pop_front(),
        Strategy::DepthFirst => work.pop_back(),
    } {
        stats.expanded_states += 1;
        if stats.expanded_states as usize > config.max_expanded {
            truncated = true;
            break;
        }
        let node_k = node_key(model, config.algorithm, &node);
        // redundant-transition elimination: identical (router state, stimulus)
        // pairs expand once per state
        let mut tried: Vec<(SymbolId, StimulusId)> = Vec::new();

        let mut stimuli = externals.clone();
        if let Some(c) = crash_stim {
            if !stimuli.contains(&c) {
                stimuli.push(c);
            }
        }
        for &ext in &stimuli {
            for actor in 0..config.n {
                let actor_sym = node.state.get(actor);
                if config.algorithm == Algorithm::Reduced
                    && tried.contains(&(actor_sym, ext))
                {
                    continue;
                }
                // a crash consumes the fault budget like any other fault
                let is_crash = Some(ext) == crash_stim;
                if is_crash {
                    if node.fault_used {
                        continue;
                    }
                    if let Some(FaultSpec {
                        kind: gfsm_core::FaultKind::Crash {
                            target_symbol: Some(sym),
                        },
                        ..
                    }) = config.fault
                    {
                        if actor_sym != sym {
                            continue;
                        }
                    }
                }
                if config.algorithm == Algorithm::Reduced {
                    tried.push((actor_sym, ext));
                }
                let budget_left = !node.fault_used;
                let branches = match complete_transition(
                    model,
                    &node.state,
                    ext,
                    actor,
                    config.fault.as_ref(),
                    budget_left,
                ) {
                    Ok(b) => b,
                    Err(ModelError::NotEnabled(_)) => continue,
                    Err(e) => return Err(e),
                };
                stats.forwards += 1;
                let mut seen_branch: Vec<NodeKey> = Vec::new();
                for b in branches {
                    stats.transitions += b.transients as u64;
                    note_branch_canonicals(model, &b, &mut visited_canonical);
                    let fault_used = node.fault_used || b.fault.is_some() || is_crash;
                    let child = Node {
                        state: b.stable.clone(),
                        fault_used,
                    };
                    let child_k = node_key(model, config.algorithm, &child);
                    if child_k.state == node_k.state && child_k.fault_used == node_k.fault_used {
                        continue;
                    }
                    if seen_branch.contains(&child_k) || visited.contains_key(&child_k) {
                        continue;
                    }
                    seen_branch.push(child_k.clone());
                    let fault_rec = if is_crash {
                        Some(LossRecord::Crash { router: actor })
                    } else {
                        b.fault.clone()
                    };
                    visited.insert(
                        child_k.clone(),
                        Edge {
                            parent: Some(node_k.clone()),
                            stimulus: ext,
                            actor,
                            fault: fault_rec,
                            stable: b.stable.clone(),
                        },
                    );
                    let canon = b.stable.canonical(model.states.len());
                    let verdict = check_correctness(model, &canon, def)?;
                    if verdict.is_error() {
                        let class = verdict_class(&verdict);
                        let downgrade = config.probe_false_errors
                            && probe_recovers(model, def, &b.stable)?;
                        let final_verdict = if downgrade {
                            Verdict::FalseErrorCandidate(class)
                        } else {
                            verdict
                        };
                        let bucket = if downgrade {
                            &mut false_error_classes
                        } else {
                            &mut error_classes
                        };
                        if !bucket.contains(&canon) {
                            bucket.push(canon.clone());
                            error_keys.push((child_k.clone(), final_verdict.clone()));
                        }
                        if matches!(final_verdict, Verdict::Error(_)) {
                            stats.error_states += 1;
                        }
                    }
                    work.push_back(child);
                }
            }
        }
    }

    for (key, verdict) in error_keys {
        error_traces.push(build_trace(model, &visited, &key, verdict, config)?);
    }
    // deterministic output order
    error_classes.sort();
    false_error_classes.sort();
    visited_canonical.sort();
    visited_canonical.dedup();

    Ok(SearchResult {
        stats,
        error_classes,
        false_error_classes,
        error_traces,
        visited_canonical,
        truncated,
    })
}

fn verdict_class(v: &Verdict) -> gfsm_core::ErrorClass {
    match v {
        Verdict::Error(c) | Verdict::FalseErrorCandidate(c) => *c,
        Verdict::Correct => unreachable!(),
    }
}

fn note_canonical(model: &ProtocolModel, s: &OrderedState, out: &mut Vec<GlobalState>) {
    out.push(s.canonical(model.states.len()));
}

fn note_branch_canonicals(
    model: &ProtocolModel,
    b: &CompletionBranch,
    out: &mut Vec<GlobalState>,
) {
    for step in &b.steps {
        out.push(step.after.canonical(model.states.len()));
    }
    out.push(b.stable.canonical(model.states.len()));
}

/// One data packet from any forwarder-ish router; true when some probe lands
/// in a correct stable state (the violation repairs itself with the next
/// packet sent).
fn probe_recovers(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    state: &OrderedState,
) -> Result<bool, ModelError> {
    let spkt = match model.stimulus_id("SPkt") {
        Ok(s) => s,
        Err(_) => return Ok(false),
    };
    for actor in state.routers() {
        match complete_transition(model, state, spkt, actor, None, false) {
            Ok(branches) => {
                for b in branches {
                    let canon = b.stable.canonical(model.states.len());
                    if check_correctness(model, &canon, def)? == Verdict::Correct {
                        return Ok(true);
                    }
                }
            }
            Err(ModelError::NotEnabled(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

fn build_trace(
    model: &ProtocolModel,
    visited: &HashMap<NodeKey, Edge>,
    key: &NodeKey,
    verdict: Verdict,
    config: &SearchConfig,
) -> Result<Trace, ModelError> {
    let mut chain: Vec<&Edge> = Vec::new();
    let mut cur = key.clone();
    loop {
        let edge = visited
            .get(&cur)
            .ok_or_else(|| ModelError::Invalid("broken trace chain".into()))?;
        chain.push(edge);
        match &edge.parent {
            Some(p) => cur = p.clone(),
            None => break,
        }
    }
    chain.reverse();
    // Re-run the chain from the canonical representative so actor indices in
    // the emitted trace are valid against the canonical initial state.
    // Counting equivalence guarantees an equivalent step exists.
    let initial = chain[0].stable.canonical(model.states.len());
    let mut state = OrderedState::representative(&initial);
    let mut steps = Vec::new();
    for e in &chain[1..] {
        let target = e.stable.canonical(model.states.len());
        let (actor, fault, next) = find_equivalent_step(model, &state, e, &target, config)?;
        steps.push(TraceStep {
            stimulus: e.stimulus,
            actor,
            fault,
            inserted: false,
            after: target,
        });
        state = next;
    }
    Ok(Trace {
        model: model.name.clone(),
        n: config.n,
        definition: 0, // caller stamps the definition in use
        mode: TraceMode::Stable,
        initial,
        steps,
        verdict,
    })
}

fn find_equivalent_step(
    model: &ProtocolModel,
    state: &OrderedState,
    edge: &Edge,
    target: &GlobalState,
    config: &SearchConfig,
) -> Result<(usize, Option<LossRecord>, OrderedState), ModelError> {
    let want_fault = edge.fault.is_some();
    let is_crash = matches!(edge.fault, Some(LossRecord::Crash { .. }));
    let mut actors: Vec<usize> = state.routers().collect();
    // recorded actor first: it is almost always already valid
    if edge.actor < actors.len() {
        actors.retain(|&a| a != edge.actor);
        actors.insert(0, edge.actor);
    }
    for actor in actors {
        let fault = if want_fault && !is_crash {
            config.fault.as_ref()
        } else {
            None
        };
        let branches =
            match complete_transition(model, state, edge.stimulus, actor, fault, want_fault) {
                Ok(b) => b,
                Err(ModelError::NotEnabled(_)) => continue,
                Err(e) => return Err(e),
            };
        for b in branches {
            if b.stable.canonical(model.states.len()) != *target {
                continue;
            }
            if b.fault.is_some() != (want_fault && !is_crash) {
                continue;
            }
            let fault_rec = if is_crash {
                Some(LossRecord::Crash { router: actor })
            } else {
                b.fault.clone()
            };
            return Ok((actor, fault_rec, b.stable));
        }
    }
    Err(ModelError::Invalid(
        "no equivalent step during trace canonicalization".into(),
    ))
}

/// Run all four algorithms over a range of router counts (fault-free) and
/// tabulate their statistics.
pub fn compare_algorithms(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<(usize, Algorithm, SearchStats)>, ModelError> {
    let mut rows = Vec::new();
    for n in n_range {
        for alg in [
            Algorithm::Exhaustive,
            Algorithm::Equiv,
            Algorithm::EquivPlus,
            Algorithm::Reduced,
        ] {
            let config = SearchConfig::new(n, alg);
            let result = expand_space(model, def, &config)?;
            rows.push((n, alg, result.stats));
        }
    }
    Ok(rows)
}
