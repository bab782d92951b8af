//! The fault-oriented generator against the bundled model: derivation
//! round-trips, minimum topologies, synthesis, forward/backward implication
//! and the documented walkthrough chains.

use fotg::{
    backward_imply, build_dependency_table, build_min_topos, check_consistency, check_min_topo,
    derived_pre_pairs, forward_imply, synthesize_global_state, BackwardConfig, BackwardOutcome,
};
use gfsm_core::{GlobalState, OrderedState, Verdict};
use pim_dm::PimDmModel;

fn model() -> PimDmModel {
    pim_dm::load().unwrap()
}

fn canon(m: &PimDmModel, names: &[&str]) -> GlobalState {
    OrderedState::new(
        names
            .iter()
            .map(|n| m.model.symbol_id(n).unwrap())
            .collect(),
    )
    .canonical(m.model.states.len())
}

fn pairs(m: &PimDmModel, list: &[(&str, &str)]) -> Vec<(usize, usize)> {
    list.iter()
        .map(|(stim, state)| {
            (
                m.model.stimulus_id(stim).unwrap(),
                m.model.symbol_id(state).unwrap(),
            )
        })
        .collect()
}

#[test]
fn derived_preconditions_reproduce_the_table_column() {
    let m = model();
    let want: &[(&str, &[(&str, &str)])] = &[
        ("Join", &[("Prune", "NH")]),
        ("Prune", &[("FPkt", "NC"), ("L", "NC")]),
        ("Graft_Tx", &[("HJ", "NH"), ("Rtx", "NH")]),
        ("Graft_Rcv", &[("Graft_Tx", "NH_Rtx")]),
        ("GAck", &[("Graft_Rcv", "F")]),
        ("Assert", &[("FPkt", "F")]),
        ("FPkt", &[("SPkt", "F")]),
    ];
    for (stim, expected) in want {
        let id = m.model.stimulus_id(stim).unwrap();
        let mut got = derived_pre_pairs(&m.model, id);
        let mut want = pairs(&m, expected);
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want, "pre-conditions for {}", stim);
    }
    // external and timer rules derive nothing
    for stim in ["SPkt", "HJ", "L", "Rtx", "Del"] {
        let id = m.model.stimulus_id(stim).unwrap();
        assert!(derived_pre_pairs(&m.model, id).is_empty(), "{}", stim);
    }
}

#[test]
fn dependency_table_matches_row_for_row() {
    let m = model();
    let dep = build_dependency_table(&m.model);
    let row = |state: &str| -> Vec<(usize, usize)> {
        let s = m.model.symbol_id(state).unwrap();
        let mut v: Vec<(usize, usize)> = dep.steps(s).map(|(a, stim)| (a, stim)).collect();
        v.sort_unstable();
        v
    };
    let expect = |list: &[(&str, &str)]| -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = list
            .iter()
            .map(|(start, stim)| {
                (
                    m.model.symbol_id(start).unwrap(),
                    m.model.stimulus_id(stim).unwrap(),
                )
            })
            .collect();
        v.sort_unstable();
        v
    };
    assert_eq!(
        row("F"),
        expect(&[
            ("EU", "FPkt"),
            ("F_Del", "Join"),
            ("NF", "Join"),
            ("NF", "Graft_Rcv"),
            ("EU", "SPkt"),
        ])
    );
    assert_eq!(row("F_Del"), expect(&[("F", "Prune")]));
    assert_eq!(row("NF"), expect(&[("F_Del", "Del"), ("F", "Assert")]));
    assert_eq!(
        row("NH"),
        expect(&[
            ("NH_Rtx", "Rtx"),
            ("NH_Rtx", "GAck"),
            ("NC", "HJ"),
            ("M", "FPkt"),
            ("ED", "FPkt"),
        ])
    );
    assert_eq!(row("NH_Rtx"), expect(&[("NH", "Graft_Tx")]));
    assert_eq!(
        row("NC"),
        expect(&[("NM", "FPkt"), ("NH_Rtx", "L"), ("NH", "L")])
    );
    assert_eq!(row("M"), expect(&[("NM", "HJ")]));
    assert_eq!(row("NM"), expect(&[("M", "L")]));
    // initial markers: the initial symbols and the producer-less empty state
    for s in ["EU", "ED", "NM"] {
        assert!(
            dep.has_initial_marker(m.model.symbol_id(s).unwrap()),
            "{} lacks I.S. marker",
            s
        );
    }
    assert!(row("EU").is_empty());
    assert!(row("ED").is_empty());
    for s in ["F", "F_Del", "NF", "NH", "NH_Rtx", "NC", "M"] {
        assert!(
            !dep.has_initial_marker(m.model.symbol_id(s).unwrap()),
            "{} wrongly marked I.S.",
            s
        );
    }
}

#[test]
fn minimum_topologies_for_the_case_study() {
    let m = model();
    let topos = build_min_topos(&m.model).unwrap();
    let frags = |stim: &str| -> Vec<GlobalState> {
        let mut v = topos
            .for_stimulus(m.model.stimulus_id(stim).unwrap())
            .to_vec();
        v.sort();
        v
    };
    let sorted = |mut v: Vec<GlobalState>| {
        v.sort();
        v
    };
    assert_eq!(frags("FPkt"), vec![canon(&m, &["F"])]);
    assert_eq!(
        frags("Prune"),
        sorted(vec![canon(&m, &["NC"]), canon(&m, &["F", "NC"])])
    );
    assert_eq!(
        frags("Join"),
        sorted(vec![canon(&m, &["NC", "NH"]), canon(&m, &["F", "NC", "NH"])])
    );
    assert_eq!(frags("Assert"), vec![canon(&m, &["F", "F"])]);
    assert_eq!(frags("Graft_Rcv"), vec![canon(&m, &["NH_Rtx"])]);
    assert_eq!(frags("GAck"), vec![canon(&m, &["NH_Rtx", "F"])]);
}

#[test]
fn min_topo_check_examples() {
    let m = model();
    let topos = build_min_topos(&m.model).unwrap();
    let join = m.model.stimulus_id("Join").unwrap();
    let assert_s = m.model.stimulus_id("Assert").unwrap();
    assert!(!check_min_topo(&topos, &canon(&m, &["NH", "NF"]), join));
    assert!(!check_min_topo(&topos, &canon(&m, &["F", "NH", "NC"]), assert_s));
    assert!(check_min_topo(&topos, &canon(&m, &["F", "F", "NH"]), assert_s));
}

#[test]
fn consistency_check_examples() {
    let m = model();
    let fpkt = m.model.stimulus_id("FPkt").unwrap();
    assert!(!check_consistency(&m.model, fpkt, &canon(&m, &["F", "NF", "EU"])));
    assert!(check_consistency(&m.model, fpkt, &canon(&m, &["F", "NF", "NC"])));
    let empty = GlobalState::empty(m.model.states.len());
    for stim in 0..m.model.stimuli.len() {
        assert!(check_consistency(&m.model, stim, &empty));
    }
}

#[test]
fn synthesis_walkthroughs() {
    let m = model();
    let dep = build_dependency_table(&m.model);
    let join = synthesize_global_state(&m.model, &dep, m.model.stimulus_id("Join").unwrap());
    assert!(join.contains(&canon(&m, &["NH", "NF", "NC"])), "{:?}", join);
    assert!(join.contains(&canon(&m, &["NH", "F_Del", "NC"])));
    let assert_c =
        synthesize_global_state(&m.model, &dep, m.model.stimulus_id("Assert").unwrap());
    assert_eq!(assert_c, vec![canon(&m, &["F", "F"])]);
    let graft =
        synthesize_global_state(&m.model, &dep, m.model.stimulus_id("Graft_Rcv").unwrap());
    assert_eq!(graft, vec![canon(&m, &["NF", "NH_Rtx"])]);
    let prune = synthesize_global_state(&m.model, &dep, m.model.stimulus_id("Prune").unwrap());
    assert!(prune.contains(&canon(&m, &["NC", "F"])), "{:?}", prune);
}

#[test]
fn join_forward_implication_with_and_without_loss() {
    let m = model();
    let def1 = m.correctness(1);
    let def2 = m.correctness(2);
    let join = m.model.stimulus_id("Join").unwrap();
    let g = canon(&m, &["NH", "NF", "NC"]);
    let fwd = forward_imply(&m.model, &def1, &def2, &g, join, true).unwrap();
    let clean = fwd.branches.iter().find(|b| b.fault.is_none()).unwrap();
    assert_eq!(clean.stable, canon(&m, &["NH", "F", "NC"]));
    assert_eq!(clean.verdict_def2, Verdict::Correct);
    let lossy = fwd.branches.iter().find(|b| b.fault.is_some()).unwrap();
    assert_eq!(lossy.stable, canon(&m, &["NH", "NF", "NC"]));
    assert!(lossy.verdict_def2.is_error());
}

#[test]
fn assert_forward_implication_errs_without_loss() {
    let m = model();
    let def1 = m.correctness(1);
    let def2 = m.correctness(2);
    let assert_s = m.model.stimulus_id("Assert").unwrap();
    let g = canon(&m, &["F", "F"]);
    let fwd = forward_imply(&m.model, &def1, &def2, &g, assert_s, false).unwrap();
    assert_eq!(fwd.branches.len(), 1);
    assert_eq!(fwd.branches[0].stable, canon(&m, &["F", "NF"]));
    assert!(fwd.branches[0].verdict_def2.is_error());
    assert!(fwd.branches[0].verdict_def1.is_error());
}

#[test]
fn graft_loss_recovers_without_interleaving() {
    let m = model();
    let def1 = m.correctness(1);
    let def2 = m.correctness(2);
    let graft = m.model.stimulus_id("Graft_Rcv").unwrap();
    let g = canon(&m, &["NF", "NH_Rtx"]);
    let fwd = forward_imply(&m.model, &def1, &def2, &g, graft, true).unwrap();
    assert!(fwd.branches.iter().any(|b| b.fault.is_some()));
    for b in &fwd.branches {
        assert_eq!(b.stable, canon(&m, &["NH", "F"]), "fault={:?}", b.fault);
        assert_eq!(b.verdict_def2, Verdict::Correct);
    }
}

#[test]
fn join_backward_chain_is_the_documented_one() {
    let m = model();
    let dep = build_dependency_table(&m.model);
    let topos = build_min_topos(&m.model).unwrap();
    let g = canon(&m, &["NH", "NF", "NC"]);
    let (outcome, stats) =
        backward_imply(&m.model, &dep, &topos, &g, &BackwardConfig::default());
    let BackwardOutcome::Reached(chain) = outcome else {
        panic!("expected Reached, stats {:?}", stats);
    };
    let (states, stimuli) = chain.folded(&m.model);
    let names: Vec<&str> = stimuli
        .iter()
        .map(|&s| m.model.stimuli[s].name.as_str())
        .collect();
    assert_eq!(names, ["HJ", "SPkt", "FPkt", "Prune"]);
    assert_eq!(
        states,
        vec![
            canon(&m, &["NM", "EU", "NM"]),
            canon(&m, &["M", "EU", "NM"]),
            canon(&m, &["M", "F", "NM"]),
            canon(&m, &["NH", "F", "NC"]),
            canon(&m, &["NH", "NF", "NC"]),
        ]
    );
}

#[test]
fn assert_backward_chain_is_the_documented_one() {
    let m = model();
    let dep = build_dependency_table(&m.model);
    let topos = build_min_topos(&m.model).unwrap();
    let g = canon(&m, &["F", "F"]);
    let (outcome, _) = backward_imply(&m.model, &dep, &topos, &g, &BackwardConfig::default());
    let BackwardOutcome::Reached(chain) = outcome else {
        panic!("expected Reached");
    };
    let (states, stimuli) = chain.folded(&m.model);
    let names: Vec<&str> = stimuli
        .iter()
        .map(|&s| m.model.stimuli[s].name.as_str())
        .collect();
    assert_eq!(names, ["SPkt", "FPkt"]);
    assert_eq!(
        states,
        vec![
            canon(&m, &["EU", "EU"]),
            canon(&m, &["EU", "F"]),
            canon(&m, &["F", "F"]),
        ]
    );
}

#[test]
fn backward_chains_replay_forward() {
    let m = model();
    let dep = build_dependency_table(&m.model);
    let topos = build_min_topos(&m.model).unwrap();
    for target in ["Join", "Assert", "Graft_Rcv", "Prune"] {
        let id = m.model.stimulus_id(target).unwrap();
        for candidate in synthesize_global_state(&m.model, &dep, id) {
            let (outcome, _) =
                backward_imply(&m.model, &dep, &topos, &candidate, &BackwardConfig::default());
            if let BackwardOutcome::Reached(chain) = outcome {
                let steps =
                    fotg::raw_steps_for_chain(&m.model, &chain.states, &chain.stimuli);
                assert!(steps.is_ok(), "{} candidate {:?}", target, candidate);
            }
        }
    }
}

#[test]
fn two_downstream_routers_alone_are_unreachable() {
    let m = model();
    let dep = build_dependency_table(&m.model);
    let topos = build_min_topos(&m.model).unwrap();
    // NH requires forwarding history; with both routers downstream there is
    // no upstream to provide it
    let g = canon(&m, &["NH", "NC"]);
    let (outcome, _) = backward_imply(&m.model, &dep, &topos, &g, &BackwardConfig::default());
    assert!(matches!(outcome, BackwardOutcome::Unreachable));
}

#[test]
fn reachability_agrees_with_the_forward_oracle() {
    let m = model();
    let dep = build_dependency_table(&m.model);
    let topos = build_min_topos(&m.model).unwrap();
    // the forward oracle: everything visited (stable or transient) at size n
    let def = m.correctness(2);
    let oracle = |n: usize| {
        let config = fitg::SearchConfig::new(n, fitg::Algorithm::EquivPlus);
        fitg::expand_space(&m.model, &def, &config).unwrap().visited_canonical
    };
    let mut oracles = std::collections::HashMap::new();
    for target in ["Join", "Prune", "Assert", "Graft_Rcv"] {
        let id = m.model.stimulus_id(target).unwrap();
        for candidate in synthesize_global_state(&m.model, &dep, id) {
            let n = candidate.routers();
            if n > 4 {
                continue;
            }
            let visited = oracles.entry(n).or_insert_with(|| oracle(n));
            let reachable_fwd = visited.contains(&candidate);
            let (outcome, _) =
                backward_imply(&m.model, &dep, &topos, &candidate, &BackwardConfig::default());
            let reachable_bwd = matches!(outcome, BackwardOutcome::Reached(_));
            assert_eq!(
                reachable_bwd, reachable_fwd,
                "{} candidate {} disagree",
                target,
                candidate.display(&m.model)
            );
        }
    }
}
