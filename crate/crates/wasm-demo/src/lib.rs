//! Browser bindings for the test-synthesis engine: three interactive
//! operations over the bundled dense-mode model, each returning a JSON
//! string the static page renders. Everything runs in the page; there is no
//! server side.

use wasm_bindgen::prelude::*;

use fitg::{Algorithm, SearchConfig};
use fotg::{
    backward_imply, build_dependency_table, build_min_topos, forward_imply,
    interleave_timer_clear, synthesize_global_state, BackwardConfig, BackwardOutcome,
};
use gfsm_core::{FaultSpec, Verdict};

fn verdict_str(v: &Verdict) -> String {
    match v {
        Verdict::Correct => "correct".into(),
        Verdict::Error(c) => format!("error:{}", c.as_str()),
        Verdict::FalseErrorCandidate(c) => format!("false-error:{}", c.as_str()),
    }
}

/// Correct/error state-space counts for 1..=n_max routers under one
/// correctness definition; rows of {n, total, correct, error, correct_pct}.
#[wasm_bindgen]
pub fn count_table(n_max: u32, definition: u8) -> Result<String, JsValue> {
    if !(1..=2).contains(&definition) {
        return Err(JsValue::from_str("definition must be 1 or 2"));
    }
    let rows: Vec<serde_json::Value> = (1..=n_max as u64)
        .map(|n| {
            let c = statespace_analytics::closed_form(n, 10, definition);
            serde_json::json!({
                "n": n,
                "total": c.total.to_string(),
                "correct": c.correct.to_string(),
                "error": c.error.to_string(),
                "correct_pct": c.correct_pct(),
            })
        })
        .collect();
    Ok(serde_json::json!({ "definition": definition, "rows": rows }).to_string())
}

/// Forward search on the bundled model: statistics, the stable error
/// classes, and the first error trace.
#[wasm_bindgen]
pub fn run_search(
    n: u32,
    algorithm: &str,
    fault: &str,
    definition: u8,
) -> Result<String, JsValue> {
    if n == 0 || n > 6 {
        return Err(JsValue::from_str("router count must be 1..=6 in the demo"));
    }
    let alg = Algorithm::parse(algorithm)
        .ok_or_else(|| JsValue::from_str("algorithm: exhaustive, equiv, equiv+ or reduced"))?;
    let m = pim_dm::load().map_err(|e| JsValue::from_str(&e.to_string()))?;
    let def = m.correctness(definition);
    let mut config = SearchConfig::new(n as usize, alg);
    if !fault.is_empty() && fault != "none" {
        let stim = m
            .model
            .stimulus_id(fault)
            .map_err(|e| JsValue::from_str(&e.to_string()))?;
        if !m.model.stimuli[stim].kind.is_message() {
            return Err(JsValue::from_str("only message stimuli can be lost"));
        }
        config.fault = Some(FaultSpec::loss(stim));
    }
    let result =
        fitg::expand_space(&m.model, &def, &config).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let first_trace = result.error_traces.first().map(|t| {
        let mut t = t.clone();
        t.definition = definition;
        t.to_text(&m.model)
    });
    Ok(serde_json::json!({
        "n": n,
        "algorithm": alg.as_str(),
        "stats": {
            "expanded": result.stats.expanded_states,
            "forwards": result.stats.forwards,
            "transitions": result.stats.transitions,
            "errors": result.stats.error_states,
        },
        "error_classes": result.error_classes.iter().map(|e| e.display(&m.model)).collect::<Vec<_>>(),
        "false_errors": result.false_error_classes.iter().map(|e| e.display(&m.model)).collect::<Vec<_>>(),
        "first_trace": first_trace,
    })
    .to_string())
}

/// Fault-oriented walkthrough for one target message: synthesized candidate
/// topologies, forward implication with and without the loss, and the
/// backward chain to an initial state (or unreachability).
#[wasm_bindgen]
pub fn fotg_walkthrough(target: &str, interleave: bool) -> Result<String, JsValue> {
    let m = pim_dm::load().map_err(|e| JsValue::from_str(&e.to_string()))?;
    let name = if target == "Graft" { "Graft_Rcv" } else { target };
    let stim = m
        .model
        .stimulus_id(name)
        .map_err(|e| JsValue::from_str(&e.to_string()))?;
    if !m.model.stimuli[stim].kind.is_message() {
        return Err(JsValue::from_str("pick a message stimulus"));
    }
    let def1 = m.correctness(1);
    let def2 = m.correctness(2);
    let dep = build_dependency_table(&m.model);
    let topos = build_min_topos(&m.model).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let config = BackwardConfig::default();

    let mut candidates = Vec::new();
    for cand in synthesize_global_state(&m.model, &dep, stim) {
        let mut branches = Vec::new();
        if let Ok(fwd) = forward_imply(&m.model, &def1, &def2, &cand, stim, true) {
            for b in &fwd.branches {
                branches.push(serde_json::json!({
                    "fault": b.fault.is_some(),
                    "stable": b.stable.display(&m.model),
                    "verdict": verdict_str(&b.verdict_def2),
                }));
            }
        }
        let (outcome, stats) = backward_imply(&m.model, &dep, &topos, &cand, &config);
        let (reachable, chain) = match outcome {
            BackwardOutcome::Reached(chain) => {
                let (states, stimuli) = chain.folded(&m.model);
                let mut text = states[0].display(&m.model);
                for (i, s) in stimuli.iter().enumerate() {
                    text.push_str(&format!(
                        " --{}--> {}",
                        m.model.stimuli[*s].name,
                        states[i + 1].display(&m.model)
                    ));
                }
                (true, Some(text))
            }
            _ => (false, None),
        };
        candidates.push(serde_json::json!({
            "state": cand.display(&m.model),
            "forward": branches,
            "reachable": reachable,
            "chain": chain,
            "backward_calls": stats.backward_calls,
            "rewind_calls": stats.rewind_calls,
            "backtracks": stats.backtracks,
        }));
    }

    let mut interleavings = Vec::new();
    if interleave {
        let scenarios = interleave_timer_clear(&m.model, &def2, &dep, &topos, stim, &config)
            .map_err(|e| JsValue::from_str(&e.to_string()))?;
        for s in &scenarios {
            interleavings.push(serde_json::json!({
                "clearing": m.model.stimuli[s.clearing_stimulus].name,
                "error_state": s.error_state.display(&m.model),
                "trace": s.trace.to_text(&m.model),
            }));
        }
    }
    Ok(serde_json::json!({
        "target": m.model.stimuli[stim].name,
        "candidates": candidates,
        "interleavings": interleavings,
    })
    .to_string())
}
