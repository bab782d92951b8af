//! `stress` — test synthesis for multicast-style protocol models on a LAN.
//!
//! Subcommands: `fitg` (forward search), `fotg` (fault-oriented synthesis),
//! `count` (state-space accounting), `compare` (algorithm statistics),
//! `replay` (re-execute an emitted trace). Exit codes: 0 when a run verifies
//! clean, 10 when error tests were generated, 1 on usage or model failure.

mod output;
mod source;

use clap::{Args, Parser, Subcommand};

use fitg::{Algorithm, SearchConfig, Strategy};
use fotg::{
    backward_imply, build_dependency_table, build_min_topos, crash_analysis,
    interleave_timer_clear, raw_steps_for_chain, realize_raw_steps, BackwardConfig,
    BackwardOutcome, CrashClassification,
};
use gfsm_core::{FaultSpec, ModelError, OrderedState, Trace, TraceMode, Verdict};
use source::LoadedModel;

#[derive(Parser)]
#[command(name = "stress", version, about = "Protocol test synthesis over LAN models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fault-independent test generation: forward reachability search.
    Fitg(FitgArgs),
    /// Fault-oriented test generation: synthesize topology and events per fault.
    Fotg(FotgArgs),
    /// Count total/correct/error state spaces.
    Count(CountArgs),
    /// Run all four search algorithms over a range of router counts.
    Compare(CompareArgs),
    /// Re-execute an emitted trace file and confirm its verdict.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct FitgArgs {
    /// Model name or path; `pim-dm` is bundled. $STRESS_MODEL_PATH is searched.
    #[arg(long, default_value = "pim-dm")]
    model: String,
    #[arg(long)]
    routers: usize,
    /// exhaustive | equiv | equiv+ | reduced
    #[arg(long, default_value = "reduced")]
    algorithm: String,
    /// loss:STIMULUS or crash:STATE
    #[arg(long)]
    fault: Option<String>,
    /// Correctness definition (1 or 2).
    #[arg(long, default_value_t = 2)]
    definition: u8,
    /// bfs | dfs
    #[arg(long, default_value = "bfs")]
    strategy: String,
    /// Keep stable violations that one data packet repairs as hard errors.
    #[arg(long)]
    no_probe: bool,
    /// Add the crash extension rule to the model.
    #[arg(long)]
    enable_crash: bool,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct FotgArgs {
    #[arg(long, default_value = "pim-dm")]
    model: String,
    /// Target stimulus for loss faults (alias: Graft for the graft message),
    /// or target state symbol for crash faults.
    #[arg(long)]
    target: String,
    /// loss | crash
    #[arg(long, default_value = "loss")]
    fault: String,
    /// Also synthesize timer-clearing interleavings for the target.
    #[arg(long)]
    interleave: bool,
    /// Rewind-call budget for backward implication.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 2)]
    definition: u8,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long, default_value = "pim-dm")]
    model: String,
    #[arg(long)]
    routers_max: u64,
    /// 1 | 2 | both
    #[arg(long, default_value = "both")]
    definition: String,
    /// Append brute-force columns and an agreement flag (n <= 8).
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value = "pim-dm")]
    model: String,
    /// Inclusive range, e.g. 2..5
    #[arg(long)]
    routers: String,
    #[arg(long, default_value_t = 2)]
    definition: u8,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long, default_value = "pim-dm")]
    model: String,
    #[arg(long)]
    trace: std::path::PathBuf,
    #[arg(long)]
    enable_crash: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's own help/version paths exit 0
            if e.use_stderr() {
                eprintln!("{}", e);
                std::process::exit(1);
            }
            print!("{}", e);
            std::process::exit(0);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.cmd {
        Cmd::Fitg(a) => cmd_fitg(a),
        Cmd::Fotg(a) => cmd_fotg(a),
        Cmd::Count(a) => cmd_count(a),
        Cmd::Compare(a) => cmd_compare(a),
        Cmd::Replay(a) => cmd_replay(a),
    }
}

fn parse_fault(loaded: &LoadedModel, text: &str) -> Result<(FaultSpec, bool), String> {
    if let Some(stim) = text.strip_prefix("loss:") {
        let id = loaded.stimulus(stim)?;
        if !loaded.model().stimuli[id].kind.is_message() {
            return Err(format!(
                "`{}` is a local event and cannot be lost; message stimuli: {}",
                stim,
                loaded.message_stimuli().join(", ")
            ));
        }
        Ok((FaultSpec::loss(id), false))
    } else if let Some(state) = text.strip_prefix("crash:") {
        let sym = loaded.symbol(state)?;
        Ok((FaultSpec::crash(Some(sym)), true))
    } else {
        Err(format!(
            "fault must be loss:STIMULUS or crash:STATE, got `{}`",
            text
        ))
    }
}

fn cmd_fitg(a: FitgArgs) -> Result<i32, String> {
    if a.routers == 0 {
        return Err("--routers must be at least 1".into());
    }
    let algorithm = Algorithm::parse(&a.algorithm).ok_or_else(|| {
        format!(
            "unknown algorithm `{}`; valid: exhaustive, equiv, equiv+, reduced",
            a.algorithm
        )
    })?;
    // crash faults need the crash extension in the model
    let wants_crash = a.fault.as_deref().map(|f| f.starts_with("crash:")) == Some(true);
    let loaded = source::load(&a.model, a.enable_crash || wants_crash)?;
    let fault = a
        .fault
        .as_deref()
        .map(|f| parse_fault(&loaded, f))
        .transpose()?
        .map(|(f, _)| f);
    let def = loaded.correctness(a.definition)?;
    let mut config = SearchConfig::new(a.routers, algorithm);
    config.strategy = match a.strategy.as_str() {
        "bfs" => Strategy::BreadthFirst,
        "dfs" => Strategy::DepthFirst,
        other => return Err(format!("unknown strategy `{}`; valid: bfs, dfs", other)),
    };
    config.fault = fault;
    config.probe_false_errors = !a.no_probe;
    let result = fitg::expand_space(loaded.model(), &def, &config).map_err(|e| e.to_string())?;

    let model = loaded.model();
    println!(
        "fitg: model={} n={} algorithm={} definition={}",
        model.name,
        a.routers,
        algorithm.as_str(),
        a.definition
    );
    println!(
        "  expanded={} forwards={} transitions={} errors={}",
        result.stats.expanded_states,
        result.stats.forwards,
        result.stats.transitions,
        result.stats.error_states
    );
    for e in &result.error_classes {
        println!("  error class {}", e.display(model));
    }
    for e in &result.false_error_classes {
        println!("  false-error candidate {}", e.display(model));
    }
    if result.truncated {
        println!("  (truncated at the expansion budget; partial results)");
    }

    if let Some(dir) = &a.out {
        let mut traces = String::new();
        for t in &result.error_traces {
            let mut t = t.clone();
            t.definition = a.definition;
            traces.push_str(&t.to_text(model));
            traces.push('\n');
        }
        let stats_csv = format!(
            "n,algorithm,expanded,forwards,transitions,errors\n{},{},{},{},{},{}\n",
            a.routers,
            algorithm.as_str(),
            result.stats.expanded_states,
            result.stats.forwards,
            result.stats.transitions,
            result.stats.error_states
        );
        let outputs = output::write_outputs(dir, &[("traces.txt", &traces), ("stats.csv", &stats_csv)])?;
        output::write_manifest(
            dir,
            "fitg",
            &a.model,
            &[
                ("routers", a.routers.to_string()),
                ("algorithm", algorithm.as_str().into()),
                ("definition", a.definition.to_string()),
                ("strategy", a.strategy.clone()),
                ("fault", a.fault.clone().unwrap_or_default()),
            ],
            &outputs,
        )?;
    }
    Ok(if result.error_classes.is_empty() { 0 } else { 10 })
}

fn cmd_fotg(a: FotgArgs) -> Result<i32, String> {
    let crash_mode = a.fault == "crash";
    if !crash_mode && a.fault != "loss" {
        return Err(format!("fault must be loss or crash, got `{}`", a.fault));
    }
    let loaded = source::load(&a.model, crash_mode)?;
    let model = loaded.model();
    let def1 = loaded.correctness(1).unwrap_or_else(|_| loaded.correctness(a.definition).unwrap());
    let def2 = loaded.correctness(2).unwrap_or_else(|_| loaded.correctness(a.definition).unwrap());
    let def = loaded.correctness(a.definition)?;
    let dep = build_dependency_table(model);
    let topos = build_min_topos(model).map_err(|e| e.to_string())?;
    let config = BackwardConfig { budget: a.budget };

    let mut errors_found = false;
    let mut stats_csv = String::from("target,candidate,reachable,backwardCalls,rewindCalls,backtracks\n");
    let mut traces = String::new();
    let mut candidates_txt = String::new();

    if crash_mode {
        let sym = loaded.symbol(&a.target)?;
        let crash = loaded.stimulus("Crash")?;
        let scenarios =
            crash_analysis(model, &def, &dep, sym, crash).map_err(|e| e.to_string())?;
        println!(
            "fotg crash analysis: state {} — {} scenario(s)",
            a.target,
            scenarios.len()
        );
        for s in &scenarios {
            let class = match s.classification {
                CrashClassification::Recovery => "recovery",
                CrashClassification::PersistentError => "persistent-error",
            };
            println!(
                "  pre {} -> post {} [{}]{}",
                s.pre.display(model),
                s.post_crash.display(model),
                class,
                s.membership_error
                    .as_ref()
                    .map(|e| format!(" stable error {}", e.display(model)))
                    .unwrap_or_default()
            );
            candidates_txt.push_str(&format!(
                "crash {} pre {} post {} {}\n",
                a.target,
                s.pre.display(model),
                s.post_crash.display(model),
                class
            ));
            if s.classification == CrashClassification::PersistentError {
                errors_found = true;
            }
        }
    } else {
        let target = loaded.loss_target(&a.target)?;
        let candidates = fotg::synthesize_global_state(model, &dep, target);
        println!(
            "fotg: target {} — {} candidate topology(ies)",
            model.stimuli[target].name,
            candidates.len()
        );
        let mut unreachable = 0usize;
        for cand in &candidates {
            let fwd = match fotg::forward_imply(model, &def1, &def2, cand, target, true) {
                Ok(f) => f,
                Err(ModelError::InapplicableFault(_)) => continue,
                Err(e) => return Err(e.to_string()),
            };
            let (outcome, stats) = backward_imply(model, &dep, &topos, cand, &config);
            let reachable = matches!(outcome, BackwardOutcome::Reached(_));
            if !reachable {
                unreachable += 1;
            }
            stats_csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                model.stimuli[target].name,
                cand.display(model),
                reachable,
                stats.backward_calls,
                stats.rewind_calls,
                stats.backtracks
            ));
            candidates_txt.push_str(&format!(
                "candidate {} reachable={}\n",
                cand.display(model),
                reachable
            ));
            println!("  candidate {} reachable={}", cand.display(model), reachable);
            for b in &fwd.branches {
                let verdict = if a.definition == 1 {
                    &b.verdict_def1
                } else {
                    &b.verdict_def2
                };
                println!(
                    "    {} -> {} [{}]",
                    match &b.fault {
                        None => "no fault".to_string(),
                        Some(_) => "loss".to_string(),
                    },
                    b.stable.display(model),
                    verdict_label(verdict)
                );
                candidates_txt.push_str(&format!(
                    "  {} -> {} [{}]\n",
                    if b.fault.is_none() { "clean" } else { "loss" },
                    b.stable.display(model),
                    verdict_label(verdict)
                ));
                if verdict.is_error() {
                    errors_found = true;
                }
            }
            // full test sequence: grounding chain plus the faulty completion
            if let BackwardOutcome::Reached(chain) = &outcome {
                if let Some(branch) = fwd
                    .branches
                    .iter()
                    .find(|b| b.fault.is_some() && error_for(b, a.definition))
                {
                    match assemble_fotg_trace(model, &a, cand, chain, branch) {
                        Ok(t) => {
                            traces.push_str(&t.to_text(model));
                            traces.push('\n');
                        }
                        Err(e) => println!("    (trace assembly skipped: {})", e),
                    }
                }
            }
        }
        println!(
            "  candidates={} unreachable={}",
            candidates.len(),
            unreachable
        );
        if a.interleave {
            let scenarios =
                interleave_timer_clear(model, &def, &dep, &topos, target, &config)
                    .map_err(|e| e.to_string())?;
            for s in &scenarios {
                println!(
                    "  interleaving: clearing {} leaves error {}",
                    model.stimuli[s.clearing_stimulus].name,
                    s.error_state.display(model)
                );
                traces.push_str(&s.trace.to_text(model));
                traces.push('\n');
                errors_found = true;
            }
            if scenarios.is_empty() {
                println!("  interleaving: no timer-clearing transition applies");
            }
        }
    }

    if let Some(dir) = &a.out {
        let outputs = output::write_outputs(
            dir,
            &[
                ("candidates.txt", &candidates_txt),
                ("traces.txt", &traces),
                ("stats.csv", &stats_csv),
            ],
        )?;
        output::write_manifest(
            dir,
            "fotg",
            &a.model,
            &[
                ("target", a.target.clone()),
                ("fault", a.fault.clone()),
                ("interleave", a.interleave.to_string()),
                ("budget", a.budget.to_string()),
                ("definition", a.definition.to_string()),
            ],
            &outputs,
        )?;
    }
    Ok(if errors_found { 10 } else { 0 })
}

fn error_for(b: &fotg::ForwardBranch, definition: u8) -> bool {
    if definition == 1 {
        b.verdict_def1.is_error()
    } else {
        b.verdict_def2.is_error()
    }
}

/// Grounding chain (raw steps) followed by the faulted completion.
fn assemble_fotg_trace(
    model: &gfsm_core::ProtocolModel,
    a: &FotgArgs,
    candidate: &gfsm_core::GlobalState,
    chain: &fotg::BackwardChain,
    branch: &fotg::ForwardBranch,
) -> Result<Trace, String> {
    let mut steps =
        raw_steps_for_chain(model, &chain.states, &chain.stimuli).map_err(|e| e.to_string())?;
    let mut ordered = OrderedState::representative(&chain.states[0]);
    for s in &steps {
        // replay to track the concrete ordering at the candidate
        let lost = match &s.fault {
            Some(gfsm_core::LossRecord::Loss { lost_at, .. }) => Some(lost_at.clone()),
            _ => None,
        };
        ordered = gfsm_core::apply::apply_raw(model, &ordered, s.stimulus, s.actor, lost.as_deref())
            .state;
    }
    let more = realize_raw_steps(model, &mut ordered, &branch.steps).map_err(|e| e.to_string())?;
    steps.extend(more);
    let verdict = if a.definition == 1 {
        branch.verdict_def1.clone()
    } else {
        branch.verdict_def2.clone()
    };
    Ok(Trace {
        model: model.name.clone(),
        n: candidate.routers(),
        definition: a.definition,
        mode: TraceMode::Raw,
        initial: chain.states[0].clone(),
        steps,
        verdict,
    })
}

fn verdict_label(v: &Verdict) -> String {
    match v {
        Verdict::Correct => "correct".into(),
        Verdict::Error(c) => format!("error:{}", c.as_str()),
        Verdict::FalseErrorCandidate(c) => format!("false-error:{}", c.as_str()),
    }
}

fn cmd_count(a: CountArgs) -> Result<i32, String> {
    let loaded = source::load(&a.model, false)?;
    let defs: Vec<u8> = match a.definition.as_str() {
        "1" => vec![1],
        "2" => vec![2],
        "both" => vec![1, 2],
        other => return Err(format!("definition must be 1, 2 or both, got `{}`", other)),
    };
    let s = loaded.model().states.len() as u64;
    let mut csv = String::from("n,definition,total,correct,error,correctPct");
    if a.oracle {
        csv.push_str(",oracle_correct,oracle_error,agree");
    }
    csv.push('\n');
    for n in 1..=a.routers_max {
        for &d in &defs {
            let row = statespace_analytics::closed_form(n, s, d);
            csv.push_str(&format!(
                "{},{},{},{},{},{:.4}",
                n,
                d,
                row.total,
                row.correct,
                row.error,
                row.correct_pct()
            ));
            if a.oracle {
                if n > 8 {
                    return Err("--oracle supports n <= 8".into());
                }
                let def = loaded.correctness(d)?;
                let brute = statespace_analytics::brute_force_classify(loaded.model(), &def, n)
                    .map_err(|e| e.to_string())?;
                let agree = brute.correct == row.correct && brute.total == row.total;
                csv.push_str(&format!(",{},{},{}", brute.correct, brute.error, agree));
            }
            csv.push('\n');
        }
    }
    print!("{}", csv);
    if let Some(dir) = &a.out {
        let outputs = output::write_outputs(dir, &[("counts.csv", &csv)])?;
        output::write_manifest(
            dir,
            "count",
            &a.model,
            &[
                ("routers_max", a.routers_max.to_string()),
                ("definition", a.definition.clone()),
                ("oracle", a.oracle.to_string()),
            ],
            &outputs,
        )?;
    }
    Ok(0)
}

fn cmd_compare(a: CompareArgs) -> Result<i32, String> {
    let loaded = source::load(&a.model, false)?;
    let (lo, hi) = a
        .routers
        .split_once("..")
        .and_then(|(l, h)| Some((l.parse::<usize>().ok()?, h.parse::<usize>().ok()?)))
        .ok_or_else(|| format!("--routers takes an inclusive range like 2..5, got `{}`", a.routers))?;
    if lo == 0 || hi < lo {
        return Err("router range must be non-empty and start at 1 or more".into());
    }
    let def = loaded.correctness(a.definition)?;
    let rows = fitg::compare_algorithms(loaded.model(), &def, lo..=hi).map_err(|e| e.to_string())?;
    let mut csv = String::from("n,algorithm,expanded,forwards,transitions,errors\n");
    for (n, alg, stats) in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            n,
            alg.as_str(),
            stats.expanded_states,
            stats.forwards,
            stats.transitions,
            stats.error_states
        ));
    }
    print!("{}", csv);
    if let Some(dir) = &a.out {
        let outputs = output::write_outputs(dir, &[("stats.csv", &csv)])?;
        output::write_manifest(
            dir,
            "compare",
            &a.model,
            &[
                ("routers", a.routers.clone()),
                ("definition", a.definition.to_string()),
            ],
            &outputs,
        )?;
    }
    Ok(0)
}

fn cmd_replay(a: ReplayArgs) -> Result<i32, String> {
    let text = std::fs::read_to_string(&a.trace)
        .map_err(|e| format!("cannot read {}: {}", a.trace.display(), e))?;
    let mut ok_all = true;
    for record in text.split("\n\n").filter(|r| !r.trim().is_empty()) {
        // crash steps need the extension loaded
        let needs_crash = a.enable_crash || record.contains("fault=crash");
        let loaded = source::load(&a.model, needs_crash)?;
        let model = loaded.model();
        let trace = Trace::parse(model, record).map_err(|e| e.to_string())?;
        let def = loaded.correctness(trace.definition)?;
        match trace.replay(model, &def) {
            Ok(final_state) => println!(
                "replay ok: {} steps to {} ({})",
                trace.steps.len(),
                final_state.display(model),
                verdict_label(&trace.verdict)
            ),
            Err(e) => {
                println!("replay FAILED: {}", e);
                ok_all = false;
            }
        }
    }
    Ok(if ok_all { 0 } else { 1 })
}
