//! Test-sequence traces: alternating stable states and steps, in a
//! diff-friendly text form that replays deterministically.
//!
//! ```text
//! # gfsm-trace v1
//! model pim-dm
//! n 3
//! definition 2
//! mode stable
//! STATE {NM:2,EU:1}
//! STEP HJ@r0
//! STATE {M:1,NM:1,EU:1}
//! STEP L@r0 fault=loss:Prune[r1]
//! STATE {NC:1,NH:1,NF:1}
//! VERDICT error:packet-loss
//! ```
//!
//! `mode stable` steps are complete transitions; `mode raw` steps are single
//! stimulus applications (used for implication fragments and synthesized
//! interleavings, where an `inserted` step models an adversarially timed
//! message).

use crate::apply::apply_raw;
use crate::complete::complete_transition;
use crate::correctness::{check_correctness, CorrectnessDef, ErrorClass, Verdict};
use crate::error::ModelError;
use crate::fault::{FaultKind, FaultSpec, LossRecord};
use crate::model::ProtocolModel;
use crate::state::{GlobalState, OrderedState, RouterId};
use crate::stimulus::StimulusId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    Stable,
    Raw,
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub stimulus: StimulusId,
    pub actor: RouterId,
    pub fault: Option<LossRecord>,
    pub inserted: bool,
    /// Canonical state after the step (stable in `Stable` mode).
    pub after: GlobalState,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub model: String,
    pub n: usize,
    pub definition: u8,
    pub mode: TraceMode,
    pub initial: GlobalState,
    pub steps: Vec<TraceStep>,
    pub verdict: Verdict,
}

impl Trace {
    pub fn to_text(&self, model: &ProtocolModel) -> String {
        let mut out = String::new();
        out.push_str("# gfsm-trace v1\n");
        out.push_str(&format!("model {}\n", self.model));
        out.push_str(&format!("n {}\n", self.n));
        out.push_str(&format!("definition {}\n", self.definition));
        out.push_str(&format!(
            "mode {}\n",
            match self.mode {
                TraceMode::Stable => "stable",
                TraceMode::Raw => "raw",
            }
        ));
        out.push_str(&format!("STATE {}\n", self.initial.display(model)));
        for s in &self.steps {
            let mut line = format!("STEP {}@r{}", model.stimuli[s.stimulus].name, s.actor);
            match &s.fault {
                Some(LossRecord::Loss { stimulus, lost_at }) => {
                    let at: Vec<String> = lost_at.iter().map(|r| format!("r{}", r)).collect();
                    line.push_str(&format!(
                        " fault=loss:{}[{}]",
                        model.stimuli[*stimulus].name,
                        at.join(",")
                    ));
                }
                Some(LossRecord::Crash { .. }) => line.push_str(" fault=crash"),
                None => {}
            }
            if s.inserted {
                line.push_str(" inserted");
            }
            out.push_str(&line);
            out.push('\n');
            out.push_str(&format!("STATE {}\n", s.after.display(model)));
        }
        out.push_str(&format!("VERDICT {}\n", verdict_str(&self.verdict)));
        out
    }

    pub fn parse(model: &ProtocolModel, text: &str) -> Result<Trace, ModelError> {
        let mut name = String::new();
        let mut n = 0usize;
        let mut definition = 2u8;
        let mut mode = TraceMode::Stable;
        let mut states: Vec<GlobalState> = Vec::new();
        let mut steps: Vec<(StimulusId, RouterId, Option<LossRecord>, bool)> = Vec::new();
        let mut verdict = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("model ") {
                name = rest.trim().to_string();
            } else if let Some(rest) = line.strip_prefix("n ") {
                n = rest
                    .trim()
                    .parse()
                    .map_err(|_| ModelError::Invalid("bad n".into()))?;
            } else if let Some(rest) = line.strip_prefix("definition ") {
                definition = rest
                    .trim()
                    .parse()
                    .map_err(|_| ModelError::Invalid("bad definition".into()))?;
            } else if let Some(rest) = line.strip_prefix("mode ") {
                mode = match rest.trim() {
                    "stable" => TraceMode::Stable,
                    "raw" => TraceMode::Raw,
                    other => return Err(ModelError::Invalid(format!("bad mode `{}`", other))),
                };
            } else if let Some(rest) = line.strip_prefix("STATE ") {
                states.push(parse_state(model, rest.trim())?);
            } else if let Some(rest) = line.strip_prefix("STEP ") {
                steps.push(parse_step(model, rest.trim())?);
            } else if let Some(rest) = line.strip_prefix("VERDICT ") {
                verdict = Some(parse_verdict(rest.trim())?);
            } else {
                return Err(ModelError::Invalid(format!("unexpected line `{}`", line)));
            }
        }
        if states.len() != steps.len() + 1 {
            return Err(ModelError::Invalid(
                "trace must alternate STATE and STEP lines".into(),
            ));
        }
        let verdict = verdict.ok_or_else(|| ModelError::Invalid("missing VERDICT".into()))?;
        let initial = states.remove(0);
        Ok(Trace {
            model: name,
            n,
            definition,
            mode,
            initial,
            steps: steps
                .into_iter()
                .zip(states)
                .map(|((stimulus, actor, fault, inserted), after)| TraceStep {
                    stimulus,
                    actor,
                    fault,
                    inserted,
                    after,
                })
                .collect(),
            verdict,
        })
    }

    /// Re-execute the trace and confirm every recorded state and the final
    /// verdict. Returns the replayed final state.
    pub fn replay(
        &self,
        model: &ProtocolModel,
        def: &CorrectnessDef,
    ) -> Result<GlobalState, ModelError> {
        let mut state = OrderedState::representative(&self.initial);
        if state.len() != self.n {
            return Err(ModelError::Invalid("initial state size != n".into()));
        }
        for (i, step) in self.steps.iter().enumerate() {
            let next = match self.mode {
                TraceMode::Raw => {
                    let lost = match &step.fault {
                        Some(LossRecord::Loss { lost_at, .. }) => Some(lost_at.clone()),
                        _ => None,
                    };
                    apply_raw(model, &state, step.stimulus, step.actor, lost.as_deref()).state
                }
                TraceMode::Stable => {
                    let fault = match &step.fault {
                        Some(LossRecord::Loss { stimulus, lost_at }) => Some(FaultSpec {
                            kind: FaultKind::SelectiveLoss {
                                target: *stimulus,
                                loss_set: Some(lost_at.clone()),
                            },
                            budget: 1,
                        }),
                        _ => None,
                    };
                    let branches = complete_transition(
                        model,
                        &state,
                        step.stimulus,
                        step.actor,
                        fault.as_ref(),
                        fault.is_some(),
                    )?;
                    let want_fault = step.fault.is_some();
                    branches
                        .into_iter()
                        .find(|b| b.fault.is_some() == want_fault)
                        .ok_or_else(|| {
                            ModelError::Invalid(format!("step {} produced no matching branch", i))
                        })?
                        .stable
                }
            };
            let canon = next.canonical(model.states.len());
            if canon != step.after {
                return Err(ModelError::Invalid(format!(
                    "step {} diverged: got {}, trace says {}",
                    i,
                    canon.display(model),
                    step.after.display(model)
                )));
            }
            state = next;
        }
        let final_canon = state.canonical(model.states.len());
        let checked = check_correctness(model, &final_canon, def)?;
        let consistent = match (&self.verdict, &checked) {
            (Verdict::Correct, Verdict::Correct) => true,
            (Verdict::Error(a), Verdict::Error(b)) => a == b,
            // The false-error downgrade is search policy; the state itself
            // still violates the patterns.
            (Verdict::FalseErrorCandidate(a), Verdict::Error(b)) => a == b,
            _ => false,
        };
        if !consistent {
            return Err(ModelError::Invalid(format!(
                "verdict mismatch: trace says {}, replay says {}",
                verdict_str(&self.verdict),
                verdict_str(&checked)
            )));
        }
        Ok(final_canon)
    }
}

fn verdict_str(v: &Verdict) -> String {
    match v {
        Verdict::Correct => "correct".to_string(),
        Verdict::Error(c) => format!("error:{}", c.as_str()),
        Verdict::FalseErrorCandidate(c) => format!("false-error:{}", c.as_str()),
    }
}

fn parse_verdict(text: &str) -> Result<Verdict, ModelError> {
    let class = |c: &str| -> Result<ErrorClass, ModelError> {
        match c {
            "duplication" => Ok(ErrorClass::Duplication),
            "packet-loss" => Ok(ErrorClass::PacketLoss),
            "wasted-bandwidth" => Ok(ErrorClass::WastedBandwidth),
            other => Err(ModelError::Invalid(format!("unknown error class `{}`", other))),
        }
    };
    if text == "correct" {
        Ok(Verdict::Correct)
    } else if let Some(c) = text.strip_prefix("error:") {
        Ok(Verdict::Error(class(c)?))
    } else if let Some(c) = text.strip_prefix("false-error:") {
        Ok(Verdict::FalseErrorCandidate(class(c)?))
    } else {
        Err(ModelError::Invalid(format!("unknown verdict `{}`", text)))
    }
}

fn parse_state(model: &ProtocolModel, text: &str) -> Result<GlobalState, ModelError> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| ModelError::Invalid(format!("malformed state `{}`", text)))?;
    let mut g = GlobalState::empty(model.states.len());
    if inner.trim().is_empty() {
        return Ok(g);
    }
    for part in inner.split(',') {
        let (name, count) = part
            .split_once(':')
            .ok_or_else(|| ModelError::Invalid(format!("malformed state item `{}`", part)))?;
        let sym = model.symbol_id(name.trim())?;
        let count: u16 = count
            .trim()
            .parse()
            .map_err(|_| ModelError::Invalid(format!("bad count in `{}`", part)))?;
        g = GlobalState::from_counts(
            g.counts()
                .iter()
                .enumerate()
                .map(|(i, &c)| if i == sym { c + count } else { c })
                .collect(),
        );
    }
    Ok(g)
}

fn parse_step(
    model: &ProtocolModel,
    text: &str,
) -> Result<(StimulusId, RouterId, Option<LossRecord>, bool), ModelError> {
    let mut parts = text.split_whitespace();
    let head = parts
        .next()
        .ok_or_else(|| ModelError::Invalid("empty STEP".into()))?;
    let (stim_txt, actor_txt) = head
        .split_once("@r")
        .ok_or_else(|| ModelError::Invalid(format!("malformed STEP `{}`", head)))?;
    let stimulus = model.stimulus_id(stim_txt)?;
    let actor: RouterId = actor_txt
        .parse()
        .map_err(|_| ModelError::Invalid(format!("bad actor in `{}`", head)))?;
    let mut fault = None;
    let mut inserted = false;
    for p in parts {
        if p == "inserted" {
            inserted = true;
        } else if p == "fault=crash" {
            fault = Some(LossRecord::Crash { router: actor });
        } else if let Some(rest) = p.strip_prefix("fault=loss:") {
            let (stim_txt, at_txt) = rest
                .split_once('[')
                .ok_or_else(|| ModelError::Invalid(format!("malformed fault `{}`", p)))?;
            let at_txt = at_txt
                .strip_suffix(']')
                .ok_or_else(|| ModelError::Invalid(format!("malformed fault `{}`", p)))?;
            let lost_stim = model.stimulus_id(stim_txt)?;
            let lost_at: Result<Vec<RouterId>, ModelError> = at_txt
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.trim()
                        .strip_prefix('r')
                        .and_then(|x| x.parse().ok())
                        .ok_or_else(|| ModelError::Invalid(format!("bad router `{}`", s)))
                })
                .collect();
            fault = Some(LossRecord::Loss {
                stimulus: lost_stim,
                lost_at: lost_at?,
            });
        } else {
            return Err(ModelError::Invalid(format!("unknown STEP field `{}`", p)));
        }
    }
    Ok((stimulus, actor, fault, inserted))
}
