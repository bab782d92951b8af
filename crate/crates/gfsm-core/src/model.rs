//! Protocol model representation and the JSON document format.
//!
//! A model file has exactly four top-level keys:
//!
//! ```json
//! {
//!   "states":  [ {"name": "F", "role": "upstream", "initial": false}, .. ],
//!   "stimuli": [ {"name": "Join", "kind": "dst"}, .. ],
//!   "rules":   [ {"stimulus": "Join", "pre": [..], "post": [..]}, .. ],
//!   "correctness": [ "NH^1,F^1,X-{F}^*", .. ]
//! }
//! ```
//!
//! Pre-condition strings: `Ext`, `DelExp` (timer expiry), `STIM.STATE`,
//! `STIM.(A->B)`. Post-condition strings: `(A->B)@sel`, `STATE.(A->B)@sel`,
//! `STATE@sel.STIM`, `STIM.(A->B)@sel` with sel one of orig/dst/other/any.
//! `correctness` holds the model's default correct-state patterns.
//! The order symbols and rules appear in the file is semantic: it fixes the
//! canonical symbol order and the deterministic post-condition/cascade order.

use serde::{Deserialize, Serialize};

use crate::condition::PreCondition;
use crate::error::{LoadError, ModelError};
use crate::pattern::SymbolicPattern;
use crate::rule::{ActorSel, PostCondition, TransitionRule};
use crate::stimulus::{Stimulus, StimulusId, StimulusKind};
use crate::symbol::{StateSymbol, SymbolId};

#[derive(Serialize, Deserialize)]
struct ModelFile {
    states: Vec<StateSymbol>,
    stimuli: Vec<Stimulus>,
    rules: Vec<RuleFile>,
    correctness: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    stimulus: String,
    pre: Vec<String>,
    post: Vec<String>,
}

/// A derived triggering condition: `by.(start->end)` means the stimulus is
/// triggered by `by` with its originator ending in `end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedPre {
    pub by: StimulusId,
    pub start: Option<SymbolId>,
    pub end: SymbolId,
}

#[derive(Debug, Clone)]
pub struct ProtocolModel {
    pub name: String,
    pub states: Vec<StateSymbol>,
    pub stimuli: Vec<Stimulus>,
    /// One rule per stimulus, in file order (the cascade order).
    pub rules: Vec<TransitionRule>,
    /// Default correctness definition of the model file.
    pub correctness: Vec<SymbolicPattern>,
    rule_of_stimulus: Vec<usize>,
    /// Per stimulus: the trigger conditions derived from post-conditions.
    derived_pre: Vec<Vec<DerivedPre>>,
    /// Per stimulus: originator states that allow it to fire (derived pre
    /// `end` states; for timer rules, the post guard states).
    pre_ends: Vec<Vec<SymbolId>>,
}

impl ProtocolModel {
    pub fn from_json(name: &str, text: &str) -> Result<Self, LoadError> {
        let file: ModelFile = serde_json::from_str(text)?;
        Self::from_file(name, file)
    }

    pub fn symbol_id(&self, name: &str) -> Result<SymbolId, ModelError> {
        self.states
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_string()))
    }

    pub fn stimulus_id(&self, name: &str) -> Result<StimulusId, ModelError> {
        self.stimuli
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| ModelError::UnknownStimulus(name.to_string()))
    }

    pub fn rule(&self, stim: StimulusId) -> &TransitionRule {
        &self.rules[self.rule_of_stimulus[stim]]
    }

    pub fn initial_symbols(&self) -> Vec<SymbolId> {
        (0..self.states.len())
            .filter(|&s| self.states[s].initial)
            .collect()
    }

    pub fn is_initial_state(&self, counts: &crate::state::GlobalState) -> bool {
        counts.present().all(|s| self.states[s].initial)
    }

    /// External (host-event) stimuli, the roots of complete transitions.
    pub fn external_stimuli(&self) -> Vec<StimulusId> {
        self.rules
            .iter()
            .filter(|r| r.is_external())
            .map(|r| r.stimulus)
            .collect()
    }

    /// Rules driven by timer expiry, in cascade order.
    pub fn timer_rules(&self) -> Vec<&TransitionRule> {
        self.rules.iter().filter(|r| r.timer_name().is_some()).collect()
    }

    pub fn derived_preconditions(&self, stim: StimulusId) -> &[DerivedPre] {
        &self.derived_pre[stim]
    }

    /// Can `stim` fire with an originator currently in `sym`?
    pub fn pre_allows(&self, stim: StimulusId, sym: SymbolId) -> bool {
        self.pre_ends[stim].contains(&sym)
    }

    pub fn pre_end_states(&self, stim: StimulusId) -> &[SymbolId] {
        &self.pre_ends[stim]
    }

    /// Serialize back to the canonical JSON document form.
    pub fn to_canonical_json(&self) -> String {
        let file = ModelFile {
            states: self.states.clone(),
            stimuli: self.stimuli.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleFile {
                    stimulus: self.stimuli[r.stimulus].name.clone(),
                    pre: r.pre.iter().map(|p| p.display(self)).collect(),
                    post: r.post.iter().map(|p| p.display(self)).collect(),
                })
                .collect(),
            correctness: self.correctness.iter().map(|p| p.display(self)).collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    fn from_file(name: &str, file: ModelFile) -> Result<Self, LoadError> {
        let mut model = ProtocolModel {
            name: name.to_string(),
            states: file.states,
            stimuli: file.stimuli,
            rules: Vec::new(),
            correctness: Vec::new(),
            rule_of_stimulus: Vec::new(),
            derived_pre: Vec::new(),
            pre_ends: Vec::new(),
        };
        let mut seen = std::collections::HashSet::new();
        for s in &model.states {
            if !seen.insert(&s.name) {
                return Err(LoadError::Schema(format!("duplicate state `{}`", s.name)));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in &model.stimuli {
            if !seen.insert(&s.name) {
                return Err(LoadError::Schema(format!("duplicate stimulus `{}`", s.name)));
            }
        }

        // Timer tokens become visible while parsing rules ("RtxExp" names the
        // rule whose pre-condition is that expiry), so scan for them first.
        let mut raw_rules = Vec::new();
        for rf in &file.rules {
            let stim = model
                .stimulus_id(&rf.stimulus)
                .map_err(|e| rule_err(&rf.stimulus, e))?;
            raw_rules.push(stim);
        }
        let timer_tokens: Vec<(String, StimulusId)> = file
            .rules
            .iter()
            .zip(&raw_rules)
            .flat_map(|(rf, &stim)| {
                rf.pre.iter().filter_map(move |t| {
                    let t = t.trim();
                    if t != "Ext" && !t.contains('.') && t.ends_with("Exp") {
                        Some((t.to_string(), stim))
                    } else {
                        None
                    }
                })
            })
            .collect();

        for (rf, &stim) in file.rules.iter().zip(&raw_rules) {
            let rule_name = &rf.stimulus;
            let mut pre = Vec::new();
            for text in &rf.pre {
                let t = text.trim();
                pre.push(if t == "Ext" {
                    PreCondition::External
                } else if !t.contains('.') && t.ends_with("Exp") {
                    PreCondition::TimerExpiry(t.to_string())
                } else {
                    resolve_precondition(&model, &timer_tokens, t)
                        .map_err(|e| rule_err(rule_name, e))?
                });
            }
            let mut post = Vec::new();
            for text in &rf.post {
                post.push(
                    parse_postcondition(&model, &timer_tokens, text)
                        .map_err(|e| rule_err(rule_name, e))?,
                );
            }
            if pre.is_empty() {
                return Err(LoadError::Rule {
                    rule: rule_name.clone(),
                    message: "at least one pre-condition is required".into(),
                });
            }
            for p in &post {
                if let Some((a, b)) = p.transition {
                    if model.states[a].role != model.states[b].role {
                        return Err(LoadError::Rule {
                            rule: rule_name.clone(),
                            message: format!(
                                "transition {}->{} changes router role",
                                model.states[a].name, model.states[b].name
                            ),
                        });
                    }
                }
            }
            let kind = model.stimuli[stim].kind;
            if matches!(kind, StimulusKind::Dst | StimulusKind::McastDownstream)
                && !post
                    .iter()
                    .any(|p| p.actor == ActorSel::Dst && p.transition.is_some())
            {
                return Err(LoadError::Rule {
                    rule: rule_name.clone(),
                    message: "dst-kind stimulus needs a @dst transition to resolve its destination"
                        .into(),
                });
            }
            model.rules.push(TransitionRule {
                stimulus: stim,
                pre,
                post,
            });
        }

        model.rule_of_stimulus = vec![usize::MAX; model.stimuli.len()];
        for (i, r) in model.rules.iter().enumerate() {
            if model.rule_of_stimulus[r.stimulus] != usize::MAX {
                return Err(LoadError::Rule {
                    rule: model.stimuli[r.stimulus].name.clone(),
                    message: "stimulus has more than one rule".into(),
                });
            }
            model.rule_of_stimulus[r.stimulus] = i;
        }
        for (s, &r) in model.rule_of_stimulus.iter().enumerate() {
            if r == usize::MAX {
                return Err(LoadError::Rule {
                    rule: model.stimuli[s].name.clone(),
                    message: "stimulus has no rule".into(),
                });
            }
        }

        for text in &file.correctness {
            let p = SymbolicPattern::parse(&model, text)
                .map_err(|e| LoadError::Schema(format!("correctness pattern `{}`: {}", text, e)))?;
            model.correctness.push(p);
        }

        model.derive_preconditions();
        Ok(model)
    }

    /// The automatic derivation: every post-condition entry "σ triggers s
    /// under transition t" contributes the condition "σ.t" to s.
    fn derive_preconditions(&mut self) {
        let mut derived: Vec<Vec<DerivedPre>> = vec![Vec::new(); self.stimuli.len()];
        for rule in &self.rules {
            for post in &rule.post {
                if let Some(trig) = post.triggers {
                    let (start, end) = match (post.transition, post.guard) {
                        (Some((a, b)), _) => (Some(a), b),
                        (None, Some(g)) => (None, g),
                        _ => continue,
                    };
                    let entry = DerivedPre {
                        by: rule.stimulus,
                        start,
                        end,
                    };
                    if !derived[trig].iter().any(|d| d.by == entry.by && d.end == entry.end) {
                        derived[trig].push(entry);
                    }
                }
            }
        }
        let mut pre_ends: Vec<Vec<SymbolId>> = derived
            .iter()
            .map(|v| {
                let mut ends: Vec<SymbolId> = v.iter().map(|d| d.end).collect();
                ends.sort_unstable();
                ends.dedup();
                ends
            })
            .collect();
        // Timer rules fire from the guard states of their own posts.
        for rule in &self.rules {
            if rule.timer_name().is_some() {
                let ends = &mut pre_ends[rule.stimulus];
                for post in &rule.post {
                    if let Some((a, _)) = post.transition {
                        if !ends.contains(&a) {
                            ends.push(a);
                        }
                    }
                }
                ends.sort_unstable();
            }
        }
        self.derived_pre = derived;
        self.pre_ends = pre_ends;
    }
}

fn rule_err(rule: &str, e: ModelError) -> LoadError {
    LoadError::Rule {
        rule: rule.to_string(),
        message: e.to_string(),
    }
}

fn resolve_stim_token(
    model: &ProtocolModel,
    timer_tokens: &[(String, StimulusId)],
    token: &str,
) -> Result<StimulusId, ModelError> {
    if let Ok(id) = model.stimulus_id(token) {
        return Ok(id);
    }
    timer_tokens
        .iter()
        .find(|(t, _)| t == token)
        .map(|(_, id)| *id)
        .ok_or_else(|| ModelError::UnknownStimulus(token.to_string()))
}

fn resolve_precondition(
    model: &ProtocolModel,
    timer_tokens: &[(String, StimulusId)],
    text: &str,
) -> Result<PreCondition, ModelError> {
    let t = text.trim();
    let (stim_txt, rest) = t
        .split_once('.')
        .ok_or_else(|| ModelError::Invalid(format!("malformed condition `{}`", t)))?;
    let stimulus = resolve_stim_token(model, timer_tokens, stim_txt.trim())?;
    let rest = rest.trim();
    if let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let (a, b) = inner
            .split_once("->")
            .ok_or_else(|| ModelError::Invalid(format!("malformed transition `{}`", rest)))?;
        Ok(PreCondition::Triggered {
            stimulus,
            start: model.symbol_id(a.trim())?,
            end: model.symbol_id(b.trim())?,
        })
    } else {
        let s = model.symbol_id(rest)?;
        Ok(PreCondition::Triggered {
            stimulus,
            start: s,
            end: s,
        })
    }
}

fn parse_actor(sel: &str) -> Result<ActorSel, ModelError> {
    match sel {
        "orig" => Ok(ActorSel::Orig),
        "dst" => Ok(ActorSel::Dst),
        "other" => Ok(ActorSel::Other),
        "any" => Ok(ActorSel::Any),
        other => Err(ModelError::Invalid(format!("unknown actor `{}`", other))),
    }
}

fn parse_transition(model: &ProtocolModel, text: &str) -> Result<(SymbolId, SymbolId), ModelError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| ModelError::Invalid(format!("malformed transition `{}`", text)))?;
    let (a, b) = inner
        .split_once("->")
        .ok_or_else(|| ModelError::Invalid(format!("malformed transition `{}`", text)))?;
    Ok((model.symbol_id(a.trim())?, model.symbol_id(b.trim())?))
}

fn parse_postcondition(
    model: &ProtocolModel,
    timer_tokens: &[(String, StimulusId)],
    text: &str,
) -> Result<PostCondition, ModelError> {
    let t = text.trim();
    // `(A->B)@sel`
    if let Some(rest) = t.strip_prefix('(') {
        let (trans, sel) = rest
            .rsplit_once('@')
            .ok_or_else(|| ModelError::Invalid(format!("post `{}` lacks @actor", t)))?;
        let transition = parse_transition(model, &format!("({}", trans))?;
        return Ok(PostCondition {
            actor: parse_actor(sel.trim())?,
            guard: None,
            transition: Some(transition),
            triggers: None,
        });
    }
    // `TOKEN.(A->B)@sel` — TOKEN is a stimulus (stimulus.transition) or a
    // state (condition.transition).
    if let Some((token, rest)) = t.split_once(".(") {
        let (trans, sel) = rest
            .rsplit_once('@')
            .ok_or_else(|| ModelError::Invalid(format!("post `{}` lacks @actor", t)))?;
        let transition = parse_transition(model, &format!("({}", trans))?;
        let actor = parse_actor(sel.trim())?;
        return if let Ok(stim) = resolve_stim_token(model, timer_tokens, token.trim()) {
            Ok(PostCondition {
                actor,
                guard: None,
                transition: Some(transition),
                triggers: Some(stim),
            })
        } else {
            Ok(PostCondition {
                actor,
                guard: Some(model.symbol_id(token.trim())?),
                transition: Some(transition),
                triggers: None,
            })
        };
    }
    // `STATE@sel.STIM`
    let (state_txt, rest) = t
        .split_once('@')
        .ok_or_else(|| ModelError::Invalid(format!("malformed post `{}`", t)))?;
    let (sel, stim_txt) = rest
        .split_once('.')
        .ok_or_else(|| ModelError::Invalid(format!("malformed post `{}`", t)))?;
    Ok(PostCondition {
        actor: parse_actor(sel.trim())?,
        guard: Some(model.symbol_id(state_txt.trim())?),
        transition: None,
        triggers: Some(resolve_stim_token(model, timer_tokens, stim_txt.trim())?),
    })
}
