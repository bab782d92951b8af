use crate::error::ModelError;
use crate::model::ProtocolModel;
use crate::state::GlobalState;
use crate::symbol::SymbolId;

/// Repetition construct of a pattern term: 0, 1, 2, 1+, 2+ or *.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repetition {
    Exactly(u16),
    AtLeast(u16),
    Star,
}

impl Repetition {
    fn min(self) -> u16 {
        match self {
            Repetition::Exactly(k) | Repetition::AtLeast(k) => k,
            Repetition::Star => 0,
        }
    }

    fn max(self) -> Option<u16> {
        match self {
            Repetition::Exactly(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_str(self) -> String {
        match self {
            Repetition::Exactly(k) => k.to_string(),
            Repetition::AtLeast(k) => format!("{}+", k),
            Repetition::Star => "*".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTerm {
    /// Symbols the term accepts (complements are resolved at parse time).
    pub class: Vec<SymbolId>,
    /// True when the source text used the `X-{..}` complement form.
    pub complement: bool,
    pub rep: Repetition,
}

/// A multiset template over state symbols. A global state matches iff its
/// routers can be partitioned so that every term's cardinality constraint
/// holds and every router is consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicPattern {
    pub terms: Vec<PatternTerm>,
}

impl SymbolicPattern {
    /// Term grammar: `CLASS ^ REP` where CLASS is `X`, a symbol name,
    /// `{A,B,..}` or `X-{A,B,..}`, and REP is one of `0 1 2 1+ 2+ *`.
    /// Terms are comma-separated: `NH^1,F^1,X-{F}^*`.
    pub fn parse(model: &ProtocolModel, text: &str) -> Result<Self, ModelError> {
        let mut terms = Vec::new();
        for raw in split_terms(text) {
            let raw = raw.trim();
            let (class_txt, rep_txt) = raw
                .rsplit_once('^')
                .ok_or_else(|| ModelError::Invalid(format!("pattern term `{}` lacks ^rep", raw)))?;
            let rep = match rep_txt.trim() {
                "0" => Repetition::Exactly(0),
                "1" => Repetition::Exactly(1),
                "2" => Repetition::Exactly(2),
                "1+" => Repetition::AtLeast(1),
                "2+" => Repetition::AtLeast(2),
                "*" => Repetition::Star,
                other => {
                    return Err(ModelError::Invalid(format!("unknown repetition `{}`", other)))
                }
            };
            let class_txt = class_txt.trim();
            let (complement, class) = if class_txt == "X" {
                (false, (0..model.states.len()).collect())
            } else if let Some(rest) = class_txt.strip_prefix("X-") {
                let excluded = parse_class_list(model, rest)?;
                let class = (0..model.states.len())
                    .filter(|s| !excluded.contains(s))
                    .collect();
                (true, class)
            } else if class_txt.starts_with('{') {
                (false, parse_class_list(model, class_txt)?)
            } else {
                (false, vec![model.symbol_id(class_txt)?])
            };
            terms.push(PatternTerm {
                class,
                complement,
                rep,
            });
        }
        Ok(SymbolicPattern { terms })
    }

    pub fn display(&self, model: &ProtocolModel) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let class = if t.complement {
                    let excluded: Vec<String> = (0..model.states.len())
                        .filter(|s| !t.class.contains(s))
                        .map(|s| model.states[s].name.clone())
                        .collect();
                    format!("X-{{{}}}", excluded.join(","))
                } else if t.class.len() == model.states.len() {
                    "X".to_string()
                } else if t.class.len() == 1 {
                    model.states[t.class[0]].name.clone()
                } else {
                    let names: Vec<String> =
                        t.class.iter().map(|&s| model.states[s].name.clone()).collect();
                    format!("{{{}}}", names.join(","))
                };
                format!("{}^{}", class, t.rep.as_str())
            })
            .collect();
        parts.join(",")
    }
}

fn split_terms(text: &str) -> Vec<String> {
    // Commas inside {..} belong to the class, not the term list.
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '{' => {
                depth += 1;
                cur.push(c);
            }
            '}' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
            }
            _ => cur.push(c),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

fn parse_class_list(model: &ProtocolModel, text: &str) -> Result<Vec<SymbolId>, ModelError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| ModelError::Invalid(format!("malformed class `{}`", text)))?;
    inner
        .split(',')
        .map(|n| model.symbol_id(n.trim()))
        .collect()
}

/// True iff `g`'s routers can be partitioned to satisfy every term.
pub fn match_pattern(
    model: &ProtocolModel,
    g: &GlobalState,
    pattern: &SymbolicPattern,
) -> Result<bool, ModelError> {
    for t in &pattern.terms {
        for &s in &t.class {
            if s >= model.states.len() {
                return Err(ModelError::UnknownSymbol(format!("#{}", s)));
            }
        }
    }
    // Routers in symbols no term accepts can never be consumed.
    for s in g.present() {
        if !pattern.terms.iter().any(|t| t.class.contains(&s)) {
            return Ok(false);
        }
    }
    let totals = vec![0u16; pattern.terms.len()];
    Ok(assign(g, pattern, 0, totals))
}

fn assign(g: &GlobalState, pattern: &SymbolicPattern, sym: usize, totals: Vec<u16>) -> bool {
    if sym == g.counts().len() {
        return pattern
            .terms
            .iter()
            .zip(&totals)
            .all(|(t, &tot)| tot >= t.rep.min() && t.rep.max().is_none_or(|m| tot <= m));
    }
    let count = g.count(sym);
    if count == 0 {
        return assign(g, pattern, sym + 1, totals);
    }
    let eligible: Vec<usize> = pattern
        .terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.class.contains(&sym))
        .map(|(i, _)| i)
        .collect();
    distribute(g, pattern, sym, count, &eligible, 0, totals)
}

fn distribute(
    g: &GlobalState,
    pattern: &SymbolicPattern,
    sym: usize,
    remaining: u16,
    eligible: &[usize],
    idx: usize,
    totals: Vec<u16>,
) -> bool {
    if idx == eligible.len() {
        return remaining == 0 && assign(g, pattern, sym + 1, totals);
    }
    let term = eligible[idx];
    let cap = pattern.terms[term]
        .rep
        .max()
        .map(|m| m.saturating_sub(totals[term]))
        .unwrap_or(remaining);
    let take_max = cap.min(remaining);
    // Last eligible term must absorb the remainder.
    for take in (0..=take_max).rev() {
        let mut t = totals.clone();
        t[term] += take;
        if distribute(g, pattern, sym, remaining - take, eligible, idx + 1, t) {
            return true;
        }
    }
    false
}
