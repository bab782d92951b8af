//! The state dependency table: for every state symbol, the possible
//! preceding states and the stimuli that create it, inferred from the
//! post-condition transitions. Backward implication walks it in reverse.

use gfsm_core::{ProtocolModel, StimulusId, SymbolId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DepEntry {
    /// `state ← stimulus ← start`
    Step { start: SymbolId, stimulus: StimulusId },
    /// The state needs no predecessor: an initial-state symbol, or a symbol
    /// no rule produces (an empty state a router may simply begin in).
    Initial,
}

#[derive(Debug, Clone)]
pub struct DependencyTable {
    /// Indexed by state symbol; entries in rule order, marker last.
    pub entries: Vec<Vec<DepEntry>>,
}

impl DependencyTable {
    pub fn steps(&self, s: SymbolId) -> impl Iterator<Item = (SymbolId, StimulusId)> + '_ {
        self.entries[s].iter().filter_map(|e| match e {
            DepEntry::Step { start, stimulus } => Some((*start, *stimulus)),
            DepEntry::Initial => None,
        })
    }

    pub fn has_initial_marker(&self, s: SymbolId) -> bool {
        self.entries[s].contains(&DepEntry::Initial)
    }

    pub fn display_row(&self, model: &ProtocolModel, s: SymbolId) -> String {
        let parts: Vec<String> = self.entries[s]
            .iter()
            .map(|e| match e {
                DepEntry::Step { start, stimulus } => format!(
                    "<-{}<- {}",
                    model.stimuli[*stimulus].name, model.states[*start].name
                ),
                DepEntry::Initial => "<- I.S.".to_string(),
            })
            .collect();
        parts.join(", ")
    }
}

pub fn build_dependency_table(model: &ProtocolModel) -> DependencyTable {
    let mut entries: Vec<Vec<DepEntry>> = vec![Vec::new(); model.states.len()];
    for rule in &model.rules {
        for post in &rule.post {
            if let Some((a, b)) = post.transition {
                let entry = DepEntry::Step {
                    start: a,
                    stimulus: rule.stimulus,
                };
                if !entries[b].contains(&entry) {
                    entries[b].push(entry);
                }
            }
        }
    }
    for (s, row) in entries.iter_mut().enumerate() {
        if model.states[s].initial || row.is_empty() {
            row.push(DepEntry::Initial);
        }
    }
    DependencyTable { entries }
}
