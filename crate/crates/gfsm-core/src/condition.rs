use crate::model::ProtocolModel;
use crate::stimulus::StimulusId;
use crate::symbol::SymbolId;

/// A pre-condition of a transition rule: what can trigger the stimulus.
///
/// String grammar (model files): `Ext`, a timer-expiry token such as
/// `DelExp`, `STIM.STATE`, or `STIM.(START->END)`. A bare-state condition is
/// stored as a self-transition (`start == end`) and round-trips unchanged.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PreCondition {
    /// Host/external event; the search injects these.
    External,
    /// Fires when the named timer expires at the end of a complete transition.
    TimerExpiry(String),
    /// Triggered by another stimulus, with the originator of *this* stimulus
    /// in `end` (the state it has after the triggering transition).
    Triggered {
        stimulus: StimulusId,
        start: SymbolId,
        end: SymbolId,
    },
}

impl PreCondition {
    /// State the originator must be in for the condition to hold.
    pub fn condition_state(&self) -> Option<SymbolId> {
        match self {
            PreCondition::Triggered { end, .. } => Some(*end),
            _ => None,
        }
    }

    pub fn display(&self, model: &ProtocolModel) -> String {
        match self {
            PreCondition::External => "Ext".to_string(),
            PreCondition::TimerExpiry(t) => t.clone(),
            PreCondition::Triggered {
                stimulus,
                start,
                end,
            } => {
                // Timer-driven stimuli are written as their expiry token.
                let stim = model
                    .rule(*stimulus)
                    .timer_name()
                    .unwrap_or(&model.stimuli[*stimulus].name);
                if start == end {
                    format!("{}.{}", stim, model.states[*end].name)
                } else {
                    format!(
                        "{}.({}->{})",
                        stim, model.states[*start].name, model.states[*end].name
                    )
                }
            }
        }
    }
}
