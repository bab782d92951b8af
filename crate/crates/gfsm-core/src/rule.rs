use crate::condition::PreCondition;
use crate::model::ProtocolModel;
use crate::stimulus::StimulusId;
use crate::symbol::SymbolId;

/// Which router(s) a post-condition acts on, relative to the stimulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorSel {
    /// The originating router.
    Orig,
    /// The resolved destination router.
    Dst,
    /// Every receiving router other than the originator.
    Other,
    /// Any receiving router.
    Any,
}

impl ActorSel {
    pub fn as_str(self) -> &'static str {
        match self {
            ActorSel::Orig => "orig",
            ActorSel::Dst => "dst",
            ActorSel::Other => "other",
            ActorSel::Any => "any",
        }
    }
}

/// One post-condition of a rule. The four forms:
///
/// * transition             — `(A->B)@sel`
/// * condition.transition   — `STATE.(A->B)@sel`
/// * condition.stimulus     — `STATE@sel.STIM`
/// * stimulus.transition    — `STIM.(A->B)@sel`
///
/// A transition has the implicit guard `A`; it applies at a router only while
/// that router has not yet transitioned under the current stimulus
/// application (post-conditions on one router are mutually exclusive).
/// Triggered stimuli fire from the router that satisfied the post-condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostCondition {
    pub actor: ActorSel,
    /// Explicit guard state (condition.* forms).
    pub guard: Option<SymbolId>,
    pub transition: Option<(SymbolId, SymbolId)>,
    pub triggers: Option<StimulusId>,
}

impl PostCondition {
    pub fn display(&self, model: &ProtocolModel) -> String {
        let name = |s: SymbolId| model.states[s].name.clone();
        match (self.guard, self.transition, self.triggers) {
            (None, Some((a, b)), None) => {
                format!("({}->{})@{}", name(a), name(b), self.actor.as_str())
            }
            (Some(g), Some((a, b)), None) => {
                format!("{}.({}->{})@{}", name(g), name(a), name(b), self.actor.as_str())
            }
            (Some(g), None, Some(t)) => {
                format!("{}@{}.{}", name(g), self.actor.as_str(), model.stimuli[t].name)
            }
            (None, Some((a, b)), Some(t)) => {
                format!(
                    "{}.({}->{})@{}",
                    model.stimuli[t].name,
                    name(a),
                    name(b),
                    self.actor.as_str()
                )
            }
            _ => unreachable!("invalid post-condition shape"),
        }
    }
}

/// Transition rule for one stimulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionRule {
    pub stimulus: StimulusId,
    /// Logical OR; at least one must hold for a non-external stimulus.
    pub pre: Vec<PreCondition>,
    /// Evaluated in order; XOR per router, AND across routers.
    pub post: Vec<PostCondition>,
}

impl TransitionRule {
    pub fn is_external(&self) -> bool {
        self.pre.iter().any(|p| matches!(p, PreCondition::External))
    }

    pub fn timer_name(&self) -> Option<&str> {
        self.pre.iter().find_map(|p| match p {
            PreCondition::TimerExpiry(t) => Some(t.as_str()),
            _ => None,
        })
    }
}
