use crate::state::RouterId;
use crate::stimulus::StimulusId;
use crate::symbol::SymbolId;

/// The single-fault model: at most one fault per test sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaultKind {
    None,
    /// Selective loss of one protocol message: some receivers miss it.
    SelectiveLoss {
        target: StimulusId,
        /// Explicit receiver set to drop at, or None to enumerate every
        /// admissible loss subset as a search branch.
        loss_set: Option<Vec<RouterId>>,
    },
    /// Momentary loss of state: one router falls to its empty state.
    Crash {
        /// Crash routers currently in this symbol (None: any router).
        target_symbol: Option<SymbolId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultSpec {
    pub kind: FaultKind,
    /// Faults consumed per trace; 1 everywhere in scope.
    pub budget: u32,
}

impl FaultSpec {
    pub fn none() -> Self {
        FaultSpec {
            kind: FaultKind::None,
            budget: 1,
        }
    }

    pub fn loss(target: StimulusId) -> Self {
        FaultSpec {
            kind: FaultKind::SelectiveLoss {
                target,
                loss_set: None,
            },
            budget: 1,
        }
    }

    pub fn crash(target_symbol: Option<SymbolId>) -> Self {
        FaultSpec {
            kind: FaultKind::Crash { target_symbol },
            budget: 1,
        }
    }

    pub fn loss_target(&self) -> Option<StimulusId> {
        match &self.kind {
            FaultKind::SelectiveLoss { target, .. } => Some(*target),
            _ => None,
        }
    }
}

/// A fault application recorded in a trace step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LossRecord {
    Loss {
        stimulus: StimulusId,
        lost_at: Vec<RouterId>,
    },
    Crash {
        router: RouterId,
    },
}
