//! Stable-state correctness checking and error classification.

use crate::error::ModelError;
use crate::model::ProtocolModel;
use crate::pattern::{match_pattern, SymbolicPattern};
use crate::state::GlobalState;
use crate::symbol::SymbolId;

/// Why a stable state violates the correctness conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorClass {
    /// Two or more forwarders with somebody expecting packets.
    Duplication,
    /// Somebody expecting packets with no forwarder (join latency, black
    /// holes).
    PacketLoss,
    /// A forwarder with nobody expecting packets (leave latency, overhead).
    WastedBandwidth,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Duplication => "duplication",
            ErrorClass::PacketLoss => "packet-loss",
            ErrorClass::WastedBandwidth => "wasted-bandwidth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Correct,
    Error(ErrorClass),
    /// A stable violation that a single data packet already repairs; flagged
    /// instead of reported as a hard error.
    FalseErrorCandidate(ErrorClass),
}

impl Verdict {
    pub fn is_error(&self) -> bool {
        matches!(self, Verdict::Error(_))
    }
}

/// A correctness definition: which symbols count as forwarding and which as
/// expecting packets, plus the correct-state patterns those classes induce.
#[derive(Debug, Clone)]
pub struct CorrectnessDef {
    pub forwarders: Vec<SymbolId>,
    pub expecting: Vec<SymbolId>,
    pub patterns: Vec<SymbolicPattern>,
}

impl CorrectnessDef {
    /// Build the two correct-state patterns from the class sets:
    /// no forwarder and nobody expecting, or exactly one forwarder with one
    /// or more expecting.
    pub fn from_classes(
        model: &ProtocolModel,
        forwarders: Vec<SymbolId>,
        expecting: Vec<SymbolId>,
    ) -> Self {
        let minus = |excl: &[SymbolId]| {
            (0..model.states.len())
                .filter(|s| !excl.contains(s))
                .collect::<Vec<_>>()
        };
        let mut excl_both = forwarders.clone();
        excl_both.extend(expecting.iter().copied());
        let quiet = SymbolicPattern {
            terms: vec![crate::pattern::PatternTerm {
                class: minus(&excl_both),
                complement: true,
                rep: crate::pattern::Repetition::Star,
            }],
        };
        let forwarding = SymbolicPattern {
            terms: vec![
                crate::pattern::PatternTerm {
                    class: expecting.clone(),
                    complement: false,
                    rep: crate::pattern::Repetition::Exactly(1),
                },
                crate::pattern::PatternTerm {
                    class: forwarders.clone(),
                    complement: false,
                    rep: crate::pattern::Repetition::Exactly(1),
                },
                crate::pattern::PatternTerm {
                    class: minus(&forwarders),
                    complement: true,
                    rep: crate::pattern::Repetition::Star,
                },
            ],
        };
        CorrectnessDef {
            forwarders,
            expecting,
            patterns: vec![quiet, forwarding],
        }
    }

    pub fn forwarder_count(&self, g: &GlobalState) -> usize {
        self.forwarders.iter().map(|&s| g.count(s) as usize).sum()
    }

    pub fn expecting_count(&self, g: &GlobalState) -> usize {
        self.expecting.iter().map(|&s| g.count(s) as usize).sum()
    }

    /// Classify an erroneous state. With populated forwarder/expecting
    /// classes the three classes partition the error space; a model without
    /// classes buckets every violation as wasted bandwidth.
    pub fn classify_error(&self, g: &GlobalState) -> ErrorClass {
        let f = self.forwarder_count(g);
        let e = self.expecting_count(g);
        if e >= 1 && f >= 2 {
            ErrorClass::Duplication
        } else if e >= 1 && f == 0 {
            ErrorClass::PacketLoss
        } else {
            ErrorClass::WastedBandwidth
        }
    }

    /// Fall back to a model file's own correctness patterns, without the
    /// class-based error taxonomy.
    pub fn from_patterns(patterns: Vec<SymbolicPattern>) -> Self {
        CorrectnessDef {
            forwarders: Vec::new(),
            expecting: Vec::new(),
            patterns,
        }
    }
}

/// Correct iff the state matches any correct pattern; otherwise an error with
/// its violated condition class.
pub fn check_correctness(
    model: &ProtocolModel,
    g: &GlobalState,
    def: &CorrectnessDef,
) -> Result<Verdict, ModelError> {
    for p in &def.patterns {
        if match_pattern(model, g, p)? {
            return Ok(Verdict::Correct);
        }
    }
    Ok(Verdict::Error(def.classify_error(g)))
}
