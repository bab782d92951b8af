//! Global finite-state-machine engine for protocols running on a single LAN.
//!
//! A protocol instance on each router is a deterministic FSM; the LAN system
//! is their composition. Because all routers run the same machine, global
//! states are compared as multisets of state symbols (counting equivalence),
//! which is what keeps search tractable.
//!
//! The engine knows nothing about any particular protocol: models are loaded
//! from a JSON document describing state symbols, stimuli, transition rules
//! (pre/post-conditions) and correctness patterns.

pub mod apply;
pub mod complete;
pub mod condition;
pub mod correctness;
pub mod error;
pub mod fault;
pub mod model;
pub mod pattern;
pub mod rule;
pub mod state;
pub mod stimulus;
pub mod symbol;
pub mod trace;

pub use apply::{apply_stimulus, AppliedStep};
pub use complete::{complete_transition, CompletionBranch};
pub use condition::PreCondition;
pub use correctness::{check_correctness, CorrectnessDef, ErrorClass, Verdict};
pub use error::{LoadError, ModelError};
pub use fault::{FaultKind, FaultSpec, LossRecord};
pub use model::ProtocolModel;
pub use pattern::{Repetition, SymbolicPattern};
pub use rule::{ActorSel, PostCondition, TransitionRule};
pub use state::{canonicalize, GlobalState, OrderedState, RouterId};
pub use stimulus::{Stimulus, StimulusId, StimulusKind};
pub use symbol::{Role, StateSymbol, SymbolId};
pub use trace::{Trace, TraceMode, TraceStep};
