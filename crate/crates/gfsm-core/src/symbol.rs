use serde::{Deserialize, Serialize};

/// Index of a state symbol in the model alphabet. The alphabet order is the
/// order symbols appear in the model file and doubles as the canonical total
/// order used everywhere (multiset form, display, deterministic iteration).
pub type SymbolId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Upstream,
    Downstream,
}

/// One per-router state symbol of the protocol model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSymbol {
    pub name: String,
    pub role: Role,
    /// Member of the initial-state set I.S.
    pub initial: bool,
}
