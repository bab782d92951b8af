//! The bundled PIM dense-mode case-study model: 10 router states, 12 stimuli
//! (13 with the crash extension) and the full pre/post-condition table for a
//! single source-group pair on one LAN.
//!
//! Upstream routers live in {F, F_Del, NF, EU}, downstream routers in
//! {NH, NH_Rtx, NC, M, NM, ED}; the initial-state symbols are {NM, EU}.

use gfsm_core::{CorrectnessDef, LoadError, ProtocolModel};

/// Canonical model document; `load` parses exactly this text.
pub const MODEL_JSON: &str = include_str!("../data/pim-dm.json");

/// The loaded case-study model plus its two correctness definitions.
#[derive(Debug, Clone)]
pub struct PimDmModel {
    pub model: ProtocolModel,
    pub crash_enabled: bool,
}

impl PimDmModel {
    /// Correctness definition 1 treats only F as forwarding and only NH as
    /// expecting; definition 2 widens them to {F, F_Del} and {NH, NH_Rtx}.
    pub fn correctness(&self, definition: u8) -> CorrectnessDef {
        let id = |n: &str| self.model.symbol_id(n).expect("bundled symbol");
        match definition {
            1 => CorrectnessDef::from_classes(&self.model, vec![id("F")], vec![id("NH")]),
            2 => CorrectnessDef::from_classes(
                &self.model,
                vec![id("F"), id("F_Del")],
                vec![id("NH"), id("NH_Rtx")],
            ),
            other => panic!("correctness definition must be 1 or 2, got {}", other),
        }
    }
}

/// Load the bundled model.
pub fn load() -> Result<PimDmModel, LoadError> {
    Ok(PimDmModel {
        model: ProtocolModel::from_json("pim-dm", MODEL_JSON)?,
        crash_enabled: false,
    })
}

/// Load with the crash extension: an external `Crash` stimulus that drops any
/// single router to its empty state (ED downstream, EU upstream). The FSM
/// resumes immediately; no rule is disabled afterwards.
pub fn load_with_crash() -> Result<PimDmModel, LoadError> {
    let mut doc: serde_json::Value = serde_json::from_str(MODEL_JSON)?;
    doc["stimuli"]
        .as_array_mut()
        .expect("stimuli array")
        .push(serde_json::json!({"name": "Crash", "kind": "orig"}));
    doc["rules"].as_array_mut().expect("rules array").push(serde_json::json!({
        "stimulus": "Crash",
        "pre": ["Ext"],
        "post": [
            "(NM->ED)@orig",
            "(M->ED)@orig",
            "(NH->ED)@orig",
            "(NC->ED)@orig",
            "(NH_Rtx->ED)@orig",
            "(F->EU)@orig",
            "(F_Del->EU)@orig",
            "(NF->EU)@orig"
        ]
    }));
    Ok(PimDmModel {
        model: ProtocolModel::from_json("pim-dm+crash", &doc.to_string())?,
        crash_enabled: true,
    })
}
