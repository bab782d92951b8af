//! Model resolution: the bundled pim-dm model by name, a file path, or a
//! lookup through the `STRESS_MODEL_PATH` search path.

use gfsm_core::{CorrectnessDef, ProtocolModel, StimulusId, SymbolId};

pub struct LoadedModel {
    model: ProtocolModel,
    pim: Option<pim_dm::PimDmModel>,
}

impl LoadedModel {
    pub fn model(&self) -> &ProtocolModel {
        self.pim.as_ref().map(|p| &p.model).unwrap_or(&self.model)
    }

    /// Class-based definitions for the bundled model; generic models fall
    /// back to their own correctness patterns.
    pub fn correctness(&self, definition: u8) -> Result<CorrectnessDef, String> {
        if !(1..=2).contains(&definition) {
            return Err(format!("definition must be 1 or 2, got {}", definition));
        }
        match &self.pim {
            Some(p) => Ok(p.correctness(definition)),
            None => Ok(CorrectnessDef::from_patterns(self.model.correctness.clone())),
        }
    }

    pub fn stimulus(&self, name: &str) -> Result<StimulusId, String> {
        self.model().stimulus_id(name).map_err(|_| {
            format!(
                "unknown stimulus `{}`; valid: {}",
                name,
                self.model()
                    .stimuli
                    .iter()
                    .map(|s| s.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
    }

    /// Loss targets accept `Graft` as an alias for the graft message in
    /// flight (its reception event).
    pub fn loss_target(&self, name: &str) -> Result<StimulusId, String> {
        if name == "Graft" && self.model().stimulus_id("Graft_Rcv").is_ok() {
            return self.stimulus("Graft_Rcv");
        }
        let id = self.stimulus(name)?;
        if !self.model().stimuli[id].kind.is_message() {
            return Err(format!(
                "`{}` is a local event; message stimuli: {}",
                name,
                self.message_stimuli().join(", ")
            ));
        }
        Ok(id)
    }

    pub fn symbol(&self, name: &str) -> Result<SymbolId, String> {
        self.model().symbol_id(name).map_err(|_| {
            format!(
                "unknown state `{}`; valid: {}",
                name,
                self.model()
                    .states
                    .iter()
                    .map(|s| s.name.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
    }

    pub fn message_stimuli(&self) -> Vec<String> {
        self.model()
            .stimuli
            .iter()
            .filter(|s| s.kind.is_message())
            .map(|s| s.name.clone())
            .collect()
    }
}

pub fn load(name: &str, enable_crash: bool) -> Result<LoadedModel, String> {
    if name == "pim-dm" || (name == "pim-dm.json" && !std::path::Path::new(name).exists()) {
        let pim = if enable_crash {
            pim_dm::load_with_crash()
        } else {
            pim_dm::load()
        }
        .map_err(|e| e.to_string())?;
        let model = pim.model.clone();
        return Ok(LoadedModel {
            model,
            pim: Some(pim),
        });
    }
    let path = resolve_path(name)?;
    if enable_crash {
        return Err("--enable-crash / crash faults apply to the bundled pim-dm model".into());
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("model")
        .to_string();
    let model = ProtocolModel::from_json(&stem, &text).map_err(|e| e.to_string())?;
    // a copy of the bundled model loaded from disk keeps its definitions
    let pim = if model.to_canonical_json() == pim_dm::MODEL_JSON {
        Some(pim_dm::PimDmModel {
            model: model.clone(),
            crash_enabled: false,
        })
    } else {
        None
    };
    Ok(LoadedModel { model, pim })
}

fn resolve_path(name: &str) -> Result<std::path::PathBuf, String> {
    let direct = std::path::Path::new(name);
    if direct.exists() {
        return Ok(direct.to_path_buf());
    }
    if let Ok(search) = std::env::var("STRESS_MODEL_PATH") {
        for dir in search.split(':').filter(|d| !d.is_empty()) {
            let candidate = std::path::Path::new(dir).join(name);
            if candidate.exists() {
                return Ok(candidate);
            }
            let with_ext = std::path::Path::new(dir).join(format!("{}.json", name));
            if with_ext.exists() {
                return Ok(with_ext);
            }
        }
    }
    Err(format!(
        "model `{}` not found (not a file, not on STRESS_MODEL_PATH)",
        name
    ))
}
