//! The on-disk model dialect: one JSON file holding the plant, the
//! observation sites and an optional secret state set. Parsing is strict
//! (unknown fields rejected, referential integrity enforced) and
//! serialization round-trips byte-identically after a parse.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automaton::{Nfa, StateSet};
use crate::error::{Error, Result};
use crate::protocol::{ObservationArchitecture, Site};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub from: String,
    pub event: String,
    pub to: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteSpec {
    pub name: String,
    pub events: Vec<String>,
    pub kappa: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub events: Vec<String>,
    pub initial: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
    pub sites: Vec<SiteSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<Vec<String>>,
}

/// A validated model: the plant, the checked architecture and the resolved
/// secret set (empty when the file declares none).
#[derive(Clone, Debug)]
pub struct CompiledModel {
    pub nfa: Nfa,
    pub arch: ObservationArchitecture,
    pub secret: StateSet,
}

impl ModelFile {
    pub fn parse(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    /// Resolves all names, builds the plant and validates the architecture.
    pub fn build(&self) -> Result<CompiledModel> {
        if self.states.is_empty() {
            return Err(Error::Model("no states declared".into()));
        }
        if self.initial.is_empty() {
            return Err(Error::Model("no initial states declared".into()));
        }
        let mut builder = Nfa::builder();
        for s in &self.states {
            builder.add_state(s)?;
        }
        for e in &self.events {
            builder.add_event(e)?;
        }
        for t in &self.transitions {
            for to in &t.to {
                builder.add_transition(&t.from, &t.event, to)?;
            }
        }
        for s in &self.initial {
            builder.mark_initial(s)?;
        }
        let nfa = builder.build()?;

        let mut sites = Vec::with_capacity(self.sites.len());
        for (i, spec) in self.sites.iter().enumerate() {
            let observable = spec
                .events
                .iter()
                .map(|e| nfa.event_named(e))
                .collect::<Result<_>>()?;
            sites.push(Site {
                index: i + 1,
                name: spec.name.clone(),
                observable,
                kappa: spec.kappa,
            });
        }
        let arch = ObservationArchitecture::validate(sites, &nfa)?;

        let secret: StateSet = match &self.secret {
            Some(names) => names.iter().map(|n| nfa.state_named(n)).collect::<Result<_>>()?,
            None => StateSet::new(),
        };
        Ok(CompiledModel { nfa, arch, secret })
    }
}
