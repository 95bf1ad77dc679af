//! Decentralized-observation state estimation and opacity verification for
//! discrete event systems.
//!
//! A plant modeled as a nondeterministic finite automaton is watched by
//! several observation sites, each recording its own projection of the
//! behavior. When any site's record fills up, every site transmits to a
//! coordinator and resets; the coordinator only ever sees these
//! synchronization snapshots. This crate interprets that protocol into a
//! layered synchronizing-sequence structure, derives deterministic
//! current-state and initial-state estimators from it, and decides whether an
//! eavesdropper on the coordinator channel can ever pin the system's initial
//! or current state inside a secret set.
//!
//! Modules:
//! - [`automaton`]: the plant, projections and reachability operators
//! - [`protocol`]: sites, SI-states, the synchronization strategy, replay
//! - [`css`]: the synchronizing-sequence structures and their size bounds
//! - [`estimators`]: observers and estimators driven by critical SI-states
//! - [`opacity`]: the two initial-state checks and the current-state check
//! - [`oracle`]: brute-force reference definitions and golden-fact checking
//! - [`model`]: the JSON model dialect
//! - [`export`]: DOT and JSON renderings

pub mod automaton;
pub mod css;
pub mod estimators;
pub mod export;
pub mod model;
pub mod opacity;
pub mod oracle;
pub mod protocol;

mod error;

pub use automaton::{project, EventId, EventSet, Nfa, NfaBuilder, StateId, StateSet};
pub use css::{size_bounds, Bounds, CssState, CssStructure, StatePair};
pub use error::{Error, Result};
pub use estimators::{
    annotate_run, build_do_observer, build_initial_estimator, build_reversed_observer,
    current_estimate, initial_estimate, IObserver, Observer, ObserverKind, SyncReport,
};
pub use model::{CompiledModel, ModelFile};
pub use opacity::{verify_csso, verify_iso_via_estimator, verify_iso_via_reversed, Property, Verdict};
pub use protocol::{replay, ObservationArchitecture, Run, SiState, Site, SyncStrategy};
