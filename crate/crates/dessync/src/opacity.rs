//! Decision procedures for the two state-isolation properties an eavesdropper
//! on the site-to-coordinator channel could break: initial-state opacity
//! (two methods of different cost) and current-state-at-synchronization
//! opacity. Violations come with a shortest CSI-sequence witness.

use std::collections::BTreeMap;

use crate::automaton::StateSet;
use crate::error::Result;
use crate::estimators::{IObserver, Observer};
use crate::protocol::SiState;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Property {
    Iso,
    IsoReversed,
    Csso,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Iso => "iso",
            Property::IsoReversed => "iso-reversed",
            Property::Csso => "csso",
        }
    }
}

/// Outcome of an opacity check. A false verdict always carries a shortest
/// violating CSI-sequence (possibly empty: the violation can be visible
/// before any synchronization) and the certifying estimate.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Vec<SiState>>,
    /// For `iso`, the initial-state estimate contained in the secret; for
    /// `iso-reversed`, the reversed-observer state intersected with the
    /// initial states; for `csso`, the isolated current-state estimate.
    pub violating: Option<StateSet>,
}

impl Verdict {
    fn holds(property: Property) -> Self {
        Verdict { property, holds: true, witness: None, violating: None }
    }

    fn violated(property: Property, witness: Vec<SiState>, violating: StateSet) -> Self {
        Verdict { property, holds: false, witness: Some(witness), violating: Some(violating) }
    }
}

/// Breadth-first walk over a deterministic transition map in canonical
/// alphabet order, yielding each state index with the shortest CSI-sequence
/// reaching it.
fn bfs_paths(
    state_count: usize,
    initial: usize,
    transitions: &BTreeMap<(usize, SiState), usize>,
) -> Vec<(usize, Vec<SiState>)> {
    let mut order = vec![(initial, Vec::new())];
    let mut seen = vec![false; state_count];
    seen[initial] = true;
    let mut head = 0;
    while head < order.len() {
        let (q, path) = order[head].clone();
        head += 1;
        for ((from, tau), &to) in transitions.range((q, SiState::initial(0))..) {
            if *from != q {
                break;
            }
            if !seen[to] {
                seen[to] = true;
                let mut next = path.clone();
                next.push(tau.clone());
                order.push((to, next));
            }
        }
    }
    order
}

/// Initial-state opacity via the initial-state estimator: the property holds
/// iff no reachable estimator state pins the initial state inside the secret.
pub fn verify_iso_via_estimator(iobs: &IObserver, secret: &StateSet) -> Result<Verdict> {
    for (q, path) in bfs_paths(iobs.states.len(), iobs.initial, &iobs.transitions) {
        let estimate = iobs.first_components(q);
        if estimate.is_subset(secret) {
            return Ok(Verdict::violated(Property::Iso, path, estimate));
        }
    }
    Ok(Verdict::holds(Property::Iso))
}

/// Initial-state opacity via the synchronization-reversed observer. A
/// reversed-observer state that meets the initial set only inside the secret
/// certifies a violation; the forward witness is the reverse of the sequence
/// that reached it.
pub fn verify_iso_via_reversed(
    robs: &Observer,
    x0set: &StateSet,
    secret: &StateSet,
) -> Result<Verdict> {
    for (q, path) in bfs_paths(robs.states.len(), robs.initial, &robs.transitions) {
        let hit: StateSet = robs.state(q).intersection(x0set).copied().collect();
        if !hit.is_empty() && hit.is_subset(secret) {
            let witness: Vec<SiState> = path.into_iter().rev().collect();
            return Ok(Verdict::violated(Property::IsoReversed, witness, hit));
        }
    }
    Ok(Verdict::holds(Property::IsoReversed))
}

/// Current-state-at-synchronization opacity: holds iff no reachable observer
/// state (the initial one included) is contained in the secret.
pub fn verify_csso(obs: &Observer, secret: &StateSet) -> Result<Verdict> {
    for (q, path) in bfs_paths(obs.states.len(), obs.initial, &obs.transitions) {
        if obs.state(q).is_subset(secret) {
            return Ok(Verdict::violated(Property::Csso, path, obs.state(q).clone()));
        }
    }
    Ok(Verdict::holds(Property::Csso))
}
