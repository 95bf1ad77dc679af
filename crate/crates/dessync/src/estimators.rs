//! Deterministic estimators driven by critical SI-states: the current-state
//! observer, the initial-state estimator over (seed, current) pairs, and the
//! synchronization-reversed observer used for the cheaper opacity check.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automaton::{Nfa, StateSet};
use crate::css::{CssStructure, StatePair};
use crate::error::{Error, Result};
use crate::protocol::{ObservationArchitecture, Run, SiState};

pub type PairSet = BTreeSet<StatePair>;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ObserverKind {
    Current,
    Reversed,
}

/// A deterministic automaton over the critical SI-state alphabet whose states
/// are nonempty plant-state sets. Transitions are partial: a step with an
/// empty estimate has no edge.
#[derive(Clone, Debug)]
pub struct Observer {
    pub kind: ObserverKind,
    pub alphabet: BTreeSet<SiState>,
    /// States in discovery (breadth-first) order; index 0 is the initial state.
    pub states: Vec<StateSet>,
    pub initial: usize,
    pub transitions: BTreeMap<(usize, SiState), usize>,
}

/// The initial-state estimator: like [`Observer`] but over nonempty sets of
/// (initial, current) state pairs.
#[derive(Clone, Debug)]
pub struct IObserver {
    pub alphabet: BTreeSet<SiState>,
    pub states: Vec<PairSet>,
    pub initial: usize,
    pub transitions: BTreeMap<(usize, SiState), usize>,
}

fn image(rel: &PairSet, from: &StateSet) -> StateSet {
    rel.iter().filter(|(a, _)| from.contains(a)).map(|&(_, b)| b).collect()
}

fn preimage(rel: &PairSet, to: &StateSet) -> StateSet {
    rel.iter().filter(|(_, b)| to.contains(b)).map(|&(a, _)| a).collect()
}

fn compose(m: &PairSet, rel: &PairSet) -> PairSet {
    let mut out = PairSet::new();
    for &(a, b) in m {
        for &(b2, c) in rel {
            if b == b2 {
                out.insert((a, c));
            }
        }
    }
    out
}

/// Current-state estimate after receiving a single critical SI-state from a
/// set of possible states: the image of `from` under the structure's pairs.
pub fn current_estimate(css: &CssStructure, tau: &SiState, from: &StateSet) -> Result<StateSet> {
    Ok(image(css.pairs_of(tau)?, from))
}

/// Initial-state estimate after a single critical SI-state: the members of
/// `x0set` that admit a matching behavior.
pub fn initial_estimate(css: &CssStructure, tau: &SiState, x0set: &StateSet) -> Result<StateSet> {
    let rel = css.pairs_of(tau)?;
    Ok(x0set.iter().copied().filter(|x| rel.iter().any(|(a, _)| a == x)).collect())
}

fn build_set_observer(
    kind: ObserverKind,
    css: &CssStructure,
    initial: StateSet,
    step: impl Fn(&PairSet, &StateSet) -> StateSet,
) -> Observer {
    let alphabet = css.critical().clone();
    let mut states = vec![initial.clone()];
    let mut index: HashMap<StateSet, usize> = [(initial, 0)].into_iter().collect();
    let mut transitions = BTreeMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        for tau in &alphabet {
            let rel = css.pairs_of(tau).expect("alphabet is the critical set");
            let next = step(rel, &states[q]);
            if next.is_empty() {
                continue;
            }
            let id = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            transitions.insert((q, tau.clone()), id);
        }
    }
    Observer { kind, alphabet, states, initial: 0, transitions }
}

/// The current-state observer: initial state is the silent closure of the
/// plant's initial set; each transition applies one critical SI-state of the
/// feasible structure.
pub fn build_do_observer(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    css_feasible: &CssStructure,
) -> Observer {
    let initial = nfa.unobservable_reach(arch.observable(), nfa.initial());
    build_set_observer(ObserverKind::Current, css_feasible, initial, image)
}

/// The synchronization-reversed observer. Its initial state is the entire
/// state space and each step takes preimages, so it must be built over a
/// structure seeded with all plant states: reversal may pass through pairs
/// that are never reachable forward from the initial states.
pub fn build_reversed_observer(nfa: &Nfa, css_full: &CssStructure) -> Observer {
    build_set_observer(ObserverKind::Reversed, css_full, nfa.all_states(), preimage)
}

/// The initial-state estimator over (initial, current) pairs.
pub fn build_initial_estimator(nfa: &Nfa, css_feasible: &CssStructure) -> IObserver {
    let alphabet = css_feasible.critical().clone();
    let initial: PairSet = nfa.initial().iter().map(|&x| (x, x)).collect();
    let mut states = vec![initial.clone()];
    let mut index: HashMap<PairSet, usize> = [(initial, 0)].into_iter().collect();
    let mut transitions = BTreeMap::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(q) = queue.pop_front() {
        for tau in &alphabet {
            let rel = css_feasible.pairs_of(tau).expect("alphabet is the critical set");
            let next = compose(&states[q], rel);
            if next.is_empty() {
                continue;
            }
            let id = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            transitions.insert((q, tau.clone()), id);
        }
    }
    IObserver { alphabet, states, initial: 0, transitions }
}

impl Observer {
    /// Folds a CSI-sequence through the transition map. `None` means the
    /// sequence leaves the partial transition function's domain.
    pub fn run(&self, iota: &[SiState]) -> Result<Option<usize>> {
        run_transitions(&self.alphabet, &self.transitions, self.initial, iota)
    }

    pub fn state(&self, idx: usize) -> &StateSet {
        &self.states[idx]
    }
}

impl IObserver {
    pub fn run(&self, iota: &[SiState]) -> Result<Option<usize>> {
        run_transitions(&self.alphabet, &self.transitions, self.initial, iota)
    }

    pub fn state(&self, idx: usize) -> &PairSet {
        &self.states[idx]
    }

    /// The initial-state estimate carried by an estimator state: the set of
    /// first components.
    pub fn first_components(&self, idx: usize) -> StateSet {
        self.states[idx].iter().map(|&(a, _)| a).collect()
    }
}

fn run_transitions(
    alphabet: &BTreeSet<SiState>,
    transitions: &BTreeMap<(usize, SiState), usize>,
    initial: usize,
    iota: &[SiState],
) -> Result<Option<usize>> {
    let mut q = initial;
    for tau in iota {
        if !alphabet.contains(tau) {
            return Err(Error::OutsideAlphabet(tau.id_text()));
        }
        match transitions.get(&(q, tau.clone())) {
            Some(&next) => q = next,
            None => return Ok(None),
        }
    }
    Ok(Some(q))
}

/// Per-synchronization estimates along a replayed run.
#[derive(Clone, Debug)]
pub struct SyncReport {
    pub csi: SiState,
    pub current: StateSet,
    pub initial: StateSet,
}

/// Walks a run's CSI-trace through the structure, producing the current- and
/// initial-state estimate after each synchronization, and stores the
/// current-state estimates back into the run.
pub fn annotate_run(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    css: &CssStructure,
    run: &mut Run,
    x0set: &StateSet,
) -> Result<Vec<SyncReport>> {
    let mut reports = Vec::new();
    let mut current = nfa.unobservable_reach(arch.observable(), x0set);
    let mut pairs: PairSet = x0set.iter().map(|&x| (x, x)).collect();
    for tau in &run.csi_trace {
        let rel = css.pairs_of(tau)?;
        current = image(rel, &current);
        pairs = compose(&pairs, rel);
        reports.push(SyncReport {
            csi: tau.clone(),
            current: current.clone(),
            initial: pairs.iter().map(|&(a, _)| a).collect(),
        });
    }
    run.per_sync_estimates = Some(reports.iter().map(|r| r.current.clone()).collect());
    Ok(reports)
}
