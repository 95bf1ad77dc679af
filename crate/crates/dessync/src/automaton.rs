//! The plant model: a nondeterministic finite automaton over interned states
//! and events, natural projection, and the two reachability operators
//! (unobservable reach and per-event observable reach) that every
//! construction in this crate is built on.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

/// Interned event identifier. Ordering follows declaration order, which is
/// the canonical order used everywhere (SI-state ordering, DOT/JSON output).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EventId(u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned state identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StateId(u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

pub type StateSet = BTreeSet<StateId>;
pub type EventSet = BTreeSet<EventId>;

/// The plant `G = (X, E, delta, X0)`. Immutable after construction; all
/// operations are pure reads and safe to share across threads.
#[derive(Clone, Debug)]
pub struct Nfa {
    state_names: Vec<String>,
    event_names: Vec<String>,
    state_index: HashMap<String, StateId>,
    event_index: HashMap<String, EventId>,
    // transitions[state][event] -> sorted target states
    transitions: Vec<Vec<Vec<StateId>>>,
    initial: StateSet,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Incremental construction with name interning. Names are restricted to
/// `[A-Za-z0-9_-]+` so the canonical SI-state text form stays unambiguous.
#[derive(Default)]
pub struct NfaBuilder {
    state_names: Vec<String>,
    event_names: Vec<String>,
    state_index: HashMap<String, StateId>,
    event_index: HashMap<String, EventId>,
    transitions: Vec<(StateId, EventId, StateId)>,
    initial: Vec<StateId>,
}

impl NfaBuilder {
    pub fn add_state(&mut self, name: &str) -> Result<StateId> {
        if !valid_name(name) {
            return Err(Error::InvalidName { kind: "state", name: name.into() });
        }
        if self.state_index.contains_key(name) {
            return Err(Error::DuplicateName { kind: "state", name: name.into() });
        }
        let id = StateId(self.state_names.len() as u32);
        self.state_names.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_event(&mut self, name: &str) -> Result<EventId> {
        if !valid_name(name) {
            return Err(Error::InvalidName { kind: "event", name: name.into() });
        }
        if self.event_index.contains_key(name) {
            return Err(Error::DuplicateName { kind: "event", name: name.into() });
        }
        let id = EventId(self.event_names.len() as u32);
        self.event_names.push(name.to_string());
        self.event_index.insert(name.to_string(), id);
        Ok(id)
    }

    fn state(&self, name: &str) -> Result<StateId> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.into()))
    }

    fn event(&self, name: &str) -> Result<EventId> {
        self.event_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEvent(name.into()))
    }

    pub fn add_transition(&mut self, from: &str, event: &str, to: &str) -> Result<()> {
        let t = (self.state(from)?, self.event(event)?, self.state(to)?);
        self.transitions.push(t);
        Ok(())
    }

    pub fn mark_initial(&mut self, name: &str) -> Result<()> {
        let id = self.state(name)?;
        self.initial.push(id);
        Ok(())
    }

    pub fn build(self) -> Result<Nfa> {
        if self.initial.is_empty() {
            return Err(Error::NoInitialState);
        }
        let mut transitions =
            vec![vec![Vec::new(); self.event_names.len()]; self.state_names.len()];
        for (from, event, to) in self.transitions {
            let targets: &mut Vec<StateId> = &mut transitions[from.index()][event.index()];
            if !targets.contains(&to) {
                targets.push(to);
            }
        }
        for row in &mut transitions {
            for targets in row {
                targets.sort_unstable();
            }
        }
        Ok(Nfa {
            state_names: self.state_names,
            event_names: self.event_names,
            state_index: self.state_index,
            event_index: self.event_index,
            transitions,
            initial: self.initial.into_iter().collect(),
        })
    }
}

impl Nfa {
    pub fn builder() -> NfaBuilder {
        NfaBuilder::default()
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn event_count(&self) -> usize {
        self.event_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.state_names.len() as u32).map(StateId)
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.event_names.len() as u32).map(EventId)
    }

    pub fn all_states(&self) -> StateSet {
        self.states().collect()
    }

    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.state_names[id.index()]
    }

    pub fn event_name(&self, id: EventId) -> &str {
        &self.event_names[id.index()]
    }

    pub fn state_named(&self, name: &str) -> Result<StateId> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.into()))
    }

    pub fn event_named(&self, name: &str) -> Result<EventId> {
        self.event_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEvent(name.into()))
    }

    /// Targets of a single labeled transition, sorted by state id.
    pub fn targets(&self, from: StateId, event: EventId) -> &[StateId] {
        &self.transitions[from.index()][event.index()]
    }

    pub fn step_event(&self, sources: &StateSet, event: EventId) -> StateSet {
        let mut out = StateSet::new();
        for &x in sources {
            out.extend(self.targets(x, event).iter().copied());
        }
        out
    }

    /// Extended transition over an event sequence. The empty result is a
    /// legal value meaning the sequence is not executable from `sources`.
    pub fn step(&self, sources: &StateSet, seq: &[EventId]) -> StateSet {
        let mut cur = sources.clone();
        for &e in seq {
            if cur.is_empty() {
                break;
            }
            cur = self.step_event(&cur, e);
        }
        cur
    }

    /// All states reachable from `sources` through events outside
    /// `observable` only. Least fixpoint over the silent-edge graph; always
    /// contains `sources`.
    pub fn unobservable_reach(&self, observable: &EventSet, sources: &StateSet) -> StateSet {
        let mut out = sources.clone();
        let mut stack: Vec<StateId> = sources.iter().copied().collect();
        while let Some(x) = stack.pop() {
            for e in self.events() {
                if observable.contains(&e) {
                    continue;
                }
                for &y in self.targets(x, e) {
                    if out.insert(y) {
                        stack.push(y);
                    }
                }
            }
        }
        out
    }

    /// States reached from `sources` by any string whose projection onto
    /// `observable` is exactly `sigma`: silent closure, one `sigma` step,
    /// silent closure again.
    pub fn observable_reach(
        &self,
        observable: &EventSet,
        sources: &StateSet,
        sigma: EventId,
    ) -> Result<StateSet> {
        if !observable.contains(&sigma) {
            return Err(Error::NotObservable(self.event_name(sigma).into()));
        }
        let pre = self.unobservable_reach(observable, sources);
        let post = self.step_event(&pre, sigma);
        Ok(self.unobservable_reach(observable, &post))
    }

    /// Canonical `{a,b,c}` rendering of a state set, ordered by state id.
    pub fn state_set_text(&self, set: &StateSet) -> String {
        let names: Vec<&str> = set.iter().map(|&x| self.state_name(x)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn state_names_of(&self, set: &StateSet) -> Vec<String> {
        set.iter().map(|&x| self.state_name(x).to_string()).collect()
    }
}

/// Natural projection: erase every event not in `observable`, keeping order.
pub fn project(seq: &[EventId], observable: &EventSet) -> Vec<EventId> {
    seq.iter().copied().filter(|e| observable.contains(e)).collect()
}
