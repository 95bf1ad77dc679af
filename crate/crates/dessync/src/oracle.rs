//! Independent reference implementation of the definitions the constructions
//! are checked against. Everything here quantifies over plant strings
//! directly — per-event steps, projection matching and the synchronization
//! rule — and shares none of the layered-structure or observer machinery.
//! It is deliberately naive and only meant for small instances.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::automaton::{EventId, Nfa, StateId, StateSet};
use crate::css::StatePair;
use crate::error::{Error, Result};
use crate::protocol::{replay, ObservationArchitecture, SiState, SyncStrategy};

/// States reachable through events no site observes, by literal single steps.
pub fn unobservable_closure(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    sources: &StateSet,
) -> StateSet {
    let mut out = sources.clone();
    let mut queue: VecDeque<StateId> = sources.iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        for e in nfa.events() {
            if arch.observable().contains(&e) {
                continue;
            }
            for &y in nfa.targets(x, e) {
                if out.insert(y) {
                    queue.push_back(y);
                }
            }
        }
    }
    out
}

/// States reached by any string whose coordinator projection is exactly
/// `sigma`, evaluated from the definition.
pub fn sigma_reach(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    sources: &StateSet,
    sigma: EventId,
) -> Result<StateSet> {
    if !arch.observable().contains(&sigma) {
        return Err(Error::NotObservable(nfa.event_name(sigma).into()));
    }
    let mut mid = StateSet::new();
    for x in unobservable_closure(nfa, arch, sources) {
        mid.extend(nfa.targets(x, sigma).iter().copied());
    }
    Ok(unobservable_closure(nfa, arch, &mid))
}

/// All strings of the plant language with at most `max_observable` events the
/// coordinator can see and at most `max_unobservable_run` consecutive silent
/// events. The result is prefix-closed by construction.
pub fn enumerate_language(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    max_observable: usize,
    max_unobservable_run: usize,
) -> Vec<Vec<EventId>> {
    let mut out = Vec::new();
    let mut stack: Vec<(StateSet, Vec<EventId>, usize, usize)> =
        vec![(nfa.initial().clone(), Vec::new(), 0, 0)];
    while let Some((states, prefix, obs, run)) = stack.pop() {
        out.push(prefix.clone());
        // reverse event order so the stack pops in canonical order
        for e in nfa.events().collect::<Vec<_>>().into_iter().rev() {
            let observable = arch.observable().contains(&e);
            if observable && obs == max_observable {
                continue;
            }
            if !observable && run == max_unobservable_run {
                continue;
            }
            let next = nfa.step_event(&states, e);
            if next.is_empty() {
                continue;
            }
            let mut ext = prefix.clone();
            ext.push(e);
            if observable {
                stack.push((next, ext, obs + 1, 0));
            } else {
                stack.push((next, ext, obs, run + 1));
            }
        }
    }
    out
}

// A projection-progress point: how many events of each component have been
// produced so far. Together with a plant state it identifies everything a
// matching string's future depends on.
type Progress = Vec<usize>;
type Config = (StateId, Progress);

struct SegmentSearch<'a> {
    nfa: &'a Nfa,
    arch: &'a ObservationArchitecture,
    tau: &'a SiState,
    final_progress: Progress,
}

impl<'a> SegmentSearch<'a> {
    fn new(nfa: &'a Nfa, arch: &'a ObservationArchitecture, tau: &'a SiState) -> Result<Self> {
        // validates component arity and thresholds
        arch.is_critical(tau)?;
        let final_progress: Progress = tau.components().iter().map(Vec::len).collect();
        Ok(SegmentSearch { nfa, arch, tau, final_progress })
    }

    fn critical(&self, p: &Progress) -> bool {
        p.iter().zip(self.arch.sites()).any(|(&len, site)| len == site.kappa)
    }

    fn advance(&self, p: &Progress, sigma: EventId) -> Option<Progress> {
        let mut q = p.clone();
        for &i in self.arch.observing_sites(sigma) {
            let comp = self.tau.component(i);
            if p[i] >= comp.len() || comp[p[i]] != sigma {
                return None;
            }
            q[i] = p[i] + 1;
        }
        Some(q)
    }

    /// Breadth-first search over (state, progress) from one start state.
    /// Returns parent pointers for path extraction; a synchronization firing
    /// before the whole pattern is produced kills the branch.
    fn search(&self, start: StateId) -> HashMap<Config, Option<(Config, EventId)>> {
        let p0: Progress = vec![0; self.arch.site_count()];
        let start_cfg: Config = (start, p0);
        let mut parents: HashMap<Config, Option<(Config, EventId)>> =
            [(start_cfg.clone(), None)].into_iter().collect();
        let mut queue = VecDeque::from([start_cfg]);
        while let Some((x, p)) = queue.pop_front() {
            for e in self.nfa.events() {
                let next_p = if self.arch.observable().contains(&e) {
                    match self.advance(&p, e) {
                        Some(q) if !self.critical(&q) || q == self.final_progress => q,
                        _ => continue,
                    }
                } else {
                    p.clone()
                };
                for &y in self.nfa.targets(x, e) {
                    let cfg = (y, next_p.clone());
                    parents.entry(cfg.clone()).or_insert_with(|| {
                        queue.push_back(cfg);
                        Some(((x, p.clone()), e))
                    });
                }
            }
        }
        parents
    }

    fn endpoints(&self, parents: &HashMap<Config, Option<(Config, EventId)>>) -> StateSet {
        parents
            .keys()
            .filter(|(_, p)| *p == self.final_progress)
            .map(|&(y, _)| y)
            .collect()
    }

    fn path_to(
        &self,
        parents: &HashMap<Config, Option<(Config, EventId)>>,
        end: StateId,
    ) -> Option<Vec<EventId>> {
        let mut cfg: Config = (end, self.final_progress.clone());
        parents.get(&cfg)?;
        let mut events = Vec::new();
        while let Some(Some((prev, e))) = parents.get(&cfg) {
            events.push(*e);
            cfg = prev.clone();
        }
        events.reverse();
        Some(events)
    }
}

/// The definitional pair relation of one SI-state: all (x, x') such that some
/// string from x reaches x' with per-site projections exactly the SI-state's
/// components and no earlier synchronization point.
pub fn segment_relation(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    tau: &SiState,
) -> Result<BTreeSet<StatePair>> {
    let search = SegmentSearch::new(nfa, arch, tau)?;
    let mut out = BTreeSet::new();
    for x in nfa.states() {
        let parents = search.search(x);
        for y in search.endpoints(&parents) {
            out.insert((x, y));
        }
    }
    Ok(out)
}

fn image(rel: &BTreeSet<StatePair>, from: &StateSet) -> StateSet {
    rel.iter().filter(|(a, _)| from.contains(a)).map(|&(_, b)| b).collect()
}

fn compose(m: &BTreeSet<StatePair>, rel: &BTreeSet<StatePair>) -> BTreeSet<StatePair> {
    let mut out = BTreeSet::new();
    for &(a, b) in m {
        for &(b2, c) in rel {
            if b == b2 {
                out.insert((a, c));
            }
        }
    }
    out
}

/// Definitional current-state estimate after a CSI-sequence: the states
/// reachable right after the last synchronization (silent closure included)
/// over all matching strings from `x0set`.
pub fn current_estimate(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    iota: &[SiState],
    x0set: &StateSet,
) -> Result<StateSet> {
    if iota.is_empty() {
        return Ok(unobservable_closure(nfa, arch, x0set));
    }
    let mut cur = x0set.clone();
    for tau in iota {
        cur = image(&segment_relation(nfa, arch, tau)?, &cur);
    }
    Ok(cur)
}

/// Definitional initial-state estimate: the members of `x0set` from which
/// some string realizes the whole CSI-sequence.
pub fn initial_estimate(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    iota: &[SiState],
    x0set: &StateSet,
) -> Result<StateSet> {
    if iota.is_empty() {
        return Ok(x0set.clone());
    }
    let mut rel = segment_relation(nfa, arch, &iota[0])?;
    for tau in &iota[1..] {
        rel = compose(&rel, &segment_relation(nfa, arch, tau)?);
    }
    Ok(x0set.iter().copied().filter(|x| rel.iter().any(|(a, _)| a == x)).collect())
}

/// Produces a concrete plant string from `x0set` whose coordinator projection
/// is exactly `iota`, or `None` if the sequence is not realizable.
pub fn realize(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    iota: &[SiState],
    x0set: &StateSet,
) -> Result<Option<Vec<EventId>>> {
    if x0set.is_empty() {
        return Ok(None);
    }
    if iota.is_empty() {
        return Ok(Some(Vec::new()));
    }
    let searches: Vec<SegmentSearch> = iota
        .iter()
        .map(|tau| SegmentSearch::new(nfa, arch, tau))
        .collect::<Result<_>>()?;
    let rels: Vec<BTreeSet<StatePair>> = iota
        .iter()
        .map(|tau| segment_relation(nfa, arch, tau))
        .collect::<Result<_>>()?;

    // forward levels of reachable states, then one chain back through them
    let mut levels: Vec<StateSet> = vec![x0set.clone()];
    for rel in &rels {
        let next = image(rel, levels.last().expect("nonempty"));
        if next.is_empty() {
            return Ok(None);
        }
        levels.push(next);
    }
    let mut chain: Vec<StateId> = vec![*levels.last().expect("nonempty").iter().next().unwrap()];
    for j in (0..rels.len()).rev() {
        let target = *chain.last().unwrap();
        let prev = levels[j]
            .iter()
            .copied()
            .find(|&a| rels[j].contains(&(a, target)))
            .expect("forward level admits a predecessor");
        chain.push(prev);
    }
    chain.reverse();

    let mut string = Vec::new();
    for (j, search) in searches.iter().enumerate() {
        let parents = search.search(chain[j]);
        let seg = search
            .path_to(&parents, chain[j + 1])
            .expect("relation member has a realizing path");
        string.extend(seg);
    }
    Ok(Some(string))
}

/// Every SI-state the coordinator-side record can hold along any plant string
/// (second component: the critical ones), computed by a fixpoint over
/// (plant state, pending record) configurations.
pub fn reachable_si_states(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
) -> Result<(BTreeSet<SiState>, BTreeSet<SiState>)> {
    let t0 = arch.initial_si();
    let mut all: BTreeSet<SiState> = [t0.clone()].into_iter().collect();
    let mut critical = BTreeSet::new();
    let mut seen: BTreeSet<(StateId, SiState)> = BTreeSet::new();
    let mut queue: VecDeque<(StateId, SiState)> = VecDeque::new();
    for &x0 in nfa.initial() {
        if seen.insert((x0, t0.clone())) {
            queue.push_back((x0, t0.clone()));
        }
    }
    while let Some((x, tau)) = queue.pop_front() {
        for e in nfa.events() {
            let targets = nfa.targets(x, e);
            if targets.is_empty() {
                continue;
            }
            let next_tau = if arch.observable().contains(&e) {
                let absorbed = arch.absorb(nfa, &tau, e)?;
                all.insert(absorbed.clone());
                if arch.is_critical(&absorbed)? {
                    critical.insert(absorbed);
                    t0.clone()
                } else {
                    absorbed
                }
            } else {
                tau.clone()
            };
            for &y in targets {
                if seen.insert((y, next_tau.clone())) {
                    queue.push_back((y, next_tau.clone()));
                }
            }
        }
    }
    Ok((all, critical))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    Current,
    Initial,
}

/// One checkable fact about the bundled fixture, stored as plain data next to
/// the model file. `source` is a free-form label naming what the fact pins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GoldenFact {
    UnobservableReach { from: Vec<String>, expect: Vec<String>, source: String },
    ObservableReach { event: String, from: Vec<String>, expect: Vec<String>, source: String },
    StepContains { from: Vec<String>, trace: Vec<String>, expect: Vec<String>, source: String },
    SiTrace { trace: Vec<String>, expect: Vec<String>, source: String },
    Estimate {
        mode: EstimateMode,
        csi: Vec<String>,
        from: Vec<String>,
        expect: Vec<String>,
        source: String,
    },
    PairMembers { csi: String, pairs: Vec<[String; 2]>, source: String },
}

impl GoldenFact {
    pub fn source(&self) -> &str {
        match self {
            GoldenFact::UnobservableReach { source, .. }
            | GoldenFact::ObservableReach { source, .. }
            | GoldenFact::StepContains { source, .. }
            | GoldenFact::SiTrace { source, .. }
            | GoldenFact::Estimate { source, .. }
            | GoldenFact::PairMembers { source, .. } => source,
        }
    }

    pub fn parse_list(json: &str) -> Result<Vec<GoldenFact>> {
        Ok(serde_json::from_str(json)?)
    }
}

#[derive(Clone, Debug)]
pub struct FactOutcome {
    pub source: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct FactReport {
    pub outcomes: Vec<FactOutcome>,
}

impl FactReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }

    pub fn ensure(&self) -> Result<()> {
        if self.all_pass() {
            return Ok(());
        }
        let failed: Vec<&str> = self
            .outcomes
            .iter()
            .filter(|o| !o.pass)
            .map(|o| o.source.as_str())
            .collect();
        Err(Error::FactsFailed(failed.join(", ")))
    }
}

fn resolve_states(nfa: &Nfa, names: &[String]) -> Result<StateSet> {
    names.iter().map(|n| nfa.state_named(n)).collect()
}

fn resolve_events(nfa: &Nfa, names: &[String]) -> Result<Vec<EventId>> {
    names.iter().map(|n| nfa.event_named(n)).collect()
}

/// Evaluates every fact against the definitional implementations above and
/// reports pass/fail per fact.
pub fn check_golden_facts(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    facts: &[GoldenFact],
) -> Result<FactReport> {
    let mut report = FactReport::default();
    for fact in facts {
        let (pass, detail) = evaluate_fact(nfa, arch, fact)?;
        report.outcomes.push(FactOutcome { source: fact.source().to_string(), pass, detail });
    }
    Ok(report)
}

fn evaluate_fact(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    fact: &GoldenFact,
) -> Result<(bool, String)> {
    match fact {
        GoldenFact::UnobservableReach { from, expect, .. } => {
            let got = unobservable_closure(nfa, arch, &resolve_states(nfa, from)?);
            let expect = resolve_states(nfa, expect)?;
            Ok((got == expect, nfa.state_set_text(&got)))
        }
        GoldenFact::ObservableReach { event, from, expect, .. } => {
            let sigma = nfa.event_named(event)?;
            let got = sigma_reach(nfa, arch, &resolve_states(nfa, from)?, sigma)?;
            let expect = resolve_states(nfa, expect)?;
            Ok((got == expect, nfa.state_set_text(&got)))
        }
        GoldenFact::StepContains { from, trace, expect, .. } => {
            let got = nfa.step(&resolve_states(nfa, from)?, &resolve_events(nfa, trace)?);
            let expect = resolve_states(nfa, expect)?;
            Ok((expect.is_subset(&got), nfa.state_set_text(&got)))
        }
        GoldenFact::SiTrace { trace, expect, .. } => {
            match replay(nfa, arch, &resolve_events(nfa, trace)?) {
                Ok(run) => {
                    let got: Vec<String> = run.csi_trace.iter().map(|t| t.text(nfa)).collect();
                    let pass = got == *expect;
                    Ok((pass, got.join(" ")))
                }
                Err(Error::NotInLanguage) => {
                    Ok((false, "trace not in the plant language".into()))
                }
                Err(e) => Err(e),
            }
        }
        GoldenFact::Estimate { mode, csi, from, expect, .. } => {
            let iota: Vec<SiState> =
                csi.iter().map(|t| SiState::parse(t, nfa, arch)).collect::<Result<_>>()?;
            let x0 = resolve_states(nfa, from)?;
            let got = match mode {
                EstimateMode::Current => current_estimate(nfa, arch, &iota, &x0)?,
                EstimateMode::Initial => initial_estimate(nfa, arch, &iota, &x0)?,
            };
            let expect = resolve_states(nfa, expect)?;
            Ok((got == expect, nfa.state_set_text(&got)))
        }
        GoldenFact::PairMembers { csi, pairs, .. } => {
            let tau = SiState::parse(csi, nfa, arch)?;
            let rel = segment_relation(nfa, arch, &tau)?;
            let mut missing = Vec::new();
            for [a, b] in pairs {
                let pair = (nfa.state_named(a)?, nfa.state_named(b)?);
                if !rel.contains(&pair) {
                    missing.push(format!("({a},{b})"));
                }
            }
            let pass = missing.is_empty();
            let detail = if pass { format!("{} pairs", rel.len()) } else { missing.join(" ") };
            Ok((pass, detail))
        }
    }
}
