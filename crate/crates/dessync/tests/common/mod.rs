//! Shared helpers for the integration suites: the bundled fixture, a seeded
//! random-instance generator within the exercised bounds, CSI-sequence
//! enumeration over observers, and a memo for oracle segment relations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use dessync::model::{ModelFile, SiteSpec, TransitionSpec};
use dessync::oracle;
use dessync::{CompiledModel, Observer, SiState, StatePair, StateSet};

pub const FIXTURE: &str = include_str!("../../fixtures/fixture.json");
pub const FIXTURE_ALL_INITIAL: &str = include_str!("../../fixtures/fixture_all_initial.json");
pub const GOLDEN_FACTS: &str = include_str!("../../fixtures/golden_facts.json");

pub fn fixture() -> CompiledModel {
    ModelFile::parse(FIXTURE).unwrap().build().unwrap()
}

pub fn fixture_all_initial() -> CompiledModel {
    ModelFile::parse(FIXTURE_ALL_INITIAL).unwrap().build().unwrap()
}

pub fn fixture_path() -> String {
    format!("{}/fixtures/fixture.json", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_all_initial_path() -> String {
    format!("{}/fixtures/fixture_all_initial.json", env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_facts_path() -> String {
    format!("{}/fixtures/golden_facts.json", env!("CARGO_MANIFEST_DIR"))
}

/// Base seed for the instance generator; override with DESSYNC_SEED.
pub fn base_seed() -> u64 {
    std::env::var("DESSYNC_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0xD0_55EED)
}

pub struct Instance {
    pub file: ModelFile,
    pub model: CompiledModel,
    pub seed: u64,
}

impl Instance {
    /// Generation parameters for failure reports.
    pub fn describe(&self) -> String {
        format!("seed {}: {}", self.seed, self.file.to_json())
    }
}

/// One random instance within the exercised bounds: up to 6 states, 5 events,
/// 3 sites, thresholds up to 3, shared and unobservable events allowed.
pub fn instance_from_seed(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let file = random_model(&mut rng);
    let model = file.build().expect("generated models validate");
    Instance { file, model, seed }
}

pub fn instances(count: usize) -> Vec<Instance> {
    let base = base_seed();
    (0..count as u64).map(|i| instance_from_seed(base.wrapping_add(i))).collect()
}

fn random_model(rng: &mut ChaCha8Rng) -> ModelFile {
    let n_states = rng.gen_range(2..=6);
    let n_events = rng.gen_range(2..=5);
    let n_sites = rng.gen_range(1..=3);
    let states: Vec<String> = (0..n_states).map(|i| format!("s{i}")).collect();
    let events: Vec<String> = (0..n_events).map(|i| format!("e{i}")).collect();

    let mut transitions = Vec::new();
    for from in &states {
        let degree = match rng.gen_range(0..100) {
            0..=14 => 0,
            15..=64 => 1,
            _ => 2,
        };
        for _ in 0..degree {
            let event = events.choose(rng).unwrap().clone();
            let mut to = vec![states.choose(rng).unwrap().clone()];
            if rng.gen_bool(0.2) {
                to.push(states.choose(rng).unwrap().clone());
            }
            to.sort();
            to.dedup();
            transitions.push(TransitionSpec { from: from.clone(), event, to });
        }
    }

    let mut sites = Vec::new();
    for i in 0..n_sites {
        let size = if rng.gen_bool(0.1) { 0 } else { rng.gen_range(1..=3.min(n_events)) };
        let mut observed: Vec<String> = events.clone();
        observed.shuffle(rng);
        observed.truncate(size);
        observed.sort();
        sites.push(SiteSpec {
            name: format!("O{}", i + 1),
            events: observed,
            kappa: rng.gen_range(1..=3),
        });
    }

    let mut initial: Vec<String> = states.clone();
    initial.shuffle(rng);
    initial.truncate(rng.gen_range(1..=2));
    initial.sort();

    ModelFile { states, events, initial, transitions, sites, secret: None }
}

/// All CSI-sequences labeling paths of the observer from its initial state,
/// up to the given length, in breadth-first order (the empty sequence first).
pub fn observer_paths(obs: &Observer, max_len: usize, cap: usize) -> Vec<Vec<SiState>> {
    let mut adjacency: BTreeMap<usize, Vec<(SiState, usize)>> = BTreeMap::new();
    for ((from, tau), to) in &obs.transitions {
        adjacency.entry(*from).or_default().push((tau.clone(), *to));
    }
    let mut paths: Vec<(usize, Vec<SiState>)> = vec![(obs.initial, Vec::new())];
    let mut head = 0;
    while head < paths.len() && paths.len() < cap {
        let (q, path) = paths[head].clone();
        head += 1;
        if path.len() == max_len {
            continue;
        }
        for (tau, to) in adjacency.get(&q).into_iter().flatten() {
            let mut next = path.clone();
            next.push(tau.clone());
            paths.push((*to, next));
            if paths.len() == cap {
                break;
            }
        }
    }
    paths.into_iter().map(|(_, p)| p).collect()
}

/// Memoized oracle segment relations for one instance.
pub struct OracleCache<'a> {
    model: &'a CompiledModel,
    rels: BTreeMap<SiState, BTreeSet<StatePair>>,
}

impl<'a> OracleCache<'a> {
    pub fn new(model: &'a CompiledModel) -> Self {
        OracleCache { model, rels: BTreeMap::new() }
    }

    pub fn relation(&mut self, tau: &SiState) -> &BTreeSet<StatePair> {
        if !self.rels.contains_key(tau) {
            let rel = oracle::segment_relation(&self.model.nfa, &self.model.arch, tau)
                .expect("well-formed SI-state");
            self.rels.insert(tau.clone(), rel);
        }
        &self.rels[tau]
    }

    /// Definitional current-state estimate, folding memoized relations.
    pub fn current(&mut self, iota: &[SiState], x0: &StateSet) -> StateSet {
        if iota.is_empty() {
            return oracle::unobservable_closure(&self.model.nfa, &self.model.arch, x0);
        }
        let mut cur = x0.clone();
        for tau in iota {
            let rel = self.relation(tau);
            cur = rel.iter().filter(|(a, _)| cur.contains(a)).map(|&(_, b)| b).collect();
        }
        cur
    }

    /// Definitional initial-state estimate, folding memoized relations.
    pub fn initial(&mut self, iota: &[SiState], x0: &StateSet) -> StateSet {
        if iota.is_empty() {
            return x0.clone();
        }
        let mut pairs: BTreeSet<StatePair> = x0.iter().map(|&x| (x, x)).collect();
        for tau in iota {
            let rel = self.relation(tau);
            let mut next = BTreeSet::new();
            for &(a, b) in &pairs {
                for &(b2, c) in rel.iter() {
                    if b == b2 {
                        next.insert((a, c));
                    }
                }
            }
            pairs = next;
        }
        pairs.iter().map(|&(a, _)| a).collect()
    }
}

/// Confirms a CSI-sequence is realizable by producing a plant string and
/// replaying it. Panics with context on mismatch.
pub fn assert_realizable(model: &CompiledModel, iota: &[SiState], context: &str) {
    let s = oracle::realize(&model.nfa, &model.arch, iota, model.nfa.initial())
        .expect("well-formed sequence")
        .unwrap_or_else(|| panic!("sequence not realizable: {context}"));
    let run = dessync::replay(&model.nfa, &model.arch, &s).expect("realized string is in L(G)");
    assert_eq!(run.csi_trace, iota, "replayed projection differs: {context}");
}

/// A fixed larger plant for the smoke check: 50 states, three sites with two
/// disjoint observable events each, two silent events, thresholds of 3.
pub fn large_instance(seed: u64) -> CompiledModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<String> = (0..50).map(|i| format!("s{i}")).collect();
    let events: Vec<String> =
        ["a1", "b1", "a2", "b2", "a3", "b3", "u1", "u2"].iter().map(|s| s.to_string()).collect();
    let mut transitions = Vec::new();
    for from in &states {
        for _ in 0..2 {
            let event = events.choose(&mut rng).unwrap().clone();
            transitions.push(TransitionSpec {
                from: from.clone(),
                event,
                to: vec![states.choose(&mut rng).unwrap().clone()],
            });
        }
    }
    let sites = vec![
        SiteSpec { name: "O1".into(), events: vec!["a1".into(), "b1".into()], kappa: 3 },
        SiteSpec { name: "O2".into(), events: vec!["a2".into(), "b2".into()], kappa: 3 },
        SiteSpec { name: "O3".into(), events: vec!["a3".into(), "b3".into()], kappa: 3 },
    ];
    let file = ModelFile {
        states,
        events,
        initial: vec!["s0".into()],
        transitions,
        sites,
        secret: None,
    };
    file.build().expect("large instance validates")
}
