//! The synchronizing-sequence structure: a layered bipartite graph that
//! alternates between state-pair layers and SI-state layers and records, for
//! every seed state, how the plant can evolve under every recordable
//! observation pattern. All estimators and opacity checks are derived from it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automaton::{EventId, Nfa, StateId, StateSet};
use crate::error::{Error, Result};
use crate::protocol::{ObservationArchitecture, SiState, SyncStrategy};

/// One node of a state-pair layer: the seed it descends from, the state the
/// plant may currently be in, and the layer (number of recorded events on the
/// path from the seed).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CssState {
    pub origin: StateId,
    pub current: StateId,
    pub layer: u32,
}

pub type StatePair = (StateId, StateId);

/// The complete structure. `ha` maps state-pair nodes to the SI-states that
/// absorb a recordable event from them; `hr` maps SI-states back to the
/// state-pair nodes the plant may have moved to. Critical SI-states are the
/// ones the coordinator can actually receive.
#[derive(Clone, Debug)]
pub struct CssStructure {
    t0: SiState,
    si_states: BTreeSet<SiState>,
    critical: BTreeSet<SiState>,
    states: BTreeSet<CssState>,
    roots: BTreeSet<CssState>,
    ha: BTreeMap<CssState, BTreeSet<(EventId, SiState)>>,
    hr: BTreeMap<SiState, BTreeSet<(Option<EventId>, CssState)>>,
    pairs: BTreeMap<SiState, BTreeSet<StatePair>>,
}

impl CssStructure {
    /// Saturates the structure from the given seed states. With a single seed
    /// this is the per-state structure; with all plant states it is the full
    /// structure every reversal argument needs.
    pub fn build(nfa: &Nfa, arch: &ObservationArchitecture, seeds: &StateSet) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::EmptySeeds);
        }
        build_inner(nfa, arch, seeds, false)
    }

    /// Algorithm-style construction from the plant's initial states: whenever
    /// a critical SI-state maps to new current states, those states become
    /// fresh seeds, so the result contains exactly the SI-states realizable
    /// during system evolution.
    pub fn build_feasible(nfa: &Nfa, arch: &ObservationArchitecture) -> Result<Self> {
        build_inner(nfa, arch, nfa.initial(), true)
    }

    pub fn t0(&self) -> &SiState {
        &self.t0
    }

    /// All SI-states reachable in the structure, including the initial one.
    pub fn si_states(&self) -> &BTreeSet<SiState> {
        &self.si_states
    }

    /// The critical SI-states (the estimator alphabet).
    pub fn critical(&self) -> &BTreeSet<SiState> {
        &self.critical
    }

    pub fn states(&self) -> &BTreeSet<CssState> {
        &self.states
    }

    pub fn roots(&self) -> &BTreeSet<CssState> {
        &self.roots
    }

    pub fn ha_edges(&self) -> impl Iterator<Item = (&CssState, EventId, &SiState)> {
        self.ha
            .iter()
            .flat_map(|(rho, out)| out.iter().map(move |(e, tau)| (rho, *e, tau)))
    }

    pub fn hr_edges(&self) -> impl Iterator<Item = (&SiState, Option<EventId>, &CssState)> {
        self.hr
            .iter()
            .flat_map(|(tau, out)| out.iter().map(move |(e, rho)| (tau, *e, rho)))
    }

    pub fn hr_from(&self, tau: &SiState) -> impl Iterator<Item = (Option<EventId>, &CssState)> {
        self.hr
            .get(tau)
            .into_iter()
            .flat_map(|out| out.iter().map(|(e, rho)| (*e, rho)))
    }

    /// The state pairs a critical SI-state maps to: every (seed, current)
    /// connected by a behavior whose per-site projections equal the SI-state's
    /// components. Usage error on non-critical SI-states.
    pub fn pairs_of(&self, tau: &SiState) -> Result<&BTreeSet<StatePair>> {
        if !self.critical.contains(tau) {
            return Err(Error::NotCritical(tau.id_text()));
        }
        Ok(self.pairs.get(tau).expect("critical SI-state has hr targets"))
    }

    /// Same as [`pairs_of`](Self::pairs_of) but for any SI-state reached by
    /// `hr`, critical or not. Returns `None` for the initial SI-state and for
    /// SI-states not in the structure.
    pub fn relation_of(&self, tau: &SiState) -> Option<&BTreeSet<StatePair>> {
        self.pairs.get(tau)
    }

    pub fn max_layer(&self) -> u32 {
        self.states.iter().map(|s| s.layer).max().unwrap_or(0)
    }

    /// Node count over both kinds of layers, the quantity the size bound in
    /// [`Bounds::max_css_states`] speaks about.
    pub fn node_count(&self) -> usize {
        self.states.len() + self.si_states.len()
    }
}

fn build_inner(
    nfa: &Nfa,
    arch: &ObservationArchitecture,
    seeds: &StateSet,
    reroot: bool,
) -> Result<CssStructure> {
    let t0 = arch.initial_si();
    let mut css = CssStructure {
        t0: t0.clone(),
        si_states: [t0.clone()].into_iter().collect(),
        critical: BTreeSet::new(),
        states: BTreeSet::new(),
        roots: BTreeSet::new(),
        ha: BTreeMap::new(),
        hr: BTreeMap::new(),
        pairs: BTreeMap::new(),
    };

    let mut reach_cache: HashMap<(StateId, EventId), StateSet> = HashMap::new();
    let mut root_queue: VecDeque<StateId> = seeds.iter().copied().collect();
    let mut seen_roots: BTreeSet<StateId> = BTreeSet::new();

    while let Some(seed) = root_queue.pop_front() {
        if !seen_roots.insert(seed) {
            continue;
        }
        let root = CssState { origin: seed, current: seed, layer: 0 };
        css.states.insert(root);
        css.roots.insert(root);
        css.hr.entry(t0.clone()).or_default().insert((None, root));

        // Layered expansion for this seed. Every hr edge into layer l+1 is
        // created while processing layer l, so a strict per-layer sweep sees
        // all incoming SI-states of a node before expanding it.
        let mut frontier: BTreeMap<CssState, BTreeSet<SiState>> =
            [(root, [t0.clone()].into_iter().collect())].into_iter().collect();
        let mut layer = 0u32;
        while !frontier.is_empty() {
            let mut next: BTreeMap<CssState, BTreeSet<SiState>> = BTreeMap::new();
            for (rho, incoming) in &frontier {
                for tau_in in incoming {
                    if arch.is_critical(tau_in)? {
                        continue;
                    }
                    for &sigma in arch.observable() {
                        let targets = reach_cache
                            .entry((rho.current, sigma))
                            .or_insert_with(|| {
                                let from = [rho.current].into_iter().collect();
                                nfa.observable_reach(arch.observable(), &from, sigma)
                                    .expect("sigma is observable")
                            })
                            .clone();
                        if targets.is_empty() {
                            continue;
                        }
                        let tau = arch.absorb(nfa, tau_in, sigma)?;
                        let critical = arch.is_critical(&tau)?;
                        css.si_states.insert(tau.clone());
                        if critical {
                            css.critical.insert(tau.clone());
                        }
                        css.ha.entry(*rho).or_default().insert((sigma, tau.clone()));
                        for &y in &targets {
                            let succ = CssState {
                                origin: rho.origin,
                                current: y,
                                layer: layer + 1,
                            };
                            css.hr.entry(tau.clone()).or_default().insert((Some(sigma), succ));
                            css.pairs.entry(tau.clone()).or_default().insert((rho.origin, y));
                            css.states.insert(succ);
                            next.entry(succ).or_default().insert(tau.clone());
                            if reroot && critical {
                                root_queue.push_back(y);
                            }
                        }
                    }
                }
            }
            frontier = next;
            layer += 1;
        }
    }
    Ok(css)
}

/// Structure size bounds derived from the architecture. The `*_bound` fields
/// are the exact forms used for assertions; `delta` and `delta_c` keep the
/// coarser headline approximations for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Exact bound on SI-states that cannot trigger a synchronization:
    /// product over sites of the geometric sums `1 + |E_i| + ... + |E_i|^(kappa_i-1)`.
    pub noncritical_bound: u64,
    /// Exact bound on all SI-states: `(1 + |E_I|) * noncritical_bound`
    /// (every critical SI-state is one absorption past a non-critical one).
    pub si_state_bound: u64,
    /// Headline approximation `(|E_I| + 1) * prod |E_i|^(kappa_i - 1)`.
    pub delta: u64,
    /// Headline approximation `|E_I| * prod |E_i|^(kappa_i - 1)` for the
    /// critical SI-state count.
    pub delta_c: u64,
    /// Longest observable event sequence a single segment can hold:
    /// `sum (kappa_i - 1) + 1`, also the largest possible layer.
    pub l_u: u32,
    /// `l_u * |X|^2 + |X| + si_state_bound`: bound on the node count of any
    /// structure built from a single seed set expansion.
    pub max_css_states: u64,
}

/// Computes the size bounds for a plant under an architecture.
pub fn size_bounds(arch: &ObservationArchitecture, nfa: &Nfa) -> Bounds {
    let mut noncritical: u64 = 1;
    let mut headline_prod: u64 = 1;
    let mut lu_sum: u64 = 0;
    for site in arch.sites() {
        let k = site.observable.len() as u64;
        let kappa = site.kappa as u32;
        // 1 + k + ... + k^(kappa-1), with 0^0 = 1 for the empty record
        let mut geo: u64 = 0;
        let mut pow: u64 = 1;
        for _ in 0..kappa {
            geo = geo.saturating_add(pow);
            pow = pow.saturating_mul(k);
        }
        noncritical = noncritical.saturating_mul(geo);
        headline_prod = headline_prod.saturating_mul(k.saturating_pow(kappa - 1));
        lu_sum += (site.kappa - 1) as u64;
    }
    let e_i = arch.observable().len() as u64;
    let n = nfa.state_count() as u64;
    let l_u = (lu_sum + 1) as u32;
    let si_state_bound = noncritical.saturating_mul(e_i + 1);
    Bounds {
        noncritical_bound: noncritical,
        si_state_bound,
        delta: headline_prod.saturating_mul(e_i + 1),
        delta_c: headline_prod.saturating_mul(e_i),
        l_u,
        max_css_states: (l_u as u64)
            .saturating_mul(n.saturating_mul(n))
            .saturating_add(n)
            .saturating_add(si_state_bound),
    }
}
