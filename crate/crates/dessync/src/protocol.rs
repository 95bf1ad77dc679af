//! The observation protocol: sites, synchronization-information states,
//! the absorbing transition, the threshold-based synchronization strategy,
//! and replay of a plant string into its run decomposition.
//!
//! Each observation site records the projection of the plant behavior onto
//! its own alphabet. When any site's record reaches its threshold, all sites
//! transmit to the coordinator and reset. What the coordinator sees along a
//! string is the sequence of critical SI-states emitted at those instants.

use std::collections::BTreeMap;

use crate::automaton::{EventId, EventSet, Nfa, StateSet};
use crate::error::{Error, Result};

/// One observation site: its alphabet `E_i` and record threshold.
#[derive(Clone, Debug)]
pub struct Site {
    /// 1-based site number.
    pub index: usize,
    pub name: String,
    pub observable: EventSet,
    /// Record length that triggers a synchronization request. Must be >= 1.
    pub kappa: usize,
}

/// Synchronization-information state: one recorded event sequence per site.
///
/// Equality, hashing and ordering are the canonical ones (lexicographic over
/// components in site order, events ordered by interned id), so values can be
/// deduplicated and printed reproducibly.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SiState {
    components: Vec<Vec<EventId>>,
}

impl SiState {
    pub fn initial(site_count: usize) -> Self {
        SiState { components: vec![Vec::new(); site_count] }
    }

    pub fn components(&self) -> &[Vec<EventId>] {
        &self.components
    }

    pub fn component(&self, site: usize) -> &[EventId] {
        &self.components[site]
    }

    pub fn is_initial(&self) -> bool {
        self.components.iter().all(|c| c.is_empty())
    }

    /// Canonical text form used in logs, DOT labels and JSON: components
    /// joined by `|`, events within a component joined by `.`, the whole
    /// wrapped in parentheses. Example: `(a12.a12|a12.a12|g3)`.
    pub fn text(&self, nfa: &Nfa) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| c.iter().map(|&e| nfa.event_name(e)).collect::<Vec<_>>().join("."))
            .collect();
        format!("({})", parts.join("|"))
    }

    /// Raw id-based rendering for error messages when no name table is at hand.
    pub(crate) fn id_text(&self) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| c.iter().map(|e| format!("#{}", e.index())).collect::<Vec<_>>().join("."))
            .collect();
        format!("({})", parts.join("|"))
    }

    /// Parses the canonical text form, validating component count, event
    /// membership in each site alphabet and the per-site thresholds.
    pub fn parse(text: &str, nfa: &Nfa, arch: &ObservationArchitecture) -> Result<Self> {
        let fail = |reason: &str| Error::SiStateParse { text: text.into(), reason: reason.into() };
        let inner = text
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| fail("missing surrounding parentheses"))?;
        let parts: Vec<&str> = inner.split('|').collect();
        if parts.len() != arch.site_count() {
            return Err(fail(&format!(
                "expected {} components, found {}",
                arch.site_count(),
                parts.len()
            )));
        }
        let mut components = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let mut comp = Vec::new();
            if !part.is_empty() {
                for name in part.split('.') {
                    let e = nfa.event_named(name)?;
                    if !arch.sites()[i].observable.contains(&e) {
                        return Err(fail(&format!(
                            "event `{name}` is not observable by site {}",
                            i + 1
                        )));
                    }
                    comp.push(e);
                }
            }
            if comp.len() > arch.sites()[i].kappa {
                return Err(fail(&format!("component {} exceeds its threshold", i + 1)));
            }
            components.push(comp);
        }
        Ok(SiState { components })
    }
}

/// A synchronization strategy decides which SI-states are critical (trigger a
/// synchronization) and how events are recorded. The threshold strategy
/// shipped with [`ObservationArchitecture`] is the standard one; any other
/// finite-state strategy can implement this trait instead.
pub trait SyncStrategy {
    fn initial_si(&self) -> SiState;

    /// True iff some component has reached its trigger condition. An SI-state
    /// whose component is past the threshold is corrupted and reported as such.
    fn is_critical(&self, tau: &SiState) -> Result<bool>;

    /// Records `sigma` into every observing site's component. Undefined on
    /// critical SI-states and on events no site observes.
    fn absorb(&self, nfa: &Nfa, tau: &SiState, sigma: EventId) -> Result<SiState>;
}

/// The full observation architecture: the ordered sites, the union alphabet
/// `E_I`, and the per-event observer index sets `I(sigma)`. Immutable after
/// validation.
#[derive(Clone, Debug)]
pub struct ObservationArchitecture {
    sites: Vec<Site>,
    observable: EventSet,
    observers: BTreeMap<EventId, Vec<usize>>,
    warnings: Vec<String>,
}

impl ObservationArchitecture {
    /// Checks the architecture against the plant: at least one site,
    /// contiguous 1-based indices, thresholds >= 1. Sites with an empty
    /// alphabet are legal but reported as warnings.
    pub fn validate(sites: Vec<Site>, nfa: &Nfa) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Architecture("no observation sites".into()));
        }
        let mut warnings = Vec::new();
        let mut observable = EventSet::new();
        let mut observers: BTreeMap<EventId, Vec<usize>> = BTreeMap::new();
        for (i, site) in sites.iter().enumerate() {
            if site.index != i + 1 {
                return Err(Error::Architecture(format!(
                    "site `{}` has index {}, expected {}",
                    site.name,
                    site.index,
                    i + 1
                )));
            }
            if site.kappa == 0 {
                return Err(Error::Architecture(format!(
                    "site `{}` has threshold 0; the empty record would already be critical",
                    site.name
                )));
            }
            for &e in &site.observable {
                if e.index() >= nfa.event_count() {
                    return Err(Error::Architecture(format!(
                        "site `{}` observes an event unknown to the plant",
                        site.name
                    )));
                }
                observable.insert(e);
                observers.entry(e).or_default().push(i);
            }
            if site.observable.is_empty() {
                warnings.push(format!("site `{}` observes no events", site.name));
            }
        }
        Ok(ObservationArchitecture { sites, observable, observers, warnings })
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    /// The union alphabet `E_I` visible to the coordinator.
    pub fn observable(&self) -> &EventSet {
        &self.observable
    }

    /// 0-based indices of the sites observing `sigma`.
    pub fn observing_sites(&self, sigma: EventId) -> &[usize] {
        self.observers.get(&sigma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

impl SyncStrategy for ObservationArchitecture {
    fn initial_si(&self) -> SiState {
        SiState::initial(self.sites.len())
    }

    fn is_critical(&self, tau: &SiState) -> Result<bool> {
        if tau.components.len() != self.sites.len() {
            return Err(Error::Architecture(format!(
                "SI-state has {} components for {} sites",
                tau.components.len(),
                self.sites.len()
            )));
        }
        let mut critical = false;
        for (i, (comp, site)) in tau.components.iter().zip(&self.sites).enumerate() {
            if comp.len() > site.kappa {
                return Err(Error::CorruptedSiState {
                    site: i + 1,
                    len: comp.len(),
                    kappa: site.kappa,
                });
            }
            critical |= comp.len() == site.kappa;
        }
        Ok(critical)
    }

    fn absorb(&self, nfa: &Nfa, tau: &SiState, sigma: EventId) -> Result<SiState> {
        let observers = self
            .observers
            .get(&sigma)
            .ok_or_else(|| Error::NotObservable(nfa.event_name(sigma).into()))?;
        if self.is_critical(tau)? {
            return Err(Error::AbsorbUndefined {
                si: tau.text(nfa),
                event: nfa.event_name(sigma).into(),
            });
        }
        let mut components = tau.components.clone();
        for &i in observers {
            components[i].push(sigma);
        }
        Ok(SiState { components })
    }
}

/// A plant string decomposed at its synchronization instants.
#[derive(Clone, Debug)]
pub struct Run {
    /// The segments between synchronizations; the last one is the tail after
    /// the final synchronization and may be empty. Their concatenation is the
    /// input string.
    pub segments: Vec<Vec<EventId>>,
    /// The critical SI-states emitted, in order: the string's projection as
    /// seen by the coordinator.
    pub csi_trace: Vec<SiState>,
    /// Observations recorded since the last synchronization. Never critical.
    pub pending: SiState,
    /// Current-state estimates after each synchronization, filled on demand
    /// by the estimators module.
    pub per_sync_estimates: Option<Vec<StateSet>>,
}

/// Scans a plant string left to right, maintaining the pending SI-state and
/// emitting a synchronization whenever it becomes critical. The string must
/// be in the plant language.
pub fn replay(nfa: &Nfa, arch: &ObservationArchitecture, s: &[EventId]) -> Result<Run> {
    if nfa.step(nfa.initial(), s).is_empty() {
        return Err(Error::NotInLanguage);
    }
    let mut segments = vec![Vec::new()];
    let mut csi_trace = Vec::new();
    let mut pending = arch.initial_si();
    for &e in s {
        segments.last_mut().expect("nonempty").push(e);
        if !arch.observable().contains(&e) {
            continue;
        }
        pending = arch.absorb(nfa, &pending, e)?;
        if arch.is_critical(&pending)? {
            csi_trace.push(pending);
            pending = arch.initial_si();
            segments.push(Vec::new());
        }
    }
    Ok(Run { segments, csi_trace, pending, per_sync_estimates: None })
}
