//! Graphviz and JSON renderings of the built structures. Output is
//! byte-deterministic for a fixed input: every collection is iterated in its
//! canonical order.

use serde::Serialize;
use serde_json::json;

use std::collections::BTreeMap;

use crate::automaton::Nfa;
use crate::css::{CssState, CssStructure};
use crate::estimators::{IObserver, Observer};
use crate::opacity::Verdict;
use crate::protocol::SiState;

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

fn css_state_label(nfa: &Nfa, s: &CssState) -> String {
    format!(
        "({},{},{})",
        nfa.state_name(s.origin),
        nfa.state_name(s.current),
        s.layer
    )
}

/// DOT rendering of a synchronizing-sequence structure: SI-states as ovals
/// (critical ones shaded), state-pair nodes as boxes grouped by layer.
pub fn css_to_dot(nfa: &Nfa, css: &CssStructure) -> String {
    let si_index: BTreeMap<&SiState, usize> =
        css.si_states().iter().enumerate().map(|(i, t)| (t, i)).collect();
    let state_index: BTreeMap<&CssState, usize> =
        css.states().iter().enumerate().map(|(i, s)| (s, i)).collect();

    let mut out = String::from("digraph css_structure {\n  rankdir=TB;\n");
    for (tau, i) in &si_index {
        let style = if css.critical().contains(tau) {
            ", style=filled, fillcolor=lightgrey"
        } else {
            ""
        };
        out += &format!(
            "  si{i} [shape=oval{style}, label=\"{}\"];\n",
            escape(&tau.text(nfa))
        );
    }
    let mut by_layer: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (s, i) in &state_index {
        out += &format!(
            "  st{i} [shape=box, label=\"{}\"];\n",
            escape(&css_state_label(nfa, s))
        );
        by_layer.entry(s.layer).or_default().push(*i);
    }
    for (layer, nodes) in &by_layer {
        let members: Vec<String> = nodes.iter().map(|i| format!("st{i}")).collect();
        out += &format!(
            "  subgraph cluster_layer_{layer} {{ style=dotted; label=\"layer {layer}\"; {}; }}\n",
            members.join("; ")
        );
    }
    for (rho, sigma, tau) in css.ha_edges() {
        out += &format!(
            "  st{} -> si{} [label=\"{}\"];\n",
            state_index[rho],
            si_index[tau],
            escape(nfa.event_name(sigma))
        );
    }
    for (tau, sigma, rho) in css.hr_edges() {
        let label = sigma.map(|e| nfa.event_name(e).to_string()).unwrap_or_else(|| "ε".into());
        out += &format!(
            "  si{} -> st{} [label=\"{}\"];\n",
            si_index[tau],
            state_index[rho],
            escape(&label)
        );
    }
    out += "}\n";
    out
}

#[derive(Serialize)]
struct CssStateJson {
    origin: String,
    current: String,
    layer: u32,
}

fn css_state_json(nfa: &Nfa, s: &CssState) -> CssStateJson {
    CssStateJson {
        origin: nfa.state_name(s.origin).to_string(),
        current: nfa.state_name(s.current).to_string(),
        layer: s.layer,
    }
}

/// JSON dump of a structure, suitable for diffing in tests.
pub fn css_to_json(nfa: &Nfa, css: &CssStructure) -> serde_json::Value {
    let si_states: Vec<_> = css
        .si_states()
        .iter()
        .map(|t| json!({ "text": t.text(nfa), "critical": css.critical().contains(t) }))
        .collect();
    let states: Vec<_> = css.states().iter().map(|s| css_state_json(nfa, s)).collect();
    let roots: Vec<_> = css.roots().iter().map(|s| css_state_json(nfa, s)).collect();
    let ha: Vec<_> = css
        .ha_edges()
        .map(|(rho, e, tau)| {
            json!({
                "from": css_state_json(nfa, rho),
                "event": nfa.event_name(e),
                "to": tau.text(nfa),
            })
        })
        .collect();
    let hr: Vec<_> = css
        .hr_edges()
        .map(|(tau, e, rho)| {
            json!({
                "from": tau.text(nfa),
                "event": e.map(|e| nfa.event_name(e).to_string()),
                "to": css_state_json(nfa, rho),
            })
        })
        .collect();
    json!({
        "t0": css.t0().text(nfa),
        "si_states": si_states,
        "states": serde_json::to_value(states).expect("serializes"),
        "roots": serde_json::to_value(roots).expect("serializes"),
        "ha": ha,
        "hr": hr,
    })
}

fn set_label(nfa: &Nfa, set: &crate::automaton::StateSet) -> String {
    nfa.state_set_text(set)
}

/// DOT rendering of an observer: nodes are estimates, edges carry the
/// canonical SI-state text.
pub fn observer_to_dot(nfa: &Nfa, obs: &Observer) -> String {
    let mut out = String::from("digraph observer {\n  rankdir=LR;\n  init [shape=point];\n");
    for (i, q) in obs.states.iter().enumerate() {
        out += &format!("  q{i} [shape=box, label=\"{}\"];\n", escape(&set_label(nfa, q)));
    }
    out += &format!("  init -> q{};\n", obs.initial);
    for ((from, tau), to) in &obs.transitions {
        out += &format!("  q{from} -> q{to} [label=\"{}\"];\n", escape(&tau.text(nfa)));
    }
    out += "}\n";
    out
}

pub fn observer_to_json(nfa: &Nfa, obs: &Observer) -> serde_json::Value {
    let states: Vec<_> = obs.states.iter().map(|q| nfa.state_names_of(q)).collect();
    let transitions: Vec<_> = obs
        .transitions
        .iter()
        .map(|((from, tau), to)| json!({ "from": from, "csi": tau.text(nfa), "to": to }))
        .collect();
    json!({
        "kind": match obs.kind {
            crate::estimators::ObserverKind::Current => "current",
            crate::estimators::ObserverKind::Reversed => "reversed",
        },
        "alphabet": obs.alphabet.iter().map(|t| t.text(nfa)).collect::<Vec<_>>(),
        "initial": obs.initial,
        "states": states,
        "transitions": transitions,
    })
}

fn pair_set_label(nfa: &Nfa, pairs: &crate::estimators::PairSet) -> String {
    let parts: Vec<String> = pairs
        .iter()
        .map(|&(a, b)| format!("({},{})", nfa.state_name(a), nfa.state_name(b)))
        .collect();
    format!("{{{}}}", parts.join(","))
}

pub fn iobserver_to_dot(nfa: &Nfa, iobs: &IObserver) -> String {
    let mut out = String::from("digraph initial_estimator {\n  rankdir=LR;\n  init [shape=point];\n");
    for (i, m) in iobs.states.iter().enumerate() {
        out += &format!("  q{i} [shape=box, label=\"{}\"];\n", escape(&pair_set_label(nfa, m)));
    }
    out += &format!("  init -> q{};\n", iobs.initial);
    for ((from, tau), to) in &iobs.transitions {
        out += &format!("  q{from} -> q{to} [label=\"{}\"];\n", escape(&tau.text(nfa)));
    }
    out += "}\n";
    out
}

pub fn iobserver_to_json(nfa: &Nfa, iobs: &IObserver) -> serde_json::Value {
    let states: Vec<Vec<[String; 2]>> = iobs
        .states
        .iter()
        .map(|m| {
            m.iter()
                .map(|&(a, b)| [nfa.state_name(a).to_string(), nfa.state_name(b).to_string()])
                .collect()
        })
        .collect();
    let transitions: Vec<_> = iobs
        .transitions
        .iter()
        .map(|((from, tau), to)| json!({ "from": from, "csi": tau.text(nfa), "to": to }))
        .collect();
    json!({
        "kind": "initial-estimator",
        "alphabet": iobs.alphabet.iter().map(|t| t.text(nfa)).collect::<Vec<_>>(),
        "initial": iobs.initial,
        "states": states,
        "transitions": transitions,
    })
}

/// Versioned verdict schema: witness and state are null exactly when the
/// property holds.
pub fn verdict_to_json(nfa: &Nfa, v: &Verdict) -> serde_json::Value {
    json!({
        "version": 1,
        "property": v.property.as_str(),
        "holds": v.holds,
        "witness": v.witness.as_ref().map(|w| w.iter().map(|t| t.text(nfa)).collect::<Vec<_>>()),
        "state": v.violating.as_ref().map(|q| nfa.state_names_of(q)),
    })
}
