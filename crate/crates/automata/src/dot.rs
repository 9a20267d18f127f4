//! Graphviz export.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::alphabet::Alphabet;
use crate::dfa::Dfa;
use crate::nfa::Nfa;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn render(
    name: &str,
    alphabet: &Alphabet,
    states: usize,
    labels: &dyn Fn(usize) -> String,
    initial: &[usize],
    accepting: &dyn Fn(usize) -> bool,
    transitions: impl Iterator<Item = (usize, usize, usize)>,
) -> String {
    let mut edges: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    for (p, a, q) in transitions {
        edges.entry((p, q)).or_default().push(alphabet.name(a).to_string());
    }
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", escape(name));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=circle];");
    for q in 0..states {
        let shape = if accepting(q) { "doublecircle" } else { "circle" };
        let _ = writeln!(
            out,
            "  q{q} [label=\"{}\", shape={shape}];",
            escape(&labels(q))
        );
    }
    for (i, &q) in initial.iter().enumerate() {
        let _ = writeln!(out, "  init{i} [shape=point];");
        let _ = writeln!(out, "  init{i} -> q{q};");
    }
    for ((p, q), syms) in edges {
        let _ = writeln!(out, "  q{p} -> q{q} [label=\"{}\"];", escape(&syms.join(",")));
    }
    out.push_str("}\n");
    out
}

pub fn dfa_to_dot(d: &Dfa, name: &str) -> String {
    dfa_to_dot_labelled(d, name, &|q| q.to_string())
}

/// DOT rendering with caller-supplied state labels.
pub fn dfa_to_dot_labelled(d: &Dfa, name: &str, labels: &dyn Fn(usize) -> String) -> String {
    render(
        name,
        d.alphabet(),
        d.num_states(),
        labels,
        &[d.initial()],
        &|q| d.is_accepting(q),
        d.transitions(),
    )
}

pub fn nfa_to_dot(n: &Nfa, name: &str) -> String {
    render(
        name,
        n.alphabet(),
        n.num_states(),
        &|q| q.to_string(),
        n.initial(),
        &|q| n.is_accepting(q),
        n.transitions(),
    )
}
