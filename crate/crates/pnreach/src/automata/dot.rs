//! GraphViz rendering of automata. Parallel edges are merged and annotated
//! with the set of their labels; `*` in a label stands for either bit value.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::dd::Cube;

use super::{BoundedNfa, MinimalDfa};

#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions {
    /// Draw the non-accepting sink and its edges (hidden by default).
    pub emit_sink: bool,
    /// Annotate states with marking descriptions when available.
    pub state_names: bool,
}

fn cube_label(cube: &Cube, left_width: usize) -> String {
    let bit = |v: &Option<bool>| match v {
        None => '*',
        Some(false) => '0',
        Some(true) => '1',
    };
    let left: String = cube[..left_width].iter().map(bit).collect();
    let right: String = cube[left_width..].iter().map(bit).collect();
    format!("{left}/{right}")
}

fn render(
    name: &str,
    num_states: usize,
    initial: &[u32],
    is_final: &dyn Fn(u32) -> bool,
    edges: &[(u32, String, u32)],
    skip: Option<u32>,
    names: Option<&[String]>,
) -> String {
    let mut grouped: BTreeMap<(u32, u32), Vec<String>> = BTreeMap::new();
    for (from, label, to) in edges {
        if Some(*from) == skip || Some(*to) == skip {
            continue;
        }
        grouped.entry((*from, *to)).or_default().push(label.clone());
    }
    let mut out = String::new();
    let _ = writeln!(out, "digraph {name} {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  start [shape=none,label=\"\",height=0,width=0];");
    for s in 0..num_states as u32 {
        if Some(s) == skip {
            continue;
        }
        let shape = if is_final(s) { "doublecircle" } else { "circle" };
        let label = match names {
            Some(names) if !names.is_empty() => format!("{s}\\n{}", names[s as usize]),
            _ => s.to_string(),
        };
        let _ = writeln!(out, "  {s} [shape={shape},label=\"{label}\"];");
    }
    for &i in initial {
        if Some(i) == skip {
            continue;
        }
        let _ = writeln!(out, "  start -> {i};");
    }
    for ((from, to), labels) in grouped {
        let text = if labels.len() == 1 {
            labels[0].clone()
        } else {
            format!("{{{}}}", labels.join(", "))
        };
        let _ = writeln!(out, "  {from} -> {to} [label=\"{text}\"];");
    }
    out.push_str("}\n");
    out
}

pub fn nfa_to_dot(a: &BoundedNfa, opts: DotOptions) -> String {
    let mut edges = Vec::new();
    for s in 0..a.num_states() as u32 {
        for (cube, leaf) in a.store().nonempty_cubes(a.delta(s), a.label_width()) {
            let label = cube_label(&cube, a.left_width());
            for &t in a.store().leaf_value(leaf) {
                edges.push((s, label.clone(), t));
            }
        }
    }
    let names = if opts.state_names { a.state_names() } else { None };
    render(
        "nfa",
        a.num_states(),
        a.initial(),
        &|s| a.finals().binary_search(&s).is_ok(),
        &edges,
        None,
        names,
    )
}

pub fn dfa_to_dot(d: &MinimalDfa, opts: DotOptions) -> String {
    let mut edges = Vec::new();
    for s in 0..d.num_states() as u32 {
        for (cube, leaf) in d.store().nonempty_cubes(d.delta(s), d.label_width()) {
            let label = cube_label(&cube, d.left_width());
            for &t in d.store().leaf_value(leaf) {
                edges.push((s, label.clone(), t));
            }
        }
    }
    let skip = if opts.emit_sink { None } else { d.sink() };
    render(
        "dfa",
        d.num_states(),
        &[d.initial()],
        &|s| d.is_final(s),
        &edges,
        skip,
        None,
    )
}
