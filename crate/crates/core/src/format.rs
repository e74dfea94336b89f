//! Line-oriented text formats for LTS and nets, and DOT rendering.
//!
//! LTS files:
//!
//! ```text
//! # comment
//! initial s0
//! arc s0 a s1
//! arc s1 b s0
//! state lonely      (optional: a state without arcs)
//! label c           (optional: a label without arcs)
//! ```
//!
//! Net files:
//!
//! ```text
//! transition a      (optional: transitions are inferred from places)
//! place p tokens=3 in=a:2 out=b:1
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::lts::{Lts, LtsBuilder};
use crate::net::{Marking, NetBuilder, System};
use crate::word::valid_label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

/// Non-blank, non-comment lines with their 1-based numbers, split into
/// whitespace-separated fields.
fn records(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("");
            let fields: Vec<&str> = line.split_whitespace().collect();
            (!fields.is_empty()).then_some((i + 1, fields))
        })
        .collect()
}

fn valid_state(name: &str) -> bool {
    !name.contains('"')
}

pub fn parse_lts(text: &str) -> Result<Lts, ParseError> {
    let recs = records(text);
    let Some((first_line, first)) = recs.first() else {
        return Err(err(1, "empty file: expected `initial <state>`"));
    };
    let initial = match first.as_slice() {
        ["initial", s] if valid_state(s) => s.to_string(),
        _ => return Err(err(*first_line, "expected `initial <state>`")),
    };
    let mut b = LtsBuilder::new();
    b.state(&initial);
    for (line, fields) in &recs[1..] {
        match fields.as_slice() {
            ["arc", src, label, dst] => {
                if !valid_label(label) {
                    return Err(err(*line, format!("invalid label {label:?}")));
                }
                if !valid_state(src) || !valid_state(dst) {
                    return Err(err(*line, "invalid state name"));
                }
                b.arc(src, label, dst)
                    .map_err(|e| err(*line, e.to_string()))?;
            }
            ["state", s] if valid_state(s) => {
                b.state(s);
            }
            ["label", l] if valid_label(l) => b.label(l),
            ["initial", ..] => return Err(err(*line, "duplicate `initial`")),
            _ => {
                return Err(err(
                    *line,
                    format!(
                        "expected `arc <src> <label> <dst>`, got `{}`",
                        fields.join(" ")
                    ),
                ))
            }
        }
    }
    Ok(b.build(&initial))
}

/// Canonical text: initial state, labels and states without arcs, then arcs
/// sorted by source name, label and target name.
pub fn emit_lts(lts: &Lts) -> String {
    let mut out = String::new();
    writeln!(out, "initial {}", lts.state_name(lts.initial())).unwrap();
    let used = lts.used_labels();
    for l in lts.labels() {
        if !used.contains(l) {
            writeln!(out, "label {l}").unwrap();
        }
    }
    let mut touched = vec![false; lts.num_states()];
    touched[lts.initial()] = true;
    for &(s, _, d) in lts.arcs() {
        touched[s] = true;
        touched[d] = true;
    }
    let mut lonely: Vec<&str> = (0..lts.num_states())
        .filter(|&s| !touched[s])
        .map(|s| lts.state_name(s))
        .collect();
    lonely.sort_unstable();
    for s in lonely {
        writeln!(out, "state {s}").unwrap();
    }
    let arcs: BTreeSet<(&str, &str, &str)> = lts
        .arcs()
        .iter()
        .map(|&(s, l, d)| (lts.state_name(s), lts.label(l), lts.state_name(d)))
        .collect();
    for (s, l, d) in arcs {
        writeln!(out, "arc {s} {l} {d}").unwrap();
    }
    out
}

fn valid_place(name: &str) -> bool {
    !name.contains(['=', ';', '"'])
}

fn parse_arc_attr(line: usize, value: &str) -> Result<(String, u64), ParseError> {
    let (t, w) = value.rsplit_once(':').ok_or_else(|| {
        err(
            line,
            format!("expected <transition>:<weight>, got {value:?}"),
        )
    })?;
    if !valid_label(t) {
        return Err(err(line, format!("invalid transition name {t:?}")));
    }
    let w: u64 = w
        .parse()
        .map_err(|_| err(line, format!("invalid weight {w:?}")))?;
    if w == 0 {
        return Err(err(line, "weights must be positive"));
    }
    Ok((t.to_string(), w))
}

pub fn parse_net(text: &str) -> Result<System, ParseError> {
    let recs = records(text);
    if recs.is_empty() {
        return Err(err(1, "empty file: expected `place` or `transition` lines"));
    }
    let mut b = NetBuilder::new();
    let mut tokens = Vec::new();
    for (line, fields) in &recs {
        match fields.as_slice() {
            ["transition", t] => {
                if !valid_label(t) {
                    return Err(err(*line, format!("invalid transition name {t:?}")));
                }
                b.transition(t);
            }
            ["place", name, attrs @ ..] => {
                if !valid_place(name) {
                    return Err(err(*line, format!("invalid place name {name:?}")));
                }
                b.place(name).map_err(|e| err(*line, e.to_string()))?;
                let mut k = None;
                for attr in attrs {
                    let (key, value) = attr
                        .split_once('=')
                        .ok_or_else(|| err(*line, format!("expected key=value, got {attr:?}")))?;
                    match key {
                        "tokens" if k.is_none() => {
                            k = Some(value.parse::<u64>().map_err(|_| {
                                err(*line, format!("invalid token count {value:?}"))
                            })?);
                        }
                        "in" => {
                            let (t, w) = parse_arc_attr(*line, value)?;
                            b.produce(&t, name, w);
                        }
                        "out" => {
                            let (t, w) = parse_arc_attr(*line, value)?;
                            b.consume(name, &t, w);
                        }
                        _ => return Err(err(*line, format!("unexpected attribute {attr:?}"))),
                    }
                }
                tokens.push(k.ok_or_else(|| err(*line, "missing tokens=<k>"))?);
            }
            _ => {
                return Err(err(
                    *line,
                    format!(
                        "expected `place` or `transition`, got `{}`",
                        fields.join(" ")
                    ),
                ))
            }
        }
    }
    let net = b
        .build()
        .map_err(|e| err(recs.last().unwrap().0, e.to_string()))?;
    System::new(net, Marking(tokens)).map_err(|e| err(1, e.to_string()))
}

/// Canonical text: every transition, then places in order with their
/// input arcs before their output arcs, each group in transition order.
pub fn emit_net(sys: &System) -> String {
    let net = &sys.net;
    let mut out = String::new();
    for t in net.transitions() {
        writeln!(out, "transition {t}").unwrap();
    }
    for (p, name) in net.places().iter().enumerate() {
        write!(out, "place {name} tokens={}", sys.initial.get(p)).unwrap();
        for t in net.input_transitions(p) {
            write!(out, " in={}:{}", net.transitions()[t], net.post(p, t)).unwrap();
        }
        for t in net.output_transitions(p) {
            write!(out, " out={}:{}", net.transitions()[t], net.pre(p, t)).unwrap();
        }
        out.push('\n');
    }
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering of a marked net; nodes and edges are sorted.
pub fn net_to_dot(sys: &System) -> String {
    let net = &sys.net;
    let mut out = String::from("digraph net {\n  rankdir=LR;\n");
    let mut nodes = BTreeSet::new();
    for t in net.transitions() {
        nodes.insert(format!("  {} [shape=box];\n", quote(&format!("t:{t}"))));
    }
    let mut edges = BTreeSet::new();
    for (p, name) in net.places().iter().enumerate() {
        let id = quote(&format!("p:{name}"));
        nodes.insert(format!(
            "  {id} [shape=circle, label={}];\n",
            quote(&format!("{name}\n{}", sys.initial.get(p)))
        ));
        for t in net.input_transitions(p) {
            let tid = quote(&format!("t:{}", net.transitions()[t]));
            edges.insert(format!("  {tid} -> {id} [label=\"{}\"];\n", net.post(p, t)));
        }
        for t in net.output_transitions(p) {
            let tid = quote(&format!("t:{}", net.transitions()[t]));
            edges.insert(format!("  {id} -> {tid} [label=\"{}\"];\n", net.pre(p, t)));
        }
    }
    for l in nodes.into_iter().chain(edges) {
        out.push_str(&l);
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of an LTS; the initial state is drawn doubled.
pub fn lts_to_dot(lts: &Lts) -> String {
    let mut out = String::from("digraph lts {\n");
    let mut nodes = BTreeSet::new();
    for s in 0..lts.num_states() {
        let shape = if s == lts.initial() {
            "doublecircle"
        } else {
            "circle"
        };
        nodes.insert(format!("  {} [shape={shape}];\n", quote(lts.state_name(s))));
    }
    let edges: BTreeSet<String> = lts
        .arcs()
        .iter()
        .map(|&(s, l, d)| {
            format!(
                "  {} -> {} [label={}];\n",
                quote(lts.state_name(s)),
                quote(lts.state_name(d)),
                quote(lts.label(l))
            )
        })
        .collect();
    for l in nodes.into_iter().chain(edges) {
        out.push_str(&l);
    }
    out.push_str("}\n");
    out
}
