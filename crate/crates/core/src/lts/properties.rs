//! The basic behavioural properties: determinism and persistence in both
//! directions, and total reachability.

use std::fmt;

use super::{Lts, StateId};
use crate::word::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasicProperty {
    ForwardDeterministic,
    BackwardDeterministic,
    ForwardPersistent,
    BackwardPersistent,
    TotallyReachable,
}

impl fmt::Display for BasicProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasicProperty::ForwardDeterministic => "forward_deterministic",
            BasicProperty::BackwardDeterministic => "backward_deterministic",
            BasicProperty::ForwardPersistent => "forward_persistent",
            BasicProperty::BackwardPersistent => "backward_persistent",
            BasicProperty::TotallyReachable => "totally_reachable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyWitness {
    pub property: BasicProperty,
    pub states: Vec<String>,
    pub labels: Vec<Label>,
}

impl fmt::Display for PropertyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails at states [{}] labels [{}]",
            self.property,
            self.states.join(","),
            self.labels.join(",")
        )
    }
}

/// Result of [`check_basic_properties`]. A flag is false iff a witness for
/// it is recorded; each failing property records its first failure in
/// name order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    pub forward_deterministic: bool,
    pub backward_deterministic: bool,
    pub forward_persistent: bool,
    pub backward_persistent: bool,
    pub totally_reachable: bool,
    pub witnesses: Vec<PropertyWitness>,
}

impl PropertyReport {
    /// All five flags hold.
    pub fn property_b(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn witness(&self, property: BasicProperty) -> Option<&PropertyWitness> {
        self.witnesses.iter().find(|w| w.property == property)
    }
}

pub fn check_basic_properties(lts: &Lts) -> PropertyReport {
    let order = lts.states_by_name();
    let mut witnesses = Vec::new();
    let name = |s: StateId| lts.state_name(s).to_string();
    let label = |l: usize| lts.label(l).to_string();

    // Forward determinism: no two arcs with the same label leave a state.
    'fd: for &s in &order {
        for w in lts.successors(s).windows(2) {
            if w[0].0 == w[1].0 {
                witnesses.push(PropertyWitness {
                    property: BasicProperty::ForwardDeterministic,
                    states: vec![name(s)],
                    labels: vec![label(w[0].0)],
                });
                break 'fd;
            }
        }
    }

    'bd: for &s in &order {
        for w in lts.predecessors(s).windows(2) {
            if w[0].0 == w[1].0 {
                witnesses.push(PropertyWitness {
                    property: BasicProperty::BackwardDeterministic,
                    states: vec![name(s)],
                    labels: vec![label(w[0].0)],
                });
                break 'bd;
            }
        }
    }

    // s -a-> s1, s -b-> s2, a != b  =>  s1 -b-> s' and s2 -a-> s'.
    'fp: for &s in &order {
        let succ = lts.successors(s);
        for (i, &(a, s1)) in succ.iter().enumerate() {
            for &(b, s2) in &succ[i + 1..] {
                if a == b {
                    continue;
                }
                let closes = lts
                    .targets(s1, b)
                    .any(|x| lts.targets(s2, a).any(|y| y == x));
                if !closes {
                    witnesses.push(PropertyWitness {
                        property: BasicProperty::ForwardPersistent,
                        states: vec![name(s), name(s1), name(s2)],
                        labels: vec![label(a), label(b)],
                    });
                    break 'fp;
                }
            }
        }
    }

    // s1 -a-> s, s2 -b-> s, a != b  =>  s' -b-> s1 and s' -a-> s2.
    'bp: for &s in &order {
        let pred = lts.predecessors(s);
        for (i, &(a, s1)) in pred.iter().enumerate() {
            for &(b, s2) in &pred[i + 1..] {
                if a == b {
                    continue;
                }
                let closes = lts
                    .sources(s1, b)
                    .any(|x| lts.sources(s2, a).any(|y| y == x));
                if !closes {
                    witnesses.push(PropertyWitness {
                        property: BasicProperty::BackwardPersistent,
                        states: vec![name(s), name(s1), name(s2)],
                        labels: vec![label(a), label(b)],
                    });
                    break 'bp;
                }
            }
        }
    }

    let reached = lts.reachable();
    if reached.len() != lts.num_states() {
        let mut seen = vec![false; lts.num_states()];
        for s in reached {
            seen[s] = true;
        }
        let missing: Vec<String> = order
            .iter()
            .filter(|&&s| !seen[s])
            .map(|&s| name(s))
            .collect();
        witnesses.push(PropertyWitness {
            property: BasicProperty::TotallyReachable,
            states: missing,
            labels: vec![],
        });
    }

    let fails = |p: BasicProperty| witnesses.iter().any(|w| w.property == p);
    PropertyReport {
        forward_deterministic: !fails(BasicProperty::ForwardDeterministic),
        backward_deterministic: !fails(BasicProperty::BackwardDeterministic),
        forward_persistent: !fails(BasicProperty::ForwardPersistent),
        backward_persistent: !fails(BasicProperty::BackwardPersistent),
        totally_reachable: !fails(BasicProperty::TotallyReachable),
        witnesses,
    }
}
