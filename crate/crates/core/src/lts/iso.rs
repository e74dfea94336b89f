//! Rooted, label-preserving isomorphism of deterministic LTS.

use std::collections::VecDeque;
use std::fmt;

use super::{Lts, LtsError, StateId};

/// A bijection between the states of two LTS, indexed by the left state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    map: Vec<StateId>,
}

impl Isomorphism {
    pub fn image(&self, left: StateId) -> StateId {
        self.map[left]
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn inverse(&self) -> Isomorphism {
        let mut inv = vec![0; self.map.len()];
        for (l, &r) in self.map.iter().enumerate() {
            inv[r] = l;
        }
        Isomorphism { map: inv }
    }

    /// `(left name, right name)` pairs in left-state order.
    pub fn named_pairs<'a>(&self, left: &'a Lts, right: &'a Lts) -> Vec<(&'a str, &'a str)> {
        self.map
            .iter()
            .enumerate()
            .map(|(l, &r)| (left.state_name(l), right.state_name(r)))
            .collect()
    }
}

/// Where a synchronized traversal of two LTS first disagreed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub left: String,
    pub right: String,
    pub reason: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vs {}: {}", self.left, self.right, self.reason)
    }
}

/// Decides rooted isomorphism; returns the bijection, or `None` when the
/// two systems differ.
pub fn lts_isomorphic(g1: &Lts, g2: &Lts) -> Result<Option<Isomorphism>, LtsError> {
    Ok(compare_rooted(g1, g2)?.ok())
}

/// Like [`lts_isomorphic`] but reports the first divergence.
///
/// Both inputs must be forward deterministic and totally reachable; the
/// unique candidate bijection is then fixed by a synchronized breadth-first
/// traversal from the two initial states.
pub fn compare_rooted(g1: &Lts, g2: &Lts) -> Result<Result<Isomorphism, Divergence>, LtsError> {
    for (i, g) in [(1u8, g1), (2u8, g2)] {
        if !g.is_forward_deterministic() {
            return Err(LtsError::NotDeterministic(i));
        }
        if !g.is_totally_reachable() {
            return Err(LtsError::NotTotallyReachable(i));
        }
    }
    let diverge = |s1: StateId, s2: StateId, reason: String| Divergence {
        left: g1.state_name(s1).to_string(),
        right: g2.state_name(s2).to_string(),
        reason,
    };

    const UNSET: usize = usize::MAX;
    let mut fwd = vec![UNSET; g1.num_states()];
    let mut bwd = vec![UNSET; g2.num_states()];
    fwd[g1.initial()] = g2.initial();
    bwd[g2.initial()] = g1.initial();
    let mut queue = VecDeque::from([(g1.initial(), g2.initial())]);
    while let Some((s1, s2)) = queue.pop_front() {
        let out1 = g1.successors(s1);
        let out2 = g2.successors(s2);
        let labels1: Vec<&str> = out1.iter().map(|&(l, _)| g1.label(l)).collect();
        let labels2: Vec<&str> = out2.iter().map(|&(l, _)| g2.label(l)).collect();
        if labels1 != labels2 {
            return Ok(Err(diverge(
                s1,
                s2,
                format!(
                    "enabled labels [{}] vs [{}]",
                    labels1.join(","),
                    labels2.join(",")
                ),
            )));
        }
        for (&(l, t1), &(_, t2)) in out1.iter().zip(out2) {
            match (fwd[t1], bwd[t2]) {
                (UNSET, UNSET) => {
                    fwd[t1] = t2;
                    bwd[t2] = t1;
                    queue.push_back((t1, t2));
                }
                (a, b) if a == t2 && b == t1 => {}
                _ => {
                    return Ok(Err(diverge(
                        s1,
                        s2,
                        format!(
                            "label {} leads to {} and {}, which are matched inconsistently",
                            g1.label(l),
                            g1.state_name(t1),
                            g2.state_name(t2)
                        ),
                    )))
                }
            }
        }
    }
    if g1.num_states() != g2.num_states() {
        return Ok(Err(diverge(
            g1.initial(),
            g2.initial(),
            format!("{} states vs {}", g1.num_states(), g2.num_states()),
        )));
    }
    Ok(Ok(Isomorphism { map: fwd }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{circular_lts_from_word, LtsBuilder};
    use crate::word::Word;

    fn circ(s: &str) -> Lts {
        circular_lts_from_word(&Word::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn reflexive() {
        let g = circ("aacbbdabd");
        let iso = lts_isomorphic(&g, &g).unwrap().unwrap();
        assert!((0..g.num_states()).all(|s| iso.image(s) == s));
    }

    #[test]
    fn rotation_is_not_rooted_isomorphic() {
        assert_eq!(lts_isomorphic(&circ("ab"), &circ("ba")).unwrap(), None);
        let d = compare_rooted(&circ("ab"), &circ("ba"))
            .unwrap()
            .unwrap_err();
        assert!(d.reason.contains("enabled labels"));
    }

    #[test]
    fn renamed_states_match() {
        let mut b = LtsBuilder::new();
        b.arc("x", "b", "y").unwrap();
        b.arc("y", "a", "x").unwrap();
        let g = b.build("y");
        let iso = lts_isomorphic(&circ("ab"), &g).unwrap().unwrap();
        assert_eq!(
            iso.named_pairs(&circ("ab"), &g),
            vec![("s0", "y"), ("s1", "x")]
        );
    }

    #[test]
    fn different_lengths_differ() {
        assert_eq!(lts_isomorphic(&circ("ab"), &circ("abab")).unwrap(), None);
    }

    #[test]
    fn preconditions_reported_distinctly() {
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.arc("i", "a", "y").unwrap();
        assert_eq!(
            lts_isomorphic(&b.build("i"), &circ("a")),
            Err(LtsError::NotDeterministic(1))
        );
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "i").unwrap();
        b.state("orphan");
        assert_eq!(
            lts_isomorphic(&circ("a"), &b.build("i")),
            Err(LtsError::NotTotallyReachable(2))
        );
    }
}
