//! Small cycles: minimal Parikh vectors among the non-empty cycles.
//!
//! Every cycle decomposes into elementary cycles whose Parikh vectors add
//! up to its own, so the component-wise minima over all cycles are minima
//! over elementary cycles. Elementary cycles are enumerated with Johnson's
//! algorithm on the state graph, then expanded over parallel arcs that
//! carry different labels.

use std::collections::{BTreeSet, HashSet};

use super::{Lts, LtsError, StateId};
use crate::word::ParikhVector;

pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmallCycle {
    /// The LTS has no non-empty cycle.
    Absent,
    /// A unique minimal cycle Parikh vector.
    Unique(ParikhVector),
    /// Several pairwise incomparable minima.
    Ambiguous(Vec<ParikhVector>),
}

impl SmallCycle {
    pub fn vector(&self) -> Option<&ParikhVector> {
        match self {
            SmallCycle::Unique(v) => Some(v),
            _ => None,
        }
    }

    /// Property c: a small cycle whose Parikh vector is prime with support
    /// equal to the whole label set.
    pub fn property_c(&self, lts: &Lts) -> bool {
        match self {
            SmallCycle::Unique(v) => {
                v.is_prime() && v.support().into_iter().collect::<Vec<_>>() == lts.labels()
            }
            _ => false,
        }
    }
}

pub fn small_cycle_parikh(lts: &Lts) -> Result<SmallCycle, LtsError> {
    small_cycle_parikh_with_cap(lts, DEFAULT_CYCLE_CAP)
}

pub fn small_cycle_parikh_with_cap(lts: &Lts, cap: usize) -> Result<SmallCycle, LtsError> {
    let mut minima: Vec<ParikhVector> = Vec::new();
    let mut seen = 0usize;
    for_each_elementary_cycle(lts, |states| {
        // Expand the vertex cycle over the labels of parallel arcs.
        let hops: Vec<Vec<usize>> = (0..states.len())
            .map(|i| {
                let (s, d) = (states[i], states[(i + 1) % states.len()]);
                lts.successors(s)
                    .iter()
                    .filter(|&&(_, t)| t == d)
                    .map(|&(l, _)| l)
                    .collect()
            })
            .collect();
        let mut partial = vec![ParikhVector::default()];
        for hop in &hops {
            let mut next = Vec::with_capacity(partial.len() * hop.len());
            for pv in &partial {
                for &l in hop {
                    let mut v = pv.clone();
                    v.increment(lts.label(l));
                    next.push(v);
                }
            }
            partial = next;
        }
        for pv in partial {
            seen += 1;
            if seen > cap {
                return Err(LtsError::CycleBudgetExceeded(cap));
            }
            if minima.iter().any(|m| m.le(&pv)) {
                continue;
            }
            minima.retain(|m| !pv.le(m));
            minima.push(pv);
        }
        Ok(())
    })?;
    minima.sort();
    Ok(match minima.len() {
        0 => SmallCycle::Absent,
        1 => SmallCycle::Unique(minima.pop().unwrap()),
        _ => SmallCycle::Ambiguous(minima),
    })
}

/// Calls `visit` once per elementary cycle of the state graph, given as the
/// list of states starting from its least state.
fn for_each_elementary_cycle<F>(lts: &Lts, mut visit: F) -> Result<(), LtsError>
where
    F: FnMut(&[StateId]) -> Result<(), LtsError>,
{
    let n = lts.num_states();
    let adj: Vec<Vec<StateId>> = (0..n)
        .map(|s| {
            lts.successors(s)
                .iter()
                .map(|&(_, d)| d)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();

    let mut search = Johnson {
        adj: &adj,
        allowed: vec![false; n],
        blocked: vec![false; n],
        block_map: vec![HashSet::new(); n],
        stack: Vec::new(),
    };
    for start in 0..n {
        let comp = component_of(&adj, start);
        if comp.len() == 1 && !adj[start].contains(&start) {
            continue;
        }
        for &v in &comp {
            search.allowed[v] = true;
            search.blocked[v] = false;
            search.block_map[v].clear();
        }
        search.circuit(start, start, &mut visit)?;
        for &v in &comp {
            search.allowed[v] = false;
        }
    }
    Ok(())
}

struct Johnson<'a> {
    adj: &'a [Vec<StateId>],
    allowed: Vec<bool>,
    blocked: Vec<bool>,
    block_map: Vec<HashSet<StateId>>,
    stack: Vec<StateId>,
}

impl Johnson<'_> {
    fn circuit<F>(&mut self, v: StateId, start: StateId, visit: &mut F) -> Result<bool, LtsError>
    where
        F: FnMut(&[StateId]) -> Result<(), LtsError>,
    {
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        let adj = self.adj;
        for &w in &adj[v] {
            if !self.allowed[w] {
                continue;
            }
            if w == start {
                visit(&self.stack)?;
                found = true;
            } else if !self.blocked[w] && self.circuit(w, start, visit)? {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &adj[v] {
                if self.allowed[w] {
                    self.block_map[w].insert(v);
                }
            }
        }
        self.stack.pop();
        Ok(found)
    }

    fn unblock(&mut self, v: StateId) {
        let mut work = vec![v];
        while let Some(u) = work.pop() {
            if !self.blocked[u] {
                continue;
            }
            self.blocked[u] = false;
            work.extend(self.block_map[u].drain());
        }
    }
}

/// Strongly connected component of `start` in the subgraph of states
/// `>= start`.
fn component_of(adj: &[Vec<StateId>], start: StateId) -> Vec<StateId> {
    let n = adj.len();
    let mut fwd = vec![false; n];
    let mut stack = vec![start];
    fwd[start] = true;
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if w >= start && !fwd[w] {
                fwd[w] = true;
                stack.push(w);
            }
        }
    }
    let mut radj: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (u, succ) in adj.iter().enumerate().skip(start) {
        for &w in succ {
            if w >= start {
                radj[w].push(u);
            }
        }
    }
    let mut bwd = vec![false; n];
    stack.push(start);
    bwd[start] = true;
    while let Some(u) = stack.pop() {
        for &w in &radj[u] {
            if !bwd[w] {
                bwd[w] = true;
                stack.push(w);
            }
        }
    }
    (start..n).filter(|&v| fwd[v] && bwd[v]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{circular_lts_from_word, path_lts_from_word, LtsBuilder};
    use crate::word::Word;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn circular_word_small_cycle() {
        let lts = circular_lts_from_word(&w("aacbbdabd")).unwrap();
        let sc = small_cycle_parikh(&lts).unwrap();
        assert_eq!(
            sc,
            SmallCycle::Unique(ParikhVector::from_counts([
                ("a", 3),
                ("b", 3),
                ("c", 1),
                ("d", 2)
            ]))
        );
        assert!(sc.property_c(&lts));
    }

    #[test]
    fn acyclic_has_none() {
        let lts = path_lts_from_word(&w("abc"));
        assert_eq!(small_cycle_parikh(&lts).unwrap(), SmallCycle::Absent);
    }

    #[test]
    fn non_prime_cycle_fails_c() {
        let lts = circular_lts_from_word(&w("aabb")).unwrap();
        let sc = small_cycle_parikh(&lts).unwrap();
        assert_eq!(
            sc.vector(),
            Some(&ParikhVector::from_counts([("a", 2), ("b", 2)]))
        );
        assert!(!sc.property_c(&lts));
    }

    #[test]
    fn incomparable_minima_are_ambiguous() {
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "i").unwrap();
        b.arc("i", "b", "x").unwrap();
        b.arc("x", "c", "i").unwrap();
        let sc = small_cycle_parikh(&b.build("i")).unwrap();
        assert!(matches!(sc, SmallCycle::Ambiguous(ref v) if v.len() == 2));
    }

    #[test]
    fn larger_cycles_are_not_minimal() {
        // Two cycles through i: "ab" and "abab" via a longer loop.
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.arc("x", "b", "i").unwrap();
        b.arc("x", "c", "y").unwrap();
        b.arc("y", "b", "i").unwrap();
        let sc = small_cycle_parikh(&b.build("i")).unwrap();
        assert_eq!(
            sc.vector(),
            Some(&ParikhVector::from_counts([("a", 1), ("b", 1)]))
        );
    }

    #[test]
    fn parallel_arcs_expand() {
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.arc("i", "b", "x").unwrap();
        b.arc("x", "c", "i").unwrap();
        let sc = small_cycle_parikh(&b.build("i")).unwrap();
        assert!(matches!(sc, SmallCycle::Ambiguous(ref v) if v.len() == 2));
    }

    #[test]
    fn cap_is_enforced() {
        // Complete digraph on 5 states with self-loops has many cycles.
        let mut b = LtsBuilder::new();
        for i in 0..5 {
            for j in 0..5 {
                b.arc(&format!("s{i}"), &format!("t{j}"), &format!("s{j}"))
                    .unwrap();
            }
        }
        let lts = b.build("s0");
        assert_eq!(
            small_cycle_parikh_with_cap(&lts, 10),
            Err(LtsError::CycleBudgetExceeded(10))
        );
    }
}
