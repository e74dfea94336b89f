//! Finite labelled transition systems with an initial state.

mod cycles;
mod iso;
mod properties;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::word::{Label, ParikhVector, Word};

pub use cycles::{small_cycle_parikh, small_cycle_parikh_with_cap, SmallCycle, DEFAULT_CYCLE_CAP};
pub use iso::{compare_rooted, lts_isomorphic, Divergence, Isomorphism};
pub use properties::{check_basic_properties, BasicProperty, PropertyReport, PropertyWitness};

/// Index of a state inside one [`Lts`].
pub type StateId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtsError {
    #[error("the word is empty")]
    EmptyWord,
    #[error("duplicate arc {0} -{1}-> {2}")]
    DuplicateArc(String, Label, String),
    #[error("two paths to state {0} have different Parikh vectors")]
    InconsistentDistances(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("LTS #{0} is not forward deterministic")]
    NotDeterministic(u8),
    #[error("LTS #{0} is not totally reachable")]
    NotTotallyReachable(u8),
    #[error("more than {0} elementary cycles")]
    CycleBudgetExceeded(usize),
}

type Canonical<'a> = (
    BTreeSet<&'a str>,
    &'a str,
    &'a [Label],
    BTreeSet<(&'a str, &'a str, &'a str)>,
);

/// A finite LTS `(S, ->, T, initial)`.
///
/// States are opaque names; labels are kept in lexicographic order so that
/// every traversal is reproducible.
#[derive(Clone)]
pub struct Lts {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    labels: Vec<Label>,
    arcs: Vec<(StateId, usize, StateId)>,
    out: Vec<Vec<(usize, StateId)>>,
    inc: Vec<Vec<(usize, StateId)>>,
    initial: StateId,
}

/// Incremental construction of an [`Lts`]. States mentioned by arcs are
/// declared implicitly.
#[derive(Clone, Debug, Default)]
pub struct LtsBuilder {
    states: Vec<String>,
    index: HashMap<String, StateId>,
    labels: BTreeSet<Label>,
    arcs: BTreeSet<(StateId, Label, StateId)>,
}

impl LtsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn label(&mut self, label: &str) {
        self.labels.insert(label.to_string());
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn arc(&mut self, src: &str, label: &str, dst: &str) -> Result<(), LtsError> {
        let s = self.state(src);
        let d = self.state(dst);
        self.label(label);
        if !self.arcs.insert((s, label.to_string(), d)) {
            return Err(LtsError::DuplicateArc(
                src.to_string(),
                label.to_string(),
                dst.to_string(),
            ));
        }
        Ok(())
    }

    pub fn build(mut self, initial: &str) -> Lts {
        let initial = self.state(initial);
        let labels: Vec<Label> = self.labels.into_iter().collect();
        let label_ix: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let n = self.states.len();
        let mut arcs: Vec<(StateId, usize, StateId)> = self
            .arcs
            .iter()
            .map(|(s, l, d)| (*s, label_ix[l.as_str()], *d))
            .collect();
        arcs.sort_unstable();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(s, l, d) in &arcs {
            out[s].push((l, d));
            inc[d].push((l, s));
        }
        for v in inc.iter_mut() {
            v.sort_unstable();
        }
        Lts {
            states: self.states,
            index: self.index,
            labels,
            arcs,
            out,
            inc,
            initial,
        }
    }
}

impl Lts {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, ix: usize) -> &str {
        &self.labels[ix]
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    /// Labels that occur on at least one arc.
    pub fn used_labels(&self) -> BTreeSet<Label> {
        self.arcs
            .iter()
            .map(|&(_, l, _)| self.labels[l].clone())
            .collect()
    }

    /// Arcs as `(source, label index, target)`, sorted.
    pub fn arcs(&self) -> &[(StateId, usize, StateId)] {
        &self.arcs
    }

    /// Outgoing `(label index, target)` pairs, sorted by label.
    pub fn successors(&self, s: StateId) -> &[(usize, StateId)] {
        &self.out[s]
    }

    /// Incoming `(label index, source)` pairs, sorted by label.
    pub fn predecessors(&self, s: StateId) -> &[(usize, StateId)] {
        &self.inc[s]
    }

    pub fn targets(&self, s: StateId, label: usize) -> impl Iterator<Item = StateId> + '_ {
        self.out[s]
            .iter()
            .filter(move |(l, _)| *l == label)
            .map(|&(_, d)| d)
    }

    pub fn sources(&self, s: StateId, label: usize) -> impl Iterator<Item = StateId> + '_ {
        self.inc[s]
            .iter()
            .filter(move |(l, _)| *l == label)
            .map(|&(_, d)| d)
    }

    pub fn enables(&self, s: StateId, label: usize) -> bool {
        self.out[s].iter().any(|(l, _)| *l == label)
    }

    /// States sorted by name, the canonical iteration order for diagnostics.
    pub fn states_by_name(&self) -> Vec<StateId> {
        let mut v: Vec<StateId> = (0..self.states.len()).collect();
        v.sort_by(|a, b| self.states[*a].cmp(&self.states[*b]));
        v
    }

    /// States reachable from the initial state, in breadth-first order.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &(_, d) in &self.out[s] {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        order
    }

    pub fn is_totally_reachable(&self) -> bool {
        self.reachable().len() == self.num_states()
    }

    pub fn is_forward_deterministic(&self) -> bool {
        self.out
            .iter()
            .all(|succ| succ.windows(2).all(|w| w[0].0 != w[1].0))
    }

    /// True when the arc relation has no cycle (self-loops included).
    pub fn is_acyclic(&self) -> bool {
        let n = self.num_states();
        let mut indeg: Vec<usize> = self.inc.iter().map(Vec::len).collect();
        let mut stack: Vec<StateId> = (0..n).filter(|&s| indeg[s] == 0).collect();
        let mut done = 0;
        while let Some(s) = stack.pop() {
            done += 1;
            for &(_, d) in &self.out[s] {
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    stack.push(d);
                }
            }
        }
        done == n
    }

    fn canonical(&self) -> Canonical<'_> {
        (
            self.states.iter().map(String::as_str).collect(),
            &self.states[self.initial],
            &self.labels,
            self.arcs
                .iter()
                .map(|&(s, l, d)| {
                    (
                        self.states[s].as_str(),
                        self.labels[l].as_str(),
                        self.states[d].as_str(),
                    )
                })
                .collect(),
        )
    }
}

/// Structural equality: same state names, initial state, labels and arcs,
/// regardless of declaration order.
impl PartialEq for Lts {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for Lts {}

impl fmt::Debug for Lts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (_, initial, labels, arcs) = self.canonical();
        f.debug_struct("Lts")
            .field("states", &self.states.len())
            .field("initial", &initial)
            .field("labels", &labels)
            .field("arcs", &arcs)
            .finish()
    }
}

/// The circular LTS `s0 -w1-> s1 -w2-> ... -wk-> s0` induced by `word`.
pub fn circular_lts_from_word(word: &Word) -> Result<Lts, LtsError> {
    if word.is_empty() {
        return Err(LtsError::EmptyWord);
    }
    let k = word.len();
    let mut b = LtsBuilder::new();
    for i in 0..k {
        b.state(&format!("s{i}"));
    }
    for (i, l) in word.letters().iter().enumerate() {
        b.arc(&format!("s{i}"), l, &format!("s{}", (i + 1) % k))?;
    }
    Ok(b.build("s0"))
}

/// The single-path LTS `s0 -w1-> s1 ... -wk-> sk`.
pub fn path_lts_from_word(word: &Word) -> Lts {
    let mut b = LtsBuilder::new();
    b.state("s0");
    for (i, l) in word.letters().iter().enumerate() {
        b.arc(&format!("s{i}"), l, &format!("s{}", i + 1))
            .expect("path arcs are distinct");
    }
    b.build("s0")
}

/// Parikh vector of any path from the initial state to each state,
/// indexed by [`StateId`].
///
/// Requires an acyclic, totally reachable, forward deterministic LTS.
pub fn parikh_distances(lts: &Lts) -> Result<Vec<ParikhVector>, LtsError> {
    if !lts.is_acyclic() {
        return Err(LtsError::PreconditionViolated("LTS has a cycle".into()));
    }
    if !lts.is_forward_deterministic() {
        return Err(LtsError::PreconditionViolated(
            "LTS is not forward deterministic".into(),
        ));
    }
    let order = lts.reachable();
    if order.len() != lts.num_states() {
        return Err(LtsError::PreconditionViolated(
            "LTS is not totally reachable".into(),
        ));
    }
    let mut dist: Vec<Option<ParikhVector>> = vec![None; lts.num_states()];
    dist[lts.initial()] = Some(ParikhVector::default());
    for s in order {
        let base = dist[s].clone().expect("BFS visits parents first");
        for &(l, d) in lts.successors(s) {
            let mut next = base.clone();
            next.increment(lts.label(l));
            match &dist[d] {
                None => dist[d] = Some(next),
                Some(existing) if *existing == next => {}
                Some(_) => {
                    return Err(LtsError::InconsistentDistances(
                        lts.state_name(d).to_string(),
                    ))
                }
            }
        }
    }
    Ok(dist
        .into_iter()
        .map(|d| d.expect("all states reached"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn circular_from_word() {
        let lts = circular_lts_from_word(&w("ab")).unwrap();
        assert_eq!(lts.num_states(), 2);
        assert_eq!(lts.num_arcs(), 2);
        let s0 = lts.state_id("s0").unwrap();
        let s1 = lts.state_id("s1").unwrap();
        assert_eq!(lts.successors(s0), &[(0, s1)]);
        assert_eq!(lts.successors(s1), &[(1, s0)]);

        assert_eq!(
            circular_lts_from_word(&w("aacbbdabd"))
                .unwrap()
                .num_states(),
            9
        );

        let one = circular_lts_from_word(&w("a")).unwrap();
        assert_eq!(one.num_states(), 1);
        assert_eq!(one.successors(0), &[(0, 0)]);

        assert_eq!(
            circular_lts_from_word(&Word::default()),
            Err(LtsError::EmptyWord)
        );
    }

    #[test]
    fn duplicate_arc_rejected() {
        let mut b = LtsBuilder::new();
        b.arc("x", "a", "y").unwrap();
        assert!(matches!(
            b.arc("x", "a", "y"),
            Err(LtsError::DuplicateArc(..))
        ));
    }

    #[test]
    fn distances_on_a_path() {
        let lts = path_lts_from_word(&w("ab"));
        let d = parikh_distances(&lts).unwrap();
        assert_eq!(d[lts.state_id("s0").unwrap()], ParikhVector::default());
        assert_eq!(
            d[lts.state_id("s1").unwrap()],
            ParikhVector::from_counts([("a", 1)])
        );
        assert_eq!(
            d[lts.state_id("s2").unwrap()],
            ParikhVector::from_counts([("a", 1), ("b", 1)])
        );
    }

    #[test]
    fn distances_on_aabb_path() {
        let lts = path_lts_from_word(&w("aabb"));
        let d = parikh_distances(&lts).unwrap();
        let got: Vec<(u64, u64)> = (0..5)
            .map(|i| {
                let v = &d[lts.state_id(&format!("s{i}")).unwrap()];
                (v.get("a"), v.get("b"))
            })
            .collect();
        assert_eq!(got, vec![(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]);
    }

    #[test]
    fn distances_on_a_diamond() {
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.arc("x", "b", "z").unwrap();
        b.arc("i", "b", "y").unwrap();
        b.arc("y", "a", "z").unwrap();
        let lts = b.build("i");
        let d = parikh_distances(&lts).unwrap();
        assert_eq!(
            d[lts.state_id("z").unwrap()],
            ParikhVector::from_counts([("a", 1), ("b", 1)])
        );
    }

    #[test]
    fn inconsistent_distances_detected() {
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.arc("i", "b", "y").unwrap();
        b.arc("x", "a", "z").unwrap();
        b.arc("y", "b", "z").unwrap();
        let lts = b.build("i");
        assert_eq!(
            parikh_distances(&lts),
            Err(LtsError::InconsistentDistances("z".into()))
        );
    }

    #[test]
    fn distances_preconditions() {
        let cyc = circular_lts_from_word(&w("ab")).unwrap();
        assert!(matches!(
            parikh_distances(&cyc),
            Err(LtsError::PreconditionViolated(_))
        ));
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.state("lonely");
        assert!(matches!(
            parikh_distances(&b.build("i")),
            Err(LtsError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn equality_ignores_declaration_order() {
        let mut b1 = LtsBuilder::new();
        b1.arc("p", "a", "q").unwrap();
        b1.arc("q", "b", "p").unwrap();
        let mut b2 = LtsBuilder::new();
        b2.state("q");
        b2.arc("q", "b", "p").unwrap();
        b2.arc("p", "a", "q").unwrap();
        assert_eq!(b1.build("p"), b2.build("p"));
    }
}
