//! Weighted Petri nets, firing, reachability graphs and T-semiflows.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::lts::{Lts, LtsBuilder};
use crate::rational::{null_space, q, to_coprime_integers, Q};
use crate::word::{Label, ParikhVector};
use crate::Checked;

pub const DEFAULT_STATE_BOUND: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("duplicate place {0}")]
    DuplicatePlace(String),
    #[error("place {0} has the same transition as input and output")]
    SelfLoopPlace(String),
    #[error("place {0} has neither input nor output")]
    IsolatedPlace(String),
    #[error("place {0} has a zero arc weight")]
    ZeroWeight(String),
    #[error("name {0} is used for both a place and a transition")]
    NameClash(String),
    #[error("unknown place {0}")]
    UnknownPlace(String),
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("marking has {got} entries, net has {expected} places")]
    MarkingSize { expected: usize, got: usize },
    #[error("transition {transition} is not enabled: place {place} lacks tokens")]
    NotEnabled { transition: Label, place: String },
    #[error("more than {0} reachable states")]
    BoundExceeded(usize),
    #[error("the net is not a weighted marked graph (place {0})")]
    NotWmg(String),
    #[error("the net is not connected")]
    NotConnected,
    #[error("the net has no T-semiflow with full support")]
    NoSemiflow,
}

/// A place-transition net `(P, T, W)`.
///
/// Places keep their declaration order; transitions are sorted. Weights are
/// dense `[place][transition]` tables for both arc directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedNet {
    places: Vec<String>,
    transitions: Vec<Label>,
    /// `pre[p][t] = W(p, t)`
    pre: Vec<Vec<u64>>,
    /// `post[p][t] = W(t, p)`
    post: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: BTreeSet<Label>,
    pre: BTreeMap<(String, Label), u64>,
    post: BTreeMap<(String, Label), u64>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, name: &str) -> Result<&mut Self, NetError> {
        if self.places.iter().any(|p| p == name) {
            return Err(NetError::DuplicatePlace(name.to_string()));
        }
        self.places.push(name.to_string());
        Ok(self)
    }

    pub fn transition(&mut self, name: &str) -> &mut Self {
        self.transitions.insert(name.to_string());
        self
    }

    /// Arc `t -> p` with weight `w` (accumulates).
    pub fn produce(&mut self, t: &str, p: &str, w: u64) -> &mut Self {
        self.transition(t);
        *self.post.entry((p.to_string(), t.to_string())).or_insert(0) += w;
        self
    }

    /// Arc `p -> t` with weight `w` (accumulates).
    pub fn consume(&mut self, p: &str, t: &str, w: u64) -> &mut Self {
        self.transition(t);
        *self.pre.entry((p.to_string(), t.to_string())).or_insert(0) += w;
        self
    }

    pub fn build(&self) -> Result<WeightedNet, NetError> {
        let transitions: Vec<Label> = self.transitions.iter().cloned().collect();
        for p in &self.places {
            if self.transitions.contains(p) {
                return Err(NetError::NameClash(p.clone()));
            }
        }
        let p_ix: HashMap<&str, usize> = self
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let t_ix: HashMap<&str, usize> = transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let mut pre = vec![vec![0; transitions.len()]; self.places.len()];
        let mut post = vec![vec![0; transitions.len()]; self.places.len()];
        for (table, src) in [(&mut pre, &self.pre), (&mut post, &self.post)] {
            for ((p, t), &w) in src {
                let pi = *p_ix
                    .get(p.as_str())
                    .ok_or_else(|| NetError::UnknownPlace(p.clone()))?;
                table[pi][t_ix[t.as_str()]] = w;
            }
        }
        Ok(WeightedNet {
            places: self.places.clone(),
            transitions,
            pre,
            post,
        })
    }
}

impl WeightedNet {
    pub fn places(&self) -> &[String] {
        &self.places
    }

    pub fn transitions(&self) -> &[Label] {
        &self.transitions
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p == name)
    }

    pub fn transition_index(&self, name: &str) -> Option<usize> {
        self.transitions
            .binary_search_by(|t| t.as_str().cmp(name))
            .ok()
    }

    /// `W(p, t)`
    pub fn pre(&self, p: usize, t: usize) -> u64 {
        self.pre[p][t]
    }

    /// `W(t, p)`
    pub fn post(&self, p: usize, t: usize) -> u64 {
        self.post[p][t]
    }

    /// `C(p, t) = W(t, p) - W(p, t)`
    pub fn incidence(&self, p: usize, t: usize) -> i64 {
        self.post[p][t] as i64 - self.pre[p][t] as i64
    }

    /// Transitions producing into `p`.
    pub fn input_transitions(&self, p: usize) -> Vec<usize> {
        (0..self.transitions.len())
            .filter(|&t| self.post[p][t] > 0)
            .collect()
    }

    /// Transitions consuming from `p`.
    pub fn output_transitions(&self, p: usize) -> Vec<usize> {
        (0..self.transitions.len())
            .filter(|&t| self.pre[p][t] > 0)
            .collect()
    }

    /// Canonical state name of a marking: `p1=v1;p2=v2;...` in place order.
    pub fn marking_name(&self, m: &Marking) -> String {
        let mut s = String::new();
        for (i, (p, v)) in self.places.iter().zip(&m.0).enumerate() {
            if i > 0 {
                s.push(';');
            }
            s.push_str(p);
            s.push('=');
            s.push_str(&v.to_string());
        }
        s
    }

    /// Reconstructs the place descriptor of a WMG place.
    pub fn descriptor(&self, p: usize, tokens: u64) -> Option<PlaceDescriptor> {
        let ins = self.input_transitions(p);
        let outs = self.output_transitions(p);
        if ins.len() > 1 || outs.len() > 1 {
            return None;
        }
        Some(PlaceDescriptor {
            input: ins
                .first()
                .map(|&t| (self.transitions[t].clone(), self.post[p][t])),
            output: outs
                .first()
                .map(|&t| (self.transitions[t].clone(), self.pre[p][t])),
            initial_tokens: tokens,
        })
    }

    /// Every place has at most one input and at most one output transition.
    pub fn is_wmg(&self) -> Checked<String> {
        for (p, name) in self.places.iter().enumerate() {
            if self.input_transitions(p).len() > 1 || self.output_transitions(p).len() > 1 {
                return Checked::no(name.clone());
            }
        }
        Checked::yes()
    }

    /// Connectivity of the bipartite place/transition graph.
    pub fn is_connected(&self) -> bool {
        let np = self.places.len();
        let nt = self.transitions.len();
        let total = np + nt;
        if total == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut x = x;
            while parent[x] != r {
                let next = parent[x];
                parent[x] = r;
                x = next;
            }
            r
        }
        for p in 0..np {
            for t in 0..nt {
                if self.pre[p][t] > 0 || self.post[p][t] > 0 {
                    let (a, b) = (find(&mut parent, p), find(&mut parent, np + t));
                    parent[a] = b;
                }
            }
        }
        let root = find(&mut parent, 0);
        (1..total).all(|x| find(&mut parent, x) == root)
    }
}

/// A well-formed WMG place: at most one producer and at most one consumer,
/// never the same transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceDescriptor {
    /// Producing transition and `W(t, p)`.
    pub input: Option<(Label, u64)>,
    /// Consuming transition and `W(p, t)`.
    pub output: Option<(Label, u64)>,
    pub initial_tokens: u64,
}

impl PlaceDescriptor {
    /// `a -(w_in)-> p -(w_out)-> b`
    pub fn between(a: &str, w_in: u64, b: &str, w_out: u64, tokens: u64) -> Self {
        PlaceDescriptor {
            input: Some((a.to_string(), w_in)),
            output: Some((b.to_string(), w_out)),
            initial_tokens: tokens,
        }
    }

    /// A place fed by `a` with no consumer.
    pub fn sink_of(a: &str, w_in: u64, tokens: u64) -> Self {
        PlaceDescriptor {
            input: Some((a.to_string(), w_in)),
            output: None,
            initial_tokens: tokens,
        }
    }

    /// A place consumed by `b` with no producer.
    pub fn source_for(b: &str, w_out: u64, tokens: u64) -> Self {
        PlaceDescriptor {
            input: None,
            output: Some((b.to_string(), w_out)),
            initial_tokens: tokens,
        }
    }
}

/// Assembles a WMG from named place descriptors. Transitions are the ones
/// the descriptors mention.
pub fn build_net(places: &[(String, PlaceDescriptor)]) -> Result<WeightedNet, NetError> {
    Ok(build_system(places)?.net)
}

/// Like [`build_net`], also taking initial tokens from the descriptors.
pub fn build_system(places: &[(String, PlaceDescriptor)]) -> Result<System, NetError> {
    build_system_with(places, std::iter::empty::<&str>())
}

/// Like [`build_system`] with extra transitions that no place mentions.
pub fn build_system_with<'a>(
    places: &[(String, PlaceDescriptor)],
    extra_transitions: impl IntoIterator<Item = &'a str>,
) -> Result<System, NetError> {
    let mut b = NetBuilder::new();
    for t in extra_transitions {
        b.transition(t);
    }
    for (name, d) in places {
        b.place(name)?;
        match (&d.input, &d.output) {
            (None, None) => return Err(NetError::IsolatedPlace(name.clone())),
            (Some((a, _)), Some((c, _))) if a == c => {
                return Err(NetError::SelfLoopPlace(name.clone()))
            }
            _ => {}
        }
        if let Some((t, w)) = &d.input {
            if *w == 0 {
                return Err(NetError::ZeroWeight(name.clone()));
            }
            b.produce(t, name, *w);
        }
        if let Some((t, w)) = &d.output {
            if *w == 0 {
                return Err(NetError::ZeroWeight(name.clone()));
            }
            b.consume(name, t, *w);
        }
    }
    let net = b.build()?;
    let initial = Marking(places.iter().map(|(_, d)| d.initial_tokens).collect());
    Ok(System { net, initial })
}

/// Tokens per place, aligned with the place order of its net.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(pub Vec<u64>);

impl Marking {
    pub fn tokens(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, p: usize) -> u64 {
        self.0[p]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn from_named(net: &WeightedNet, tokens: &[(&str, u64)]) -> Result<Marking, NetError> {
        let mut m = vec![0; net.places().len()];
        for (p, k) in tokens {
            let i = net
                .place_index(p)
                .ok_or_else(|| NetError::UnknownPlace(p.to_string()))?;
            m[i] = *k;
        }
        Ok(Marking(m))
    }
}

/// A marked net `(N, M0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    pub net: WeightedNet,
    pub initial: Marking,
}

impl System {
    pub fn new(net: WeightedNet, initial: Marking) -> Result<System, NetError> {
        if initial.0.len() != net.places().len() {
            return Err(NetError::MarkingSize {
                expected: net.places().len(),
                got: initial.0.len(),
            });
        }
        Ok(System { net, initial })
    }

    /// The descriptor of every place, when the net is a WMG.
    pub fn descriptors(&self) -> Option<Vec<(String, PlaceDescriptor)>> {
        (0..self.net.places().len())
            .map(|p| {
                self.net
                    .descriptor(p, self.initial.get(p))
                    .map(|d| (self.net.places()[p].clone(), d))
            })
            .collect()
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.net.marking_name(&self.initial))
    }
}

/// The first place (in place order) that blocks `t`, if any.
pub fn blocking_place(net: &WeightedNet, m: &Marking, t: usize) -> Option<usize> {
    (0..net.places.len()).find(|&p| m.0[p] < net.pre[p][t])
}

pub fn is_enabled(net: &WeightedNet, m: &Marking, t: usize) -> bool {
    blocking_place(net, m, t).is_none()
}

fn fire_unchecked(net: &WeightedNet, m: &Marking, t: usize) -> Marking {
    Marking(
        (0..net.places.len())
            .map(|p| m.0[p] - net.pre[p][t] + net.post[p][t])
            .collect(),
    )
}

/// `M'(p) = M(p) - W(p,t) + W(t,p)`.
pub fn fire(net: &WeightedNet, m: &Marking, t: &str) -> Result<Marking, NetError> {
    let ti = net
        .transition_index(t)
        .ok_or_else(|| NetError::UnknownTransition(t.to_string()))?;
    if let Some(p) = blocking_place(net, m, ti) {
        return Err(NetError::NotEnabled {
            transition: t.to_string(),
            place: net.places[p].clone(),
        });
    }
    Ok(fire_unchecked(net, m, ti))
}

/// Fires a sequence of transitions.
pub fn fire_sequence<'a>(
    net: &WeightedNet,
    m: &Marking,
    seq: impl IntoIterator<Item = &'a str>,
) -> Result<Marking, NetError> {
    let mut cur = m.clone();
    for t in seq {
        cur = fire(net, &cur, t)?;
    }
    Ok(cur)
}

/// Breadth-first exploration; `limit` is either a state bound (error when
/// exceeded) or a depth (states beyond it are not expanded).
fn explore(
    sys: &System,
    state_bound: Option<usize>,
    depth: Option<usize>,
) -> Result<Lts, NetError> {
    let net = &sys.net;
    let mut index: HashMap<Marking, usize> = HashMap::new();
    let mut markings: Vec<Marking> = Vec::new();
    let mut depths: Vec<usize> = Vec::new();
    let mut arcs: Vec<(usize, usize, usize)> = Vec::new();
    index.insert(sys.initial.clone(), 0);
    markings.push(sys.initial.clone());
    depths.push(0);
    let mut queue = VecDeque::from([0usize]);
    if state_bound.is_some_and(|b| b < 1) {
        return Err(NetError::BoundExceeded(state_bound.unwrap()));
    }
    while let Some(s) = queue.pop_front() {
        if depth.is_some_and(|d| depths[s] >= d) {
            continue;
        }
        for t in 0..net.transitions.len() {
            if !is_enabled(net, &markings[s], t) {
                continue;
            }
            let next = fire_unchecked(net, &markings[s], t);
            let d = match index.get(&next) {
                Some(&d) => d,
                None => {
                    let d = markings.len();
                    if state_bound.is_some_and(|b| d + 1 > b) {
                        return Err(NetError::BoundExceeded(state_bound.unwrap()));
                    }
                    index.insert(next.clone(), d);
                    markings.push(next);
                    depths.push(depths[s] + 1);
                    queue.push_back(d);
                    d
                }
            };
            arcs.push((s, t, d));
        }
    }
    let names: Vec<String> = markings.iter().map(|m| net.marking_name(m)).collect();
    let mut b = LtsBuilder::new();
    for n in &names {
        b.state(n);
    }
    for t in &net.transitions {
        b.label(t);
    }
    for (s, t, d) in arcs {
        b.arc(&names[s], &net.transitions[t], &names[d])
            .expect("firing is deterministic");
    }
    Ok(b.build(&names[0]))
}

/// The reachability graph, with states named by [`WeightedNet::marking_name`].
/// Fails once more than `state_bound` markings are discovered.
pub fn reachability_graph(sys: &System, state_bound: usize) -> Result<Lts, NetError> {
    explore(sys, Some(state_bound), None)
}

/// The part of the reachability graph within `depth` firings of the initial
/// marking; states at exactly `depth` keep no outgoing arcs.
pub fn truncated_reachability_graph(sys: &System, depth: usize) -> Lts {
    explore(sys, None, Some(depth)).expect("no state bound")
}

/// The unique minimal T-semiflow of a connected WMG, with full support.
pub fn minimal_t_semiflow(net: &WeightedNet) -> Result<ParikhVector, NetError> {
    if let Some(p) = net.is_wmg().witness {
        return Err(NetError::NotWmg(p));
    }
    if !net.is_connected() {
        return Err(NetError::NotConnected);
    }
    let nt = net.transitions.len();
    if nt == 0 {
        return Err(NetError::NoSemiflow);
    }
    let c: Vec<Vec<Q>> = (0..net.places.len())
        .map(|p| (0..nt).map(|t| q(net.incidence(p, t))).collect())
        .collect();
    let kernel = null_space(&c, nt);
    if kernel.len() != 1 {
        return Err(NetError::NoSemiflow);
    }
    let mut v = to_coprime_integers(&kernel[0]);
    if v.iter().any(|x| x.is_negative()) {
        v = v.into_iter().map(|x| -x).collect();
    }
    if v.iter().any(|x| x.is_zero() || x.is_negative()) {
        return Err(NetError::NoSemiflow);
    }
    Ok(ParikhVector::from_counts(
        net.transitions
            .iter()
            .zip(v)
            .map(|(t, x)| (t.clone(), BigInt::to_u64(&x).expect("semiflow fits in u64"))),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circuit(n: u64, m: u64, i: u64, j: u64) -> System {
        build_system(&[
            ("p_ab".into(), PlaceDescriptor::between("a", m, "b", n, i)),
            ("p_ba".into(), PlaceDescriptor::between("b", n, "a", m, j)),
        ])
        .unwrap()
    }

    fn fig3() -> System {
        // p1 = p_{b,a} with 28 tokens, p2 = p_{a,b}.
        build_system(&[
            ("p1".into(), PlaceDescriptor::between("b", 8, "a", 21, 28)),
            ("p2".into(), PlaceDescriptor::between("a", 21, "b", 8, 0)),
        ])
        .unwrap()
    }

    #[test]
    fn build_from_descriptors() {
        let net = build_net(&[("p".into(), PlaceDescriptor::between("a", 1, "b", 1, 0))]).unwrap();
        assert_eq!(net.places().len(), 1);
        assert_eq!(net.transitions(), ["a", "b"]);
        let bad = build_net(&[("p".into(), PlaceDescriptor::between("a", 1, "a", 1, 0))]);
        assert_eq!(bad, Err(NetError::SelfLoopPlace("p".into())));
        let dup = build_net(&[
            ("p".into(), PlaceDescriptor::source_for("a", 1, 0)),
            ("p".into(), PlaceDescriptor::source_for("b", 1, 0)),
        ]);
        assert_eq!(dup, Err(NetError::DuplicatePlace("p".into())));
    }

    #[test]
    fn generic_binary_circuit_shape() {
        let sys = circuit(3, 5, 0, 7);
        let net = &sys.net;
        let a = net.transition_index("a").unwrap();
        let b = net.transition_index("b").unwrap();
        let pab = net.place_index("p_ab").unwrap();
        assert_eq!((net.post(pab, a), net.pre(pab, b)), (5, 3));
        let pba = net.place_index("p_ba").unwrap();
        assert_eq!((net.post(pba, b), net.pre(pba, a)), (3, 5));
    }

    #[test]
    fn firing() {
        let sys = circuit(1, 1, 0, 1);
        let m = fire(&sys.net, &sys.initial, "a").unwrap();
        assert_eq!(m.tokens(), &[1, 0]);
        assert_eq!(sys.initial.tokens(), &[0, 1]);

        let f = fig3();
        let m = fire(&f.net, &f.initial, "a").unwrap();
        assert_eq!(m.tokens(), &[7, 21]);
        assert_eq!(
            fire(&f.net, &f.initial, "b"),
            Err(NetError::NotEnabled {
                transition: "b".into(),
                place: "p2".into()
            })
        );
    }

    #[test]
    fn state_equation_holds() {
        let f = fig3();
        let mut m = f.initial.clone();
        for t in ["a", "b", "b", "a"] {
            let next = fire(&f.net, &m, t).unwrap();
            let ti = f.net.transition_index(t).unwrap();
            for p in 0..2 {
                assert_eq!(next.get(p) as i64, m.get(p) as i64 + f.net.incidence(p, ti));
            }
            m = next;
        }
    }

    #[test]
    fn fig3_reachability_graph_is_circular_with_29_states() {
        let rg = reachability_graph(&fig3(), DEFAULT_STATE_BOUND).unwrap();
        assert_eq!(rg.num_states(), 29);
        assert_eq!(rg.num_arcs(), 29);
        assert_eq!(rg.state_name(rg.initial()), "p1=28;p2=0");
    }

    #[test]
    fn empty_net_has_one_state() {
        let sys = System::new(NetBuilder::new().build().unwrap(), Marking(vec![])).unwrap();
        let rg = reachability_graph(&sys, 10).unwrap();
        assert_eq!(rg.num_states(), 1);
        assert_eq!(rg.num_arcs(), 0);
    }

    #[test]
    fn unbounded_growth_hits_bound() {
        let sys = build_system(&[("p".into(), PlaceDescriptor::sink_of("a", 1, 0))]).unwrap();
        assert_eq!(reachability_graph(&sys, 5), Err(NetError::BoundExceeded(5)));
        let t = truncated_reachability_graph(&sys, 3);
        assert_eq!(t.num_states(), 4);
    }

    #[test]
    fn wmg_check() {
        assert!(fig3().net.is_wmg().holds);
        let mut b = NetBuilder::new();
        b.place("p").unwrap();
        b.consume("p", "a", 1).consume("p", "b", 1);
        let net = b.build().unwrap();
        assert_eq!(net.is_wmg(), Checked::no("p".to_string()));
        assert!(NetBuilder::new().build().unwrap().is_wmg().holds);
    }

    #[test]
    fn semiflows() {
        let pv = minimal_t_semiflow(&circuit(8, 21, 0, 28).net).unwrap();
        assert_eq!(pv, ParikhVector::from_counts([("a", 8), ("b", 21)]));

        let ring = build_net(&[
            ("p1".into(), PlaceDescriptor::between("a", 1, "b", 1, 1)),
            ("p2".into(), PlaceDescriptor::between("b", 1, "c", 1, 0)),
            ("p3".into(), PlaceDescriptor::between("c", 1, "a", 1, 0)),
        ])
        .unwrap();
        assert_eq!(
            minimal_t_semiflow(&ring).unwrap(),
            ParikhVector::from_counts([("a", 1), ("b", 1), ("c", 1)])
        );

        let open = build_net(&[("p".into(), PlaceDescriptor::between("a", 1, "b", 2, 0))]).unwrap();
        assert_eq!(
            minimal_t_semiflow(&open).unwrap(),
            ParikhVector::from_counts([("a", 2), ("b", 1)])
        );

        let sink = build_net(&[("p".into(), PlaceDescriptor::sink_of("a", 1, 0))]).unwrap();
        assert_eq!(minimal_t_semiflow(&sink), Err(NetError::NoSemiflow));

        let two = build_net(&[
            ("p".into(), PlaceDescriptor::between("a", 1, "b", 1, 0)),
            ("q".into(), PlaceDescriptor::between("c", 1, "d", 1, 0)),
        ])
        .unwrap();
        assert_eq!(minimal_t_semiflow(&two), Err(NetError::NotConnected));
    }
}
