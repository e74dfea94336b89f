//! Synthesis for finite acyclic LTS through their lattice embedding.
//!
//! Each state is identified with its Parikh distance from the initial state.
//! A solution exists only if the embedded point set is lattice-convex; the
//! places are then WMG-regions `k + h*x_u - l*x_t >= 0` that forbid each
//! missing arc, plus counter places when markings must be told apart.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::lts::{
    check_basic_properties, compare_rooted, parikh_distances, Lts, LtsError, PropertyWitness,
};
use crate::net::{build_system_with, reachability_graph, NetError, PlaceDescriptor, System};
use crate::rational::{feasible_nonnegative, q, simplest_in, to_coprime_integers, Bound, Q};
use crate::word::Label;
use crate::Checked;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AcyclicError {
    #[error("property b fails: {0}")]
    PropertyBViolated(PropertyWitness),
    #[error("the LTS has a cycle")]
    NotAcyclic,
    #[error("the embedded states are not convex: {} is missing", fmt_point(.0))]
    NonConvex(Vec<i64>),
    #[error("no WMG-region forbids {label} at {state}")]
    NoRegionExists { state: String, label: Label },
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Net(#[from] NetError),
}

pub fn fmt_point(p: &[i64]) -> String {
    let parts: Vec<String> = p.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

/// Finite set of points of `N^d`, one coordinate per label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePointSet {
    labels: Vec<Label>,
    points: Vec<Vec<i64>>,
    members: HashSet<Vec<i64>>,
}

impl LatticePointSet {
    /// Points are kept in the given order; duplicates are dropped.
    pub fn new(labels: Vec<Label>, points: impl IntoIterator<Item = Vec<i64>>) -> Self {
        let mut members = HashSet::new();
        let mut kept = Vec::new();
        for p in points {
            assert_eq!(p.len(), labels.len(), "point dimension");
            if members.insert(p.clone()) {
                kept.push(p);
            }
        }
        LatticePointSet {
            labels,
            points: kept,
            members,
        }
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.members.contains(p)
    }

    pub fn has_origin(&self) -> bool {
        self.contains(&vec![0; self.dimension()])
    }

    pub fn coordinate(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `p + e_t` is a member.
    fn enables(&self, p: &[i64], t: usize) -> bool {
        let mut s = p.to_vec();
        s[t] += 1;
        self.contains(&s)
    }
}

/// The half-space `k + h*x_gain - l*x_loss >= 0`, realised by a place fed
/// by the gain label with weight `h` and consumed by the loss label with
/// weight `l`, holding `k` tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WmgRegion {
    pub gain_label: Option<Label>,
    pub loss_label: Label,
    pub h: u64,
    pub l: u64,
    pub k: u64,
}

impl WmgRegion {
    /// Value at `point`; `labels` names its coordinates.
    pub fn value(&self, labels: &[Label], point: &[i64]) -> i64 {
        let at = |name: &str| {
            labels
                .iter()
                .position(|l| l == name)
                .map_or(0, |i| point[i])
        };
        let gain = self.gain_label.as_deref().map_or(0, at);
        self.k as i64 + self.h as i64 * gain - self.l as i64 * at(&self.loss_label)
    }

    pub fn to_place(&self) -> PlaceDescriptor {
        PlaceDescriptor {
            input: self.gain_label.clone().map(|g| (g, self.h)),
            output: Some((self.loss_label.clone(), self.l)),
            initial_tokens: self.k,
        }
    }

    /// Whether the region is valid on `ps` and forbids its loss label at
    /// `point`.
    fn separates(&self, ps: &LatticePointSet, point: &[i64]) -> bool {
        self.value(ps.labels(), point) < self.l as i64
    }
}

impl fmt::Display for WmgRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.gain_label {
            Some(g) => write!(
                f,
                "{} + {}*{} - {}*{} >= 0",
                self.k, self.h, g, self.l, self.loss_label
            ),
            None => write!(f, "{} - {}*{} >= 0", self.k, self.l, self.loss_label),
        }
    }
}

/// Identifies each state with its Parikh distance from the initial state.
/// Points are listed in state order.
pub fn embed(lts: &Lts) -> Result<LatticePointSet, LtsError> {
    let dist = parikh_distances(lts)?;
    let labels = lts.labels().to_vec();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut points = Vec::with_capacity(dist.len());
    for (s, pv) in dist.iter().enumerate() {
        let p: Vec<i64> = labels.iter().map(|l| pv.get(l) as i64).collect();
        if seen.insert(p.clone(), s).is_some() {
            return Err(LtsError::InconsistentDistances(
                lts.state_name(s).to_string(),
            ));
        }
        points.push(p);
    }
    Ok(LatticePointSet::new(labels, points))
}

/// Every lattice point of the real convex hull of `ps` belongs to `ps`.
/// The witness is the lexicographically least missing point.
pub fn check_lattice_convex(ps: &LatticePointSet) -> Checked<Vec<i64>> {
    let d = ps.dimension();
    if ps.is_empty() {
        return Checked::yes();
    }
    let lo: Vec<i64> = (0..d)
        .map(|i| ps.points().iter().map(|p| p[i]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..d)
        .map(|i| ps.points().iter().map(|p| p[i]).max().unwrap())
        .collect();
    // Convex combination: sum_j lambda_j p_j = x, sum_j lambda_j = 1.
    let mut a: Vec<Vec<Q>> = (0..d)
        .map(|i| ps.points().iter().map(|p| q(p[i])).collect())
        .collect();
    a.push(vec![q(1); ps.len()]);
    let mut x = lo.clone();
    loop {
        if !ps.contains(&x) {
            let mut b: Vec<Q> = x.iter().map(|&v| q(v)).collect();
            b.push(q(1));
            if feasible_nonnegative(&a, &b).is_some() {
                return Checked::no(x);
            }
        }
        // Odometer over the bounding box, last coordinate fastest.
        let mut i = d;
        loop {
            if i == 0 {
                return Checked::yes();
            }
            i -= 1;
            if x[i] < hi[i] {
                x[i] += 1;
                x[i + 1..d].copy_from_slice(&lo[i + 1..d]);
                break;
            }
        }
    }
}

/// Finds a WMG-region with loss label `label` that is valid on `ps` and
/// forbids `label` at `forbidden`. Gain labels are tried in order, none
/// first; the gain weight is the simplest admissible rational before
/// scaling to coprime integers.
pub fn find_separating_region(
    ps: &LatticePointSet,
    forbidden: &[i64],
    label: &str,
) -> Result<WmgRegion, AcyclicError> {
    let none = || AcyclicError::NoRegionExists {
        state: fmt_point(forbidden),
        label: label.to_string(),
    };
    let t = ps.coordinate(label).ok_or_else(none)?;
    let mut gains: Vec<Option<usize>> = vec![None];
    gains.extend((0..ps.dimension()).filter(|&u| u != t).map(Some));
    for gain in gains {
        if let Some(r) = region_with_gain(ps, forbidden, t, gain) {
            return Ok(r);
        }
    }
    Err(none())
}

/// With `l = 1`: `k >= p_t + e_p - h*p_u` at every point `p` (`e_p = 1`
/// when `t` is enabled at `p`), `k >= 0`, `k < f_t + 1 - h*f_u`.
fn region_with_gain(
    ps: &LatticePointSet,
    f: &[i64],
    t: usize,
    gain: Option<usize>,
) -> Option<WmgRegion> {
    let fu = gain.map_or(0, |u| f[u]);
    let lower_terms: Vec<(i64, i64)> = ps
        .points()
        .iter()
        .map(|p| {
            let e = i64::from(ps.enables(p, t));
            (p[t] + e, gain.map_or(0, |u| p[u]))
        })
        .chain(std::iter::once((0, 0)))
        .collect();
    // Each lower term (a, b) must satisfy a - h*b < f_t + 1 - h*f_u,
    // i.e. h*(f_u - b) < f_t + 1 - a.
    let mut lower = Bound {
        value: q(0),
        strict: false,
    };
    let mut upper: Option<Bound> = None;
    for &(a, b) in &lower_terms {
        let c = fu - b;
        let r = f[t] + 1 - a;
        if gain.is_none() || c == 0 {
            if r <= 0 {
                return None;
            }
            continue;
        }
        let v = Q::new(BigInt::from(r), BigInt::from(c));
        if c > 0 {
            if upper.as_ref().is_none_or(|u| v < u.value) {
                upper = Some(Bound {
                    value: v,
                    strict: true,
                });
            }
        } else if v > lower.value || (v == lower.value && !lower.strict) {
            lower = Bound {
                value: v,
                strict: true,
            };
        }
    }
    let h = match gain {
        None => Q::zero(),
        Some(_) => simplest_in(&lower, upper.as_ref())?,
    };
    let k = lower_terms
        .iter()
        .map(|&(a, b)| q(a) - &h * q(b))
        .max()
        .expect("the origin term is always present");
    let k = if k.is_negative() { Q::zero() } else { k };
    let ints = to_coprime_integers(&[k, h, q(1)]);
    let [k, h, l] = [&ints[0], &ints[1], &ints[2]].map(|x| x.to_u64().expect("small coefficients"));
    let gain_label = if h == 0 {
        None
    } else {
        gain.map(|u| ps.labels()[u].clone())
    };
    Some(WmgRegion {
        gain_label,
        loss_label: ps.labels()[t].clone(),
        h,
        l,
        k,
    })
}

/// A certified solution of an acyclic LTS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcyclicSolution {
    pub system: System,
    pub regions: Vec<WmgRegion>,
    /// Labels that received a counter place `p(t,*)`.
    pub counters: Vec<Label>,
}

pub fn region_place_name(index: usize, r: &WmgRegion) -> String {
    format!(
        "p{index}({},{})",
        r.gain_label.as_deref().unwrap_or("*"),
        r.loss_label
    )
}

pub fn counter_place_name(label: &str) -> String {
    format!("p({label},*)")
}

pub fn synthesize_acyclic(lts: &Lts) -> Result<AcyclicSolution, AcyclicError> {
    let report = check_basic_properties(lts);
    if let Some(w) = report.witnesses.into_iter().next() {
        return Err(AcyclicError::PropertyBViolated(w));
    }
    if !lts.is_acyclic() {
        return Err(AcyclicError::NotAcyclic);
    }
    let ps = embed(lts)?;
    if let Some(x) = check_lattice_convex(&ps).witness {
        return Err(AcyclicError::NonConvex(x));
    }

    let mut regions: Vec<WmgRegion> = Vec::new();
    for s in lts.states_by_name() {
        let p = &ps.points()[s];
        for (t, label) in lts.labels().iter().enumerate() {
            if lts.enables(s, t) {
                continue;
            }
            let reused = regions
                .iter()
                .any(|r| r.loss_label == *label && r.separates(&ps, p));
            if reused {
                continue;
            }
            let r = find_separating_region(&ps, p, label).map_err(|_| {
                AcyclicError::NoRegionExists {
                    state: lts.state_name(s).to_string(),
                    label: label.clone(),
                }
            })?;
            regions.push(r);
        }
    }

    // Counter places only refine the partition of states by marking.
    let mut counters: Vec<usize> = Vec::new();
    let classes = |counters: &[usize]| {
        ps.points()
            .iter()
            .map(|p| {
                let mut key: Vec<i64> = regions.iter().map(|r| r.value(ps.labels(), p)).collect();
                key.extend(counters.iter().map(|&t| p[t]));
                key
            })
            .collect::<BTreeSet<_>>()
            .len()
    };
    let mut current = classes(&counters);
    for t in 0..ps.dimension() {
        if current == ps.len() {
            break;
        }
        counters.push(t);
        let refined = classes(&counters);
        if refined > current {
            current = refined;
        } else {
            counters.pop();
        }
    }

    let mut places: Vec<(String, PlaceDescriptor)> = regions
        .iter()
        .enumerate()
        .map(|(i, r)| (region_place_name(i, r), r.to_place()))
        .collect();
    for &t in &counters {
        let label = &ps.labels()[t];
        places.push((
            counter_place_name(label),
            PlaceDescriptor::sink_of(label, 1, 0),
        ));
    }
    let system = build_system_with(&places, lts.labels().iter().map(String::as_str))?;
    let rg = reachability_graph(&system, lts.num_states() + 1)
        .map_err(|e| AcyclicError::CertificationFailed(e.to_string()))?;
    if let Err(d) = compare_rooted(&rg, lts)? {
        return Err(AcyclicError::CertificationFailed(d.to_string()));
    }
    Ok(AcyclicSolution {
        system,
        regions,
        counters: counters.iter().map(|&t| ps.labels()[t].clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{path_lts_from_word, LtsBuilder};
    use crate::net::WeightedNet;
    use crate::word::Word;

    fn labels(ls: &[&str]) -> Vec<Label> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    fn set2(points: &[(i64, i64)]) -> LatticePointSet {
        LatticePointSet::new(labels(&["a", "b"]), points.iter().map(|&(x, y)| vec![x, y]))
    }

    fn grid(w: i64, h: i64) -> Lts {
        let mut b = LtsBuilder::new();
        let name = |i: i64, j: i64| format!("{i}_{j}");
        b.state(&name(0, 0));
        for i in 0..=w {
            for j in 0..=h {
                if i < w {
                    b.arc(&name(i, j), "a", &name(i + 1, j)).unwrap();
                }
                if j < h {
                    b.arc(&name(i, j), "b", &name(i, j + 1)).unwrap();
                }
            }
        }
        b.build(&name(0, 0))
    }

    #[test]
    fn embeddings() {
        let ps = embed(&path_lts_from_word(&Word::parse("ab").unwrap())).unwrap();
        assert_eq!(ps.points(), &[vec![0, 0], vec![1, 0], vec![1, 1]]);
        let ps = embed(&path_lts_from_word(&Word::parse("aabb").unwrap())).unwrap();
        assert_eq!(ps.len(), 5);
        assert!(ps.contains(&[2, 1]));
        let ps = embed(&grid(1, 1)).unwrap();
        let got: BTreeSet<Vec<i64>> = ps.points().iter().cloned().collect();
        assert_eq!(got.len(), 4);
        assert!(ps.has_origin());
    }

    #[test]
    fn convexity() {
        assert_eq!(
            check_lattice_convex(&set2(&[(0, 0), (1, 2), (2, 1)])).witness,
            Some(vec![1, 1])
        );
        assert_eq!(
            check_lattice_convex(&set2(&[(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)])).witness,
            Some(vec![1, 1])
        );
        assert!(check_lattice_convex(&set2(&[(0, 0), (0, 1), (1, 0), (1, 1)])).holds);
        let three = LatticePointSet::new(
            labels(&["a", "b", "c"]),
            [
                vec![0, 0, 0],
                vec![2, 0, 0],
                vec![0, 2, 0],
                vec![0, 0, 2],
                vec![1, 1, 0],
            ],
        );
        assert_eq!(check_lattice_convex(&three).witness, Some(vec![0, 0, 1]));
    }

    #[test]
    fn counter_like_region() {
        let ps = set2(&[(0, 0), (1, 0)]);
        let r = find_separating_region(&ps, &[1, 0], "a").unwrap();
        assert_eq!(
            r,
            WmgRegion {
                gain_label: None,
                loss_label: "a".into(),
                h: 0,
                l: 1,
                k: 1
            }
        );
    }

    #[test]
    fn region_impossible_when_everything_enables() {
        // Forbid b where b is enabled: constraints contradict.
        let ps = set2(&[(0, 0), (0, 1)]);
        assert!(matches!(
            find_separating_region(&ps, &[0, 0], "b"),
            Err(AcyclicError::NoRegionExists { .. })
        ));
    }

    #[test]
    fn regions_with_gain() {
        // Staircase: b only after a.
        let mut b = LtsBuilder::new();
        b.arc("0", "a", "1").unwrap();
        b.arc("1", "b", "2").unwrap();
        b.arc("1", "a", "3").unwrap();
        b.arc("3", "b", "4").unwrap();
        b.arc("2", "a", "4").unwrap();
        let lts = b.build("0");
        let sol = synthesize_acyclic(&lts).unwrap();
        assert!(sol.system.net.is_wmg().holds);
        assert!(sol
            .regions
            .iter()
            .any(|r| r.gain_label.as_deref() == Some("a") && r.loss_label == "b"));
    }

    #[test]
    fn region_values_match_markings() {
        let lts = grid(2, 3);
        let sol = synthesize_acyclic(&lts).unwrap();
        let ps = embed(&lts).unwrap();
        for p in ps.points() {
            for r in &sol.regions {
                assert!(r.value(ps.labels(), p) >= 0);
            }
        }
    }

    #[test]
    fn single_arc() {
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "s").unwrap();
        let sol = synthesize_acyclic(&b.build("i")).unwrap();
        let net: &WeightedNet = &sol.system.net;
        assert_eq!(net.places().len(), 1);
        assert_eq!(
            sol.system.descriptors().unwrap()[0].1,
            PlaceDescriptor::source_for("a", 1, 1)
        );
        assert!(sol.counters.is_empty());
    }

    #[test]
    fn counters_separate_states() {
        // The region 2 - x_a already tells the three states apart.
        let sol = synthesize_acyclic(&path_lts_from_word(&Word::parse("aa").unwrap())).unwrap();
        assert!(sol.counters.is_empty());
        // A label without arcs is still a transition, disabled everywhere.
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.label("c");
        let sol = synthesize_acyclic(&b.build("i")).unwrap();
        assert!(sol.system.net.transitions().contains(&"c".to_string()));
    }

    #[test]
    fn rejections() {
        let cyc = crate::lts::circular_lts_from_word(&Word::parse("ab").unwrap()).unwrap();
        assert_eq!(synthesize_acyclic(&cyc), Err(AcyclicError::NotAcyclic));
        assert_eq!(
            synthesize_acyclic(&path_lts_from_word(&Word::parse("aabb").unwrap())),
            Err(AcyclicError::NonConvex(vec![1, 1]))
        );
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.state("y");
        assert!(matches!(
            synthesize_acyclic(&b.build("i")),
            Err(AcyclicError::PropertyBViolated(_))
        ));
    }
}
