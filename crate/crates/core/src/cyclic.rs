//! Cyclic solvability of words over any number of labels.
//!
//! A sufficient condition looks at the projections of the word on pairs of
//! adjacent labels: when every such projection is a power of a circuit
//! solvable word with prime Parikh vector, the circuits merge into a net
//! solving the whole word. For ternary words with Parikh vector `(x,x,y)`
//! the condition is also necessary. An exhaustive search over the pairwise
//! place skeleton serves as an independent oracle.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::binary::{circuit_place, solve_binary_cyclic, BinaryError};
use crate::lts::{circular_lts_from_word, compare_rooted, LtsError};
use crate::net::{build_system_with, reachability_graph, NetError, PlaceDescriptor, System};
use crate::word::{Label, ParikhVector, Word};

pub const DEFAULT_ORACLE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclicError {
    #[error("the word is empty")]
    EmptyWord,
    #[error("Parikh vector {0} is not prime")]
    NotPrimeParikh(ParikhVector),
    #[error("label {0} does not occur in the word")]
    LabelAbsent(Label),
    #[error("pair {},{} fails: {reason}", .pair.0, .pair.1)]
    PairConditionFailed {
        pair: (Label, Label),
        reason: String,
    },
    #[error("out of scope: {0}")]
    OutOfTheoremScope(String),
    #[error("{candidates} candidate markings exceed the budget of {budget}")]
    SearchSpaceTooLarge { candidates: u128, budget: u64 },
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Unordered label pairs that are adjacent somewhere in the cyclic word,
/// each stored in increasing order.
pub fn contiguous_pairs(word: &Word) -> BTreeSet<(Label, Label)> {
    let w = word.letters();
    let mut pairs = BTreeSet::new();
    for i in 0..w.len() {
        let (x, y) = (&w[i], &w[(i + 1) % w.len()]);
        if x != y {
            pairs.insert(ordered(x, y));
        }
    }
    pairs
}

fn ordered(x: &str, y: &str) -> (Label, Label) {
    if x <= y {
        (x.to_string(), y.to_string())
    } else {
        (y.to_string(), x.to_string())
    }
}

/// Projection `u` of a word on a pair, factored as `u = v^ell` with `v`
/// primitive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairProjection {
    pub pair: (Label, Label),
    pub word_u: Word,
    pub root_v: Word,
    pub ell: usize,
    pub contiguous: bool,
}

pub fn project(word: &Word, pair: (&str, &str)) -> Result<PairProjection, CyclicError> {
    for l in [pair.0, pair.1] {
        if !word.letters().iter().any(|x| x == l) {
            return Err(CyclicError::LabelAbsent(l.to_string()));
        }
    }
    let word_u = word.project(&[pair.0, pair.1]);
    let (root_v, ell) = word_u.primitive_root();
    let pair = ordered(pair.0, pair.1);
    let contiguous = contiguous_pairs(word).contains(&pair);
    Ok(PairProjection {
        pair,
        word_u,
        root_v,
        ell,
        contiguous,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    SolvableByTheorem5,
    SolvableByTheorem6,
    UnsolvableByTheorem6,
    OracleSolvable,
    OracleUnsolvable,
    Inconclusive,
}

impl Verdict {
    pub fn is_solvable(self) -> bool {
        matches!(
            self,
            Verdict::SolvableByTheorem5 | Verdict::SolvableByTheorem6 | Verdict::OracleSolvable
        )
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Outcome of the per-pair condition for one adjacent pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairDiagnostic {
    pub projection: PairProjection,
    pub root_prime: bool,
    /// `None` when the root is solved by a circuit, else the reason.
    pub failure: Option<String>,
}

impl PairDiagnostic {
    pub fn passes(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicDecision {
    pub verdict: Verdict,
    /// Certified solution for solvable verdicts.
    pub system: Option<System>,
    pub pairs: Vec<PairDiagnostic>,
    /// First adjacent pair failing the per-pair condition.
    pub witness_pair: Option<(Label, Label)>,
    /// Set when an oracle verdict only covers the searched place family.
    pub within_searched_family: bool,
}

impl CyclicDecision {
    fn new(verdict: Verdict) -> Self {
        CyclicDecision {
            verdict,
            system: None,
            pairs: Vec::new(),
            witness_pair: None,
            within_searched_family: false,
        }
    }
}

fn require_prime(word: &Word) -> Result<(), CyclicError> {
    if word.is_empty() {
        return Err(CyclicError::EmptyWord);
    }
    let pv = word.parikh();
    if !pv.is_prime() {
        return Err(CyclicError::NotPrimeParikh(pv));
    }
    Ok(())
}

fn diagnose(word: &Word) -> Vec<PairDiagnostic> {
    contiguous_pairs(word)
        .into_iter()
        .map(|(x, y)| {
            let projection = project(word, (&x, &y)).expect("adjacent labels occur");
            let root_prime = projection.root_v.parikh().is_prime();
            let failure = if !root_prime {
                Some(format!(
                    "root {} has non-prime Parikh vector {}",
                    projection.root_v,
                    projection.root_v.parikh()
                ))
            } else {
                solve_binary_cyclic(&projection.root_v)
                    .err()
                    .map(|e| e.to_string())
            };
            PairDiagnostic {
                projection,
                root_prime,
                failure,
            }
        })
        .collect()
}

fn first_failure(pairs: &[PairDiagnostic]) -> Option<(Label, Label)> {
    pairs
        .iter()
        .find(|d| !d.passes())
        .map(|d| d.projection.pair.clone())
}

fn certify(sys: &System, word: &Word) -> Result<(), CyclicError> {
    let target = circular_lts_from_word(word)?;
    let rg = reachability_graph(sys, word.len() + 1)
        .map_err(|e| CyclicError::CertificationFailed(e.to_string()))?;
    match compare_rooted(&rg, &target)? {
        Ok(_) => Ok(()),
        Err(d) => Err(CyclicError::CertificationFailed(d.to_string())),
    }
}

/// The sufficient condition over adjacent pairs. Passing words come with
/// the merged, certified net; failing words are inconclusive.
pub fn theorem5_check(word: &Word) -> Result<CyclicDecision, CyclicError> {
    require_prime(word)?;
    let pairs = diagnose(word);
    if let Some(p) = first_failure(&pairs) {
        let mut d = CyclicDecision::new(Verdict::Inconclusive);
        d.pairs = pairs;
        d.witness_pair = Some(p);
        return Ok(d);
    }
    let mut d = CyclicDecision::new(Verdict::SolvableByTheorem5);
    d.system = Some(merge_circuits(word)?);
    d.pairs = pairs;
    Ok(d)
}

/// Place-disjoint union of the circuits solving the roots of the adjacent
/// pair projections, with transitions merged by name.
pub fn merge_circuits(word: &Word) -> Result<System, CyclicError> {
    require_prime(word)?;
    let mut places: Vec<(String, PlaceDescriptor)> = Vec::new();
    for d in diagnose(word) {
        if let Some(reason) = d.failure {
            return Err(CyclicError::PairConditionFailed {
                pair: d.projection.pair,
                reason,
            });
        }
        // The root starts where the projection of the word starts.
        let circuit = solve_binary_cyclic(&d.projection.root_v).map_err(|e: BinaryError| {
            CyclicError::PairConditionFailed {
                pair: d.projection.pair.clone(),
                reason: e.to_string(),
            }
        })?;
        places.extend(circuit.system.descriptors().expect("circuits are WMGs"));
    }
    let alphabet = word.alphabet();
    let sys = build_system_with(&places, alphabet.iter().map(String::as_str))?;
    certify(&sys, word)?;
    Ok(sys)
}

/// Whether the Parikh vector has shape `(x,x,y)` up to permutation with
/// `gcd(x,y) = 1`.
fn ternary_scope(pv: &ParikhVector) -> Result<(), String> {
    let counts: Vec<u64> = pv.iter().map(|(_, c)| c).collect();
    if counts.len() != 3 {
        return Err(format!("{} labels, expected 3", counts.len()));
    }
    let mut s = counts.clone();
    s.sort_unstable();
    let (x, y) = if s[0] == s[1] {
        (s[0], s[2])
    } else if s[1] == s[2] {
        (s[1], s[0])
    } else {
        return Err(format!("Parikh vector {pv} has three distinct counts"));
    };
    if x.gcd(&y) != 1 {
        return Err(format!("gcd({x},{y}) is not 1"));
    }
    Ok(())
}

/// Exact decision for ternary words with Parikh vector `(x,x,y)`,
/// `gcd(x,y) = 1`: solvable iff every adjacent pair passes.
pub fn ternary_decide(word: &Word) -> Result<CyclicDecision, CyclicError> {
    if word.is_empty() {
        return Err(CyclicError::EmptyWord);
    }
    ternary_scope(&word.parikh()).map_err(CyclicError::OutOfTheoremScope)?;
    let pairs = diagnose(word);
    if let Some(p) = first_failure(&pairs) {
        let mut d = CyclicDecision::new(Verdict::UnsolvableByTheorem6);
        d.pairs = pairs;
        d.witness_pair = Some(p);
        return Ok(d);
    }
    let mut d = CyclicDecision::new(Verdict::SolvableByTheorem6);
    d.system = Some(merge_circuits(word)?);
    d.pairs = pairs;
    Ok(d)
}

/// One skeleton place `p(u,v)`.
struct SkeletonPlace {
    name: String,
    input: usize,
    output: usize,
    w_in: i64,
    w_out: i64,
    lower: i64,
    cap: i64,
    /// Token change after each prefix of the word.
    delta: Vec<i64>,
}

/// Exhaustive search over the pairwise skeleton: one place `p(u,v)` per
/// ordered pair of distinct labels, fed by `u` with weight `P(v)/g` and
/// consumed by `v` with weight `P(u)/g`. Initial markings range from the
/// least value keeping every occurrence of `v` enabled up to
/// `P(u)/g * P(v)`; the search returns the lexicographically least marking
/// that certifies.
pub fn brute_force_cyclic_oracle(
    word: &Word,
    budget: Option<u64>,
) -> Result<CyclicDecision, CyclicError> {
    require_prime(word)?;
    let budget = budget.unwrap_or(DEFAULT_ORACLE_BUDGET);
    let labels: Vec<Label> = word.alphabet().into_iter().collect();
    let pv = word.parikh();
    let pos: Vec<usize> = word
        .letters()
        .iter()
        .map(|l| labels.iter().position(|x| x == l).unwrap())
        .collect();
    let len = pos.len();

    let mut places: Vec<SkeletonPlace> = Vec::new();
    for (u, lu) in labels.iter().enumerate() {
        for (v, lv) in labels.iter().enumerate() {
            if u == v {
                continue;
            }
            let (pu, pvv) = (pv.get(lu), pv.get(lv));
            let g = pu.gcd(&pvv);
            let (w_in, w_out) = ((pvv / g) as i64, (pu / g) as i64);
            let mut delta = Vec::with_capacity(len + 1);
            let mut acc = 0i64;
            let mut lower = 0i64;
            delta.push(0);
            for &x in &pos {
                if x == v {
                    lower = lower.max(w_out - acc);
                    acc -= w_out;
                } else if x == u {
                    acc += w_in;
                }
                delta.push(acc);
            }
            debug_assert_eq!(acc, 0);
            places.push(SkeletonPlace {
                name: circuit_place(lu, lv),
                input: u,
                output: v,
                w_in,
                w_out,
                lower,
                cap: w_out * pvv as i64,
                delta,
            });
        }
    }

    let candidates: u128 = places
        .iter()
        .map(|p| (p.cap - p.lower + 1).max(0) as u128)
        .product();
    if candidates > budget as u128 {
        return Err(CyclicError::SearchSpaceTooLarge { candidates, budget });
    }

    // Constraints "t is disabled before position i" for every i with
    // w_i != t; checked once the last place consuming t is assigned.
    let mut last_consumer = vec![None; labels.len()];
    for (j, p) in places.iter().enumerate() {
        last_consumer[p.output] = Some(j);
    }
    let mut search = OracleSearch {
        places: &places,
        pos: &pos,
        labels: labels.len(),
        checks_at: (0..places.len())
            .map(|j| {
                (0..labels.len())
                    .filter(|&t| last_consumer[t] == Some(j))
                    .collect()
            })
            .collect(),
        marking: vec![0; places.len()],
    };

    let mut found = None;
    search.run(0, &mut |m: &[i64]| {
        let descriptors: Vec<(String, PlaceDescriptor)> = places
            .iter()
            .zip(m)
            .map(|(p, &k)| {
                (
                    p.name.clone(),
                    PlaceDescriptor::between(
                        &labels[p.input],
                        p.w_in as u64,
                        &labels[p.output],
                        p.w_out as u64,
                        k as u64,
                    ),
                )
            })
            .collect();
        let sys = build_system_with(&descriptors, labels.iter().map(String::as_str))
            .expect("skeleton places are well formed");
        if certify(&sys, word).is_ok() {
            found = Some(sys);
            true
        } else {
            false
        }
    });

    let mut d = match found {
        Some(sys) => {
            let mut d = CyclicDecision::new(Verdict::OracleSolvable);
            d.system = Some(sys);
            d
        }
        None => {
            let mut d = CyclicDecision::new(Verdict::OracleUnsolvable);
            d.within_searched_family = labels.len() > 3;
            d
        }
    };
    if labels.len() > 1 {
        d.pairs = diagnose(word);
        d.witness_pair = first_failure(&d.pairs);
    }
    Ok(d)
}

struct OracleSearch<'a> {
    places: &'a [SkeletonPlace],
    pos: &'a [usize],
    labels: usize,
    checks_at: Vec<Vec<usize>>,
    marking: Vec<i64>,
}

impl OracleSearch<'_> {
    /// Some place consuming `t` blocks it at every position not labelled `t`.
    fn disabled_everywhere_else(&self, t: usize, upto: usize) -> bool {
        let consumers: Vec<usize> = (0..=upto).filter(|&j| self.places[j].output == t).collect();
        (0..self.pos.len()).all(|i| {
            self.pos[i] == t
                || consumers.iter().any(|&j| {
                    let p = &self.places[j];
                    self.marking[j] + p.delta[i] < p.w_out
                })
        })
    }

    /// Depth-first over places; returns true once `accept` succeeds.
    fn run(&mut self, j: usize, accept: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        if j == self.places.len() {
            debug_assert!(self.labels > 0);
            return accept(&self.marking);
        }
        let (lo, hi) = (self.places[j].lower, self.places[j].cap);
        for k in lo..=hi {
            self.marking[j] = k;
            // Raising a marking never blocks more, so a failed check also
            // fails for every larger value of this place.
            let ok = self.checks_at[j]
                .iter()
                .all(|&t| self.disabled_everywhere_else(t, j));
            if !ok {
                break;
            }
            if self.run(j + 1, accept) {
                return true;
            }
        }
        false
    }
}

/// The ternary decision when in scope, else the adjacent-pair condition, falling back
/// to the oracle when that is inconclusive. `force_oracle` skips straight
/// to the oracle.
pub fn decide_cyclic(
    word: &Word,
    force_oracle: bool,
    budget: Option<u64>,
) -> Result<CyclicDecision, CyclicError> {
    require_prime(word)?;
    if force_oracle {
        return brute_force_cyclic_oracle(word, budget);
    }
    match ternary_decide(word) {
        Ok(d) => return Ok(d),
        Err(CyclicError::OutOfTheoremScope(_)) => {}
        Err(e) => return Err(e),
    }
    let d = theorem5_check(word)?;
    if d.verdict != Verdict::Inconclusive {
        return Ok(d);
    }
    brute_force_cyclic_oracle(word, budget)
}
