//! Two-label synthesis: circuits for cyclic words, state counts of circuit
//! reachability graphs, reversible binary LTS and infinite candidates.

use std::collections::VecDeque;

use num_integer::Integer;
use thiserror::Error;

use crate::lts::{
    check_basic_properties, circular_lts_from_word, compare_rooted, lts_isomorphic,
    small_cycle_parikh, Divergence, Lts, LtsBuilder, LtsError, PropertyWitness,
};
use crate::net::{
    build_system, build_system_with, fire_sequence, reachability_graph,
    truncated_reachability_graph, NetError, PlaceDescriptor, System,
};
use crate::word::{Label, ParikhVector, Word};
use crate::Checked;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BinaryError {
    #[error("gcd({0}, {1}) is not 1")]
    NotCoprime(u64, u64),
    #[error("n = {0} exceeds m = {1}")]
    OrderViolated(u64, u64),
    #[error("the word is empty")]
    EmptyWord,
    #[error("expected two labels, found {0}")]
    NotBinary(usize),
    #[error("Parikh vector {0} is not prime")]
    NotPrimeParikh(ParikhVector),
    #[error("the word is not a rotation of {canonical}")]
    NotARotation { canonical: Word },
    #[error("certification failed: {0}")]
    CertificationFailed(String),
    #[error("k = {k} is below m + n - 1 = {min}")]
    BelowThreshold { k: u64, min: u64 },
    #[error("property b fails: {0}")]
    PropertyBViolated(PropertyWitness),
    #[error("property c fails: {0}")]
    PropertyCViolated(String),
    #[error("no WMG-solvable LTS with {states} states and small cycle ({n},{m})")]
    NoSolution { states: usize, n: u64, m: u64 },
    #[error("no initial marking of the circuit reproduces the LTS")]
    NoMarkingMatches,
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Quotients and remainders of `r_i + m = m_i * n + r_{i+1}`, `r_0 = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientProfile {
    pub n: u64,
    pub m: u64,
    pub quotients: Vec<u64>,
    /// `r_0 ... r_{n-1}`
    pub remainders: Vec<u64>,
}

impl QuotientProfile {
    /// `a b^{m_0} a b^{m_1} ... a b^{m_{n-1}}`
    pub fn canonical_word(&self, a: &str, b: &str) -> Word {
        let mut letters = Vec::with_capacity((self.n + self.m) as usize);
        for &q in &self.quotients {
            letters.push(a.to_string());
            letters.extend(std::iter::repeat_n(b.to_string(), q as usize));
        }
        Word::new(letters)
    }
}

pub fn quotient_sequence(n: u64, m: u64) -> Result<QuotientProfile, BinaryError> {
    if n == 0 || m == 0 || n.gcd(&m) != 1 {
        return Err(BinaryError::NotCoprime(n, m));
    }
    if n > m {
        return Err(BinaryError::OrderViolated(n, m));
    }
    let mut quotients = Vec::with_capacity(n as usize);
    let mut remainders = Vec::with_capacity(n as usize);
    let mut r = 0;
    for _ in 0..n {
        remainders.push(r);
        let (q, next) = (r + m).div_rem(&n);
        quotients.push(q);
        r = next;
    }
    debug_assert_eq!(r, 0);
    Ok(QuotientProfile {
        n,
        m,
        quotients,
        remainders,
    })
}

/// Name of the place fed by `x` and consumed by `y`.
pub fn circuit_place(x: &str, y: &str) -> String {
    format!("p({x},{y})")
}

/// The two-place circuit: `p(a,b)` fed by `a` with weight `m` and consumed
/// by `b` with weight `n`, `p(b,a)` the other way round. `i` and `j` are the
/// initial tokens of `p(a,b)` and `p(b,a)`.
pub fn binary_circuit(a: &str, b: &str, n: u64, m: u64, i: u64, j: u64) -> System {
    build_system(&[
        (circuit_place(a, b), PlaceDescriptor::between(a, m, b, n, i)),
        (circuit_place(b, a), PlaceDescriptor::between(b, n, a, m, j)),
    ])
    .expect("circuit places are well formed")
}

/// A certified circuit solving a binary word or LTS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCircuit {
    pub system: System,
    /// The label occurring `n` times.
    pub a: Label,
    /// The label occurring `m` times; absent for the one-letter word.
    pub b: Option<Label>,
    pub n: u64,
    pub m: u64,
}

impl BinaryCircuit {
    pub fn total_tokens(&self) -> u64 {
        self.system.initial.total()
    }
}

/// Splits the two labels of `pv` into `(a, n, b, m)` with `n <= m`, ties
/// broken lexicographically.
fn roles(pv: &ParikhVector) -> (Label, u64, Label, u64) {
    let v: Vec<(&str, u64)> = pv.iter().collect();
    let (x, y) = (v[0], v[1]);
    if y.1 < x.1 {
        (y.0.to_string(), y.1, x.0.to_string(), x.1)
    } else {
        (x.0.to_string(), x.1, y.0.to_string(), y.1)
    }
}

fn certify(sys: &System, target: &Lts) -> Result<(), BinaryError> {
    let rg = reachability_graph(sys, target.num_states() + 1)
        .map_err(|e| BinaryError::CertificationFailed(e.to_string()))?;
    match compare_rooted(&rg, target)? {
        Ok(_) => Ok(()),
        Err(d) => Err(BinaryError::CertificationFailed(d.to_string())),
    }
}

/// Decides whether `word` is cyclically solved by a two-place circuit and
/// builds the certified circuit when it is.
pub fn solve_binary_cyclic(word: &Word) -> Result<BinaryCircuit, BinaryError> {
    if word.is_empty() {
        return Err(BinaryError::EmptyWord);
    }
    let pv = word.parikh();
    let target = circular_lts_from_word(word)?;
    match word.alphabet().len() {
        1 => {
            if word.len() != 1 {
                return Err(BinaryError::NotPrimeParikh(pv));
            }
            let a = word.letters()[0].clone();
            let system = build_system_with(&[], [a.as_str()])?;
            certify(&system, &target)?;
            return Ok(BinaryCircuit {
                system,
                a,
                b: None,
                n: 1,
                m: 0,
            });
        }
        2 => {}
        k => return Err(BinaryError::NotBinary(k)),
    }
    if !pv.is_prime() {
        return Err(BinaryError::NotPrimeParikh(pv));
    }
    let (a, n, b, m) = roles(&pv);
    let canonical = quotient_sequence(n, m)?.canonical_word(&a, &b);
    let offset = word
        .rotation_offset_in(&canonical)
        .ok_or_else(|| BinaryError::NotARotation {
            canonical: canonical.clone(),
        })?;
    let mut system = binary_circuit(&a, &b, n, m, 0, m + n - 1);
    system.initial = fire_sequence(
        &system.net,
        &system.initial,
        canonical
            .prefix(offset)
            .letters()
            .iter()
            .map(String::as_str),
    )?;
    certify(&system, &target)?;
    Ok(BinaryCircuit {
        system,
        a,
        b: Some(b),
        n,
        m,
    })
}

/// Number of states of the reachability graph of a circuit with `k` tokens.
pub fn predict_state_count(n: u64, m: u64, k: u64) -> Result<u64, BinaryError> {
    if n == 0 || m == 0 || n.gcd(&m) != 1 {
        return Err(BinaryError::NotCoprime(n, m));
    }
    let min = m + n - 1;
    if k < min {
        return Err(BinaryError::BelowThreshold { k, min });
    }
    Ok(k + 1)
}

/// The circuit whose reachability graph is the reversible LTS with `states`
/// states and small cycle `(a: n, b: m)`, started at `p(a,b) = 0`.
pub fn reversible_binary_solution(
    a: &str,
    b: &str,
    n: u64,
    m: u64,
    states: usize,
) -> Result<BinaryCircuit, BinaryError> {
    if n == 0 || m == 0 || n.gcd(&m) != 1 {
        return Err(BinaryError::NotCoprime(n, m));
    }
    if (states as u64) < n + m {
        return Err(BinaryError::NoSolution { states, n, m });
    }
    Ok(BinaryCircuit {
        system: binary_circuit(a, b, n, m, 0, states as u64 - 1),
        a: a.to_string(),
        b: Some(b.to_string()),
        n,
        m,
    })
}

/// Synthesizes a circuit for a finite binary LTS satisfying properties b
/// and c, searching the initial token distributions in increasing `p(a,b)`.
pub fn synthesize_reversible_binary(lts: &Lts) -> Result<BinaryCircuit, BinaryError> {
    let report = check_basic_properties(lts);
    if let Some(w) = report.witnesses.into_iter().next() {
        return Err(BinaryError::PropertyBViolated(w));
    }
    if lts.labels().len() != 2 {
        return Err(BinaryError::NotBinary(lts.labels().len()));
    }
    let sc = small_cycle_parikh(lts)?;
    if !sc.property_c(lts) {
        return Err(BinaryError::PropertyCViolated(match sc.vector() {
            Some(v) => format!("small cycle {v} is not prime with full support"),
            None => "no unique small cycle".to_string(),
        }));
    }
    let (a, n, b, m) = roles(sc.vector().expect("property c holds"));
    let base = reversible_binary_solution(&a, &b, n, m, lts.num_states())?;
    let k = base.total_tokens();
    for i in 0..=k {
        let system = binary_circuit(&a, &b, n, m, i, k - i);
        let Ok(rg) = reachability_graph(&system, lts.num_states() + 1) else {
            continue;
        };
        if lts_isomorphic(&rg, lts)?.is_some() {
            return Ok(BinaryCircuit { system, ..base });
        }
    }
    Err(BinaryError::NoMarkingMatches)
}

/// The single place `p(a,b)` fed by `a` with weight `m`, consumed by `b`
/// with weight `n`, holding `i0` tokens.
pub fn infinite_binary_candidate(n: u64, m: u64, i0: u64) -> Result<System, BinaryError> {
    if n == 0 || m == 0 || n.gcd(&m) != 1 {
        return Err(BinaryError::NotCoprime(n, m));
    }
    Ok(build_system(&[(
        circuit_place("a", "b"),
        PlaceDescriptor::between("a", m, "b", n, i0),
    )])?)
}

/// `(-k, l)` with `k*m + l*n = 1` and `l >= 0 >= k`, `k` as large as
/// possible: the block `a^{-k} b^l` removes exactly one token from `p(a,b)`.
pub fn bezout_block(n: u64, m: u64) -> Result<(u64, u64), BinaryError> {
    if n == 0 || m == 0 || n.gcd(&m) != 1 {
        return Err(BinaryError::NotCoprime(n, m));
    }
    let (n, m) = (n as i128, m as i128);
    let e = m.extended_gcd(&n);
    let mut k = e.x;
    // Shift along k*m + l*n = 1 by multiples of (n, -m).
    k = k.rem_euclid(n);
    if k > 0 {
        k -= n;
    }
    let l = (1 - k * m) / n;
    debug_assert_eq!(k * m + l * n, 1);
    Ok(((-k) as u64, l as u64))
}

/// Restriction of `lts` to states within `depth` steps of the initial
/// state; states at distance `depth` keep no outgoing arcs.
pub fn truncate_lts(lts: &Lts, depth: usize) -> Lts {
    let mut dist = vec![usize::MAX; lts.num_states()];
    dist[lts.initial()] = 0;
    let mut queue = VecDeque::from([lts.initial()]);
    let mut b = LtsBuilder::new();
    b.state(lts.state_name(lts.initial()));
    for l in lts.labels() {
        b.label(l);
    }
    while let Some(s) = queue.pop_front() {
        if dist[s] >= depth {
            continue;
        }
        for &(l, d) in lts.successors(s) {
            if dist[d] == usize::MAX {
                dist[d] = dist[s] + 1;
                queue.push_back(d);
            }
            b.arc(lts.state_name(s), lts.label(l), lts.state_name(d))
                .expect("arcs of an LTS are distinct");
        }
    }
    b.build(lts.state_name(lts.initial()))
}

/// Compares the first `depth` levels of the reachability graph of `sys`
/// with the same levels of `lts`.
pub fn verify_infinite_binary(sys: &System, lts: &Lts, depth: usize) -> Checked<Divergence> {
    let rg = truncated_reachability_graph(sys, depth);
    let expected = truncate_lts(lts, depth);
    match compare_rooted(&rg, &expected) {
        Ok(Ok(_)) => Checked::yes(),
        Ok(Err(d)) => Checked::no(d),
        Err(e) => Checked::no(Divergence {
            left: rg.state_name(rg.initial()).to_string(),
            right: expected.state_name(expected.initial()).to_string(),
            reason: e.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::DEFAULT_STATE_BOUND;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn fig3_word() -> Word {
        let q = [2, 3, 2, 3, 3, 2, 3, 3];
        let mut s = String::new();
        for k in q {
            s.push('a');
            s.push_str(&"b".repeat(k));
        }
        w(&s)
    }

    #[test]
    fn quotients() {
        assert_eq!(
            quotient_sequence(8, 21).unwrap().quotients,
            [2, 3, 2, 3, 3, 2, 3, 3]
        );
        assert_eq!(quotient_sequence(1, 1).unwrap().quotients, [1]);
        assert_eq!(quotient_sequence(3, 5).unwrap().quotients, [1, 2, 2]);
        assert_eq!(
            quotient_sequence(3, 5).unwrap().canonical_word("a", "b"),
            w("ababbabb")
        );
        assert_eq!(quotient_sequence(2, 4), Err(BinaryError::NotCoprime(2, 4)));
        assert_eq!(
            quotient_sequence(5, 3),
            Err(BinaryError::OrderViolated(5, 3))
        );
    }

    #[test]
    fn quotient_profile_invariants() {
        for m in 1..=15u64 {
            for n in 1..=m {
                let Ok(p) = quotient_sequence(n, m) else {
                    continue;
                };
                let big = p.quotients.iter().filter(|&&q| q == m.div_ceil(n)).count() as u64;
                if m % n != 0 {
                    assert_eq!(big, m % n);
                }
                for i in 0..n as usize {
                    let next = p.remainders.get(i + 1).copied().unwrap_or(0);
                    assert_eq!(p.remainders[i] + m, p.quotients[i] * n + next);
                    assert!(next < n);
                }
                assert_eq!(
                    p.canonical_word("a", "b").parikh(),
                    ParikhVector::from_counts([("a", n), ("b", m)])
                );
            }
        }
    }

    #[test]
    fn fig3_word_solves_with_28_tokens() {
        let c = solve_binary_cyclic(&fig3_word()).unwrap();
        assert_eq!((c.n, c.m), (8, 21));
        assert_eq!(c.total_tokens(), 28);
        let rg = reachability_graph(&c.system, DEFAULT_STATE_BOUND).unwrap();
        assert_eq!(rg.num_states(), 29);
    }

    #[test]
    fn rotations_and_rejections() {
        let c = solve_binary_cyclic(&w("aab")).unwrap();
        assert_eq!(c.a, "b");
        assert_eq!((c.n, c.m), (1, 2));
        assert_eq!(c.total_tokens(), 2);
        assert_eq!(
            solve_binary_cyclic(&w("aabb")),
            Err(BinaryError::NotPrimeParikh(w("aabb").parikh()))
        );
        assert_eq!(
            solve_binary_cyclic(&w("aabbb")),
            Err(BinaryError::NotARotation {
                canonical: w("ababb")
            })
        );
        assert!(solve_binary_cyclic(&w("bbaba")).is_ok());
        assert_eq!(
            solve_binary_cyclic(&w("abc")),
            Err(BinaryError::NotBinary(3))
        );
        assert_eq!(
            solve_binary_cyclic(&Word::default()),
            Err(BinaryError::EmptyWord)
        );
    }

    #[test]
    fn one_letter_word() {
        let c = solve_binary_cyclic(&w("a")).unwrap();
        assert!(c.b.is_none());
        assert!(c.system.net.places().is_empty());
        assert!(matches!(
            solve_binary_cyclic(&w("aa")),
            Err(BinaryError::NotPrimeParikh(_))
        ));
    }

    #[test]
    fn multi_character_labels() {
        let c = solve_binary_cyclic(&w("go,stop,stop")).unwrap();
        assert_eq!(c.a, "go");
        assert_eq!(c.system.net.places(), ["p(go,stop)", "p(stop,go)"]);
    }

    #[test]
    fn state_count_law() {
        assert_eq!(predict_state_count(8, 21, 28), Ok(29));
        assert_eq!(predict_state_count(1, 1, 1), Ok(2));
        assert_eq!(predict_state_count(3, 5, 10), Ok(11));
        assert_eq!(
            predict_state_count(3, 5, 6),
            Err(BinaryError::BelowThreshold { k: 6, min: 7 })
        );
        for (i, j) in [(0, 10), (3, 7), (10, 0)] {
            let rg = reachability_graph(&binary_circuit("a", "b", 3, 5, i, j), 1000).unwrap();
            assert_eq!(rg.num_states(), 11);
        }
    }

    #[test]
    fn reversible_circuits() {
        let lts = circular_lts_from_word(&w("abb")).unwrap();
        let c = synthesize_reversible_binary(&lts).unwrap();
        assert_eq!(c.total_tokens(), 2);
        assert_eq!(c.system.initial.tokens(), &[0, 2]);

        let c = synthesize_reversible_binary(&circular_lts_from_word(&w("ab")).unwrap()).unwrap();
        assert_eq!(c.total_tokens(), 1);

        assert_eq!(
            reversible_binary_solution("a", "b", 1, 2, 2),
            Err(BinaryError::NoSolution {
                states: 2,
                n: 1,
                m: 2
            })
        );

        // A larger reversible LTS: the circuit with 5 tokens started mid-way.
        let sys = binary_circuit("a", "b", 1, 2, 2, 3);
        let rg = reachability_graph(&sys, 100).unwrap();
        let c = synthesize_reversible_binary(&rg).unwrap();
        assert!(
            lts_isomorphic(&reachability_graph(&c.system, 100).unwrap(), &rg)
                .unwrap()
                .is_some()
        );
    }

    #[test]
    fn reversible_rejects_non_circuit_shapes() {
        let cyc = circular_lts_from_word(&w("aabb")).unwrap();
        assert!(matches!(
            synthesize_reversible_binary(&cyc),
            Err(BinaryError::PropertyCViolated(_))
        ));
        let mut b = LtsBuilder::new();
        b.arc("i", "a", "x").unwrap();
        b.arc("i", "b", "y").unwrap();
        assert!(matches!(
            synthesize_reversible_binary(&b.build("i")),
            Err(BinaryError::PropertyBViolated(_))
        ));
    }

    #[test]
    fn bezout() {
        assert_eq!(bezout_block(1, 7), Ok((0, 1)));
        assert_eq!(bezout_block(2, 3), Ok((1, 2)));
        assert_eq!(bezout_block(8, 21), Ok((3, 8)));
        assert_eq!(bezout_block(2, 4), Err(BinaryError::NotCoprime(2, 4)));
        for n in 1..=20u64 {
            for m in 1..=20u64 {
                if let Ok((k, l)) = bezout_block(n, m) {
                    assert_eq!(l as i64 * n as i64 - k as i64 * m as i64, 1);
                }
            }
        }
    }

    #[test]
    fn infinite_candidates() {
        let sys = infinite_binary_candidate(1, 2, 3).unwrap();
        let after = fire_sequence(&sys.net, &sys.initial, ["b", "b", "b"]).unwrap();
        assert!(fire_sequence(&sys.net, &after, ["b"]).is_err());

        let sys = infinite_binary_candidate(1, 1, 0).unwrap();
        assert!(fire_sequence(&sys.net, &sys.initial, ["b"]).is_err());
        assert!(fire_sequence(&sys.net, &sys.initial, ["a", "a"]).is_ok());

        // The block a b b removes one token, so it repeats exactly 4 times.
        let sys = infinite_binary_candidate(2, 3, 4).unwrap();
        let mut m = sys.initial.clone();
        let mut reps = 0;
        while let Ok(next) = fire_sequence(&sys.net, &m, ["a", "b", "b"]) {
            m = next;
            reps += 1;
        }
        assert_eq!(reps, 4);
    }

    #[test]
    fn bounded_verification() {
        let sys = infinite_binary_candidate(1, 2, 3).unwrap();
        let own = truncated_reachability_graph(&sys, 10);
        assert!(verify_infinite_binary(&sys, &own, 10).holds);

        let mut b = LtsBuilder::new();
        for i in 0..4 {
            b.arc(&format!("b{i}"), "b", &format!("b{}", i + 1))
                .unwrap();
        }
        let four_bs = b.build("b0");
        let r = verify_infinite_binary(&sys, &four_bs, 10);
        assert!(!r.holds);

        let other = truncated_reachability_graph(&infinite_binary_candidate(2, 3, 5).unwrap(), 30);
        let r = verify_infinite_binary(&infinite_binary_candidate(2, 3, 4).unwrap(), &other, 30);
        assert!(!r.holds);
        assert!(r.witness.is_some());
    }
}
