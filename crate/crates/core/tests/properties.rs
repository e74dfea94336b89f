use proptest::prelude::*;

use wmg_core::format::{emit_lts, emit_net, parse_lts, parse_net};
use wmg_core::lts::{
    check_basic_properties, circular_lts_from_word, lts_isomorphic, parikh_distances,
    small_cycle_parikh, SmallCycle,
};
use wmg_core::net::{build_system, fire_sequence, is_enabled, reachability_graph};
use wmg_core::{Lts, LtsBuilder, PlaceDescriptor, System, Word};

const LETTERS: [&str; 4] = ["a", "b", "c", "d"];

fn word_strategy(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..4usize, 1..=max_len)
        .prop_map(|ix| Word::new(ix.into_iter().map(|i| LETTERS[i])))
}

fn prime_word() -> impl Strategy<Value = Word> {
    word_strategy(10).prop_filter("prime Parikh vector", |w| w.parikh().is_prime())
}

/// Connected WMG-like systems on up to four labels.
fn system_strategy() -> impl Strategy<Value = System> {
    let place = (0..4usize, 1..4u64, 0..4usize, 1..4u64, 0..6u64);
    prop::collection::vec(place, 1..6).prop_filter_map("well formed", |raw| {
        let places: Vec<(String, PlaceDescriptor)> = raw
            .into_iter()
            .enumerate()
            .filter(|(_, (u, _, v, _, _))| u != v)
            .map(|(i, (u, wi, v, wo, k))| {
                (
                    format!("p{i}"),
                    PlaceDescriptor::between(LETTERS[u], wi, LETTERS[v], wo, k),
                )
            })
            .collect();
        if places.is_empty() {
            return None;
        }
        build_system(&places).ok()
    })
}

/// Random acyclic LTS: arcs only go from lower to higher state numbers.
fn acyclic_lts() -> impl Strategy<Value = Lts> {
    (2..7usize)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n, 0..3usize, 1..n), 0..12),
            )
        })
        .prop_map(|(n, arcs)| {
            let mut b = LtsBuilder::new();
            for s in 0..n {
                b.state(&format!("s{s}"));
            }
            for (src, l, step) in arcs {
                let dst = src + step;
                if dst < n {
                    let _ = b.arc(&format!("s{src}"), LETTERS[l], &format!("s{dst}"));
                }
            }
            b.build("s0")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn circular_lts_satisfies_b(w in word_strategy(12)) {
        let lts = circular_lts_from_word(&w).unwrap();
        prop_assert!(check_basic_properties(&lts).property_b());
    }

    #[test]
    fn small_cycle_of_prime_word_is_its_parikh_vector(w in prime_word()) {
        let lts = circular_lts_from_word(&w).unwrap();
        let sc = small_cycle_parikh(&lts).unwrap();
        prop_assert_eq!(&sc, &SmallCycle::Unique(w.parikh()));
        prop_assert!(sc.property_c(&lts));
    }

    #[test]
    fn isomorphism_is_reflexive_and_symmetric(w in word_strategy(8), r in 0..8usize) {
        let g1 = circular_lts_from_word(&w).unwrap();
        let g2 = circular_lts_from_word(&w.rotated(r % w.len())).unwrap();
        prop_assert!(lts_isomorphic(&g1, &g1).unwrap().is_some());
        let forward = lts_isomorphic(&g1, &g2).unwrap().is_some();
        let backward = lts_isomorphic(&g2, &g1).unwrap().is_some();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn lts_text_round_trips(lts in acyclic_lts()) {
        let text = emit_lts(&lts);
        let back = parse_lts(&text).unwrap();
        prop_assert_eq!(emit_lts(&back), text);
        prop_assert_eq!(back.num_states(), lts.num_states());
        prop_assert_eq!(back.num_arcs(), lts.num_arcs());
    }

    #[test]
    fn net_text_round_trips(sys in system_strategy()) {
        let text = emit_net(&sys);
        let back = parse_net(&text).unwrap();
        prop_assert_eq!(&back, &sys);
        prop_assert_eq!(emit_net(&back), text);
    }

    #[test]
    fn state_equation_after_firing(sys in system_strategy(), seq in prop::collection::vec(0..4usize, 0..12)) {
        let net = &sys.net;
        let mut fired = Vec::new();
        let mut m = sys.initial.clone();
        for i in seq {
            let Some(t) = net.transitions().get(i % net.transitions().len()) else { continue };
            let ti = net.transition_index(t).unwrap();
            if is_enabled(net, &m, ti) {
                m = fire_sequence(net, &m, [t.as_str()]).unwrap();
                fired.push(ti);
            }
        }
        for p in 0..net.places().len() {
            let change: i64 = fired.iter().map(|&t| net.incidence(p, t)).sum();
            prop_assert_eq!(m.get(p) as i64, sys.initial.get(p) as i64 + change);
        }
    }

    #[test]
    fn parikh_distances_follow_arcs(lts in acyclic_lts()) {
        if let Ok(dist) = parikh_distances(&lts) {
            prop_assert!(dist[lts.initial()].is_zero());
            for &(s, l, d) in lts.arcs() {
                let mut expected = dist[s].clone();
                expected.increment(lts.label(l));
                prop_assert_eq!(&dist[d], &expected);
            }
        }
    }

    #[test]
    fn finite_reachability_graphs_of_wmgs_satisfy_b(sys in system_strategy()) {
        prop_assert!(sys.net.is_wmg().holds);
        if let Ok(rg) = reachability_graph(&sys, 500) {
            let report = check_basic_properties(&rg);
            prop_assert!(report.property_b(), "{:?}", report.witnesses);
        }
    }
}
