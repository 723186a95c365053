use std::collections::BTreeMap;

use braidwork_core::curtis::{
    below_connectivity_line, d1_crosscheck, differential, e1_entry, e1_group, e1_group_in, e1_table,
    lift_to_moore_representative, reference_orders, vanishing_report, Bidegree, DifferentialOutcome,
    DifferentialStatus, MatchStatus, Order, SpectralConfig, SpectralSequence, TotalOrder,
};
use braidwork_core::exactla::AbelianGroup;
use braidwork_core::lie::BasisOrder;
use braidwork_core::magnus::{magnus_embed, q_component, Series};
use braidwork_core::milnor::{is_moore, SimplicialElement};
use braidwork_core::{Integer, RingKind, F2};

fn z(v: i64) -> Integer {
    Integer::from(v)
}

#[test]
fn e1_low_weights() {
    assert_eq!(e1_group::<Integer>(1, 1).unwrap(), AbelianGroup::free(1));
    assert_eq!(e1_group::<Integer>(2, 2).unwrap(), AbelianGroup::free(1));
    assert_eq!(e1_group::<Integer>(2, 1).unwrap(), AbelianGroup::trivial());
    assert_eq!(e1_group::<Integer>(4, 3).unwrap(), AbelianGroup::from_orders(0, &[z(2)]));
    for n in 1..=5 {
        assert!(e1_group::<Integer>(3, n).unwrap().is_trivial(), "(3,{n})");
        assert!(e1_group::<Integer>(5, n).unwrap().is_trivial(), "(5,{n})");
    }
}

#[test]
fn e1_does_not_depend_on_the_hall_basis() {
    for t in 1..=5 {
        for n in 1..=t {
            assert_eq!(
                e1_group::<Integer>(t, n).unwrap(),
                e1_group_in::<Integer>(t, n, BasisOrder::ReversedAlphabet).unwrap(),
                "({t},{n})"
            );
        }
    }
}

#[test]
fn mod_two_entries_see_the_two_torsion() {
    // universal coefficients: E¹(4,3;F2) picks up Z/2 in degrees 3 and 4
    let three = e1_group::<F2>(4, 3).unwrap();
    assert!(!three.is_trivial());
}

#[test]
fn generators_lift_to_moore_words() {
    for (t, n) in [(1, 1), (2, 2), (4, 3)] {
        let entry = e1_entry::<Integer>(t, n).unwrap();
        for g in &entry.generators {
            let rep = lift_to_moore_representative(g, t).unwrap();
            assert!(is_moore(&SimplicialElement::new(n, rep.word.clone()).unwrap()));
            let e: Series<Integer> = magnus_embed(&rep.word, t);
            for k in 1..t {
                assert!(q_component(k, &e).is_zero(), "({t},{n}) degree {k}");
            }
            assert!(!q_component(t, &e).is_zero());
        }
    }
}

#[test]
fn engine_on_known_survivors() {
    let e = e1_entry::<Integer>(2, 2).unwrap();
    let rep = lift_to_moore_representative(&e.generators[0], 2).unwrap();
    assert!(matches!(differential(&rep, 2).unwrap(), DifferentialOutcome::Survives { r_max: 2, .. }));
    let e = e1_entry::<Integer>(4, 3).unwrap();
    let rep = lift_to_moore_representative(&e.generators[0], 4).unwrap();
    assert!(matches!(differential(&rep, 2).unwrap(), DifferentialOutcome::Survives { .. }));
}

#[test]
fn two_path_first_differential_through_weight_four() {
    for t in 1..=4 {
        for n in 1..=t {
            for c in d1_crosscheck(t, n).unwrap() {
                assert!(c.passed(), "{c:?}");
            }
        }
    }
}

fn small_sequence(assume_zero: bool, table: BTreeMap<Bidegree, AbelianGroup>) -> SpectralSequence {
    let cfg = SpectralConfig { t_max: 6, stem_max: 4, assume_zero, use_engine: true };
    SpectralSequence::compute(cfg, table).unwrap()
}

#[test]
fn pages_through_weight_six() {
    let cfg = SpectralConfig { t_max: 6, stem_max: 4, assume_zero: false, use_engine: true };
    let table = e1_table(&cfg.required_bidegrees()).unwrap();
    let ss = small_sequence(false, table);
    for c in ss.page_checks() {
        assert!(c.passed(), "{c:?}");
    }
    for d in &ss.differentials {
        assert_eq!(d.target_t, d.t + d.r);
    }
    let stems = ss.assemble_stems(&reference_orders());
    let totals: Vec<String> = stems.iter().map(|s| s.total.to_string()).collect();
    assert_eq!(totals[..4], ["1", "inf", "inf", "2"]);
    assert!(stems[..4].iter().all(|s| s.matches == MatchStatus::Match));
    // t=8 is out of range, so stem 4 is only bounded below
    assert!(matches!(stems[4].total, TotalOrder::Interval { .. }));
    assert!(stems[4].total.contains(&Order::Finite(z(2))));
}

#[test]
fn undetermined_differentials_block_assembly() {
    // a fabricated table with Z in both ends of a d¹ the structure cannot decide
    let cfg = SpectralConfig { t_max: 6, stem_max: 4, assume_zero: false, use_engine: false };
    let mut table: BTreeMap<Bidegree, AbelianGroup> =
        cfg.required_bidegrees().into_iter().map(|b| (b, AbelianGroup::trivial())).collect();
    table.insert(Bidegree::new(3, 3), AbelianGroup::free(1));
    table.insert(Bidegree::new(4, 2), AbelianGroup::free(1));
    let ss = SpectralSequence::compute(cfg, table.clone()).unwrap();
    let d = ss.differentials.iter().find(|d| d.t == 3 && d.n == 3 && d.r == 1).unwrap();
    assert_eq!(d.status, DifferentialStatus::Undetermined);
    assert!(ss.require_determined().is_err());
    let stems = ss.assemble_stems(&reference_orders());
    assert!(matches!(stems[2].total, TotalOrder::Interval { .. } | TotalOrder::Exact(Order::Infinite)));
    let relaxed = SpectralSequence::compute(SpectralConfig { assume_zero: true, ..cfg }, table).unwrap();
    assert!(relaxed.require_determined().is_ok());
}

#[test]
fn vanishing_pattern_through_weight_seven() {
    let bidegrees: Vec<Bidegree> = (1..=7).flat_map(|t| (1..=5).map(move |n| Bidegree::new(t, n))).collect();
    let table = e1_table(&bidegrees).unwrap();
    for (b, g) in &table {
        if below_connectivity_line(b.t, b.n) {
            assert!(g.is_trivial(), "{b}");
        }
    }
    let report = vanishing_report(&table, RingKind::Integers, &[]);
    for c in &report.checks {
        assert!(c.passed(), "{c:?}");
    }
}
