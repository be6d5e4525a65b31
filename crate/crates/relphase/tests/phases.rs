use std::collections::BTreeSet;

use proptest::prelude::*;
use relphase::constructions::{self as cons, Oracle};
use relphase::boolfn::FkVariant;
use relphase::verify::{extract_genperm, phase_support, unitary};
use relphase::GenPerm;

fn bit(x: usize, q: usize, n: usize) -> u8 {
    (x >> (n - 1 - q) & 1) as u8
}

fn genperm_of(spec: &cons::ConstructionSpec) -> GenPerm {
    extract_genperm(&unitary(&spec.circuit).unwrap()).expect("generalized permutation")
}

/// Support computed straight from the definition: qubits whose flip
/// changes the phase somewhere.
fn support_by_definition(g: &GenPerm) -> BTreeSet<usize> {
    let n = g.n_qubits;
    (0..n).filter(|&q| (0..1usize << n).any(|x| g.phase[x] != g.phase[x ^ 1 << (n - 1 - q)])).collect()
}

fn random_genperm() -> impl Strategy<Value = GenPerm> {
    (1usize..=6).prop_flat_map(|n| {
        let dim = 1usize << n;
        (Just(n), Just((0..dim).collect::<Vec<_>>()).prop_shuffle(), prop::collection::vec(0u8..8, dim))
            .prop_map(|(n_qubits, perm, phase)| GenPerm { n_qubits, perm, phase })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn genperm_round_trips(g in random_genperm()) {
        let back = extract_genperm(&g.to_matrix()).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(phase_support(&back), support_by_definition(&g));
    }
}

#[test]
fn ccix_phase_is_i_to_the_x1_x2() {
    let g = genperm_of(&cons::ccix());
    for x in 0..8 {
        let expect = if x >> 1 == 0b11 { 2 } else { 0 };
        assert_eq!(g.phase[x], expect, "input {:03b}", x);
        let flipped = if x >> 1 == 0b11 { x ^ 1 } else { x };
        assert_eq!(g.perm[x], flipped);
    }
    assert_eq!(phase_support(&g), BTreeSet::from([0, 1]));
}

#[test]
fn maslov_toffoli4_phase_matches_the_quoted_form() {
    let g = genperm_of(&cons::maslov_toffoli4());
    let n = 4;
    for x in 0..16 {
        let (x1, x2, x3, y) = (bit(x, 0, n), bit(x, 1, n), bit(x, 2, n), bit(x, 3, n));
        let expect = (2 * (x1 * x2 + x1 * x2 * x3) + 4 * (x1 * x2 * y)) % 8;
        assert_eq!(g.phase[x], expect, "input {:04b}", x);
    }
    assert!(phase_support(&g).contains(&3));
}

#[test]
fn f4_is_the_quoted_function() {
    let f4 = |x: usize| {
        let v = |q| bit(x, q, 5);
        (v(0) & v(1) & v(2) & v(3)) ^ (v(0) & v(3)) ^ (v(2) & v(3))
    };
    let g = genperm_of(&cons::fk_circuit(4, FkVariant::Plain).unwrap());
    for x in 0..32 {
        assert_eq!(g.perm[x], x ^ f4(x) as usize, "input {:05b}", x);
    }
    let dirty = genperm_of(&cons::fk_dirty(4, FkVariant::Plain).unwrap());
    for x in 0..64 {
        assert_eq!(dirty.phase[x], 0);
        assert_eq!(dirty.perm[x], x ^ f4(x >> 1) as usize, "input {:06b}", x);
    }
}

#[test]
fn maslov_variant_computes_its_own_recurrence() {
    let f = relphase::boolfn::fk(4, FkVariant::Maslov);
    let g = genperm_of(&cons::fk_circuit(4, FkVariant::Maslov).unwrap());
    for x in 0..32usize {
        assert_eq!(g.perm[x], x ^ f.truth_table()[x >> 1] as usize);
    }
    assert_ne!(f, relphase::boolfn::fk(4, FkVariant::Plain));
}

#[test]
fn matched_multiplication_leaves_i_to_the_minus_x1_x2() {
    let spec = cons::oracle_mult_matched(&Oracle::cx(2, 0), &Oracle::cx(2, 1)).unwrap();
    let g = genperm_of(&spec);
    for x in 0..8 {
        let expect = if x >> 1 == 0b11 { 6 } else { 0 };
        assert_eq!(g.phase[x], expect, "input {:03b}", x);
    }
}

#[test]
fn relative_toffoli_with_two_dirty_ancillas() {
    let g = genperm_of(&cons::relative_tof4_dirty());
    let n = 7;
    for x in 0..1usize << n {
        let v = |q| bit(x, q, n);
        let expect = 4 * ((v(4) * v(0) * v(1) + v(5) * v(0) * v(1) * v(2)) % 2);
        assert_eq!(g.phase[x], expect, "input {:07b}", x);
        let all = v(0) & v(1) & v(2) & v(3);
        assert_eq!(g.perm[x], x ^ all as usize);
    }
}

#[test]
fn zero_phase_has_empty_support() {
    let g = GenPerm { n_qubits: 3, perm: (0..8).rev().collect(), phase: vec![0; 8] };
    assert!(phase_support(&g).is_empty());
}
