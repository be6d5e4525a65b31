use std::cell::Cell;
use std::collections::BTreeSet;

use proptest::prelude::*;
use relphase::constructions::{self as cons, ConstructionSpec};
use relphase::verify::{lowered, safe_to_substitute, substitute_pair, unitary, VerifyError};
use relphase::{Circuit, GateKind};

const ANY: &[GateKind] = &[
    GateKind::X,
    GateKind::H,
    GateKind::S,
    GateKind::T,
    GateKind::Tdg,
    GateKind::CX,
    GateKind::CZ,
    GateKind::Toffoli,
    GateKind::CCiX,
    GateKind::CS,
];

const DIAGONAL: &[GateKind] = &[
    GateKind::Z,
    GateKind::S,
    GateKind::Sdg,
    GateKind::T,
    GateKind::Tdg,
    GateKind::CZ,
    GateKind::CS,
    GateKind::CSdg,
    GateKind::CCiZ,
    GateKind::CCmiZ,
];

const CONTROLLED: &[GateKind] = &[GateKind::CX, GateKind::Toffoli, GateKind::CCiX, GateKind::CCiXdg];

fn shuffled(items: &[usize], seed: u64) -> Vec<usize> {
    let mut v = items.to_vec();
    let mut s = seed;
    for i in (1..v.len()).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        v.swap(i, (s >> 33) as usize % (i + 1));
    }
    v
}

/// One gate of a middle that only reads the oracle wires `q`: diagonal
/// anywhere, or a controlled gate whose target avoids `q`.
fn safe_gate(c: &mut Circuit, q: &BTreeSet<usize>, choice: usize, seed: u64) {
    let n = c.n_qubits;
    let free: Vec<usize> = (0..n).filter(|w| !q.contains(w)).collect();
    let all: Vec<usize> = (0..n).collect();
    match choice % 3 {
        0 => {
            let kind = DIAGONAL[(seed % DIAGONAL.len() as u64) as usize];
            if kind.arity() <= n {
                c.add(kind, &shuffled(&all, seed)[..kind.arity()]);
            }
        }
        1 if !free.is_empty() => {
            let kind = CONTROLLED[(seed % CONTROLLED.len() as u64) as usize];
            let tgt = free[(seed >> 8) as usize % free.len()];
            let others: Vec<usize> = all.iter().copied().filter(|&w| w != tgt).collect();
            if kind.arity() <= n {
                let mut qs = shuffled(&others, seed)[..kind.arity() - 1].to_vec();
                qs.push(tgt);
                c.add(kind, &qs);
            }
        }
        _ if !free.is_empty() => {
            let kind = ANY[(seed % ANY.len() as u64) as usize];
            if kind.arity() <= free.len() {
                c.add(kind, &shuffled(&free, seed)[..kind.arity()]);
            }
        }
        _ => {}
    }
}

fn any_gates(c: &mut Circuit, gates: &[(usize, u64)]) {
    let all: Vec<usize> = (0..c.n_qubits).collect();
    for &(k, seed) in gates {
        let kind = ANY[k % ANY.len()];
        if kind.arity() <= all.len() {
            c.add(kind, &shuffled(&all, seed)[..kind.arity()]);
        }
    }
}

/// Replacements and the oracle gate whose permutation each one shares.
fn replacements() -> Vec<(GateKind, ConstructionSpec)> {
    vec![
        (GateKind::Toffoli, cons::ccix()),
        (GateKind::Toffoli, cons::ccix_dg()),
        (GateKind::LambdaX(3), cons::maslov_toffoli4()),
        (GateKind::LambdaX(3), cons::cxstar(3).unwrap()),
        (GateKind::LambdaX(4), cons::cxstar(4).unwrap()),
        (GateKind::LambdaX(4), cons::cix(4).unwrap()),
    ]
}

thread_local! {
    static TOUCHING_Q: Cell<usize> = const { Cell::new(0) };
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn safe_substitution_preserves_the_unitary(
        which in 0usize..6,
        extra in 0usize..3,
        placement in any::<u64>(),
        prefix in prop::collection::vec((0usize..16, any::<u64>()), 0..6),
        middle in prop::collection::vec((0usize..3, any::<u64>()), 1..10),
        suffix in prop::collection::vec((0usize..16, any::<u64>()), 0..6),
    ) {
        let (kind, repl) = replacements().swap_remove(which);
        let width = kind.arity();
        let n = (width + extra).min(6);
        let wires = shuffled(&(0..n).collect::<Vec<_>>(), placement)[..width].to_vec();
        let q: BTreeSet<usize> = wires.iter().copied().collect();

        let mut c = Circuit::new(n, 0);
        any_gates(&mut c, &prefix);
        let first = c.events.len();
        c.add(kind, &wires);
        let mut mid = Circuit::new(n, 0);
        for &(choice, seed) in &middle {
            safe_gate(&mut mid, &q, choice, seed);
        }
        prop_assert!(safe_to_substitute(&mid, &q));
        if mid.events.iter().any(|e| matches!(e, relphase::Event::Gate(g) if g.qubits.iter().any(|w| q.contains(w)))) {
            TOUCHING_Q.with(|t| t.set(t.get() + 1));
        }
        c.append(&mid);
        let last = c.events.len();
        c.add(kind.dagger().unwrap(), &wires);
        any_gates(&mut c, &suffix);

        let rewritten = substitute_pair(&c, first, last, &repl).unwrap();
        prop_assert_eq!(unitary(&rewritten).unwrap(), unitary(&c).unwrap());
    }
}

#[test]
fn random_middles_do_read_the_oracle_wires() {
    safe_substitution_preserves_the_unitary();
    assert!(TOUCHING_Q.with(Cell::get) >= 100);
}

/// Toffoli, middle, Toffoli with the middle given as one gate.
fn sandwich(kind: GateKind, wires: &[usize]) -> Circuit {
    let mut c = Circuit::new(3, 0);
    c.toffoli(0, 1, 2);
    c.add(kind, wires);
    c.toffoli(0, 1, 2);
    c
}

#[test]
fn toffoli_pair_becomes_relative_phase_pair() {
    let c = sandwich(GateKind::CZ, &[2, 0]);
    let r = substitute_pair(&c, 0, 2, &cons::ccix()).unwrap();
    assert_eq!(unitary(&r).unwrap(), unitary(&c).unwrap());
    assert_eq!(lowered(&c).t_count().unconditional, 14);
    assert_eq!(lowered(&r).t_count().unconditional, 8);
}

#[test]
fn four_control_pair_becomes_cxstar() {
    let mut c = Circuit::new(5, 0);
    c.h(4);
    c.add(GateKind::LambdaX(4), &[0, 1, 2, 3, 4]);
    c.t(4).cz(0, 4);
    c.add(GateKind::LambdaX(4), &[0, 1, 2, 3, 4]);
    c.h(4);
    let r = substitute_pair(&c, 1, 4, &cons::cxstar(4).unwrap()).unwrap();
    assert_eq!(unitary(&r).unwrap(), unitary(&c).unwrap());

    let mut c = Circuit::new(6, 0);
    c.h(5).cx(4, 5);
    c.add(GateKind::LambdaX(4), &[0, 1, 2, 3, 4]);
    c.t(4).cz(4, 5).cx(0, 5).h(5);
    c.add(GateKind::LambdaX(4), &[0, 1, 2, 3, 4]);
    c.h(5);
    let r = substitute_pair(&c, 2, 7, &cons::cxstar(4).unwrap()).unwrap();
    assert_eq!(unitary(&r).unwrap(), unitary(&c).unwrap());
}

#[test]
fn unsafe_middle_changes_the_unitary() {
    let c = sandwich(GateKind::X, &[0]);
    assert!(matches!(substitute_pair(&c, 0, 2, &cons::ccix()), Err(VerifyError::Unsafe(_))));
    let mut forced = Circuit::new(3, 0);
    forced.ccix(0, 1, 2).x(0).ccixdg(0, 1, 2);
    assert_ne!(unitary(&forced).unwrap(), unitary(&c).unwrap());
}

#[test]
fn syntactic_check_is_stricter_than_needed() {
    // X on the target commutes with a phase that lives on the controls, so
    // the rewrite would be sound, yet the check refuses it.
    let c = sandwich(GateKind::X, &[2]);
    assert!(substitute_pair(&c, 0, 2, &cons::ccix()).is_err());
    let mut forced = Circuit::new(3, 0);
    forced.ccix(0, 1, 2).x(2).ccixdg(0, 1, 2);
    assert_eq!(unitary(&forced).unwrap(), unitary(&c).unwrap());
}

#[test]
fn replacement_must_compute_the_same_function() {
    let c = sandwich(GateKind::CZ, &[0, 1]);
    let wrong = cons::maslov_toffoli4();
    assert!(substitute_pair(&c, 0, 2, &wrong).is_err());
}
