use std::cell::Cell;

use proptest::prelude::*;
use relphase::boolfn::{fk, fk_bottom_up, fourier, FkVariant};
use relphase::BooleanFn;

/// XOR of up to six monomials of degree one to three over `n` variables.
fn anf() -> impl Strategy<Value = BooleanFn> {
    (1usize..=10).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::btree_set(0..n, 1..=3.min(n)), 0..6).prop_map(move |monos| {
            monos.iter().fold(BooleanFn::zero(n), |f, m| f.xor(&BooleanFn::monomial(n, &m.iter().copied().collect::<Vec<_>>())))
        })
    })
}

fn bits(x: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| x >> (n - 1 - i) & 1 == 1).collect()
}

thread_local! {
    static EXPRESSED: Cell<usize> = const { Cell::new(0) };
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn phase_polynomial_reproduces_weighted_function(f in anf(), w in 0u8..8) {
        let Ok(p) = fourier(&f, w) else {
            // Weight four kills every cross term of a sum of cubics, so the
            // even weights below can never be refused.
            prop_assert!(w % 4 != 0);
            return Ok(());
        };
        EXPRESSED.with(|c| c.set(c.get() + 1));
        let n = f.n_vars;
        for x in 0..1usize << n {
            let xs = bits(x, n);
            let expect = (w as u32 * f.eval(&xs).unwrap() as u32 % 8) as u8;
            prop_assert_eq!(p.eval_phase(&xs).unwrap(), expect, "x = {:?}", xs);
        }
    }
}

#[test]
fn random_cases_are_mostly_expressible() {
    phase_polynomial_reproduces_weighted_function();
    assert!(EXPRESSED.with(Cell::get) >= 50);
}

#[test]
fn toffoli_weights() {
    let and = BooleanFn::monomial(3, &[0, 1, 2]);
    let p = fourier(&and, 4).unwrap();
    assert_eq!(p.coeffs.len(), 7);
    assert!(p.coeffs.values().all(|&c| c == 1 || c == 7));
    assert!(fourier(&and, 1).is_err());
    assert!(fourier(&and, 2).is_err());
    let cs = BooleanFn::monomial(2, &[0, 1]);
    assert!(fourier(&cs, 2).is_ok());
    assert!(fourier(&cs, 1).is_err());
    assert!(fourier(&BooleanFn::one(2), 4).is_err());
}

#[test]
fn fk_degree_and_recurrence() {
    for k in 2..=10 {
        let f = fk(k, FkVariant::Plain);
        assert_eq!(f.degree(), k);
        let (a, b) = (fk_bottom_up(k - 1, FkVariant::Plain), fk_bottom_up(k - 2, FkVariant::Plain));
        let xk = BooleanFn::var(k, k - 1);
        let expect = xk.multiply(&a.widen(k)).xor(&b.widen(k));
        assert_eq!(fk_bottom_up(k, FkVariant::Plain), expect);
    }
}
