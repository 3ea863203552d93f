mod common;

use num_bigint::BigInt;
use proptest::prelude::*;

use quatgroups::presentation::Letter;
use quatgroups::quaternion::t_invariant;
use quatgroups::zmodule::{abelian_invariants, abelian_invariants_sparse, canonicalize, smith_normal_form};
use quatgroups::{AbelianGroup, GroupPresentation, IntMatrix, Quaternion, Word};

fn quaternion() -> impl Strategy<Value = Quaternion> {
    (-50i64..50, -50i64..50, -50i64..50, -50i64..50).prop_map(|(a, b, c, d)| Quaternion::new(a, b, c, d))
}

fn matrix() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        (Just(c), proptest::collection::vec(proptest::collection::vec(-6i64..=6, c), r))
    })
}

fn word(n: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec((0..n, any::<bool>()), 0..12)
        .prop_map(|ls| Word::new(ls.into_iter().map(|(g, inv)| Letter::new(g, inv))))
}

proptest! {
    #[test]
    fn norm_is_multiplicative(x in quaternion(), y in quaternion()) {
        prop_assert_eq!((x * y).norm(), x.norm() * y.norm());
        prop_assert_eq!((x * y).conj(), y.conj() * x.conj());
        prop_assert_eq!(x * x.conj(), Quaternion::scalar(x.norm()));
    }

    #[test]
    fn commuting_matches_products(x in quaternion(), y in quaternion()) {
        prop_assert_eq!(x.commutes(&y), x * y == y * x);
    }

    #[test]
    fn smith_form_is_sound((cols, m) in matrix()) {
        let im = IntMatrix::from_rows(&m, cols);
        let s = smith_normal_form(&im);
        prop_assert_eq!(s.u.mul(&im).mul(&s.v), s.d.clone());
        let diag: Vec<BigInt> = s.diagonal();
        prop_assert_eq!(diag, common::minor_gcd_diagonal(&m, cols));
    }

    #[test]
    fn sparse_and_dense_invariants_agree((cols, m) in matrix()) {
        let dense = abelian_invariants(&IntMatrix::from_rows(&m, cols), cols);
        let rows: Vec<Vec<(usize, i64)>> = m
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(_, &v)| v != 0).map(|(c, &v)| (c, v)).collect())
            .collect();
        prop_assert_eq!(abelian_invariants_sparse(&rows, cols), dense);
    }

    #[test]
    fn abelian_group_text_roundtrip(powers in proptest::collection::vec(prop::sample::select(vec![2u64, 3, 4, 5, 8, 9, 16, 27]), 0..6), free in 0usize..3) {
        let g = canonicalize(&powers, free).unwrap();
        prop_assert_eq!(g.to_string().parse::<AbelianGroup>().unwrap(), g.clone());
        let json = serde_json::to_string(&g).unwrap();
        prop_assert_eq!(serde_json::from_str::<AbelianGroup>(&json).unwrap(), g.clone());
        let mut rev = powers.clone();
        rev.reverse();
        prop_assert_eq!(canonicalize(&rev, free).unwrap(), g);
    }

    #[test]
    fn word_inverse_cancels(w in word(4), v in word(4)) {
        prop_assert!(w.concat(&w.inverse()).is_empty());
        prop_assert_eq!(w.concat(&v).inverse(), v.inverse().concat(&w.inverse()));
        let sums = w.exponent_sums(4);
        let inv = w.inverse().exponent_sums(4);
        prop_assert!(sums.iter().zip(&inv).all(|(a, b)| a + b == 0));
    }

    #[test]
    fn canonical_cyclic_is_rotation_invariant(w in word(3), k in 0usize..12) {
        let w = w.cyclically_reduced();
        prop_assume!(!w.is_empty());
        let k = k % w.len();
        let rotated = Word::new(w.letters()[k..].iter().chain(&w.letters()[..k]).copied());
        prop_assert_eq!(rotated.canonical_cyclic(), w.canonical_cyclic());
        prop_assert_eq!(w.inverse().canonical_cyclic(), w.canonical_cyclic());
    }
}

#[test]
fn t_is_symmetric() {
    for (p, l) in [(3, 5), (5, 13), (7, 19), (11, 23), (13, 37), (17, 29)] {
        assert_eq!(t_invariant(p, l).unwrap(), t_invariant(l, p).unwrap(), "({p}, {l})");
    }
}

#[test]
fn presentation_text_roundtrip() {
    for (p, l) in [(3, 5), (5, 13), (7, 11)] {
        let pres = GroupPresentation::build(p, l).unwrap();
        let back = GroupPresentation::from_text(&pres.to_text()).unwrap();
        assert_eq!(back.relators(), pres.relators());
        assert_eq!(back.generators(), pres.generators());
        assert_eq!(back.primes(), Some((p, l)));
    }
}
