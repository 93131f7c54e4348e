mod common;

use common::*;
use proptest::prelude::*;
use solvfill_core::presets::load_preset;
use solvfill_core::rational::{q, qr};
use solvfill_core::{GroupElement, SolvableGroup, Q};

fn group(name: &str) -> SolvableGroup {
    SolvableGroup::new(load_preset(name).unwrap()).unwrap()
}

fn rat() -> impl Strategy<Value = Q> {
    (-30i64..=30, 1i64..=8).prop_map(|(n, d)| qr(n, d))
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec(rat(), n)
}

/// Elements with integral A-part so the action stays exact.
fn element(g: &SolvableGroup) -> impl Strategy<Value = GroupElement> {
    (proptest::collection::vec(-3i64..=3, g.rank()), vec_of(g.dim()))
        .prop_map(|(a, u)| GroupElement::new(a.into_iter().map(q).collect(), u))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative((name, x, y, z) in prop::sample::select(vec!["sol", "heisenberg-tame", "heisenberg-mixed", "abelian3-rank2"])
        .prop_flat_map(|n| { let g = group(n); (Just(n), element(&g), element(&g), element(&g)) })) {
        let g = group(name);
        let l = g.mul(&g.mul(&x, &y).unwrap(), &z).unwrap();
        let r = g.mul(&x, &g.mul(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn heisenberg_bch_is_associative(x in vec_of(3), y in vec_of(3), z in vec_of(3)) {
        let g = group("heisenberg-tame");
        prop_assert_eq!(g.bch(&g.bch(&x, &y), &z), g.bch(&x, &g.bch(&y, &z)));
    }

    #[test]
    fn identity_and_inverse(x in element(&group("heisenberg-tame"))) {
        let g = group("heisenberg-tame");
        prop_assert_eq!(g.mul(&x, &g.identity()).unwrap(), x.clone());
        prop_assert_eq!(g.mul(&g.identity(), &x).unwrap(), x.clone());
        prop_assert!(g.mul(&x, &g.inverse(&x).unwrap()).unwrap().is_identity());
        prop_assert!(g.mul(&g.inverse(&x).unwrap(), &x).unwrap().is_identity());
    }

    #[test]
    fn adjoint_is_an_automorphism(a in -4i64..=4, x in vec_of(3), y in vec_of(3)) {
        for name in ["heisenberg-tame", "heisenberg-mixed"] {
            let g = group(name);
            let spec = g.spec();
            let av = vec![q(a)];
            let lhs = g.adjoint(&av, &spec.bracket(&x, &y)).unwrap();
            let rhs = spec.bracket(&g.adjoint(&av, &x).unwrap(), &g.adjoint(&av, &y).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn adjoint_is_a_homomorphism_of_a(a in proptest::collection::vec(-3i64..=3, 2), b in proptest::collection::vec(-3i64..=3, 2), x in vec_of(3)) {
        let g = group("abelian3-rank2");
        let (a, b): (Vec<Q>, Vec<Q>) = (a.into_iter().map(q).collect(), b.into_iter().map(q).collect());
        let ab: Vec<Q> = a.iter().zip(&b).map(|(s, t)| s + t).collect();
        let two_step = g.adjoint(&a, &g.adjoint(&b, &x).unwrap()).unwrap();
        prop_assert_eq!(g.adjoint(&ab, &x).unwrap(), two_step);
    }

    #[test]
    fn sol_matches_affine_matrices(x in element(&group("sol")), y in element(&group("sol"))) {
        let g = group("sol");
        prop_assert_eq!(sol_matrix(&g.mul(&x, &y).unwrap()), m3_mul(&sol_matrix(&x), &sol_matrix(&y)));
    }

    #[test]
    fn float_product_tracks_exact(x in element(&group("heisenberg-tame")), y in element(&group("heisenberg-tame"))) {
        let g = group("heisenberg-tame");
        let exact = g.mul(&x, &y).unwrap().to_f64();
        let float = g.mul_f64(&x.to_f64(), &y.to_f64());
        for (e, f) in exact.u.iter().zip(&float.u) {
            prop_assert!((e - f).abs() <= 1e-9 * (1.0 + e.abs()));
        }
    }
}

#[test]
fn conjugation_scales_weight_spaces() {
    let g = group("heisenberg-tame");
    let a = g.from_a(vec![q(1)]);
    let z = g.from_u(vec![q(0), q(0), q(1)]);
    let c = g.conjugate(&a, &z).unwrap();
    // weight 2 on the centre, log2 units
    assert_eq!(c.u, vec![q(0), q(0), q(4)]);
}

#[test]
fn heisenberg_log_of_matrix_product() {
    let g = group("heisenberg-tame");
    let x = vec![q(1), q(0), q(0)];
    let y = vec![q(0), q(1), q(0)];
    assert_eq!(g.bch(&x, &y), heis_log(&m3_mul(&heis_matrix(&x), &heis_matrix(&y))));
    assert_eq!(g.bch(&x, &y), vec![q(1), q(1), qr(1, 2)]);
}
