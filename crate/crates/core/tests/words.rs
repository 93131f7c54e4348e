mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use solvfill_core::io::word_spec::parse_loop;
use solvfill_core::filling::probe::Loop;
use solvfill_core::presets::load_preset;
use solvfill_core::rational::{q, qr};
use solvfill_core::words::{eval_unchecked, eval_word, free_reduce, verify_reduction, NormalForms};
use solvfill_core::{Error, GroupElement, SolvableGroup};

fn group(name: &str) -> SolvableGroup {
    SolvableGroup::new(load_preset(name).unwrap()).unwrap()
}

#[test]
fn contraction_data_replays() {
    for name in ["heisenberg-tame", "abelian3-rank2", "sol", "heisenberg-mixed"] {
        let g = group(name);
        let nf = NormalForms::new(&g).unwrap();
        for cd in &nf.contraction {
            cd.verify(&g).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn omega_evaluates_back(name in prop::sample::select(vec!["heisenberg-tame", "abelian3-rank2", "sol"]),
                            a in proptest::collection::vec(-6i64..=6, 2), u in proptest::collection::vec((-200i64..=200, 1i64..=4), 3)) {
        let g = group(name);
        let x = GroupElement::new(
            a[..g.rank()].iter().map(|&v| q(v)).collect(),
            u[..g.dim()].iter().map(|&(n, d)| qr(n, d)).collect(),
        );
        let nf = NormalForms::new(&g).unwrap();
        let w = nf.omega(&g, &x).unwrap();
        prop_assert_eq!(eval_word(&g, &nf.descriptor, &w).unwrap(), x);
    }

    #[test]
    fn free_reduce_matches_stack_oracle(seed in any::<u64>(), trivial in any::<bool>()) {
        let g = group("heisenberg-tame");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = if trivial { trivial_word(&g, 3, 2, &mut rng) } else { nontrivial_word(&g, 3, 2, &mut rng) };
        let r = free_reduce(&g, &w).unwrap();
        prop_assert!(verify_reduction(&g, &w, &r).is_ok());
        prop_assert_eq!(r.freely_trivial(), trivial);
        prop_assert_eq!(block_products(&g, &r.residue), stack_reduce(&g, &w));
    }
}

#[test]
fn normal_form_length_is_logarithmic() {
    let g = group("heisenberg-tame");
    let nf = NormalForms::new(&g).unwrap();
    let len = |m: u32| nf.omega(&g, &g.from_u(vec![q(1i64 << m), q(0), q(0)])).unwrap().len();
    assert_eq!(len(12) - len(8), len(8) - len(4));
}

#[test]
fn omega_rejects_zero_weights() {
    let g = group("heisenberg-mixed");
    let nf = NormalForms::new(&g).unwrap();
    let err = nf.omega(&g, &g.from_u(vec![q(0), q(0), q(1)])).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
}

#[test]
fn free_reduce_needs_conic_tags() {
    let g = group("heisenberg-tame");
    let Loop::Word(w) = parse_loop(&g, "u:1,0,0 u:-1,0,0").unwrap() else { panic!() };
    assert!(matches!(free_reduce(&g, &w), Err(Error::Membership { index: 0, .. })));
}

#[test]
fn tagged_word_from_the_command_line_reduces() {
    let g = group("heisenberg-tame");
    let Loop::Word(w) = parse_loop(&g, "u:1,0,0@1 u:0,1,0@2 u:0,-1,0@2 u:-1,0,0@1").unwrap() else { panic!() };
    assert!(eval_unchecked(&g, &w).unwrap().is_identity());
    let r = free_reduce(&g, &w).unwrap();
    assert!(r.freely_trivial());
    assert_eq!(r.steps.len(), 2);
}
