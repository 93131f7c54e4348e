mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use solvfill_core::certifier::{certify, certify_with, replay, CertifyOptions, Verdict, Witness};
use solvfill_core::homology::{boundary_d2, boundary_d3, h2, killing_module};
use solvfill_core::presets::{load_preset, PRESET_NAMES};
use solvfill_core::rational::{q, qr};
use solvfill_core::weights::{tame_witness, verify_tame_outcome, TameOutcome};
use solvfill_core::Q;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn boundaries_compose_to_zero(seed in any::<u64>()) {
        let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(spec.validate().is_valid());
        prop_assert!(boundary_d2(&spec).mul(&boundary_d3(&spec).unwrap()).is_zero());
    }

    #[test]
    fn quotient_dims_match_bareiss(seed in any::<u64>()) {
        let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(h2(&spec).unwrap().dim(), h2_dim_oracle(&spec));
        prop_assert_eq!(killing_module(&spec).unwrap().dim(), kill_dim_oracle(&spec));
    }

    #[test]
    fn every_certificate_replays(seed in any::<u64>(), sol_off in any::<bool>()) {
        let spec = random_spec(&mut ChaCha8Rng::seed_from_u64(seed));
        let opts = CertifyOptions { disable_sol_branch: sol_off };
        let c = certify_with(&spec, opts);
        prop_assert!(replay(&spec, &c, opts).is_ok(), "{:?}", c);
    }

    #[test]
    fn tame_outcome_verifies_and_matches_hull(pts in proptest::collection::vec((-4i64..=4, -4i64..=4, 1i64..=3), 1..7)) {
        let w: Vec<Vec<Q>> = pts.iter().map(|&(x, y, d)| vec![qr(x, d), qr(y, d)]).collect();
        let out = tame_witness(&w, 2);
        prop_assert!(verify_tame_outcome(&w, 2, &out));
        prop_assert_eq!(matches!(out, TameOutcome::Farkas(_)), zero_in_hull_2d(&w));
    }
}

#[test]
fn heisenberg_representatives_span_the_cycles() {
    let spec = load_preset("heisenberg-tame").unwrap();
    assert_eq!(h2(&spec).unwrap().labels, ["x∧z", "y∧z"]);
    assert_eq!(killing_module(&spec).unwrap().labels, ["x⊙x", "x⊙y", "y⊙y"]);
    assert_eq!(h2_dim_oracle(&spec), 2);
    assert_eq!(kill_dim_oracle(&spec), 3);
}

#[test]
fn preset_verdicts() {
    let want = [
        ("sol", Verdict::NotL1CSol),
        ("heisenberg-tame", Verdict::L1CTame),
        ("heisenberg-mixed", Verdict::NotL1CSol),
        ("abelian3-rank2", Verdict::L1CTheorem),
    ];
    for (name, v) in want {
        let s = load_preset(name).unwrap();
        let c = certify(&s);
        assert_eq!(c.verdict, v, "{name}");
        replay(&s, &c, CertifyOptions::default()).unwrap();
    }
    assert_eq!(PRESET_NAMES.len(), want.len());
}

#[test]
fn tampered_tame_witness_fails_replay() {
    let s = load_preset("heisenberg-tame").unwrap();
    let mut c = certify(&s);
    c.witness = Witness::Tame { a: vec![q(1)] };
    assert!(replay(&s, &c, CertifyOptions::default()).is_err());
}
