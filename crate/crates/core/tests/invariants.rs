use std::sync::Arc;

use fockswap_core::circuit::{Circuit, CircuitDocument};
use fockswap_core::oracle::evolve_via_permanents;
use fockswap_core::protocol::{
    build_figure1_circuit, herald_probabilities, prepare_input, run_swapping, HeraldCase, ProtocolParams, Scope,
};
use fockswap_core::sampling::{random_mode_unitary, seeded_rng};
use fockswap_core::{Complex64, FockState, ModeId, ModeRegistry, PostSelectionPattern};
use proptest::prelude::*;

fn modes(n: usize) -> Vec<ModeId> {
    (0..n).map(|i| ModeId::bare(format!("m{i}"))).collect()
}

fn amplitude() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Normalized state of up to three photons on `n` modes.
fn random_state(n: usize, photons: usize, amps: &[Complex64]) -> Option<FockState> {
    let ms = modes(n);
    let reg = Arc::new(ModeRegistry::new(ms.clone()).unwrap());
    let mut s = FockState::vacuum(reg).unwrap();
    for p in 0..photons {
        let map: Vec<(ModeId, Complex64)> = ms
            .iter()
            .cloned()
            .zip(amps[p * n..(p + 1) * n].iter().copied())
            .collect();
        s = s.create_photon_unnormalized(&map).unwrap();
    }
    (s.norm() > 1e-6).then(|| s.normalized())
}

fn params() -> impl Strategy<Value = ProtocolParams> {
    (
        0.0f64..std::f64::consts::FRAC_PI_2,
        0.0f64..std::f64::consts::FRAC_PI_2,
        0.0f64..6.3,
        0.0f64..6.3,
    )
        .prop_map(|(t1, t2, p1, p2)| {
            ProtocolParams::new(
                Complex64::new(t1.cos(), 0.0),
                Complex64::from_polar(t1.sin(), p1),
                Complex64::new(t2.cos(), 0.0),
                Complex64::from_polar(t2.sin(), p2),
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unitary_evolution_preserves_norm(
        n in 2usize..6, photons in 1usize..4, seed in any::<u64>(),
        amps in prop::collection::vec(amplitude(), 18),
    ) {
        if let Some(s) = random_state(n, photons, &amps) {
            let u = random_mode_unitary(modes(n), &mut seeded_rng(seed)).unwrap();
            let out = s.apply_mode_unitary(&u).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
            prop_assert_eq!(out.photon_count(), photons as u32);
        }
    }

    #[test]
    fn sequential_application_equals_composition(
        n in 2usize..5, photons in 1usize..4, seed in any::<u64>(),
        amps in prop::collection::vec(amplitude(), 15),
    ) {
        if let Some(s) = random_state(n, photons, &amps) {
            let mut rng = seeded_rng(seed);
            let u = random_mode_unitary(modes(n), &mut rng).unwrap();
            let v = random_mode_unitary(modes(n), &mut rng).unwrap();
            let stepwise = s.apply_mode_unitary(&u).unwrap().apply_mode_unitary(&v).unwrap();
            let composed = s.apply_mode_unitary(&u.then(&v).unwrap()).unwrap();
            prop_assert!(stepwise.max_amplitude_diff(&composed).unwrap() < 1e-10);
        }
    }

    #[test]
    fn direct_and_oracle_agree(
        n in 2usize..5, photons in 1usize..4, seed in any::<u64>(),
        amps in prop::collection::vec(amplitude(), 15),
    ) {
        if let Some(s) = random_state(n, photons, &amps) {
            let u = random_mode_unitary(modes(n), &mut seeded_rng(seed)).unwrap();
            let direct = s.apply_mode_unitary(&u).unwrap();
            let oracle = evolve_via_permanents(&u, &s).unwrap();
            prop_assert!(direct.max_amplitude_diff(&oracle).unwrap() < 1e-10);
        }
    }

    #[test]
    fn projections_on_one_mode_are_complete(
        n in 2usize..5, photons in 1usize..4, amps in prop::collection::vec(amplitude(), 15),
    ) {
        if let Some(s) = random_state(n, photons, &amps) {
            let total: f64 = (0..=photons as u32)
                .map(|k| s.project(&PostSelectionPattern::new().mode(ModeId::bare("m0"), k)).unwrap().1)
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn herald_classes_partition_unit_probability(p in params()) {
        let h = herald_probabilities(&p).unwrap();
        prop_assert!((h.d3 + h.d4 + h.discarded - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_pattern_probabilities_sum_to_one(p in params()) {
        let run = run_swapping(&p, HeraldCase::D3).unwrap();
        if run.herald_probability > 1e-12 {
            let total: f64 = run.outcomes.iter().map(|o| o.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn figure1_circuit_survives_json_round_trip() {
    let c = build_figure1_circuit(Scope::Transfer);
    let json = serde_json::to_string(&c.to_document()).unwrap();
    let back = Circuit::from_document(&serde_json::from_str::<CircuitDocument>(&json).unwrap()).unwrap();
    let input = prepare_input(&ProtocolParams::real(0.6, 0.8, 0.8, 0.6), c.registry().clone()).unwrap();
    let rebuilt_input = prepare_input(&ProtocolParams::real(0.6, 0.8, 0.8, 0.6), back.registry().clone()).unwrap();
    let d = c
        .evolve(&input, None)
        .unwrap()
        .max_amplitude_diff(&back.evolve(&rebuilt_input, None).unwrap())
        .unwrap();
    assert_eq!(d, 0.0);
}
