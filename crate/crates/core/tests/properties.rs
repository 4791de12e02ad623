use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use sumpaths::circuit::random::{random_circuit, random_external_layer, rng_for};
use sumpaths::density::density_trajectory;
use sumpaths::lambda_three::{distribution_three, lambda_three_table};
use sumpaths::lambda_two::{lambda_table, marginal_terms};
use sumpaths::oracle::{evolve, joint_distribution, marginal_by_sum, reduced_density};
use sumpaths::paths::{condition_on_paths, enumerate_paths, joint_phase, path_amplitude};
use sumpaths::subsystem::{
    enumerate_config_paths, lambda_general_trace, marginal_general_clamped, marginal_general_with,
    Bookkeeping,
};
use sumpaths::{Circuit, Path, PathBudget, PhaseGate};

fn budget() -> PathBudget {
    PathBudget::default()
}

fn circuit(
    particles: std::ops::RangeInclusive<usize>,
    depth: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = Circuit> {
    (any::<u64>(), particles, depth).prop_map(|(seed, np, n)| random_circuit(seed, np, n))
}

fn thetas() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0..TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conditioning_reassembles_the_gate(t in thetas(), first_is_controller in any::<bool>()) {
        let g = PhaseGate::new(0, 1, t).unwrap();
        let diag = g.diagonal();
        for mc in 0..2u8 {
            let (controller, c) = if first_is_controller { (0, g.condition(0, mc).unwrap()) } else { (1, g.condition(1, mc).unwrap()) };
            for mt in 0..2u8 {
                let idx = if controller == 0 { 2 * mc + mt } else { 2 * mt + mc } as usize;
                prop_assert_eq!(c.gate().entry(mt, mt), diag[idx]);
            }
        }
    }

    #[test]
    fn factoring_round_trips(t in thetas()) {
        let g = PhaseGate::new(0, 1, t).unwrap();
        let back = g.factor().reconstruct();
        for (a, b) in back.iter().zip(g.diagonal()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn serialization_is_bit_identical(c in circuit(1..=4, 0..=5)) {
        let text = c.to_json();
        let back = Circuit::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.digest(), c.digest());
    }

    #[test]
    fn oracle_is_normalized(c in circuit(1..=4, 0..=5)) {
        for t in 0..=c.depth() {
            prop_assert!((evolve(&c, t).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!((joint_distribution(&c).unwrap().total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reduced_density_diagonal_is_the_marginal(c in circuit(2..=4, 0..=4), pick in 0usize..4) {
        let a = pick % c.particles();
        let rho = reduced_density(&c, a, c.depth()).unwrap();
        let m = marginal_by_sum(&c, &[a]).unwrap();
        for j in 0..2 {
            prop_assert!((rho.0[(j, j)].re - m.probabilities()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioned_state_is_a_path_sum(c in circuit(2..=2, 1..=5), bits in any::<u64>()) {
        let n = c.depth();
        let modes: Vec<u8> = (0..n).map(|t| ((bits >> t) & 1) as u8).collect();
        let p = Path::from_modes(&modes).unwrap();
        let state = condition_on_paths(&c, &[0], &[p]).unwrap().state_upto(n);
        for k in 0..2u8 {
            let sum: C64 = enumerate_paths(n, k)
                .unwrap()
                .iter()
                .map(|m| path_amplitude(&c, 1, m).unwrap() * joint_phase(&c, &[p, *m]).unwrap())
                .sum();
            prop_assert!((state[k as usize] - sum).norm() < 1e-10);
        }
    }

    #[test]
    fn conditioned_evolution_is_unitary(c in circuit(2..=4, 1..=4), bits in any::<u64>()) {
        let n = c.depth();
        let modes: Vec<u8> = (0..n).map(|t| ((bits >> t) & 1) as u8).collect();
        let u = condition_on_paths(&c, &[0], &[Path::from_modes(&modes).unwrap()]).unwrap().matrix_upto(n);
        let d = u.nrows();
        let err = (u.adjoint() * &u - nalgebra::DMatrix::<C64>::identity(d, d)).norm();
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn path_amplitudes_are_bounded(c in circuit(1..=3, 1..=6), pick in 0usize..3, end in 0u8..2) {
        let particle = pick % c.particles();
        for p in enumerate_paths(c.depth(), end).unwrap() {
            prop_assert!(path_amplitude(&c, particle, &p).unwrap().norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn two_particle_pairing(c in circuit(2..=2, 1..=6), end in 0u8..2) {
        let table = lambda_table(&c, end, budget()).unwrap();
        for e in &table.entries {
            let back = table.get(&e.q, &e.p).unwrap();
            prop_assert!((e.last() - back.last().conj()).norm() < 1e-12);
            for (t, l) in e.trajectory.iter().enumerate() {
                prop_assert!(l.norm() <= 1.0 + 1e-10);
                if t > 0 && c.layer(t).phase_between(0, 1).is_none() {
                    prop_assert_eq!(e.hits[t - 1].value, C64::new(0.0, 0.0));
                }
            }
        }
        let terms = marginal_terms(&c, end, budget()).unwrap();
        prop_assert!(terms.cross.im.abs() < 1e-10);
    }

    #[test]
    fn three_particle_pairing(c in circuit(3..=3, 1..=4), end in 0u8..2) {
        let table = lambda_three_table(&c, end, budget()).unwrap();
        let len = (table.len() as f64).sqrt() as usize;
        for (idx, e) in table.iter().enumerate() {
            let (i, k) = (idx / len, idx % len);
            prop_assert!((e.last() - table[k * len + i].last().conj()).norm() < 1e-12);
            prop_assert!(e.trajectory.iter().all(|l| l.norm() <= 1.0 + 1e-10));
        }
    }

    #[test]
    fn external_layers_do_not_signal(c in circuit(3..=3, 1..=4), seed in any::<u64>()) {
        let mut rng = rng_for(seed);
        let extended = c.with_layer(random_external_layer(&mut rng, 3, 0)).unwrap();
        let before = marginal_by_sum(&c, &[0]).unwrap();
        prop_assert!(before.max_abs_diff(&marginal_by_sum(&extended, &[0]).unwrap()) < 1e-12);
        let before = distribution_three(&c, budget()).unwrap();
        prop_assert!(before.max_abs_diff(&distribution_three(&extended, budget()).unwrap()) < 1e-12);
    }

    #[test]
    fn general_hits_vanish_without_boundary_gates(c in circuit(3..=4, 1..=3), ends in any::<u8>()) {
        let sub = [0usize, 2];
        let endpoints = [ends & 1, (ends >> 1) & 1];
        let configs = enumerate_config_paths(c.depth(), &endpoints).unwrap();
        let boundary = |t: usize| {
            c.layer(t).phases().iter().any(|g| {
                let (a, b) = g.pair();
                sub.contains(&a) != sub.contains(&b)
            })
        };
        for p in configs.iter().take(4) {
            for q in configs.iter().rev().take(4) {
                let g = lambda_general_trace(&c, &sub, p, q).unwrap();
                for (t, inc) in g.increments.iter().enumerate() {
                    if !boundary(t + 1) {
                        prop_assert_eq!(*inc, C64::new(0.0, 0.0));
                        prop_assert_eq!(g.trajectory[t + 1], g.trajectory[t]);
                    }
                }
            }
        }
    }

    #[test]
    fn bookkeeping_does_not_change_marginals(c in circuit(3..=4, 1..=3), o in 0u8..4) {
        let outcome = [o & 1, o >> 1];
        let a = marginal_general_with(&c, &[0, 1], &outcome, budget(), Bookkeeping::Amplitude).unwrap();
        let b = marginal_general_with(&c, &[0, 1], &outcome, budget(), Bookkeeping::Lambda).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn clamp_at_one_is_exact(c in circuit(2..=3, 1..=4), o in 0u8..2, clamp in 1.0f64..10.0) {
        let exact = marginal_by_sum(&c, &[0]).unwrap().probabilities()[o as usize];
        let clamped = marginal_general_clamped(&c, &[0], &[o], budget(), clamp).unwrap();
        prop_assert!((exact - clamped).abs() < 1e-12);
    }

    #[test]
    fn density_split_reconstructs(c in circuit(2..=2, 1..=6)) {
        for rec in density_trajectory(&c).unwrap() {
            prop_assert!(rec.frobenius_error < 1e-10);
            prop_assert!(rec.pair.hit[(0, 0)].norm() < 1e-12 && rec.pair.hit[(1, 1)].norm() < 1e-12);
        }
    }
}
