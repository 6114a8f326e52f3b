use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use biphoton::coherence::{chsh, correlation, l1_coherence, marginals, no_signaling_check, ChshSettings};
use biphoton::linalg::{apply, density_of, partial_trace, tensor, Matrix, Operator, Space, StateVector, TOL};
use biphoton::optics::{
    beam_splitter, biphoton_state, path_space, phase_shifter, phased_biphoton, rto_circuit,
    rto_joint_distribution, Arm, ModeLabel, Party, PhaseSettings, Visibility,
};
use biphoton::premeasure::{coupled_space, detector_coupling, premeasure, ready_state};
use biphoton::rng::SplitMix64;
use num_complex::Complex64;
use proptest::prelude::*;

fn random_state(rng: &mut SplitMix64, space: Space) -> StateVector {
    // Box–Muller gives an isotropic complex Gaussian vector
    let mut gauss = || {
        let u1 = 1.0 - rng.next_f64();
        let u2 = rng.next_f64();
        (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
    };
    let raw: Vec<Complex64> = (0..space.dim()).map(|_| Complex64::new(gauss(), gauss())).collect();
    let norm = raw.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    StateVector::new(space, raw.into_iter().map(|z| z / norm).collect()).unwrap()
}

fn random_unitary(rng: &mut SplitMix64, space: Space) -> Operator {
    // Gram–Schmidt on random columns
    let n = space.dim();
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    while cols.len() < n {
        let mut v = random_state(rng, space.clone()).amplitudes().to_vec();
        for q in &cols {
            let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    let m = Matrix::from_fn(n, n, |r, c| cols[c][r]);
    Operator::new(space.clone(), space, m).unwrap()
}

fn vis(v: f64) -> Visibility {
    Visibility::new(v).unwrap()
}

#[test]
fn built_unitaries_are_unitary() {
    let mut ops = vec![
        beam_splitter(Party::A),
        beam_splitter(Party::B),
        detector_coupling(),
        phase_shifter(ModeLabel::Path(Party::A, Arm::Two), 1.3).unwrap(),
        phase_shifter(ModeLabel::Path(Party::B, Arm::One), 4.4).unwrap(),
    ];
    for k in 0..16 {
        let phi = TAU * k as f64 / 16.0;
        ops.push(rto_circuit(PhaseSettings::new(phi, 2.0 * phi)));
    }
    for op in ops {
        assert!(op.unitarity_deviation() < 1e-12);
    }
}

#[test]
fn circuits_preserve_norm() {
    let mut rng = SplitMix64::new(1);
    let source = path_space(Party::A).concat(&path_space(Party::B));
    let circuits: Vec<Operator> = (0..8)
        .map(|k| rto_circuit(PhaseSettings::new(0.7 * k as f64, 1.9 * k as f64)))
        .collect();
    for _ in 0..1000 {
        let psi = random_state(&mut rng, source.clone());
        for u in &circuits {
            let out = apply(u, &psi).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
        let ad = random_state(&mut rng, coupled_space());
        assert!((apply(&detector_coupling(), &ad).unwrap().norm() - 1.0).abs() < 1e-12);
        let a = random_state(&mut rng, path_space(Party::A));
        assert!((apply(&beam_splitter(Party::A), &a).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn random_unitaries_preserve_norm() {
    let mut rng = SplitMix64::new(2);
    for dim_space in [path_space(Party::A), coupled_space()] {
        for _ in 0..50 {
            let u = random_unitary(&mut rng, dim_space.clone());
            let psi = random_state(&mut rng, dim_space.clone());
            assert!((apply(&u, &psi).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn tensor_then_trace_recovers_first_factor(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let u = random_state(&mut rng, path_space(Party::A));
        let v = random_state(&mut rng, Space::single(&["ready", "D1", "D2"]));
        let uv = tensor(&u, &v);
        prop_assert!((uv.norm() - 1.0).abs() < 1e-12);
        let rho = density_of(&uv);
        let kept = partial_trace(&rho, 0).unwrap();
        prop_assert!(kept.entries().max_abs_diff(density_of(&u).entries()) < 1e-12);
        for keep in 0..2 {
            let r = partial_trace(&rho, keep).unwrap();
            prop_assert!((r.trace() - 1.0).abs() < 1e-12);
            prop_assert!(r.hermiticity_deviation() < 1e-12);
        }
    }

    #[test]
    fn pure_states_have_unit_purity(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let psi = random_state(&mut rng, coupled_space());
        prop_assert!((density_of(&psi).purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chsh_bounded_by_visibility(
        a in -PI..PI, a2 in -PI..PI, b in -PI..PI, b2 in -PI..PI, v in 0.0f64..=1.0,
    ) {
        let s = ChshSettings { a, a_prime: a2, b, b_prime: b2 };
        prop_assert!(chsh(&s, vis(v)).abs() <= 2.0 * SQRT_2 * v + 1e-12);
    }

    #[test]
    fn joint_distribution_is_valid(phi_a in -10.0f64..10.0, phi_b in -10.0f64..10.0, v in 0.0f64..=1.0) {
        let j = rto_joint_distribution(PhaseSettings::new(phi_a, phi_b), vis(v));
        let total: f64 = j.outcomes().iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (_, p) in j.outcomes() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
        }
    }
}

#[test]
fn marginals_flat_and_correlation_sinusoidal_on_grid() {
    for v in [0.0, 0.5, FRAC_1_SQRT_2, 1.0] {
        for i in 0..8 {
            for k in 0..8 {
                let s = PhaseSettings::new(TAU * i as f64 / 8.0, TAU * k as f64 / 8.0);
                let j = rto_joint_distribution(s, vis(v));
                let total: f64 = j.outcomes().iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12);
                for p in marginals(&j).as_array() {
                    assert!((p - 0.5).abs() < 1e-12);
                }
                assert!((correlation(&j) - v * s.delta().cos()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn correlation_depends_only_on_phase_difference() {
    let mut rng = SplitMix64::new(3);
    for _ in 0..100 {
        let delta = TAU * rng.next_f64();
        let offset_1 = TAU * rng.next_f64();
        let offset_2 = TAU * rng.next_f64();
        let e1 = correlation(&rto_joint_distribution(
            PhaseSettings::new(offset_1 + delta, offset_1),
            Visibility::PERFECT,
        ));
        let e2 = correlation(&rto_joint_distribution(
            PhaseSettings::new(offset_2 + delta, offset_2),
            Visibility::PERFECT,
        ));
        assert!((e1 - e2).abs() < 1e-12);
    }
}

#[test]
fn correlation_on_fine_grid() {
    for v in [0.0, 0.3, FRAC_1_SQRT_2, 1.0] {
        for k in 0..256 {
            let delta = TAU * k as f64 / 256.0;
            let e = correlation(&rto_joint_distribution(PhaseSettings::new(delta, 0.0), vis(v)));
            assert!((e - v * delta.cos()).abs() < 1e-12);
        }
    }
}

#[test]
fn subsystems_incoherent_composite_coherent() {
    let mut rng = SplitMix64::new(4);
    for _ in 0..64 {
        let s = PhaseSettings::new(TAU * rng.next_f64(), TAU * rng.next_f64());
        let rho = density_of(&phased_biphoton(s));
        assert!((l1_coherence(&rho) - 1.0).abs() < TOL);
        for keep in 0..2 {
            let reduced = partial_trace(&rho, keep).unwrap();
            assert!(l1_coherence(&reduced) < TOL);
            assert!((reduced.purity() - 0.5).abs() < TOL);
        }
    }
    assert_eq!(phased_biphoton(PhaseSettings::default()), biphoton_state());
}

#[test]
fn no_signaling_on_varied_inputs() {
    let grid: Vec<f64> = (0..32).map(|k| TAU * k as f64 / 32.0).collect();
    for v in [0.0, 0.25, 0.5, FRAC_1_SQRT_2, 1.0] {
        for phi_a in [0.0, 0.5, 2.0, 3.9, 6.1] {
            assert!(no_signaling_check(phi_a, &grid, vis(v)).unwrap() < 1e-12);
        }
    }
}

#[test]
fn premeasurement_is_linear_and_non_disturbing() {
    let u = detector_coupling();
    let outputs: Vec<StateVector> = ["A1", "A2"]
        .iter()
        .map(|a| apply(&u, &StateVector::basis(coupled_space(), &[a, "ready"]).unwrap()).unwrap())
        .collect();
    for (i, out) in outputs.iter().enumerate() {
        let rho_a = partial_trace(&density_of(out), 0).unwrap();
        let eigen = StateVector::basis(path_space(Party::A), &[["A1", "A2"][i]]).unwrap();
        assert!(rho_a.entries().max_abs_diff(density_of(&eigen).entries()) < 1e-12);
    }
    for k in 0..16 {
        let theta = TAU * k as f64 / 16.0;
        let w1 = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let w2 = Complex64::from_polar(FRAC_1_SQRT_2, theta);
        let state = premeasure(theta);
        for (idx, z) in state.amplitudes().iter().enumerate() {
            let want = w1 * outputs[0].amplitudes()[idx] + w2 * outputs[1].amplitudes()[idx];
            assert!((z - want).norm() < 1e-12);
        }
        let rho_d = partial_trace(&density_of(&state), 1).unwrap();
        assert!(l1_coherence(&rho_d) < 1e-12);
    }
    assert_eq!(ready_state().amplitudes()[0], Complex64::new(1.0, 0.0));
}
