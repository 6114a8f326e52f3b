//! Object–detector coupling: a two-level system A and the three-level
//! quantum component of a detector D (`ready`, `D1`, `D2`).
//!
//! The coupling is only fixed on `A ⊗ |ready⟩`, where it must send
//! `|Ai⟩|ready⟩` to `|Ai⟩|Di⟩`. It is completed to a unitary on the whole
//! six-dimensional space by controlled swaps: given `|A1⟩`, swap `ready ↔ D1`;
//! given `|A2⟩`, swap `ready ↔ D2`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::coherence::l1_coherence;
use crate::error::{Error, Result};
use crate::linalg::{apply, density_of, partial_trace, tensor, Matrix, Operator, Space, StateVector, TOL};
use crate::optics::superposed_state;

pub const OBJECT_LABELS: [&str; 2] = ["A1", "A2"];
pub const DETECTOR_LABELS: [&str; 3] = ["ready", "D1", "D2"];

pub fn object_space() -> Space {
    Space::single(&OBJECT_LABELS)
}

pub fn detector_space() -> Space {
    Space::single(&DETECTOR_LABELS)
}

/// `[A1,A2]⊗[ready,D1,D2]`.
pub fn coupled_space() -> Space {
    object_space().concat(&detector_space())
}

pub fn ready_state() -> StateVector {
    StateVector::basis(detector_space(), &["ready"]).expect("ready is a detector label")
}

/// Unitary on A⊗D with `U|Ai⟩|ready⟩ = |Ai⟩|Di⟩`.
pub fn detector_coupling() -> Operator {
    // detector index that `ready` swaps with, per object index
    let swap_with = |a: usize| a + 1;
    let image = |index: usize| {
        let (a, d) = (index / 3, index % 3);
        let target = swap_with(a);
        let d_out = match d {
            0 => target,
            x if x == target => 0,
            x => x,
        };
        a * 3 + d_out
    };
    let m = Matrix::from_fn(6, 6, |r, c| {
        if image(c) == r {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Operator::new(coupled_space(), coupled_space(), m).expect("permutation is unitary")
}

/// `U · ((|A1⟩ + e^{iθ}|A2⟩)/√2 ⊗ |ready⟩)`.
pub fn premeasure(theta: f64) -> StateVector {
    let input = tensor(&superposed_state(theta), &ready_state());
    apply(&detector_coupling(), &input).expect("coupling acts on A⊗D")
}

/// The pre-measurement state `(|A1⟩|D1⟩ + |A2⟩|D2⟩)/√2`, written down directly.
pub fn premeasurement_state() -> StateVector {
    let space = coupled_space();
    let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
    for dyad in [["A1", "D1"], ["A2", "D2"]] {
        amps[space.index_of(&dyad).expect("dyad labels exist")] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    }
    StateVector::new(space, amps).expect("normalized")
}

/// Quantitative content of "A is in |Ai⟩ if and only if D is in |Di⟩".
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    /// `P(Aj, d)` indexed `[j][d]` with `d` in `ready, D1, D2` order.
    pub joint_probs: [[f64; 3]; 2],
    /// `P(d | Aj)` indexed like `joint_probs`; `None` when `P(Aj) = 0`.
    pub conditional_probs: [[Option<f64>; 3]; 2],
    /// l1 coherence of `(ρ_A, ρ_D)`.
    pub subsystem_coherence: (f64, f64),
    /// `⟨A1 D1|ρ|A2 D2⟩`.
    pub correlation_coherence: Complex64,
    /// Weight outside the two correlated dyads `|A1 D1⟩`, `|A2 D2⟩`.
    pub both_clicked_prob: f64,
    /// `P(A1, D2) + P(A2, D1)`: the detector registered the wrong eigenstate.
    pub iff_violation_prob: f64,
}

impl CorrelationReport {
    pub fn joint(&self, object: &str, detector: &str) -> Option<f64> {
        let a = OBJECT_LABELS.iter().position(|l| *l == object)?;
        let d = DETECTOR_LABELS.iter().position(|l| *l == detector)?;
        Some(self.joint_probs[a][d])
    }

    pub fn conditional(&self, detector: &str, given: &str) -> Option<f64> {
        let a = OBJECT_LABELS.iter().position(|l| *l == given)?;
        let d = DETECTOR_LABELS.iter().position(|l| *l == detector)?;
        self.conditional_probs[a][d]
    }

    /// `P(·, ready)`: the detector never left its ready state.
    pub fn ready_prob(&self) -> f64 {
        self.joint_probs[0][0] + self.joint_probs[1][0]
    }
}

pub fn correlation_report(psi: &StateVector) -> Result<CorrelationReport> {
    if psi.space() != &coupled_space() {
        return Err(Error::SpaceMismatch {
            expected: coupled_space().to_string(),
            found: psi.space().to_string(),
        });
    }
    let norm_sqr = psi.norm().powi(2);
    if (norm_sqr - 1.0).abs() > TOL {
        return Err(Error::NotNormalized(norm_sqr));
    }

    let probs = psi.probabilities();
    let mut joint_probs = [[0.0; 3]; 2];
    for (i, p) in probs.iter().enumerate() {
        joint_probs[i / 3][i % 3] = *p;
    }
    let mut conditional_probs = [[None; 3]; 2];
    for (row, joint) in conditional_probs.iter_mut().zip(&joint_probs) {
        let p_a: f64 = joint.iter().sum();
        if p_a > 0.0 {
            for (slot, p) in row.iter_mut().zip(joint) {
                *slot = Some(p / p_a);
            }
        }
    }

    let rho = density_of(psi);
    let rho_a = partial_trace(&rho, 0)?;
    let rho_d = partial_trace(&rho, 1)?;
    let space = psi.space();
    let a1d1 = space.index_of(&["A1", "D1"]).expect("label");
    let a2d2 = space.index_of(&["A2", "D2"]).expect("label");

    Ok(CorrelationReport {
        joint_probs,
        conditional_probs,
        subsystem_coherence: (l1_coherence(&rho_a), l1_coherence(&rho_d)),
        correlation_coherence: rho.get(a1d1, a2d2),
        both_clicked_prob: probs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != a1d1 && *i != a2d2)
            .map(|(_, p)| p)
            .sum(),
        iff_violation_prob: joint_probs[0][2] + joint_probs[1][1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn coupling_maps_eigenstates() {
        let u = detector_coupling();
        assert!(u.unitarity_deviation() < TOL);
        for (a, d) in [("A1", "D1"), ("A2", "D2")] {
            let input = StateVector::basis(coupled_space(), &[a, "ready"]).unwrap();
            let out = apply(&u, &input).unwrap();
            let want = StateVector::basis(coupled_space(), &[a, d]).unwrap();
            assert!((out.inner(&want).unwrap().norm() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn premeasure_examples() {
        let s = premeasure(0.0);
        let h = FRAC_1_SQRT_2;
        assert!((s.amplitude(&["A1", "D1"]).unwrap().re - h).abs() < TOL);
        assert!((s.amplitude(&["A2", "D2"]).unwrap().re - h).abs() < TOL);
        let overlap = premeasurement_state().inner(&s).unwrap().norm_sqr();
        assert!((overlap - 1.0).abs() < TOL);

        let s = premeasure(PI);
        assert!((s.amplitude(&["A2", "D2"]).unwrap() - Complex64::new(-h, 0.0)).norm() < TOL);
    }

    #[test]
    fn report_for_premeasured_state() {
        let r = correlation_report(&premeasure(0.0)).unwrap();
        assert_eq!(r.joint("A1", "D2"), Some(0.0));
        assert!((r.conditional("D1", "A1").unwrap() - 1.0).abs() < TOL);
        assert!((r.conditional("D2", "A2").unwrap() - 1.0).abs() < TOL);
        assert!(r.both_clicked_prob.abs() < TOL);
        assert!(r.iff_violation_prob.abs() < TOL);
        assert!(r.subsystem_coherence.0 < TOL && r.subsystem_coherence.1 < TOL);
        assert!((r.correlation_coherence - Complex64::new(0.5, 0.0)).norm() < TOL);
    }

    #[test]
    fn report_phase_lives_in_cross_dyad_element() {
        let base = correlation_report(&premeasure(0.0)).unwrap();
        for k in 0..16 {
            let theta = -PI + 2.0 * PI * (k as f64 + 0.5) / 16.0;
            let r = correlation_report(&premeasure(theta)).unwrap();
            for (row, base_row) in r.joint_probs.iter().zip(&base.joint_probs) {
                for (p, q) in row.iter().zip(base_row) {
                    assert!((p - q).abs() < TOL);
                }
            }
            assert!((r.correlation_coherence.norm() - 0.5).abs() < TOL);
            assert!((r.correlation_coherence.arg() + theta).abs() < 1e-9);
        }
    }

    #[test]
    fn report_for_product_state() {
        let psi = StateVector::basis(coupled_space(), &["A1", "D1"]).unwrap();
        let r = correlation_report(&psi).unwrap();
        assert_eq!(r.joint("A1", "D1"), Some(1.0));
        assert_eq!(r.subsystem_coherence, (0.0, 0.0));
        assert_eq!(r.correlation_coherence, Complex64::new(0.0, 0.0));
        // A2 never occurs, so P(·|A2) is undefined
        assert_eq!(r.conditional("D2", "A2"), None);
    }

    #[test]
    fn report_counts_detector_left_ready() {
        let psi = tensor(&superposed_state(0.0), &ready_state());
        let r = correlation_report(&psi).unwrap();
        assert!((r.ready_prob() - 1.0).abs() < TOL);
        assert!((r.both_clicked_prob - 1.0).abs() < TOL);
        assert!(r.iff_violation_prob.abs() < TOL);
    }

    #[test]
    fn report_rejects_wrong_space() {
        let err = correlation_report(&superposed_state(0.0)).unwrap_err();
        assert!(matches!(err, Error::SpaceMismatch { .. }));
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let amps = vec![Complex64::new(0.5, 0.0); 6];
        assert!(matches!(
            StateVector::new(coupled_space(), amps),
            Err(Error::NotNormalized(_))
        ));
    }
}
