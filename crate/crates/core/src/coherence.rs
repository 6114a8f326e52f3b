//! Marginals, correlations, fringe visibility, CHSH and coherence measures.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DensityMatrix;
use crate::optics::{rto_joint_distribution, JointDistribution, PhaseSettings, Port, Visibility};

/// Single-detector probabilities `P(A+), P(A−), P(B+), P(B−)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Marginals {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
}

impl Marginals {
    pub fn as_array(&self) -> [f64; 4] {
        [self.a_plus, self.a_minus, self.b_plus, self.b_minus]
    }
}

pub fn marginals(j: &JointDistribution) -> Marginals {
    let t = j.table();
    Marginals {
        a_plus: t[0][0] + t[0][1],
        a_minus: t[1][0] + t[1][1],
        b_plus: t[0][0] + t[1][0],
        b_minus: t[0][1] + t[1][1],
    }
}

/// `E = p(++) + p(−−) − p(+−) − p(−+)`.
pub fn correlation(j: &JointDistribution) -> f64 {
    j.outcomes()
        .iter()
        .map(|((a, b), p)| a.sign() * b.sign() * p)
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub delta_grid: Vec<f64>,
    pub correlations: Vec<f64>,
    pub singles: Vec<Marginals>,
    pub joints: Vec<JointDistribution>,
    pub visibility_used: Visibility,
}

impl SweepResult {
    /// `p(++)` at every grid point.
    pub fn coincidences(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.get(Port::Plus, Port::Plus)).collect()
    }
}

/// Exact correlation and singles over a grid of phase differences, with
/// `φ_A = Δ` and `φ_B = 0`.
pub fn sweep_correlation(grid: &[f64], vis: Visibility) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let joints: Vec<JointDistribution> = grid
        .par_iter()
        .map(|&delta| rto_joint_distribution(PhaseSettings::new(delta, 0.0), vis))
        .collect();
    Ok(SweepResult {
        delta_grid: grid.to_vec(),
        correlations: joints.iter().map(correlation).collect(),
        singles: joints.iter().map(marginals).collect(),
        joints,
        visibility_used: vis,
    })
}

/// `(max − min)/(max + min)`, or 0 when `max + min = 0`.
pub fn fringe_visibility(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewValues {
            need: 2,
            got: values.len(),
        });
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sum = max + min;
    if sum == 0.0 {
        return Ok(0.0);
    }
    Ok((max - min) / sum)
}

/// Two phase settings per party for a CHSH test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshSettings {
    /// Settings that reach `2√2·v`.
    pub fn optimal() -> Self {
        ChshSettings {
            a: 0.0,
            a_prime: FRAC_PI_2,
            b: FRAC_PI_4,
            b_prime: -FRAC_PI_4,
        }
    }

    /// The four setting pairs `(a,b), (a,b′), (a′,b), (a′,b′)`; the last enters S with a minus sign.
    pub fn pairs(&self) -> [PhaseSettings; 4] {
        [
            PhaseSettings::new(self.a, self.b),
            PhaseSettings::new(self.a, self.b_prime),
            PhaseSettings::new(self.a_prime, self.b),
            PhaseSettings::new(self.a_prime, self.b_prime),
        ]
    }
}

/// Signs with which the four pair correlations combine into S.
pub const CHSH_SIGNS: [f64; 4] = [1.0, 1.0, 1.0, -1.0];

/// `S = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`.
pub fn chsh(s: &ChshSettings, vis: Visibility) -> f64 {
    s.pairs()
        .iter()
        .zip(CHSH_SIGNS)
        .map(|(p, sign)| sign * correlation(&rto_joint_distribution(*p, vis)))
        .sum()
}

/// Sum of moduli of off-diagonal entries in the declared basis.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let n = rho.entries().rows();
    (0..n)
        .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| rho.get(r, c).norm())
        .sum()
}

/// Largest deviation of either party's single-detector probability from 1/2
/// while `φ_B` runs over `phi_b_grid` at fixed `φ_A`.
pub fn no_signaling_check(phi_a: f64, phi_b_grid: &[f64], vis: Visibility) -> Result<f64> {
    if phi_b_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(phi_b_grid
        .iter()
        .map(|&phi_b| {
            let m = marginals(&rto_joint_distribution(PhaseSettings::new(phi_a, phi_b), vis));
            m.as_array()
                .iter()
                .map(|p| (p - 0.5).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{density_of, partial_trace, TOL};
    use crate::optics::{biphoton_state, superposed_state};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

    fn vis(v: f64) -> Visibility {
        Visibility::new(v).unwrap()
    }

    fn grid(n: usize, hi: f64) -> Vec<f64> {
        (0..n).map(|i| hi * i as f64 / n as f64).collect()
    }

    #[test]
    fn marginal_examples() {
        let j = rto_joint_distribution(PhaseSettings::new(0.7, 2.1), Visibility::PERFECT);
        for p in marginals(&j).as_array() {
            assert!((p - 0.5).abs() < TOL);
        }
        let uniform = JointDistribution::uniform(PhaseSettings::default());
        assert_eq!(marginals(&uniform).as_array(), [0.5; 4]);
        let sure = JointDistribution::new(PhaseSettings::default(), [[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(marginals(&sure).as_array(), [1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn correlation_examples() {
        let e = |d: f64, v: f64| correlation(&rto_joint_distribution(PhaseSettings::new(d, 0.0), vis(v)));
        assert!((e(0.0, 1.0) - 1.0).abs() < TOL);
        assert!(e(FRAC_PI_2, 1.0).abs() < TOL);
        assert!((e(PI, 0.8) + 0.8).abs() < TOL);
    }

    #[test]
    fn sweep_examples() {
        let r = sweep_correlation(&[0.0, FRAC_PI_2, PI], Visibility::PERFECT).unwrap();
        for (e, want) in r.correlations.iter().zip([1.0, 0.0, -1.0]) {
            assert!((e - want).abs() < TOL);
        }
        for m in &r.singles {
            for p in m.as_array() {
                assert!((p - 0.5).abs() < TOL);
            }
        }
        let r = sweep_correlation(&[0.0], vis(0.0)).unwrap();
        assert!(r.correlations[0].abs() < TOL);
        assert_eq!(sweep_correlation(&[], Visibility::PERFECT), Err(Error::EmptyGrid));
    }

    #[test]
    fn sweep_matches_sequential_evaluation() {
        let g = grid(97, TAU);
        let r = sweep_correlation(&g, vis(0.37)).unwrap();
        for (d, e) in g.iter().zip(&r.correlations) {
            let seq = correlation(&rto_joint_distribution(PhaseSettings::new(*d, 0.0), vis(0.37)));
            assert_eq!(e.to_bits(), seq.to_bits());
        }
    }

    #[test]
    fn fringe_visibility_examples() {
        let g = grid(256, TAU);
        let r = sweep_correlation(&g, Visibility::PERFECT).unwrap();
        let singles: Vec<f64> = r.singles.iter().map(|m| m.a_plus).collect();
        assert!(fringe_visibility(&singles).unwrap() < TOL);
        assert!((fringe_visibility(&r.coincidences()).unwrap() - 1.0).abs() < 1e-9);

        let r = sweep_correlation(&g, vis(FRAC_1_SQRT_2)).unwrap();
        assert!((fringe_visibility(&r.coincidences()).unwrap() - FRAC_1_SQRT_2).abs() < 1e-9);

        assert_eq!(fringe_visibility(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(fringe_visibility(&[0.3, 0.3, 0.3]).unwrap(), 0.0);
        assert_eq!(
            fringe_visibility(&[0.5]),
            Err(Error::TooFewValues { need: 2, got: 1 })
        );
    }

    #[test]
    fn chsh_examples() {
        let s = ChshSettings::optimal();
        assert!((chsh(&s, Visibility::PERFECT) - 2.828427).abs() < 1e-6);
        assert!((chsh(&s, vis(FRAC_1_SQRT_2)) - 2.0).abs() < 1e-6);
        let zero = ChshSettings {
            a: 0.0,
            a_prime: 0.0,
            b: 0.0,
            b_prime: 0.0,
        };
        assert!((chsh(&zero, Visibility::PERFECT) - 2.0).abs() < TOL);
    }

    #[test]
    fn chsh_violation_threshold() {
        let s = ChshSettings::optimal();
        for k in 0..=100 {
            let v = k as f64 / 100.0;
            let value = chsh(&s, vis(v));
            assert!((value - 2.0 * SQRT_2 * v).abs() < 1e-9);
            assert_eq!(value > 2.0, v > FRAC_1_SQRT_2 + 1e-9, "v = {v}");
        }
    }

    #[test]
    fn l1_coherence_examples() {
        let rho = density_of(&biphoton_state());
        assert!(l1_coherence(&partial_trace(&rho, 0).unwrap()) < TOL);
        assert!((l1_coherence(&density_of(&superposed_state(0.0))) - 1.0).abs() < TOL);
        assert!((l1_coherence(&rho) - 1.0).abs() < TOL);
    }

    #[test]
    fn no_signaling_examples() {
        let g = grid(32, TAU);
        for v in [1.0, 0.0, 0.5] {
            for phi_a in [0.0, 1.1, 4.0] {
                assert!(no_signaling_check(phi_a, &g, vis(v)).unwrap() < TOL);
            }
        }
        assert_eq!(no_signaling_check(0.0, &[], Visibility::PERFECT), Err(Error::EmptyGrid));
    }
}
