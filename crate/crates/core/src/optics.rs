//! States, optical elements and the two-party interferometer.
//!
//! The source emits `(|A1⟩|B1⟩ + |A2⟩|B2⟩)/√2`. A phase `φ_A` sits on path A2
//! and `φ_B` on path B1, so the branch-relative phase is `φ_A − φ_B`. Each
//! party then recombines its two paths on a symmetric 50/50 beam splitter
//! (reflection picks up a factor `i`). B's output ports are labeled so that
//! `φ_A = φ_B` gives perfectly matched outcomes.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply, Matrix, Operator, Space, StateVector, TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// Interferometer arm before the final beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arm {
    One,
    Two,
}

/// Detector port after the final beam splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Port {
    pub const ALL: [Port; 2] = [Port::Plus, Port::Minus];

    pub fn index(self) -> usize {
        match self {
            Port::Plus => 0,
            Port::Minus => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Port::Plus => "+",
            Port::Minus => "-",
        }
    }

    /// `+1` for the plus port, `−1` for the minus port.
    pub fn sign(self) -> f64 {
        match self {
            Port::Plus => 1.0,
            Port::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    Path(Party, Arm),
    Port(Party, Port),
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLabel::Path(p, Arm::One) => write!(f, "{p:?}1"),
            ModeLabel::Path(p, Arm::Two) => write!(f, "{p:?}2"),
            ModeLabel::Port(p, port) => write!(f, "{p:?}{}", port.symbol()),
        }
    }
}

/// Local phase settings, each normalized into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseSettings {
    phi_a: f64,
    phi_b: f64,
}

impl PhaseSettings {
    pub fn new(phi_a: f64, phi_b: f64) -> Self {
        PhaseSettings {
            phi_a: normalize_angle(phi_a),
            phi_b: normalize_angle(phi_b),
        }
    }

    pub fn phi_a(&self) -> f64 {
        self.phi_a
    }

    pub fn phi_b(&self) -> f64 {
        self.phi_b
    }

    /// Nonlocal phase difference `φ_A − φ_B`.
    pub fn delta(&self) -> f64 {
        self.phi_a - self.phi_b
    }
}

impl Default for PhaseSettings {
    fn default() -> Self {
        PhaseSettings::new(0.0, 0.0)
    }
}

fn normalize_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Interference visibility in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Visibility(f64);

impl Visibility {
    pub const PERFECT: Visibility = Visibility(1.0);

    pub fn new(v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&v) {
            Ok(Visibility(v))
        } else {
            Err(Error::InvalidVisibility(v))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Probabilities of the four coincidence outcomes, indexed by (A port, B port).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointDistribution {
    settings: PhaseSettings,
    probs: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn new(settings: PhaseSettings, probs: [[f64; 2]; 2]) -> Result<Self> {
        let flat = probs.iter().flatten();
        if let Some(p) = flat.clone().find(|p| !p.is_finite() || **p < -TOL || **p > 1.0 + TOL) {
            return Err(Error::InvalidDistribution(format!("entry {p} outside [0, 1]")));
        }
        let total: f64 = flat.sum();
        if (total - 1.0).abs() > TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(JointDistribution { settings, probs })
    }

    pub fn uniform(settings: PhaseSettings) -> Self {
        JointDistribution {
            settings,
            probs: [[0.25; 2]; 2],
        }
    }

    pub fn settings(&self) -> PhaseSettings {
        self.settings
    }

    pub fn get(&self, a: Port, b: Port) -> f64 {
        self.probs[a.index()][b.index()]
    }

    pub fn table(&self) -> [[f64; 2]; 2] {
        self.probs
    }

    /// Outcomes in the order `++, +−, −+, −−` with their probabilities.
    pub fn outcomes(&self) -> [((Port, Port), f64); 4] {
        let mut out = [((Port::Plus, Port::Plus), 0.0); 4];
        for (slot, (a, b)) in out.iter_mut().zip(port_pairs()) {
            *slot = ((a, b), self.get(a, b));
        }
        out
    }
}

fn port_pairs() -> impl Iterator<Item = (Port, Port)> {
    Port::ALL
        .into_iter()
        .flat_map(|a| Port::ALL.into_iter().map(move |b| (a, b)))
}

fn party_prefix(party: Party) -> &'static str {
    match party {
        Party::A => "A",
        Party::B => "B",
    }
}

/// `[X1, X2]` for party X.
pub fn path_space(party: Party) -> Space {
    let p = party_prefix(party);
    Space::single(&[format!("{p}1"), format!("{p}2")])
}

/// `[X+, X−]` for party X.
pub fn port_space(party: Party) -> Space {
    let p = party_prefix(party);
    Space::single(&[format!("{p}+"), format!("{p}-")])
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(|A1⟩|B1⟩ + |A2⟩|B2⟩)/√2` on `[A1,A2]⊗[B1,B2]`.
pub fn biphoton_state() -> StateVector {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let z = c(0.0, 0.0);
    StateVector::new(path_space(Party::A).concat(&path_space(Party::B)), vec![h, z, z, h])
        .expect("biphoton state is normalized")
}

/// `(|A1⟩ + e^{iθ}|A2⟩)/√2`.
pub fn superposed_state(theta: f64) -> StateVector {
    StateVector::new(
        path_space(Party::A),
        vec![c(FRAC_1_SQRT_2, 0.0), Complex64::from_polar(FRAC_1_SQRT_2, theta)],
    )
    .expect("superposition is normalized")
}

/// Multiplies the amplitude of one path mode by `e^{iφ}`.
pub fn phase_shifter(mode: ModeLabel, phi: f64) -> Result<Operator> {
    let (party, arm) = match mode {
        ModeLabel::Path(party, arm) => (party, arm),
        ModeLabel::Port(..) => return Err(Error::PortNotPath(mode.to_string())),
    };
    let shifted = match arm {
        Arm::One => 0,
        Arm::Two => 1,
    };
    let m = Matrix::from_fn(2, 2, |r, col| match (r == col, r == shifted) {
        (true, true) => Complex64::from_polar(1.0, phi),
        (true, false) => c(1.0, 0.0),
        _ => c(0.0, 0.0),
    });
    let space = path_space(party);
    Operator::new(space.clone(), space, m)
}

/// Symmetric 50/50 splitter: `|1⟩ → (|+⟩ + i|−⟩)/√2`, `|2⟩ → (i|+⟩ + |−⟩)/√2`.
pub fn beam_splitter(party: Party) -> Operator {
    let t = c(FRAC_1_SQRT_2, 0.0);
    let r = c(0.0, FRAC_1_SQRT_2);
    // columns are inputs (1, 2), rows are outputs (+, −)
    let m = Matrix::new(2, 2, vec![t, r, r, t]).expect("finite entries");
    Operator::new(path_space(party), port_space(party), m).expect("beam splitter is unitary")
}

/// Swaps B's raw output ports so that equal phases give matched outcomes.
fn b_port_labeling() -> Operator {
    let m = Matrix::from_fn(2, 2, |r, col| if r != col { c(1.0, 0.0) } else { c(0.0, 0.0) });
    Operator::new(port_space(Party::B), port_space(Party::B), m).expect("permutation is unitary")
}

/// Both beam splitters and B's port labeling; independent of the settings.
fn splitter_stage() -> &'static Operator {
    static STAGE: OnceLock<Operator> = OnceLock::new();
    STAGE.get_or_init(|| {
        let detect_b = b_port_labeling()
            .after(&beam_splitter(Party::B))
            .expect("port spaces agree");
        beam_splitter(Party::A).kron(&detect_b)
    })
}

/// Full two-party circuit `[A1,A2]⊗[B1,B2] → [A+,A−]⊗[B+,B−]`.
pub fn rto_circuit(settings: PhaseSettings) -> Operator {
    let shift_a = phase_shifter(ModeLabel::Path(Party::A, Arm::Two), settings.phi_a())
        .expect("path mode");
    let shift_b = phase_shifter(ModeLabel::Path(Party::B, Arm::One), settings.phi_b())
        .expect("path mode");
    splitter_stage()
        .after(&shift_a.kron(&shift_b))
        .expect("path spaces agree")
}

/// Source state after the phase shifters, before the beam splitters.
pub fn phased_biphoton(settings: PhaseSettings) -> StateVector {
    let shift_a = phase_shifter(ModeLabel::Path(Party::A, Arm::Two), settings.phi_a())
        .expect("path mode");
    let shift_b = phase_shifter(ModeLabel::Path(Party::B, Arm::One), settings.phi_b())
        .expect("path mode");
    apply(&shift_a.kron(&shift_b), &biphoton_state()).expect("shifters act on the source space")
}

/// Two-photon state at the detectors for the given settings.
pub fn output_state(settings: PhaseSettings) -> StateVector {
    apply(&rto_circuit(settings), &biphoton_state()).expect("circuit input matches source")
}

/// Exact coincidence probabilities, mixed with the flat distribution as
/// `p = v·p_ideal + (1 − v)/4`.
pub fn rto_joint_distribution(settings: PhaseSettings, vis: Visibility) -> JointDistribution {
    let ideal = output_state(settings).probabilities();
    let v = vis.value();
    let mut probs = [[0.0; 2]; 2];
    for (i, p) in ideal.into_iter().enumerate() {
        probs[i / 2][i % 2] = v * p + (1.0 - v) * 0.25;
    }
    JointDistribution { settings, probs }
}
