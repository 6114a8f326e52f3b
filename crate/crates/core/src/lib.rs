//! Exact simulation of a momentum-entangled two-photon interferometer and of
//! von Neumann pre-measurement.
//!
//! * [`linalg`]: labeled states, density matrices, operators, partial trace.
//! * [`optics`]: the biphoton source, phase shifters, beam splitters and the
//!   exact coincidence distribution.
//! * [`coherence`]: marginals, correlation, fringe visibility, CHSH, l1 coherence.
//! * [`premeasure`]: object–detector coupling and the correlation report.
//! * [`montecarlo`]: seeded coincidence sampling and estimators.

pub mod coherence;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod optics;
pub mod premeasure;
pub mod rng;

pub use error::{Error, Result};
