//! Finite-statistics coincidence counting.
//!
//! Every trial yields one outcome for A and one for B, drawn by inverse CDF
//! over the outcomes in `++, +−, −+, −−` order. Streams are sequential and
//! depend only on `(distribution, n, seed)`; concurrent work over grid points
//! or Bell settings gives each unit its own sub-seed from [`split_seed`].

use rayon::prelude::*;

use crate::coherence::{ChshSettings, CHSH_SIGNS};
use crate::error::{Error, Result};
use crate::optics::{rto_joint_distribution, JointDistribution, Party, PhaseSettings, Port, Visibility};
use crate::rng::{split_seed, SplitMix64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub trial: u64,
    pub settings: PhaseSettings,
    pub outcome_a: Port,
    pub outcome_b: Port,
}

impl EventRecord {
    pub fn matched(&self) -> bool {
        self.outcome_a == self.outcome_b
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub stderr: f64,
    pub n: u64,
}

/// Iterator over i.i.d. coincidence events.
#[derive(Clone, Debug)]
pub struct EventSampler {
    settings: PhaseSettings,
    cumulative: [f64; 4],
    outcomes: [(Port, Port); 4],
    // outcome taken when u lands at or beyond the last cumulative bound
    fallback: usize,
    rng: SplitMix64,
    next_trial: u64,
    remaining: u64,
}

impl Iterator for EventSampler {
    type Item = EventRecord;

    fn next(&mut self) -> Option<EventRecord> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let u = self.rng.next_f64();
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.fallback);
        let (a, b) = self.outcomes[k];
        let event = EventRecord {
            trial: self.next_trial,
            settings: self.settings,
            outcome_a: a,
            outcome_b: b,
        };
        self.next_trial += 1;
        Some(event)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for EventSampler {}

/// `n` events drawn from `j` with a splitmix64 stream seeded by `seed`.
pub fn sample_events(j: &JointDistribution, n: usize, seed: u64) -> Result<EventSampler> {
    if n == 0 {
        return Err(Error::SampleCount { min: 1, got: 0 });
    }
    let entries = j.outcomes();
    let mut cumulative = [0.0; 4];
    let mut acc = 0.0;
    for (slot, (_, p)) in cumulative.iter_mut().zip(entries) {
        acc += p.max(0.0);
        *slot = acc;
    }
    let fallback = entries
        .iter()
        .rposition(|(_, p)| *p > 0.0)
        .expect("probabilities sum to one");
    Ok(EventSampler {
        settings: j.settings(),
        cumulative,
        outcomes: entries.map(|(o, _)| o),
        fallback,
        rng: SplitMix64::new(seed),
        next_trial: 0,
        remaining: n as u64,
    })
}

/// Running mean and sample variance of a bounded per-event score.
#[derive(Clone, Copy, Debug, Default)]
struct MeanAccumulator {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl MeanAccumulator {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn finish(self) -> Result<EstimatorResult> {
        if self.n < 2 {
            return Err(Error::SampleCount {
                min: 2,
                got: self.n as usize,
            });
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        Ok(EstimatorResult {
            estimate: mean,
            stderr: (var / n).sqrt(),
            n: self.n,
        })
    }
}

fn correlation_of<I: IntoIterator<Item = EventRecord>>(events: I) -> Result<EstimatorResult> {
    let mut acc = MeanAccumulator::default();
    for e in events {
        acc.push(if e.matched() { 1.0 } else { -1.0 });
    }
    acc.finish()
}

/// Mean of `+1` (outcomes match) / `−1` (outcomes differ) with its standard error.
pub fn estimate_correlation(events: &[EventRecord]) -> Result<EstimatorResult> {
    correlation_of(events.iter().copied())
}

/// Fraction of events where `party` fired its plus port, with binomial standard error.
pub fn estimate_plus_probability(events: &[EventRecord], party: Party) -> Result<EstimatorResult> {
    let mut acc = MeanAccumulator::default();
    for e in events {
        let port = match party {
            Party::A => e.outcome_a,
            Party::B => e.outcome_b,
        };
        acc.push(if port == Port::Plus { 1.0 } else { 0.0 });
    }
    acc.finish()
}

/// Per-setting correlations and the combined CHSH estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellEstimate {
    pub s: EstimatorResult,
    pub per_setting: [EstimatorResult; 4],
}

/// Sampled CHSH value. Setting pair `k` uses sub-seed `split_seed(seed, k)`.
pub fn bell_experiment(
    s: &ChshSettings,
    vis: Visibility,
    n_per_setting: usize,
    seed: u64,
) -> Result<BellEstimate> {
    if n_per_setting < 2 {
        return Err(Error::SampleCount {
            min: 2,
            got: n_per_setting,
        });
    }
    let pairs = s.pairs();
    let results: Vec<EstimatorResult> = (0..4usize)
        .into_par_iter()
        .map(|k| {
            let j = rto_joint_distribution(pairs[k], vis);
            correlation_of(sample_events(&j, n_per_setting, split_seed(seed, k as u64))?)
        })
        .collect::<Result<_>>()?;
    let per_setting: [EstimatorResult; 4] = results.try_into().expect("four settings");
    let estimate = per_setting
        .iter()
        .zip(CHSH_SIGNS)
        .map(|(r, sign)| sign * r.estimate)
        .sum();
    let stderr = per_setting.iter().map(|r| r.stderr * r.stderr).sum::<f64>().sqrt();
    Ok(BellEstimate {
        s: EstimatorResult {
            estimate,
            stderr,
            n: per_setting.iter().map(|r| r.n).sum(),
        },
        per_setting,
    })
}

/// Sampled correlation at each grid point (`φ_A = Δ`, `φ_B = 0`); point `i`
/// uses sub-seed `split_seed(seed, i)`.
pub fn sweep_monte_carlo(
    grid: &[f64],
    vis: Visibility,
    n: usize,
    seed: u64,
) -> Result<Vec<EstimatorResult>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    grid.par_iter()
        .enumerate()
        .map(|(i, &delta)| {
            let j = rto_joint_distribution(PhaseSettings::new(delta, 0.0), vis);
            correlation_of(sample_events(&j, n, split_seed(seed, i as u64))?)
        })
        .collect()
}
