//! Shot-level Monte Carlo over the exact outcome distribution.
//!
//! Each shot of the circuit lands in exactly one of ten detection classes:
//! four clean coincidences, four lone clicks, no click at all, or anything
//! else (same-side doubles and busier patterns, plus truncated mass). A
//! [`ShotPlan`] draws multinomial counts over that partition from a
//! counter-based generator seeded explicitly: identical plans give
//! bit-identical counts, and disjoint seeds are independent, so plans can
//! run in parallel and merge by summation. Post-selection on coincidences
//! happens at estimation time, the way a recorded experiment would be
//! analyzed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::bell::ChshSettings;
use crate::experiment::{
    classify_clicks, detector_indices, run_bell_setup, ClickClass, ExperimentConfig,
};
use crate::wave::WavePhase;
use crate::{Error, Result};

/// The exclusive detection classes a shot can land in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetectionPattern {
    CoincidenceA1B1,
    CoincidenceA1B2,
    CoincidenceA2B1,
    CoincidenceA2B2,
    SingleA1,
    SingleA2,
    SingleB1,
    SingleB2,
    NoClick,
    Other,
}

impl DetectionPattern {
    pub const ALL: [Self; 10] = [
        Self::CoincidenceA1B1,
        Self::CoincidenceA1B2,
        Self::CoincidenceA2B1,
        Self::CoincidenceA2B2,
        Self::SingleA1,
        Self::SingleA2,
        Self::SingleB1,
        Self::SingleB2,
        Self::NoClick,
        Self::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::CoincidenceA1B1 => "coinc_A1_B1",
            Self::CoincidenceA1B2 => "coinc_A1_B2",
            Self::CoincidenceA2B1 => "coinc_A2_B1",
            Self::CoincidenceA2B2 => "coinc_A2_B2",
            Self::SingleA1 => "single_A1",
            Self::SingleA2 => "single_A2",
            Self::SingleB1 => "single_B1",
            Self::SingleB2 => "single_B2",
            Self::NoClick => "no_click",
            Self::Other => "other",
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&p| p == self).unwrap()
    }
}

/// One seeded sampling run: how many shots of which circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotPlan {
    pub shots: u64,
    pub seed: u64,
    pub config: ExperimentConfig,
}

impl ShotPlan {
    pub fn new(shots: u64, seed: u64, config: ExperimentConfig) -> Self {
        Self { shots, seed, config }
    }

    /// A plan whose reference phases realize the detected wave phases
    /// `(alpha', beta')`.
    pub fn for_setting_pair(
        base: &ExperimentConfig,
        shots: u64,
        seed: u64,
        alpha_prime: f64,
        beta_prime: f64,
    ) -> Self {
        Self {
            shots,
            seed,
            config: ExperimentConfig {
                alpha: crate::bell::reference_phase_for(alpha_prime),
                beta: crate::bell::reference_phase_for(beta_prime),
                ..*base
            },
        }
    }
}

/// Counts per detection class; they always sum to the plan's shot count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountRecord {
    /// Indexed in [`DetectionPattern::ALL`] order.
    pub counts: [u64; 10],
    pub shots: u64,
}

impl CountRecord {
    pub fn count(&self, pattern: DetectionPattern) -> u64 {
        self.counts[pattern.index()]
    }

    pub fn frequency(&self, pattern: DetectionPattern) -> f64 {
        self.count(pattern) as f64 / self.shots as f64
    }

    /// The 2x2 coincidence block, `[i][j]` for `(A_(i+1), B_(j+1))`.
    pub fn coincidences(&self) -> [[u64; 2]; 2] {
        [
            [self.counts[0], self.counts[1]],
            [self.counts[2], self.counts[3]],
        ]
    }

    pub fn coincidence_total(&self) -> u64 {
        self.counts[..4].iter().sum()
    }

    /// Merge counts from an independent plan over the same circuit.
    pub fn merged(&self, other: &Self) -> Self {
        let mut counts = self.counts;
        for (c, o) in counts.iter_mut().zip(other.counts) {
            *c += o;
        }
        Self {
            counts,
            shots: self.shots + other.shots,
        }
    }
}

/// Exact probabilities of the ten detection classes for one configuration.
///
/// Truncated mass is assigned to `Other`; the vector sums to one.
pub fn outcome_distribution(cfg: &ExperimentConfig) -> Result<[f64; 10]> {
    let state = run_bell_setup(cfg)?;
    let idx = detector_indices(&state)?;
    let mut dist = [0.0; 10];
    for (occ, amp) in state.terms() {
        let clicks = [
            occ.0[idx[0]] >= 1,
            occ.0[idx[1]] >= 1,
            occ.0[idx[2]] >= 1,
            occ.0[idx[3]] >= 1,
        ];
        let class = match classify_clicks(clicks) {
            ClickClass::Coincidence(i, j) => 2 * i + j,
            ClickClass::Single(k) => 4 + k,
            ClickClass::NoClick => 8,
            ClickClass::Other => 9,
        };
        dist[class] += amp.norm_sqr();
    }
    dist[9] += state.truncation_leakage();
    Ok(dist)
}

/// Draw multinomial counts over the outcome partition.
///
/// Conditional-binomial sampling from a ChaCha stream keyed by the plan's
/// seed alone: the draw is reproducible across runs and platforms, and the
/// counts sum to `shots` by construction.
pub fn sample(plan: &ShotPlan) -> Result<CountRecord> {
    if plan.shots == 0 {
        return Err(Error::ZeroShots);
    }
    let dist = outcome_distribution(&plan.config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);

    let mut counts = [0u64; 10];
    let mut shots_left = plan.shots;
    let mut mass_left = 1.0;
    for k in 0..9 {
        if shots_left == 0 {
            break;
        }
        let ratio = if mass_left > 0.0 {
            (dist[k] / mass_left).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let drawn = Binomial::new(shots_left, ratio)
            .expect("ratio clamped to [0, 1]")
            .sample(&mut rng);
        counts[k] = drawn;
        shots_left -= drawn;
        mass_left -= dist[k];
    }
    counts[9] = shots_left; // the remainder class absorbs rounding dust
    Ok(CountRecord {
        counts,
        shots: plan.shots,
    })
}

/// Estimate the CHSH value from four sampled setting pairs.
///
/// Plans must realize the setting pairs in [`ChshSettings::pairs`] order.
/// Each pair's correlation comes from its normalized coincidence counts;
/// the standard error combines the per-pair multinomial variances
/// `(1 - E^2) / n_coincidence`, which are independent across pairs.
pub fn estimate_chsh(plans: &[ShotPlan; 4], settings: &ChshSettings) -> Result<(f64, f64)> {
    let mut correlations = [0.0; 4];
    let mut variance = 0.0;
    for (k, ((alpha_prime, beta_prime), plan)) in
        settings.pairs().into_iter().zip(plans).enumerate()
    {
        let want_alpha = crate::bell::reference_phase_for(alpha_prime);
        let want_beta = crate::bell::reference_phase_for(beta_prime);
        if !phases_equivalent(plan.config.alpha, want_alpha)
            || !phases_equivalent(plan.config.beta, want_beta)
        {
            return Err(Error::MismatchedPlan {
                index: k,
                alpha_prime,
                beta_prime,
            });
        }
        let record = sample(plan)?;
        let n = record.coincidence_total();
        if n == 0 {
            return Err(Error::DegenerateEstimate(k));
        }
        let c = record.coincidences();
        let e = (c[0][0] + c[1][1]) as f64 / n as f64
            - (c[0][1] + c[1][0]) as f64 / n as f64;
        correlations[k] = e;
        variance += (1.0 - e * e) / n as f64;
    }
    let s_hat =
        (correlations[0] + correlations[1] + correlations[2] - correlations[3]).abs();
    Ok((s_hat, variance.sqrt()))
}

fn phases_equivalent(x: f64, y: f64) -> bool {
    let d = (WavePhase::new(x).value() - WavePhase::new(y).value()).abs();
    d < 1e-9 || (d - std::f64::consts::TAU).abs() < 1e-9
}
