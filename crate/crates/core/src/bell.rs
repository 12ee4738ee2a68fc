//! CHSH analysis over joint-probability providers.
//!
//! The functional is `S = |E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)|` with
//! each correlation `E = P11 + P22 - P12 - P21` computed from a coincidence
//! table normalized over its four entries. Local deterministic strategies
//! cap `S` at 2; any quantum model here stays under the Tsirelson bound
//! `2 sqrt(2)`. A provider maps a pair of detected wave phases
//! `(alpha', beta')` to a joint table; closed-form, exact-engine, and
//! sampled providers all plug into the same functional.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::experiment::{
    approx_joint_probabilities, joint_probabilities, ExperimentConfig, JointProbabilityTable,
};
use crate::wave::WavePhase;
use crate::{Error, Result};

/// The local-hidden-variable ceiling of the CHSH functional.
pub const CLASSICAL_BOUND: f64 = 2.0;
/// The quantum ceiling, `2 sqrt(2)`.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

/// A coincidence table normalized over its four entries.
pub type NormalizedTable = [[f64; 2]; 2];

/// The two wave phases each station switches between, canonicalized to
/// `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ChshSettingsRaw")]
pub struct ChshSettings {
    pub alpha_1: f64,
    pub alpha_2: f64,
    pub beta_1: f64,
    pub beta_2: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChshSettingsRaw {
    alpha_1: f64,
    alpha_2: f64,
    beta_1: f64,
    beta_2: f64,
}

impl From<ChshSettingsRaw> for ChshSettings {
    fn from(r: ChshSettingsRaw) -> Self {
        Self::new(r.alpha_1, r.alpha_2, r.beta_1, r.beta_2)
    }
}

impl ChshSettings {
    pub fn new(alpha_1: f64, alpha_2: f64, beta_1: f64, beta_2: f64) -> Self {
        Self {
            alpha_1: WavePhase::new(alpha_1).value(),
            alpha_2: WavePhase::new(alpha_2).value(),
            beta_1: WavePhase::new(beta_1).value(),
            beta_2: WavePhase::new(beta_2).value(),
        }
    }

    /// The optimal settings `(0, pi/2, pi/4, -pi/4)` that reach `2 sqrt(2)`
    /// at zero source phase.
    pub fn optimal() -> Self {
        Self::new(
            0.0,
            FRAC_PI_2,
            std::f64::consts::FRAC_PI_4,
            -std::f64::consts::FRAC_PI_4,
        )
    }

    /// The four setting pairs in evaluation order
    /// `(a1,b1), (a1,b2), (a2,b1), (a2,b2)`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.alpha_1, self.beta_1),
            (self.alpha_1, self.beta_2),
            (self.alpha_2, self.beta_1),
            (self.alpha_2, self.beta_2),
        ]
    }

    /// Shift Alice's settings by the source phase so the functional sees the
    /// same phase differences as at `phi = 0`.
    pub fn compensated_for_source_phase(&self, phi: f64) -> Self {
        Self::new(
            self.alpha_1 + phi,
            self.alpha_2 + phi,
            self.beta_1,
            self.beta_2,
        )
    }
}

/// Everything one CHSH evaluation produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellResult {
    pub s_value: f64,
    /// Correlations in [`ChshSettings::pairs`] order.
    pub correlations: [f64; 4],
    /// The normalized coincidence tables behind each correlation.
    pub tables: [NormalizedTable; 4],
    /// Whether `s_value` exceeds the classical bound 2.
    pub violated: bool,
}

/// Divide the four coincidence entries by their sum.
///
/// Errors when the table carries (near-)zero coincidence weight: references
/// switched off, or pathological settings.
pub fn normalize_joint(table: &JointProbabilityTable) -> Result<NormalizedTable> {
    let sum = table.coincidence_sum();
    if sum <= 1e-18 {
        return Err(Error::DegenerateNormalization(sum));
    }
    Ok([
        [table.p[0][0] / sum, table.p[0][1] / sum],
        [table.p[1][0] / sum, table.p[1][1] / sum],
    ])
}

/// Correlation function of a normalized table: `P11 + P22 - P12 - P21`.
pub fn correlation(table: &NormalizedTable) -> f64 {
    table[0][0] + table[1][1] - table[0][1] - table[1][0]
}

/// Evaluate the CHSH functional with `provider` supplying a joint table per
/// detected-wave-phase pair.
pub fn chsh<F>(settings: &ChshSettings, mut provider: F) -> Result<BellResult>
where
    F: FnMut(f64, f64) -> Result<JointProbabilityTable>,
{
    let mut correlations = [0.0; 4];
    let mut tables = [[[0.0; 2]; 2]; 4];
    for (k, (a, b)) in settings.pairs().into_iter().enumerate() {
        let normalized = normalize_joint(&provider(a, b)?)?;
        correlations[k] = correlation(&normalized);
        tables[k] = normalized;
    }
    let s_value =
        (correlations[0] + correlations[1] + correlations[2] - correlations[3]).abs();
    Ok(BellResult {
        s_value,
        correlations,
        tables,
        violated: s_value > CLASSICAL_BOUND,
    })
}

/// Reference phases that make a station detect the wave phase `prime`: the
/// reflecting-port layout puts the detected phase `pi/2` above the reference.
pub fn reference_phase_for(prime: f64) -> f64 {
    prime - FRAC_PI_2
}

fn config_for_pair(base: &ExperimentConfig, alpha_prime: f64, beta_prime: f64) -> ExperimentConfig {
    ExperimentConfig {
        alpha: reference_phase_for(alpha_prime),
        beta: reference_phase_for(beta_prime),
        ..*base
    }
}

/// Provider backed by the exact truncated-Fock engine; `base` fixes the
/// amplitudes, source phase and cutoff.
pub fn exact_provider(
    base: ExperimentConfig,
) -> impl FnMut(f64, f64) -> Result<JointProbabilityTable> {
    move |a, b| joint_probabilities(&config_for_pair(&base, a, b))
}

/// Provider backed by the small-`gamma` closed forms.
pub fn approx_provider(
    base: ExperimentConfig,
) -> impl FnMut(f64, f64) -> Result<JointProbabilityTable> {
    move |a, b| approx_joint_probabilities(&config_for_pair(&base, a, b))
}

/// Exact joint tables over a grid of fringe phases `delta = alpha - beta - phi`
/// (Bob's reference and the source phase held at their `base` values).
///
/// The grid must carry at least 8 points to resolve a fringe.
pub fn fringe_scan(
    base: &ExperimentConfig,
    deltas: &[f64],
) -> Result<Vec<(f64, JointProbabilityTable)>> {
    if deltas.len() < 8 {
        return Err(Error::GridTooSmall {
            min: 8,
            got: deltas.len(),
        });
    }
    deltas
        .iter()
        .map(|&delta| {
            let cfg = ExperimentConfig {
                alpha: base.beta + base.phi + delta,
                ..*base
            };
            Ok((delta, joint_probabilities(&cfg)?))
        })
        .collect()
}

/// Uniform grid of `count` fringe phases covering `[0, 2 pi)`.
pub fn uniform_delta_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| k as f64 / count as f64 * std::f64::consts::TAU)
        .collect()
}

/// Fringe visibility `(max - min)/(max + min)` of the `A1 B1` coincidence
/// over a scan.
pub fn visibility(scan: &[(f64, JointProbabilityTable)]) -> Result<f64> {
    if scan.is_empty() {
        return Err(Error::GridTooSmall { min: 1, got: 0 });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, t) in scan {
        lo = lo.min(t.p[0][0]);
        hi = hi.max(t.p[0][0]);
    }
    if hi + lo <= 0.0 {
        return Err(Error::DegenerateNormalization(hi + lo));
    }
    Ok((hi - lo) / (hi + lo))
}

/// CHSH values of all 16 deterministic local strategies (each side maps each
/// of its two settings to a fixed outcome of +-1).
///
/// With outcomes `a1, a2, b1, b2` the strategy's value is
/// `|a1 b1 + a1 b2 + a2 b1 - a2 b2|`; the maximum over all strategies is
/// exactly 2, which is the bound any quantum violation has to clear.
pub fn lhv_deterministic_s_values() -> [f64; 16] {
    let mut out = [0.0; 16];
    let signs = [1.0f64, -1.0];
    let mut k = 0;
    for a1 in signs {
        for a2 in signs {
            for b1 in signs {
                for b2 in signs {
                    out[k] = (a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2).abs();
                    k += 1;
                }
            }
        }
    }
    out
}
