//! The full two-station interference circuit and its detection statistics.
//!
//! A single photon split over path modes `A` and `B` is measured by two
//! separated stations. Each station overlaps its path mode with a local weak
//! coherent reference on a balanced splitter and watches two threshold
//! detectors:
//!
//! ```text
//! reference |gamma_a e^{i alpha}>  --a--\          /-- A1
//!                                        >--Alice--
//! source mode A  ------------------b--/          \-- A2
//!
//! reference |gamma_b e^{i beta}>  --a--\          /-- B1
//!                                        >--Bob----
//! source mode B  ------------------b--/          \-- B2
//! ```
//!
//! The reference enters the reflecting port (`a`) at both stations, so the
//! wave phase each upper detector selects sits `pi/2` above the reference
//! phase. Coincidence fringes then depend on the phases only through
//! `delta = alpha - beta - phi`.
//!
//! [`run_bell_setup`] evolves the truncated joint state exactly;
//! [`joint_probabilities`] classifies it with ideal threshold detectors
//! (click iff `n >= 1`, unit efficiency, no dark counts);
//! [`approx_joint_probabilities`] evaluates the small-`gamma` closed forms
//! `p = (gamma^2/4)[1 +- cos(delta)] + gamma^4/4` for cross-checking.

use serde::{Deserialize, Serialize};

use crate::fock::PureState;
use crate::optics::{apply_beam_splitter, coherent_state};
use crate::{Error, Result};

/// Labels of the source path modes.
pub const SOURCE_MODES: [&str; 2] = ["A", "B"];
/// Labels of the two reference modes.
pub const REFERENCE_MODES: [&str; 2] = ["refA", "refB"];
/// Labels of the four detector modes, in table order.
pub const DETECTOR_MODES: [&str; 4] = ["A1", "A2", "B1", "B2"];

/// Leakage budget: beyond this the cutoff is too small to trust the run.
pub const TRUNCATION_BUDGET: f64 = 1e-6;

/// All free parameters of one circuit evaluation.
///
/// All phases are radians; there is no degree input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Alice's reference amplitude (mean photon number `gamma_a^2`).
    pub gamma_a: f64,
    /// Bob's reference amplitude.
    pub gamma_b: f64,
    /// Alice's reference phase (radians).
    #[serde(default)]
    pub alpha: f64,
    /// Bob's reference phase (radians).
    #[serde(default)]
    pub beta: f64,
    /// Source path phase between modes `A` and `B` (radians).
    #[serde(default)]
    pub phi: f64,
    /// Per-mode occupation cutoff. The default 4 keeps truncation leakage
    /// below 1e-10 through `gamma = 0.1` and inside the 1e-6 budget through
    /// `gamma = 0.3`.
    #[serde(default = "default_cutoff")]
    pub cutoff: u8,
}

fn default_cutoff() -> u8 {
    4
}

impl ExperimentConfig {
    /// Symmetric-reference config (`gamma_a = gamma_b`) at the default cutoff.
    pub fn symmetric(gamma: f64, alpha: f64, beta: f64, phi: f64) -> Self {
        Self {
            gamma_a: gamma,
            gamma_b: gamma,
            alpha,
            beta,
            phi,
            cutoff: default_cutoff(),
        }
    }

    /// The phase difference the coincidence fringes depend on.
    pub fn delta(&self) -> f64 {
        self.alpha - self.beta - self.phi
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("gamma_a", self.gamma_a), ("gamma_b", self.gamma_b)] {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {g}"
                )));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("phi", self.phi)] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite, got {v}")));
            }
        }
        if self.cutoff < 2 {
            return Err(Error::InvalidConfig(format!(
                "cutoff must be at least 2 so two-photon terms are representable, got {}",
                self.cutoff
            )));
        }
        Ok(())
    }
}

/// Exact coincidence statistics of one circuit evaluation.
///
/// `p[i][j]` is the probability of a clean coincidence: a click at `A_(i+1)`
/// with none at the other Alice detector, and a click at `B_(j+1)` with none
/// at the other Bob detector. `singles[k]` is detector `k`'s coincidence
/// marginal averaged over the partner station's two ports (half its row or
/// column sum), the constant the fringes oscillate around. `p_other` is all
/// remaining probability: no clicks, one-sided events, same-side double
/// clicks, and any mass beyond the truncation cutoff. The four coincidence
/// entries plus `p_other` partition unity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointProbabilityTable {
    pub p: [[f64; 2]; 2],
    /// Order follows [`DETECTOR_MODES`]: `A1, A2, B1, B2`.
    pub singles: [f64; 4],
    pub p_other: f64,
}

impl JointProbabilityTable {
    pub fn coincidence_sum(&self) -> f64 {
        self.p[0][0] + self.p[0][1] + self.p[1][0] + self.p[1][1]
    }

    pub fn total(&self) -> f64 {
        self.coincidence_sum() + self.p_other
    }

    fn with_channel_marginals(p: [[f64; 2]; 2], p_other: f64) -> Self {
        let singles = [
            0.5 * (p[0][0] + p[0][1]),
            0.5 * (p[1][0] + p[1][1]),
            0.5 * (p[0][0] + p[1][0]),
            0.5 * (p[0][1] + p[1][1]),
        ];
        Self { p, singles, p_other }
    }
}

/// The entangled two-mode source `(e^{i phi}|1,0> + |0,1>)/sqrt(2)` over
/// modes `A`, `B`.
///
/// Routing a single photon into a balanced splitter produces the same state
/// once the splitter's reflection phase `i` is absorbed into the path phase:
/// the splitter output followed by a `phi - pi/2` shift on `A` matches this
/// construction exactly.
pub fn build_entangled_source(phi: f64, cutoff: u8) -> Result<PureState> {
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;
    let register = crate::fock::ModeRegister::new(SOURCE_MODES, cutoff)?;
    PureState::from_terms(
        register,
        [
            (vec![1u8, 0], Complex64::from_polar(FRAC_1_SQRT_2, phi)),
            (vec![0u8, 1], Complex64::new(FRAC_1_SQRT_2, 0.0)),
        ],
    )
}

/// Evolve the full circuit and return the four-detector-mode state.
///
/// Tensor the source with both references, then apply each station's
/// balanced splitter with the reference on the reflecting port. Errors if
/// total truncation leakage exceeds [`TRUNCATION_BUDGET`].
pub fn run_bell_setup(cfg: &ExperimentConfig) -> Result<PureState> {
    cfg.validate()?;
    let source = build_entangled_source(cfg.phi, cfg.cutoff)?;
    let ref_a = coherent_state(cfg.gamma_a, cfg.alpha, REFERENCE_MODES[0], cfg.cutoff)?;
    let ref_b = coherent_state(cfg.gamma_b, cfg.beta, REFERENCE_MODES[1], cfg.cutoff)?;

    let joint = ref_a.tensor(&ref_b)?.tensor(&source)?;
    let after_alice = apply_beam_splitter(
        &joint,
        REFERENCE_MODES[0],
        SOURCE_MODES[0],
        DETECTOR_MODES[0],
        DETECTOR_MODES[1],
    )?;
    let state = apply_beam_splitter(
        &after_alice,
        REFERENCE_MODES[1],
        SOURCE_MODES[1],
        DETECTOR_MODES[2],
        DETECTOR_MODES[3],
    )?;

    if state.truncation_leakage() > TRUNCATION_BUDGET {
        return Err(Error::TruncationExceeded {
            leakage: state.truncation_leakage(),
            budget: TRUNCATION_BUDGET,
        });
    }
    Ok(state)
}

/// Positions of the detector modes `A1, A2, B1, B2` in a state's register.
pub fn detector_indices(state: &PureState) -> Result<[usize; 4]> {
    Ok([
        state
            .register()
            .index_of(DETECTOR_MODES[0])
            .ok_or_else(|| Error::UnknownMode(DETECTOR_MODES[0].into()))?,
        state
            .register()
            .index_of(DETECTOR_MODES[1])
            .ok_or_else(|| Error::UnknownMode(DETECTOR_MODES[1].into()))?,
        state
            .register()
            .index_of(DETECTOR_MODES[2])
            .ok_or_else(|| Error::UnknownMode(DETECTOR_MODES[2].into()))?,
        state
            .register()
            .index_of(DETECTOR_MODES[3])
            .ok_or_else(|| Error::UnknownMode(DETECTOR_MODES[3].into()))?,
    ])
}

/// How one basis pattern registers on the four threshold detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClickClass {
    /// Exactly one click per station: `Coincidence(i, j)` means `A_(i+1)`
    /// with `B_(j+1)`.
    Coincidence(usize, usize),
    /// Exactly one click overall, at detector `k` in [`DETECTOR_MODES`] order.
    Single(usize),
    NoClick,
    /// Anything else: one-sided pairs, three or more detectors, ...
    Other,
}

/// Classify a click pattern `[A1, A2, B1, B2]`.
pub fn classify_clicks(clicks: [bool; 4]) -> ClickClass {
    let [a1, a2, b1, b2] = clicks;
    let alice = a1 as u8 + a2 as u8;
    let bob = b1 as u8 + b2 as u8;
    match (alice, bob) {
        (1, 1) => ClickClass::Coincidence(a2 as usize, b2 as usize),
        (0, 0) => ClickClass::NoClick,
        (1, 0) => ClickClass::Single(a2 as usize),
        (0, 1) => ClickClass::Single(2 + b2 as usize),
        _ => ClickClass::Other,
    }
}

/// Exact joint table: evolve the circuit and classify every basis pattern
/// with ideal threshold detectors.
pub fn joint_probabilities(cfg: &ExperimentConfig) -> Result<JointProbabilityTable> {
    let state = run_bell_setup(cfg)?;
    let idx = detector_indices(&state)?;

    let mut p = [[0.0; 2]; 2];
    let mut other = state.truncation_leakage();
    for (occ, amp) in state.terms() {
        let clicks = [
            occ.0[idx[0]] >= 1,
            occ.0[idx[1]] >= 1,
            occ.0[idx[2]] >= 1,
            occ.0[idx[3]] >= 1,
        ];
        let w = amp.norm_sqr();
        match classify_clicks(clicks) {
            ClickClass::Coincidence(i, j) => p[i][j] += w,
            _ => other += w,
        }
    }
    Ok(JointProbabilityTable::with_channel_marginals(p, other))
}

/// Small-`gamma` closed forms for the joint table; no simulation.
///
/// Valid for symmetric references only (`gamma_a = gamma_b`). The remainder
/// `1 - gamma^2 - gamma^4` is assigned to `p_other` so the table still
/// partitions unity.
pub fn approx_joint_probabilities(cfg: &ExperimentConfig) -> Result<JointProbabilityTable> {
    cfg.validate()?;
    if cfg.gamma_a != cfg.gamma_b {
        return Err(Error::InvalidConfig(format!(
            "closed forms require gamma_a = gamma_b, got {} and {}",
            cfg.gamma_a, cfg.gamma_b
        )));
    }
    let g2 = cfg.gamma_a * cfg.gamma_a;
    let g4 = g2 * g2;
    let fringe = cfg.delta().cos();
    let plus = 0.25 * g2 * (1.0 + fringe) + 0.25 * g4;
    let minus = 0.25 * g2 * (1.0 - fringe) + 0.25 * g4;
    let p = [[plus, minus], [minus, plus]];
    Ok(JointProbabilityTable::with_channel_marginals(
        p,
        1.0 - g2 - g4,
    ))
}

/// Coincidence marginals per detector, in [`DETECTOR_MODES`] order.
///
/// Each value is the detector's mean coincidence probability per partner
/// port; to leading order all four equal `gamma^2/4`, independent of the
/// phases.
pub fn marginal_singles(cfg: &ExperimentConfig) -> Result<[f64; 4]> {
    Ok(joint_probabilities(cfg)?.singles)
}
