//! The wave basis and its interferometric measurement.
//!
//! A wave state is the balanced superposition `(|0> + e^{i alpha}|1>)/sqrt(2)`
//! of vacuum and one photon, labelled by its phase `alpha`; `alpha` and
//! `alpha + pi` are orthogonal. Such a state is not produced by any physical
//! source here; the module treats it as a mathematical input. Measuring it
//! means overlapping it with a reference state on a balanced splitter and
//! watching which detector fires.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;

use crate::fock::{ModeRegister, OccupationBasisState, PureState};
use crate::optics::apply_beam_splitter;
use crate::{Error, Result};

/// A phase in canonical `[0, 2*pi)` range; `alpha` and `alpha + 2*pi`
/// canonicalize to the same value.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct WavePhase(f64);

impl WavePhase {
    pub fn new(alpha: f64) -> Self {
        let mut a = alpha.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0; // rem_euclid can round up to TAU for negative inputs
        }
        Self(a)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The orthogonal partner phase `alpha + pi`.
    pub fn conjugate(self) -> Self {
        Self::new(self.0 + PI)
    }

    /// Shift by `delta` radians (re-canonicalized).
    pub fn shifted(self, delta: f64) -> Self {
        Self::new(self.0 + delta)
    }
}

impl From<f64> for WavePhase {
    fn from(alpha: f64) -> Self {
        Self::new(alpha)
    }
}

impl From<WavePhase> for f64 {
    fn from(p: WavePhase) -> f64 {
        p.0
    }
}

/// Outcome probabilities of a single wave-state measurement.
///
/// The four channels partition unity for normalized inputs: vacuum, one
/// photon at port `c`, one photon at port `d`, and multi-photon events
/// (two or more photons in total, including both-port patterns and any
/// truncated mass).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WaveMeasurementOutcome {
    pub p_vacuum: f64,
    pub p_c: f64,
    pub p_d: f64,
    pub p_two_photon: f64,
}

impl WaveMeasurementOutcome {
    pub fn total(&self) -> f64 {
        self.p_vacuum + self.p_c + self.p_d + self.p_two_photon
    }
}

/// The wave state `(|0> + e^{i alpha}|1>)/sqrt(2)` on a single mode.
pub fn wave_basis_state(alpha: WavePhase, mode: &str, cutoff: u8) -> Result<PureState> {
    let register = ModeRegister::new([mode], cutoff)?;
    PureState::from_terms(
        register,
        [
            (vec![0u8], Complex64::new(FRAC_1_SQRT_2, 0.0)),
            (vec![1u8], Complex64::from_polar(FRAC_1_SQRT_2, alpha.value())),
        ],
    )
}

/// Amplitudes of a two-mode state in the product wave basis.
///
/// Row `i` selects `{|alpha>, |alpha+pi>}` on the first mode, column `j`
/// selects `{|alpha-phi>, |alpha-phi+pi>}` on the second. The state must
/// have per-mode occupations of at most 1; the wave basis spans nothing
/// beyond the vacuum and single-photon sector.
pub fn particle_to_wave_amplitudes(
    state: &PureState,
    alpha: WavePhase,
    phi: f64,
) -> Result<[[Complex64; 2]; 2]> {
    if state.register().len() != 2 {
        return Err(Error::InvalidConfig(format!(
            "wave-space form needs a two-mode state, got {} modes",
            state.register().len()
        )));
    }
    for (occ, _) in state.terms() {
        if occ.occupations().iter().any(|&n| n > 1) {
            return Err(Error::BeyondWaveSpace(format!("{:?}", occ.occupations())));
        }
    }
    let labels = state.register().labels().to_vec();
    let cutoff = state.register().cutoff();
    let beta = alpha.shifted(-phi);
    let first = [alpha, alpha.conjugate()];
    let second = [beta, beta.conjugate()];

    let mut out = [[Complex64::ZERO; 2]; 2];
    for (i, &a) in first.iter().enumerate() {
        for (j, &b) in second.iter().enumerate() {
            let basis = wave_basis_state(a, &labels[0], cutoff)?
                .tensor(&wave_basis_state(b, &labels[1], cutoff)?)?;
            out[i][j] = basis.inner_product(state)?;
        }
    }
    Ok(out)
}

/// Overlap `signal` with `reference` on a balanced splitter and classify the
/// detector outcomes.
///
/// Both inputs must be single-mode states. The signal enters the reflecting
/// port (`a` in the splitter convention), the reference the transmitting
/// port. For wave-state inputs with phases `alpha` and `beta` this yields
/// `p_c = [1 - sin(alpha - beta)]/4` and `p_d = [1 + sin(alpha - beta)]/4`.
/// Truncation leakage of the inputs counts toward `p_two_photon`, which is
/// where any discarded multi-photon mass lives.
pub fn wave_measurement(
    signal: &PureState,
    reference: &PureState,
) -> Result<WaveMeasurementOutcome> {
    let joint = pair_on_internal_register(signal, reference)?;
    let mixed = apply_beam_splitter(&joint, SIGNAL, REFERENCE, PORT_C, PORT_D)?;

    let classify = |want: fn(&OccupationBasisState) -> bool| mixed.project(want).1;
    let p_vacuum = classify(|occ| occ.0 == [0, 0]);
    let p_c = classify(|occ| occ.0 == [1, 0]);
    let p_d = classify(|occ| occ.0 == [0, 1]);
    let (_, multi) = mixed.project(|occ| occ.total() >= 2);
    Ok(WaveMeasurementOutcome {
        p_vacuum,
        p_c,
        p_d,
        p_two_photon: multi + mixed.truncation_leakage(),
    })
}

const SIGNAL: &str = "__sig";
const REFERENCE: &str = "__ref";
const PORT_C: &str = "__c";
const PORT_D: &str = "__d";

/// Re-key two single-mode states onto a fresh two-mode register so the
/// caller's labels (which may collide) never matter.
fn pair_on_internal_register(signal: &PureState, reference: &PureState) -> Result<PureState> {
    for (name, s) in [("signal", signal), ("reference", reference)] {
        if s.register().len() != 1 {
            return Err(Error::InvalidConfig(format!(
                "{name} must be a single-mode state, got {} modes",
                s.register().len()
            )));
        }
    }
    let cutoff = signal.register().cutoff().max(reference.register().cutoff());
    let rebuild = |s: &PureState, label: &str| {
        PureState::from_terms(
            ModeRegister::new([label], cutoff).expect("internal label"),
            s.terms().map(|(occ, amp)| (occ.clone(), *amp)),
        )
        .map(|st| st.with_leakage(s.truncation_leakage()))
    };
    rebuild(signal, SIGNAL)?.tensor(&rebuild(reference, REFERENCE)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{coherent_state, vacuum_state};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn wave_state_is_unit_norm_and_self_overlapping() {
        let w = wave_basis_state(WavePhase::new(0.4), "m", 2).unwrap();
        assert!((w.norm_sq() - 1.0).abs() < 1e-15);
        assert!((w.inner_product(&w).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn opposite_phases_are_orthogonal() {
        for alpha in [0.0, 0.7, 2.9, 4.4] {
            let w = wave_basis_state(WavePhase::new(alpha), "m", 2).unwrap();
            let w_pi = wave_basis_state(WavePhase::new(alpha + PI), "m", 2).unwrap();
            assert!(w.inner_product(&w_pi).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn zero_phase_wave_state_amplitudes() {
        let w = wave_basis_state(WavePhase::new(0.0), "m", 2).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!((w.amplitude(&vec![0u8].into()) - h).norm() < 1e-15);
        assert!((w.amplitude(&vec![1u8].into()) - h).norm() < 1e-15);
    }

    #[test]
    fn wave_state_detects_with_half_probability() {
        let w = wave_basis_state(WavePhase::new(1.3), "m", 2).unwrap();
        let (_, p) = w.project(|occ| occ.0[0] == 1);
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn phase_canonicalization() {
        let a = WavePhase::new(0.1);
        let b = WavePhase::new(0.1 + TAU);
        assert!((a.value() - b.value()).abs() < 1e-12);
        let c = WavePhase::new(-0.1);
        assert!((c.value() - (TAU - 0.1)).abs() < 1e-12);
        assert!(c.value() < TAU);
    }

    #[test]
    fn measurement_of_matched_wave_states() {
        // alpha - beta = -pi/2 maximizes p_c at 1/2; +pi/2 nulls it.
        let beta = 0.8;
        for (delta, expected_c) in [(-FRAC_PI_2, 0.5), (FRAC_PI_2, 0.0)] {
            let sig = wave_basis_state(WavePhase::new(beta + delta), "s", 2).unwrap();
            let rf = wave_basis_state(WavePhase::new(beta), "r", 2).unwrap();
            let out = wave_measurement(&sig, &rf).unwrap();
            assert!((out.p_c - expected_c).abs() < 1e-12, "delta = {delta}");
            assert!((out.p_d - (0.5 - expected_c)).abs() < 1e-12);
            assert!((out.p_vacuum - 0.25).abs() < 1e-12);
            assert!((out.p_two_photon - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_of_vacuum_inputs() {
        let vac = |m: &str| vacuum_state(ModeRegister::new([m], 2).unwrap());
        let out = wave_measurement(&vac("s"), &vac("r")).unwrap();
        assert_eq!(out.p_vacuum, 1.0);
        assert_eq!(out.p_c, 0.0);
        assert_eq!(out.p_d, 0.0);
        assert_eq!(out.p_two_photon, 0.0);
    }

    #[test]
    fn measurement_accepts_colliding_labels() {
        let sig = wave_basis_state(WavePhase::new(0.2), "m", 2).unwrap();
        let rf = wave_basis_state(WavePhase::new(0.9), "m", 2).unwrap();
        assert!(wave_measurement(&sig, &rf).is_ok());
    }

    #[test]
    fn coherent_reference_outcome_partitions_unity() {
        let sig = wave_basis_state(WavePhase::new(0.3), "s", 6).unwrap();
        let rf = coherent_state(0.4, 1.1, "r", 6).unwrap();
        let out = wave_measurement(&sig, &rf).unwrap();
        assert!((out.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entangled_pair_is_diagonal_in_the_wave_basis() {
        // the analysis phase alpha is arbitrary: same diagonal form on a
        // 16-point grid
        let phi = 0.9;
        let s = crate::experiment::build_entangled_source(phi, 2).unwrap();
        for k in 0..16 {
            let alpha = WavePhase::new(k as f64 / 16.0 * TAU);
            let m = particle_to_wave_amplitudes(&s, alpha, phi).unwrap();
            assert!((m[0][0].norm() - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((m[1][1].norm() - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!(m[0][1].norm() < 1e-12);
            assert!(m[1][0].norm() < 1e-12);
            // relative sign between the two diagonal amplitudes is -1
            let ratio = m[1][1] / m[0][0];
            assert!((ratio - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn product_vacuum_spreads_evenly_over_the_wave_basis() {
        let reg = ModeRegister::new(["a", "b"], 2).unwrap();
        let vv = vacuum_state(reg);
        let m = particle_to_wave_amplitudes(&vv, WavePhase::new(0.6), 0.0).unwrap();
        for row in &m {
            for amp in row {
                assert!((amp.norm() - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_photon_occupation_is_rejected() {
        let reg = ModeRegister::new(["a", "b"], 2).unwrap();
        let s = PureState::from_terms(reg, [(vec![2u8, 0], Complex64::ONE)]).unwrap();
        assert!(matches!(
            particle_to_wave_amplitudes(&s, WavePhase::new(0.0), 0.0),
            Err(Error::BeyondWaveSpace(_))
        ));
    }

    /// Rebuild the Fock amplitudes from the wave-basis matrix.
    fn reconstruct(m: &[[Complex64; 2]; 2], alpha: WavePhase, phi: f64) -> PureState {
        let reg = ModeRegister::new(["a", "b"], 2).unwrap();
        let beta = alpha.shifted(-phi);
        let mut acc = PureState::zero(reg.clone());
        for (i, &a) in [alpha, alpha.conjugate()].iter().enumerate() {
            for (j, &b) in [beta, beta.conjugate()].iter().enumerate() {
                let basis = wave_basis_state(a, "a", 2)
                    .unwrap()
                    .tensor(&wave_basis_state(b, "b", 2).unwrap())
                    .unwrap();
                let scaled: Vec<_> = basis
                    .terms()
                    .map(|(occ, amp)| (occ.clone(), amp * m[i][j]))
                    .collect();
                let part = PureState::from_terms(reg.clone(), scaled).unwrap();
                acc = PureState::from_terms(
                    reg.clone(),
                    acc.terms()
                        .chain(part.terms())
                        .map(|(o, a)| (o.clone(), *a)),
                )
                .unwrap();
            }
        }
        acc
    }

    proptest! {
        /// p_c + p_d = 1/2 for wave-state inputs, any phase difference.
        #[test]
        fn fringe_law(alpha in 0.0..TAU, beta in 0.0..TAU) {
            let sig = wave_basis_state(WavePhase::new(alpha), "s", 2).unwrap();
            let rf = wave_basis_state(WavePhase::new(beta), "r", 2).unwrap();
            let out = wave_measurement(&sig, &rf).unwrap();
            prop_assert!((out.p_c + out.p_d - 0.5).abs() < 1e-12);
            prop_assert!((out.total() - 1.0).abs() < 1e-12);
        }

        /// Swapping the sign of the phase difference swaps the ports.
        #[test]
        fn port_antisymmetry(delta in -PI..PI, base in 0.0..TAU) {
            let rf = wave_basis_state(WavePhase::new(base), "r", 2).unwrap();
            let plus = wave_measurement(
                &wave_basis_state(WavePhase::new(base + delta), "s", 2).unwrap(),
                &rf,
            ).unwrap();
            let minus = wave_measurement(
                &wave_basis_state(WavePhase::new(base - delta), "s", 2).unwrap(),
                &rf,
            ).unwrap();
            prop_assert!((plus.p_c - minus.p_d).abs() < 1e-12);
        }

        /// Wave-basis decomposition followed by reconstruction is lossless.
        #[test]
        fn round_trip(alpha in 0.0..TAU, phi in 0.0..TAU, source_phi in 0.0..TAU) {
            let s = crate::experiment::build_entangled_source(source_phi, 2).unwrap();
            let m = particle_to_wave_amplitudes(&s, WavePhase::new(alpha), phi).unwrap();
            let back = reconstruct(&m, WavePhase::new(alpha), phi);
            for (occ, amp) in s.terms() {
                prop_assert!((back.amplitude(occ) - amp).norm() < 1e-12);
            }
        }
    }
}
