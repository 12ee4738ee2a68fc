//! Unitary optical primitives and state sources.
//!
//! The beam splitter acts on creation operators as
//!
//! ```text
//! a_dag -> r sin(theta) c_dag + cos(theta) d_dag
//! b_dag -> cos(theta) c_dag + r sin(theta) d_dag
//! ```
//!
//! with reflection phase `r = i`; unitarity of this family forces `r` purely
//! imaginary, and the balanced splitter (`theta = pi/4`) becomes
//! `a_dag -> (i c_dag + d_dag)/sqrt(2)`, `b_dag -> (c_dag + i d_dag)/sqrt(2)`.
//! Port `a` is therefore the input that reflects into the first output with
//! phase `i`. Every interference statistic downstream of this crate depends
//! on that sign placement, so it is fixed here once.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::fock::{ModeRegister, OccupationBasisState, PureState};
use crate::{Error, Result};

/// Reflection phase of the splitter family; `|i| = 1`.
pub const REFLECT_PHASE: Complex64 = Complex64::new(0.0, 1.0);

/// A two-mode splitter with tunable mixing angle.
///
/// `theta = pi/4` is the balanced 50:50 case used everywhere in this crate;
/// the angle is exposed for completeness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    /// Amplitude onto the crossing output, `cos(theta)`.
    transmit: f64,
    /// Amplitude onto the reflecting output, `sin(theta)` (carries phase `i`).
    reflect: f64,
}

impl BeamSplitter {
    /// The 50:50 splitter, with both amplitudes exactly `1/sqrt(2)`.
    pub fn balanced() -> Self {
        Self {
            transmit: FRAC_1_SQRT_2,
            reflect: FRAC_1_SQRT_2,
        }
    }

    /// A splitter with mixing angle `theta` (transmission `cos^2(theta)`).
    pub fn with_mixing_angle(theta: f64) -> Self {
        Self {
            transmit: theta.cos(),
            reflect: theta.sin(),
        }
    }

    /// The 2x2 creation-operator map; columns are inputs `(a, b)`, rows
    /// outputs `(c, d)`.
    pub fn mode_matrix(&self) -> [[Complex64; 2]; 2] {
        let rs = REFLECT_PHASE * self.reflect;
        let t = Complex64::new(self.transmit, 0.0);
        [[rs, t], [t, rs]]
    }

    /// Apply the splitter to modes `in_a` and `in_b` of `state`.
    ///
    /// The two input slots are renamed to `out_c` and `out_d` (outputs may
    /// alias the inputs). Each basis term expands through the binomial action
    /// on `a_dag^m b_dag^n`; every output term keeps the source term's total
    /// photon number. Terms pushed over the register cutoff are accumulated
    /// into the state's truncation leakage, never renormalized away.
    pub fn apply(
        &self,
        state: &PureState,
        in_a: &str,
        in_b: &str,
        out_c: &str,
        out_d: &str,
    ) -> Result<PureState> {
        if in_a == in_b {
            return Err(Error::ModeCollision(in_a.to_string()));
        }
        if out_c == out_d {
            return Err(Error::ModeCollision(out_c.to_string()));
        }
        let ia = state.index_of(in_a)?;
        let ib = state.index_of(in_b)?;

        // Relabel the two input slots; collisions with unrelated modes error.
        let renamed = state.relabel(ia, out_c)?.relabel(ib, out_d)?;
        let register = renamed.register().clone();

        let rs = REFLECT_PHASE * self.reflect; // i sin(theta)
        let t = self.transmit; // cos(theta)

        let max_n = 2 * register.cutoff() as u32;
        let fact = factorials(max_n);

        let mut raw: BTreeMap<OccupationBasisState, Complex64> = BTreeMap::new();
        for (occ, amp) in renamed.terms() {
            let m = occ.0[ia] as u32;
            let n = occ.0[ib] as u32;
            for j in 0..=m {
                for k in 0..=n {
                    let p = j + k;
                    let q = m + n - p;
                    // (i s)^(j + n - k) t^(m - j + k) C(m,j) C(n,k) sqrt(p! q! / m! n!)
                    let coef = rs.powu(j + (n - k))
                        * t.powi((m - j + k) as i32)
                        * binomial(m, j, &fact)
                        * binomial(n, k, &fact)
                        * (fact[p as usize] * fact[q as usize]
                            / (fact[m as usize] * fact[n as usize]))
                        .sqrt();
                    let mut out = occ.0.clone();
                    // p, q <= 2 * cutoff <= 255 for cutoff <= 127
                    out[ia] = p as u8;
                    out[ib] = q as u8;
                    *raw.entry(OccupationBasisState(out))
                        .or_insert(Complex64::ZERO) += amp * coef;
                }
            }
        }
        Ok(PureState::collect_truncated(
            register,
            raw,
            state.truncation_leakage(),
            state.prune_threshold(),
        ))
    }
}

/// Balanced 50:50 splitter on `(in_a, in_b) -> (out_c, out_d)`.
pub fn apply_beam_splitter(
    state: &PureState,
    in_a: &str,
    in_b: &str,
    out_c: &str,
    out_d: &str,
) -> Result<PureState> {
    BeamSplitter::balanced().apply(state, in_a, in_b, out_c, out_d)
}

/// Phase shifter: each term gains `exp(i n phi)` where `n` is the photon
/// count in `mode`. Norm is preserved exactly.
pub fn apply_phase_shift(state: &PureState, mode: &str, phi: f64) -> Result<PureState> {
    let idx = state.index_of(mode)?;
    Ok(state.map_terms(|occ, amp| {
        amp * Complex64::from_polar(1.0, occ.0[idx] as f64 * phi)
    }))
}

/// Weak coherent state `|gamma e^{i alpha}>` truncated at `cutoff`.
///
/// Amplitudes are `e^{-gamma^2/2} gamma^n e^{i n alpha} / sqrt(n!)` for
/// `n <= cutoff`; the discarded Poisson tail is recorded as truncation
/// leakage, so `norm_sq + leakage = 1` exactly at construction.
pub fn coherent_state(gamma: f64, alpha: f64, mode: &str, cutoff: u8) -> Result<PureState> {
    if gamma < 0.0 {
        return Err(Error::NegativeAmplitude(gamma));
    }
    let register = ModeRegister::new([mode], cutoff)?;
    let envelope = (-0.5 * gamma * gamma).exp();
    let mut terms = Vec::with_capacity(cutoff as usize + 1);
    let mut kept = 0.0;
    let mut magnitude = envelope; // gamma^n / sqrt(n!) running value
    for n in 0..=cutoff as u32 {
        if n > 0 {
            magnitude *= gamma / (n as f64).sqrt();
        }
        kept += magnitude * magnitude;
        terms.push((
            vec![n as u8],
            Complex64::from_polar(magnitude, n as f64 * alpha),
        ));
    }
    // The Poisson tail beyond the cutoff is the leakage, known in closed form.
    Ok(PureState::from_terms(register, terms)?.with_leakage(1.0 - kept))
}

/// One photon in `mode`, vacuum nowhere else (single-mode register).
pub fn single_photon_state(mode: &str, cutoff: u8) -> Result<PureState> {
    let register = ModeRegister::new([mode], cutoff)?;
    PureState::from_terms(register, [(vec![1u8], Complex64::ONE)])
}

/// The vacuum over an arbitrary register.
pub fn vacuum_state(register: ModeRegister) -> PureState {
    let occ = vec![0u8; register.len()];
    PureState::from_terms(register, [(occ, Complex64::ONE)])
        .expect("vacuum occupations are always valid")
}

fn factorials(max_n: u32) -> Vec<f64> {
    let mut f = Vec::with_capacity(max_n as usize + 1);
    f.push(1.0);
    for n in 1..=max_n as usize {
        f.push(f[n - 1] * n as f64);
    }
    f
}

fn binomial(n: u32, k: u32, fact: &[f64]) -> f64 {
    fact[n as usize] / (fact[k as usize] * fact[(n - k) as usize])
}
