//! Sparse pure states of multimode bosonic fields in a truncated Fock space.
//!
//! A [`PureState`] maps occupation vectors (one photon count per registered
//! mode) to complex amplitudes. Every mode shares a single per-mode occupation
//! `cutoff`; probability mass pushed beyond the cutoff by an operation is
//! accumulated in [`PureState::truncation_leakage`] instead of being silently
//! renormalized away. All operations are pure functions over immutable values.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::{Error, Result};

/// Squared-magnitude threshold below which stored amplitudes are dropped.
///
/// Pruned mass is discarded (not added to leakage); at this threshold the
/// total mass removed stays below 1e-15 on any workload this crate runs.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-30;

/// An ordered set of distinct mode labels plus the shared occupation cutoff.
///
/// Labels are opaque strings; their order is fixed at construction and
/// defines the layout of every [`OccupationBasisState`] over this register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegister {
    labels: Vec<String>,
    cutoff: u8,
}

/// Largest supported per-mode cutoff; keeps factorial ratios finite in f64.
pub const MAX_CUTOFF: u8 = 64;

impl ModeRegister {
    /// Build a register from distinct labels and a per-mode cutoff.
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>, cutoff: u8) -> Result<Self> {
        if cutoff > MAX_CUTOFF {
            return Err(Error::InvalidConfig(format!(
                "cutoff {cutoff} exceeds the supported maximum {MAX_CUTOFF}"
            )));
        }
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::ModeCollision(l.clone()));
            }
        }
        Ok(Self { labels, cutoff })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cutoff(&self) -> u8 {
        self.cutoff
    }

    /// Position of `label` in the register, if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn require_index(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }
}

/// One photon count per mode, in register order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationBasisState(pub Vec<u8>);

impl OccupationBasisState {
    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    /// Total photon number across all modes.
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }
}

impl From<Vec<u8>> for OccupationBasisState {
    fn from(v: Vec<u8>) -> Self {
        Self(v)
    }
}

/// A pure multimode state: sparse complex amplitudes over occupation vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    register: ModeRegister,
    terms: BTreeMap<OccupationBasisState, Complex64>,
    truncation_leakage: f64,
    prune_threshold: f64,
}

impl PureState {
    /// The zero state (no terms) over `register`.
    pub fn zero(register: ModeRegister) -> Self {
        Self {
            register,
            terms: BTreeMap::new(),
            truncation_leakage: 0.0,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }

    /// Build a state from explicit `(occupations, amplitude)` terms.
    ///
    /// Occupation vectors must match the register length and respect the
    /// cutoff. Duplicate occupation vectors have their amplitudes summed.
    pub fn from_terms<I, O>(register: ModeRegister, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (O, Complex64)>,
        O: Into<OccupationBasisState>,
    {
        let mut state = Self::zero(register);
        for (occ, amp) in terms {
            let occ = occ.into();
            if occ.0.len() != state.register.len() {
                return Err(Error::InvalidOccupation(format!(
                    "expected {} modes, got {}",
                    state.register.len(),
                    occ.0.len()
                )));
            }
            if let Some(&n) = occ.0.iter().find(|&&n| n > state.register.cutoff) {
                return Err(Error::InvalidOccupation(format!(
                    "occupation {} exceeds cutoff {}",
                    n,
                    state.register.cutoff
                )));
            }
            *state.terms.entry(occ).or_insert(Complex64::ZERO) += amp;
        }
        state.prune();
        Ok(state)
    }

    /// Replace the prune threshold and re-prune.
    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self.prune();
        self
    }

    pub fn register(&self) -> &ModeRegister {
        &self.register
    }

    /// Squared probability mass discarded by the occupation cutoff so far.
    pub fn truncation_leakage(&self) -> f64 {
        self.truncation_leakage
    }

    /// Stored terms in deterministic (occupation-lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&OccupationBasisState, &Complex64)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Amplitude of one basis state (zero if absent).
    pub fn amplitude(&self, occ: &OccupationBasisState) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or(Complex64::ZERO)
    }

    /// Sum of squared amplitude magnitudes.
    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Rescale to unit norm. The leakage estimate is rescaled by the same
    /// factor so it stays in the units of the returned state's norm.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n <= 1e-24 {
            return Err(Error::DegenerateState(n));
        }
        let scale = 1.0 / n.sqrt();
        let mut out = self.clone();
        for amp in out.terms.values_mut() {
            *amp *= scale;
        }
        out.truncation_leakage /= n;
        out.prune();
        Ok(out)
    }

    /// Tensor product. Registers must carry disjoint labels and equal cutoffs;
    /// the combined register concatenates `self`'s labels before `other`'s.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for l in other.register.labels() {
            if self.register.index_of(l).is_some() {
                return Err(Error::ModeCollision(l.clone()));
            }
        }
        if self.register.cutoff != other.register.cutoff {
            return Err(Error::RegisterMismatch(format!(
                "cutoffs differ: {} vs {}",
                self.register.cutoff, other.register.cutoff
            )));
        }
        let mut labels = self.register.labels.clone();
        labels.extend(other.register.labels.iter().cloned());
        let register = ModeRegister::new(labels, self.register.cutoff)?;

        let mut out = Self::zero(register);
        out.prune_threshold = self.prune_threshold.min(other.prune_threshold);
        for (occ1, a1) in &self.terms {
            for (occ2, a2) in &other.terms {
                let mut occ = occ1.0.clone();
                occ.extend_from_slice(&occ2.0);
                out.terms.insert(OccupationBasisState(occ), a1 * a2);
            }
        }
        // leakage of a product: 1 - (1 - l1)(1 - l2)
        out.truncation_leakage = 1.0
            - (1.0 - self.truncation_leakage) * (1.0 - other.truncation_leakage);
        out.prune();
        Ok(out)
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    ///
    /// Both states must share an identical register (labels, order, cutoff).
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.register != other.register {
            return Err(Error::RegisterMismatch(
                "inner product needs identical registers".into(),
            ));
        }
        let mut acc = Complex64::ZERO;
        for (occ, a1) in &self.terms {
            if let Some(a2) = other.terms.get(occ) {
                acc += a1.conj() * a2;
            }
        }
        Ok(acc)
    }

    /// Project onto the basis states selected by `pattern`.
    ///
    /// Returns the unnormalized post-projection state together with the
    /// outcome probability (its squared norm). An empty selection yields the
    /// zero state with probability 0. The projected state carries no leakage
    /// estimate: discarded mass cannot be attributed to one outcome.
    pub fn project<F>(&self, pattern: F) -> (Self, f64)
    where
        F: Fn(&OccupationBasisState) -> bool,
    {
        let mut out = Self::zero(self.register.clone());
        out.prune_threshold = self.prune_threshold;
        let mut prob = 0.0;
        for (occ, amp) in &self.terms {
            if pattern(occ) {
                prob += amp.norm_sqr();
                out.terms.insert(occ.clone(), *amp);
            }
        }
        (out, prob)
    }

    fn prune(&mut self) {
        let t = self.prune_threshold;
        self.terms.retain(|_, amp| amp.norm_sqr() >= t);
    }

    /// Internal: rebuild from an accumulated term map, moving every term with
    /// an occupation above the cutoff into the leakage tally.
    pub(crate) fn collect_truncated(
        register: ModeRegister,
        raw: BTreeMap<OccupationBasisState, Complex64>,
        mut leakage: f64,
        prune_threshold: f64,
    ) -> Self {
        let cutoff = register.cutoff;
        let mut terms = BTreeMap::new();
        for (occ, amp) in raw {
            if occ.0.iter().any(|&n| n > cutoff) {
                leakage += amp.norm_sqr();
            } else {
                terms.insert(occ, amp);
            }
        }
        let mut state = Self {
            register,
            terms,
            truncation_leakage: leakage,
            prune_threshold,
        };
        state.prune();
        state
    }

    pub(crate) fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    /// Internal: overwrite the leakage tally (used by sources that know the
    /// exact discarded mass analytically).
    pub(crate) fn with_leakage(mut self, leakage: f64) -> Self {
        self.truncation_leakage = leakage;
        self
    }

    pub(crate) fn map_terms<F>(&self, f: F) -> Self
    where
        F: Fn(&OccupationBasisState, Complex64) -> Complex64,
    {
        let mut out = self.clone();
        out.terms = self
            .terms
            .iter()
            .map(|(occ, amp)| (occ.clone(), f(occ, *amp)))
            .collect();
        out.prune();
        out
    }

    pub(crate) fn relabel(&self, index: usize, new_label: &str) -> Result<Self> {
        // Renaming to itself is a no-op; otherwise the new name must be free.
        if self.register.labels[index] != new_label && self.register.index_of(new_label).is_some() {
            return Err(Error::ModeCollision(new_label.to_string()));
        }
        let mut out = self.clone();
        out.register.labels[index] = new_label.to_string();
        Ok(out)
    }

    pub(crate) fn index_of(&self, label: &str) -> Result<usize> {
        self.register.require_index(label)
    }
}

/// Debug text form: one line per term, `<n1,n2,...> re im`, occupations in
/// register order, terms in deterministic lexicographic order.
impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (occ, amp) in &self.terms {
            let ns: Vec<String> = occ.0.iter().map(|n| n.to_string()).collect();
            writeln!(f, "<{}> {} {}", ns.join(","), amp.re, amp.im)?;
        }
        Ok(())
    }
}
