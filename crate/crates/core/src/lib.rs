//! Linear-optics simulation in a truncated Fock space.
//!
//! The crate models pure multimode photon states as sparse maps from
//! occupation vectors to complex amplitudes, evolves them through beam
//! splitters and phase shifters, and builds on that engine:
//!
//! - [`fock`]: sparse state representation and algebra,
//! - [`optics`]: beam splitter, phase shifter, vacuum / single-photon /
//!   weak-coherent sources,
//! - [`wave`]: the vacuum/single-photon superposition basis and its
//!   interferometric measurement,
//! - [`experiment`]: a two-station interference circuit in which both
//!   parties measure a shared single photon against weak coherent
//!   references, with exact and closed-form coincidence statistics,
//! - [`bell`]: CHSH correlation analysis over joint-probability providers,
//! - [`sampling`]: seeded Monte Carlo shot generation and CHSH estimation.

pub mod bell;
pub mod experiment;
pub mod fock;
pub mod optics;
pub mod sampling;
pub mod wave;

pub use bell::{BellResult, ChshSettings};
pub use experiment::{ExperimentConfig, JointProbabilityTable};
pub use fock::{ModeRegister, OccupationBasisState, PureState};
pub use sampling::{CountRecord, ShotPlan};
pub use wave::{WaveMeasurementOutcome, WavePhase};

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A mode label was reused where distinct labels are required.
    #[error("mode label collision: {0}")]
    ModeCollision(String),
    /// A mode label is not present in the state's register.
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
    /// Two states were combined whose registers do not line up.
    #[error("register mismatch: {0}")]
    RegisterMismatch(String),
    /// An occupation vector violates the register shape or cutoff.
    #[error("invalid occupation pattern: {0}")]
    InvalidOccupation(String),
    /// Attempted to normalize a state with (near-)zero norm.
    #[error("cannot normalize near-zero state (norm_sq = {0:.3e})")]
    DegenerateState(f64),
    /// Coherent-state amplitude must be non-negative.
    #[error("coherent amplitude must be non-negative, got {0}")]
    NegativeAmplitude(f64),
    /// The wave basis spans occupations 0 and 1 only.
    #[error("wave-space representation requires occupations <= 1: {0}")]
    BeyondWaveSpace(String),
    /// A configuration failed validation before any simulation ran.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Truncation discarded more probability than the caller allowed.
    #[error("truncation leakage {leakage:.3e} exceeds budget {budget:.3e}; raise the cutoff")]
    TruncationExceeded { leakage: f64, budget: f64 },
    /// A joint table carries no coincidence weight, so it cannot be normalized.
    #[error("joint table has no coincidence weight to normalize (sum = {0:.3e})")]
    DegenerateNormalization(f64),
    /// A scan grid is too small for the requested operation.
    #[error("grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
    /// A shot plan must draw at least one shot.
    #[error("shot plan must draw at least one shot")]
    ZeroShots,
    /// A sampled setting pair produced no coincidences at all.
    #[error("setting pair {0} recorded zero coincidences; estimate is degenerate")]
    DegenerateEstimate(usize),
    /// A shot plan's reference phases do not realize the claimed setting pair.
    #[error("shot plan {index} does not realize setting pair ({alpha_prime}, {beta_prime})")]
    MismatchedPlan {
        index: usize,
        alpha_prime: f64,
        beta_prime: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
