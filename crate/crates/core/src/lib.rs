//! Desk-scale simulation toolkit for two kinds of "impossible" correlations.
//!
//! The crate has two halves that share nothing but a report format:
//!
//! * a dense complex-vector quantum core ([`qcore`]) with mixtures, density
//!   matrices, purification and seeded Born-rule measurement, plus singlet
//!   phenomenology on top of it ([`entanglement`]);
//! * a strictly local, strictly deterministic branching engine
//!   ([`parallel_lives`]) in which each agent's world splits into weighted
//!   bubbles on every box press, and a deterministic perfect matching at
//!   meeting time reproduces PR-box statistics, while a causal auditor
//!   ([`locality`]) certifies from the event log that nothing crossed
//!   between the sites beforehand.
//!
//! The [`chsh`] module ties the two together: it computes the CHSH
//! combination S for exhaustively enumerated deterministic local strategies
//! (max 2), for the singlet under optimized analyzer angles (max 2√2), and
//! for the branching engine (exactly 4), along with the matching game
//! success probabilities 0.75 / cos²(π/8) / 1.0.

pub mod chsh;
pub mod entanglement;
pub mod locality;
pub mod parallel_lives;
pub mod qcore;
pub mod report;

use rand_chacha::ChaCha12Rng;

/// Tolerance for algebraic identities on states and density matrices
/// (normalization, Hermiticity, trace, entrywise equality).
///
/// Matrices in this crate are at most 36×36, so double precision leaves
/// several digits of headroom over 1e-10.
pub const TOL_ALGEBRA: f64 = 1e-10;

/// Tolerance for eigenvalue-based tests (purity, positive semidefiniteness).
/// Iterative eigensolvers accumulate more rounding than direct algebra.
pub const TOL_EIGEN: f64 = 1e-8;

/// Tolerance for orthonormality of analyzer bases built from an angle.
/// These are exact by construction up to a couple of ulps.
pub const TOL_BASIS: f64 = 1e-12;

/// Tolerance for bubble-weight bookkeeping. Weights are dyadic rationals,
/// so sums are exact; the slack only covers pathological round counts.
pub const TOL_WEIGHT: f64 = 1e-12;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A state vector failed validation (length, finiteness, normalization).
    #[error("invalid pure state: {0}")]
    InvalidState(String),
    /// A mixture failed validation (probabilities, member dims).
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    /// A density matrix failed validation (Hermiticity, trace, positivity).
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    /// A measurement basis failed validation (orthonormality, dimension).
    #[error("invalid measurement basis: {0}")]
    InvalidBasis(String),
    /// Two objects that must share subsystem dimensions do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A subsystem index is out of range, repeated, or the set is empty.
    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),
    /// An operation requiring at least one mixture entry got none.
    #[error("empty mixture")]
    EmptyMixture,
    /// A bit-valued input was not 0 or 1.
    #[error("invalid bit value {0}; expected 0 or 1")]
    InvalidBit(u8),
    /// Two agent worlds must have completed the same number of rounds.
    #[error("round count mismatch: one agent completed {0} rounds, the other {1}")]
    RoundCountMismatch(usize, usize),
    /// A record had no completed rounds where at least one was required.
    #[error("record has no completed rounds")]
    EmptyRecord,
    /// An event log failed structural validation.
    #[error("malformed event log: {0}")]
    MalformedLog(String),
    /// A signal speed must be strictly positive and finite.
    #[error("invalid signal speed {0}")]
    InvalidSignalSpeed(f64),
    /// A requested spacetime schedule cannot satisfy the spacelike constraint.
    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),
    /// A sampled estimate was requested with too few samples to be defined.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// The canonical seeded random stream used everywhere in the toolkit.
///
/// ChaCha is stable across platforms and library versions, which is what
/// makes byte-identical reports possible. Callers running concurrent
/// sampled work must derive one independent stream per task (for example
/// with [`seeded_rng`] on distinct seeds), never share one.
pub type SeededRng = ChaCha12Rng;

/// Builds the canonical RNG for a 64-bit seed. There is deliberately no
/// wall-clock fallback anywhere in the crate.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    ChaCha12Rng::seed_from_u64(seed)
}
