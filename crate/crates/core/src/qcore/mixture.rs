//! Probabilistic mixtures of pure states and their purification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{bell_states, hadamard_minus, hadamard_plus, ket0, ket1, tensor, PureState};
use crate::{Error, Result, TOL_ALGEBRA};

/// A mixed state given as an explicit ensemble: a list of pure states with
/// probabilities that sum to 1 within [`TOL_ALGEBRA`]. All member states
/// share the same subsystem dimensions.
///
/// Members may repeat and need not be orthogonal; no deduplication is
/// performed. Zero-probability entries are legal and only dropped when a
/// purification is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    entries: Vec<(PureState, f64)>,
}

impl Mixture {
    /// Builds a mixture, validating probabilities and member dimensions.
    pub fn new(entries: Vec<(PureState, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyMixture);
        }
        let dims = entries[0].0.dims().to_vec();
        for (state, p) in &entries {
            if state.dims() != dims {
                return Err(Error::InvalidMixture(format!(
                    "member dims {:?} differ from {:?}",
                    state.dims(),
                    dims
                )));
            }
            if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                return Err(Error::InvalidMixture(format!(
                    "probability {p} outside [0, 1]"
                )));
            }
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > TOL_ALGEBRA {
            return Err(Error::InvalidMixture(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Mixture { entries })
    }

    /// Equal-probability mixture of the given states.
    pub fn uniform(states: Vec<PureState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyMixture);
        }
        let p = 1.0 / states.len() as f64;
        Self::new(states.into_iter().map(|s| (s, p)).collect())
    }

    /// The ensemble entries in construction order.
    pub fn entries(&self) -> &[(PureState, f64)] {
        &self.entries
    }

    /// Subsystem dimensions shared by every member.
    pub fn dims(&self) -> &[usize] {
        self.entries[0].0.dims()
    }

    /// Number of ensemble entries (including zero-probability ones).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; mixtures cannot be empty.
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Builds a pure state on a larger space whose left-register trace-out
/// reproduces the mixture's density matrix: `Σ √pᵢ |Ψᵢ⟩|Φᵢ⟩`, with the flag
/// states `|Φᵢ⟩` fixed to the computational basis of a fresh register of
/// dimension k (the number of entries with nonzero probability).
///
/// The result lives on dims `[d, k]` where d is the total dimension of the
/// mixture's own space. Zero-probability entries are dropped so no flag
/// column is left with an undefined phase.
pub fn purify(m: &Mixture) -> Result<PureState> {
    let live: Vec<&(PureState, f64)> = m.entries().iter().filter(|(_, p)| *p > 0.0).collect();
    if live.is_empty() {
        return Err(Error::InvalidMixture(
            "all probabilities are zero; nothing to purify".into(),
        ));
    }
    let d = live[0].0.total_dim();
    let k = live.len();
    let mut amplitudes = vec![Complex64::ZERO; d * k];
    for (j, (state, p)) in live.iter().enumerate() {
        let w = p.sqrt();
        for (i, a) in state.amplitudes().iter().enumerate() {
            amplitudes[i * k + j] += a * w;
        }
    }
    PureState::new(vec![d, k], amplitudes)
}

/// The coin ensemble {(|0⟩, ½), (|1⟩, ½)}: a classical random bit.
pub fn coin_mixture() -> Mixture {
    Mixture::new(vec![(ket0(), 0.5), (ket1(), 0.5)]).expect("valid")
}

/// The Hadamard coin ensemble {(H|0⟩, ½), (H|1⟩, ½)}. Looks different from
/// [`coin_mixture`], has the same density matrix.
pub fn hadamard_coin_mixture() -> Mixture {
    Mixture::new(vec![(hadamard_plus(), 0.5), (hadamard_minus(), 0.5)]).expect("valid")
}

/// Three non-orthogonal single-qubit states at Bloch angles 0, ±120°,
/// mixed equally: {(|0⟩, ⅓), (½|0⟩ + (√3/2)|1⟩, ⅓), (½|0⟩ − (√3/2)|1⟩, ⅓)}.
/// Yet another ensemble for the maximally mixed qubit.
pub fn trine_mixture() -> Mixture {
    let h = 3f64.sqrt() / 2.0;
    Mixture::uniform(vec![
        ket0(),
        PureState::qubit(0.5, h).expect("valid"),
        PureState::qubit(0.5, -h).expect("valid"),
    ])
    .expect("valid")
}

/// The half-penny ensemble {(|01⟩, ½), (|10⟩, ½)}: classically
/// anticorrelated bits, not a singlet.
pub fn classical_pair_mixture() -> Mixture {
    Mixture::new(vec![
        (tensor(&ket0(), &ket1()), 0.5),
        (tensor(&ket1(), &ket0()), 0.5),
    ])
    .expect("valid")
}

/// Uniform mixture of the four maximally entangled two-qubit states.
pub fn bell_mixture() -> Mixture {
    Mixture::uniform(bell_states()).expect("valid")
}

/// Uniform mixture of the four classical two-bit product states.
pub fn classical_two_bit_mixture() -> Mixture {
    Mixture::uniform(
        (0..4)
            .map(|i| PureState::basis_ket(vec![2, 2], i).expect("valid"))
            .collect(),
    )
    .expect("valid")
}
