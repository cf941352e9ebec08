//! Complete projective measurement of one subsystem, with seeded sampling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::density::outer;
use super::state::{hadamard_minus, hadamard_plus, PureState};
use crate::{Error, Result, TOL_ALGEBRA};

/// A complete orthonormal measurement basis for a single subsystem of
/// dimension `dim`: exactly `dim` pairwise-orthonormal vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    dim: usize,
    vectors: Vec<PureState>,
}

impl MeasurementBasis {
    /// Builds a basis from its vectors, checking completeness and
    /// orthonormality within [`TOL_ALGEBRA`].
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidBasis("no vectors".into()));
        }
        let dim = vectors[0].total_dim();
        for v in &vectors {
            if v.dims().len() != 1 {
                return Err(Error::InvalidBasis(format!(
                    "basis vectors must live on a single subsystem, got dims {:?}",
                    v.dims()
                )));
            }
            if v.total_dim() != dim {
                return Err(Error::InvalidBasis("vectors of mixed dimension".into()));
            }
        }
        if vectors.len() != dim {
            return Err(Error::InvalidBasis(format!(
                "{} vectors cannot form a complete basis of dimension {dim}",
                vectors.len()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                let ip = vectors[i].inner(&vectors[j])?;
                let expected = if i == j { 1.0 } else { 0.0 };
                if (ip - Complex64::new(expected, 0.0)).norm() > TOL_ALGEBRA {
                    return Err(Error::InvalidBasis(format!(
                        "⟨v{i}|v{j}⟩ = {ip} violates orthonormality"
                    )));
                }
            }
        }
        Ok(MeasurementBasis { dim, vectors })
    }

    /// The computational basis of a `dim`-level subsystem.
    pub fn computational(dim: usize) -> Result<Self> {
        let vectors = (0..dim)
            .map(|i| PureState::basis_ket(vec![dim], i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    /// The single-qubit Hadamard basis {H|0⟩, H|1⟩}.
    pub fn hadamard() -> Self {
        Self::new(vec![hadamard_plus(), hadamard_minus()]).expect("valid")
    }

    /// Subsystem dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Basis vectors in outcome order.
    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }
}

/// Result of one projective measurement: which outcome occurred, its Born
/// probability, and the collapsed (renormalized) post-measurement state of
/// the full system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub outcome_index: usize,
    pub probability: f64,
    pub post_state: PureState,
}

/// Born probabilities of each basis outcome when measuring `subsystem` of
/// `state` in `basis`, computed analytically (no sampling).
pub fn outcome_probabilities(
    state: &PureState,
    subsystem: usize,
    basis: &MeasurementBasis,
) -> Result<Vec<f64>> {
    let projected = project_all(state, subsystem, basis)?;
    Ok(projected
        .iter()
        .map(|amps| amps.iter().map(|a| a.norm_sqr()).sum())
        .collect())
}

/// All branches of a measurement at once: for every outcome, its Born
/// probability and the collapsed state (`None` when the probability is
/// exactly zero and there is nothing to renormalize).
pub fn measurement_branches(
    state: &PureState,
    subsystem: usize,
    basis: &MeasurementBasis,
) -> Result<Vec<(f64, Option<PureState>)>> {
    let projected = project_all(state, subsystem, basis)?;
    projected
        .into_iter()
        .map(|amps| {
            let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if p > 0.0 {
                let post = PureState::from_unnormalized(state.dims().to_vec(), amps)?;
                Ok((p, Some(post)))
            } else {
                Ok((p, None))
            }
        })
        .collect()
}

/// Measures one subsystem in the given basis: samples an outcome with its
/// Born probability using the supplied RNG (one `f64` draw per call, so
/// outcome sequences are reproducible given the seed), and collapses the
/// state to the renormalized projection.
pub fn measure<R: Rng + ?Sized>(
    state: &PureState,
    subsystem: usize,
    basis: &MeasurementBasis,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let projected = project_all(state, subsystem, basis)?;
    let probs: Vec<f64> = projected
        .iter()
        .map(|amps| amps.iter().map(|a| a.norm_sqr()).sum())
        .collect();

    let draw: f64 = rng.random();
    let mut chosen = None;
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            chosen = Some(k);
            break;
        }
    }
    // Guard against the total falling a few ulps short of the draw.
    let outcome_index = chosen.unwrap_or_else(|| {
        probs
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("probabilities sum to 1, at least one is positive")
    });

    let post_state =
        PureState::from_unnormalized(state.dims().to_vec(), projected[outcome_index].clone())?;
    Ok(MeasurementRecord {
        outcome_index,
        probability: probs[outcome_index],
        post_state,
    })
}

/// Unnormalized projections of `state` onto every outcome of `basis` at
/// `subsystem`.
fn project_all(
    state: &PureState,
    subsystem: usize,
    basis: &MeasurementBasis,
) -> Result<Vec<Vec<Complex64>>> {
    if subsystem >= state.dims().len() {
        return Err(Error::InvalidSubsystem(format!(
            "subsystem {subsystem} out of range for {} subsystems",
            state.dims().len()
        )));
    }
    if basis.dim() != state.dims()[subsystem] {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} does not match subsystem dimension {}",
            basis.dim(),
            state.dims()[subsystem]
        )));
    }
    basis
        .vectors()
        .iter()
        .map(|b| {
            let projector: DMatrix<Complex64> = outer(b);
            state.apply_to_subsystems(&projector, &[subsystem])
        })
        .collect()
}
