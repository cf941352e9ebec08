//! Pure states: normalized complex amplitude vectors over a computational
//! basis of a composite system.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index::{strides, total_dim};
use crate::{Error, Result, TOL_ALGEBRA};

/// Complex amplitude. Finiteness is enforced wherever a state is built.
pub type Amplitude = Complex64;

/// A normalized complex amplitude vector over the computational basis of a
/// composite system with subsystem dimensions `dims`.
///
/// Invariants, enforced at construction:
/// * `amplitudes.len() == dims.iter().product()`,
/// * every amplitude is finite,
/// * the squared norm is 1 within [`TOL_ALGEBRA`].
///
/// Two states that differ by a global phase are distinct as vectors; all
/// physical comparisons go through density matrices, where the phase drops
/// out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<Amplitude>,
}

impl PureState {
    /// Builds a state from explicit amplitudes, validating all invariants.
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Amplitude>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidState(format!(
                "subsystem dimensions must be nonempty and positive, got {dims:?}"
            )));
        }
        if amplitudes.len() != total_dim(&dims) {
            return Err(Error::InvalidState(format!(
                "amplitude count {} does not match total dimension {}",
                amplitudes.len(),
                total_dim(&dims)
            )));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL_ALGEBRA {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sq} differs from 1 by more than {TOL_ALGEBRA}"
            )));
        }
        Ok(PureState { dims, amplitudes })
    }

    /// Builds a state by normalizing the given amplitudes. Fails on a
    /// (numerically) zero vector.
    pub fn from_unnormalized(dims: Vec<usize>, amplitudes: Vec<Amplitude>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || norm_sq <= 0.0 {
            return Err(Error::InvalidState(format!(
                "cannot normalize vector with squared norm {norm_sq}"
            )));
        }
        let scale = norm_sq.sqrt().recip();
        let scaled = amplitudes.into_iter().map(|a| a * scale).collect();
        Self::new(dims, scaled)
    }

    /// The computational basis state `|index⟩` of the composite space.
    pub fn basis_ket(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n = total_dim(&dims);
        if index >= n {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for dimension {n}"
            )));
        }
        let mut amplitudes = vec![Complex64::ZERO; n];
        amplitudes[index] = Complex64::ONE;
        Self::new(dims, amplitudes)
    }

    /// A single qubit with real amplitudes `(a0, a1)`.
    pub fn qubit(a0: f64, a1: f64) -> Result<Self> {
        Self::new(
            vec![2],
            vec![Complex64::new(a0, 0.0), Complex64::new(a1, 0.0)],
        )
    }

    /// Subsystem dimensions.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Flat amplitude vector, row-major over `dims`.
    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    /// Total dimension of the composite space.
    pub fn total_dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Euclidean norm (1 within tolerance, by construction).
    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "inner product between dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// True iff the two vectors agree entrywise within `tol` after aligning
    /// global phase on the largest amplitude of `self`.
    pub fn approx_eq_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        if self.dims != other.dims {
            return false;
        }
        let (k, _) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .expect("states are never empty");
        let phase = other.amplitudes[k] / self.amplitudes[k];
        let phase = if phase.norm() > 0.0 {
            phase / phase.norm()
        } else {
            return false;
        };
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    /// Applies a square operator to the listed target subsystems, leaving
    /// the rest untouched. The operator acts on the tensor product of the
    /// targets in the order given. The result is returned unnormalized, as
    /// a raw amplitude vector, so callers can use projectors as well as
    /// unitaries.
    pub fn apply_to_subsystems(
        &self,
        op: &DMatrix<Complex64>,
        targets: &[usize],
    ) -> Result<Vec<Amplitude>> {
        if targets.is_empty() {
            return Err(Error::InvalidSubsystem("empty target list".into()));
        }
        let n = self.dims.len();
        let mut seen = vec![false; n];
        for &t in targets {
            if t >= n {
                return Err(Error::InvalidSubsystem(format!(
                    "target {t} out of range for {n} subsystems"
                )));
            }
            if seen[t] {
                return Err(Error::InvalidSubsystem(format!("repeated target {t}")));
            }
            seen[t] = true;
        }
        let target_dim: usize = targets.iter().map(|&t| self.dims[t]).product();
        if op.nrows() != target_dim || op.ncols() != target_dim {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{} but targets span dimension {target_dim}",
                op.nrows(),
                op.ncols()
            )));
        }

        let full_strides = strides(&self.dims);
        // Flat offsets contributed by each joint target configuration.
        let target_dims: Vec<usize> = targets.iter().map(|&t| self.dims[t]).collect();
        let mut target_offsets = Vec::with_capacity(target_dim);
        super::index::for_each_index(&target_dims, |ix| {
            target_offsets.push(
                ix.iter()
                    .zip(targets)
                    .map(|(&i, &t)| i * full_strides[t])
                    .sum::<usize>(),
            );
        });

        let rest: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();
        let rest_dims: Vec<usize> = rest.iter().map(|&r| self.dims[r]).collect();

        let mut out = vec![Complex64::ZERO; self.amplitudes.len()];
        let mut gathered = vec![Complex64::ZERO; target_dim];
        super::index::for_each_index(&rest_dims, |rest_ix| {
            let base: usize = rest_ix
                .iter()
                .zip(&rest)
                .map(|(&i, &r)| i * full_strides[r])
                .sum();
            for (slot, &off) in gathered.iter_mut().zip(&target_offsets) {
                *slot = self.amplitudes[base + off];
            }
            for (row, &off) in target_offsets.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for (col, &g) in gathered.iter().enumerate() {
                    acc += op[(row, col)] * g;
                }
                out[base + off] = acc;
            }
        });
        Ok(out)
    }
}

/// Kronecker product of two states; dims are concatenated. The result is
/// normalized because norms multiply.
pub fn tensor(a: &PureState, b: &PureState) -> PureState {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    let mut amplitudes = Vec::with_capacity(a.amplitudes.len() * b.amplitudes.len());
    for &x in &a.amplitudes {
        for &y in &b.amplitudes {
            amplitudes.push(x * y);
        }
    }
    PureState::new(dims, amplitudes).expect("tensor of valid states is valid")
}

/// `|0⟩`.
pub fn ket0() -> PureState {
    PureState::basis_ket(vec![2], 0).expect("valid")
}

/// `|1⟩`.
pub fn ket1() -> PureState {
    PureState::basis_ket(vec![2], 1).expect("valid")
}

/// `H|0⟩ = (|0⟩ + |1⟩)/√2`.
pub fn hadamard_plus() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::qubit(s, s).expect("valid")
}

/// `H|1⟩ = (|0⟩ − |1⟩)/√2`.
pub fn hadamard_minus() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState::qubit(s, -s).expect("valid")
}

/// The four maximally entangled two-qubit states
/// (|00⟩±|11⟩)/√2 and (|01⟩±|10⟩)/√2, in that order.
pub fn bell_states() -> Vec<PureState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::ZERO;
    let p = Complex64::new(s, 0.0);
    let m = Complex64::new(-s, 0.0);
    [
        vec![p, z, z, p],
        vec![p, z, z, m],
        vec![z, p, p, z],
        vec![z, p, m, z],
    ]
    .into_iter()
    .map(|amps| PureState::new(vec![2, 2], amps).expect("valid"))
    .collect()
}
