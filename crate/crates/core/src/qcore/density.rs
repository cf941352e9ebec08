//! Density matrices: the unique observable description of a mixed state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::index::{for_each_index, strides, total_dim};
use super::mixture::Mixture;
use super::state::PureState;
use crate::{Error, Result, TOL_ALGEBRA, TOL_EIGEN};

/// A Hermitian, positive semidefinite, unit-trace complex matrix over a
/// composite space, carrying its subsystem dimension list.
///
/// Validated at construction: Hermitian and unit trace within
/// [`TOL_ALGEBRA`], eigenvalues no lower than −[`TOL_ALGEBRA`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Builds and validates a density matrix.
    pub fn new(dims: Vec<usize>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = total_dim(&dims);
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidDensity(format!(
                "subsystem dimensions must be nonempty and positive, got {dims:?}"
            )));
        }
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidDensity(format!(
                "matrix is {}x{} but dims {:?} give dimension {n}",
                matrix.nrows(),
                matrix.ncols(),
                dims
            )));
        }
        if matrix
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidDensity("non-finite entry".into()));
        }
        let mut herm_err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                herm_err = herm_err.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if herm_err > TOL_ALGEBRA {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian: max |ρᵢⱼ − ρ̄ⱼᵢ| = {herm_err}"
            )));
        }
        let trace: Complex64 = (0..n).map(|i| matrix[(i, i)]).sum();
        if (trace.re - 1.0).abs() > TOL_ALGEBRA || trace.im.abs() > TOL_ALGEBRA {
            return Err(Error::InvalidDensity(format!("trace {trace} is not 1")));
        }
        let rho = DensityMatrix { dims, matrix };
        let min_eig = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -TOL_ALGEBRA {
            return Err(Error::InvalidDensity(format!(
                "not positive semidefinite: smallest eigenvalue {min_eig}"
            )));
        }
        Ok(rho)
    }

    /// Subsystem dimensions.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// The raw matrix.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Total dimension.
    pub fn total_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace (1 within tolerance, by construction).
    pub fn trace(&self) -> f64 {
        (0..self.matrix.nrows())
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }

    /// Real eigenvalues of the (Hermitian) matrix, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        vals
    }

    /// The maximally mixed state I/d on the given dims.
    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let n = total_dim(&dims);
        if n == 0 {
            return Err(Error::InvalidDensity("zero-dimensional space".into()));
        }
        let matrix = DMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0);
        Self::new(dims, matrix)
    }
}

/// Outer product |ψ⟩⟨ψ| as a raw matrix.
pub(crate) fn outer(state: &PureState) -> DMatrix<Complex64> {
    let n = state.total_dim();
    let a = state.amplitudes();
    DMatrix::from_fn(n, n, |i, j| a[i] * a[j].conj())
}

impl PureState {
    /// The rank-one density matrix |ψ⟩⟨ψ| of this state.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::new(self.dims().to_vec(), outer(self))
            .expect("outer product of a valid state is a valid density matrix")
    }
}

/// The density matrix Σ pᵢ |Ψᵢ⟩⟨Ψᵢ| of a mixture. Mixture invariants
/// (matching dims, probabilities summing to 1) are enforced when the
/// mixture is built, so this cannot fail.
pub fn density_of(m: &Mixture) -> DensityMatrix {
    let dims = m.dims().to_vec();
    let n = total_dim(&dims);
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for (state, p) in m.entries() {
        acc += outer(state) * Complex64::new(*p, 0.0);
    }
    DensityMatrix::new(dims, acc).expect("mixture density is valid by construction")
}

/// Largest entrywise absolute difference between two density matrices.
pub fn max_abs_diff(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "comparing density matrices over dims {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(a.matrix
        .iter()
        .zip(b.matrix.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}

/// True iff the two matrices agree entrywise within `tol`. States with
/// equal density matrices are indistinguishable by any measurement, so
/// this is the only notion of equality with physical content.
pub fn density_equal(a: &DensityMatrix, b: &DensityMatrix, tol: f64) -> Result<bool> {
    Ok(max_abs_diff(a, b)? <= tol)
}

/// Traces out every subsystem not listed in `keep`, returning the reduced
/// density matrix over the kept subsystems in ascending original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n_sub = rho.dims().len();
    if keep.is_empty() {
        return Err(Error::InvalidSubsystem("empty keep set".into()));
    }
    let mut keep_mask = vec![false; n_sub];
    for &k in keep {
        if k >= n_sub {
            return Err(Error::InvalidSubsystem(format!(
                "keep index {k} out of range for {n_sub} subsystems"
            )));
        }
        if keep_mask[k] {
            return Err(Error::InvalidSubsystem(format!("repeated keep index {k}")));
        }
        keep_mask[k] = true;
    }
    let kept: Vec<usize> = (0..n_sub).filter(|i| keep_mask[*i]).collect();
    let traced: Vec<usize> = (0..n_sub).filter(|i| !keep_mask[*i]).collect();

    let full_strides = strides(rho.dims());
    let kept_dims: Vec<usize> = kept.iter().map(|&i| rho.dims()[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| rho.dims()[i]).collect();
    let out_n = total_dim(&kept_dims);
    let out_strides = strides(&kept_dims);

    // Flat offsets of every kept multi-index in the full space, aligned
    // with its flat index in the reduced space.
    let mut kept_offsets = vec![(0usize, 0usize); out_n];
    {
        let mut row = 0;
        for_each_index(&kept_dims, |ix| {
            let full: usize = ix
                .iter()
                .zip(&kept)
                .map(|(&i, &s)| i * full_strides[s])
                .sum();
            let reduced: usize = ix.iter().zip(&out_strides).map(|(&i, &st)| i * st).sum();
            kept_offsets[row] = (reduced, full);
            row += 1;
        });
    }

    let mut out = DMatrix::<Complex64>::zeros(out_n, out_n);
    for_each_index(&traced_dims, |tix| {
        let t_off: usize = tix
            .iter()
            .zip(&traced)
            .map(|(&i, &s)| i * full_strides[s])
            .sum();
        for &(ri, fi) in &kept_offsets {
            for &(rj, fj) in &kept_offsets {
                out[(ri, rj)] += rho.matrix()[(fi + t_off, fj + t_off)];
            }
        }
    });
    DensityMatrix::new(kept_dims, out)
}

/// Peres purity test for an ensemble: true iff there exists a complete
/// measurement under which the ensemble behaves deterministically, which
/// holds exactly when its density matrix has an eigenvalue 1 (rank one).
pub fn is_pure_by_peres(m: &Mixture) -> bool {
    let rho = density_of(m);
    let top = rho.eigenvalues()[0];
    (top - 1.0).abs() <= TOL_EIGEN
}
