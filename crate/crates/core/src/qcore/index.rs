//! Multi-index arithmetic over subsystem dimension lists.
//!
//! States and density matrices are stored flat in row-major order: the
//! flat index of a multi-index (i_0, ..., i_{n-1}) over dims (d_0, ..., d_{n-1})
//! is sum(i_k * stride_k) with stride_k = d_{k+1} * ... * d_{n-1}.

/// Row-major strides for a dimension list.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut out = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        out[k] = out[k + 1] * dims[k + 1];
    }
    out
}

/// Total dimension of a composite space.
pub(crate) fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Calls `f` with every multi-index over `dims`, in row-major order.
/// An empty `dims` yields exactly one (empty) index.
pub(crate) fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        // odometer increment
        let mut k = dims.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}
