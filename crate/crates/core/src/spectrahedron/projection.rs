use crate::error::Result;
use crate::hermitian::{eigh, DensityMatrix, HermitianMatrix};

/// Euclidean projection onto the probability simplex.
///
/// Sort-based threshold search; the threshold uses the largest support size
/// whose entries stay positive. An empty input maps to an empty output.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Frobenius-nearest density matrix: eigendecompose, project the spectrum
/// onto the simplex, recompose.
pub fn project_density(h: &HermitianMatrix) -> Result<DensityMatrix> {
    let eig = eigh(h)?;
    let p = project_simplex(&eig.eigenvalues);
    Ok(DensityMatrix::new_unchecked(eig.compose(&p)))
}
