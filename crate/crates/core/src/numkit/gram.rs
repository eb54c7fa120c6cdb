use super::eig::hermitian_eig;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Eigenvalues of the Gram matrix at or below this fraction of the largest one
/// are treated as numerically zero.
pub const RANK_TOL: f64 = 1e-10;

/// Result of orthonormalizing a family against its Gram matrix.
#[derive(Debug, Clone)]
pub struct Orthonormalized {
    /// `transform[(i, j)]` is the weight of input vector `i` in output vector `j`.
    pub transform: ComplexMatrix,
    /// Output vectors expressed in the ambient coordinates of the inputs.
    pub vectors: Vec<Vec<C64>>,
    pub rank: usize,
    /// Number of input directions discarded as rank-deficient.
    pub dropped: usize,
}

/// Orthonormalize `vectors` whose pairwise inner products are `gram[(i, j)] = (v_j | v_i)`.
///
/// Full-rank families use the symmetric (Löwdin) transform `G^{-1/2}`, which
/// keeps each output as close as possible to its input. Rank-deficient
/// families fall back to the canonical transform `V_r Λ_r^{-1/2}` restricted
/// to the retained eigen-directions.
pub fn gram_orthonormalize(vectors: &[Vec<C64>], gram: &ComplexMatrix) -> Result<Orthonormalized> {
    if vectors.is_empty() {
        return Ok(Orthonormalized {
            transform: ComplexMatrix::zeros(0, 0),
            vectors: Vec::new(),
            rank: 0,
            dropped: 0,
        });
    }
    let n = vectors.len();
    if gram.rows() != n || gram.cols() != n {
        return Err(Error::Dimension(format!(
            "{n} vectors but a {}x{} Gram matrix",
            gram.rows(),
            gram.cols()
        )));
    }
    let transform = orthonormalizing_transform(gram)?;
    let rank = transform.cols();
    let ambient = vectors[0].len();
    let out = (0..rank)
        .map(|j| {
            let mut w = vec![C64::new(0.0, 0.0); ambient];
            for (i, v) in vectors.iter().enumerate() {
                let c = transform[(i, j)];
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk += c * vk;
                }
            }
            w
        })
        .collect();
    Ok(Orthonormalized {
        transform,
        vectors: out,
        rank,
        dropped: n - rank,
    })
}

/// The coefficient transform alone (columns = orthonormal combinations).
pub fn orthonormalizing_transform(gram: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = gram.rows();
    let eig = hermitian_eig(gram)?;
    let max = eig.values.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Ok(ComplexMatrix::zeros(n, 0));
    }
    let keep: Vec<usize> = (0..n).filter(|&j| eig.values[j] > RANK_TOL * max).collect();
    let v = &eig.vectors;
    if keep.len() == n {
        // G^{-1/2} = V Λ^{-1/2} V*
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] / eig.values[j].sqrt());
        return scaled.matmul(&v.adjoint());
    }
    Ok(ComplexMatrix::from_fn(n, keep.len(), |i, c| {
        let j = keep[c];
        v[(i, j)] / eig.values[j].sqrt()
    }))
}

/// `C* G C`, the Gram matrix of the transformed family.
pub fn transformed_gram(gram: &ComplexMatrix, transform: &ComplexMatrix) -> ComplexMatrix {
    transform
        .adjoint()
        .matmul(&gram.matmul(transform).expect("shapes"))
        .expect("shapes")
}
