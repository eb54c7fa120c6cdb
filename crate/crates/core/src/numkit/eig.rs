//! Cyclic Jacobi eigensolver for dense Hermitian matrices.
//!
//! Each rotation annihilates one off-diagonal pair `(p, q)`. The phase of
//! `a_pq` is folded into the rotation so the 2x2 subproblem is real symmetric.
//! A pair is skipped once `|a_pq| <= 1e-13 * sqrt(|a_pp a_qq|)` (relative
//! criterion, keeps tiny eigenvalues of graded matrices accurate) or once it is
//! below an absolute floor tied to the Frobenius norm.

use super::matrix::{ComplexMatrix, C64, HERMITIAN_TOL};
use crate::error::Result;

const OFF_DIAGONAL_THRESHOLD: f64 = 1e-13;
const ABSOLUTE_FLOOR: f64 = 1e-22;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) V*` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors.
    pub vectors: ComplexMatrix,
    pub sweeps: usize,
}

pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    a.check_hermitian(HERMITIAN_TOL)?;
    let n = a.rows();
    let mut m = a.clone();
    m.symmetrize();
    let mut v = ComplexMatrix::identity(n);
    let floor = ABSOLUTE_FLOOR * m.frobenius_norm();

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= floor {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if mag <= OFF_DIAGONAL_THRESHOLD * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                rotate(&mut m, &mut v, p, q, apq, app, aqq);
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen {
        values,
        vectors,
        sweeps,
    })
}

fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: C64, app: f64, aqq: f64) {
    let n = m.rows();
    let mag = apq.norm();
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // R = [[c, s e^{ia}], [-s e^{-ia}, c]] on coordinates (p, q); A <- R* A R.
    let r_pq = phase * s;
    let r_qp = -phase.conj() * s;

    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * c + akq * r_qp;
        m[(k, q)] = akp * r_pq + akq * c;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = apk * c + aqk * r_qp.conj();
        m[(q, k)] = apk * r_pq.conj() + aqk * c;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * r_qp;
        v[(k, q)] = vkp * r_pq + vkq * c;
    }
}

/// `||A V - V diag(values)||_F`.
pub fn eigen_residual(a: &ComplexMatrix, eig: &HermitianEigen) -> f64 {
    let av = a.matmul(&eig.vectors).expect("square");
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (av[(i, j)] - eig.vectors[(i, j)] * eig.values[j]).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `||V* V - I||_F`.
pub fn unitarity_defect(v: &ComplexMatrix) -> f64 {
    let vv = v.adjoint().matmul(v).expect("square");
    vv.sub(&ComplexMatrix::identity(v.cols()))
        .expect("same shape")
        .frobenius_norm()
}

/// Largest absolute eigenvalue; the operator norm of a Hermitian matrix.
pub fn hermitian_norm(a: &ComplexMatrix) -> Result<f64> {
    let e = hermitian_eig(a)?;
    Ok(e.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}
