//! Toeplitz operators `P f P` on a quantum space, their products, kernels and traces.

use crate::error::{Error, Result};
use crate::numkit::eig::hermitian_norm;
use crate::numkit::sum::{pairwise_reduce, pairwise_sum};
use crate::numkit::{ComplexMatrix, C64};
use crate::phase::PhaseModel;
use crate::quantum::QuantumBasis;
use crate::symbol::Symbol;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Asymmetry above which assembly reports an under-resolved rule.
pub const ASSEMBLY_TOL: f64 = 1e-10;

const NODE_BLOCK: usize = 1024;

#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    pub basis: Arc<QuantumBasis>,
    pub symbol_name: String,
    pub matrix: ComplexMatrix,
    pub k: usize,
    pub q: usize,
    /// Product of several operators rather than a single compression.
    pub composite: bool,
}

impl ToeplitzOperator {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Operator norm on the quantum space.
    pub fn norm(&self) -> Result<f64> {
        matrix_norm(&self.matrix)
    }

    pub fn scale(&self, s: C64) -> ToeplitzOperator {
        ToeplitzOperator {
            matrix: self.matrix.scale(s),
            symbol_name: format!("{s}*({})", self.symbol_name),
            composite: true,
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &ToeplitzOperator) -> Result<ToeplitzOperator> {
        same_basis(self, other)?;
        Ok(ToeplitzOperator {
            matrix: self.matrix.sub(&other.matrix)?,
            symbol_name: format!("({}) - ({})", self.symbol_name, other.symbol_name),
            composite: true,
            ..self.clone()
        })
    }
}

/// Operator norm of any square matrix, via `A*A` when `A` is not Hermitian.
pub fn matrix_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.rows() == 0 {
        return Ok(0.0);
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    if a.hermitian_defect() <= 1e-14 * scale {
        let mut h = a.clone();
        h.symmetrize();
        return hermitian_norm(&h);
    }
    let mut g = a.adjoint().matmul(a)?;
    g.symmetrize();
    Ok(hermitian_norm(&g)?.sqrt())
}

fn same_basis(a: &ToeplitzOperator, b: &ToeplitzOperator) -> Result<()> {
    if a.basis.id() != b.basis.id() {
        return Err(Error::BasisMismatch);
    }
    Ok(())
}

/// `M_ij = Σ_nodes w conj(b_i) f b_j`.
pub fn assemble(basis: &Arc<QuantumBasis>, f: &Symbol) -> Result<ToeplitzOperator> {
    let grid = &basis.grid;
    let n = grid.len();
    let fv: Vec<C64> = grid.nodes.par_iter().map(|&z| f.at(z)).collect();
    if let Some(bad) = fv.iter().find(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!(
            "symbol '{}' is not finite on the quadrature grid ({bad})",
            f.name
        )));
    }
    let real = fv.iter().all(|v| v.im == 0.0);
    let dim = basis.dim();
    let vals = &basis.grid_values;
    let blocks: Vec<(usize, usize)> = (0..n)
        .step_by(NODE_BLOCK)
        .map(|s| (s, (s + NODE_BLOCK).min(n)))
        .collect();
    let partials: Vec<ComplexMatrix> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            let wl: Vec<Vec<C64>> = (0..dim)
                .map(|i| {
                    vals.row(i)[s..e]
                        .iter()
                        .zip(&grid.weights[s..e])
                        .map(|(b, &w)| b.conj() * w)
                        .collect()
                })
                .collect();
            let fb: Vec<Vec<C64>> = (0..dim)
                .map(|j| vals.row(j)[s..e].iter().zip(&fv[s..e]).map(|(b, fx)| b * fx).collect())
                .collect();
            for i in 0..dim {
                let lo = if real { i } else { 0 };
                for j in lo..dim {
                    let mut acc = C64::new(0.0, 0.0);
                    for (a, b) in wl[i].iter().zip(&fb[j]) {
                        acc += a * b;
                    }
                    m[(i, j)] = acc;
                }
            }
            m
        })
        .collect();
    let mut matrix =
        pairwise_reduce(partials, |a, b| a.add(&b).expect("shapes")).unwrap_or_else(|| ComplexMatrix::zeros(dim, dim));
    if real {
        for i in 0..dim {
            for j in 0..i {
                matrix[(i, j)] = matrix[(j, i)].conj();
            }
        }
    }
    let asym = matrix.hermitian_defect();
    if asym > ASSEMBLY_TOL {
        return Err(Error::QuadratureResolution {
            asymmetry: asym,
            tolerance: ASSEMBLY_TOL,
        });
    }
    matrix.symmetrize();
    Ok(ToeplitzOperator {
        basis: Arc::clone(basis),
        symbol_name: f.name.clone(),
        matrix,
        k: basis.k,
        q: basis.q,
        composite: false,
    })
}

pub fn compose(a: &ToeplitzOperator, b: &ToeplitzOperator) -> Result<ToeplitzOperator> {
    same_basis(a, b)?;
    Ok(ToeplitzOperator {
        basis: Arc::clone(&a.basis),
        symbol_name: format!("({})∘({})", a.symbol_name, b.symbol_name),
        matrix: a.matrix.matmul(&b.matrix)?,
        k: a.k,
        q: a.q,
        composite: true,
    })
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &ToeplitzOperator, b: &ToeplitzOperator) -> Result<ToeplitzOperator> {
    let ab = compose(a, b)?;
    let ba = compose(b, a)?;
    Ok(ToeplitzOperator {
        symbol_name: format!("[{}, {}]", a.symbol_name, b.symbol_name),
        matrix: ab.matrix.sub(&ba.matrix)?,
        ..ab
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub x: C64,
    pub y: C64,
    pub raw: C64,
    pub phase_normalized: C64,
    pub dist: f64,
}

/// `Σ_ab b_a(x) M_ab conj(b_b(y))` in the localized picture.
pub fn kernel_value(op: &ToeplitzOperator, x: C64, y: C64) -> C64 {
    let bx = op.basis.section_values(x);
    let by = if x == y { bx.clone() } else { op.basis.section_values(y) };
    let dim = op.dim();
    let terms: Vec<C64> = (0..dim)
        .map(|a| {
            let row = op.matrix.row(a);
            let inner: Vec<C64> = row.iter().zip(&by).map(|(m, v)| m * v.conj()).collect();
            bx[a] * pairwise_sum(&inner)
        })
        .collect();
    pairwise_sum(&terms)
}

/// Kernel at `(x, y)` with the oscillating factor `e^{ikΨ}` removed.
pub fn kernel_eval(op: &ToeplitzOperator, x: C64, y: C64, pm: &PhaseModel) -> Result<KernelSample> {
    let raw = kernel_value(op, x, y);
    let phase_normalized = if x == y {
        raw
    } else {
        let w1 = pm.to_local(x)?;
        let w2 = pm.to_local(y)?;
        let k = op.k as f64;
        let psi = pm.psi(w1, w2)?;
        let frame = pm.frame_phase(w1) - pm.frame_phase(w2);
        let i = C64::new(0.0, 1.0);
        (-i * k * psi).exp() * raw * (-i * k * frame).exp()
    };
    Ok(KernelSample {
        x,
        y,
        raw,
        phase_normalized,
        dist: (x - y).norm(),
    })
}

/// Sum of the matrix diagonal.
pub fn trace(op: &ToeplitzOperator) -> f64 {
    let d: Vec<f64> = op.matrix.diagonal().iter().map(|c| c.re).collect();
    pairwise_sum(&d)
}

/// `∫ f(x) P(x, x) dv` by quadrature.
pub fn weighted_trace(basis: &QuantumBasis, f: &Symbol) -> f64 {
    let density = basis.grid_density();
    let terms: Vec<f64> = basis
        .grid
        .nodes
        .iter()
        .zip(&basis.grid.weights)
        .zip(&density)
        .map(|((&z, &w), &p)| w * p * f.at(z).re)
        .collect();
    pairwise_sum(&terms)
}
