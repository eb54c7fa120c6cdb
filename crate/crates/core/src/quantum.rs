//! Finite-dimensional quantum spaces on the model geometries.
//!
//! Every space is the orthonormalized span of a dictionary of sections. A
//! dictionary element is stored in the localized picture, multiplied by
//! `e^{-kφ}` and divided by a reference norm so that the Gram matrix stays
//! close to the identity. Values are formed in the log domain because
//! `|z|^m e^{-kφ}` over- or underflows long before the quadrature tail ends.

use crate::error::{Error, Result};
use crate::geometry::{KahlerModel, ModelKind};
use crate::numkit::gram::orthonormalizing_transform;
use crate::numkit::sum::{pairwise_reduce, pairwise_sum};
use crate::numkit::{hermitian_eig, ComplexMatrix, QuadratureRule, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

/// Spectral window `[0, k^{-N}]` with this `N` unless overridden.
pub const DEFAULT_CUTOFF_EXPONENT: u32 = 8;

/// Default radius inside which disc models must resolve the quantum states.
pub const DEFAULT_SIGNAL_RADIUS: f64 = 1.0;
pub const QUARTIC_SIGNAL_RADIUS: f64 = 0.7;

const NODE_BLOCK: usize = 1024;
/// Log-density drop that ends the disc.
const TAIL_DROP: f64 = 40.0;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Optional overrides of the default resolution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisOptions {
    pub radial: Option<usize>,
    pub angular: Option<usize>,
    pub radius: Option<f64>,
    pub max_degree: Option<usize>,
    pub signal_radius: Option<f64>,
    pub cutoff_exponent: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dictionary {
    /// `z^m`, `0 ≤ m ≤ max_degree`.
    Monomials { max_degree: usize },
    /// `z^l z̄^m e^{2kφ} dz̄` with `l ∈ {0, 1}`, `0 ≤ m ≤ max_degree`.
    TwistedForms { max_degree: usize },
}

impl Dictionary {
    pub fn len(&self) -> usize {
        match *self {
            Dictionary::Monomials { max_degree } => max_degree + 1,
            Dictionary::TwistedForms { max_degree } => 2 * (max_degree + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_degree(&self) -> usize {
        match *self {
            Dictionary::Monomials { max_degree } | Dictionary::TwistedForms { max_degree } => max_degree,
        }
    }

    /// `(a, b)` such that element `i` carries `z^a z̄^b`.
    pub fn exponents(&self) -> Vec<(usize, usize)> {
        match *self {
            Dictionary::Monomials { max_degree } => (0..=max_degree).map(|m| (m, 0)).collect(),
            Dictionary::TwistedForms { max_degree } => {
                (0..2).flat_map(|l| (0..=max_degree).map(move |m| (l, m))).collect()
            }
        }
    }
}

/// Orthonormal basis of a level-`k` quantum space sampled on a quadrature grid.
#[derive(Debug, Clone)]
pub struct QuantumBasis {
    pub model: KahlerModel,
    pub k: usize,
    pub q: usize,
    pub dictionary: Dictionary,
    /// `coeffs[(i, a)]`: weight of dictionary element `i` in basis vector `a`.
    pub coeffs: ComplexMatrix,
    pub grid: QuadratureRule,
    /// `grid_values[(a, n)]`: basis vector `a` at node `n`, times `e^{-kφ}`.
    pub grid_values: ComplexMatrix,
    pub cutoff_exponent: u32,
    /// Retained eigenvalues of the quadratic form (q = 1 only).
    pub spectrum: Vec<f64>,
    /// Smallest discarded eigenvalue of the quadratic form (q = 1 only).
    pub first_excluded: Option<f64>,
    /// Dictionary directions lost to rank deficiency.
    pub dropped: usize,
    /// `max |C* G C − I|` after orthonormalization.
    pub gram_residual: f64,
    pub diagnostic: Option<String>,
    log_ref: Vec<f64>,
    exponents: Vec<(usize, usize)>,
    id: u64,
}

impl QuantumBasis {
    pub fn dim(&self) -> usize {
        self.coeffs.cols()
    }

    /// Identity of this basis, used to reject mixed compositions.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dictionary_exponents(&self) -> &[(usize, usize)] {
        &self.exponents
    }

    /// Log of the reference norm that divides dictionary element `i`.
    pub fn log_reference(&self, i: usize) -> f64 {
        self.log_ref[i]
    }

    /// Sign of `kφ` in the exponent of the localized dictionary.
    fn twist(&self) -> f64 {
        twist_sign(self.dictionary)
    }

    /// Localized dictionary values at `z`.
    pub fn dictionary_values(&self, z: C64) -> Vec<C64> {
        let kphi = self.k as f64 * self.model.phi(z);
        let mut out = vec![C64::new(0.0, 0.0); self.exponents.len()];
        fill_values(&self.exponents, &self.log_ref, self.twist() * kphi, z, &mut out);
        out
    }

    /// Localized values of every basis vector at `z`.
    pub fn section_values(&self, z: C64) -> Vec<C64> {
        let v = self.dictionary_values(z);
        let dim = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (i, vi) in v.iter().enumerate() {
            if *vi == C64::new(0.0, 0.0) {
                continue;
            }
            let row = self.coeffs.row(i);
            for (o, c) in out.iter_mut().zip(row) {
                *o += c * vi;
            }
        }
        out
    }

    /// `Σ_a |b_a(x_n)|^2` at every node.
    pub fn grid_density(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .into_par_iter()
            .map(|j| {
                let col: Vec<f64> = (0..self.dim()).map(|a| self.grid_values[(a, j)].norm_sqr()).collect();
                pairwise_sum(&col)
            })
            .collect()
    }

    /// Gram matrix recomputed from the stored grid values.
    pub fn grid_gram(&self) -> ComplexMatrix {
        weighted_products(&self.grid_values, &self.grid.weights, None)
    }

    /// `‖P² − P‖` with `P = G W G*`, the quadrature projector in basis coordinates.
    pub fn projector_defect(&self) -> f64 {
        let p = self.grid_gram();
        let p2 = p.matmul(&p).expect("square");
        p2.sub(&p).expect("shapes").max_abs()
    }
}

/// Localized spectral-projector kernel value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    /// Names of the frame elements indexing the matrix.
    pub frame: Vec<String>,
    pub matrix: ComplexMatrix,
    /// Frame components absent by construction.
    pub structural_zeros: Vec<String>,
}

impl KernelMatrix {
    pub fn scalar(&self) -> C64 {
        self.matrix[(0, 0)]
    }
}

/// `P(x, y) = Σ_a b_a(x) conj(b_a(y))` in the localized picture.
pub fn projector_kernel(basis: &QuantumBasis, x: C64, y: C64) -> KernelMatrix {
    let bx = basis.section_values(x);
    let by = if x == y { bx.clone() } else { basis.section_values(y) };
    let terms: Vec<C64> = bx.iter().zip(&by).map(|(a, b)| a * b.conj()).collect();
    let value = pairwise_sum(&terms);
    let (frame, structural_zeros) = frame_labels(basis.q);
    KernelMatrix {
        frame,
        matrix: ComplexMatrix::from_vec(1, 1, vec![value]).expect("1x1"),
        structural_zeros,
    }
}

pub(crate) fn frame_labels(q: usize) -> (Vec<String>, Vec<String>) {
    if q == 0 {
        (vec!["1".into()], Vec::new())
    } else {
        (vec!["dzbar".into()], vec!["dz".into()])
    }
}

/// Holomorphic sections for `cp1_fs`, `bargmann` or `degenerate_quartic`.
pub fn build_basis(model: &KahlerModel, k: usize) -> Result<QuantumBasis> {
    build_basis_with(model, k, &BasisOptions::default())
}

pub fn build_basis_with(model: &KahlerModel, k: usize, opts: &BasisOptions) -> Result<QuantumBasis> {
    if k == 0 {
        return Err(Error::Invalid("tensor power k must be at least 1".into()));
    }
    if model.kind == ModelKind::LandauQ1 {
        return Err(Error::Invalid(
            "landau_q1 is quantized by (0,1)-forms; use the q = 1 spectral space".into(),
        ));
    }
    let max_degree = match model.kind {
        ModelKind::Cp1Fs => {
            if let Some(d) = opts.max_degree {
                if d != k {
                    return Err(Error::Invalid(format!(
                        "cp1_fs at level {k} needs the dictionary z^0..z^{k}, got max degree {d}"
                    )));
                }
            }
            k
        }
        _ => opts.max_degree.unwrap_or_else(|| default_degree(model, k, opts)),
    };
    let dictionary = Dictionary::Monomials { max_degree };
    assemble_space(model, k, 0, dictionary, opts)
}

/// Span of the eigenforms of the truncated Kodaira form with eigenvalue `≤ k^{-N}`.
pub fn spectral_space_q1(model: &KahlerModel, k: usize, n: u32) -> Result<QuantumBasis> {
    let opts = BasisOptions {
        cutoff_exponent: Some(n),
        ..BasisOptions::default()
    };
    spectral_space_q1_with(model, k, &opts)
}

pub fn spectral_space_q1_with(model: &KahlerModel, k: usize, opts: &BasisOptions) -> Result<QuantumBasis> {
    if k == 0 {
        return Err(Error::Invalid("tensor power k must be at least 1".into()));
    }
    if model.kind != ModelKind::LandauQ1 {
        return Err(Error::Invalid(format!(
            "the q = 1 spectral space needs negative curvature; {} is not supported",
            model.kind
        )));
    }
    let max_degree = opts.max_degree.unwrap_or_else(|| default_degree(model, k, opts));
    assemble_space(model, k, 1, Dictionary::TwistedForms { max_degree }, opts)
}

fn twist_sign(d: Dictionary) -> f64 {
    match d {
        Dictionary::Monomials { .. } => -1.0,
        Dictionary::TwistedForms { .. } => 1.0,
    }
}

/// Mode index whose radial peak sits at the signal radius, plus a tail margin.
fn default_degree(model: &KahlerModel, k: usize, opts: &BasisOptions) -> usize {
    let rs = opts.signal_radius.unwrap_or(match model.kind {
        ModelKind::DegenerateQuartic => QUARTIC_SIGNAL_RADIUS,
        _ => DEFAULT_SIGNAL_RADIUS,
    });
    // The peak of r^{2m} e^{∓2kφ(r)} sits where m = ±k r φ'(r).
    let h = 1e-6 * rs.max(1e-3);
    let dphi = (model.phi(C64::new(rs + h, 0.0)) - model.phi(C64::new(rs - h, 0.0))) / (2.0 * h);
    let m = (k as f64 * rs * dphi).abs();
    (m + 6.0 * m.sqrt() + 10.0).ceil() as usize
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

/// `ln Γ(n / 2)` for a positive integer `n`.
fn ln_gamma_half(n: usize) -> f64 {
    if n % 2 == 0 {
        ln_factorial(n / 2 - 1)
    } else {
        // Γ(j + 1/2) = (2j)! √π / (4^j j!)
        let j = (n - 1) / 2;
        ln_factorial(2 * j) + 0.5 * PI.ln() - j as f64 * 4f64.ln() - ln_factorial(j)
    }
}

/// Log reference norms of the unperturbed models.
fn reference_norms(model: &KahlerModel, k: usize, exps: &[(usize, usize)]) -> Vec<f64> {
    let kf = k as f64;
    let c = model.theta_scale.ln();
    exps.iter()
        .map(|&(a, b)| {
            let m = a + b;
            let ln_sq = match model.kind {
                // 2π m!(k−m)!/(k+1)!
                ModelKind::Cp1Fs => {
                    (2.0 * PI).ln() + ln_factorial(m) + ln_factorial(k.saturating_sub(m)) - ln_factorial(k + 1)
                }
                // 2π m!/k^{m+1}
                ModelKind::Bargmann | ModelKind::LandauQ1 => {
                    (2.0 * PI).ln() + ln_factorial(m) - (m as f64 + 1.0) * kf.ln()
                }
                // π Γ((m+1)/2) / (2k)^{(m+1)/2}
                ModelKind::DegenerateQuartic => {
                    PI.ln() + ln_gamma_half(m + 1) - 0.5 * (m as f64 + 1.0) * (2.0 * kf).ln()
                }
            };
            0.5 * (ln_sq + c)
        })
        .collect()
}

fn fill_values(exps: &[(usize, usize)], log_ref: &[f64], twist_kphi: f64, z: C64, out: &mut [C64]) {
    let r = z.norm();
    if r == 0.0 {
        for (o, (&(a, b), lr)) in out.iter_mut().zip(exps.iter().zip(log_ref)) {
            *o = if a + b == 0 {
                C64::new((twist_kphi - lr).exp(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
        }
        return;
    }
    let lr_z = r.ln();
    let theta = z.arg();
    for (o, (&(a, b), lr)) in out.iter_mut().zip(exps.iter().zip(log_ref)) {
        let mag = ((a + b) as f64 * lr_z + twist_kphi - lr).exp();
        *o = C64::from_polar(mag, (a as f64 - b as f64) * theta);
    }
}

/// Localized `D v = ∂_z v − 2k φ_z v` of the twisted forms: `l z^{l−1} z̄^m e^{2kφ}`.
fn fill_derivative_values(exps: &[(usize, usize)], log_ref: &[f64], kphi: f64, z: C64, out: &mut [C64]) {
    let r = z.norm();
    let lr_z = if r == 0.0 { f64::NEG_INFINITY } else { r.ln() };
    let theta = z.arg();
    for (o, (&(a, b), lr)) in out.iter_mut().zip(exps.iter().zip(log_ref)) {
        *o = if a == 0 {
            C64::new(0.0, 0.0)
        } else {
            let p = a - 1 + b;
            let lmag = if p == 0 { 0.0 } else { p as f64 * lr_z };
            let mag = a as f64 * (lmag + kphi - lr).exp();
            C64::from_polar(mag, (a as f64 - 1.0 - b as f64) * theta)
        };
    }
}

/// First radius past the peak of `g` where it has dropped by `TAIL_DROP`.
fn tail_radius(g: impl Fn(f64) -> f64) -> Result<f64> {
    let mut r = 1e-3;
    let mut best = g(r);
    while r < 1e4 {
        r *= 1.01;
        let v = g(r);
        if v > best {
            best = v;
        } else if v < best - TAIL_DROP {
            return Ok(r);
        }
    }
    Err(Error::Geometry(
        "weight does not confine the quantum states to a disc".into(),
    ))
}

fn default_grid(model: &KahlerModel, k: usize, dictionary: Dictionary, opts: &BasisOptions) -> Result<QuadratureRule> {
    let theta = |z: C64| model.theta_at(z);
    if model.kind.is_compact() {
        let radial = opts.radial.unwrap_or(2 * k + 16);
        let angular = opts.angular.unwrap_or(4 * k + 16);
        return Ok(QuadratureRule::sphere(radial, angular, theta));
    }
    let d = dictionary.max_degree();
    let kf = k as f64;
    let s = -twist_sign(dictionary);
    let radius = match opts.radius {
        Some(r) => r,
        None => {
            let top = match dictionary {
                Dictionary::Monomials { .. } => d,
                Dictionary::TwistedForms { .. } => d + 1,
            };
            tail_radius(|r| (2 * top + 1) as f64 * r.ln() - 2.0 * kf * s * model.phi(C64::new(r, 0.0)))?
        }
    };
    let radial = opts.radial.unwrap_or(d + 48);
    let angular = opts.angular.unwrap_or(2 * d + 16);
    Ok(QuadratureRule::disc(radius, radial, angular, theta))
}

/// `out[(i, j)] = Σ_n w_n conj(v_i(n)) f_n v_j(n)` for row-major `values`.
fn weighted_products(values: &ComplexMatrix, weights: &[f64], f: Option<&[f64]>) -> ComplexMatrix {
    let d = values.rows();
    let n = values.cols();
    let blocks: Vec<(usize, usize)> = (0..n)
        .step_by(NODE_BLOCK)
        .map(|s| (s, (s + NODE_BLOCK).min(n)))
        .collect();
    let partials: Vec<ComplexMatrix> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let rows: Vec<&[C64]> = (0..d).map(|i| &values.row(i)[s..e]).collect();
            let w: Vec<f64> = match f {
                Some(f) => (s..e).map(|j| weights[j] * f[j]).collect(),
                None => weights[s..e].to_vec(),
            };
            block_products(&rows, &rows, &w)
        })
        .collect();
    finish_products(partials, d)
}

fn block_products(left: &[&[C64]], right: &[&[C64]], w: &[f64]) -> ComplexMatrix {
    let d = left.len();
    let mut g = ComplexMatrix::zeros(d, d);
    let wl: Vec<Vec<C64>> = left
        .iter()
        .map(|v| v.iter().zip(w).map(|(x, &wi)| x.conj() * wi).collect())
        .collect();
    for i in 0..d {
        for j in i..d {
            let mut acc = C64::new(0.0, 0.0);
            for (a, b) in wl[i].iter().zip(right[j].iter()) {
                acc += a * b;
            }
            g[(i, j)] = acc;
        }
    }
    g
}

fn finish_products(partials: Vec<ComplexMatrix>, d: usize) -> ComplexMatrix {
    let mut g =
        pairwise_reduce(partials, |a, b| a.add(&b).expect("shapes")).unwrap_or_else(|| ComplexMatrix::zeros(d, d));
    for i in 0..d {
        for j in 0..i {
            g[(i, j)] = g[(j, i)].conj();
        }
        g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
    }
    g
}

fn assemble_space(
    model: &KahlerModel,
    k: usize,
    q: usize,
    dictionary: Dictionary,
    opts: &BasisOptions,
) -> Result<QuantumBasis> {
    let exps = dictionary.exponents();
    let log_ref = reference_norms(model, k, &exps);
    let grid = default_grid(model, k, dictionary, opts)?;
    let kf = k as f64;
    let twist = twist_sign(dictionary);
    let d = exps.len();
    let n = grid.len();
    let kphi: Vec<f64> = grid.nodes.par_iter().map(|&z| kf * model.phi(z)).collect();

    let blocks: Vec<(usize, usize)> = (0..n)
        .step_by(NODE_BLOCK)
        .map(|s| (s, (s + NODE_BLOCK).min(n)))
        .collect();
    let eval_block = |s: usize, e: usize, deriv: bool| -> Vec<Vec<C64>> {
        let mut rows = vec![vec![C64::new(0.0, 0.0); e - s]; d];
        let mut buf = vec![C64::new(0.0, 0.0); d];
        for j in s..e {
            if deriv {
                fill_derivative_values(&exps, &log_ref, kphi[j], grid.nodes[j], &mut buf);
            } else {
                fill_values(&exps, &log_ref, twist * kphi[j], grid.nodes[j], &mut buf);
            }
            for (row, v) in rows.iter_mut().zip(&buf) {
                row[j - s] = *v;
            }
        }
        rows
    };

    let partials: Vec<(ComplexMatrix, Option<ComplexMatrix>)> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let w = &grid.weights[s..e];
            let vals = eval_block(s, e, false);
            let refs: Vec<&[C64]> = vals.iter().map(|v| v.as_slice()).collect();
            let g = block_products(&refs, &refs, w);
            let qf = (q == 1).then(|| {
                let dv = eval_block(s, e, true);
                let refs: Vec<&[C64]> = dv.iter().map(|v| v.as_slice()).collect();
                block_products(&refs, &refs, w)
            });
            (g, qf)
        })
        .collect();
    let (gp, qp): (Vec<_>, Vec<_>) = partials.into_iter().unzip();
    let gram = finish_products(gp, d);
    let transform = orthonormalizing_transform(&gram)?;
    let dropped = d - transform.cols();

    let mut spectrum = Vec::new();
    let mut first_excluded = None;
    let mut diagnostic = None;
    let cutoff_exponent = opts.cutoff_exponent.unwrap_or(DEFAULT_CUTOFF_EXPONENT);
    let coeffs = if q == 1 {
        let qform = finish_products(qp.into_iter().map(|x| x.expect("q = 1")).collect(), d);
        let mut reduced = transform.adjoint().matmul(&qform.matmul(&transform)?)?;
        reduced.symmetrize();
        let eig = hermitian_eig(&reduced)?;
        let cutoff = kf.powi(-(cutoff_exponent as i32));
        let keep: Vec<usize> = (0..eig.values.len()).filter(|&j| eig.values[j] <= cutoff).collect();
        spectrum = keep.iter().map(|&j| eig.values[j]).collect();
        first_excluded = eig
            .values
            .iter()
            .cloned()
            .filter(|&v| v > cutoff)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
        if keep.is_empty() {
            diagnostic = Some(format!(
                "no eigenvalue of the truncated Kodaira form below k^-{cutoff_exponent} = {cutoff:e}"
            ));
        }
        let u = ComplexMatrix::from_fn(eig.vectors.rows(), keep.len(), |i, c| eig.vectors[(i, keep[c])]);
        transform.matmul(&u)?
    } else {
        transform
    };
    if dropped > 0 && diagnostic.is_none() {
        diagnostic = Some(format!(
            "{dropped} dictionary directions dropped as numerically dependent"
        ));
    }

    let dim = coeffs.cols();
    let chunks: Vec<Vec<Vec<C64>>> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let vals = eval_block(s, e, false);
            (0..dim)
                .map(|a| {
                    let mut out = vec![C64::new(0.0, 0.0); e - s];
                    for (i, v) in vals.iter().enumerate() {
                        let c = coeffs[(i, a)];
                        if c == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for (o, x) in out.iter_mut().zip(v) {
                            *o += c * x;
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    let mut grid_values = ComplexMatrix::zeros(dim, n);
    for (&(s, e), chunk) in blocks.iter().zip(&chunks) {
        for (a, row) in chunk.iter().enumerate() {
            grid_values.row_mut(a)[s..e].copy_from_slice(row);
        }
    }

    let check = crate::numkit::gram::transformed_gram(&gram, &coeffs);
    let gram_residual = check.sub(&ComplexMatrix::identity(dim))?.max_abs();

    Ok(QuantumBasis {
        model: model.clone(),
        k,
        q,
        dictionary,
        coeffs,
        grid,
        grid_values,
        cutoff_exponent,
        spectrum,
        first_excluded,
        dropped,
        gram_residual,
        diagnostic,
        log_ref,
        exponents: exps,
        id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
    })
}
