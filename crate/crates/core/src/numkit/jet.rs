//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f(x) / α!` of a function
//! of `nvars` variables up to total degree `order`. Arithmetic and elementary
//! functions propagate through the truncated power-series algebra, so every
//! partial derivative comes out exact up to rounding. This plays the role of
//! nested hyper-dual numbers without their exponential storage growth.
//!
//! Chart functions are expanded in the independent variables `(z, z̄)`, so
//! `partial(&[a, b])` is `∂_z^a ∂_z̄^b f`.

use super::matrix::C64;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

/// Largest supported total order.
pub const MAX_JET_ORDER: usize = 12;

/// Default order for chart-function jets.
pub const DEFAULT_JET_ORDER: usize = 6;

/// Monomial layout shared by all jets with the same `(nvars, order)`.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)` with `x^{e_i} x^{e_j} = x^{e_k}` and total degree within `order`.
    products: Vec<(u32, u32, u32)>,
    /// `factorials[i] = α!` for monomial `i`.
    factorials: Vec<f64>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "JetSpace(nvars={}, order={})", self.nvars, self.order)
    }
}

impl JetSpace {
    /// Shared, cached instance for the given shape.
    pub fn shared(nvars: usize, order: usize) -> Result<Arc<JetSpace>> {
        if order > MAX_JET_ORDER {
            return Err(Error::UnsupportedOrder {
                requested: order,
                max: MAX_JET_ORDER,
            });
        }
        if nvars == 0 || nvars > 4 {
            return Err(Error::Invalid(format!("jets support 1..=4 variables, got {nvars}")));
        }
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet cache poisoned");
        Ok(guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, order)))
            .clone())
    }

    fn build(nvars: usize, order: usize) -> Self {
        let mut exponents = Vec::new();
        for deg in 0..=order {
            let mut current = vec![0u8; nvars];
            enumerate_degree(nvars, deg, 0, &mut current, &mut exponents);
        }
        let degrees: Vec<usize> = exponents.iter().map(|e| e.iter().map(|&a| a as usize).sum()).collect();
        let index: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut products = Vec::new();
        for i in 0..exponents.len() {
            for j in 0..exponents.len() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                let sum: Vec<u8> = exponents[i].iter().zip(&exponents[j]).map(|(a, b)| a + b).collect();
                products.push((i as u32, j as u32, index[&sum] as u32));
            }
        }
        let factorials = exponents
            .iter()
            .map(|e| e.iter().map(|&a| factorial(a as usize)).product())
            .collect();
        Self {
            nvars,
            order,
            exponents,
            degrees,
            index,
            products,
            factorials,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exponents
    }

    pub fn index_of(&self, exps: &[usize]) -> Option<usize> {
        if exps.len() != self.nvars {
            return None;
        }
        let key: Vec<u8> = exps.iter().map(|&a| a as u8).collect();
        self.index.get(&key).copied()
    }
}

fn enumerate_degree(nvars: usize, remaining: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if pos == nvars - 1 {
        cur[pos] = remaining as u8;
        out.push(cur.clone());
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a as u8;
        enumerate_degree(nvars, remaining - a, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Truncated Taylor expansion around a base point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<C64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("space", &self.space)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: C64) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); space.len()];
        coeffs[0] = c;
        Self {
            space: space.clone(),
            coeffs,
        }
    }

    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Self::constant(space, C64::new(0.0, 0.0))
    }

    /// The coordinate `x_var` expanded at `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: C64) -> Self {
        let mut j = Self::constant(space, value);
        if space.order >= 1 {
            let mut e = vec![0usize; space.nvars];
            e[var] = 1;
            let idx = space.index_of(&e).expect("degree-one monomial");
            j.coeffs[idx] = C64::new(1.0, 0.0);
        }
        j
    }

    /// Build from a list of `(exponents, taylor coefficient)` pairs.
    pub fn from_terms(space: &Arc<JetSpace>, terms: &[(Vec<usize>, C64)]) -> Self {
        let mut j = Self::zero(space);
        for (e, c) in terms {
            if let Some(i) = space.index_of(e) {
                j.coeffs[i] += c;
            }
        }
        j
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::Dimension(format!(
                "{} jet coefficients for a space of {}",
                coeffs.len(),
                space.len()
            )));
        }
        Ok(Self {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn value(&self) -> C64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Taylor coefficient `∂^α f / α!`; zero beyond the stored order.
    pub fn taylor(&self, exps: &[usize]) -> C64 {
        self.space
            .index_of(exps)
            .map(|i| self.coeffs[i])
            .unwrap_or(C64::new(0.0, 0.0))
    }

    /// Mixed partial derivative `∂^α f`.
    pub fn partial(&self, exps: &[usize]) -> C64 {
        match self.space.index_of(exps) {
            Some(i) => self.coeffs[i] * self.space.factorials[i],
            None => C64::new(0.0, 0.0),
        }
    }

    /// Same expansion with the constant term replaced.
    pub fn with_value(&self, c: C64) -> Self {
        let mut j = self.clone();
        j.coeffs[0] = c;
        j
    }

    /// Jet of `∂f/∂x_var`, one order lower in content (stored in the same space).
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for (i, e) in self.space.exponents.iter().enumerate() {
            if e[var] == 0 {
                continue;
            }
            let mut lower: Vec<usize> = e.iter().map(|&a| a as usize).collect();
            lower[var] -= 1;
            let t = self.space.index_of(&lower).expect("lower monomial");
            out.coeffs[t] += self.coeffs[i] * e[var] as f64;
        }
        out
    }

    /// For two-variable `(z, z̄)` jets: the jet of `conj(f)`.
    pub fn conj_swap(&self) -> Self {
        assert_eq!(self.space.nvars, 2, "conj_swap needs (z, z̄) jets");
        let mut out = Self::zero(&self.space);
        for (i, e) in self.space.exponents.iter().enumerate() {
            let t = self
                .space
                .index_of(&[e[1] as usize, e[0] as usize])
                .expect("swapped monomial");
            out.coeffs[t] = self.coeffs[i].conj();
        }
        out
    }

    /// Evaluate the Taylor polynomial at an offset from the base point.
    pub fn eval(&self, offset: &[C64]) -> C64 {
        let n = self.space.nvars;
        let mut powers: Vec<Vec<C64>> = Vec::with_capacity(n);
        for &o in offset.iter().take(n) {
            let mut p = Vec::with_capacity(self.space.order + 1);
            let mut acc = C64::new(1.0, 0.0);
            for _ in 0..=self.space.order {
                p.push(acc);
                acc *= o;
            }
            powers.push(p);
        }
        let mut total = C64::new(0.0, 0.0);
        for (i, e) in self.space.exponents.iter().enumerate() {
            let mut term = self.coeffs[i];
            for (v, &a) in e.iter().enumerate() {
                term *= powers[v][a as usize];
            }
            total += term;
        }
        total
    }

    /// Drop all terms of total degree above `deg`.
    pub fn truncate(&self, deg: usize) -> Self {
        let mut out = self.clone();
        for (i, &d) in self.space.degrees.iter().enumerate() {
            if d > deg {
                out.coeffs[i] = C64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Terms of total degree exactly `deg`.
    pub fn homogeneous(&self, deg: usize) -> Self {
        let mut out = Self::zero(&self.space);
        for (i, &d) in self.space.degrees.iter().enumerate() {
            if d == deg {
                out.coeffs[i] = self.coeffs[i];
            }
        }
        out
    }

    /// Lowest total degree carrying a coefficient above `tol` in magnitude.
    pub fn valuation(&self, tol: f64) -> Option<usize> {
        self.space
            .degrees
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm() > tol)
            .map(|(&d, _)| d)
            .min()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    fn same_space(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.space, &other.space),
            "jets from different spaces: {:?} vs {:?}",
            self.space,
            other.space
        );
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.same_space(other);
        let mut out = vec![C64::new(0.0, 0.0); self.space.len()];
        for &(i, j, k) in &self.space.products {
            let a = self.coeffs[i as usize];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            out[k as usize] += a * other.coeffs[j as usize];
        }
        Self {
            space: self.space.clone(),
            coeffs: out,
        }
    }

    /// `Σ_n g[n] t^n` with `t = self - value(self)`, i.e. composition with a
    /// univariate series given by its Taylor coefficients at `value(self)`.
    pub fn compose_series(&self, g: &[C64]) -> Self {
        let t = self.with_value(C64::new(0.0, 0.0));
        let top = g.len().min(self.space.order + 1);
        let mut acc = Self::constant(&self.space, if top > 0 { g[top - 1] } else { C64::new(0.0, 0.0) });
        for n in (0..top.saturating_sub(1)).rev() {
            acc = acc.mul_ref(&t);
            acc.coeffs[0] += g[n];
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        let mut g = Vec::with_capacity(self.space.order + 1);
        let mut c = a.inv();
        for _ in 0..=self.space.order {
            g.push(c);
            c = -c / a;
        }
        self.compose_series(&g)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let g: Vec<C64> = (0..=self.space.order).map(|n| e / factorial(n)).collect();
        self.compose_series(&g)
    }

    pub fn ln(&self) -> Self {
        let a = self.value();
        let mut g = vec![a.ln()];
        let mut p = C64::new(1.0, 0.0);
        for n in 1..=self.space.order {
            p /= a;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            g.push(p * (sign / n as f64));
        }
        self.compose_series(&g)
    }

    pub fn powf(&self, e: f64) -> Self {
        let a = self.value();
        let mut g = Vec::with_capacity(self.space.order + 1);
        let mut c = a.powf(e);
        for n in 0..=self.space.order {
            g.push(c);
            c = c * (e - n as f64) / ((n + 1) as f64 * a);
        }
        self.compose_series(&g)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Self::constant(&self.space, C64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut m = n as u32;
        while m > 0 {
            if m & 1 == 1 {
                result = result.mul_ref(&base);
            }
            m >>= 1;
            if m > 0 {
                base = base.mul_ref(&base);
            }
        }
        result
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// Substitute `x_i = maps[i]` where each map is a jet (in a possibly
    /// different space) with zero constant term; the base point of `self`
    /// corresponds to the base point of the maps.
    pub fn compose(&self, maps: &[Jet]) -> Result<Jet> {
        if maps.len() != self.space.nvars {
            return Err(Error::Dimension(format!(
                "{} substitutions for {} variables",
                maps.len(),
                self.space.nvars
            )));
        }
        let target = maps[0].space.clone();
        for m in maps {
            m.same_space(&maps[0]);
            if m.value().norm() > 1e-14 * (1.0 + m.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)) {
                return Err(Error::Invalid("substituted jets must vanish at the base point".into()));
            }
        }
        let order = self.space.order;
        let pows: Vec<Vec<Jet>> = maps
            .iter()
            .map(|m| {
                let m = m.with_value(C64::new(0.0, 0.0));
                let mut v = vec![Jet::constant(&target, C64::new(1.0, 0.0))];
                for a in 1..=order {
                    let next = v[a - 1].mul_ref(&m);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Jet::zero(&target);
        for (i, e) in self.space.exponents.iter().enumerate() {
            let c = self.coeffs[i];
            if c.norm() == 0.0 {
                continue;
            }
            let mut term = Jet::constant(&target, c);
            for (v, &a) in e.iter().enumerate() {
                if a > 0 {
                    term = term.mul_ref(&pows[v][a as usize]);
                }
            }
            out = out + term;
        }
        Ok(out)
    }

    /// Re-express in a space of a different order (truncating or zero-padding).
    pub fn reorder(&self, space: &Arc<JetSpace>) -> Result<Jet> {
        if space.nvars != self.space.nvars {
            return Err(Error::Dimension("jet variable count differs".into()));
        }
        let mut out = Jet::zero(space);
        for (i, e) in self.space.exponents.iter().enumerate() {
            let key: Vec<usize> = e.iter().map(|&a| a as usize).collect();
            if let Some(t) = space.index_of(&key) {
                out.coeffs[t] = self.coeffs[i];
            }
        }
        Ok(out)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.same_space(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.same_space(&rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_ref(&rhs)
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &'a Jet) -> Jet {
        self.mul_ref(rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        self.mul_ref(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for a in &mut self.coeffs {
            *a = -*a;
        }
        self
    }
}

/// Numbers that closed-form chart functions can be evaluated over.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    /// A constant in the same algebra as `self`.
    fn lift(&self, c: C64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn powf(&self, e: f64) -> Self;
    fn powi(&self, n: i32) -> Self;
}

impl Scalar for C64 {
    fn lift(&self, c: C64) -> Self {
        c
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn powf(&self, e: f64) -> Self {
        if e == 0.5 {
            Complex64::sqrt(*self)
        } else {
            Complex64::powf(*self, e)
        }
    }
    fn powi(&self, n: i32) -> Self {
        Complex64::powi(self, n)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: C64) -> Self {
        Jet::constant(&self.space, c)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn powf(&self, e: f64) -> Self {
        Jet::powf(self, e)
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
}

/// Jet of a chart function `f(z, z̄)` at `x`, with `z` and `z̄` as the two
/// independent variables. `f` receives the seeded `z` and `z̄` jets.
pub fn hyperdual_jet<F>(f: F, x: C64, order: usize) -> Result<Jet>
where
    F: Fn(&Jet, &Jet) -> Jet,
{
    let space = JetSpace::shared(2, order)?;
    let z = Jet::variable(&space, 0, x);
    let zb = Jet::variable(&space, 1, x.conj());
    Ok(f(&z, &zb))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn norm_squared_mixed_partial() {
        let j = hyperdual_jet(|z, zb| z * zb, C64::new(0.3, -0.7), 2).unwrap();
        assert!((j.partial(&[1, 1]) - c(1.0)).norm() < 1e-15);
        assert!((j.partial(&[2, 0])).norm() < 1e-15);
    }

    #[test]
    fn fs_potential_at_origin() {
        let j = hyperdual_jet(
            |z, zb| (z * zb + z.lift(c(1.0))).ln().scale(c(0.5)),
            C64::new(0.0, 0.0),
            4,
        )
        .unwrap();
        assert!((j.partial(&[1, 1]) - c(0.5)).norm() < 1e-15);
        assert!((j.partial(&[2, 2]) - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn constant_has_no_derivatives() {
        let j = hyperdual_jet(|z, _| z.lift(c(3.0)), C64::new(1.0, 1.0), 6).unwrap();
        for e in j.space().exponents().iter().skip(1) {
            let e: Vec<usize> = e.iter().map(|&a| a as usize).collect();
            assert_eq!(j.partial(&e), c(0.0));
        }
    }

    #[test]
    fn order_limit() {
        let r = hyperdual_jet(|z, _| z.clone(), c(0.0), MAX_JET_ORDER + 1);
        assert!(matches!(r, Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn exp_ln_roundtrip() {
        let j = hyperdual_jet(|z, zb| (z * zb + z.lift(c(2.0))).ln().exp(), C64::new(0.4, 0.1), 8).unwrap();
        let direct = hyperdual_jet(|z, zb| z * zb + z.lift(c(2.0)), C64::new(0.4, 0.1), 8).unwrap();
        for (a, b) in j.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn powf_matches_powi() {
        let x = C64::new(0.2, 0.5);
        let a = hyperdual_jet(|z, zb| (z * zb + z.lift(c(1.0))).powf(-3.0), x, 6).unwrap();
        let b = hyperdual_jet(|z, zb| (z * zb + z.lift(c(1.0))).powi(-3), x, 6).unwrap();
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_shifts() {
        let j = hyperdual_jet(|z, zb| z.powi(3) * zb.clone(), C64::new(0.5, 0.0), 5).unwrap();
        let d = j.derivative(0);
        // ∂_z (z^3 z̄) = 3 z^2 z̄ at z = 1/2
        assert!((d.value() - c(0.375)).norm() < 1e-15);
        assert!((d.partial(&[1, 1]) - c(3.0)).norm() < 1e-14);
    }

    #[test]
    fn compose_linear_substitution() {
        // f(z, w) = z w; z = x + i y, w = x - i y gives x^2 + y^2.
        let s2 = JetSpace::shared(2, 4).unwrap();
        let f = Jet::from_terms(&s2, &[(vec![1, 1], c(1.0))]);
        let x = Jet::variable(&s2, 0, c(0.0));
        let y = Jet::variable(&s2, 1, c(0.0));
        let i = C64::new(0.0, 1.0);
        let z = x.clone() + y.scale(i);
        let w = x - y.scale(i);
        let g = f.compose(&[z, w]).unwrap();
        assert!((g.taylor(&[2, 0]) - c(1.0)).norm() < 1e-15);
        assert!((g.taylor(&[0, 2]) - c(1.0)).norm() < 1e-15);
        assert!(g.taylor(&[1, 1]).norm() < 1e-15);
    }

    #[test]
    fn conj_swap_of_real_function_is_identity() {
        let j = hyperdual_jet(|z, zb| (z * zb + z.lift(c(1.0))).ln(), C64::new(0.3, 0.2), 6).unwrap();
        let s = j.conj_swap();
        for (a, b) in j.coeffs().iter().zip(s.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
