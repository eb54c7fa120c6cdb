use std::f64::consts::PI;
use std::sync::Arc;
use toeplab::asymptotics::*;
use toeplab::geometry::{KCoordinates, KahlerModel};
use toeplab::numkit::{Jet, JetSpace, C64};
use toeplab::quantum::{build_basis, QuantumBasis};
use toeplab::symbol::{Expr, Symbol};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn points() -> Vec<C64> {
    vec![C64::new(0.1, 0.05), C64::new(0.35, -0.2), C64::new(-0.25, 0.4)]
}

#[test]
fn fs_bergman_coefficients() {
    let model = KahlerModel::cp1_fs();
    for x in points() {
        let cs = closed_form_coefficients(&model, &Symbol::one(), x, 2).unwrap();
        // exact density (k+1)/2π
        assert!(rel(cs.values[0], c(1.0 / (2.0 * PI))) < 1e-12);
        assert!(rel(cs.values[1], c(1.0 / (2.0 * PI))) < 1e-12);
        assert!(cs.values[2].norm() < 1e-12);
    }
}

#[test]
fn flat_model_has_no_corrections() {
    let cs = closed_form_coefficients(&KahlerModel::bargmann(), &Symbol::one(), C64::new(0.3, 0.1), 2).unwrap();
    assert!(rel(cs.values[0], c(1.0 / (2.0 * PI))) < 1e-14);
    assert!(cs.values[1].norm() < 1e-14);
    assert!(cs.values[2].norm() < 1e-14);
}

#[test]
fn leading_coefficient_is_density() {
    let model = KahlerModel::cp1_fs().perturbed(0.1);
    let f = Symbol::new("x3", Expr::x3());
    for x in points() {
        let cs = closed_form_coefficients(&model, &f, x, 0).unwrap();
        let cf = ClosedForm::new(&model, x).unwrap();
        let direct = f.at(x) * cf.mu / (2.0 * PI);
        assert!((cs.values[0] - direct).norm() < 1e-12 * direct.norm().max(1.0));
    }
}

#[test]
fn laplacian_term_on_bargmann() {
    // T_{|z|^2} on Bargmann space is diagonal with (m+1)/k, so its kernel
    // diagonal at 0 is k/2π · 1/k: b_{f,1}(0) = 1/2π for f = |z|^2.
    let cs = closed_form_coefficients(&KahlerModel::bargmann(), &Symbol::parse("r2").unwrap(), c(0.0), 1).unwrap();
    assert!(rel(cs.values[1], c(1.0 / (2.0 * PI))) < 1e-13);
}

#[test]
fn composition_with_constant() {
    let model = KahlerModel::cp1_fs().perturbed(0.1);
    let f = Symbol::new("x1", Expr::x1());
    for x in points() {
        let a = composition_coefficients(&model, &f, &Symbol::one(), x, 2).unwrap();
        let b = closed_form_coefficients(&model, &f, x, 2).unwrap();
        for j in 0..3 {
            assert!((a.values[j] - b.values[j]).norm() < 1e-12);
        }
    }
}

#[test]
fn bargmann_exact_products() {
    // T_z T_zbar = T_{|z|^2} − 1/k and T_zbar T_z = T_{|z|^2} on Bargmann space.
    let model = KahlerModel::bargmann();
    let z = Symbol::parse("z").unwrap();
    let zb = Symbol::parse("zbar").unwrap();
    let r2 = Symbol::parse("r2").unwrap();
    for x in [c(0.0), C64::new(0.4, -0.3)] {
        let b_r2 = closed_form_coefficients(&model, &r2, x, 2).unwrap();
        let a = composition_coefficients(&model, &z, &zb, x, 2).unwrap();
        assert!(rel(a.values[1] - b_r2.values[1], c(-1.0 / (2.0 * PI))) < 1e-12);
        assert!((a.values[2] - b_r2.values[2]).norm() < 1e-12);
        let b = composition_coefficients(&model, &zb, &z, x, 2).unwrap();
        assert!((b.values[1] - b_r2.values[1]).norm() < 1e-12);
        assert!((b.values[2] - b_r2.values[2]).norm() < 1e-12);
    }
}

#[test]
fn real_symbol_self_composition_sign() {
    let model = KahlerModel::cp1_fs().perturbed(0.1);
    let f = Symbol::new("x1", Expr::x1());
    let f2 = f.product(&f);
    for x in points() {
        let a = composition_coefficients(&model, &f, &f, x, 1).unwrap();
        let b = closed_form_coefficients(&model, &f2, x, 1).unwrap();
        let d = a.values[1] - b.values[1];
        assert!(d.re <= 0.0 && d.im.abs() < 1e-14);
    }
}

#[test]
fn star_product_structure() {
    let model = KahlerModel::cp1_fs().perturbed(0.05);
    let f = Symbol::new("x3", Expr::x3());
    let g = Symbol::new("x1", Expr::x1());
    let pts = [
        C64::new(0.0, 0.0),
        C64::new(0.5, 0.1),
        C64::new(-0.3, 0.7),
        C64::new(1.2, -0.4),
        C64::new(-0.8, -0.9),
    ];
    for &x in &pts {
        let s = star_product(&model, &f, &g, x, 2).unwrap();
        assert!((s[0] - f.at(x) * g.at(x)).norm() < 1e-14);
        let one = star_product(&model, &f, &Symbol::one(), x, 1).unwrap();
        assert!(one[1].norm() < 1e-14);
        let t = star_product(&model, &g, &f, x, 1).unwrap();
        let pb = poisson_bracket(&model, &f, &g, x).unwrap();
        assert!((s[1] - t[1] - C64::new(0.0, 1.0) * pb).norm() < 1e-12);
        let sym = poisson_symbol(&model, &f, &g).unwrap();
        assert!((sym.at(x) - pb).norm() < 1e-12);
    }
}

#[test]
fn star_associativity_order_one() {
    let model = KahlerModel::cp1_fs().perturbed(0.1);
    let syms = [Expr::x1(), Expr::x2(), Expr::x3() * Expr::x3()];
    for x in [
        C64::new(0.2, 0.1),
        C64::new(-0.6, 0.3),
        C64::new(0.9, -0.7),
        C64::new(0.0, -0.4),
        C64::new(1.5, 0.2),
    ] {
        let cf = ClosedForm::new(&model, x).unwrap();
        let j: Vec<Jet> = syms.iter().map(|e| e.jet(x, CLOSED_FORM_ORDER).unwrap()).collect();
        let (f, g, h) = (&j[0], &j[1], &j[2]);
        let lhs = (&cf.c1(f, g) * h) + cf.c1(&(f * g), h);
        let rhs = (f * &cf.c1(g, h)) + cf.c1(f, &(g * h));
        assert!((lhs.value() - rhs.value()).norm() < 1e-6);
    }
}

#[test]
fn outside_positive_set_is_domain_error() {
    let r = closed_form_coefficients(&KahlerModel::landau_q1(), &Symbol::one(), c(0.0), 1);
    assert!(matches!(r, Err(toeplab::Error::Domain(_))));
}

#[test]
fn kahler_specialization_matches_general_engine() {
    let model = KahlerModel::cp1_fs().perturbed(0.1);
    let p = C64::new(0.3, -0.2);
    let kc = KCoordinates::new(&model, p, 12).unwrap();
    let f = Expr::x3().powi(2) + Expr::x1();
    let u = kc.pull_back(&f);
    let i = C64::new(0.0, 1.0);
    // F = 2i φ̃, real coordinates w = x1 + i x2.
    let real = JetSpace::shared(2, 12).unwrap();
    let w = Jet::from_terms(&real, &[(vec![1, 0], c(1.0)), (vec![0, 1], i)]);
    let wb = Jet::from_terms(&real, &[(vec![1, 0], c(1.0)), (vec![0, 1], -i)]);
    let to_real = |j: &Jet| j.compose(&[w.clone(), wb.clone()]).unwrap();
    let big_f = to_real(&kc.phi).scale(2.0 * i);
    let prob = StationaryPhaseProblem::new(big_f, to_real(&u), to_real(&kc.v_theta)).unwrap();
    let general = prob.terms(3).unwrap();
    let special = kahler_terms(kc.lambda, &kc.phi1, &kc.v_theta, &u, 3).unwrap();
    for j in 0..3 {
        assert!(
            (general[j] - special[j]).norm() < 1e-9 * special[j].norm().max(1.0),
            "j = {j}"
        );
    }
}

/// `∫ e^{-k x^2 (1 + x^2)} dx` by adaptive Simpson.
fn quartic_line_integral(k: f64) -> f64 {
    fn simpson(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let f = move |x: f64| (-k * x * x * (1.0 + x * x)).exp();
    let (a, b) = (-6.0, 6.0);
    let (fa, fm, fb) = (f(a), f(0.0), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, 1e-15, 50)
}

fn quartic_problem() -> StationaryPhaseProblem {
    let s = JetSpace::shared(2, 12).unwrap();
    let i = C64::new(0.0, 1.0);
    let f = Jet::from_terms(&s, &[(vec![2, 0], i), (vec![0, 2], i), (vec![4, 0], i)]);
    let one = Jet::constant(&s, c(1.0));
    StationaryPhaseProblem::new(f, one.clone(), one).unwrap()
}

#[test]
fn quartic_remainder_scales_like_k_cubed() {
    let p = quartic_problem();
    let mut errs = Vec::new();
    for k in [10.0, 20.0, 40.0, 80.0] {
        let exact = (PI / k).sqrt() * quartic_line_integral(k);
        let approx = stationary_phase_terms(&p, k, 3).unwrap().value;
        errs.push((approx.re - exact).abs() / exact);
        assert!(approx.im.abs() < 1e-14);
    }
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((6.0..10.5).contains(&ratio), "{errs:?}");
    }
}

fn fs_ladder(model: &KahlerModel, ks: &[usize]) -> Vec<Arc<QuantumBasis>> {
    ks.iter().map(|&k| Arc::new(build_basis(model, k).unwrap())).collect()
}

#[test]
fn recursion_reproduces_fs_density() {
    let model = KahlerModel::cp1_fs();
    let bases = fs_ladder(&model, &[16, 24, 32, 48, 64]);
    let refs: Vec<&QuantumBasis> = bases.iter().map(|b| b.as_ref()).collect();
    let p = C64::new(0.3, 0.2);
    let jets = measure_bergman_jets(&refs, p, 2).unwrap();
    let cs = coefficient_recursion(&model, &Symbol::one(), p, 2, &jets).unwrap();
    assert!(rel(cs.values[0], c(1.0 / (2.0 * PI))) < 1e-6);
    assert!(rel(cs.values[1], c(1.0 / (2.0 * PI))) < 0.02, "{:?}", cs.values);
    assert!(cs.values[2].norm() < 0.01);
}
