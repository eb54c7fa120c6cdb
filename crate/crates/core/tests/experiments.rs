use std::f64::consts::{PI, SQRT_2};
use toeplab::experiments::{
    run, ExperimentConfig, ExperimentKind, ExperimentResults, FitTarget, ModelSpec, PhaseKind, StationarySpec,
};
use toeplab::{ModelKind, C64};

fn config(kind: ExperimentKind, model: ModelKind, f: &str, ladder: &[usize]) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, ModelSpec::new(model));
    c.symbols.f = Some(f.into());
    c.k_ladder = Some(ladder.to_vec());
    c
}

/// `Tr T_{x3^2}` on the round sphere from Beta moments: the monomial `z^m`
/// sees `t = |z|^2/(1+|z|^2)` distributed as Beta(m+1, k-m+1).
fn fs_x3_squared_trace(k: usize) -> f64 {
    (0..=k)
        .map(|m| {
            let a = (m + 1) as f64;
            let s = (k + 2) as f64;
            let t1 = a / s;
            let t2 = a * (a + 1.0) / (s * (s + 1.0));
            1.0 - 4.0 * t1 + 4.0 * t2
        })
        .sum()
}

#[test]
fn weyl_traces_match_beta_sums() {
    let out = run(&config(ExperimentKind::Weyl, ModelKind::Cp1Fs, "x3^2", &[8, 16, 24]), 0).unwrap();
    let ExperimentResults::Weyl(w) = out.results else {
        panic!()
    };
    // (2π)^{-1} ∫ x3^2 over the sphere of volume 2π
    assert!((w.integral - 1.0 / 3.0).abs() < 1e-10, "{}", w.integral);
    for l in &w.levels {
        let exact = fs_x3_squared_trace(l.k);
        assert!(
            (l.trace - exact).abs() < 1e-10 * exact,
            "k={}: {} vs {exact}",
            l.k,
            l.trace
        );
        let dev = (exact - l.k as f64 / 3.0) / l.k as f64;
        assert!((l.deviation - dev).abs() < 1e-10);
    }
    assert!(out.pass);
}

#[test]
fn decay_pairs_follow_fs_kernel() {
    let mut c = config(ExperimentKind::Decay, ModelKind::Cp1Fs, "1", &[16, 32]);
    c.decay = Some(toeplab::experiments::DecaySpec {
        directions: 3,
        ..Default::default()
    });
    let out = run(&c, 0).unwrap();
    let ExperimentResults::Decay(d) = out.results else {
        panic!()
    };
    assert!(!d.pairs.is_empty());
    for p in &d.pairs {
        // |P(0, y)| = (k+1)/2π · cos^k(dist/√2) on the round sphere
        let k = p.k as f64;
        let exact = (k + 1.0) / (2.0 * PI) * (p.dist / SQRT_2).cos().powf(k);
        assert!((p.abs_kernel - exact).abs() <= 1e-9 * (k + 1.0), "{p:?} vs {exact}");
        let r = p.y.norm();
        assert!((p.dist - SQRT_2 * r.atan()).abs() < 1e-10);
    }
    assert!((d.reference_rate.unwrap() - 0.25).abs() < 1e-12);
    assert!(d.rate_rel_error.unwrap() < 0.1);
}

#[test]
fn fs_density_fit_recovers_both_coefficients() {
    let mut c = config(ExperimentKind::Expansion, ModelKind::Cp1Fs, "1", &[16, 24, 32, 48, 64]);
    c.points = Some(vec![C64::new(0.2, -0.4)]);
    let out = run(&c, 0).unwrap();
    let ExperimentResults::Expansion(rep) = out.results else {
        panic!()
    };
    let fit = &rep.fits[0];
    assert_eq!(fit.target, FitTarget::Point(C64::new(0.2, -0.4)));
    for (k, v) in fit.k_ladder.iter().zip(&fit.measured) {
        let exact = (*k as f64 + 1.0) / (2.0 * PI);
        assert!((v.re - exact).abs() < 1e-10 * exact);
    }
    assert!((fit.coefficients[0].re - 1.0 / (2.0 * PI)).abs() < 1e-8);
    assert!((fit.coefficients[1].re - 1.0 / (2.0 * PI)).abs() < 1e-6);
}

#[test]
fn degenerate_diagonal_matches_quartic_integral() {
    let mut c = config(ExperimentKind::Degenerate, ModelKind::DegenerateQuartic, "1", &[16, 32]);
    c.points = Some(vec![C64::new(0.0, 0.0)]);
    let out = run(&c, 0).unwrap();
    let ExperimentResults::Degenerate(probes) = out.results else {
        panic!()
    };
    let p = &probes[0];
    assert!(p.degenerate);
    for l in &p.levels {
        // 1 / ∫ e^{-2k|z|^4} 2 dx dy
        let exact = (2.0 * l.k as f64 / PI).sqrt() / PI;
        assert!(
            (l.value.re - exact).abs() < 1e-8 * exact,
            "k={}: {} vs {exact}",
            l.k,
            l.value
        );
    }
    // P(0,0)/k ∝ k^{-1/2}
    assert!((p.ratio.unwrap() - 0.5f64.sqrt()).abs() < 1e-6);
}

#[test]
fn landau_density_is_lowest_level_degeneracy() {
    let mut c = config(ExperimentKind::Landau, ModelKind::LandauQ1, "1", &[16, 32]);
    c.points = Some(vec![C64::new(0.0, 0.0), C64::new(0.2, 0.1)]);
    let out = run(&c, 0).unwrap();
    let ExperimentResults::Landau(reps) = out.results else {
        panic!()
    };
    for r in &reps {
        assert_eq!(r.structural_zeros, vec!["dz".to_string()]);
        assert_eq!(r.dz_component, 0.0);
        for l in &r.levels {
            let exact = l.k as f64 / (2.0 * PI);
            assert!((l.dzbar.re - exact).abs() < 1e-6 * exact);
        }
    }
}

#[test]
fn sphere_volume_is_one() {
    let c = ExperimentConfig::new(ExperimentKind::Curvature, ModelSpec::new(ModelKind::Cp1Fs));
    let out = run(&c, 0).unwrap();
    let ExperimentResults::Curvature(s) = out.results else {
        panic!()
    };
    assert!((s.total_omega.unwrap() - 1.0).abs() < 1e-10);
    for r in &s.reports {
        assert!((r.r.unwrap() - 8.0 * PI).abs() < 1e-8);
    }
}

#[test]
fn quadratic_phase_is_exact() {
    let mut c = ExperimentConfig::new(ExperimentKind::StationaryPhase, ModelSpec::new(ModelKind::Bargmann));
    c.k_ladder = Some(vec![3, 7]);
    c.stationary_phase = Some(StationarySpec {
        phase: PhaseKind::Quadratic,
        amplitude: None,
        terms: 2,
    });
    let out = run(&c, 0).unwrap();
    let ExperimentResults::StationaryPhase(rep) = out.results else {
        panic!()
    };
    for l in &rep.levels {
        // ∫ e^{-k|x|^2}(1 + x1^2 + 3 x1 x2 - 2 x2^2) dx = π/k (1 - 1/(2k))
        let exact = PI / l.k * (1.0 - 0.5 / l.k);
        assert!((l.engine.re - exact).abs() < 1e-13 * exact && l.engine.im.abs() < 1e-13);
    }
}

#[test]
fn forced_resolution_failure_is_reported() {
    let mut c = config(ExperimentKind::Decay, ModelKind::Cp1Fs, "1", &[32, 64]);
    c.quadrature = Some(toeplab::experiments::QuadratureOverrides {
        radial: Some(4),
        angular: Some(4),
        ..Default::default()
    });
    let out = run(&c, 0).unwrap();
    assert!(!out.pass);
}

#[test]
fn random_points_depend_only_on_seed() {
    let mut c = config(ExperimentKind::Curvature, ModelKind::Bargmann, "1", &[]);
    c.random_points = Some(4);
    let a = run(&c, 7).unwrap();
    let b = run(&c, 7).unwrap();
    let other = run(&c, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.points, other.points);
    assert!(a.points.iter().all(|p| p.norm() < 0.5));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let mut c = config(ExperimentKind::Composition, ModelKind::Cp1Fs, "x3", &[8, 12, 16, 24]);
    c.model.epsilon = 0.1;
    c.symbols.g = Some("x1".into());
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| run(&c, 1)).unwrap();
    let b = three.install(|| run(&c, 1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_configs_name_the_key() {
    let mut c = config(ExperimentKind::Expansion, ModelKind::LandauQ1, "1", &[16, 24, 32, 48]);
    assert!(run(&c, 0).unwrap_err().to_string().contains("model"));
    c.model = ModelSpec::new(ModelKind::Cp1Fs);
    c.depth = Some(3);
    assert!(run(&c, 0).unwrap_err().to_string().contains("depth"));
    c.depth = None;
    c.thresholds.insert("ratio".into(), 0.5);
    assert!(run(&c, 0).unwrap_err().to_string().contains("ratio"));
}
