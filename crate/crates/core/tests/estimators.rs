use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use routentry::covariates::DesignMatrix;
use routentry::estimators::{
    clustered_sandwich, coefficient_equality_test, fit, fit_logit, fit_probit, fit_relogit, logit_loglik, probit_loglik,
    re_probit_loglik, robust_sandwich, Estimator, ModelSpec,
};
use routentry::synth::{generate, SynthConfig, SynthLink};
use routentry::Error;

fn spec(est: Estimator) -> ModelSpec {
    ModelSpec::new(est.to_string(), est, Vec::new())
}

/// 99.7% two-sided normal quantile.
const Z997: f64 = 2.967_737_925_342_86;

#[test]
fn probit_coverage_over_fifty_datasets() {
    let mut covered = 0;
    for rep in 0..50 {
        let mut c = SynthConfig::new(5000, vec![-1.0, 0.25], SynthLink::Probit, 1000 + rep);
        c.intercept = 0.5;
        let (d, truth) = generate(&c).unwrap();
        let f = fit_probit(&d, &spec(Estimator::Probit)).unwrap();
        if f
            .coefficients
            .iter()
            .zip(&truth.beta)
            .all(|(c, b)| (c.estimate - b).abs() <= Z997 * c.std_error)
        {
            covered += 1;
        }
    }
    assert!(covered >= 45, "{covered} of 50 runs covered every coefficient");
}

#[test]
fn probit_within_three_se() {
    let mut c = SynthConfig::new(5000, vec![-1.0, 0.25], SynthLink::Probit, 42);
    c.intercept = 0.5;
    let (d, truth) = generate(&c).unwrap();
    let f = fit_probit(&d, &spec(Estimator::Probit)).unwrap();
    for (c, b) in f.coefficients.iter().zip(&truth.beta) {
        assert!((c.estimate - b).abs() < 3.0 * c.std_error, "{}: {} vs {b}", c.name, c.estimate);
    }
    assert_eq!(f.diagnostics.stopping_rule, "gradient");
    assert!(f.diagnostics.gradient_norm < 1e-8);
}

fn tiny(link: SynthLink, seed: u64) -> DesignMatrix {
    let mut c = SynthConfig::new(40, vec![0.8], link, seed);
    c.intercept = -0.2;
    generate(&c).unwrap().0
}

#[test]
fn grid_search_agrees_with_newton() {
    for (link, est) in [(SynthLink::Probit, Estimator::Probit), (SynthLink::Logit, Estimator::Logit)] {
        let d = tiny(link, 5);
        let f = fit(&d, &spec(est)).unwrap();
        let b = f.estimates();
        let ll = |x: &[f64]| match est {
            Estimator::Probit => probit_loglik(x, &d).value,
            _ => logit_loglik(x, &d).value,
        };
        let mut best = f64::NEG_INFINITY;
        for i in -150..=150 {
            for j in -150..=150 {
                let x = [b[0] + i as f64 * 0.004, b[1] + j as f64 * 0.004];
                best = best.max(ll(&x));
            }
        }
        assert!(best <= f.log_likelihood + 1e-12);
        assert!(f.log_likelihood - best < 1e-3);
    }
}

fn random_design(rng: &mut ChaCha8Rng) -> DesignMatrix {
    let n = 50;
    let mut x = Vec::with_capacity(n * 3);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        x.extend([1.0, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        y.push(f64::from(u8::from(rng.random::<bool>())));
    }
    let names = vec!["_cons".into(), "A".into(), "B".into()];
    DesignMatrix::new(names, x, y, (0..n as u32).collect()).unwrap()
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let d = random_design(&mut rng);
        let beta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        for f in [probit_loglik, logit_loglik] {
            let g = f(&beta, &d).gradient;
            for j in 0..3 {
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (f(&up, &d).value - f(&dn, &d).value) / (2.0 * h);
                worst = worst.max((fd - g[j]).abs());
            }
        }
    }
    assert!(worst < 1e-6, "max gradient error {worst}");
}

#[test]
fn analytic_hessians_match_gradient_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let h = 1e-6;
    for _ in 0..10 {
        let d = random_design(&mut rng);
        let beta: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        for f in [probit_loglik, logit_loglik] {
            let hess = f(&beta, &d).hessian;
            for j in 0..3 {
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[j] += h;
                dn[j] -= h;
                let col = (f(&up, &d).gradient - f(&dn, &d).gradient) / (2.0 * h);
                for i in 0..3 {
                    assert!((col[i] - hess[(i, j)]).abs() < 1e-5);
                }
            }
        }
    }
}

fn grouped(sd: f64, seed: u64) -> DesignMatrix {
    let mut c = SynthConfig::new(5000, vec![0.7, -0.4], SynthLink::Probit, seed);
    c.intercept = -0.3;
    c.groups = 500;
    c.group_sd = sd;
    generate(&c).unwrap().0
}

#[test]
fn re_probit_at_zero_group_variance_matches_pooled() {
    let d = grouped(0.0, 17);
    let pooled = fit_probit(&d, &spec(Estimator::Probit)).unwrap();
    let re = fit(&d, &spec(Estimator::Xtprobit)).unwrap();
    let vc = re.variance_component.as_ref().unwrap();
    eprintln!("sigma_u = {}", vc.sigma_u);
    for (a, b) in re.coefficients.iter().zip(&pooled.coefficients) {
        assert!((a.estimate - b.estimate).abs() < 1e-4, "{}: {} vs {}", a.name, a.estimate, b.estimate);
    }
    assert!(vc.sigma_u < 0.1);
}

#[test]
fn re_probit_quadrature_refinement() {
    // 12 -> 24 on the boundary design; at sigma = 0.5 twelve nodes are only good to ~1e-3
    // in total lnL, so the interior check compares 24 against 32.
    let d = grouped(0.0, 17);
    let mut s = spec(Estimator::Xtprobit);
    let f12 = fit(&d, &s).unwrap();
    s.quadrature_nodes = 24;
    let f24 = fit(&d, &s).unwrap();
    assert!((f12.log_likelihood - f24.log_likelihood).abs() < 1e-4);

    let d = grouped(0.5, 23);
    let mut s = spec(Estimator::Xtprobit);
    let f12 = fit(&d, &s).unwrap();
    s.quadrature_nodes = 24;
    let f24 = fit(&d, &s).unwrap();
    s.quadrature_nodes = 32;
    let f32 = fit(&d, &s).unwrap();
    assert!((f24.log_likelihood - f32.log_likelihood).abs() < 1e-4);
    assert!((f12.log_likelihood - f32.log_likelihood).abs() < 1e-2);
    let sigma = f12.variance_component.as_ref().unwrap().sigma_u;
    assert!((sigma - 0.5).abs() < 0.2, "sigma {sigma}");
    let mut theta = f12.estimates();
    theta.push(sigma);
    let ll = re_probit_loglik(&theta, &d, 12).unwrap();
    assert!((ll.value - f12.log_likelihood).abs() < 1e-9);
}

#[test]
fn re_probit_gradient_matches_differences() {
    let d = grouped(0.8, 31);
    let theta = [-0.2, 0.5, -0.3, 0.6];
    let g = re_probit_loglik(&theta, &d, 12).unwrap().gradient;
    let h = 1e-5;
    for j in 0..4 {
        let mut up = theta;
        let mut dn = theta;
        up[j] += h;
        dn[j] -= h;
        let fd = (re_probit_loglik(&up, &d, 12).unwrap().value - re_probit_loglik(&dn, &d, 12).unwrap().value) / (2.0 * h);
        assert!((fd - g[j]).abs() < 1e-5 * fd.abs().max(1.0), "{j}: {fd} vs {}", g[j]);
    }
}

#[test]
fn singleton_groups_fall_back_to_pooled() {
    let mut c = SynthConfig::new(800, vec![0.5], SynthLink::Probit, 8);
    c.intercept = 0.1;
    let (d, _) = generate(&c).unwrap();
    let re = fit(&d, &spec(Estimator::Xtprobit)).unwrap();
    let pooled = fit_probit(&d, &spec(Estimator::Probit)).unwrap();
    assert_eq!(re.estimates(), pooled.estimates());
    assert!(!re.notes.is_empty());
    let back = routentry::estimators::FitResult::from_json(&re.to_json().unwrap()).unwrap();
    assert_eq!(back, re);
}

#[test]
fn relogit_shrinks_rare_event_slope_bias() {
    // Mean signed error over replicates; the median-absolute-error comparison lives in
    // the acceptance suite.
    let truth = 1.0;
    let (mut corrected, mut raw) = (0.0, 0.0);
    for rep in 0..200 {
        let mut c = SynthConfig::new(5000, vec![truth], SynthLink::Logit, 5000 + rep);
        c.intercept = -5.1;
        let (d, _) = generate(&c).unwrap();
        let f = fit_relogit(&d, &spec(Estimator::Relogit)).unwrap();
        corrected += f.coefficients[1].estimate - truth;
        raw += f.uncorrected.as_ref().unwrap()[1] - truth;
    }
    assert!(corrected.abs() < raw.abs(), "corrected {corrected} vs uncorrected {raw}");
    assert!(corrected < raw, "correction shrinks toward zero");
}

#[test]
fn relogit_correction_vanishes_on_balanced_data() {
    let c = SynthConfig::new(10_000, vec![0.6, -0.3], SynthLink::Logit, 77);
    let (d, _) = generate(&c).unwrap();
    let f = fit_relogit(&d, &spec(Estimator::Relogit)).unwrap();
    for (c, u) in f.coefficients.iter().zip(f.uncorrected.as_ref().unwrap()) {
        assert!((c.estimate - u).abs() < 1e-2);
    }
    let mut off = spec(Estimator::Relogit);
    off.bias_correction = false;
    let plain = fit_logit(&d, &spec(Estimator::Logit)).unwrap();
    let uncorrected = fit_relogit(&d, &off).unwrap();
    assert_eq!(uncorrected.estimates(), plain.estimates());
    assert_eq!(uncorrected.covariance, plain.covariance);
}

fn scores_and_bread(seed: u64) -> (DMatrix<f64>, Vec<f64>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, k) = (300, 3);
    let scores: Vec<f64> = (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
    let bread = &a * a.transpose() + DMatrix::identity(k, k);
    (bread, scores, n)
}

#[test]
fn singleton_clusters_equal_robust() {
    let (bread, scores, n) = scores_and_bread(1);
    let ids: Vec<u32> = (0..n as u32).collect();
    let c = clustered_sandwich(&bread, &scores, &ids, n).unwrap();
    let r = robust_sandwich(&bread, &scores, n).unwrap();
    assert!((c - r).abs().max() < 1e-10);
}

#[test]
fn cluster_relabeling_is_exact() {
    let (bread, scores, n) = scores_and_bread(2);
    let ids: Vec<u32> = (0..n as u32).map(|i| i / 7).collect();
    let relabeled: Vec<u32> = ids.iter().map(|g| 1_000_003u32.wrapping_mul(g + 11) ^ 0x5a5a).collect();
    let a = clustered_sandwich(&bread, &scores, &ids, n).unwrap();
    let b = clustered_sandwich(&bread, &scores, &relabeled, n).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rescaling_a_regressor_rescales_its_coefficient() {
    let mut c = SynthConfig::new(3000, vec![0.4, -0.6], SynthLink::Probit, 3);
    c.intercept = -0.5;
    let (d, _) = generate(&c).unwrap();
    let mut scaled = d.clone();
    for i in 0..d.n {
        scaled.x[i * d.k + 1] *= 4.0;
    }
    let a = fit_probit(&d, &spec(Estimator::Probit)).unwrap();
    let b = fit_probit(&scaled, &spec(Estimator::Probit)).unwrap();
    assert!((a.coefficients[1].estimate - 4.0 * b.coefficients[1].estimate).abs() < 1e-8);
    assert!((a.log_likelihood - b.log_likelihood).abs() < 1e-8);
    assert!((a.aic - b.aic).abs() < 1e-8);
}

#[test]
fn separation_is_reported() {
    let n = 200;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let v = i as f64 / n as f64 - 0.5;
        x.extend([1.0, v]);
        y.push(f64::from(u8::from(v > 0.0)));
    }
    let d = DesignMatrix::new(vec!["_cons".into(), "V".into()], x, y, (0..n as u32).collect()).unwrap();
    match fit_probit(&d, &spec(Estimator::Probit)) {
        Err(Error::Separation { columns, .. }) => assert_eq!(columns, vec!["V"]),
        other => panic!("expected separation, got {other:?}"),
    }
}

#[test]
fn equality_test_of_identical_fits() {
    let c = SynthConfig::new(2000, vec![0.4], SynthLink::Probit, 4);
    let (d, _) = generate(&c).unwrap();
    let f = fit_probit(&d, &spec(Estimator::Probit)).unwrap();
    let t = coefficient_equality_test(&f, &f).unwrap();
    assert!(t.rows.iter().all(|r| r.z == 0.0 && r.p_value == 1.0));
    assert_eq!(t.wald, 0.0);
}
