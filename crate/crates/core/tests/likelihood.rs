use zar_core::model::{log_likelihood, GradientMode};
use zar_core::rng::{open_uniform, substream};
use zar_core::{
    fit, Coefficients, ContinuousFamily, Dataset, FitOptions, Link, SubmodelSpec, ZarModelSpec, ZeroAdjusted,
};

const X: [f64; 8] = [0.1, 0.35, 0.5, 0.62, 0.8, 0.95, 0.2, 0.7];

fn spec(family: ContinuousFamily, mu_link: Link) -> ZarModelSpec {
    ZarModelSpec::new(
        family,
        SubmodelSpec::new(["x"], mu_link),
        SubmodelSpec::intercept_only(Link::Log),
        SubmodelSpec::new(["x"], Link::Logit),
    )
    .unwrap()
}

fn data(y: &[f64], x: &[f64]) -> Dataset {
    Dataset::new(y.to_vec(), vec!["x".into()], vec![x.to_vec()]).unwrap()
}

/// Reference values from an independent 50-digit evaluation with mpmath.
#[test]
fn loglik_matches_high_precision_oracle() {
    let cases = [
        (
            ContinuousFamily::Beta01,
            Link::Logit,
            [0.0, 0.21, 0.4, 0.0, 0.73, 0.55, 0.05, 0.9],
            Coefficients { mu: vec![-0.4, 1.2], phi: vec![2.5], alpha: vec![-1.0, 0.8] },
            -11.907716624168702738,
        ),
        (
            ContinuousFamily::Gamma,
            Link::Log,
            [0.0, 1.3, 0.4, 2.2, 0.0, 5.1, 0.9, 1.7],
            Coefficients { mu: vec![0.2, 0.9], phi: vec![-0.6], alpha: vec![-0.5, -1.1] },
            -12.665172791275016222,
        ),
        (
            ContinuousFamily::InverseGaussian,
            Link::Log,
            [3.2, 0.0, 11.5, 0.0, 4.4, 25.0, 7.7, 0.0],
            Coefficients { mu: vec![1.5, 1.0], phi: vec![-1.2], alpha: vec![0.3, -0.9] },
            -23.008662364208717950,
        ),
    ];
    for (family, link, y, coef, expected) in cases {
        let ll = log_likelihood(&spec(family, link), &data(&y, &X), &coef).unwrap();
        assert!((ll - expected).abs() < 1e-10 * expected.abs(), "{family}: {ll} vs {expected}");
    }
}

fn simulate(family: ContinuousFamily, mu_link: Link, truth: &Coefficients, n: usize, seed: u64) -> Dataset {
    let mut rng = substream(seed, 0);
    let x: Vec<f64> = (0..n).map(|_| open_uniform(&mut rng)).collect();
    let inv = |l: Link, b: &[f64], x: f64| l.inverse(b[0] + b.get(1).map_or(0.0, |s| s * x));
    let y = x
        .iter()
        .map(|&x| {
            let d = ZeroAdjusted::new(
                family,
                inv(Link::Logit, &truth.alpha, x),
                inv(mu_link, &truth.mu, x),
                inv(Link::Log, &truth.phi, x),
            )
            .unwrap();
            d.sample(&mut rng)
        })
        .collect::<Vec<_>>();
    data(&y, &x)
}

fn gamma_truth() -> Coefficients {
    Coefficients { mu: vec![0.5, 1.0], phi: vec![-0.7], alpha: vec![-0.8, 0.9] }
}

#[test]
fn score_vanishes_at_the_mle() {
    let s = spec(ContinuousFamily::Gamma, Link::Log);
    let d = simulate(ContinuousFamily::Gamma, Link::Log, &gamma_truth(), 400, 3);
    let f = fit(&s, &d, &FitOptions::default()).unwrap();
    assert!(f.converged());
    let base = f.coefficients.flatten();
    let ll = |v: &[f64]| {
        let c = Coefficients { mu: v[0..2].to_vec(), phi: v[2..3].to_vec(), alpha: v[3..5].to_vec() };
        log_likelihood(&s, &d, &c).unwrap()
    };
    for j in 0..base.len() {
        let h = 1e-5;
        let (mut up, mut dn) = (base.clone(), base.clone());
        up[j] += h;
        dn[j] -= h;
        let g = (ll(&up) - ll(&dn)) / (2.0 * h);
        assert!(g.abs() < 1e-4, "coefficient {j}: score {g}");
    }
}

#[test]
fn analytic_and_numeric_gradients_reach_the_same_fit() {
    for (family, link, truth) in [
        (ContinuousFamily::Gamma, Link::Log, gamma_truth()),
        (
            ContinuousFamily::Beta01,
            Link::Logit,
            Coefficients { mu: vec![-0.5, 1.0], phi: vec![3.0], alpha: vec![-1.0, 0.5] },
        ),
        (
            ContinuousFamily::InverseGaussian,
            Link::Log,
            Coefficients { mu: vec![1.0, 0.8], phi: vec![-2.0], alpha: vec![-0.5, 0.5] },
        ),
    ] {
        let s = spec(family, link);
        let d = simulate(family, link, &truth, 300, 17);
        let a = fit(&s, &d, &FitOptions::default()).unwrap();
        let n = fit(&s, &d, &FitOptions { gradient: GradientMode::CentralDifference, ..FitOptions::default() }).unwrap();
        assert!(a.converged() && n.converged(), "{family}");
        assert!((a.loglik - n.loglik).abs() < 1e-7 * a.loglik.abs().max(1.0), "{family}");
        for (u, v) in a.coefficients.flatten().iter().zip(n.coefficients.flatten()) {
            assert!((u - v).abs() < 1e-4 * u.abs().max(1.0), "{family}: {u} vs {v}");
        }
    }
}

#[test]
fn loglik_ignores_row_order() {
    let s = spec(ContinuousFamily::Gamma, Link::Log);
    let d = simulate(ContinuousFamily::Gamma, Link::Log, &gamma_truth(), 60, 5);
    let rows: Vec<usize> = (0..d.len()).rev().collect();
    let shuffled = d.select_rows(&rows);
    let a = log_likelihood(&s, &d, &gamma_truth()).unwrap();
    let b = log_likelihood(&s, &shuffled, &gamma_truth()).unwrap();
    assert!((a - b).abs() < 1e-10 * a.abs());

    let fa = fit(&s, &d, &FitOptions::default()).unwrap();
    let fb = fit(&s, &shuffled, &FitOptions::default()).unwrap();
    assert!((fa.loglik - fb.loglik).abs() < 1e-9 * fa.loglik.abs());
}

#[test]
fn rescaling_a_covariate_rescales_its_slopes() {
    let s = spec(ContinuousFamily::Gamma, Link::Log);
    let d = simulate(ContinuousFamily::Gamma, Link::Log, &gamma_truth(), 300, 8);
    let mut scaled = d.clone();
    scaled.scale_column("x", 1000.0).unwrap();
    let a = fit(&s, &d, &FitOptions::default()).unwrap();
    let b = fit(&s, &scaled, &FitOptions::default()).unwrap();
    assert!((a.loglik - b.loglik).abs() < 1e-8 * a.loglik.abs());
    for (u, v) in [(a.coefficients.mu[1], b.coefficients.mu[1]), (a.coefficients.alpha[1], b.coefficients.alpha[1])] {
        assert!((u - 1000.0 * v).abs() < 1e-5 * u.abs().max(1.0), "{u} vs {v}");
    }
    assert!((a.coefficients.mu[0] - b.coefficients.mu[0]).abs() < 1e-5);
}

#[test]
fn mle_recovers_truth_in_large_samples() {
    let truth = gamma_truth();
    let s = spec(ContinuousFamily::Gamma, Link::Log);
    let d = simulate(ContinuousFamily::Gamma, Link::Log, &truth, 5000, 21);
    let f = fit(&s, &d, &FitOptions::default()).unwrap();
    let vcov = f.vcov_matrix().unwrap();
    for (j, (est, t)) in f.coefficients.flatten().iter().zip(truth.flatten()).enumerate() {
        let se = vcov[(j, j)].sqrt();
        assert!(((est - t) / se).abs() < 4.0, "coefficient {j}: {est} vs {t} (se {se})");
    }
}
