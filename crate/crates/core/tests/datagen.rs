use pdas_core::datagen::{gen_design, generate, rng_for, GenConfig};
use pdas_core::{Family, Response};

fn corr(x: &nalgebra::DMatrix<f64>, a: usize, b: usize) -> f64 {
    let (ca, cb) = (x.column(a), x.column(b));
    let n = x.nrows() as f64;
    let (ma, mb) = (ca.sum() / n, cb.sum() / n);
    let cov: f64 = ca.iter().zip(cb.iter()).map(|(u, v)| (u - ma) * (v - mb)).sum();
    let va: f64 = ca.iter().map(|u| (u - ma).powi(2)).sum();
    let vb: f64 = cb.iter().map(|v| (v - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn independent_columns_when_rho_is_zero() {
    let n = 400;
    let mut total = 0.0;
    let mut pairs = 0;
    for rep in 0..10 {
        let x = gen_design(n, 8, 0.0, &mut rng_for(1, rep));
        for a in 0..8 {
            for b in a + 1..8 {
                total += corr(&x, a, b).abs();
                pairs += 1;
            }
        }
    }
    assert!(total / (pairs as f64) < 3.0 / (n as f64).sqrt());
}

#[test]
fn neighbour_correlation_matches_mixture_covariance() {
    // Interior columns: var = 1 + 2 rho^2, cov(j, j+1) = 2 rho,
    // cov(j, j+2) = rho^2.
    let rho: f64 = 0.5;
    let var = 1.0 + 2.0 * rho * rho;
    let (first, second) = (2.0 * rho / var, rho * rho / var);
    let x = gen_design(100_000, 6, rho, &mut rng_for(4, 0));
    for j in 1..4 {
        assert!((corr(&x, j, j + 1) - first).abs() < 0.01, "{}", corr(&x, j, j + 1));
        assert!((corr(&x, j, j + 2) - second).abs() < 0.01, "{}", corr(&x, j, j + 2));
    }
    assert!(first > 0.5 && second > 0.0 && second < first);
}

#[test]
fn null_binomial_is_a_fair_coin() {
    let n = 4000;
    let mut cfg = GenConfig::new(Family::Binomial, n, 5, 0, 8);
    cfg.beta = Some(vec![0.0; 5]);
    let g = generate(&cfg).unwrap();
    let Response::Binary(y) = g.dataset.response() else { panic!() };
    let mean = y.iter().sum::<f64>() / n as f64;
    assert!((mean - 0.5).abs() < 4.0 / (n as f64).sqrt());
}

#[test]
fn null_uncensored_cox_times_are_unit_exponential() {
    let n = 4000;
    let mut cfg = GenConfig::new(Family::Cox, n, 5, 0, 8);
    cfg.beta = Some(vec![0.0; 5]);
    cfg.censor_rate = 0.0;
    let g = generate(&cfg).unwrap();
    let Response::Survival { time, status } = g.dataset.response() else { panic!() };
    assert!(status.iter().all(|&s| s));
    let mean = time.iter().sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 4.0 / (n as f64).sqrt());
}

#[test]
fn same_config_same_bits() {
    for family in [Family::Gaussian, Family::Binomial, Family::Cox] {
        let cfg = GenConfig::new(family, 50, 10, 3, 77);
        let (a, b) = (generate(&cfg).unwrap(), generate(&cfg).unwrap());
        assert_eq!(a.beta_star, b.beta_star);
        assert_eq!(a.dataset.x(), b.dataset.x());
        assert_eq!(a.dataset.response(), b.dataset.response());
        let mut other = cfg.clone();
        other.seed = 78;
        assert_ne!(generate(&other).unwrap().dataset.x(), a.dataset.x());
    }
}
