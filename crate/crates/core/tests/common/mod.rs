#![allow(dead_code)]

use nalgebra::DMatrix;
use pdas_core::datagen::{self, rng_for, GenConfig};
use pdas_core::{standardize, Dataset, Family, Response, StandardizedDataset};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// A small random standardized instance of the given family.
pub fn random_instance(family: Family, n: usize, p: usize, seed: u64) -> StandardizedDataset {
    standardize(&random_raw(family, n, p, seed)).unwrap()
}

/// The unstandardized data behind [`random_instance`].
pub fn random_raw(family: Family, n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, 99);
    let x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
    let signal: Vec<f64> = (0..n).map(|i| 0.6 * x[(i, 0)] - 0.4 * x[(i, p - 1)]).collect();
    let response = match family {
        Family::Gaussian => Response::Continuous(
            signal.iter().map(|s| s + 0.5 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect(),
        ),
        Family::Binomial => Response::Binary(
            signal
                .iter()
                .map(|s| if rng.random::<f64>() < 1.0 / (1.0 + (-s).exp()) { 1.0 } else { 0.0 })
                .collect(),
        ),
        Family::Cox => {
            let time: Vec<f64> = signal.iter().map(|s| -rng.random::<f64>().max(1e-12).ln() / s.exp()).collect();
            // Round some times to create ties.
            let time = time.iter().enumerate().map(|(i, t)| if i % 7 == 0 { (t * 4.0).ceil() / 4.0 } else { *t }).collect();
            let status = (0..n).map(|i| i % 4 != 0).collect();
            Response::Survival { time, status }
        }
    };
    Dataset::new(x, response).unwrap()
}

/// Gaussian instance with `b` by the default formula at sigma = 1,
/// `B = 10 b` and mild neighbour correlation (`rho = 0.2`). At the default
/// `rho = 0.5` adjacent true columns are often proxied by their neighbours
/// and a single PDAS run can settle on the wrong set.
pub fn planted_gaussian(n: usize, p: usize, q: usize, seed: u64) -> (StandardizedDataset, Vec<usize>) {
    let mut cfg = GenConfig::new(Family::Gaussian, n, p, q, seed);
    cfg.big_b = 10.0 * cfg.b;
    cfg.rho = 0.2;
    let g = datagen::generate(&cfg).unwrap();
    (standardize(&g.dataset).unwrap(), g.support)
}

pub fn rel_close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}
