//! Synthetic designs, sparse coefficient vectors and responses for the
//! simulation studies.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Family, Response};
use crate::error::{Error, Result};
use crate::family::binomial::sigmoid;

/// Deterministic RNG for replication `stream` of a run seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignMode {
    Random,
    Positive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub family: Family,
    /// Weight of the neighbouring columns in the design mixture.
    pub rho: f64,
    /// Noise standard deviation (least squares only).
    pub sigma: f64,
    /// Smallest nonzero magnitude.
    pub b: f64,
    /// Largest nonzero magnitude.
    pub big_b: f64,
    /// Target censoring fraction (Cox only).
    pub censor_rate: f64,
    pub signs: SignMode,
    pub seed: u64,
    /// Explicit coefficient vector; overrides `q`, `b` and `big_b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
}

/// Minimum signal strength: `5 sigma sqrt(2 log p / n)` for least squares,
/// `10 sqrt(2 log p / n)` for logistic and Cox models.
pub fn default_b(family: Family, sigma: f64, n: usize, p: usize) -> f64 {
    let base = (2.0 * (p as f64).ln() / n as f64).sqrt();
    match family {
        Family::Gaussian => 5.0 * sigma * base,
        Family::Binomial | Family::Cox => 10.0 * base,
    }
}

impl GenConfig {
    /// Defaults: `rho = 0.5`, `sigma = 1`, `b` by [`default_b`], `B = 100 b`,
    /// random signs, 20% censoring for Cox.
    pub fn new(family: Family, n: usize, p: usize, q: usize, seed: u64) -> Self {
        let sigma = 1.0;
        let b = default_b(family, sigma, n, p);
        GenConfig {
            n,
            p,
            q,
            family,
            rho: 0.5,
            sigma,
            b,
            big_b: 100.0 * b,
            censor_rate: if family == Family::Cox { 0.2 } else { 0.0 },
            signs: SignMode::Random,
            seed,
            beta: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n < 2 || self.p < 1 {
            return bad(format!("need n >= 2 and p >= 1, got n = {}, p = {}", self.n, self.p));
        }
        if let Some(beta) = &self.beta {
            if beta.len() != self.p {
                return bad(format!("explicit beta has {} entries, p = {}", beta.len(), self.p));
            }
        } else {
            if self.q > self.p {
                return bad(format!("q = {} exceeds p = {}", self.q, self.p));
            }
            if !(self.b > 0.0 && self.b <= self.big_b && self.big_b.is_finite()) {
                return bad(format!("need 0 < b <= B, got b = {}, B = {}", self.b, self.big_b));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be nonnegative, got {}", self.sigma));
        }
        if !(0.0..1.0).contains(&self.censor_rate) {
            return bad(format!("censor_rate must lie in [0, 1), got {}", self.censor_rate));
        }
        Ok(())
    }
}

/// `X_j = Z_j + rho (Z_{j-1} + Z_{j+1})` with i.i.d. standard normal `Z` and
/// `Z_0 = Z_{p+1} = 0`; each column is then rescaled to norm `sqrt(n)`.
pub fn gen_design<R: Rng + ?Sized>(n: usize, p: usize, rho: f64, rng: &mut R) -> DMatrix<f64> {
    let z = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(rng));
    let sqrt_n = (n as f64).sqrt();
    let mut x = z.clone();
    for j in 0..p {
        let mut col = x.column_mut(j);
        if j > 0 {
            col.axpy(rho, &z.column(j - 1), 1.0);
        }
        if j + 1 < p {
            col.axpy(rho, &z.column(j + 1), 1.0);
        }
        let norm = col.norm();
        if norm > 0.0 {
            col *= sqrt_n / norm;
        }
    }
    x
}

/// `q` nonzero entries at uniformly chosen positions, magnitudes uniform on
/// `[b, big_b]`.
pub fn gen_beta<R: Rng + ?Sized>(p: usize, q: usize, b: f64, big_b: f64, signs: SignMode, rng: &mut R) -> Vec<f64> {
    let mut beta = vec![0.0; p];
    let mut support = rand::seq::index::sample(rng, p, q.min(p)).into_vec();
    support.sort_unstable();
    for j in support {
        let magnitude = if big_b > b { rng.random_range(b..=big_b) } else { b };
        let sign = match signs {
            SignMode::Positive => 1.0,
            SignMode::Random => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        beta[j] = sign * magnitude;
    }
    beta
}

fn linear_predictor(x: &DMatrix<f64>, beta: &[f64]) -> Vec<f64> {
    let mut eta = vec![0.0; x.nrows()];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (e, v) in eta.iter_mut().zip(x.column(j).iter()) {
                *e += b * v;
            }
        }
    }
    eta
}

/// Censoring horizon `tau` such that `C ~ Uniform(0, tau)` censors a
/// fraction `rate` of the given event times in expectation.
fn censoring_horizon(times: &[f64], rate: f64) -> f64 {
    let frac = |tau: f64| times.iter().map(|&t| t.min(tau)).sum::<f64>() / (times.len() as f64 * tau);
    let mut hi = times.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    while frac(hi) > rate {
        hi *= 2.0;
    }
    let mut lo = times.iter().copied().fold(f64::INFINITY, f64::min) * 1e-3;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if frac(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Draws a response for design `x` and true coefficients `beta`.
///
/// Cox times are `-log(U) / exp(x'beta)` (unit exponential baseline), censored
/// by independent `Uniform(0, tau)` times.
pub fn gen_response<R: Rng + ?Sized>(
    family: Family,
    x: &DMatrix<f64>,
    beta: &[f64],
    cfg: &GenConfig,
    rng: &mut R,
) -> Response {
    let eta = linear_predictor(x, beta);
    match family {
        Family::Gaussian => Response::Continuous(
            eta.iter()
                .map(|e| {
                    let noise: f64 = StandardNormal.sample(rng);
                    e + cfg.sigma * noise
                })
                .collect(),
        ),
        Family::Binomial => Response::Binary(
            eta.iter()
                .map(|&e| if rng.random::<f64>() < sigmoid(e) { 1.0 } else { 0.0 })
                .collect(),
        ),
        Family::Cox => {
            let times: Vec<f64> = eta
                .iter()
                .map(|&e| {
                    let u: f64 = Open01.sample(rng);
                    (-u.ln() / e.clamp(-500.0, 500.0).exp()).max(f64::MIN_POSITIVE)
                })
                .collect();
            if cfg.censor_rate <= 0.0 {
                return Response::Survival { status: vec![true; times.len()], time: times };
            }
            let tau = censoring_horizon(&times, cfg.censor_rate);
            let mut time = Vec::with_capacity(times.len());
            let mut status = Vec::with_capacity(times.len());
            for t in times {
                let u: f64 = Open01.sample(rng);
                let c = tau * u;
                time.push(t.min(c));
                status.push(t <= c);
            }
            Response::Survival { time, status }
        }
    }
}

/// A generated dataset with its ground truth.
#[derive(Clone, Debug)]
pub struct Generated {
    pub dataset: Dataset,
    pub beta_star: Vec<f64>,
    pub support: Vec<usize>,
}

/// Generates coefficients, then a training set from stream 0 of `cfg.seed`.
pub fn generate(cfg: &GenConfig) -> Result<Generated> {
    let mut rng = rng_for(cfg.seed, 0);
    generate_with(cfg, &mut rng)
}

/// Draws coefficients (unless given explicitly) and one dataset from `rng`.
pub fn generate_with<R: Rng + ?Sized>(cfg: &GenConfig, rng: &mut R) -> Result<Generated> {
    cfg.validate()?;
    let beta_star = match &cfg.beta {
        Some(beta) => beta.clone(),
        None => gen_beta(cfg.p, cfg.q, cfg.b, cfg.big_b, cfg.signs, rng),
    };
    let dataset = sample_dataset(cfg, &beta_star, cfg.n, rng)?;
    let support = beta_star.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(j, _)| j).collect();
    Ok(Generated { dataset, beta_star, support })
}

/// A fresh design and response of `n` rows for fixed coefficients.
pub fn sample_dataset<R: Rng + ?Sized>(cfg: &GenConfig, beta: &[f64], n: usize, rng: &mut R) -> Result<Dataset> {
    let x = gen_design(n, cfg.p, cfg.rho, rng);
    let response = gen_response(cfg.family, &x, beta, cfg, rng);
    Dataset::new(x, response)
}
