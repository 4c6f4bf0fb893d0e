//! Reproducible sampling from the symmetric Dirichlet distribution
//! `Dir(α·1_d)` plus empirical-moment diagnostics.
//!
//! A draw is produced from `d` independent `Gamma(α, 1)` variates normalized
//! by their sum. Gamma variates use the Marsaglia–Tsang squeeze/accept-reject
//! method for shape `≥ 1`; for shape `α < 1` a `Gamma(α+1, 1)` draw is boosted
//! by `V^{1/α}` with `V` uniform. Both steps are exact, so the only
//! distributional error is floating point.
//!
//! The generator is ChaCha8: 64-bit seedable, 256-bit state, with independent
//! streams available via [`DirichletSampler::substream`] for parallel
//! experiments. Equal seed, stream, and parameters reproduce the sample
//! sequence bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::simplex::SimplexPoint;

/// Generator family recorded in run traces and docs.
pub const RNG_FAMILY: &str = "chacha8";

/// Consecutive degenerate normalizations tolerated before giving up.
const MAX_DEGENERATE_RETRIES: u32 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DirichletError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("concentration must be positive and finite, got {0}")]
    BadConcentration(f64),
    #[error("all gamma variates underflowed to zero in {0} consecutive attempts")]
    DegenerateDraw(u32),
    #[error("moment estimation needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
}

/// Stateful sampler for `Dir(α·1_d)`.
///
/// A sampler instance is single-owner; for concurrent work create one
/// instance per thread with [`DirichletSampler::substream`] or distinct
/// seeds.
#[derive(Debug, Clone)]
pub struct DirichletSampler {
    d: usize,
    alpha: f64,
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl DirichletSampler {
    pub fn new(d: usize, alpha: f64, seed: u64) -> Result<Self, DirichletError> {
        Self::with_stream(d, alpha, seed, 0)
    }

    /// Sampler on an explicit ChaCha stream; streams with the same seed are
    /// mutually independent.
    pub fn with_stream(
        d: usize,
        alpha: f64,
        seed: u64,
        stream: u64,
    ) -> Result<Self, DirichletError> {
        if d < 2 {
            return Err(DirichletError::BadDimension(d));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(DirichletError::BadConcentration(alpha));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            d,
            alpha,
            seed,
            stream,
            rng,
        })
    }

    /// Fresh sampler sharing this sampler's seed on a different stream.
    pub fn substream(&self, stream: u64) -> Self {
        Self::with_stream(self.d, self.alpha, self.seed, stream)
            .expect("parameters already validated")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Draw one point of `Δ_d` distributed `Dir(α·1_d)`.
    ///
    /// Small `α` concentrates mass on the vertices and the gamma variates can
    /// all underflow to zero; such draws are rejected and retried, with
    /// [`DirichletError::DegenerateDraw`] after 100 consecutive failures.
    pub fn sample(&mut self) -> Result<SimplexPoint, DirichletError> {
        for _ in 0..MAX_DEGENERATE_RETRIES {
            let mut coords = vec![0.0; self.d];
            let mut sum = 0.0;
            for c in &mut coords {
                let g = sample_gamma(&mut self.rng, self.alpha);
                *c = g;
                sum += g;
            }
            if sum > 0.0 && sum.is_finite() {
                for c in &mut coords {
                    *c /= sum;
                }
                return Ok(SimplexPoint::new(coords).expect("normalized gamma variates"));
            }
        }
        Err(DirichletError::DegenerateDraw(MAX_DEGENERATE_RETRIES))
    }

    /// Sample mean and unbiased sample covariance of `n` fresh draws.
    pub fn empirical_moments(
        &mut self,
        n: usize,
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>), DirichletError> {
        if n < 2 {
            return Err(DirichletError::TooFewSamples(n));
        }
        let d = self.d;
        let mut draws = Vec::with_capacity(n * d);
        for _ in 0..n {
            draws.extend_from_slice(self.sample()?.coords());
        }
        let mut mean = vec![0.0; d];
        for row in draws.chunks_exact(d) {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut cov = vec![vec![0.0; d]; d];
        for row in draws.chunks_exact(d) {
            for i in 0..d {
                let ai = row[i] - mean[i];
                for j in i..d {
                    cov[i][j] += ai * (row[j] - mean[j]);
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                cov[i][j] /= (n - 1) as f64;
                cov[j][i] = cov[i][j];
            }
        }
        Ok((mean, cov))
    }
}

/// Standard normal variate via Box–Muller.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // rng.random::<f64>() is in [0, 1); flip to (0, 1] so the log is finite.
    let u1 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `Gamma(shape, 1)` variate, exact for any positive shape.
///
/// Shape `≥ 1` uses Marsaglia–Tsang: squeeze on `u < 1 - 0.0331·x⁴`, full
/// log-density accept-reject otherwise. Shape `< 1` boosts a `Gamma(shape+1)`
/// draw by `V^{1/shape}`.
fn sample_gamma(rng: &mut ChaCha8Rng, shape: f64) -> f64 {
    if shape < 1.0 {
        let boost: f64 = rng.random::<f64>().powf(1.0 / shape);
        return sample_gamma_shape_ge_one(rng, shape + 1.0) * boost;
    }
    sample_gamma_shape_ge_one(rng, shape)
}

fn sample_gamma_shape_ge_one(rng: &mut ChaCha8Rng, shape: f64) -> f64 {
    debug_assert!(shape >= 1.0);
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.random();
        if u < 1.0 - 0.0331 * x * x * x * x {
            return d * v;
        }
        // u == 0 gives ln(u) = -inf and accepts, which is correct.
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
