//! One-point zeroth-order gradient estimation on the simplex.
//!
//! A single query at the convex combination `(1-δ)x + δu`, `u ~ Dir(α·1_d)`,
//! gives the raw estimate
//!
//! ```text
//! g = (1/δ) · f((1-δ)x + δu) · P_d u
//! ```
//!
//! whose expectation is `P_d ∇f(x) / (d(αd+1))` up to a bias of at most
//! `2βδ` for β-smooth `f`. The scaled form `g̃ = d(αd+1) · g` is the
//! unit-scale estimate consumed by the optimizers: its inner products with
//! simplex differences track `∇f(x)ᵀ(x'-x)` within `4βδ·d(αd+1)`.
//!
//! The raw and scaled forms are deliberately separate entry points; their
//! normalizations differ and tests target each one on its own.

use thiserror::Error;

use crate::dirichlet::{DirichletError, DirichletSampler};
use crate::objectives::Objective;
use crate::simplex::{center, mix, SimplexError, SimplexPoint};
use crate::stats::VectorMoments;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("delta must lie strictly inside (0, 1), got {0}")]
    DeltaOutOfRange(f64),
    #[error("concentration must be positive and finite, got {0}")]
    BadConcentration(f64),
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("objective evaluated to a non-finite value {value} at a simplex query")]
    ObjectiveEvaluationFailure { value: f64 },
    #[error("bias check needs at least 1000 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
}

/// Parameters of the estimator: dimension, Dirichlet concentration `α`, and
/// mixing parameter `δ ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    d: usize,
    alpha: f64,
    delta: f64,
}

impl EstimatorConfig {
    pub fn new(d: usize, alpha: f64, delta: f64) -> Result<Self, EstimatorError> {
        if d < 2 {
            return Err(EstimatorError::BadDimension(d));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(EstimatorError::BadConcentration(alpha));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(EstimatorError::DeltaOutOfRange(delta));
        }
        Ok(Self { d, alpha, delta })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The normalizing factor `d(αd + 1)` between the raw and scaled forms;
    /// also the inverse of the covariance scale of `Dir(α·1_d)`.
    pub fn scale_factor(&self) -> f64 {
        let d = self.d as f64;
        d * (self.alpha * d + 1.0)
    }
}

/// One draw of the estimator: the estimate itself, the on-simplex query point
/// it came from, the observed value, and the noise vector.
///
/// `g` always sums to zero (it is a multiple of `P_d u`), and the scaled form
/// satisfies `‖g‖ ≤ d(αd+1)·B/δ` when `|f| ≤ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSample {
    pub g: Vec<f64>,
    pub query_point: SimplexPoint,
    pub f_value: f64,
    pub u: SimplexPoint,
}

fn check_dims(
    f: &Objective,
    x: &SimplexPoint,
    cfg: &EstimatorConfig,
    u: &SimplexPoint,
) -> Result<(), EstimatorError> {
    for dim in [f.dim(), x.dim(), u.dim()] {
        if dim != cfg.d {
            return Err(EstimatorError::DimensionMismatch {
                left: cfg.d,
                right: dim,
            });
        }
    }
    Ok(())
}

/// Raw one-point estimate `(1/δ)·f((1-δ)x + δu)·P_d u`.
///
/// Performs exactly one objective evaluation. Its expectation over
/// `u ~ Dir(α·1_d)` lies within `2βδ` of `P_d ∇f(x) / (d(αd+1))`.
pub fn estimate_raw(
    f: &Objective,
    x: &SimplexPoint,
    cfg: &EstimatorConfig,
    u: &SimplexPoint,
) -> Result<EstimatorSample, EstimatorError> {
    check_dims(f, x, cfg, u)?;
    let query_point = mix(x, u, cfg.delta)?;
    let f_value = f.value(&query_point);
    if !f_value.is_finite() {
        return Err(EstimatorError::ObjectiveEvaluationFailure { value: f_value });
    }
    let mut g = center(u.coords())?;
    let scale = f_value / cfg.delta;
    for c in &mut g {
        *c *= scale;
    }
    Ok(EstimatorSample {
        g,
        query_point,
        f_value,
        u: u.clone(),
    })
}

/// Scaled estimate `g̃ = d(αd+1) × raw`; the form consumed by the optimizers.
pub fn estimate_scaled(
    f: &Objective,
    x: &SimplexPoint,
    cfg: &EstimatorConfig,
    u: &SimplexPoint,
) -> Result<EstimatorSample, EstimatorError> {
    let mut sample = estimate_raw(f, x, cfg, u)?;
    let factor = cfg.scale_factor();
    for c in &mut sample.g {
        *c *= factor;
    }
    Ok(sample)
}

/// Monte-Carlo verdict on the raw estimator's bias at one configuration.
///
/// `pass` compares the measured bias norm against the analytic bound `2βδ`
/// plus three standard errors of the Monte-Carlo mean, so sampling noise
/// cannot produce false failures.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub d: usize,
    pub alpha: f64,
    pub delta: f64,
    pub objective_id: String,
    pub n: usize,
    pub mc_mean: Vec<f64>,
    pub target: Vec<f64>,
    pub bias_norm: f64,
    pub bound: f64,
    pub std_err: f64,
    pub pass: bool,
}

/// Estimate the raw estimator's bias at `x` by averaging `n_samples` draws
/// and comparing against the centered-gradient target
/// `P_d ∇f(x) / (d(αd+1))`.
pub fn bias_check(
    f: &Objective,
    x: &SimplexPoint,
    cfg: &EstimatorConfig,
    n_samples: usize,
    sampler: &mut DirichletSampler,
) -> Result<BiasReport, EstimatorError> {
    if n_samples < 1000 {
        return Err(EstimatorError::TooFewSamples(n_samples));
    }
    if sampler.dim() != cfg.d {
        return Err(EstimatorError::DimensionMismatch {
            left: cfg.d,
            right: sampler.dim(),
        });
    }
    let mut moments = VectorMoments::new(cfg.d);
    for _ in 0..n_samples {
        let u = sampler.sample()?;
        let sample = estimate_raw(f, x, cfg, &u)?;
        moments.push(&sample.g);
    }
    let mc_mean = moments.mean();
    let std_err = moments.std_err_norm();
    let target: Vec<f64> = center(&f.oracle_grad(x))?
        .iter()
        .map(|g| g / cfg.scale_factor())
        .collect();
    let bias_norm = mc_mean
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let bound = 2.0 * f.beta() * cfg.delta;
    Ok(BiasReport {
        d: cfg.d,
        alpha: cfg.alpha,
        delta: cfg.delta,
        objective_id: f.name().to_string(),
        n: n_samples,
        mc_mean,
        target,
        bias_norm,
        bound,
        std_err,
        pass: bias_norm <= bound + 3.0 * std_err,
    })
}
