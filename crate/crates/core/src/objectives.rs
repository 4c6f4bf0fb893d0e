//! Smooth test objectives on `Δ_d` with oracle gradients, known smoothness
//! constants, and value bounds, plus finite-difference and descent-lemma
//! diagnostics.
//!
//! Objectives carry call counters on each access channel. Optimizers consume
//! `value()` only; `oracle_grad()` exists for tests and bias measurement and
//! must stay untouched during a run; `audit_value()`/`audit_grad()` feed
//! trace diagnostics without contaminating either count.
//!
//! Only closed-form objectives are provided: every instance needs a
//! trustworthy smoothness constant and bound for the estimator assertions.
//! Entropy-like objectives are deliberately absent; their gradients blow up
//! on the boundary of the simplex.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dirichlet::DirichletSampler;
use crate::simplex::{validate_simplex, SimplexPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("input contains a non-finite entry")]
    NonFiniteInput,
    #[error("matrix is not symmetric at entry ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("finite-difference probe along direction {direction} leaves the simplex")]
    ProbeOffSimplex { direction: usize },
    #[error(
        "unknown objective id {0:?} (expected linear:<seed>, quaddist:<seed>, or psdquad:<seed>)"
    )]
    UnknownObjective(String),
}

/// Known minimizer of an objective over `Δ_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub point: SimplexPoint,
    pub value: f64,
}

type EvalFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A β-smooth objective on `Δ_d`.
pub struct Objective {
    name: String,
    dim: usize,
    beta: f64,
    bound_b: f64,
    convex: bool,
    minimizer: Option<Minimizer>,
    eval_fn: EvalFn,
    grad_fn: GradFn,
    eval_calls: AtomicU64,
    oracle_grad_calls: AtomicU64,
    audit_eval_calls: AtomicU64,
    audit_grad_calls: AtomicU64,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("beta", &self.beta)
            .field("bound_b", &self.bound_b)
            .field("convex", &self.convex)
            .finish_non_exhaustive()
    }
}

impl Objective {
    #[allow(clippy::too_many_arguments)]
    fn build(
        name: String,
        dim: usize,
        beta: f64,
        bound_b: f64,
        convex: bool,
        minimizer: Option<Minimizer>,
        eval_fn: EvalFn,
        grad_fn: GradFn,
    ) -> Self {
        Self {
            name,
            dim,
            beta,
            bound_b,
            convex,
            minimizer,
            eval_fn,
            grad_fn,
            eval_calls: AtomicU64::new(0),
            oracle_grad_calls: AtomicU64::new(0),
            audit_eval_calls: AtomicU64::new(0),
            audit_grad_calls: AtomicU64::new(0),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Smoothness constant: gradient Lipschitz constant on `Δ_d`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Bound on `|f|` over `Δ_d`.
    pub fn bound_b(&self) -> f64 {
        self.bound_b
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn minimizer(&self) -> Option<&Minimizer> {
        self.minimizer.as_ref()
    }

    /// Zeroth-order query; the only channel optimizers may use.
    pub fn value(&self, x: &SimplexPoint) -> f64 {
        self.eval_calls.fetch_add(1, Ordering::Relaxed);
        (self.eval_fn)(x.coords())
    }

    /// Exact gradient for tests and bias measurement. Never called by the
    /// optimizer path; the counter enforces that.
    pub fn oracle_grad(&self, x: &SimplexPoint) -> Vec<f64> {
        self.oracle_grad_calls.fetch_add(1, Ordering::Relaxed);
        (self.grad_fn)(x.coords())
    }

    /// Value through the audited diagnostics channel (trace logging).
    pub fn audit_value(&self, x: &SimplexPoint) -> f64 {
        self.audit_eval_calls.fetch_add(1, Ordering::Relaxed);
        (self.eval_fn)(x.coords())
    }

    /// Gradient through the audited diagnostics channel (gap logging).
    pub fn audit_grad(&self, x: &SimplexPoint) -> Vec<f64> {
        self.audit_grad_calls.fetch_add(1, Ordering::Relaxed);
        (self.grad_fn)(x.coords())
    }

    pub fn evaluations(&self) -> u64 {
        self.eval_calls.load(Ordering::Relaxed)
    }

    pub fn oracle_grad_evaluations(&self) -> u64 {
        self.oracle_grad_calls.load(Ordering::Relaxed)
    }

    pub fn audit_evaluations(&self) -> u64 {
        self.audit_eval_calls.load(Ordering::Relaxed)
    }

    pub fn audit_grad_evaluations(&self) -> u64 {
        self.audit_grad_calls.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.eval_calls.store(0, Ordering::Relaxed);
        self.oracle_grad_calls.store(0, Ordering::Relaxed);
        self.audit_eval_calls.store(0, Ordering::Relaxed);
        self.audit_grad_calls.store(0, Ordering::Relaxed);
    }
}

/// Linear objective `f(x) = cᵀx`; the β = 0 edge of the smoothness
/// assumption. Minimized at the vertex of the smallest coefficient (lowest
/// index on ties).
pub fn make_linear(c: &[f64]) -> Result<Objective, ObjectiveError> {
    let d = c.len();
    if d < 2 {
        return Err(ObjectiveError::BadDimension(d));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(ObjectiveError::NonFiniteInput);
    }
    let bound_b = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (argmin, &min_c) = c
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("finite"))
        .expect("nonempty");
    let minimizer = Minimizer {
        point: SimplexPoint::vertex(d, argmin).expect("d >= 2 checked above"),
        value: min_c,
    };
    let c_eval = c.to_vec();
    let c_grad = c.to_vec();
    Ok(Objective::build(
        "linear".to_string(),
        d,
        0.0,
        bound_b,
        true,
        Some(minimizer),
        Box::new(move |x| x.iter().zip(&c_eval).map(|(a, b)| a * b).sum()),
        Box::new(move |_| c_grad.clone()),
    ))
}

/// Squared-distance objective `f(x) = ½‖x - c‖²` for a target `c ∈ Δ_d`;
/// β = 1, bounded by 2 since the simplex has diameter at most 2.
pub fn make_quadratic_distance(c: &SimplexPoint) -> Objective {
    let d = c.dim();
    let minimizer = Minimizer {
        point: c.clone(),
        value: 0.0,
    };
    let c_eval = c.coords().to_vec();
    let c_grad = c.coords().to_vec();
    Objective::build(
        "quaddist".to_string(),
        d,
        1.0,
        2.0,
        true,
        Some(minimizer),
        Box::new(move |x| {
            0.5 * x
                .iter()
                .zip(&c_eval)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        }),
        Box::new(move |x| x.iter().zip(&c_grad).map(|(a, b)| a - b).collect()),
    )
}

/// General smooth convex quadratic `f(x) = ½xᵀAx + bᵀx` for symmetric PSD
/// `A`; β is the top eigenvalue of `A`. No closed-form simplex minimizer.
pub fn make_psd_quadratic(a: &[Vec<f64>], b: &[f64]) -> Result<Objective, ObjectiveError> {
    let d = a.len();
    if d < 2 || b.len() != d {
        return Err(ObjectiveError::BadDimension(d.min(b.len())));
    }
    if a.iter().any(|row| row.len() != d) {
        return Err(ObjectiveError::BadDimension(d));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(ObjectiveError::NonFiniteInput);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if (a[i][j] - a[j][i]).abs() > 1e-12 {
                return Err(ObjectiveError::NotSymmetric { i, j });
            }
        }
    }
    let eigenvalues = symmetric_eigenvalues(a);
    let min_eig = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eig = eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if min_eig < -1e-10 {
        return Err(ObjectiveError::NotPsd {
            min_eigenvalue: min_eig,
        });
    }
    let bound_b = 0.5 * max_eig + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let a_eval: Vec<Vec<f64>> = a.to_vec();
    let b_eval = b.to_vec();
    let a_grad: Vec<Vec<f64>> = a.to_vec();
    let b_grad = b.to_vec();
    Ok(Objective::build(
        "psdquad".to_string(),
        d,
        max_eig,
        bound_b,
        true,
        None,
        Box::new(move |x| {
            let mut quad = 0.0;
            for (i, row) in a_eval.iter().enumerate() {
                for (j, &aij) in row.iter().enumerate() {
                    quad += x[i] * aij * x[j];
                }
            }
            0.5 * quad + b_eval.iter().zip(x).map(|(bi, xi)| bi * xi).sum::<f64>()
        }),
        Box::new(move |x| {
            a_grad
                .iter()
                .zip(&b_grad)
                .map(|(row, bi)| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum::<f64>() + bi)
                .collect()
        }),
    ))
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let d = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                off = off.max(m[i][j].abs());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mpp = m[p][p];
                let mqq = m[q][q];
                let mpq = m[p][q];
                m[p][p] = c * c * mpp - 2.0 * s * c * mpq + s * s * mqq;
                m[q][q] = s * s * mpp + 2.0 * s * c * mpq + c * c * mqq;
                m[p][q] = 0.0;
                m[q][p] = 0.0;
                for i in 0..d {
                    if i == p || i == q {
                        continue;
                    }
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[p][i] = m[i][p];
                    m[i][q] = s * mip + c * miq;
                    m[q][i] = m[i][q];
                }
            }
        }
    }
    (0..d).map(|i| m[i][i]).collect()
}

/// Central-difference gradient estimate along the simplex-tangent directions
/// `e_i - (1/d)·1`, so every probe stays on the affine hull of `Δ_d`.
///
/// Recovers the *centered* gradient: the component of `∇f` along `1` is
/// invisible to on-simplex queries. Exact for affine and quadratic `f` up to
/// round-off; `O(h²)` in general. Needs `x` interior enough that all probes
/// keep nonnegative coordinates; use `h` in `[1e-7, 1e-4]`.
pub fn finite_diff_grad(
    f: &Objective,
    x: &SimplexPoint,
    h: f64,
) -> Result<Vec<f64>, ObjectiveError> {
    let d = x.dim();
    if f.dim() != d {
        return Err(ObjectiveError::BadDimension(d));
    }
    let inv_d = 1.0 / d as f64;
    let mut grad = vec![0.0; d];
    for i in 0..d {
        let probe = |sign: f64| -> Result<SimplexPoint, ObjectiveError> {
            let coords: Vec<f64> = x
                .coords()
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    let dir = if i == j { 1.0 - inv_d } else { -inv_d };
                    c + sign * h * dir
                })
                .collect();
            validate_simplex(&coords).map_err(|_| ObjectiveError::ProbeOffSimplex { direction: i })
        };
        let plus = probe(1.0)?;
        let minus = probe(-1.0)?;
        grad[i] = (f.value(&plus) - f.value(&minus)) / (2.0 * h);
    }
    Ok(grad)
}

/// Check the smoothness (descent) inequality
/// `|f(y) - f(x) - ∇f(x)ᵀ(y-x)| ≤ (β/2)‖x-y‖²` with 1e-10 slack.
pub fn descent_lemma_check(f: &Objective, x: &SimplexPoint, y: &SimplexPoint) -> bool {
    let grad = f.oracle_grad(x);
    let fy = f.audit_value(y);
    let fx = f.audit_value(x);
    let linear: f64 = grad
        .iter()
        .zip(y.coords().iter().zip(x.coords()))
        .map(|(g, (yi, xi))| g * (yi - xi))
        .sum();
    let dist_sq: f64 = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    (fy - fx - linear).abs() <= 0.5 * f.beta() * dist_sq + 1e-10
}

/// Resolve an objective id string of the form `linear:<seed>`,
/// `quaddist:<seed>`, or `psdquad:<seed>` (seed decimal or 0x-hex) into an
/// objective of dimension `d` with parameters generated deterministically
/// from the seed.
pub fn from_id(id: &str, d: usize) -> Result<Objective, ObjectiveError> {
    if d < 2 {
        return Err(ObjectiveError::BadDimension(d));
    }
    let (kind, seed_str) = id
        .split_once(':')
        .ok_or_else(|| ObjectiveError::UnknownObjective(id.to_string()))?;
    let seed = crate::harness::parse_seed(seed_str)
        .map_err(|_| ObjectiveError::UnknownObjective(id.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objective = match kind {
        "linear" => {
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            make_linear(&c)?
        }
        "quaddist" => {
            let mut sampler =
                DirichletSampler::new(d, 1.0, seed).expect("d >= 2 and alpha = 1 are valid");
            let c = sampler.sample().expect("alpha = 1 draws cannot degenerate");
            make_quadratic_distance(&c)
        }
        "psdquad" => {
            let m: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            // A = MᵀM/d is PSD with top eigenvalue O(1).
            let mut a = vec![vec![0.0; d]; d];
            for i in 0..d {
                for j in 0..d {
                    a[i][j] = (0..d).map(|k| m[k][i] * m[k][j]).sum::<f64>() / d as f64;
                }
            }
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            make_psd_quadratic(&a, &b)?
        }
        _ => return Err(ObjectiveError::UnknownObjective(id.to_string())),
    };
    Ok(objective.with_name(id))
}
