//! Shared test oracles, independent of the implementation paths they check.

// Each test target compiles this module on its own and uses a subset of it.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zo_simplex::objectives::Objective;
use zo_simplex::simplex::SimplexPoint;

/// Exact Euclidean projection onto `Δ_d` by brute force over faces: for every
/// nonempty support set, solve the equality-constrained least squares on that
/// face's affine hull, keep the feasible candidates, and return the closest.
/// Exponential in `d`; intended for `d ≤ 4`.
pub fn face_projection_oracle(y: &[f64]) -> Vec<f64> {
    let d = y.len();
    assert!(d <= 20, "face enumeration is exponential in d");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << d) {
        let support: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let sum_y: f64 = support.iter().map(|&i| y[i]).sum();
        let shift = (1.0 - sum_y) / support.len() as f64;
        let mut candidate = vec![0.0; d];
        let mut feasible = true;
        for &i in &support {
            let v = y[i] + shift;
            if v < -1e-12 {
                feasible = false;
                break;
            }
            candidate[i] = v.max(0.0);
        }
        if !feasible {
            continue;
        }
        let dist: f64 = candidate
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| dist < *b) {
            best = Some((dist, candidate));
        }
    }
    best.expect("the full support is always feasible").1
}

/// Composite Simpson quadrature of `f` over `[a, b]` with `n` (even)
/// subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Exact expectation of the raw estimate on `Δ_2`, where `Dir(α·1_2)`
/// reduces to `Beta(α, α)` and the expectation is a 1-D integral over the
/// first noise coordinate `w`:
///
/// ```text
/// E[g] = ∫ (1/δ)·f((1-δ)x + δ(w, 1-w)) · (w - ½, ½ - w) · beta_pdf(w) dw
/// ```
///
/// Supports α = 1 (uniform density) and α = 0.5 (arcsine density, integrated
/// exactly through the substitution `w = sin²θ`). Returns the first
/// component; the second is its negation.
pub fn quadrature_raw_mean_d2(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64; 2],
    alpha: f64,
    delta: f64,
) -> f64 {
    let integrand = |w: f64| -> f64 {
        let q0 = (1.0 - delta) * x[0] + delta * w;
        let q1 = (1.0 - delta) * x[1] + delta * (1.0 - w);
        (w - 0.5) * f(&[q0, q1]) / delta
    };
    let n = 100_000;
    if (alpha - 1.0).abs() < 1e-15 {
        simpson(integrand, 0.0, 1.0, n)
    } else if (alpha - 0.5).abs() < 1e-15 {
        // Beta(½, ½) pdf is 1/(π√(w(1-w))); with w = sin²θ the weighted
        // integral becomes (2/π)∫₀^{π/2} integrand(sin²θ) dθ.
        let theta_integrand = |theta: f64| integrand(theta.sin().powi(2));
        simpson(theta_integrand, 0.0, std::f64::consts::FRAC_PI_2, n) * 2.0 / std::f64::consts::PI
    } else {
        panic!("quadrature oracle supports alpha in {{0.5, 1}}, got {alpha}");
    }
}

/// Projected gradient descent with the true gradient at a fixed step size;
/// returns the average iterate. The benchmark the zeroth-order runs are
/// measured against.
pub fn run_exact_pgd(f: &Objective, eta: f64, horizon: usize, x1: &SimplexPoint) -> SimplexPoint {
    let mut x = x1.clone();
    let d = x.dim();
    let mut sum = vec![0.0; d];
    for _ in 0..horizon {
        for (s, &c) in sum.iter_mut().zip(x.coords()) {
            *s += c;
        }
        let grad = f.oracle_grad(&x);
        let y: Vec<f64> = x
            .coords()
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi - eta * gi)
            .collect();
        x = zo_simplex::simplex::project_to_simplex(&y).unwrap();
    }
    for s in &mut sum {
        *s /= horizon as f64;
    }
    SimplexPoint::new(sum).unwrap()
}

/// Exponential weights with the true gradient at a fixed step size; returns
/// the average iterate.
pub fn run_exact_ew(f: &Objective, eta: f64, horizon: usize, x1: &SimplexPoint) -> SimplexPoint {
    let mut x = x1.clone();
    let d = x.dim();
    let mut sum = vec![0.0; d];
    for _ in 0..horizon {
        for (s, &c) in sum.iter_mut().zip(x.coords()) {
            *s += c;
        }
        let grad = f.oracle_grad(&x);
        let shift = grad
            .iter()
            .map(|g| -eta * g)
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = x
            .coords()
            .iter()
            .zip(&grad)
            .map(|(xi, gi)| xi * (-eta * gi - shift).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        x = SimplexPoint::new(weights.iter().map(|w| w / z).collect()).unwrap();
    }
    for s in &mut sum {
        *s /= horizon as f64;
    }
    SimplexPoint::new(sum).unwrap()
}

/// Uniform random point of `Δ_d` from exponential spacings; independent of
/// the production Dirichlet sampler.
pub fn random_simplex_point(rng: &mut ChaCha8Rng, d: usize) -> SimplexPoint {
    let mut coords: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let sum: f64 = coords.iter().sum();
    for c in &mut coords {
        *c /= sum;
    }
    SimplexPoint::new(coords).unwrap()
}

/// Interior random point: resampled until every coordinate clears `margin`.
pub fn random_interior_point(rng: &mut ChaCha8Rng, d: usize, margin: f64) -> SimplexPoint {
    loop {
        let p = random_simplex_point(rng, d);
        if p.coords().iter().all(|&c| c >= margin) {
            return p;
        }
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
