//! Geometry of the probability simplex `Δ_d`.
//!
//! Provides validated simplex points, the centering projector
//! `P_d = I - (1/d)·11ᵀ` onto the zero-sum hyperplane, Euclidean projection
//! onto `Δ_d`, convex mixing of simplex points, and the first-order
//! suboptimality gap `max_{x* ∈ Δ_d} gᵀ(x - x*)`.
//!
//! Everything here is a pure function of its inputs and safe to call
//! concurrently.

use thiserror::Error;

/// Coordinates this far below zero are clamped to zero at construction;
/// anything more negative is rejected. Matches the sum-drift boundary so the
/// round-off absorbed on either check has the same scale.
pub const COORD_CLAMP_TOL: f64 = 1e-9;

/// Maximum tolerated drift of the coordinate sum away from 1. Inputs within
/// this drift are renormalized; anything worse is rejected.
pub const SUM_DRIFT_TOL: f64 = 1e-9;

/// Errors raised by simplex geometry operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("input contains a non-finite entry")]
    NonFiniteInput,
    #[error("coordinate {index} is {value:e}, below the -1e-9 clamp tolerance")]
    NegativeCoordinate { index: usize, value: f64 },
    #[error("coordinates sum to {sum}, more than 1e-9 away from 1")]
    SumMismatch { sum: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("delta must lie strictly inside (0, 1), got {0}")]
    DeltaOutOfRange(f64),
}

/// A validated point of the probability simplex `Δ_d`: nonnegative
/// coordinates summing to 1.
///
/// Construction clamps round-off negatives (down to `-1e-9`) and
/// renormalizes sums within `1e-9` of 1, so points coming out of long
/// floating-point pipelines stay representable without masking logic errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Validate `coords` and build a simplex point. See [`validate_simplex`].
    pub fn new(coords: Vec<f64>) -> Result<Self, SimplexError> {
        validate_simplex(&coords)
    }

    /// The uniform point `(1/d, ..., 1/d)`.
    pub fn uniform(d: usize) -> Result<Self, SimplexError> {
        if d < 2 {
            return Err(SimplexError::BadDimension(d));
        }
        Ok(Self {
            coords: vec![1.0 / d as f64; d],
        })
    }

    /// The vertex `e_i` of `Δ_d`.
    pub fn vertex(d: usize, i: usize) -> Result<Self, SimplexError> {
        if d < 2 {
            return Err(SimplexError::BadDimension(d));
        }
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// True when every coordinate is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|&c| c > 0.0)
    }

    /// Euclidean distance to another point of the same dimension.
    pub fn distance(&self, other: &SimplexPoint) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Validate a coordinate vector as a point of `Δ_d`.
///
/// Accepts entries down to `-1e-9` (clamped to 0) and coordinate sums within
/// `1e-9` of 1 (renormalized by the sum). Returns
/// [`SimplexError::NegativeCoordinate`] or [`SimplexError::SumMismatch`]
/// outside those tolerances, and [`SimplexError::BadDimension`] for `d < 2`.
pub fn validate_simplex(v: &[f64]) -> Result<SimplexPoint, SimplexError> {
    if v.len() < 2 {
        return Err(SimplexError::BadDimension(v.len()));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(SimplexError::NonFiniteInput);
    }
    let mut coords = Vec::with_capacity(v.len());
    for (index, &value) in v.iter().enumerate() {
        if value < -COORD_CLAMP_TOL {
            return Err(SimplexError::NegativeCoordinate { index, value });
        }
        coords.push(value.max(0.0));
    }
    let sum: f64 = coords.iter().sum();
    if (sum - 1.0).abs() > SUM_DRIFT_TOL {
        return Err(SimplexError::SumMismatch { sum });
    }
    for c in &mut coords {
        *c /= sum;
    }
    Ok(SimplexPoint { coords })
}

/// Apply the centering projector `P_d = I - (1/d)·11ᵀ`: subtract the mean
/// from every coordinate. The result sums to zero.
///
/// `P_d` is idempotent, annihilates constant vectors, and fixes differences
/// of simplex points.
pub fn center(v: &[f64]) -> Result<Vec<f64>, SimplexError> {
    if v.len() < 2 {
        return Err(SimplexError::BadDimension(v.len()));
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    Ok(v.iter().map(|&c| c - mean).collect())
}

/// The projector `P_d = I - (1/d)·11ᵀ` onto the zero-sum hyperplane,
/// represented implicitly; applying it subtracts the coordinate mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CenteringProjector {
    d: usize,
}

impl CenteringProjector {
    pub fn new(d: usize) -> Result<Self, SimplexError> {
        if d < 2 {
            return Err(SimplexError::BadDimension(d));
        }
        Ok(Self { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `v ↦ v - mean(v)·1`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, SimplexError> {
        if v.len() != self.d {
            return Err(SimplexError::DimensionMismatch {
                left: self.d,
                right: v.len(),
            });
        }
        center(v)
    }
}

/// Euclidean projection onto `Δ_d` by the sort-and-threshold method:
/// sort the coordinates, find the largest prefix whose running mean leaves a
/// positive residual, and clip everything below the resulting threshold.
/// `O(d log d)`, exact, and idempotent on points already in `Δ_d`.
pub fn project_to_simplex(y: &[f64]) -> Result<SimplexPoint, SimplexError> {
    if y.len() < 2 {
        return Err(SimplexError::BadDimension(y.len()));
    }
    if y.iter().any(|c| !c.is_finite()) {
        return Err(SimplexError::NonFiniteInput);
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite entries compare"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (k + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    let coords: Vec<f64> = y.iter().map(|&c| (c - theta).max(0.0)).collect();
    validate_simplex(&coords)
}

/// The query point `(1-δ)x + δu`. Convexity of `Δ_d` keeps it on the simplex
/// for any `δ ∈ (0, 1)`.
pub fn mix(x: &SimplexPoint, u: &SimplexPoint, delta: f64) -> Result<SimplexPoint, SimplexError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SimplexError::DeltaOutOfRange(delta));
    }
    if x.dim() != u.dim() {
        return Err(SimplexError::DimensionMismatch {
            left: x.dim(),
            right: u.dim(),
        });
    }
    let coords: Vec<f64> = x
        .coords()
        .iter()
        .zip(u.coords())
        .map(|(&a, &b)| (1.0 - delta) * a + delta * b)
        .collect();
    validate_simplex(&coords)
}

/// First-order suboptimality gap `max_{x* ∈ Δ_d} gᵀ(x - x*)`.
///
/// The maximum over the simplex is attained at a vertex, so the gap equals
/// `gᵀx - min_i g_i`; it is nonnegative for `x ∈ Δ_d` and invariant to adding
/// a constant to every component of `g`.
pub fn first_order_gap(grad: &[f64], x: &SimplexPoint) -> Result<f64, SimplexError> {
    if grad.len() != x.dim() {
        return Err(SimplexError::DimensionMismatch {
            left: grad.len(),
            right: x.dim(),
        });
    }
    let inner: f64 = grad.iter().zip(x.coords()).map(|(g, c)| g * c).sum();
    let min = grad.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(inner - min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense-matrix oracle for the centering projector: multiply by
    /// `I - (1/d)·11ᵀ` entry by entry.
    fn center_oracle(v: &[f64]) -> Vec<f64> {
        let d = v.len();
        let mut out = vec![0.0; d];
        for i in 0..d {
            for (j, &vj) in v.iter().enumerate() {
                let p = if i == j {
                    1.0 - 1.0 / d as f64
                } else {
                    -1.0 / d as f64
                };
                out[i] += p * vj;
            }
        }
        out
    }

    /// Grid-search oracle on Δ_2 at resolution 1e-4: the feasible point
    /// closest to `y` in Euclidean norm.
    fn grid_project_d2(y: &[f64; 2]) -> [f64; 2] {
        let mut best = [0.0, 1.0];
        let mut best_d = f64::INFINITY;
        let n = 10_000;
        for k in 0..=n {
            let a = k as f64 / n as f64;
            let cand = [a, 1.0 - a];
            let dist = (cand[0] - y[0]).powi(2) + (cand[1] - y[1]).powi(2);
            if dist < best_d {
                best_d = dist;
                best = cand;
            }
        }
        best
    }

    fn random_simplex_point(rng: &mut ChaCha8Rng, d: usize) -> SimplexPoint {
        // Exponential spacings give a uniform point of the simplex without
        // touching the production Dirichlet sampler.
        let mut coords: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let sum: f64 = coords.iter().sum();
        for c in &mut coords {
            *c /= sum;
        }
        SimplexPoint::new(coords).unwrap()
    }

    #[test]
    fn validate_accepts_exact_point() {
        let p = validate_simplex(&[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(p.coords(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn validate_rejects_sum_mismatch() {
        match validate_simplex(&[0.5, 0.6]) {
            Err(SimplexError::SumMismatch { sum }) => assert!((sum - 1.1).abs() < 1e-12),
            other => panic!("expected SumMismatch, got {other:?}"),
        }
    }

    #[test]
    fn validate_clamps_and_renormalizes_within_tolerance() {
        let p = validate_simplex(&[1.0 + 1e-10, -1e-10]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn validate_rejects_negative_coordinate() {
        match validate_simplex(&[1.0001, -1e-4]) {
            Err(SimplexError::NegativeCoordinate { index: 1, .. }) => {}
            other => panic!("expected NegativeCoordinate, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_low_dimension_and_non_finite() {
        assert_eq!(validate_simplex(&[1.0]), Err(SimplexError::BadDimension(1)));
        assert_eq!(
            validate_simplex(&[f64::NAN, 1.0]),
            Err(SimplexError::NonFiniteInput)
        );
    }

    #[test]
    fn center_matches_hand_values() {
        assert_eq!(center(&[1.0, 0.0]).unwrap(), vec![0.5, -0.5]);
        assert_eq!(center(&[3.0, 3.0, 3.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        // Derived via the dense-matrix oracle: mean 2 subtracted.
        let got = center(&[3.0, 1.0, 2.0]).unwrap();
        let want = center_oracle(&[3.0, 1.0, 2.0]);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert_eq!(got, vec![1.0, -1.0, 0.0]);
    }

    #[test]
    fn center_rejects_dimension_one() {
        assert_eq!(center(&[1.0]), Err(SimplexError::BadDimension(1)));
    }

    #[test]
    fn centering_projector_is_idempotent_and_kills_constants() {
        let proj = CenteringProjector::new(4).unwrap();
        let v = [0.3, -1.2, 4.4, 0.0];
        let once = proj.apply(&v).unwrap();
        let twice = proj.apply(&once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() <= 1e-15);
        }
        let killed = proj.apply(&[7.5; 4]).unwrap();
        assert!(killed.iter().all(|&c| c.abs() <= 1e-15));
    }

    #[test]
    fn centering_projector_properties_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &d in &[2usize, 3, 5, 10, 50] {
            for _ in 0..200 {
                // (a) idempotence, per coordinate to 1e-15 on O(1) data.
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let once = center(&v).unwrap();
                let twice = center(&once).unwrap();
                for (a, b) in once.iter().zip(&twice) {
                    assert!((a - b).abs() <= 1e-15);
                }
                // (b) differences of simplex points are fixed points.
                let x = random_simplex_point(&mut rng, d);
                let y = random_simplex_point(&mut rng, d);
                let diff: Vec<f64> = x
                    .coords()
                    .iter()
                    .zip(y.coords())
                    .map(|(a, b)| a - b)
                    .collect();
                let centered = center(&diff).unwrap();
                for (a, b) in centered.iter().zip(&diff) {
                    assert!((a - b).abs() <= 1e-15);
                }
                // (d) norm bound sqrt((d-1)/d) on simplex points.
                let norm = center(x.coords())
                    .unwrap()
                    .iter()
                    .map(|c| c * c)
                    .sum::<f64>()
                    .sqrt();
                let bound = ((d as f64 - 1.0) / d as f64).sqrt();
                assert!(norm <= bound + 1e-12, "d={d} norm={norm} bound={bound}");
            }
        }
    }

    #[test]
    fn projection_matches_spec_examples() {
        let already = project_to_simplex(&[0.4, 0.6]).unwrap();
        assert!((already[0] - 0.4).abs() < 1e-12 && (already[1] - 0.6).abs() < 1e-12);

        // KKT threshold θ = 0.1 for [0.5, 0.7].
        let p = project_to_simplex(&[0.5, 0.7]).unwrap();
        assert!((p[0] - 0.4).abs() < 1e-12 && (p[1] - 0.6).abs() < 1e-12);
        let grid = grid_project_d2(&[0.5, 0.7]);
        assert!((p[0] - grid[0]).abs() < 1e-4 && (p[1] - grid[1]).abs() < 1e-4);

        let v = project_to_simplex(&[2.0, -1.0, 0.0]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert_eq!(&v.coords()[1..], &[0.0, 0.0]);
    }

    #[test]
    fn projection_rejects_bad_inputs() {
        assert_eq!(
            project_to_simplex(&[1.0]),
            Err(SimplexError::BadDimension(1))
        );
        assert_eq!(
            project_to_simplex(&[f64::INFINITY, 0.0]),
            Err(SimplexError::NonFiniteInput)
        );
    }

    #[test]
    fn mix_matches_spec_examples() {
        let x = SimplexPoint::new(vec![1.0, 0.0]).unwrap();
        let u = SimplexPoint::new(vec![0.0, 1.0]).unwrap();
        let m = mix(&x, &u, 0.5).unwrap();
        assert_eq!(m.coords(), &[0.5, 0.5]);

        let fixed = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        for &delta in &[0.1, 0.5, 0.9] {
            let m = mix(&fixed, &fixed, delta).unwrap();
            assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
        }

        // Componentwise: 0.7·[1,0,0] + 0.3·[1/3,1/3,1/3] = [0.8, 0.1, 0.1].
        let x = SimplexPoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        let u = SimplexPoint::uniform(3).unwrap();
        let m = mix(&x, &u, 0.3).unwrap();
        for (got, want) in m.coords().iter().zip(&[0.8, 0.1, 0.1]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mix_rejects_bad_delta_and_dimension() {
        let x = SimplexPoint::uniform(2).unwrap();
        let u3 = SimplexPoint::uniform(3).unwrap();
        assert!(matches!(
            mix(&x, &x, 0.0),
            Err(SimplexError::DeltaOutOfRange(_))
        ));
        assert!(matches!(
            mix(&x, &x, 1.0),
            Err(SimplexError::DeltaOutOfRange(_))
        ));
        assert!(matches!(
            mix(&x, &u3, 0.5),
            Err(SimplexError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gap_matches_spec_examples() {
        let x = SimplexPoint::uniform(3).unwrap();
        assert!((first_order_gap(&[3.0, 1.0, 2.0], &x).unwrap() - 1.0).abs() < 1e-12);

        let any = SimplexPoint::new(vec![0.7, 0.3]).unwrap();
        assert_eq!(first_order_gap(&[4.2, 4.2], &any).unwrap(), 0.0);

        // Brute-force oracle: max of gᵀ(x - x*) over a 1e-4 grid on Δ_2.
        let x = SimplexPoint::new(vec![0.25, 0.75]).unwrap();
        let grad = [1.0, 0.0];
        let gap = first_order_gap(&grad, &x).unwrap();
        let inner = grad[0] * x[0] + grad[1] * x[1];
        let mut brute = f64::NEG_INFINITY;
        let n = 10_000;
        for k in 0..=n {
            let a = k as f64 / n as f64;
            brute = brute.max(inner - (grad[0] * a + grad[1] * (1.0 - a)));
        }
        assert!((gap - 0.25).abs() < 1e-12);
        assert!((gap - brute).abs() < 1e-4);
    }

    #[test]
    fn gap_rejects_dimension_mismatch() {
        let x = SimplexPoint::uniform(3).unwrap();
        assert!(matches!(
            first_order_gap(&[1.0, 2.0], &x),
            Err(SimplexError::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_nonexpansive(
            seed in any::<u64>(),
            d in 2usize..8,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y1: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y2: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let p1 = project_to_simplex(&y1).unwrap();
            let p2 = project_to_simplex(&y2).unwrap();

            let again = project_to_simplex(p1.coords()).unwrap();
            for (a, b) in p1.coords().iter().zip(again.coords()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }

            let dist_in: f64 = y1.iter().zip(&y2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assert!(p1.distance(&p2) <= dist_in + 1e-12);
        }

        #[test]
        fn mix_stays_on_simplex(seed in any::<u64>(), d in 2usize..8, delta in 1e-6f64..0.999999) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_simplex_point(&mut rng, d);
            let u = random_simplex_point(&mut rng, d);
            let m = mix(&x, &u, delta).unwrap();
            prop_assert!(validate_simplex(m.coords()).is_ok());
        }

        #[test]
        fn gap_is_nonnegative_and_shift_invariant(seed in any::<u64>(), d in 2usize..8, shift in -5.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_simplex_point(&mut rng, d);
            let grad: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let gap = first_order_gap(&grad, &x).unwrap();
            prop_assert!(gap >= -1e-12);
            let shifted: Vec<f64> = grad.iter().map(|g| g + shift).collect();
            let gap2 = first_order_gap(&shifted, &x).unwrap();
            prop_assert!((gap - gap2).abs() <= 1e-9);
        }
    }
}
