//! Streaming mean/variance accumulation (Welford), scalar and per-coordinate,
//! with exact merging so Monte-Carlo work can be split across independent
//! sampler streams and combined afterwards.

/// Running mean and variance of a scalar stream.
#[derive(Debug, Clone, Default)]
pub struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine with another accumulator (Chan's parallel update).
    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; 0 for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the running mean.
    pub fn std_err_of_mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Per-coordinate running moments of a vector stream.
#[derive(Debug, Clone)]
pub struct VectorMoments {
    coords: Vec<RunningMoments>,
}

impl VectorMoments {
    pub fn new(dim: usize) -> Self {
        Self {
            coords: vec![RunningMoments::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn count(&self) -> u64 {
        self.coords.first().map_or(0, RunningMoments::count)
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.coords.len());
        for (acc, &v) in self.coords.iter_mut().zip(x) {
            acc.push(v);
        }
    }

    pub fn merge(&mut self, other: &VectorMoments) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            a.merge(b);
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        self.coords.iter().map(RunningMoments::mean).collect()
    }

    /// Euclidean norm of the vector of per-coordinate standard errors; the
    /// scale of Monte-Carlo noise in `‖mean‖`.
    pub fn std_err_norm(&self) -> f64 {
        self.coords
            .iter()
            .map(|c| {
                let se = c.std_err_of_mean();
                se * se
            })
            .sum::<f64>()
            .sqrt()
    }
}
