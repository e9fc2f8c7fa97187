use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimulationOracle;
use crate::error::{domain, parameter, Result};
use crate::lattice::{coordinate_neighbors, neighbor_set, LatticePoint};
use crate::stats::derive_seed;

/// Biased, noisy observations of `f(y) - f(x)` for every neighbor `y` of `x`.
///
/// The mean of an observation is `(f(y) - f(x)) (1 + b_xy)` with a fixed
/// perturbation `b_xy` uniform on `[-a, a]`, determined by hashing the pair
/// with `bias_seed`; the noise is `N(0, σ̃²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborEstimator {
    pub bias_ratio: f64,
    pub sigma_tilde: f64,
    /// Cost of one batch covering the whole neighborhood.
    pub gamma: u64,
    pub bias_seed: u64,
}

/// One batch of neighbor observations, sorted by neighbor.
pub type NeighborSamples = Vec<(LatticePoint, f64)>;

impl NeighborEstimator {
    pub fn new(bias_ratio: f64, sigma_tilde: f64, gamma: u64, bias_seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&bias_ratio) {
            return parameter(format!("bias ratio must lie in [0, 1), got {bias_ratio}"));
        }
        if !(sigma_tilde >= 0.0 && sigma_tilde.is_finite()) {
            return parameter(format!("sigma_tilde must be non-negative, got {sigma_tilde}"));
        }
        if gamma == 0 {
            return parameter("gamma must be at least 1");
        }
        Ok(Self { bias_ratio, sigma_tilde, gamma, bias_seed })
    }

    /// The frozen relative bias `b_xy`.
    pub fn bias(&self, x: &[i64], y: &[i64]) -> f64 {
        if self.bias_ratio == 0.0 {
            return 0.0;
        }
        let mut h = derive_seed(self.bias_seed, x.len() as u64);
        for &c in x.iter().chain(y) {
            h = derive_seed(h, c as u64);
        }
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        self.bias_ratio * (2.0 * u - 1.0)
    }

    /// Expected observation for the pair `(x, y)`.
    pub fn mean(&self, oracle: &SimulationOracle, x: &[i64], y: &[i64]) -> f64 {
        let f = oracle.ground_truth();
        let diff = f.eval(y) - f.eval(x);
        diff * (1.0 + self.bias(x, y))
    }

    /// Sample means of `batches` i.i.d. observations at each of `neighbors`;
    /// costs `γ` per batch.
    pub fn sample_means(
        &self,
        oracle: &mut SimulationOracle,
        x: &LatticePoint,
        neighbors: &[LatticePoint],
        batches: u64,
    ) -> Result<Vec<f64>> {
        if batches == 0 {
            return parameter("at least one batch is required");
        }
        let dom = *oracle.ground_truth().domain();
        if !dom.contains(&x.0) {
            return domain(format!("{x} is not feasible"));
        }
        if let Some(y) = neighbors.iter().find(|y| !dom.contains(&y.0)) {
            return domain(format!("{y} is not feasible"));
        }
        let mu: Vec<f64> = neighbors.iter().map(|y| self.mean(oracle, &x.0, &y.0)).collect();
        let out = if self.sigma_tilde > 0.0 {
            let normal = Normal::new(0.0, self.sigma_tilde).expect("valid sigma");
            let rng = oracle.rng();
            let mut sums = vec![0.0; neighbors.len()];
            for _ in 0..batches {
                for s in sums.iter_mut() {
                    *s += normal.sample(rng);
                }
            }
            mu.iter().zip(&sums).map(|(m, s)| m + s / batches as f64).collect()
        } else {
            mu
        };
        oracle.charge(self.gamma * batches);
        Ok(out)
    }
}

/// One observation for every point of the full neighborhood of `x`; costs `γ`.
pub fn estimate_neighbor(
    est: &NeighborEstimator,
    oracle: &mut SimulationOracle,
    x: &LatticePoint,
) -> Result<NeighborSamples> {
    let neighbors = neighbor_set(x, oracle.ground_truth().domain())?;
    let vals = est.sample_means(oracle, x, &neighbors, 1)?;
    Ok(neighbors.into_iter().zip(vals).collect())
}

/// As [`estimate_neighbor`] but over `x ± e_i` only.
pub fn estimate_coordinate_neighbor(
    est: &NeighborEstimator,
    oracle: &mut SimulationOracle,
    x: &LatticePoint,
) -> Result<NeighborSamples> {
    let neighbors = coordinate_neighbors(x, oracle.ground_truth().domain())?;
    let vals = est.sample_means(oracle, x, &neighbors, 1)?;
    Ok(neighbors.into_iter().zip(vals).collect())
}
