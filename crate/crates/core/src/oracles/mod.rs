//! Noisy simulation models, subgradient estimators and instance generators.

mod estimators;
mod instances;
mod neighbor;

pub use estimators::{
    estimate_first_order, estimate_subgradient_crn, estimate_subgradient_fd, estimate_subgradient_subset,
    Estimator, EstimatorKind, SubgradientEstimate,
};
pub use instances::{hard_family_base, make_instance, CrnModel, InstanceKind};
pub use neighbor::{estimate_coordinate_neighbor, estimate_neighbor, NeighborEstimator, NeighborSamples};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, parameter, Error, Result};
use crate::extension::GridFunction;
use crate::lattice::LatticePoint;
use crate::stats::stream_rng;

/// Distribution of a single simulation output around its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    /// Mean plus `N(0, σ²)`.
    Gaussian { sigma: f64 },
    /// A coin with success probability `f(x)`; requires `f` in `[0, 1]`.
    Bernoulli,
    /// Scenario-driven outputs `F(x, ξ)` sharing one scenario across points on request.
    CommonRandomNumbers,
}

/// Synthetic first-order channel: exact subgradient plus independent `N(0, σ̃²)` noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderChannel {
    pub sigma_tilde: f64,
    /// Simulation cost charged per call.
    pub gamma: u64,
}

/// Source of noisy evaluations of a hidden objective, with a cost counter.
///
/// Single-owner: each replication builds its own oracle.
#[derive(Debug, Clone)]
pub struct SimulationOracle {
    truth: GridFunction,
    noise: NoiseKind,
    crn: Option<CrnModel>,
    first_order: Option<FirstOrderChannel>,
    cost: u64,
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl SimulationOracle {
    /// Gaussian-noise oracle; `sigma = 0` gives exact evaluations.
    pub fn gaussian(truth: GridFunction, sigma: f64, seed: u64) -> Result<Self> {
        Self::new(truth, NoiseKind::Gaussian { sigma }, seed)
    }

    pub fn new(truth: GridFunction, noise: NoiseKind, seed: u64) -> Result<Self> {
        let normal = match noise {
            NoiseKind::Gaussian { sigma } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return parameter(format!("noise sigma must be non-negative, got {sigma}"));
                }
                (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("valid sigma"))
            }
            NoiseKind::Bernoulli => {
                if let Some(v) = truth.values() {
                    if v.iter().any(|p| !(0.0..=1.0).contains(p)) {
                        return parameter("Bernoulli outputs need f(x) in [0, 1]");
                    }
                }
                None
            }
            NoiseKind::CommonRandomNumbers => {
                return Err(Error::Capability(
                    "common random numbers need a scenario model; use SimulationOracle::with_crn".into(),
                ))
            }
        };
        Ok(Self {
            truth,
            noise,
            crn: None,
            first_order: None,
            cost: 0,
            rng: stream_rng(seed, 0),
            normal,
        })
    }

    /// Oracle driven by a per-scenario L♮-convex model.
    pub fn with_crn(model: CrnModel, seed: u64) -> Self {
        Self {
            truth: model.mean_function(),
            noise: NoiseKind::CommonRandomNumbers,
            crn: Some(model),
            first_order: None,
            cost: 0,
            rng: stream_rng(seed, 0),
            normal: None,
        }
    }

    /// Enables the first-order channel.
    pub fn with_first_order(mut self, channel: FirstOrderChannel) -> Result<Self> {
        if !(channel.sigma_tilde >= 0.0 && channel.sigma_tilde.is_finite()) {
            return parameter(format!("sigma_tilde must be non-negative, got {}", channel.sigma_tilde));
        }
        if channel.gamma == 0 {
            return parameter("gamma must be at least 1");
        }
        self.first_order = Some(channel);
        Ok(self)
    }

    /// The hidden objective; for tests and the harness, not for solvers.
    pub fn ground_truth(&self) -> &GridFunction {
        &self.truth
    }

    pub fn noise(&self) -> &NoiseKind {
        &self.noise
    }

    /// Declared sub-Gaussian parameter of a single output.
    pub fn sigma(&self) -> f64 {
        match (&self.noise, &self.crn) {
            (NoiseKind::Gaussian { sigma }, _) => *sigma,
            (NoiseKind::Bernoulli, _) => 0.5,
            (NoiseKind::CommonRandomNumbers, Some(m)) => m.sigma(),
            (NoiseKind::CommonRandomNumbers, None) => unreachable!("crn oracle always has a model"),
        }
    }

    pub fn crn_model(&self) -> Option<&CrnModel> {
        self.crn.as_ref()
    }

    pub fn first_order(&self) -> Option<FirstOrderChannel> {
        self.first_order
    }

    /// Simulations consumed so far.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub(crate) fn charge(&mut self, units: u64) {
        self.cost += units;
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// One noisy evaluation at `x`; costs one simulation.
    pub fn simulate(&mut self, x: &LatticePoint) -> Result<f64> {
        if !self.truth.domain().contains(&x.0) {
            return domain(format!("{x} is not feasible"));
        }
        self.simulate_coords(&x.0)
    }

    pub(crate) fn simulate_coords(&mut self, x: &[i64]) -> Result<f64> {
        let out = match &self.noise {
            NoiseKind::Gaussian { .. } => {
                let mean = self.truth.eval(x);
                match &self.normal {
                    Some(n) => mean + n.sample(&mut self.rng),
                    None => mean,
                }
            }
            NoiseKind::Bernoulli => {
                let p = self.truth.eval(x);
                if !(0.0..=1.0).contains(&p) {
                    return domain(format!("Bernoulli mean {p} at {x:?} is not a probability"));
                }
                if self.rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            NoiseKind::CommonRandomNumbers => {
                let model = self.crn.as_ref().expect("crn oracle has a model");
                let scenario = model.draw_scenario(&mut self.rng);
                model.scenario_value(x, &scenario)
            }
        };
        self.cost += 1;
        Ok(out)
    }

    /// Evaluates every point under one shared scenario; costs one simulation per point.
    pub fn simulate_common(&mut self, points: &[LatticePoint]) -> Result<Vec<f64>> {
        let model = self.crn.as_ref().ok_or_else(|| {
            Error::Capability("oracle does not support common random numbers".into())
        })?;
        if let Some(p) = points.iter().find(|p| !self.truth.domain().contains(&p.0)) {
            return domain(format!("{p} is not feasible"));
        }
        let scenario = model.draw_scenario(&mut self.rng);
        let out = points.iter().map(|p| model.scenario_value(&p.0, &scenario)).collect();
        self.cost += points.len() as u64;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxDomain;
    use crate::stats::RunningMean;

    fn diag() -> GridFunction {
        make_instance(&InstanceKind::DiagonalTrap, &BoxDomain::new(2, 3).unwrap(), 0).unwrap()
    }

    #[test]
    fn noiseless_is_exact_and_counted() {
        let f = diag();
        let mut o = SimulationOracle::gaussian(f.clone(), 0.0, 1).unwrap();
        for p in f.domain().points() {
            assert_eq!(o.simulate(&p).unwrap(), f.eval(&p.0));
        }
        assert_eq!(o.cost(), 9);
        assert!(matches!(o.simulate(&LatticePoint(vec![0, 1])), Err(Error::Domain(_))));
        assert_eq!(o.cost(), 9);
    }

    #[test]
    fn gaussian_mean_sanity() {
        let f = diag();
        let mut o = SimulationOracle::gaussian(f, 1.0, 42).unwrap();
        let x = LatticePoint(vec![2, 3]);
        let mut rm = RunningMean::new(1.0, 0.05);
        let n = 100_000;
        for _ in 0..n {
            rm.push(o.simulate(&x).unwrap());
        }
        assert!((rm.mean() - -1.0).abs() <= 4.0 / (n as f64).sqrt());
        assert_eq!(o.cost(), n);
    }

    #[test]
    fn bernoulli_outputs_are_coins() {
        let dom = BoxDomain::new(1, 5).unwrap();
        let f = GridFunction::tabulate(dom, |x| x[0] as f64 / 5.0).unwrap();
        let mut o = SimulationOracle::new(f, NoiseKind::Bernoulli, 3).unwrap();
        let x = LatticePoint(vec![2]);
        let mut sum = 0.0;
        for _ in 0..20_000 {
            let v = o.simulate(&x).unwrap();
            assert!(v == 0.0 || v == 1.0);
            sum += v;
        }
        assert!((sum / 20_000.0 - 0.4).abs() < 4.0 * 0.5 / (20_000f64).sqrt());
        assert_eq!(o.sigma(), 0.5);

        let bad = GridFunction::tabulate(dom, |x| x[0] as f64).unwrap();
        assert!(SimulationOracle::new(bad, NoiseKind::Bernoulli, 3).is_err());
    }

    #[test]
    fn reproducible_given_seed() {
        let f = diag();
        let draw = |seed| {
            let mut o = SimulationOracle::gaussian(f.clone(), 0.7, seed).unwrap();
            (0..5).map(|_| o.simulate(&LatticePoint(vec![1, 1])).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn crn_requires_model() {
        assert!(matches!(
            SimulationOracle::new(diag(), NoiseKind::CommonRandomNumbers, 0),
            Err(Error::Capability(_))
        ));
        let mut o = SimulationOracle::gaussian(diag(), 0.1, 0).unwrap();
        assert!(matches!(o.simulate_common(&[LatticePoint(vec![1, 1])]), Err(Error::Capability(_))));
    }
}
