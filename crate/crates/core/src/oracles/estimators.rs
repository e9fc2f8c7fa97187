use rand::seq::index::sample;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimulationOracle;
use crate::error::{parameter, Error, Result};
use crate::extension::extension_subgradient;
use crate::lattice::{consistent_permutation, cube_base, neighbor_chain, BoxPoint};

/// Which estimator produced a [`SubgradientEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    FiniteDifference,
    Subset { k: usize },
    Crn,
    FirstOrder,
}

/// A stochastic subgradient of the convex extension and what it cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientEstimate {
    pub g_hat: Vec<f64>,
    pub cost: u64,
    pub kind: EstimatorKind,
}

/// Chain differences with two independent simulations per coordinate; costs `2d`.
pub fn estimate_subgradient_fd(oracle: &mut SimulationOracle, x: &BoxPoint) -> Result<SubgradientEstimate> {
    let base = cube_base(x, oracle.ground_truth().domain())?;
    let frac: Vec<f64> = x.0.iter().zip(&base.0).map(|(&c, &b)| c - b as f64).collect();
    let perm = consistent_permutation(&frac)?;
    let start = oracle.cost();
    let mut g = vec![0.0; x.0.len()];
    // walk S^0 -> S^d in one buffer
    let mut cur = base.0;
    for &k in perm.order() {
        cur[k] += 1;
        let hi = oracle.simulate_coords(&cur)?;
        cur[k] -= 1;
        let lo = oracle.simulate_coords(&cur)?;
        cur[k] += 1;
        g[k] = hi - lo;
    }
    Ok(SubgradientEstimate { g_hat: g, cost: oracle.cost() - start, kind: EstimatorKind::FiniteDifference })
}

/// Chain differences on `k` random coordinates, rescaled by `d/k`; costs `2k`.
pub fn estimate_subgradient_subset(
    oracle: &mut SimulationOracle,
    x: &BoxPoint,
    k: usize,
) -> Result<SubgradientEstimate> {
    let d = x.0.len();
    if k == 0 || k > d {
        return parameter(format!("subset size must lie in 1..={d}, got {k}"));
    }
    let chain = neighbor_chain(x, oracle.ground_truth().domain())?;
    let mut pos = vec![0usize; d];
    for (i, &c) in chain.permutation.order().iter().enumerate() {
        pos[c] = i;
    }
    let mut chosen = sample(oracle.rng(), d, k).into_vec();
    chosen.sort_unstable();
    let scale = d as f64 / k as f64;
    let start = oracle.cost();
    let mut g = vec![0.0; d];
    for c in chosen {
        let i = pos[c];
        let hi = oracle.simulate_coords(&chain.points[i + 1].0)?;
        let lo = oracle.simulate_coords(&chain.points[i].0)?;
        g[c] = scale * (hi - lo);
    }
    Ok(SubgradientEstimate { g_hat: g, cost: oracle.cost() - start, kind: EstimatorKind::Subset { k } })
}

/// Chain differences under one shared scenario; costs `d + 1`.
pub fn estimate_subgradient_crn(oracle: &mut SimulationOracle, x: &BoxPoint) -> Result<SubgradientEstimate> {
    if oracle.crn_model().is_none() {
        return Err(Error::Capability("oracle does not support common random numbers".into()));
    }
    let chain = neighbor_chain(x, oracle.ground_truth().domain())?;
    let start = oracle.cost();
    let vals = oracle.simulate_common(&chain.points)?;
    let mut g = vec![0.0; x.0.len()];
    for (i, &k) in chain.permutation.order().iter().enumerate() {
        g[k] = vals[i + 1] - vals[i];
    }
    Ok(SubgradientEstimate { g_hat: g, cost: oracle.cost() - start, kind: EstimatorKind::Crn })
}

/// Direct subgradient observation from the first-order channel; costs `γ`.
pub fn estimate_first_order(oracle: &mut SimulationOracle, x: &BoxPoint) -> Result<SubgradientEstimate> {
    let channel = oracle
        .first_order()
        .ok_or_else(|| Error::Capability("oracle has no first-order channel".into()))?;
    let mut g = extension_subgradient(oracle.ground_truth(), x)?;
    if channel.sigma_tilde > 0.0 {
        let normal = Normal::new(0.0, channel.sigma_tilde).expect("valid sigma");
        for v in &mut g {
            *v += normal.sample(oracle.rng());
        }
    }
    oracle.charge(channel.gamma);
    Ok(SubgradientEstimate { g_hat: g, cost: channel.gamma, kind: EstimatorKind::FirstOrder })
}

/// Estimator selection for the SSGD solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    Fd,
    Subset {
        k: usize,
    },
    Crn,
    FirstOrder,
}

impl Estimator {
    pub fn estimate(&self, oracle: &mut SimulationOracle, x: &BoxPoint) -> Result<SubgradientEstimate> {
        match *self {
            Estimator::Fd => estimate_subgradient_fd(oracle, x),
            Estimator::Subset { k } => estimate_subgradient_subset(oracle, x, k),
            Estimator::Crn => estimate_subgradient_crn(oracle, x),
            Estimator::FirstOrder => estimate_first_order(oracle, x),
        }
    }

    /// Simulation cost of one call in dimension `d`.
    pub fn cost_per_call(&self, d: usize, oracle: &SimulationOracle) -> u64 {
        match *self {
            Estimator::Fd => 2 * d as u64,
            Estimator::Subset { k } => 2 * k as u64,
            Estimator::Crn => d as u64 + 1,
            Estimator::FirstOrder => oracle.first_order().map_or(0, |c| c.gamma),
        }
    }
}
