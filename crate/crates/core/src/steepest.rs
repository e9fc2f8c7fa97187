//! Adaptive stochastic steepest descent driven by biased neighbor differences.
//!
//! Each iteration observes `f(y) - f(x)` (up to relative bias `a`) for every
//! neighbor `y` and moves to the most negative one if its mean clears `-2h`;
//! otherwise the confidence width `h` is halved or, in the correct-selection
//! variant, the search stops.

use serde::{Deserialize, Serialize};

use crate::error::{parameter, Error, Result};
use crate::lattice::{coordinate_neighbors, neighbor_set_with_cap, BoxPoint, LatticePoint};
use crate::oracles::{NeighborEstimator, SimulationOracle};
use crate::solvers::{EpochRecord, GuaranteeSpec, ParamEcho, SolveReport};
use crate::stats::samples_needed;

/// Largest dimension for which the full neighborhood is enumerated.
pub const STEEPEST_DIM_CAP: usize = 14;

/// Which neighbors are examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodMode {
    /// All `x ± e_S`.
    #[default]
    Full,
    /// Only `x ± e_i`; not guaranteed to find a minimizer.
    CoordinateOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteepestOptions {
    pub mode: NeighborhoodMode,
    /// Starting point; defaults to `⌈n/2⌉` in every coordinate.
    pub start: Option<LatticePoint>,
    pub dim_cap: usize,
    pub record_trajectory: bool,
}

impl Default for SteepestOptions {
    fn default() -> Self {
        Self { mode: NeighborhoodMode::Full, start: None, dim_cap: STEEPEST_DIM_CAP, record_trajectory: false }
    }
}

/// Derived schedule of the good-selection variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgsSchedule {
    pub h0: f64,
    pub epochs: u64,
    pub iterations: u64,
    pub alpha: f64,
}

/// `h0 = (1-a)L/12`, `E = ⌈log2(nL/ε)⌉` (at least 0), `T = ⌈6n(1+a)/(1-a)⌉`, `α = δ/(ET)`.
pub fn pgs_schedule(n: i64, lipschitz: f64, a: f64, epsilon: f64, delta: f64) -> PgsSchedule {
    let n = n as f64;
    let h0 = (1.0 - a) * lipschitz / 12.0;
    let ratio = n * lipschitz / epsilon;
    let epochs = if ratio > 1.0 { ratio.log2().ceil() as u64 } else { 0 };
    let iterations = (6.0 * n * (1.0 + a) / (1.0 - a)).ceil() as u64;
    let alpha = delta / (epochs.max(1) * iterations) as f64;
    PgsSchedule { h0, epochs, iterations, alpha }
}

struct Walker<'a> {
    est: &'a NeighborEstimator,
    opts: &'a SteepestOptions,
    x: LatticePoint,
    trajectory: Option<Vec<BoxPoint>>,
    steps: u64,
}

enum Outcome {
    Moved,
    Stalled,
}

impl Walker<'_> {
    fn neighbors(&self, oracle: &SimulationOracle) -> Result<Vec<LatticePoint>> {
        let dom = oracle.ground_truth().domain();
        match self.opts.mode {
            NeighborhoodMode::Full => neighbor_set_with_cap(&self.x, dom, self.opts.dim_cap).map_err(|e| match e {
                Error::Parameter(m) => Error::Budget(m),
                other => other,
            }),
            NeighborhoodMode::CoordinateOnly => coordinate_neighbors(&self.x, dom),
        }
    }

    /// One batch of `samples` observations per neighbor, then a move if warranted.
    fn step(&mut self, oracle: &mut SimulationOracle, h: f64, samples: u64) -> Result<Outcome> {
        let nbrs = self.neighbors(oracle)?;
        let means = self.est.sample_means(oracle, &self.x, &nbrs, samples)?;
        self.steps += 1;
        // most negative mean, ties by point order; the point itself is never a target
        let best = nbrs
            .iter()
            .zip(&means)
            .filter(|(y, _)| **y != self.x)
            .fold(None::<(&LatticePoint, f64)>, |acc, (y, &m)| match acc {
                Some((_, b)) if b <= m => acc,
                _ => Some((y, m)),
            });
        match best {
            Some((y, m)) if m <= -2.0 * h => {
                self.x = y.clone();
                if let Some(tr) = self.trajectory.as_mut() {
                    tr.push(self.x.to_real());
                }
                Ok(Outcome::Moved)
            }
            _ => Ok(Outcome::Stalled),
        }
    }
}

fn check_inputs(est: &NeighborEstimator, spec: &GuaranteeSpec, oracle: &SimulationOracle, opts: &SteepestOptions) -> Result<LatticePoint> {
    spec.validate()?;
    if !(0.0..1.0).contains(&est.bias_ratio) {
        return parameter(format!("bias ratio must lie in [0, 1), got {}", est.bias_ratio));
    }
    let dom = oracle.ground_truth().domain();
    if opts.mode == NeighborhoodMode::Full && dom.dim() > opts.dim_cap {
        return Err(Error::Budget(format!(
            "steepest descent enumerates 2^{} neighbors; dimension cap is {}",
            dom.dim() + 1,
            opts.dim_cap
        )));
    }
    match &opts.start {
        Some(p) => dom.lattice_point(p.0.clone()),
        None => Ok(LatticePoint(vec![(dom.n() + 1) / 2; dom.dim()])),
    }
}

/// Good-selection steepest descent with halving confidence widths.
pub fn steepest_pgs(
    est: &NeighborEstimator,
    oracle: &mut SimulationOracle,
    spec: &GuaranteeSpec,
    opts: &SteepestOptions,
) -> Result<SolveReport> {
    let start = check_inputs(est, spec, oracle, opts)?;
    let eps = spec
        .epsilon()
        .ok_or_else(|| Error::Parameter("steepest_pgs needs a good-selection target".into()))?;
    let n = oracle.ground_truth().domain().n();
    let sched = pgs_schedule(n, spec.lipschitz_l, est.bias_ratio, eps, spec.delta);
    let start_cost = oracle.cost();
    let mut w = Walker {
        est,
        opts,
        trajectory: opts.record_trajectory.then(|| vec![start.to_real()]),
        x: start,
        steps: 0,
    };
    let mut widths = Vec::new();
    let mut batch_samples = Vec::new();
    let mut log = Vec::new();
    for e in 0..sched.epochs {
        let h = sched.h0 / 2f64.powi(e as i32);
        let samples = samples_needed(h, est.sigma_tilde, sched.alpha)?;
        widths.push(h);
        batch_samples.push(samples);
        let (epoch_cost, epoch_steps) = (oracle.cost(), w.steps);
        for _ in 0..sched.iterations {
            if let Outcome::Stalled = w.step(oracle, h, samples)? {
                break;
            }
        }
        log.push(EpochRecord {
            epoch: e,
            epsilon: 6.0 * n as f64 * h / (1.0 - est.bias_ratio),
            delta: spec.delta,
            params: None,
            region: None,
            next_radius: None,
            point: w.x.to_real(),
            iterations: w.steps - epoch_steps,
            cost: oracle.cost() - epoch_cost,
        });
    }
    Ok(SolveReport {
        solution: w.x,
        total_cost: oracle.cost() - start_cost,
        iterations: w.steps,
        trajectory: w.trajectory,
        epoch_log: log,
        params: ParamEcho {
            t: sched.iterations,
            epochs: sched.epochs,
            widths,
            batch_samples,
            coordinate_only: opts.mode == NeighborhoodMode::CoordinateOnly,
            ..ParamEcho::default()
        },
    })
}

/// Correct-selection steepest descent: an `(nc, δ/2)` good-selection warm start,
/// then descent at the fixed width `(1-a)c/12` until no neighbor clears `-2h`.
pub fn steepest_pcs_iz(
    est: &NeighborEstimator,
    oracle: &mut SimulationOracle,
    spec: &GuaranteeSpec,
    opts: &SteepestOptions,
) -> Result<SolveReport> {
    check_inputs(est, spec, oracle, opts)?;
    let c = spec
        .iz_c()
        .ok_or_else(|| Error::Parameter("steepest_pcs_iz needs an indifference-zone target".into()))?;
    let n = oracle.ground_truth().domain().n();
    let a = est.bias_ratio;
    let start_cost = oracle.cost();

    let warm_spec = GuaranteeSpec::pgs(n as f64 * c, spec.delta / 2.0, spec.sigma, spec.lipschitz_l);
    let warm = steepest_pgs(est, oracle, &warm_spec, opts)?;

    let iterations = (12.0 * n as f64 * (1.0 + a) / (1.0 - a)).ceil() as u64;
    let h = (1.0 - a) * c / 12.0;
    let samples = samples_needed(h, est.sigma_tilde, spec.delta / (2.0 * iterations as f64))?;
    let final_cost = oracle.cost();
    let mut w = Walker { est, opts, x: warm.solution.clone(), trajectory: warm.trajectory.clone(), steps: 0 };
    for _ in 0..iterations {
        if let Outcome::Stalled = w.step(oracle, h, samples)? {
            break;
        }
    }
    let mut log = warm.epoch_log.clone();
    log.push(EpochRecord {
        epoch: log.len() as u64,
        epsilon: c,
        delta: spec.delta / 2.0,
        params: None,
        region: None,
        next_radius: None,
        point: w.x.to_real(),
        iterations: w.steps,
        cost: oracle.cost() - final_cost,
    });
    let mut widths = warm.params.widths.clone();
    widths.push(h);
    let mut batch_samples = warm.params.batch_samples.clone();
    batch_samples.push(samples);
    Ok(SolveReport {
        solution: w.x,
        total_cost: oracle.cost() - start_cost,
        iterations: warm.iterations + w.steps,
        trajectory: w.trajectory,
        epoch_log: log,
        params: ParamEcho {
            t: iterations,
            epochs: warm.params.epochs + 1,
            widths,
            batch_samples,
            coordinate_only: opts.mode == NeighborhoodMode::CoordinateOnly,
            ..ParamEcho::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxDomain;
    use crate::oracles::{make_instance, InstanceKind};

    fn diag() -> SimulationOracle {
        let f = make_instance(&InstanceKind::DiagonalTrap, &BoxDomain::new(2, 3).unwrap(), 0).unwrap();
        SimulationOracle::gaussian(f, 0.0, 0).unwrap()
    }

    #[test]
    fn schedule_formulas() {
        let s = pgs_schedule(3, 4.0, 0.25, 1.0, 0.2);
        assert_eq!(s.h0, 0.75 * 4.0 / 12.0);
        assert_eq!(s.epochs, 4);
        assert_eq!(s.iterations, 30);
        assert!((s.alpha - 0.2 / 120.0).abs() < 1e-15);
        assert_eq!(pgs_schedule(3, 0.0, 0.0, 1.0, 0.2).epochs, 0);
    }

    #[test]
    fn noiseless_walk_takes_the_diagonal() {
        let mut o = diag();
        let est = NeighborEstimator::new(0.0, 0.0, 1, 0).unwrap();
        let opts = SteepestOptions { record_trajectory: true, ..SteepestOptions::default() };
        let r = steepest_pgs(&est, &mut o, &GuaranteeSpec::pgs(0.5, 0.1, 0.0, 4.0), &opts).unwrap();
        assert_eq!(r.solution, LatticePoint(vec![3, 3]));
        let tr = r.trajectory.unwrap();
        assert_eq!(tr[0], BoxPoint(vec![2.0, 2.0]));
        assert_eq!(tr[1], BoxPoint(vec![3.0, 3.0]));
    }

    #[test]
    fn coordinate_only_stalls() {
        let mut o = diag();
        let est = NeighborEstimator::new(0.0, 0.0, 1, 0).unwrap();
        let opts = SteepestOptions { mode: NeighborhoodMode::CoordinateOnly, ..SteepestOptions::default() };
        let r = steepest_pgs(&est, &mut o, &GuaranteeSpec::pgs(0.5, 0.1, 0.0, 4.0), &opts).unwrap();
        assert_eq!(r.solution, LatticePoint(vec![2, 2]));
        assert!(r.params.coordinate_only);
    }

    #[test]
    fn pcs_warm_start_precision() {
        let mut o = diag();
        let est = NeighborEstimator::new(0.0, 0.0, 1, 0).unwrap();
        let r = steepest_pcs_iz(&est, &mut o, &GuaranteeSpec::pcs_iz(2.0, 0.2, 0.0, 4.0), &SteepestOptions::default())
            .unwrap();
        assert_eq!(r.solution, LatticePoint(vec![3, 3]));
        // warm start at precision n*c = 6 gives ⌈log2(3*4/6)⌉ = 1 epoch
        assert_eq!(r.params.epochs, 2);
        assert_eq!(r.params.t, 36);
        assert_eq!(r.params.widths, vec![4.0 / 12.0, 2.0 / 12.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut o = diag();
        let est = NeighborEstimator { bias_ratio: 1.0, sigma_tilde: 0.0, gamma: 1, bias_seed: 0 };
        let spec = GuaranteeSpec::pgs(1.0, 0.1, 0.0, 4.0);
        assert!(matches!(steepest_pgs(&est, &mut o, &spec, &SteepestOptions::default()), Err(Error::Parameter(_))));
        let est = NeighborEstimator::new(0.0, 0.0, 1, 0).unwrap();
        let opts = SteepestOptions { dim_cap: 1, ..SteepestOptions::default() };
        assert!(matches!(steepest_pgs(&est, &mut o, &spec, &opts), Err(Error::Budget(_))));
        let opts = SteepestOptions { start: Some(LatticePoint(vec![4, 1])), ..SteepestOptions::default() };
        assert!(matches!(steepest_pgs(&est, &mut o, &spec, &opts), Err(Error::Domain(_))));
    }
}
