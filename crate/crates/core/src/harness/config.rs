use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BoxDomain, LatticePoint};
use crate::oracles::{Estimator, FirstOrderChannel, InstanceKind, NoiseKind};
use crate::solvers::{ConstantsProfile, Target};
use crate::steepest::NeighborhoodMode;

/// Objective to build: a generator kind on `[1..n]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub kind: InstanceKind,
    pub d: usize,
    pub n: i64,
    /// Seed of the random generators; fixed across replications.
    #[serde(default)]
    pub seed: u64,
}

impl InstanceSpec {
    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::new(self.d, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    SsgdPgs,
    SsgdPcsIz,
    SteepestPgs,
    SteepestPcsIz,
}

/// Biased neighbor channel used by the steepest-descent solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborSpec {
    #[serde(default)]
    pub bias_ratio: f64,
    pub sigma_tilde: f64,
    #[serde(default = "one")]
    pub gamma: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub solver: SolverKind,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub profile: ConstantsProfile,
    /// Overrides the computed iteration count.
    #[serde(default)]
    pub iterations: Option<u64>,
    #[serde(default)]
    pub first_order: Option<FirstOrderChannel>,
    #[serde(default)]
    pub neighbor: Option<NeighborSpec>,
    #[serde(default)]
    pub neighborhood: NeighborhoodMode,
    #[serde(default)]
    pub start: Option<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeConfig {
    #[serde(flatten)]
    pub target: Target,
    pub delta: f64,
    /// Computed from the ground truth when absent.
    #[serde(default)]
    pub lipschitz_l: Option<f64>,
    /// Taken from the scenario model when absent and the estimator is CRN.
    #[serde(default)]
    pub bound_g: Option<f64>,
}

/// A fully specified, reproducible experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub noise: NoiseKind,
    pub algorithm: AlgorithmSpec,
    pub guarantee: GuaranteeConfig,
    #[serde(default = "one")]
    pub replications: u64,
    /// Root seed; replication `r` uses the derived stream `r`.
    #[serde(default)]
    pub seed: u64,
    /// Where results go; not part of the experiment's identity, so never echoed.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    /// Write a generation-time comment line into the CSV.
    #[serde(default)]
    pub timestamp: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let dom = self.instance.domain().map_err(|e| Error::Config(format!("instance: {e}")))?;
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        let pgs = matches!(self.guarantee.target, Target::Pgs { .. });
        match (self.algorithm.solver, pgs) {
            (SolverKind::SsgdPgs | SolverKind::SteepestPgs, false) => {
                return bad("guarantee.mode must be pgs for a good-selection solver".into())
            }
            (SolverKind::SsgdPcsIz | SolverKind::SteepestPcsIz, true) => {
                return bad("guarantee.mode must be pcs_iz for a correct-selection solver".into())
            }
            _ => {}
        }
        let steepest = matches!(self.algorithm.solver, SolverKind::SteepestPgs | SolverKind::SteepestPcsIz);
        if steepest && self.algorithm.neighbor.is_none() {
            return bad("algorithm.neighbor is required for steepest-descent solvers".into());
        }
        let crn_noise = matches!(self.noise, NoiseKind::CommonRandomNumbers);
        let crn_instance = matches!(self.instance.kind, InstanceKind::Crn { .. });
        if crn_noise != crn_instance {
            return bad("common_random_numbers noise goes with the crn instance kind, and only with it".into());
        }
        if self.algorithm.estimator == Estimator::Crn && !crn_noise {
            return bad("the crn estimator needs common_random_numbers noise".into());
        }
        if self.algorithm.estimator == Estimator::FirstOrder && self.algorithm.first_order.is_none() {
            return bad("the first_order estimator needs algorithm.first_order".into());
        }
        if let Some(s) = &self.algorithm.start {
            if !dom.contains(s) {
                return bad(format!("algorithm.start {s:?} is outside the domain"));
            }
        }
        Ok(())
    }

    pub fn start_point(&self) -> Option<LatticePoint> {
        self.algorithm.start.clone().map(LatticePoint)
    }
}
