//! Replicated experiments, brute-force ground truth and structure verification.

mod config;
mod experiment;

pub use config::{AlgorithmSpec, ExperimentConfig, GuaranteeConfig, InstanceSpec, NeighborSpec, SolverKind};
pub use experiment::{
    good_selection_threshold, run_experiment, run_experiment_serial, run_replication, write_csv, ExperimentSummary,
    ReplicationRow, CSV_COLUMNS,
};

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{parameter, Error, Result};
use crate::extension::{check_lnatural, read_grid, GridFunction, StructureReport, DEFAULT_CELL_BUDGET};
use crate::lattice::LatticePoint;
use crate::oracles::{make_instance, InstanceKind};

/// Exhaustive minimum; ties go to the lexicographically first point.
pub fn brute_force_minimum(f: &GridFunction) -> Result<(LatticePoint, f64)> {
    let dom = *f.domain();
    let cells = match dom.num_points() {
        Some(c) if c <= DEFAULT_CELL_BUDGET => c,
        _ => {
            return Err(Error::Budget(format!(
                "[1..{}]^{} exceeds the brute-force budget of {DEFAULT_CELL_BUDGET}",
                dom.n(),
                dom.dim()
            )))
        }
    };
    let (idx, v) = (0..cells)
        .into_par_iter()
        .map(|i| (i, f.eval(&dom.point_at(i).0)))
        .reduce(|| (usize::MAX, f64::INFINITY), |a, b| {
            if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        });
    Ok((dom.point_at(idx), v))
}

/// Where a structure check reads its function from.
#[derive(Debug, Clone)]
pub enum StructureSource<'a> {
    Grid(&'a Path),
    Instance(&'a InstanceSpec),
}

/// Loads the function and runs the exhaustive structure checks.
pub fn verify_structure(source: StructureSource<'_>) -> Result<StructureReport> {
    let f = match source {
        StructureSource::Grid(path) => read_grid(BufReader::new(File::open(path)?))?,
        StructureSource::Instance(spec) => make_instance(&spec.kind, &spec.domain()?, spec.seed)?,
    };
    check_lnatural(&f)
}

/// Builds an [`InstanceKind`] from its command-line name and options.
pub fn instance_from_name(name: &str, index: usize, epsilon: f64, spread: i64) -> Result<InstanceKind> {
    Ok(match name {
        "separable" => InstanceKind::Separable,
        "pairwise" => InstanceKind::Pairwise,
        "spurious_local" => InstanceKind::SpuriousLocal,
        "diagonal_trap" => InstanceKind::DiagonalTrap,
        "hard_family" => InstanceKind::HardFamily { index, epsilon },
        "crn" => InstanceKind::Crn { spread },
        _ => {
            return parameter(format!(
                "unknown instance {name:?}; expected separable, pairwise, spurious_local, diagonal_trap, hard_family or crn"
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxDomain;

    #[test]
    fn brute_force_examples() {
        let d3 = BoxDomain::new(2, 3).unwrap();
        let f = make_instance(&InstanceKind::DiagonalTrap, &d3, 0).unwrap();
        assert_eq!(brute_force_minimum(&f).unwrap(), (LatticePoint(vec![3, 3]), -4.0));
        let d4 = BoxDomain::new(2, 4).unwrap();
        let g = make_instance(&InstanceKind::SpuriousLocal, &d4, 0).unwrap();
        assert_eq!(brute_force_minimum(&g).unwrap().0, LatticePoint(vec![2, 4]));
        let c = GridFunction::from_fn(BoxDomain::new(3, 4).unwrap(), |_| 1.5);
        assert_eq!(brute_force_minimum(&c).unwrap(), (LatticePoint(vec![1, 1, 1]), 1.5));
        let big = GridFunction::from_fn(BoxDomain::new(4, 100).unwrap(), |_| 0.0);
        assert!(matches!(brute_force_minimum(&big), Err(Error::Budget(_))));
    }

    #[test]
    fn structure_from_names() {
        let spec = InstanceSpec { kind: instance_from_name("diagonal_trap", 0, 0.0, 0).unwrap(), d: 2, n: 3, seed: 0 };
        let r = verify_structure(StructureSource::Instance(&spec)).unwrap();
        assert!(r.is_lnatural);
        assert_eq!((r.iz_parameter, r.wsm_eta), (Some(2.0), Some(0.5)));
        let spec = InstanceSpec { kind: InstanceKind::SpuriousLocal, d: 2, n: 4, seed: 0 };
        assert!(!verify_structure(StructureSource::Instance(&spec)).unwrap().is_lnatural);
        assert!(instance_from_name("nope", 0, 0.0, 0).is_err());
    }
}
