//! Steepest descent with biased neighbor differences, and the coordinate-only stall.

use lnat::oracles::{make_instance, InstanceKind, NeighborEstimator, SimulationOracle};
use lnat::solvers::GuaranteeSpec;
use lnat::steepest::{steepest_pcs_iz, steepest_pgs, NeighborhoodMode, SteepestOptions};
use lnat::BoxDomain;

fn main() -> lnat::Result<()> {
    let dom = BoxDomain::new(2, 3)?;
    let f = make_instance(&InstanceKind::DiagonalTrap, &dom, 0)?;
    let exact = NeighborEstimator::new(0.0, 0.0, 1, 0)?;
    let spec = GuaranteeSpec::pgs(0.5, 0.1, 0.0, 4.0);

    for mode in [NeighborhoodMode::CoordinateOnly, NeighborhoodMode::Full] {
        let mut oracle = SimulationOracle::gaussian(f.clone(), 0.0, 0)?;
        let opts = SteepestOptions { mode, record_trajectory: true, ..SteepestOptions::default() };
        let r = steepest_pgs(&exact, &mut oracle, &spec, &opts)?;
        let path: Vec<_> = r.trajectory.unwrap_or_default().into_iter().map(|p| p.0).collect();
        println!("{mode:?}: path {path:?} -> {}", r.solution);
    }

    let noisy = NeighborEstimator::new(0.25, 0.5, 1, 7)?;
    let mut oracle = SimulationOracle::gaussian(f, 0.0, 1)?;
    let r = steepest_pcs_iz(&noisy, &mut oracle, &GuaranteeSpec::pcs_iz(2.0, 0.2, 0.5, 4.0), &SteepestOptions::default())?;
    println!(
        "biased (a = 0.25, sigma = 0.5) correct selection: {} after {} batches, cost {}, widths {:?}, samples {:?}",
        r.solution, r.iterations, r.total_cost, r.params.widths, r.params.batch_samples
    );
    Ok(())
}
