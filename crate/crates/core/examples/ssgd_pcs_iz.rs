//! Adaptive epoch-shrinking SSGD for correct selection; prints the epoch log.

use lnat::extension::check_lnatural;
use lnat::oracles::{make_instance, InstanceKind, SimulationOracle};
use lnat::solvers::{ssgd_pcs_iz, GuaranteeSpec, SolverOptions};
use lnat::BoxDomain;

fn main() -> lnat::Result<()> {
    let dom = BoxDomain::new(2, 8)?;
    let f = make_instance(&InstanceKind::Separable, &dom, 4)?;
    let s = check_lnatural(&f)?;
    let c = s.iz_parameter.expect("separable instances have a unique minimizer");
    println!("separable instance on [1..8]^2: minimizer {}, c = {c}, L = {}", s.minimizers[0], s.lipschitz_linf);

    let mut oracle = SimulationOracle::gaussian(f, 0.5, 21)?;
    let spec = GuaranteeSpec::pcs_iz(c, 0.1, 0.5, s.lipschitz_linf);
    let r = ssgd_pcs_iz(&mut oracle, &spec, &SolverOptions::default())?;
    for e in &r.epoch_log {
        let p = e.params.expect("ssgd epochs carry parameters");
        println!(
            "epoch {}: eps {:.3} region {:?} T {} M {:.3} -> {:?}",
            e.epoch,
            e.epsilon,
            e.region.as_ref().map(|(c, r)| (c.0.clone(), *r)),
            p.iterations,
            p.threshold.unwrap_or(f64::NAN),
            e.point.0
        );
    }
    println!("solution {} (correct: {}), cost {}", r.solution, r.solution == s.minimizers[0], r.total_cost);
    Ok(())
}
