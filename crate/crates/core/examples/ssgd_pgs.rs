//! One good-selection solve with each subgradient estimator.

use lnat::extension::lipschitz_constant;
use lnat::harness::brute_force_minimum;
use lnat::oracles::{make_instance, CrnModel, Estimator, FirstOrderChannel, InstanceKind, SimulationOracle};
use lnat::solvers::{ssgd_pgs, GuaranteeSpec, SolverOptions};
use lnat::BoxDomain;

fn main() -> lnat::Result<()> {
    let dom = BoxDomain::new(3, 5)?;
    let f = make_instance(&InstanceKind::Pairwise, &dom, 11)?;
    let (xstar, fstar) = brute_force_minimum(&f)?;
    let l = lipschitz_constant(&f)?;
    println!("pairwise instance on [1..5]^3: minimizer {xstar}, f* = {fstar}, L = {l}");

    let spec = GuaranteeSpec::pgs(1.0, 0.1, 0.5, l);
    let first_order = FirstOrderChannel { sigma_tilde: 0.5, gamma: 1 };
    for est in [Estimator::Fd, Estimator::Subset { k: 1 }, Estimator::FirstOrder] {
        let mut oracle = SimulationOracle::gaussian(f.clone(), 0.5, 3)?.with_first_order(first_order)?;
        let opts = SolverOptions { estimator: est, ..SolverOptions::default() };
        let r = ssgd_pgs(&mut oracle, &spec, &opts)?;
        println!(
            "{est:?}: solution {} gap {} cost {} (T = {}, M = {:?}, eta = {:.4})",
            r.solution,
            f.eval(&r.solution.0) - fstar,
            r.total_cost,
            r.params.t,
            r.params.m,
            r.params.eta.unwrap_or(f64::NAN)
        );
    }

    // common random numbers: bounded estimator, no truncation
    let model = CrnModel::generate(dom, 1, 5)?;
    let g = model.gradient_bound();
    let truth = model.mean_function();
    let (_, fstar) = brute_force_minimum(&truth)?;
    let mut oracle = SimulationOracle::with_crn(model, 3);
    let spec = GuaranteeSpec::pgs(1.0, 0.1, oracle.sigma(), lipschitz_constant(&truth)?).with_bound_g(g);
    let opts = SolverOptions { estimator: Estimator::Crn, ..SolverOptions::default() };
    let r = ssgd_pgs(&mut oracle, &spec, &opts)?;
    println!(
        "Crn: solution {} gap {:.3} cost {} (T = {}, G = {g})",
        r.solution,
        truth.eval(&r.solution.0) - fstar,
        r.total_cost,
        r.params.t
    );
    Ok(())
}
