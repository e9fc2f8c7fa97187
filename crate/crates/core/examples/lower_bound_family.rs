//! The hard instance family: members are L♮-convex yet have disjoint ε-optimal sets.

use lnat::extension::check_lnatural;
use lnat::harness::brute_force_minimum;
use lnat::oracles::{make_instance, InstanceKind};
use lnat::{BoxDomain, LatticePoint};

fn main() -> lnat::Result<()> {
    let (d, n, eps) = (3, 7, 0.5);
    let dom = BoxDomain::new(d, n)?;
    let mut optimal_sets: Vec<Vec<LatticePoint>> = Vec::new();
    for index in 0..=d {
        let f = make_instance(&InstanceKind::HardFamily { index, epsilon: eps }, &dom, 0)?;
        let (xstar, fstar) = brute_force_minimum(&f)?;
        let good: Vec<LatticePoint> = dom.points().filter(|p| f.eval(&p.0) - fstar <= eps).collect();
        println!(
            "f^{index}: lnatural {}, minimizer {xstar}, f* = {fstar}, {} eps-optimal points",
            check_lnatural(&f)?.is_lnatural,
            good.len()
        );
        optimal_sets.push(good);
    }
    for i in 1..=d {
        let shared = optimal_sets[0].iter().filter(|p| optimal_sets[i].contains(p)).count();
        println!("eps-optimal sets of f^0 and f^{i} share {shared} points");
    }
    Ok(())
}
