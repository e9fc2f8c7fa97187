//! Exhaustive structure checks: midpoint convexity, local vs. global minima, WSM/IZ constants.

use lnat::extension::{check_lnatural, check_translation_submodularity, local_global_check};
use lnat::oracles::{make_instance, InstanceKind};
use lnat::{BoxDomain, LatticePoint};

fn main() -> lnat::Result<()> {
    let spurious = make_instance(&InstanceKind::SpuriousLocal, &BoxDomain::new(2, 4)?, 0)?;
    let report = check_lnatural(&spurious)?;
    println!("4|2x+y-8| + |x-2y+6| on [1..4]^2\n{report}");
    let (local, global) = local_global_check(&spurious, &LatticePoint(vec![3, 2]))?;
    println!("(3,2): local minimum {local}, global minimum {global}");
    println!("translation submodular: {:?}\n", check_translation_submodularity(&spurious)?);

    let trap = make_instance(&InstanceKind::DiagonalTrap, &BoxDomain::new(2, 3)?, 0)?;
    let report = check_lnatural(&trap)?;
    println!("2|x-y| - |x+y-2| on [1..3]^2\n{report}");
    if let (Some(c), Some(eta)) = (report.iz_parameter, report.wsm_eta) {
        println!("eta * c = {}", eta * c);
    }
    Ok(())
}
