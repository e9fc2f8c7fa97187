//! Evaluate the convex extension and its subgradient at fractional points.

use lnat::extension::{extension_subgradient, extension_value};
use lnat::lattice::neighbor_chain;
use lnat::oracles::{make_instance, InstanceKind};
use lnat::{BoxDomain, BoxPoint};

fn main() -> lnat::Result<()> {
    let dom = BoxDomain::new(2, 3)?;
    let f = make_instance(&InstanceKind::DiagonalTrap, &dom, 0)?;

    for x in [[2.0, 2.0], [2.5, 2.0], [1.25, 2.75], [3.0, 3.0]] {
        let x = BoxPoint(x.to_vec());
        let chain = neighbor_chain(&x, &dom)?;
        let pts: Vec<String> = chain.points.iter().map(|p| p.to_string()).collect();
        println!(
            "x = {:?}  value = {:>6.3}  subgradient = {:?}",
            x.0,
            extension_value(&f, &x)?,
            extension_subgradient(&f, &x)?
        );
        println!("    chain {}  weights {:?}", pts.join(" -> "), chain.weights());
    }
    Ok(())
}
