//! Normal Casimir pressure between a sliding and a resting plate. The
//! velocity correction is even in V and starts at V².

use casimir::constants::C;
use casimir::lifshitz_dynamic::{pressure_dynamic, DynamicSystem};
use casimir::lifshitz_static::PlateSystem;
use casimir::materials::MaterialModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = PlateSystem::symmetric(1e-6, 300.0, MaterialModel::drude(1e15, 1e14));
    let rest = pressure_dynamic(&DynamicSystem::new(base.clone(), 0.0), 1e-3)?;
    println!("V = 0: {:.9e} Pa (term1 {:.4e}, term2 {:.4e})", rest.total, rest.term1, rest.term2);
    for beta in [1e-5, 1e-4, 1e-3] {
        let t = std::time::Instant::now();
        let r = pressure_dynamic(&DynamicSystem::new(base.clone(), beta * C), 1e-3)?;
        println!(
            "V/c = {beta:.0e}: {:.9e} Pa, term1 change {:.4e} Pa, net change {:.4e} Pa  ({:.1?})",
            r.total,
            r.term1 - rest.term1,
            r.total - rest.total,
            t.elapsed()
        );
    }
    Ok(())
}
