//! Casimir pressure between resting gold plates from the real-frequency
//! routes and the Matsubara sum, at room temperature.

use casimir::lifshitz_static::{
    ideal_metal_casimir_pressure, pressure_matsubara, pressure_realfreq_eq2, pressure_realfreq_eq5, PlateSystem,
};
use casimir::materials::MaterialModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tol = 1e-3;
    println!("{:>10}{:>16}{:>16}{:>16}{:>16}", "l (m)", "direct", "rearranged", "Matsubara", "ideal, T=0");
    for l in [5e-8, 1e-7, 3e-7] {
        let sys = PlateSystem::symmetric(l, 300.0, MaterialModel::drude(1.37e16, 5.3e13));
        let direct = pressure_realfreq_eq2(&sys, tol)?.value;
        let rearranged = pressure_realfreq_eq5(&sys, tol)?;
        let matsubara = pressure_matsubara(&sys, 1e-6)?.value;
        println!(
            "{l:>10.1e}{direct:>16.6e}{:>16.6e}{matsubara:>16.6e}{:>16.6e}",
            rearranged.value,
            ideal_metal_casimir_pressure(l)
        );
        if let Some((t1, t2)) = rearranged.terms {
            println!("{:>10}cross term {t1:.4e}, |r|^4 term {t2:.4e}", "");
        }
    }
    Ok(())
}
