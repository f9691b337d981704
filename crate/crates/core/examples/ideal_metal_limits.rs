//! Ideal-metal plates: the zero-temperature Casimir pressure and the
//! classical high-temperature limit.

use casimir::lifshitz_static::{classical_limit_pressure, ideal_metal_casimir_pressure, pressure_matsubara, PlateSystem};
use casimir::materials::MaterialModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for l in [1e-7, 1e-6, 1e-5] {
        let p = pressure_matsubara(&PlateSystem::symmetric(l, 0.0, MaterialModel::IdealMetal), 1e-8)?.value;
        let exact = ideal_metal_casimir_pressure(l);
        println!("T = 0,   l = {l:.0e} m: {p:.8e} Pa vs {exact:.8e} Pa");
    }
    for l in [5e-6, 2e-5, 5e-5] {
        let p = pressure_matsubara(&PlateSystem::symmetric(l, 300.0, MaterialModel::IdealMetal), 1e-8)?.value;
        let limit = classical_limit_pressure(l, 300.0);
        println!("T = 300, l = {l:.0e} m: {p:.6e} Pa, classical limit {limit:.6e} Pa ({:.3})", p / limit);
    }
    Ok(())
}
