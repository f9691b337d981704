//! Permittivity of a few models on the real and imaginary frequency axes.

use casimir::materials::{MaterialModel, Susceptibility};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let models = [
        ("gold (Drude)", MaterialModel::drude(1.37e16, 5.3e13)),
        ("plasma", MaterialModel::plasma(1.37e16)),
        ("glass-like oscillator", MaterialModel::dielectric(Susceptibility::oscillator(1.1, 2e16, 1e14))),
    ];
    println!("{:<24}{:>12}{:>26}{:>16}", "model", "omega", "eps(omega)", "eps(i omega)");
    for (name, m) in &models {
        for omega in [1e13, 1e15, 1e16, 1e17] {
            let e = m.permittivity(omega)?;
            let ei = m.imag_axis_permittivity(omega)?;
            println!("{name:<24}{omega:>12.1e}{:>12.4e} {:+.4e}i{ei:>16.6e}", e.re, e.im);
        }
    }
    Ok(())
}
