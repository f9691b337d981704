//! Casimir-Polder force on an atom above a Drude surface, from the
//! analytic dilute-plate transition, the Matsubara sum and finite
//! differences of the plate-plate pressure.

use casimir::constants::C;
use casimir::materials::{MaterialModel, ParticleModel, Susceptibility};
use casimir::polder_transition::{
    cp_force_analytic, cp_force_finite_difference, cp_force_matsubara, ideal_metal_cp_force, ParticleSurfaceSystem,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // polarizabilities are Gaussian volumes, m³
    let atom = ParticleModel::electric(Susceptibility::oscillator(1e-29, 5e15, 1e14), 1.0);
    let z = 2e-7;
    for beta in [0.0, 1e-3] {
        let sys = ParticleSurfaceSystem::new(atom.clone(), MaterialModel::drude(1e15, 1e14), z, 300.0)
            .with_velocity(beta * C);
        let a = cp_force_analytic(&sys, 1e-3)?;
        let m = cp_force_matsubara(&sys, 1e-6)?;
        println!("V/c = {beta:.0e}: analytic {:.6e} N (velocity part {:.2e}), Matsubara at rest {:.6e} N", a.force, a.shift, m.force);
    }
    let sys = ParticleSurfaceSystem::new(atom, MaterialModel::drude(1e15, 1e14), z, 300.0);
    let fd = cp_force_finite_difference(&sys, 1.6e22, z / 200.0, 1e-3)?;
    println!("finite difference, n1 = 1.6e22 m^-3: {:.6e} N (second block {:.2e} N)", fd.force, fd.term2);

    let alpha = 1e-30;
    let ideal = ParticleSurfaceSystem::new(
        ParticleModel::electric(Susceptibility::constant(alpha, None), 1.0),
        MaterialModel::IdealMetal,
        1e-6,
        0.0,
    );
    println!(
        "ideal metal, z = 1 um: {:.8e} N vs {:.8e} N",
        cp_force_matsubara(&ideal, 1e-8)?.force,
        ideal_metal_cp_force(alpha, 1e-6)
    );
    Ok(())
}
