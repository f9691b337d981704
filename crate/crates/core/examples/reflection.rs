//! Reflection amplitudes of a Drude plate across the light cone, and the
//! two forms of the multiple-reflection loop function.

use casimir::constants::C;
use casimir::materials::MaterialModel;
use casimir::optics::{loop_function_direct, loop_function_rearranged, reflection, SpectralPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gold = MaterialModel::drude(1.37e16, 5.3e13);
    let omega = 2e15;
    println!("{:>8}{:>26}{:>26}{:>26}", "ck/w", "q0 (1/m)", "r_e", "r_m");
    for ratio in [0.0, 0.5, 0.99, 1.01, 2.0, 10.0, 100.0] {
        let p = SpectralPoint::radial(omega, ratio * omega / C);
        let r = reflection(p, &gold)?;
        println!(
            "{ratio:>8}{:>13.4e}{:+.4e}i{:>13.4e}{:+.4e}i{:>13.4e}{:+.4e}i",
            r.q0.re, r.q0.im, r.e.re, r.e.im, r.m.re, r.m.im
        );
    }

    let p = SpectralPoint::radial(omega, 3.0 * omega / C);
    let r = reflection(p, &gold)?;
    let l = 1e-7;
    let a = loop_function_direct(r.e, r.e, r.q0, l);
    let b = loop_function_rearranged(r.e, r.e, r.q0, l);
    println!("loop function at l = 100 nm: {a:.6e} and {b:.6e}");
    Ok(())
}
