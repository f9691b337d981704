//! The adaptive integrator on a few integrals with known values.

use casimir::quadrature::{integrate, integrate_semi_infinite, QuadratureSpec};

fn main() {
    let spec = QuadratureSpec::new(1e-10);
    let a = integrate(|x| x.sqrt().ln(), 0.0, 1.0, &spec);
    println!("int_0^1 ln sqrt(x) dx   = {:.12} (exact -0.5), {} panels", a.value[0], a.panels);
    let b = integrate_semi_infinite(|x| x.powi(3) / x.exp_m1(), &spec);
    println!("int_0^inf x^3/(e^x - 1)  = {:.12} (exact {:.12})", b.value[0], std::f64::consts::PI.powi(4) / 15.0);
    let c = integrate(|x| (100.0 * x).sin().powi(2), 0.0, std::f64::consts::PI, &spec.clone().with_max_panels(2000));
    println!("int_0^pi sin^2(100x) dx = {:.12} (exact {:.12})", c.value[0], std::f64::consts::FRAC_PI_2);
}
