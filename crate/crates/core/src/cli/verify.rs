//! Self-check run by `--verify`: closed forms, route agreement and the
//! structural properties of the moving-plate result, each on a small system.

use super::format_number;
use crate::constants::C;
use crate::lifshitz_dynamic::{blocks, pressure_dynamic, DynamicSystem};
use crate::lifshitz_static::{
    classical_limit_pressure, ideal_metal_casimir_pressure, pressure_matsubara, pressure_realfreq_eq2,
    pressure_realfreq_eq5, PlateSystem,
};
use crate::materials::{MaterialModel, ParticleModel, Susceptibility};
use crate::optics::{loop_function_direct, loop_function_rearranged};
use crate::polder_transition::{
    cp_force_analytic, cp_force_matsubara, ideal_metal_cp_force, ParticleSurfaceSystem, TransitionSign,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Reported for information only.
    Info,
}

/// One line of the verification table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub expected: f64,
    /// Allowed |measured − expected|, absolute.
    pub allowed: f64,
    pub outcome: Outcome,
}

impl Check {
    fn compare(name: &'static str, measured: f64, expected: f64, allowed: f64) -> Self {
        let ok = (measured - expected).abs() <= allowed;
        Self { name, measured, expected, allowed, outcome: if ok { Outcome::Pass } else { Outcome::Fail } }
    }

    fn relative(name: &'static str, measured: f64, expected: f64, rel: f64) -> Self {
        Self::compare(name, measured, expected, rel * expected.abs())
    }

    fn failed(name: &'static str) -> Self {
        Self { name, measured: 0.0, expected: 0.0, allowed: 0.0, outcome: Outcome::Fail }
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

fn drude() -> MaterialModel {
    MaterialModel::drude(1.37e16, 5.3e13)
}

fn loop_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let mut c = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (d1, d2) = (c(), c());
        let q0 = Complex64::new(rng.gen_range(0.0..2e7), rng.gen_range(-2e7..0.0));
        let l = rng.gen_range(1e-8..1e-6);
        let a = loop_function_direct(d1, d2, q0, l);
        let b = loop_function_rearranged(d1, d2, q0, l);
        if a.is_finite() && b.is_finite() && a.norm() > 0.0 {
            worst = worst.max((a - b).norm() / a.norm());
        }
    }
    Check::compare("loop_identity_max_rel_diff", worst, 0.0, 1e-12)
}

fn ideal_metal() -> Check {
    let l = 1e-6;
    match pressure_matsubara(&PlateSystem::symmetric(l, 0.0, MaterialModel::IdealMetal), 1e-6) {
        Ok(r) => Check::relative("ideal_metal_pressure_1um_Pa", r.value, ideal_metal_casimir_pressure(l), 5e-3),
        Err(_) => Check::failed("ideal_metal_pressure_1um_Pa"),
    }
}

fn classical_limit() -> Check {
    let (l, t) = (5e-5, 300.0);
    match pressure_matsubara(&PlateSystem::symmetric(l, t, MaterialModel::IdealMetal), 1e-6) {
        Ok(r) => Check::relative("classical_limit_50um_300K_Pa", r.value, classical_limit_pressure(l, t), 1e-2),
        Err(_) => Check::failed("classical_limit_50um_300K_Pa"),
    }
}

fn routes() -> Vec<Check> {
    let sys = PlateSystem::symmetric(2e-7, 300.0, drude());
    let tol = 1e-3;
    let (Ok(m), Ok(e2), Ok(e5)) =
        (pressure_matsubara(&sys, 1e-6), pressure_realfreq_eq2(&sys, tol), pressure_realfreq_eq5(&sys, tol))
    else {
        return vec![Check::failed("direct_vs_matsubara_Pa"), Check::failed("rearranged_vs_matsubara_Pa")];
    };
    vec![
        Check::relative("direct_vs_matsubara_Pa", e2.value, m.value, 2e-2),
        Check::relative("rearranged_vs_matsubara_Pa", e5.value, m.value, 2e-2),
    ]
}

fn dynamic_rest() -> Check {
    let base = PlateSystem::new(2e-7, 300.0, drude(), MaterialModel::drude(9e15, 3.5e13));
    let tol = 1e-3;
    match (pressure_dynamic(&DynamicSystem::new(base.clone(), 0.0), tol), pressure_realfreq_eq5(&base, tol)) {
        (Ok(d), Ok(s)) => Check::compare("dynamic_at_rest_Pa", d.total, s.value, 2.0 * tol * s.value.abs()),
        _ => Check::failed("dynamic_at_rest_Pa"),
    }
}

fn parity() -> Check {
    let base = PlateSystem::symmetric(1e-6, 300.0, MaterialModel::drude(1e15, 1e14));
    let tol = 1e-2;
    let v = 1e-3 * C;
    match (
        pressure_dynamic(&DynamicSystem::new(base.clone(), v), tol),
        pressure_dynamic(&DynamicSystem::new(base, -v), tol),
    ) {
        (Ok(a), Ok(b)) => Check::compare("velocity_parity_Pa", a.total - b.total, 0.0, a.total_error + b.total_error),
        _ => Check::failed("velocity_parity_Pa"),
    }
}

fn second_block_outside_light_cone() -> Check {
    let sys = DynamicSystem::new(PlateSystem::symmetric(1e-7, 300.0, drude()), 1e-3 * C);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..2000 {
        let w = 10f64.powf(rng.gen_range(-3.0..2.0));
        let k = w * (1.0 + 10f64.powf(rng.gen_range(-8.0..1.0)));
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        match blocks(&sys, w, k * phi.cos(), k * phi.sin()) {
            Ok(b) => worst = worst.max(b[2].abs()).max(b[3].abs()),
            Err(_) => return Check::failed("second_block_outside_light_cone"),
        }
    }
    Check::compare("second_block_outside_light_cone", worst, 0.0, 0.0)
}

fn polder() -> Vec<Check> {
    let alpha = 1e-30;
    let z = 1e-6;
    let particle = ParticleModel::electric(Susceptibility::constant(alpha, None), 1.0);
    let ideal = ParticleSurfaceSystem::new(particle, MaterialModel::IdealMetal, z, 0.0);
    let exact = ideal_metal_cp_force(alpha, z);
    let mut out = Vec::new();
    match cp_force_matsubara(&ideal, 1e-6) {
        Ok(r) => out.push(Check::relative("cp_ideal_metal_N", r.force, exact, 1e-2)),
        Err(_) => out.push(Check::failed("cp_ideal_metal_N")),
    }
    if let Ok(r) = cp_force_matsubara(&ideal.clone().with_sign(TransitionSign::Literal), 1e-6) {
        out.push(Check {
            name: "cp_ideal_metal_literal_sign_N",
            measured: r.force,
            expected: exact,
            allowed: 1e-2 * exact.abs(),
            outcome: Outcome::Info,
        });
    }
    let atom = ParticleModel::electric(Susceptibility::oscillator(1e-29, 5e15, 1e14), 1.0);
    let sys = ParticleSurfaceSystem::new(atom, MaterialModel::drude(1e15, 1e14), 2e-7, 300.0);
    match (cp_force_analytic(&sys, 1e-3), cp_force_matsubara(&sys, 1e-6)) {
        (Ok(a), Ok(m)) => out.push(Check::relative("cp_analytic_vs_matsubara_N", a.force, m.force, 1e-2)),
        _ => out.push(Check::failed("cp_analytic_vs_matsubara_N")),
    }
    out
}

/// Runs every check.
pub fn run_suite() -> Vec<Check> {
    let mut out = vec![loop_identity(), ideal_metal(), classical_limit()];
    out.extend(routes());
    out.push(dynamic_rest());
    out.push(parity());
    out.push(second_block_outside_light_cone());
    out.extend(polder());
    out
}

/// The pass/fail table as CSV.
pub fn table(checks: &[Check]) -> String {
    let mut s = String::from("check,measured,expected,allowed,result\n");
    for c in checks {
        let result = match c.outcome {
            Outcome::Pass => "pass",
            Outcome::Fail => "FAIL",
            Outcome::Info => "info",
        };
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            c.name,
            format_number(c.measured),
            format_number(c.expected),
            format_number(c.allowed),
            result
        ));
    }
    s
}
