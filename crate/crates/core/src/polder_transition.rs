//! Casimir-Polder force on a small particle from the plate-plate result.
//!
//! A dilute plate of particles at density n₁ exerts P(l) = n₁ ∫_l^∞ F(z) dz
//! on the other plate, so F(z) = −(1/n₁) dP/dl at l = z. The transition is
//! taken in two ways: [`cp_force_analytic`] linearizes the moving-plate
//! integrand in n₁ and differentiates under the integral, and
//! [`cp_force_finite_difference`] differences [`pressure_dynamic`](crate::lifshitz_dynamic::pressure_dynamic) for a real
//! dilute plate. [`cp_force_matsubara`] applies the same linearization to
//! the imaginary-frequency sum and serves as the static reference.
//!
//! Polarizabilities are Gaussian volumes in m³ (ε − 1 = 4πnα).

use crate::constants::{C, HBAR, K_B};
use crate::error::{Error, Result};
use crate::lifshitz_dynamic::{frequency_shift, DynamicSystem, DEFAULT_SPEED_LIMIT};
use crate::lifshitz_static::{
    amplitudes, frequency_cutoff, frequency_integral, imaginary_amplitudes, inner_spec, matsubara_sum, radial_split,
    realfreq_inner_spec, thermal_factor, PlateSystem,
};
use crate::lifshitz_dynamic::pressure_dynamic_total;
use crate::materials::{Channel, MaterialModel, ParticleModel};
use crate::optics::falloff_frequency;
use crate::quadrature::{integrate_semi_infinite_samples, QuadratureSpec, Sample};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Sign applied to (1/n₁) dF/dl in the plate-to-particle transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransitionSign {
    /// F = −(1/n₁) dP/dl, attractive near a resting surface.
    #[default]
    Attractive,
    /// F = +(1/n₁) dP/dl, the sign as commonly printed.
    Literal,
}

impl TransitionSign {
    fn factor(self) -> f64 {
        match self {
            Self::Attractive => 1.0,
            Self::Literal => -1.0,
        }
    }
}

/// A particle at height z above a resting surface, moving parallel to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSurfaceSystem {
    pub particle: ParticleModel,
    pub surface: MaterialModel,
    /// Separation z, m.
    pub separation: f64,
    /// K.
    pub temperature: f64,
    /// m/s along x.
    pub velocity: f64,
    /// Include α_m; off gives the electric-only force.
    pub magnetic: bool,
    pub sign: TransitionSign,
    /// Largest accepted |V|/c.
    pub speed_limit: f64,
}

impl ParticleSurfaceSystem {
    pub fn new(particle: ParticleModel, surface: MaterialModel, separation: f64, temperature: f64) -> Self {
        Self {
            particle,
            surface,
            separation,
            temperature,
            velocity: 0.0,
            magnetic: true,
            sign: TransitionSign::default(),
            speed_limit: DEFAULT_SPEED_LIMIT,
        }
    }

    pub fn with_velocity(mut self, velocity: f64) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_sign(mut self, sign: TransitionSign) -> Self {
        self.sign = sign;
        self
    }

    /// The same system with the magnetic polarizability switched off.
    pub fn electric_only(mut self) -> Self {
        self.magnetic = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(Error::InvalidSystem(format!("separation must be > 0, got {}", self.separation)));
        }
        self.particle.validate()?;
        // gap, temperature, surface and velocity checks are shared with the plates
        self.plates(MaterialModel::vacuum(), self.separation).validate()
    }

    /// Particle model actually used.
    pub fn effective_particle(&self) -> ParticleModel {
        if self.magnetic {
            self.particle.clone()
        } else {
            self.particle.electric_only()
        }
    }

    fn plates(&self, plate1: MaterialModel, gap: f64) -> DynamicSystem {
        let base = PlateSystem::new(gap, self.temperature, plate1, self.surface.clone());
        DynamicSystem::new(base, self.velocity).with_speed_limit(self.speed_limit)
    }

    fn beta(&self) -> f64 {
        self.velocity / C
    }

    /// ħc/(2k_BT z); infinite at T = 0.
    fn thermal_ratio(&self) -> f64 {
        PlateSystem::new(self.separation, self.temperature, MaterialModel::vacuum(), MaterialModel::vacuum())
            .thermal_ratio()
    }
}

/// Casimir-Polder force, N; negative for attraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpForce {
    pub force: f64,
    pub error: f64,
    /// Velocity-induced part, already included in `force`.
    pub shift: f64,
    /// Parts of `force` from α_e-led and α_m-led channels.
    pub electric: f64,
    pub magnetic: f64,
    pub converged: bool,
}

impl CpForce {
    fn zero() -> Self {
        Self { force: 0.0, error: 0.0, shift: 0.0, electric: 0.0, magnetic: 0.0, converged: true }
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::AccuracyNotReached { value: self.force, error: self.error })
        }
    }
}

/// First-order plate amplitudes per unit density, divided by z³, at
/// (w⁺, q̃²) on the vacuum branch of the common q̃.
fn dilute_amplitudes(particle: &ParticleModel, z: f64, wp: f64, q: Complex64) -> Option<(Complex64, Complex64)> {
    let q2 = q * q;
    if q2 == Complex64::new(0.0, 0.0) {
        return None;
    }
    let omega = wp.abs() * C / z;
    let mut ae = particle.polarizability(Channel::E, omega).ok()?;
    let mut am = particle.polarizability(Channel::M, omega).ok()?;
    if wp < 0.0 {
        ae = ae.conj();
        am = am.conj();
    }
    let w2 = wp * wp;
    let lateral = 2.0 * q2 + w2;
    let pre = PI / (q2 * z.powi(3));
    Some((pre * (ae * lateral + am * w2), pre * (am * lateral + ae * w2)))
}

fn q_from_square(q2: f64) -> Complex64 {
    if q2 >= 0.0 {
        Complex64::new(q2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-q2).sqrt())
    }
}

/// −∂/∂l of the linearized cross term per channel, in gap units, at
/// (w, q̃², κ_x) with the particle side at w⁺ = w + βκ_x.
fn linear_integrand(
    sys: &ParticleSurfaceSystem,
    particle: &ParticleModel,
    beta: f64,
    ratio: f64,
    w: f64,
    q2: f64,
    kx: f64,
) -> Option<[f64; 2]> {
    let z = sys.separation;
    let mut wp = w + beta * kx;
    if wp == 0.0 {
        // Im α(ω⁺) coth(ħω⁺/2k_BT) has a finite limit on this line
        wp = if ratio.is_finite() { 1e-9 / ratio } else { 1e-12 * w.max(f64::MIN_POSITIVE) };
    }
    let q = q_from_square(q2);
    let decay = (-2.0 * q).exp();
    if decay == Complex64::new(0.0, 0.0) {
        return Some([0.0; 2]);
    }
    let (d1e, d1m) = dilute_amplitudes(particle, z, wp, q)?;
    let r2 = amplitudes(w * C / z, q, z, &sys.surface).ok()?;
    let th = thermal_factor(ratio, w);
    let thp = thermal_factor(ratio, wp);
    let one = |d1: Complex64, d2: Complex64| {
        let v = q * q * decay * d2;
        d1.im * v.re * thp + d1.re * v.im * th
    };
    Some([one(d1e, r2.e), one(d1m, r2.m)])
}

/// Upper end w = ωz/c of the frequency integral: beyond it the surface
/// reflectivity and |α|² both stay below `threshold` times their peaks.
fn particle_cutoff(sys: &ParticleSurfaceSystem, particle: &ParticleModel, threshold: f64) -> Result<f64> {
    let z = sys.separation;
    let plates = PlateSystem::new(z, sys.temperature, MaterialModel::vacuum(), sys.surface.clone());
    let surface = frequency_cutoff(&plates, 1e2 * threshold)?;
    let alpha = falloff_frequency(
        |w| {
            let e = particle.polarizability(Channel::E, w)?.norm_sqr();
            let m = particle.polarizability(Channel::M, w)?.norm_sqr();
            Ok(e.max(m))
        },
        threshold,
    )?
    .ok_or_else(|| {
        Error::InvalidSystem("polarizability never falls off; real-frequency routes need a high-frequency cutoff".into())
    })?;
    Ok(surface.max(alpha * z / C))
}

/// ħc/(2π³z²): force unit of the dimensionless transition integrals.
fn force_unit(z: f64) -> f64 {
    HBAR * C / (2.0 * PI.powi(3) * z * z)
}

/// Casimir-Polder force from the first-order-in-n₁ reduction of the
/// moving-plate pressure, differentiated analytically. The particle density
/// never enters.
pub fn cp_force_analytic(sys: &ParticleSurfaceSystem, tol: f64) -> Result<CpForce> {
    sys.validate()?;
    let particle = sys.effective_particle();
    if particle.electric.is_none() && particle.magnetic.is_none() || sys.surface.is_vacuum() {
        return Ok(CpForce::zero());
    }
    if sys.surface.is_ideal_metal() {
        return Err(Error::InvalidSystem(
            "real-frequency routes need a dissipative surface; use cp_force_matsubara for ideal metals".into(),
        ));
    }
    let z = sys.separation;
    let ratio = sys.thermal_ratio();
    let unit = force_unit(z);
    // −(ħc/2π³z²) ∫dw ∫d²κ, with ∫d²κ = 2π∫κdκ at rest
    let s = -2.0 * PI * unit;
    let scale = match cp_force_matsubara(sys, 1e-3) {
        Ok(r) if r.force.is_finite() && r.force != 0.0 => r.force.abs() / s.abs(),
        _ => 1e-300,
    };
    let static_part = |w_max: f64| {
        let inner = realfreq_inner_spec(tol, scale, w_max);
        let integrand = |w: f64| -> Sample<2> {
            let ([prop, evan], _) = radial_split(
                w,
                |q0, _| {
                    let q2 = (q0 * q0).re;
                    linear_integrand(sys, &particle, 0.0, ratio, w, q2, 0.0).unwrap_or([0.0; 2])
                },
                &inner,
            );
            ([prop.0[0] + evan.0[0], prop.0[1] + evan.0[1]], prop.1 + evan.1)
        };
        let (outer, top) = frequency_integral(integrand, tol, scale, w_max);
        let channels = (s * outer.value[0], s * outer.value[1]);
        (channels, s.abs() * (outer.error + (top[0] + top[1]).abs()), outer.converged)
    };
    // Polarizabilities fall off slowly (α ∝ ω⁻²) while the derivative brings
    // in an extra q₀, so the cutoff is pushed out until the truncation
    // estimate meets the tolerance.
    let mut threshold = 1e-2 * tol;
    let mut w_max = particle_cutoff(sys, &particle, threshold)?;
    let (mut channels, mut error, mut outer_ok) = static_part(w_max);
    for _ in 0..3 {
        if error <= tol * (channels.0 + channels.1).abs() {
            break;
        }
        threshold *= 1e-2;
        let next = particle_cutoff(sys, &particle, threshold)?;
        if next <= w_max {
            break;
        }
        w_max = next;
        (channels, error, outer_ok) = static_part(w_max);
    }
    let rest = channels.0 + channels.1;
    let mut converged = outer_ok && error <= tol * rest.abs();
    let mut shift = 0.0;
    if sys.velocity != 0.0 {
        let beta = sys.beta();
        let f = |w: f64, q2: f64, kx: f64, moving: bool| {
            linear_integrand(sys, &particle, if moving { beta } else { 0.0 }, ratio, w, q2, kx)
        };
        // ∫d²κ = 2 ∫₀^π dφ ∫κdκ, φ and π − φ paired
        let s_shift = -2.0 * unit;
        let size = rest.abs() / s_shift.abs();
        let r = frequency_shift(&f, beta, w_max, size, |v| 0.5 * tol * (v[0] + v[1]).abs().max(size));
        shift = s_shift * (r.value[0] + r.value[1]);
        channels.0 += s_shift * r.value[0];
        channels.1 += s_shift * r.value[1];
        error += s_shift.abs() * r.error;
        converged &= r.converged;
    }
    let sign = sys.sign.factor();
    Ok(CpForce {
        force: sign * (rest + shift),
        error,
        shift: sign * shift,
        electric: sign * channels.0,
        magnetic: sign * channels.1,
        converged,
    })
}

/// Static Casimir-Polder force from the linearized Matsubara sum (or its
/// ξ-integral at T = 0). Ignores the velocity.
pub fn cp_force_matsubara(sys: &ParticleSurfaceSystem, tol: f64) -> Result<CpForce> {
    sys.validate()?;
    let particle = sys.effective_particle();
    if particle.electric.is_none() && particle.magnetic.is_none() || sys.surface.is_vacuum() {
        return Ok(CpForce::zero());
    }
    let z = sys.separation;
    let inner = inner_spec(tol).with_scale(0.5);
    // polarizabilities are carried in units of their size at ξ = c/z so
    // that the absolute floors of the quadrature apply
    let size = [Channel::E, Channel::M]
        .iter()
        .filter_map(|&ch| particle.imag_axis_polarizability(ch, C / z).ok())
        .fold(0.0f64, |a, x| a.max(x.abs()));
    let size = if size > 0.0 && size.is_finite() { size } else { 1.0 };
    let term = |zeta: f64| -> Sample<2> {
        let xi = zeta * C / z;
        let (Ok(ae), Ok(am)) =
            (particle.imag_axis_polarizability(Channel::E, xi), particle.imag_axis_polarizability(Channel::M, xi))
        else {
            return ([f64::NAN; 2], 0.0);
        };
        let (ae, am) = (ae / size, am / size);
        let r = integrate_semi_infinite_samples(
            |s| {
                let q = zeta + s;
                let Some((re, rm)) = imaginary_amplitudes(zeta, q, z, &sys.surface) else {
                    return ([0.0; 2], 0.0);
                };
                let z2 = zeta * zeta;
                let lateral = 2.0 * (q * q - z2) + z2;
                let g = q * (-2.0 * q).exp();
                ([g * (ae * lateral - am * z2) * re, g * (am * lateral - ae * z2) * rm], 0.0)
            },
            0.0,
            &inner,
        );
        (r.value, r.error)
    };
    let (sum, err, converged, unit) = if sys.temperature == 0.0 {
        let r = integrate_semi_infinite_samples(
            term,
            0.0,
            &QuadratureSpec::new(tol).with_abs(1e-15 * tol).with_max_panels(400).parallel(true),
        );
        (r.value, r.error, r.converged, size * HBAR * C / (PI * z.powi(5)))
    } else {
        let plates = PlateSystem::new(z, sys.temperature, MaterialModel::vacuum(), sys.surface.clone());
        let (v, e) = matsubara_sum(&plates, tol, term)?;
        (v, e, true, size * 2.0 * K_B * sys.temperature / z.powi(4))
    };
    if !(sum[0].is_finite() && sum[1].is_finite()) {
        return Err(Error::InvalidSystem("polarizability has no finite imaginary-axis values".into()));
    }
    let k = -sys.sign.factor() * unit;
    Ok(CpForce {
        force: k * (sum[0] + sum[1]),
        error: unit * err,
        shift: 0.0,
        electric: k * sum[0],
        magnetic: k * sum[1],
        converged,
    })
}

/// Result of the finite-difference transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifferenceForce {
    pub force: f64,
    pub error: f64,
    /// Parts of `force` from the first and second integral blocks.
    pub term1: f64,
    pub term2: f64,
    /// Central differences dP/dl of the first and second blocks, Pa/m,
    /// before division by n₁.
    pub slope: (f64, f64),
    /// Parts of `force` from the electric and magnetic channels.
    pub electric: f64,
    pub magnetic: f64,
    /// Relative change of `force` when n₁ is halved.
    pub linearity: f64,
    pub converged: bool,
}

/// Largest |ε − 1| accepted for the dilute plate.
pub const RARIFIED_LIMIT: f64 = 1e-3;

fn check_rarified(particle: &ParticleModel, n1: f64) -> Result<()> {
    let f = 4.0 * PI * n1;
    let grid = (0..=560).map(|i| 10f64.powf(8.0 + i as f64 / 40.0));
    let mut worst = 0.0f64;
    for omega in grid {
        for ch in [Channel::E, Channel::M] {
            let a = particle.polarizability(ch, omega)?;
            worst = worst.max(f * a.norm());
        }
    }
    for ch in [Channel::E, Channel::M] {
        if let Ok(a) = particle.imag_axis_polarizability(ch, 0.0) {
            worst = worst.max(f * a.abs());
        }
    }
    if !(worst < RARIFIED_LIMIT) {
        return Err(Error::NotRarified(format!("|eps - 1| reaches {worst:e} at density {n1:e}")));
    }
    Ok(())
}

/// Casimir-Polder force from central differences of [`pressure_dynamic`](crate::lifshitz_dynamic::pressure_dynamic)
/// for a dilute plate with ε − 1 = 4πn₁α_e, μ − 1 = 4πn₁α_m at l = z ± δl.
/// The step is repeated at n₁/2; a change beyond the combined error and
/// `tol` is reported as [`Error::NotRarified`].
pub fn cp_force_finite_difference(sys: &ParticleSurfaceSystem, n1: f64, dl: f64, tol: f64) -> Result<FiniteDifferenceForce> {
    sys.validate()?;
    let z = sys.separation;
    if !(n1.is_finite() && n1 > 0.0) {
        return Err(Error::InvalidSystem(format!("density must be > 0, got {n1}")));
    }
    if !(dl.is_finite() && dl > 0.0 && dl < 0.5 * z) {
        return Err(Error::InvalidSystem(format!("step must lie in (0, z/2), got {dl}")));
    }
    let particle = sys.effective_particle();
    check_rarified(&particle, n1)?;
    let full = difference(sys, &particle, n1, dl, tol)?;
    let half = difference(sys, &particle, 0.5 * n1, dl, tol)?;
    let change = (full.force - half.force).abs();
    let linearity = if full.force != 0.0 { change / full.force.abs() } else { 0.0 };
    if change > full.error + half.error + tol * full.force.abs() {
        return Err(Error::NotRarified(format!(
            "force changes by {linearity:e} (relative) when the density {n1:e} is halved"
        )));
    }
    Ok(FiniteDifferenceForce { linearity, ..full })
}

fn difference(
    sys: &ParticleSurfaceSystem,
    particle: &ParticleModel,
    n1: f64,
    dl: f64,
    tol: f64,
) -> Result<FiniteDifferenceForce> {
    let z = sys.separation;
    let dilute = particle.dilute_medium(n1);
    // the difference is ~4δl/z of each pressure, so each needs that much more
    let inner_tol = tol * dl / z;
    let lo = pressure_dynamic_total(&sys.plates(dilute.clone(), z - dl), inner_tol)?;
    let hi = pressure_dynamic_total(&sys.plates(dilute, z + dl), inner_tol)?;
    let d = 2.0 * dl;
    let slope = ((hi.term1 - lo.term1) / d, (hi.term2 - lo.term2) / d);
    let k = -sys.sign.factor() / n1;
    let term1 = k * slope.0;
    let term2 = k * slope.1;
    Ok(FiniteDifferenceForce {
        force: term1 + term2,
        error: (hi.total_error + lo.total_error) / (d * n1),
        term1,
        term2,
        slope,
        electric: k * (hi.electric - lo.electric) / d,
        magnetic: k * (hi.magnetic - lo.magnetic) / d,
        linearity: 0.0,
        converged: hi.converged && lo.converged,
    })
}

/// −3ħcα₀/(2πz⁵): static polarizability above an ideal metal at T = 0.
pub fn ideal_metal_cp_force(alpha0: f64, z: f64) -> f64 {
    -3.0 * HBAR * C * alpha0 / (2.0 * PI * z.powi(5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Susceptibility;

    fn atom() -> ParticleModel {
        ParticleModel {
            electric: Susceptibility::oscillator(1e-29, 5e15, 1e14),
            magnetic: Susceptibility::oscillator(1e-31, 3e15, 1e14),
            density: 1.0,
        }
    }

    fn system() -> ParticleSurfaceSystem {
        ParticleSurfaceSystem::new(atom(), MaterialModel::drude(1e15, 1e14), 2e-7, 300.0)
    }

    #[test]
    fn ideal_metal_closed_form() {
        let p = ParticleModel::electric(Susceptibility::constant(1e-30, None), 1.0);
        for z in [1e-7, 1e-6, 1e-5] {
            let sys = ParticleSurfaceSystem::new(p.clone(), MaterialModel::IdealMetal, z, 0.0);
            let f = cp_force_matsubara(&sys, 1e-8).unwrap().force;
            let exact = ideal_metal_cp_force(1e-30, z);
            assert!((f / exact - 1.0).abs() < 1e-6, "z={z}: {f} vs {exact}");
        }
    }

    #[test]
    fn literal_sign_flips_force() {
        let sys = system();
        let a = cp_force_matsubara(&sys, 1e-6).unwrap();
        let b = cp_force_matsubara(&sys.clone().with_sign(TransitionSign::Literal), 1e-6).unwrap();
        assert_eq!(a.force, -b.force);
        assert!(a.force < 0.0);
    }

    #[test]
    fn analytic_route_at_rest_matches_matsubara() {
        let sys = system();
        let a = cp_force_analytic(&sys, 1e-3).unwrap();
        let m = cp_force_matsubara(&sys, 1e-6).unwrap();
        assert!(a.converged);
        assert!((a.force / m.force - 1.0).abs() < 2e-3, "{} vs {}", a.force, m.force);
        assert_eq!(a.shift, 0.0);
        assert!(((a.electric + a.magnetic) / a.force - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_route_is_even_in_velocity() {
        let sys = system();
        let a = cp_force_analytic(&sys.clone().with_velocity(3e5), 1e-3).unwrap();
        let b = cp_force_analytic(&sys.with_velocity(-3e5), 1e-3).unwrap();
        assert_eq!(a.force, b.force);
        assert!(a.shift != 0.0);
    }

    #[test]
    fn density_does_not_enter() {
        let sys = system();
        let dense = ParticleSurfaceSystem { particle: ParticleModel { density: 1e25, ..atom() }, ..sys.clone() };
        assert_eq!(cp_force_matsubara(&sys, 1e-6).unwrap().force, cp_force_matsubara(&dense, 1e-6).unwrap().force);
        assert_eq!(cp_force_analytic(&sys, 1e-2).unwrap().force, cp_force_analytic(&dense, 1e-2).unwrap().force);
    }

    #[test]
    fn electric_only_equals_particle_without_magnetic_response() {
        let a = cp_force_matsubara(&system().electric_only(), 1e-6).unwrap();
        let p = ParticleModel { magnetic: Susceptibility::None, ..atom() };
        let b = cp_force_matsubara(&ParticleSurfaceSystem { particle: p, ..system() }, 1e-6).unwrap();
        assert_eq!(a.force, b.force);
        assert!(a.force != cp_force_matsubara(&system(), 1e-6).unwrap().force);
    }

    #[test]
    fn transparent_particle_feels_nothing() {
        let p = ParticleModel::electric(Susceptibility::None, 1.0);
        let sys = ParticleSurfaceSystem { particle: p, ..system() };
        assert_eq!(cp_force_matsubara(&sys, 1e-6).unwrap().force, 0.0);
        assert_eq!(cp_force_analytic(&sys, 1e-3).unwrap().force, 0.0);
    }

    #[test]
    fn finite_difference_rejects_dense_plate_and_bad_step() {
        let sys = system();
        assert!(matches!(cp_force_finite_difference(&sys, 1e28, 1e-9, 1e-3), Err(Error::NotRarified(_))));
        assert!(cp_force_finite_difference(&sys, 1e20, 0.6 * 2e-7, 1e-3).is_err());
        assert!(cp_force_finite_difference(&sys, -1.0, 1e-9, 1e-3).is_err());
    }
}
