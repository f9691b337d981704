//! Spectral kinematics and interface reflection amplitudes.
//!
//! Branch rule for every normal wavenumber q: Re q ≥ 0, and on the
//! propagating side (Re q = 0) Im q ≤ 0 at positive frequency. This is the
//! boundary value of the square root analytic in the upper half ω-plane.
//! Amplitudes at negative frequency are conjugates of those at |ω|.

use crate::constants::C;
use crate::materials::{Channel, MaterialError, MaterialModel, ParticleModel};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("reflection pole: vanishing denominator at omega={omega}, k={k}")]
    ReflectionPole { omega: f64, k: f64 },
    #[error("rarified substitution singular on light cone")]
    LightCone,
    #[error("loop divergence: resonance X = 1")]
    LoopDivergence,
}

/// A point (ω, k_x, k_y) of the spectral domain, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub omega: f64,
    pub kx: f64,
    pub ky: f64,
}

impl SpectralPoint {
    pub fn new(omega: f64, kx: f64, ky: f64) -> Self {
        Self { omega, kx, ky }
    }

    /// Point with k along x.
    pub fn radial(omega: f64, k: f64) -> Self {
        Self { omega, kx: k, ky: 0.0 }
    }

    pub fn k2(&self) -> f64 {
        self.kx * self.kx + self.ky * self.ky
    }

    pub fn k(&self) -> f64 {
        self.kx.hypot(self.ky)
    }

    pub fn propagating(&self) -> bool {
        self.k() < self.omega.abs() / C
    }

    pub fn evanescent(&self) -> bool {
        self.k() > self.omega.abs() / C
    }

    /// Same transverse wavevector at another frequency.
    pub fn at_frequency(&self, omega: f64) -> Self {
        Self { omega, ..*self }
    }

    /// k² − ω²/c², factored to keep accuracy near the light cone.
    fn q0_squared(&self) -> f64 {
        let k = self.k();
        let w = self.omega.abs() / C;
        (k - w) * (k + w)
    }
}

/// q₀ = (k² − ω²/c²)^{1/2} on the retarded branch for ω ≥ 0 (Im q₀ ≤ 0).
pub fn vacuum_wavenumber(p: SpectralPoint) -> Complex64 {
    let q2 = p.q0_squared();
    if q2 >= 0.0 {
        Complex64::new(q2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-q2).sqrt())
    }
}

fn branch_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            Complex64::new(z.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, -(-z.re).sqrt())
        }
    } else {
        // principal root already has Re > 0 off the real axis
        z.sqrt()
    }
}

/// q_i = (k² − ω²εμ/c²)^{1/2}, Re q_i ≥ 0 and Im q_i ≤ 0 when Re q_i = 0.
pub fn medium_wavenumber(p: SpectralPoint, eps: Complex64, mu: Complex64) -> Complex64 {
    let w2 = (p.omega / C).powi(2);
    let z = Complex64::new(p.q0_squared(), 0.0) - w2 * (eps * mu - 1.0);
    branch_sqrt(z)
}

/// Reflection amplitudes of one interface at one spectral point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub e: Complex64,
    pub m: Complex64,
    pub q0: Complex64,
    pub qi: Complex64,
}

impl ReflectionPair {
    pub fn zero(q0: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { e: z, m: z, q0, qi: q0 }
    }

    pub fn channel(&self, channel: Channel) -> Complex64 {
        match channel {
            Channel::E => self.e,
            Channel::M => self.m,
        }
    }

    pub fn conj(&self) -> Self {
        Self { e: self.e.conj(), m: self.m.conj(), q0: self.q0.conj(), qi: self.qi.conj() }
    }
}

fn ratio(num: Complex64, den: Complex64, p: SpectralPoint) -> Result<Complex64, OpticsError> {
    if den == Complex64::new(0.0, 0.0) {
        return Err(OpticsError::ReflectionPole { omega: p.omega, k: p.k() });
    }
    Ok(num / den)
}

/// Fresnel amplitudes Δ_e = (q₀ε − q)/(q₀ε + q), Δ_m = (q₀μ − q)/(q₀μ + q)
/// for given ε, μ at a point with ω ≥ 0.
pub fn reflection_from(p: SpectralPoint, eps: Complex64, mu: Complex64) -> Result<ReflectionPair, OpticsError> {
    let q0 = vacuum_wavenumber(p);
    let qi = medium_wavenumber(p, eps, mu);
    let e = ratio(q0 * eps - qi, q0 * eps + qi, p)?;
    let m = ratio(q0 * mu - qi, q0 * mu + qi, p)?;
    Ok(ReflectionPair { e, m, q0, qi })
}

/// Reflection amplitudes of a plate; negative ω by crossing symmetry.
pub fn reflection(p: SpectralPoint, material: &MaterialModel) -> Result<ReflectionPair, OpticsError> {
    if p.omega < 0.0 {
        return reflection(p.at_frequency(-p.omega), material).map(|r| r.conj());
    }
    match material {
        MaterialModel::IdealMetal => {
            let q0 = vacuum_wavenumber(p);
            Ok(ReflectionPair {
                e: Complex64::new(1.0, 0.0),
                m: Complex64::new(-1.0, 0.0),
                q0,
                qi: Complex64::new(f64::INFINITY, 0.0),
            })
        }
        m if m.is_vacuum() => Ok(ReflectionPair::zero(vacuum_wavenumber(p))),
        m => reflection_from(p, m.permittivity(p.omega)?, m.permeability(p.omega)?),
    }
}

/// Normal-incidence reflectivity max(|Δ_e|², |Δ_m|²) at ω ≥ 0.
pub fn normal_reflectivity(omega: f64, material: &MaterialModel) -> Result<f64, OpticsError> {
    let r = reflection(SpectralPoint::radial(omega, 0.0), material)?;
    Ok(r.e.norm_sqr().max(r.m.norm_sqr()))
}

const CUTOFF_GRID: (f64, f64, usize) = (1e8, 1e22, 40);

/// Scan of `f` over the cutoff grid: the grid point after the last one where
/// `f ≥ threshold·max f`. `Ok(None)` when `f` never falls off on the grid,
/// `Ok(Some(0.0))` when it vanishes everywhere.
pub(crate) fn falloff_frequency<F>(f: F, threshold: f64) -> Result<Option<f64>, OpticsError>
where
    F: Fn(f64) -> Result<f64, OpticsError>,
{
    let (lo, hi, per_decade) = CUTOFF_GRID;
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo * 10f64.powf(i as f64 / per_decade as f64)).collect();
    let r = grid.iter().map(|&w| f(w)).collect::<Result<Vec<_>, _>>()?;
    let peak = r.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(Some(0.0));
    }
    Ok(match r.iter().rposition(|&x| x >= threshold * peak) {
        Some(i) if i + 1 < grid.len() => Some(grid[i + 1]),
        _ => None,
    })
}

/// Frequency above which every plate's normal-incidence reflectivity stays
/// below `threshold` times its own maximum, from a log scan over 10⁸..10²²
/// rad/s. `None` when some plate never becomes transparent on the grid.
pub fn transparency_cutoff(materials: &[&MaterialModel], threshold: f64) -> Result<Option<f64>, OpticsError> {
    let mut cutoff = 0.0f64;
    for m in materials {
        if m.is_vacuum() {
            continue;
        }
        if m.is_ideal_metal() {
            return Ok(None);
        }
        match falloff_frequency(|w| normal_reflectivity(w, m), threshold)? {
            Some(w) => cutoff = cutoff.max(w),
            None => return Ok(None),
        }
    }
    Ok(Some(cutoff))
}

/// Reflection with a caller-supplied vacuum wavenumber `q0`, so that
/// integration variables (q₀ itself) stay exact near the light cone.
/// Negative ω by crossing symmetry with the same `q0`.
pub(crate) fn reflection_with_q0(
    omega: f64,
    q0: Complex64,
    material: &MaterialModel,
) -> Result<ReflectionPair, OpticsError> {
    if omega < 0.0 {
        return reflection_with_q0(-omega, q0, material).map(|r| r.conj());
    }
    let one = Complex64::new(1.0, 0.0);
    let (eps, mu) = match material {
        MaterialModel::IdealMetal => {
            return Ok(ReflectionPair { e: one, m: -one, q0, qi: Complex64::new(f64::INFINITY, 0.0) });
        }
        m if m.is_vacuum() => return Ok(ReflectionPair::zero(q0)),
        m => (m.permittivity(omega)?, m.permeability(omega)?),
    };
    let w2 = (omega / C).powi(2);
    let qi = branch_sqrt(q0 * q0 - w2 * (eps * mu - 1.0));
    let p = SpectralPoint::radial(omega, f64::NAN);
    let e = ratio(q0 * eps - qi, q0 * eps + qi, p)?;
    let m = ratio(q0 * mu - qi, q0 * mu + qi, p)?;
    Ok(ReflectionPair { e, m, q0, qi })
}

/// Real reflection amplitudes (r_e, r_m) at imaginary frequency iξ, given
/// q = (k² + ξ²/c²)^{1/2}. Ideal metals give (1, −1).
pub fn imaginary_reflection(xi: f64, q: f64, material: &MaterialModel) -> Result<(f64, f64), OpticsError> {
    match material {
        MaterialModel::IdealMetal => Ok((1.0, -1.0)),
        m if m.is_vacuum() => Ok((0.0, 0.0)),
        m => {
            let eps = m.imag_axis_permittivity(xi)?;
            let mu = m.imag_axis_permeability(xi)?;
            let qi = (q * q + (xi / C).powi(2) * (eps * mu - 1.0)).sqrt();
            Ok(((eps * q - qi) / (eps * q + qi), (mu * q - qi) / (mu * q + qi)))
        }
    }
}

/// ξ → 0 limit of [`imaginary_reflection`] at transverse wavenumber `k`.
///
/// Conductors follow the limit of the model as given: a Drude plate has
/// r_m → 0 and r_e → 1, a plasma plate keeps r_m ≠ 0. The ideal metal is the
/// ω_p → ∞ limit of a Drude metal, so its r_m vanishes here too.
pub fn static_reflection(k: f64, material: &MaterialModel) -> (f64, f64) {
    let MaterialModel::Dispersive { electric, magnetic } = material else {
        return (1.0, 0.0);
    };
    let e = electric.static_limit();
    let m = magnetic.static_limit();
    let (eps0, mu0) = (1.0 + e.value, 1.0 + m.value);
    let term = |xi2: f64, other: f64| if xi2 == 0.0 { 0.0 } else { xi2 * other };
    let kappa2 = (term(e.xi2, mu0) + term(m.xi2, eps0)) / (C * C);
    let qi = (k * k + kappa2).sqrt();
    let r = |x: f64| if x.is_infinite() { 1.0 } else { (x * k - qi) / (x * k + qi) };
    (r(eps0), r(mu0))
}

/// Reflection at signed ω computed without crossing symmetry: the closed-form
/// susceptibilities are evaluated at ω directly and the wavenumbers follow
/// the retarded prescription ω → ω + i0 (Im q ≥ 0 on the propagating side
/// when ω < 0). Used to cross-check [`reflection`].
pub fn reflection_continued(p: SpectralPoint, material: &MaterialModel) -> Result<ReflectionPair, OpticsError> {
    let MaterialModel::Dispersive { electric, magnetic } = material else {
        return reflection(p, material);
    };
    let eps = 1.0 + electric.at_signed(p.omega)?;
    let mu = 1.0 + magnetic.at_signed(p.omega)?;
    let flip = |q: Complex64| if p.omega < 0.0 && q.re == 0.0 { q.conj() } else { q };
    let q0 = flip(vacuum_wavenumber(p));
    let w2 = (p.omega / C).powi(2);
    let z = Complex64::new(p.q0_squared(), 0.0) - w2 * (eps * mu - 1.0);
    let qi = flip(branch_sqrt(z));
    let e = ratio(q0 * eps - qi, q0 * eps + qi, p)?;
    let m = ratio(q0 * mu - qi, q0 * mu + qi, p)?;
    Ok(ReflectionPair { e, m, q0, qi })
}

/// Dilute-plate substitution amplitudes per unit density,
/// (π/q₀)[α_e(2k² − ω²/c²) + α_m ω²/c²] and its e↔m mirror, with the
/// polarizabilities taken at `alpha_omega` and the kinematics at `p`.
pub fn rarified_coefficients(
    p: SpectralPoint,
    alpha_omega: f64,
    particle: &ParticleModel,
) -> Result<(Complex64, Complex64), OpticsError> {
    let q0 = vacuum_wavenumber(p);
    if q0 == Complex64::new(0.0, 0.0) {
        return Err(OpticsError::LightCone);
    }
    let ae = particle.polarizability(Channel::E, alpha_omega)?;
    let am = particle.polarizability(Channel::M, alpha_omega)?;
    let w2 = (p.omega / C).powi(2);
    let lateral = 2.0 * p.k2() - w2;
    let pre = PI / q0;
    Ok((pre * (ae * lateral + am * w2), pre * (am * lateral + ae * w2)))
}

/// Rarified-medium replacement for plate-1 amplitudes at density n₁ (first order in n₁).
pub fn rarified_delta(p: SpectralPoint, particle: &ParticleModel) -> Result<ReflectionPair, OpticsError> {
    if p.omega < 0.0 {
        return rarified_delta(p.at_frequency(-p.omega), particle).map(|r| r.conj());
    }
    let (e, m) = rarified_coefficients(p, p.omega, particle)?;
    let q0 = vacuum_wavenumber(p);
    Ok(ReflectionPair { e: e * particle.density, m: m * particle.density, q0, qi: q0 })
}

/// X/(1 − X) with X = Δ₁Δ₂ e^{−2q₀l}, which equals (e^{2q₀l}/(Δ₁Δ₂) − 1)^{−1}.
/// Only the decaying exponential is formed.
pub fn loop_function(d1: Complex64, d2: Complex64, q0: Complex64, l: f64) -> Result<Complex64, OpticsError> {
    let x = d1 * d2 * (-2.0 * q0 * l).exp();
    let den = 1.0 - x;
    if den == Complex64::new(0.0, 0.0) {
        return Err(OpticsError::LoopDivergence);
    }
    Ok(x / den)
}

/// Left-hand form (e^{2q₀l}/(Δ₁Δ₂) − 1)^{−1}; overflows for large q₀l. Test use.
pub fn loop_function_direct(d1: Complex64, d2: Complex64, q0: Complex64, l: f64) -> Complex64 {
    1.0 / ((2.0 * q0 * l).exp() / (d1 * d2) - 1.0)
}

/// Rearranged form (X − |Δ₁|²|Δ₂|² e^{−2(q₀+q₀*)l}) / |1 − X|².
pub fn loop_function_rearranged(d1: Complex64, d2: Complex64, q0: Complex64, l: f64) -> Complex64 {
    let x = d1 * d2 * (-2.0 * q0 * l).exp();
    let sq = d1.norm_sqr() * d2.norm_sqr() * (-2.0 * (q0 + q0.conj()) * l).exp();
    (x - sq) / (1.0 - x).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{Oscillator, Susceptibility};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_wavenumber_examples() {
        assert_eq!(vacuum_wavenumber(SpectralPoint::radial(0.0, 1e7)), c(1e7, 0.0));
        let q = vacuum_wavenumber(SpectralPoint::radial(3e15, 0.0));
        assert_eq!(q.re, 0.0);
        assert!((q.im + 3e15 / C).abs() < 1e-9 * 1e7);
        assert!((q.im + 1.0007e7).abs() < 1e3);
        let w = 2e15;
        assert_eq!(vacuum_wavenumber(SpectralPoint::radial(w, w / C)), c(0.0, 0.0));
    }

    #[test]
    fn medium_reduces_to_vacuum() {
        for (w, k) in [(1e15, 1e7), (3e15, 2e6), (1e14, 0.0)] {
            let p = SpectralPoint::new(w, k * 0.6, k * 0.8);
            assert_eq!(medium_wavenumber(p, c(1.0, 0.0), c(1.0, 0.0)), vacuum_wavenumber(p));
        }
    }

    #[test]
    fn vacuum_plate_does_not_reflect() {
        let r = reflection(SpectralPoint::radial(1e15, 2e7), &MaterialModel::vacuum()).unwrap();
        assert_eq!(r.e, c(0.0, 0.0));
        assert_eq!(r.m, c(0.0, 0.0));
    }

    #[test]
    fn nonretarded_limit_of_electric_amplitude() {
        // corrections are O(|eps| (w/ck)^2), so the bound scales with |eps|
        let models = [
            MaterialModel::drude(1.37e16, 5.3e13),
            MaterialModel::dielectric(Susceptibility::constant(1.5, Some(1e16))),
        ];
        let w = 4e15;
        for m in &models {
            let eps = m.permittivity(w).unwrap();
            let r = reflection(SpectralPoint::radial(w, 1e3 * w / C), m).unwrap();
            let limit = (eps - 1.0) / (eps + 1.0);
            assert!((r.e - limit).norm() < 1e-6 * eps.norm().max(1.0) * limit.norm().max(1.0));
        }
    }

    #[test]
    fn drude_reflection_independent_path() {
        // second path: explicit polar-form square roots, no shared helpers
        let (wp, g) = (1.37e16, 5.3e13);
        let m = MaterialModel::drude(wp, g);
        for &(w, k) in &[(1e15, 1e7), (5e15, 1e6), (2e16, 3e7), (1e13, 5e6)] {
            let r = reflection(SpectralPoint::radial(w, k), &m).unwrap();
            let eps = c(1.0, 0.0) - wp * wp / (c(w, 0.0) * c(w, g));
            let z = c(k * k, 0.0) - eps * (w / C).powi(2);
            let (rad, arg) = (z.norm().sqrt(), 0.5 * z.arg());
            let qi = Complex64::from_polar(rad, arg);
            let z0 = k * k - (w / C).powi(2);
            let q0 = if z0 >= 0.0 { c(z0.sqrt(), 0.0) } else { c(0.0, -(-z0).sqrt()) };
            let e = (q0 * eps - qi) / (q0 * eps + qi);
            let mm = (q0 - qi) / (q0 + qi);
            assert!((r.e - e).norm() < 1e-12 * e.norm().max(1e-3), "{w} {k}");
            assert!((r.m - mm).norm() < 1e-12 * mm.norm().max(1e-3));
        }
    }

    #[test]
    fn ideal_metal_limits() {
        let r = reflection(SpectralPoint::radial(1e14, 1e7), &MaterialModel::IdealMetal).unwrap();
        assert_eq!((r.e, r.m), (c(1.0, 0.0), c(-1.0, 0.0)));
        // large plasma frequency approaches the same limits deep in the evanescent region
        let m = MaterialModel::plasma(1e20);
        let r = reflection(SpectralPoint::radial(1e14, 1e7), &m).unwrap();
        assert!((r.e - 1.0).norm() < 1e-6 && (r.m + 1.0).norm() < 1e-3);
    }

    #[test]
    fn rarified_examples() {
        let zero = ParticleModel::electric(Susceptibility::None, 1e24);
        let r = rarified_delta(SpectralPoint::radial(1e15, 1e7), &zero).unwrap();
        assert_eq!((r.e, r.m), (c(0.0, 0.0), c(0.0, 0.0)));
        let (a, n, k) = (3e-30, 1e22, 2e7);
        let p = ParticleModel::electric(Susceptibility::constant(a, None), n);
        let r = rarified_delta(SpectralPoint::radial(0.0, k), &p).unwrap();
        let expect = 2.0 * PI * n * a * k;
        assert!((r.e.re - expect).abs() < 1e-15 * expect && r.e.im == 0.0);
        assert!(rarified_delta(SpectralPoint::radial(3e15, 3e15 / C), &p).is_err());
    }

    #[test]
    fn rarified_matches_first_order_dilute_reflection() {
        // the substitution equals q0 times the O(n) part of the exact dilute-plate amplitude
        let alpha = Susceptibility::oscillator(4e-30, 6e15, 2e14);
        let particle = ParticleModel {
            electric: alpha.clone(),
            magnetic: Susceptibility::oscillator(1e-30, 3e15, 1e14),
            density: 1.0,
        };
        for &(w, k) in &[(1e10, 1e7), (1e15, 2e7), (2e15, 3e6)] {
            let p = SpectralPoint::radial(w, k);
            let (se, sm) = rarified_coefficients(p, w, &particle).unwrap();
            let q0 = vacuum_wavenumber(p);
            // numerical derivative in n from two small densities (Richardson)
            let d = |n: f64| reflection(p, &particle.dilute_medium(n)).unwrap();
            let (h, h2) = (2e23, 1e23);
            let slope_e = 2.0 * d(h2).e / h2 - d(h).e / h;
            let slope_m = 2.0 * d(h2).m / h2 - d(h).m / h;
            assert!((slope_e * q0 - se).norm() < 1e-6 * se.norm(), "{w} {k} {} {}", slope_e * q0, se);
            assert!((slope_m * q0 - sm).norm() < 1e-6 * sm.norm(), "{w} {k} {} {}", slope_m * q0, sm);
        }
    }

    #[test]
    fn loop_function_examples() {
        assert_eq!(loop_function(c(0.0, 0.0), c(0.5, 0.1), c(1e7, 0.0), 1e-7).unwrap(), c(0.0, 0.0));
        let (q, l) = (2e7, 1e-7);
        let v = loop_function(c(1.0, 0.0), c(1.0, 0.0), c(q, 0.0), l).unwrap();
        let e = (-2.0 * q * l).exp();
        assert_eq!(v.im, 0.0);
        assert!((v.re - e / (1.0 - e)).abs() < 1e-15);
        assert_eq!(loop_function(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), 1.0), Err(OpticsError::LoopDivergence));
    }

    #[test]
    fn passive_amplitudes_in_evanescent_region() {
        // |Δ_m| <= 1 holds for μ = 1; Δ_e can exceed 1 near surface resonances,
        // where the passivity statement is Im Δ >= 0 (absorption)
        let models = [
            MaterialModel::drude(1.37e16, 5.3e13),
            MaterialModel::dielectric(Susceptibility::constant(5.0, Some(3e15))),
            MaterialModel::dielectric(Susceptibility::Lorentz(vec![Oscillator {
                strength: 3.0,
                resonance: 4e15,
                damping: 2e14,
            }])),
        ];
        for m in &models {
            for i in 0..40 {
                let w = 1e12 * 1.4f64.powi(i);
                for f in [1.01, 2.0, 30.0, 1e3] {
                    let r = reflection(SpectralPoint::radial(w, f * w / C), m).unwrap();
                    assert!(r.m.norm() <= 1.0 + 1e-12, "{m:?} {w} {f}");
                    assert!(r.e.im >= -1e-15 && r.m.im >= -1e-15, "{m:?} {w} {f} {r:?}");
                }
            }
        }
    }

    #[test]
    fn surface_resonance_exceeds_unit_modulus() {
        let m = MaterialModel::drude(1.37e16, 5.3e13);
        let w = 1.37e16 / 2f64.sqrt();
        let r = reflection(SpectralPoint::radial(w, 100.0 * w / C), &m).unwrap();
        assert!(r.e.norm() > 10.0);
    }

    #[test]
    fn negative_frequency_with_given_wavenumber() {
        let m = MaterialModel::drude(1.37e16, 5.3e13);
        let MaterialModel::Dispersive { electric, .. } = &m else { unreachable!() };
        for (omega, f) in [(1e13, 3.0), (2e15, 1.01), (8e15, 40.0)] {
            let q0 = c((f * f - 1.0f64).sqrt() * omega / C, 0.0);
            let r = reflection_with_q0(-omega, q0, &m).unwrap();
            let eps = 1.0 + electric.at_signed(-omega).unwrap();
            let qi = (q0 * q0 - (omega / C).powi(2) * (eps - 1.0)).sqrt();
            let qi = if qi.re < 0.0 { -qi } else { qi };
            let e = (q0 * eps - qi) / (q0 * eps + qi);
            let h = (q0 - qi) / (q0 + qi);
            assert!((r.e - e).norm() <= 1e-12 * e.norm().max(1.0), "{} vs {e}", r.e);
            assert!((r.m - h).norm() <= 1e-12 * h.norm().max(1.0), "{} vs {h}", r.m);
        }
    }

    proptest! {
        #[test]
        fn loop_identity_holds(
            a in 0.0f64..1.0, b in -3.2f64..3.2, c2 in 0.0f64..1.0, d in -3.2f64..3.2,
            qre in 0.0f64..5.0, qim in -5.0f64..5.0, l in 0.05f64..2.0,
        ) {
            let d1 = Complex64::from_polar(a, b);
            let d2 = Complex64::from_polar(c2, d);
            let q0 = c(qre, qim);
            prop_assume!(a * c2 > 1e-6);
            let lhs = loop_function_direct(d1, d2, q0, l);
            let rhs = loop_function_rearranged(d1, d2, q0, l);
            let lib = loop_function(d1, d2, q0, l).unwrap();
            let scale = lhs.norm().max(1e-300);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(rhs.norm()) * 10.0);
            prop_assert!((lhs - lib).norm() <= 1e-11 * scale);
        }

        #[test]
        fn branch_rules(w in 0.0f64..5e15, k in 0.0f64..5e7, er in -50.0f64..50.0, ei in 0.0f64..50.0) {
            let p = SpectralPoint::radial(w, k);
            let q0 = vacuum_wavenumber(p);
            prop_assert!(q0.re >= 0.0 && q0.im <= 0.0);
            let q2 = k * k - (w / C).powi(2);
            prop_assert!(((q0 * q0).re - q2).abs() <= 1e-12 * (k * k).max((w / C).powi(2)));
            let eps = c(er, ei);
            let qi = medium_wavenumber(p, eps, c(1.0, 0.0));
            prop_assert!(qi.re >= 0.0);
            if qi.re == 0.0 { prop_assert!(qi.im <= 0.0); }
            if ei > 1e-3 && w > 1e10 { prop_assert!(qi.re > 0.0); }
            let target = c(k * k, 0.0) - (w / C).powi(2) * eps;
            prop_assert!((qi * qi - target).norm() <= 1e-13 * target.norm().max((w / C).powi(2) * eps.norm()).max(k * k) * 4.0);
        }

        #[test]
        fn crossing_symmetry_of_reflection(w in 1e12f64..3e16, f in 0.0f64..5.0) {
            let models = [
                MaterialModel::drude(1.37e16, 5.3e13),
                MaterialModel::dielectric(Susceptibility::oscillator(2.0, 5e15, 1e14))
                    .with_magnetic(Susceptibility::constant(0.5, Some(1e15))),
            ];
            for m in &models {
                let p = SpectralPoint::radial(w, f * w / C);
                let plus = reflection(p, m).unwrap();
                let minus = reflection(p.at_frequency(-w), m).unwrap();
                prop_assert_eq!(minus, plus.conj());
                let cont = reflection_continued(p.at_frequency(-w), m).unwrap();
                prop_assert!((cont.e - minus.e).norm() <= 1e-12 * (1.0 + minus.e.norm()));
                prop_assert!((cont.m - minus.m).norm() <= 1e-12 * (1.0 + minus.m.norm()));
            }
        }
    }
}
