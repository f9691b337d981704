//! Dispersion models for plate permittivity and permeability and for particle
//! polarizabilities.
//!
//! Every model is stored as a susceptibility χ(ω), so that ε = 1 + χ for a
//! plate and α = χ for a particle. Values at negative real frequency are
//! produced by crossing symmetry, χ(−ω) = χ(ω)*, never by the closed forms.
//!
//! Polarizabilities are volumes in the Gaussian sense (m³ here), so that a
//! gas of density n has ε − 1 = 4π n α.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("static pole: model diverges at zero real frequency")]
    StaticPole,
    #[error("zero-frequency term needs convention: model diverges at xi = 0")]
    ZeroFrequencyConvention,
    #[error("invalid material parameter: {0}")]
    Invalid(String),
}

/// One damped oscillator, contributing `strength ω₀² / (ω₀² − ω² − iγω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    /// Dimensionless static contribution.
    pub strength: f64,
    /// Resonance frequency ω₀, rad/s.
    pub resonance: f64,
    /// Damping γ, rad/s.
    pub damping: f64,
}

/// A causal susceptibility model.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Susceptibility {
    /// χ ≡ 0.
    #[default]
    None,
    /// Static value χ₀ rolled off above `cutoff` as χ₀ / (1 − iω/cutoff).
    /// `cutoff = None` keeps χ₀ at all frequencies, which is allowed only for
    /// particle polarizabilities.
    Constant { value: f64, cutoff: Option<f64> },
    /// −ω_p² / (ω(ω + iγ)).
    Drude { plasma: f64, damping: f64 },
    /// −ω_p² / ω².
    Plasma { plasma: f64 },
    /// Sum of damped oscillators.
    Lorentz(Vec<Oscillator>),
}

/// Zero-frequency behaviour on the imaginary axis: χ(iξ) → `value` and
/// ξ² χ(iξ) → `xi2`. `value` is infinite for conductors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticLimit {
    pub value: f64,
    pub xi2: f64,
}

impl Susceptibility {
    pub fn drude(plasma: f64, damping: f64) -> Self {
        Self::Drude { plasma, damping }
    }

    pub fn constant(value: f64, cutoff: Option<f64>) -> Self {
        Self::Constant { value, cutoff }
    }

    pub fn oscillator(strength: f64, resonance: f64, damping: f64) -> Self {
        Self::Lorentz(vec![Oscillator { strength, resonance, damping }])
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None)
    }

    /// Checks passivity and (when `transparent` is set) the high-frequency limit χ → 0.
    pub fn validate(&self, transparent: bool) -> Result<(), MaterialError> {
        let bad = |m: &str| Err(MaterialError::Invalid(m.to_string()));
        match self {
            Self::None => Ok(()),
            Self::Constant { value, cutoff } => {
                if !value.is_finite() || *value < 0.0 {
                    return bad("constant susceptibility must be finite and >= 0");
                }
                match cutoff {
                    Some(w) if !(w.is_finite() && *w > 0.0) => bad("cutoff must be positive"),
                    None if transparent && *value != 0.0 => {
                        bad("constant permittivity/permeability needs a high-frequency cutoff")
                    }
                    _ => Ok(()),
                }
            }
            Self::Drude { plasma, damping } => {
                if !(plasma.is_finite() && *plasma > 0.0) {
                    return bad("plasma frequency must be positive");
                }
                if !(damping.is_finite() && *damping > 0.0) {
                    return bad("drude damping must be positive");
                }
                Ok(())
            }
            Self::Plasma { plasma } => {
                if !(plasma.is_finite() && *plasma > 0.0) {
                    return bad("plasma frequency must be positive");
                }
                Ok(())
            }
            Self::Lorentz(osc) => {
                for o in osc {
                    if !(o.strength >= 0.0 && o.resonance > 0.0 && o.damping >= 0.0)
                        || !(o.strength.is_finite() && o.resonance.is_finite() && o.damping.is_finite())
                    {
                        return bad("oscillator needs strength >= 0, resonance > 0, damping >= 0");
                    }
                }
                Ok(())
            }
        }
    }

    /// χ(ω) at real ω; negative ω via crossing symmetry.
    pub fn at(&self, omega: f64) -> Result<Complex64, MaterialError> {
        if omega < 0.0 {
            return self.at(-omega).map(|v| v.conj());
        }
        let w = Complex64::new(omega, 0.0);
        let i = Complex64::i();
        Ok(match self {
            Self::None => Complex64::new(0.0, 0.0),
            Self::Constant { value, cutoff } => match cutoff {
                Some(wc) => *value / (1.0 - i * omega / wc),
                None => Complex64::new(*value, 0.0),
            },
            Self::Drude { plasma, damping } => {
                if omega == 0.0 {
                    return Err(MaterialError::StaticPole);
                }
                -plasma * plasma / (w * (w + i * damping))
            }
            Self::Plasma { plasma } => {
                if omega == 0.0 {
                    return Err(MaterialError::StaticPole);
                }
                Complex64::new(-plasma * plasma / (omega * omega), 0.0)
            }
            Self::Lorentz(osc) => osc
                .iter()
                .map(|o| {
                    let w0 = o.resonance * o.resonance;
                    o.strength * w0 / (w0 - omega * omega - i * o.damping * omega)
                })
                .sum(),
        })
    }

    /// χ(ω) from the closed form at signed ω, without crossing symmetry.
    pub fn at_signed(&self, omega: f64) -> Result<Complex64, MaterialError> {
        if omega >= 0.0 {
            return self.at(omega);
        }
        let w = Complex64::new(omega, 0.0);
        let i = Complex64::i();
        Ok(match self {
            Self::None => Complex64::new(0.0, 0.0),
            Self::Constant { value, cutoff } => match cutoff {
                Some(wc) => *value / (1.0 - i * omega / wc),
                None => Complex64::new(*value, 0.0),
            },
            Self::Drude { plasma, damping } => -plasma * plasma / (w * (w + i * damping)),
            Self::Plasma { plasma } => Complex64::new(-plasma * plasma / (omega * omega), 0.0),
            Self::Lorentz(osc) => osc
                .iter()
                .map(|o| {
                    let w0 = o.resonance * o.resonance;
                    o.strength * w0 / (w0 - omega * omega - i * o.damping * omega)
                })
                .sum(),
        })
    }

    /// χ(iξ) for ξ ≥ 0, real.
    pub fn at_imaginary(&self, xi: f64) -> Result<f64, MaterialError> {
        let xi = xi.abs();
        Ok(match self {
            Self::None => 0.0,
            Self::Constant { value, cutoff } => match cutoff {
                Some(wc) => value / (1.0 + xi / wc),
                None => *value,
            },
            Self::Drude { plasma, damping } => {
                if xi == 0.0 {
                    return Err(MaterialError::ZeroFrequencyConvention);
                }
                plasma * plasma / (xi * (xi + damping))
            }
            Self::Plasma { plasma } => {
                if xi == 0.0 {
                    return Err(MaterialError::ZeroFrequencyConvention);
                }
                plasma * plasma / (xi * xi)
            }
            Self::Lorentz(osc) => osc
                .iter()
                .map(|o| {
                    let w0 = o.resonance * o.resonance;
                    o.strength * w0 / (w0 + xi * xi + o.damping * xi)
                })
                .sum(),
        })
    }

    /// ξ → 0 limit on the imaginary axis.
    pub fn static_limit(&self) -> StaticLimit {
        match self {
            Self::Drude { .. } => StaticLimit { value: f64::INFINITY, xi2: 0.0 },
            Self::Plasma { plasma } => StaticLimit { value: f64::INFINITY, xi2: plasma * plasma },
            other => StaticLimit { value: other.at_imaginary(0.0).unwrap_or(0.0), xi2: 0.0 },
        }
    }

    /// The model scaled by a real factor (used to build dilute media from polarizabilities).
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::None => Self::None,
            Self::Constant { value, cutoff } => Self::Constant { value: value * factor, cutoff: *cutoff },
            Self::Drude { plasma, damping } => Self::Drude { plasma: plasma * factor.sqrt(), damping: *damping },
            Self::Plasma { plasma } => Self::Plasma { plasma: plasma * factor.sqrt() },
            Self::Lorentz(osc) => Self::Lorentz(
                osc.iter().map(|o| Oscillator { strength: o.strength * factor, ..*o }).collect(),
            ),
        }
    }
}

/// Response of a plate: ε = 1 + χ_e, μ = 1 + χ_m, or the ideal-metal limit.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialModel {
    Dispersive { electric: Susceptibility, magnetic: Susceptibility },
    /// Perfect conductor, taken as the ω_p → ∞ limit of a Drude metal.
    /// Reflection amplitudes are short-circuited to their exact limits.
    IdealMetal,
}

impl Default for MaterialModel {
    fn default() -> Self {
        Self::vacuum()
    }
}

impl MaterialModel {
    pub fn vacuum() -> Self {
        Self::Dispersive { electric: Susceptibility::None, magnetic: Susceptibility::None }
    }

    pub fn dielectric(electric: Susceptibility) -> Self {
        Self::Dispersive { electric, magnetic: Susceptibility::None }
    }

    pub fn drude(plasma: f64, damping: f64) -> Self {
        Self::dielectric(Susceptibility::drude(plasma, damping))
    }

    pub fn plasma(plasma: f64) -> Self {
        Self::dielectric(Susceptibility::Plasma { plasma })
    }

    pub fn with_magnetic(self, magnetic: Susceptibility) -> Self {
        match self {
            Self::Dispersive { electric, .. } => Self::Dispersive { electric, magnetic },
            Self::IdealMetal => Self::IdealMetal,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Self::Dispersive { electric, magnetic } if electric.is_none() && magnetic.is_none())
    }

    pub fn is_ideal_metal(&self) -> bool {
        matches!(self, Self::IdealMetal)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        match self {
            Self::Dispersive { electric, magnetic } => {
                electric.validate(true)?;
                magnetic.validate(true)
            }
            Self::IdealMetal => Ok(()),
        }
    }

    /// ε(ω) at real frequency.
    pub fn permittivity(&self, omega: f64) -> Result<Complex64, MaterialError> {
        match self {
            Self::Dispersive { electric, .. } => Ok(1.0 + electric.at(omega)?),
            Self::IdealMetal => Err(MaterialError::StaticPole),
        }
    }

    /// μ(ω) at real frequency.
    pub fn permeability(&self, omega: f64) -> Result<Complex64, MaterialError> {
        match self {
            Self::Dispersive { magnetic, .. } => Ok(1.0 + magnetic.at(omega)?),
            Self::IdealMetal => Ok(Complex64::new(1.0, 0.0)),
        }
    }

    /// ε(iξ).
    pub fn imag_axis_permittivity(&self, xi: f64) -> Result<f64, MaterialError> {
        match self {
            Self::Dispersive { electric, .. } => Ok(1.0 + electric.at_imaginary(xi)?),
            Self::IdealMetal => Ok(f64::INFINITY),
        }
    }

    /// μ(iξ).
    pub fn imag_axis_permeability(&self, xi: f64) -> Result<f64, MaterialError> {
        match self {
            Self::Dispersive { magnetic, .. } => Ok(1.0 + magnetic.at_imaginary(xi)?),
            Self::IdealMetal => Ok(1.0),
        }
    }
}

/// Electric/magnetic channel selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    E,
    M,
}

/// A small polarizable particle, with the number density used when the
/// particle is smeared into a dilute plate.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleModel {
    pub electric: Susceptibility,
    pub magnetic: Susceptibility,
    /// Number density n₁, 1/m³.
    pub density: f64,
}

impl ParticleModel {
    pub fn electric(alpha: Susceptibility, density: f64) -> Self {
        Self { electric: alpha, magnetic: Susceptibility::None, density }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        self.electric.validate(false)?;
        self.magnetic.validate(false)?;
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(MaterialError::Invalid("particle density must be positive".into()));
        }
        Ok(())
    }

    pub fn polarizability(&self, channel: Channel, omega: f64) -> Result<Complex64, MaterialError> {
        match channel {
            Channel::E => self.electric.at(omega),
            Channel::M => self.magnetic.at(omega),
        }
    }

    pub fn imag_axis_polarizability(&self, channel: Channel, xi: f64) -> Result<f64, MaterialError> {
        match channel {
            Channel::E => self.electric.at_imaginary(xi),
            Channel::M => self.magnetic.at_imaginary(xi),
        }
    }

    /// The dilute plate with ε − 1 = 4π n α_e and μ − 1 = 4π n α_m at density `density`.
    pub fn dilute_medium(&self, density: f64) -> MaterialModel {
        let f = 4.0 * PI * density;
        MaterialModel::Dispersive { electric: self.electric.scaled(f), magnetic: self.magnetic.scaled(f) }
    }

    /// The same particle with α_m switched off.
    pub fn electric_only(&self) -> Self {
        Self { magnetic: Susceptibility::None, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kinds() -> Vec<Susceptibility> {
        vec![
            Susceptibility::None,
            Susceptibility::constant(3.0, Some(2e15)),
            Susceptibility::drude(1.37e16, 5.3e13),
            Susceptibility::Plasma { plasma: 9e15 },
            Susceptibility::Lorentz(vec![
                Oscillator { strength: 1.2, resonance: 3e15, damping: 1e14 },
                Oscillator { strength: 0.4, resonance: 1.1e16, damping: 0.0 },
            ]),
        ]
    }

    #[test]
    fn vacuum_is_identity() {
        let v = MaterialModel::vacuum();
        assert_eq!(v.permittivity(1e15).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(v.imag_axis_permittivity(1e15).unwrap(), 1.0);
        assert_eq!(v.permeability(-3e14).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn drude_matches_direct_formula() {
        let (wp, g, w) = (1.37e16, 5.3e13, 1e15);
        let m = MaterialModel::drude(wp, g);
        let eps = m.permittivity(w).unwrap();
        // expand 1 - wp^2 (w - i g) / (w (w^2 + g^2)) by hand
        let den = w * (w * w + g * g);
        let re = 1.0 - wp * wp * w / den;
        let im = wp * wp * g / den;
        assert!((eps.re - re).abs() < 1e-12 * re.abs());
        assert!((eps.im - im).abs() < 1e-12 * im.abs());
    }

    #[test]
    fn drude_static_pole_is_reported() {
        let m = MaterialModel::drude(1e16, 1e14);
        assert_eq!(m.permittivity(0.0), Err(MaterialError::StaticPole));
        assert_eq!(m.imag_axis_permittivity(0.0), Err(MaterialError::ZeroFrequencyConvention));
    }

    #[test]
    fn passivity_and_crossing_for_every_kind() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for chi in kinds() {
            for _ in 0..1000 {
                let w = 10f64.powf(rng.gen_range(10.0..18.0));
                let v = chi.at(w).unwrap();
                assert!(v.im >= 0.0, "{chi:?} at {w}: {v}");
                assert_eq!(chi.at(-w).unwrap(), v.conj());
            }
        }
    }

    #[test]
    fn imaginary_axis_is_real_decreasing_and_transparent() {
        for chi in kinds() {
            let mut prev = f64::INFINITY;
            for i in 1..200 {
                let xi = 1e11 * 1.2f64.powi(i);
                let v = 1.0 + chi.at_imaginary(xi).unwrap();
                assert!(v >= 1.0 && v <= prev);
                prev = v;
            }
            assert!(prev - 1.0 < 1e-6, "{chi:?}");
        }
    }

    #[test]
    fn lorentz_matches_termwise_sum() {
        let osc = [(1.2, 3e15, 1e14), (0.4, 1.1e16, 0.0)];
        let chi = Susceptibility::Lorentz(
            osc.iter().map(|&(s, r, d)| Oscillator { strength: s, resonance: r, damping: d }).collect(),
        );
        for xi in [0.0, 1e13, 4e15, 2e17] {
            let direct: f64 = osc.iter().map(|&(s, r, d)| s / (1.0 + (xi / r).powi(2) + d * xi / (r * r))).sum();
            assert!((chi.at_imaginary(xi).unwrap() - direct).abs() < 1e-14 * (1.0 + direct));
        }
    }

    #[test]
    fn drude_imaginary_axis_formula() {
        let m = MaterialModel::drude(2e16, 1e14);
        let xi = 3e15;
        let v = m.imag_axis_permittivity(xi).unwrap();
        assert!((v - (1.0 + 4e32 / (xi * (xi + 1e14)))).abs() < 1e-13 * v);
    }

    #[test]
    fn polarizability_examples() {
        let p = ParticleModel::electric(Susceptibility::None, 1e20);
        assert_eq!(p.polarizability(Channel::E, 1e15).unwrap(), Complex64::new(0.0, 0.0));
        let p = ParticleModel::electric(Susceptibility::constant(2e-30, None), 1e20);
        for w in [0.0, 1e10, 1e17] {
            assert_eq!(p.polarizability(Channel::E, w).unwrap(), Complex64::new(2e-30, 0.0));
        }
        let p = ParticleModel::electric(Susceptibility::oscillator(1e-30, 5e15, 1e14), 1e20);
        assert_eq!(p.polarizability(Channel::E, -2e15).unwrap(), p.polarizability(Channel::E, 2e15).unwrap().conj());
    }

    #[test]
    fn dilute_medium_follows_density_rule() {
        let alpha = Susceptibility::oscillator(1e-30, 5e15, 1e14);
        let p = ParticleModel::electric(alpha.clone(), 1e20);
        let m = p.dilute_medium(1e24);
        let w = 3e15;
        let expect = 1.0 + 4.0 * PI * 1e24 * alpha.at(w).unwrap();
        assert!((m.permittivity(w).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn validation_rejects_unphysical_parameters() {
        assert!(Susceptibility::constant(2.0, None).validate(true).is_err());
        assert!(Susceptibility::constant(2.0, None).validate(false).is_ok());
        assert!(Susceptibility::constant(-1.0, Some(1e15)).validate(true).is_err());
        assert!(Susceptibility::drude(1e16, 0.0).validate(true).is_err());
        assert!(MaterialModel::IdealMetal.validate().is_ok());
    }
}
