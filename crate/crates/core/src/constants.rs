//! Exact SI values of the constants every module shares.

/// Reduced Planck constant ħ = h / 2π, J·s.
pub const HBAR: f64 = 6.626_070_15e-34 / (2.0 * std::f64::consts::PI);
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Read-only bundle of the constants, for callers that prefer a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
    pub c: f64,
}

pub const SI: PhysicalConstants = PhysicalConstants { hbar: HBAR, k_b: K_B, c: C };

/// Thermal frequency k_B T / ħ in rad/s.
pub fn thermal_frequency(temperature: f64) -> f64 {
    K_B * temperature / HBAR
}

/// n-th Matsubara frequency 2π n k_B T / ħ.
pub fn matsubara_frequency(n: u64, temperature: f64) -> f64 {
    2.0 * std::f64::consts::PI * n as f64 * thermal_frequency(temperature)
}
