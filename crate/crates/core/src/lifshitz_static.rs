//! Casimir-Lifshitz pressure between plates at rest.
//!
//! Three routes to the same number:
//!
//! * [`pressure_matsubara`]: imaginary-frequency Matsubara sum (or the ξ
//!   integral at T = 0). This is the robust default.
//! * [`pressure_realfreq_eq2`]: real-frequency integral of
//!   `q₀ coth(ħω/2k_BT) Im[X/(1 − X)]`, X = Δ₁Δ₂ e^{−2q₀l}.
//! * [`pressure_realfreq_eq5`]: the same integrand rearranged into a cross
//!   term and a propagating-only `|Δ₁|²|Δ₂|²` term.
//!
//! The real-frequency routes need lossy plates; they exist to validate the
//! machinery reused by the moving-plate calculation.
//!
//! All integrals run in units of the gap: w = ωl/c, κ = kl, q̃ = q₀l. The
//! transverse plane is reduced to a radial integral, which is split at the
//! light cone; the propagating part uses u = |q̃| and the evanescent part
//! q̃ itself as the variable, so that κdκ = u du = q̃ dq̃ and no square-root
//! singularity appears at the light cone.

use crate::constants::{C, HBAR, K_B};
use crate::error::{Error, Result};
use crate::materials::MaterialModel;
use crate::optics::{imaginary_reflection, transparency_cutoff, reflection_with_q0, static_reflection, OpticsError, ReflectionPair};
use crate::quadrature::{
    coth_stable, integrate_samples, IntegralEstimate, integrate_semi_infinite_samples, tighter, QuadratureSpec, Sample,
};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Two plates across a vacuum gap.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSystem {
    /// Gap width l, m.
    pub gap: f64,
    /// Temperature T, K.
    pub temperature: f64,
    pub plate1: MaterialModel,
    pub plate2: MaterialModel,
}

impl PlateSystem {
    pub fn new(gap: f64, temperature: f64, plate1: MaterialModel, plate2: MaterialModel) -> Self {
        Self { gap, temperature, plate1, plate2 }
    }

    pub fn symmetric(gap: f64, temperature: f64, material: MaterialModel) -> Self {
        Self::new(gap, temperature, material.clone(), material)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap.is_finite() && self.gap > 0.0) {
            return Err(Error::InvalidSystem(format!("gap must be > 0, got {}", self.gap)));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidSystem(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        self.plate1.validate()?;
        self.plate2.validate()?;
        Ok(())
    }

    /// ħc/(2k_BT l): coth argument per unit of w = ωl/c. Infinite at T = 0.
    pub fn thermal_ratio(&self) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            HBAR * C / (2.0 * K_B * self.temperature * self.gap)
        }
    }

    /// ħc/l⁴, the pressure unit of the dimensionless integrals.
    pub(crate) fn pressure_unit(&self) -> f64 {
        HBAR * C / self.gap.powi(4)
    }
}

/// Pressure contributions by channel and spectral region, Pa.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Breakdown {
    pub e_evanescent: f64,
    pub e_propagating: f64,
    pub m_evanescent: f64,
    pub m_propagating: f64,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        self.e_evanescent + self.e_propagating + self.m_evanescent + self.m_propagating
    }

    pub fn electric(&self) -> f64 {
        self.e_evanescent + self.e_propagating
    }

    pub fn magnetic(&self) -> f64 {
        self.m_evanescent + self.m_propagating
    }
}

/// Pressure on the plates, negative for attraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureResult {
    /// Pa.
    pub value: f64,
    /// Pa.
    pub error_estimate: f64,
    pub breakdown: Breakdown,
    /// Cross term and `|Δ|⁴` term of the rearranged route, when computed.
    pub terms: Option<(f64, f64)>,
    pub converged: bool,
}

impl PressureResult {
    fn zero() -> Self {
        Self { value: 0.0, error_estimate: 0.0, breakdown: Breakdown::default(), terms: None, converged: true }
    }

    /// Turns an unconverged estimate into [`Error::AccuracyNotReached`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::AccuracyNotReached { value: self.value, error: self.error_estimate })
        }
    }
}

/// coth(ħω/2k_BT) at w = ωl/c, where `ratio` = ħc/(2k_BT l).
pub(crate) fn thermal_factor(ratio: f64, w: f64) -> f64 {
    if ratio.is_infinite() {
        return w.signum();
    }
    coth_stable(ratio * w).unwrap_or(0.0)
}

/// Light-cone split of the radial integral ∫κdκ f, as (propagating, evanescent).
pub(crate) fn radial_split<const N: usize, F>(w: f64, f: F, spec: &QuadratureSpec) -> ([Sample<N>; 2], usize)
where
    F: Fn(Complex64, f64) -> [f64; N] + Sync,
{
    // gap resonances sit roughly π apart in u
    let marks: Vec<f64> = (1..).map(|i| 0.5 * PI * i as f64).take_while(|&u| u < w.min(40.0 * PI)).collect();
    let prop_spec = spec.clone().with_breakpoints(marks);
    let prop =
        integrate_samples(|u| mul(u, f(Complex64::new(0.0, -u), (w * w - u * u).max(0.0).sqrt())), 0.0, w, &prop_spec);
    let evan_spec = spec.clone().with_scale(0.5);
    let evan = integrate_semi_infinite_samples(|q| mul(q, f(Complex64::new(q, 0.0), (q * q + w * w).sqrt())), 0.0, &evan_spec);
    let ok = usize::from(!prop.converged) + usize::from(!evan.converged);
    ([(prop.value, prop.error), (evan.value, evan.error)], ok)
}

fn mul<const N: usize>(s: f64, mut v: [f64; N]) -> Sample<N> {
    for x in v.iter_mut() {
        *x *= s;
    }
    (v, 0.0)
}

/// Amplitudes of both plates at (w, q̃), with poles dropped as measure-zero.
pub(crate) fn amplitudes(
    omega: f64,
    q0: Complex64,
    gap: f64,
    material: &MaterialModel,
) -> std::result::Result<ReflectionPair, OpticsError> {
    reflection_with_q0(omega, q0 / gap, material)
}

pub(crate) fn outer_spec(tol: f64, scale: f64, w_max: f64) -> QuadratureSpec {
    let mut marks = vec![1e-4, 1e-3, 1e-2, 0.1, 1.0];
    marks.extend((1..8).map(|i| w_max * 10f64.powi(-i)));
    QuadratureSpec::new(tol)
        .with_abs(0.1 * tol * scale)
        .with_breakpoints(marks)
        .with_max_panels(1000)
        .parallel(true)
}

/// Raised-cosine window: 1 below `start`, falling smoothly to 0 at `end`.
pub(crate) fn taper(w: f64, start: f64, end: f64) -> f64 {
    if w <= start {
        1.0
    } else if w >= end {
        0.0
    } else {
        0.5 * (1.0 + (PI * (w - start) / (end - start)).cos())
    }
}

/// Outer ∫dw over [0, w_max] with the integrand faded out over the top
/// quarter. The tail oscillates with period π in w, and a smooth fade
/// averages it out where a sharp cut would leave half an oscillation.
/// Returns the estimate and, per component, the change obtained by fading
/// over the top half instead, used as the truncation estimate.
pub(crate) fn frequency_integral<const N: usize, F>(
    f: F,
    tol: f64,
    scale: f64,
    w_max: f64,
) -> (IntegralEstimate<N>, [f64; N])
where
    F: Fn(f64) -> Sample<N> + Sync,
{
    let (half, quarter) = (0.5 * w_max, 0.75 * w_max);
    let mut spec = outer_spec(tol, scale, w_max);
    spec.breakpoints.extend([half, quarter]);
    let windowed = |w: f64| {
        let (mut v, e) = f(w);
        let g = taper(w, quarter, w_max);
        for x in v.iter_mut() {
            *x *= g;
        }
        (v, e * g)
    };
    let est = integrate_samples(windowed, 0.0, w_max, &spec);
    let alt = integrate_samples(
        |w| {
            let (mut v, e) = f(w);
            let d = taper(w, half, w_max) - taper(w, quarter, w_max);
            for x in v.iter_mut() {
                *x *= d;
            }
            (v, e * d.abs())
        },
        half,
        w_max,
        &spec,
    );
    (est, alt.value)
}

/// Upper end w = ωl/c of real-frequency integrals: beyond it both plates
/// reflect less than `tol·10⁻²` of their peak at normal incidence.
pub fn frequency_cutoff(sys: &PlateSystem, tol: f64) -> Result<f64> {
    let cutoff = transparency_cutoff(&[&sys.plate1, &sys.plate2], 1e-2 * tol).map_err(Error::Optics)?;
    match cutoff {
        Some(w) => Ok(w * sys.gap / C),
        None => Err(Error::InvalidSystem(
            "plates never become transparent; real-frequency integrals need a high-frequency cutoff".into(),
        )),
    }
}

pub(crate) fn inner_spec(tol: f64) -> QuadratureSpec {
    let outer = QuadratureSpec::new(tol).with_abs(1e-14 * tol).with_max_panels(300);
    tighter(&outer)
}

/// Inner spec for real-frequency routes, with the absolute floor tied to the
/// size of the whole double integral.
#[doc(hidden)]
pub fn realfreq_inner_spec(tol: f64, scale: f64, w_max: f64) -> QuadratureSpec {
    // integrands oscillate in w with amplitudes far above the result, so only
    // an absolute target is meaningful here
    QuadratureSpec::new(1e-12).with_abs(0.01 * tol * scale / w_max.max(1.0)).with_max_panels(2000)
}

/// Magnitude of the dimensionless real-frequency double integral, from a
/// coarse Matsubara estimate.
#[doc(hidden)]
pub fn realfreq_scale(sys: &PlateSystem) -> f64 {
    let unit = sys.pressure_unit() / (2.0 * PI * PI);
    let est = pressure_matsubara(sys, 1e-3).map(|r| r.value.abs() / unit).unwrap_or(0.0);
    if est.is_finite() && est > 0.0 { est } else { 1e-300 }
}

/// Radial integral of the `q₀ coth Im[X/(1 − X)]` integrand at w = ωl/c, as
/// [e evanescent, e propagating, m evanescent, m propagating].
#[doc(hidden)]
pub fn eq2_integrand(sys: &PlateSystem, ratio: f64, w: f64, inner: &QuadratureSpec) -> Sample<4> {
    let l = sys.gap;
    let omega = w * C / l;
    let th = thermal_factor(ratio, w);
    let ([prop, evan], _) = radial_split(
        w,
        |q0, _kappa| {
            let (Ok(r1), Ok(r2)) = (amplitudes(omega, q0, l, &sys.plate1), amplitudes(omega, q0, l, &sys.plate2)) else {
                return [0.0; 2];
            };
            let e = (-2.0 * q0).exp();
            let g = |d1: Complex64, d2: Complex64| {
                let x = d1 * d2 * e;
                (q0 * x / (1.0 - x)).im * th
            };
            [g(r1.e, r2.e), g(r1.m, r2.m)]
        },
        inner,
    );
    ([evan.0[0], prop.0[0], evan.0[1], prop.0[1]], prop.1 + evan.1)
}

/// Real-frequency pressure from `q₀ coth Im[X/(1 − X)]`.
pub fn pressure_realfreq_eq2(sys: &PlateSystem, tol: f64) -> Result<PressureResult> {
    sys.validate()?;
    require_lossy(sys)?;
    if sys.plate1.is_vacuum() || sys.plate2.is_vacuum() {
        return Ok(PressureResult::zero());
    }
    let ratio = sys.thermal_ratio();
    let scale = realfreq_scale(sys);
    let w_max = frequency_cutoff(sys, tol)?;
    let inner = realfreq_inner_spec(tol, scale, w_max);
    let (outer, top) = frequency_integral(|w| eq2_integrand(sys, ratio, w, &inner), tol, scale, w_max);
    let tail = top.iter().sum::<f64>().abs();
    let s = -sys.pressure_unit() / (2.0 * PI * PI);
    let b = Breakdown {
        e_evanescent: s * outer.value[0],
        e_propagating: s * outer.value[1],
        m_evanescent: s * outer.value[2],
        m_propagating: s * outer.value[3],
    };
    Ok(PressureResult {
        value: b.total(),
        error_estimate: s.abs() * (outer.error + tail),
        breakdown: b,
        terms: None,
        converged: outer.converged,
    })
}

/// Summand of the rearranged route for one channel: (cross term, |Δ|⁴ term),
/// without the thermal factor.
pub(crate) fn rearranged_terms(d1: Complex64, d2: Complex64, q0: Complex64) -> (f64, f64) {
    let e = (-2.0 * q0).exp();
    let den = (1.0 - e * d1 * d2).norm_sqr();
    let w = q0 * e * d2;
    let cross = (d1.im * w.re + d1.re * w.im) / den;
    let second = if q0.re > 0.0 {
        // e^{−2(q₀+q₀*)} q₀ is real on the evanescent side
        0.0
    } else {
        -d1.norm_sqr() * d2.norm_sqr() * (q0 * (-2.0 * (q0 + q0.conj())).exp()).im / den
    };
    (cross, second)
}

/// Radial integrals of the rearranged integrand at w = ωl/c, as
/// [e first, m first, e second, m second] on the evanescent then propagating side.
#[doc(hidden)]
pub fn eq5_integrand(sys: &PlateSystem, ratio: f64, w: f64, inner: &QuadratureSpec) -> Sample<8> {
    let l = sys.gap;
    let omega = w * C / l;
    let th = thermal_factor(ratio, w);
    let ([prop, evan], _) = radial_split(
        w,
        |q0, _| {
            let (Ok(r1), Ok(r2)) = (amplitudes(omega, q0, l, &sys.plate1), amplitudes(omega, q0, l, &sys.plate2)) else {
                return [0.0; 4];
            };
            let (ce, se) = rearranged_terms(r1.e, r2.e, q0);
            let (cm, sm) = rearranged_terms(r1.m, r2.m, q0);
            [ce * th, cm * th, se * th, sm * th]
        },
        inner,
    );
    let mut v = [0.0; 8];
    v[..4].copy_from_slice(&evan.0);
    v[4..].copy_from_slice(&prop.0);
    (v, prop.1 + evan.1)
}

/// Rearranged-route result with per-term error estimates and the frequency
/// cutoff used.
pub(crate) struct RearrangedParts {
    pub result: PressureResult,
    pub term_errors: (f64, f64),
    pub w_max: f64,
}

pub(crate) fn rearranged_parts(sys: &PlateSystem, tol: f64) -> Result<RearrangedParts> {
    sys.validate()?;
    require_lossy(sys)?;
    if sys.plate1.is_vacuum() || sys.plate2.is_vacuum() {
        return Ok(RearrangedParts {
            result: PressureResult { terms: Some((0.0, 0.0)), ..PressureResult::zero() },
            term_errors: (0.0, 0.0),
            w_max: 0.0,
        });
    }
    let ratio = sys.thermal_ratio();
    let scale = realfreq_scale(sys);
    let w_max = frequency_cutoff(sys, tol)?;
    let inner = realfreq_inner_spec(tol, scale, w_max);
    let (outer, top) = frequency_integral(|w| eq5_integrand(sys, ratio, w, &inner), tol, scale, w_max);
    let tail = top.iter().sum::<f64>().abs();
    let s = -sys.pressure_unit() / (2.0 * PI * PI);
    let v = outer.value.map(|x| x * s);
    let b = Breakdown {
        e_evanescent: v[0] + v[2],
        m_evanescent: v[1] + v[3],
        e_propagating: v[4] + v[6],
        m_propagating: v[5] + v[7],
    };
    let pick = |xs: &[f64; 8], idx: [usize; 4]| idx.iter().map(|&i| xs[i]).sum::<f64>();
    let first = pick(&v, [0, 1, 4, 5]);
    let second = pick(&v, [2, 3, 6, 7]);
    let ce = &outer.component_error;
    let term_errors = (
        s.abs() * (pick(ce, [0, 1, 4, 5]) + pick(&top, [0, 1, 4, 5]).abs()),
        s.abs() * (pick(ce, [2, 3, 6, 7]) + pick(&top, [2, 3, 6, 7]).abs()),
    );
    let result = PressureResult {
        value: b.total(),
        error_estimate: s.abs() * (outer.error + tail),
        breakdown: b,
        terms: Some((first, second)),
        converged: outer.converged,
    };
    Ok(RearrangedParts { result, term_errors, w_max })
}

/// Real-frequency pressure from the rearranged integrand; `terms` holds the
/// cross term and the propagating-only `|Δ|⁴` term separately.
pub fn pressure_realfreq_eq5(sys: &PlateSystem, tol: f64) -> Result<PressureResult> {
    rearranged_parts(sys, tol).map(|p| p.result)
}

fn require_lossy(sys: &PlateSystem) -> Result<()> {
    for m in [&sys.plate1, &sys.plate2] {
        if m.is_ideal_metal() {
            return Err(Error::InvalidSystem(
                "real-frequency routes need dissipative plates; use the Matsubara route for ideal metals".into(),
            ));
        }
    }
    Ok(())
}

/// Imaginary-axis integrand ∫_ζ^∞ q̃² dq̃ Σ_j r₁r₂e^{−2q̃}/(1 − r₁r₂e^{−2q̃}) for one ζ = ξl/c,
/// per channel, with `reflect(ζ, q̃)` giving both plates' (r_e, r_m).
fn matsubara_term<R>(zeta: f64, reflect: R, spec: &QuadratureSpec) -> Sample<2>
where
    R: Fn(f64, f64) -> Option<((f64, f64), (f64, f64))> + Sync,
{
    let spec = spec.clone().with_scale(0.5);
    let r = integrate_semi_infinite_samples(
        |s| {
            let q = zeta + s;
            let Some(((e1, m1), (e2, m2))) = reflect(zeta, q) else {
                return ([0.0; 2], 0.0);
            };
            let decay = (-2.0 * q).exp();
            let g = |a: f64| {
                let x = a * decay;
                q * q * x / (1.0 - x)
            };
            ([g(e1 * e2), g(m1 * m2)], 0.0)
        },
        0.0,
        &spec,
    );
    (r.value, r.error)
}

/// Plate amplitudes at imaginary frequency in gap units; ζ = 0 uses the static limits.
pub(crate) fn imaginary_amplitudes(
    zeta: f64,
    q: f64,
    gap: f64,
    material: &MaterialModel,
) -> Option<(f64, f64)> {
    if zeta == 0.0 {
        Some(static_reflection(q / gap, material))
    } else {
        imaginary_reflection(zeta * C / gap, q / gap, material).ok()
    }
}

/// Matsubara-sum pressure (T > 0) or its ξ-integral limit (T = 0).
pub fn pressure_matsubara(sys: &PlateSystem, tol: f64) -> Result<PressureResult> {
    sys.validate()?;
    if sys.plate1.is_vacuum() || sys.plate2.is_vacuum() {
        return Ok(PressureResult::zero());
    }
    let l = sys.gap;
    let reflect = |zeta: f64, q: f64| {
        Some((imaginary_amplitudes(zeta, q, l, &sys.plate1)?, imaginary_amplitudes(zeta, q, l, &sys.plate2)?))
    };
    let inner = inner_spec(tol);
    let (sum, err, converged, unit) = if sys.temperature == 0.0 {
        let r = integrate_semi_infinite_samples(
            |zeta| matsubara_term(zeta, reflect, &inner),
            0.0,
            &QuadratureSpec::new(tol).with_abs(1e-15 * tol).with_max_panels(400).parallel(true),
        );
        (r.value, r.error, r.converged, sys.pressure_unit() / (2.0 * PI * PI))
    } else {
        let (v, e) = matsubara_sum(sys, tol, |zeta| matsubara_term(zeta, reflect, &inner))?;
        (v, e, true, K_B * sys.temperature / (PI * l.powi(3)))
    };
    let s = -unit;
    let b = Breakdown { e_evanescent: s * sum[0], m_evanescent: s * sum[1], ..Breakdown::default() };
    Ok(PressureResult { value: b.total(), error_estimate: unit * err, breakdown: b, terms: None, converged })
}

const MATSUBARA_BATCH: u64 = 32;
const MATSUBARA_MAX_TERMS: u64 = 4_000_000;

/// Σ' over ζ_n = 2πn k_BT l/(ħc) of `term`, n = 0 weighted ½. Terms are
/// evaluated in fixed batches and reduced in index order.
pub(crate) fn matsubara_sum<const N: usize, F>(sys: &PlateSystem, tol: f64, term: F) -> Result<([f64; N], f64)>
where
    F: Fn(f64) -> Sample<N> + Sync,
{
    let step = 2.0 * PI * K_B * sys.temperature * sys.gap / (HBAR * C);
    let mut sum = [0.0; N];
    let mut err = 0.0;
    let mut n0 = 0u64;
    loop {
        let batch: Vec<Sample<N>> = (n0..n0 + MATSUBARA_BATCH)
            .into_par_iter()
            .map(|n| term(n as f64 * step))
            .collect();
        let mut last = 0.0f64;
        for (i, (v, e)) in batch.iter().enumerate() {
            let weight = if n0 + i as u64 == 0 { 0.5 } else { 1.0 };
            for c in 0..N {
                sum[c] += weight * v[c];
            }
            err += weight * e;
            last = v.iter().map(|x| x.abs()).sum::<f64>();
        }
        n0 += MATSUBARA_BATCH;
        let total: f64 = sum.iter().sum::<f64>().abs();
        // remaining tail is bounded by a geometric series in e^{−2ζ}
        let ratio = (-2.0 * step).exp();
        let tail = if ratio < 1.0 { last * ratio / (1.0 - ratio) } else { f64::INFINITY };
        if (tail <= 1e-2 * tol * total && n0 as f64 * step > 1.0) || (total == 0.0 && last == 0.0 && n0 > 0) {
            return Ok((sum, err + tail));
        }
        if n0 >= MATSUBARA_MAX_TERMS || !total.is_finite() {
            return Err(Error::MatsubaraDivergence { terms: n0 });
        }
    }
}

/// −π²ħc/(240 l⁴): ideal-metal pressure at zero temperature.
pub fn ideal_metal_casimir_pressure(gap: f64) -> f64 {
    -PI * PI * HBAR * C / (240.0 * gap.powi(4))
}

/// −ζ(3) k_BT/(8π l³): high-temperature pressure with one reflecting
/// channel at zero frequency.
pub fn classical_limit_pressure(gap: f64, temperature: f64) -> f64 {
    const ZETA3: f64 = 1.202_056_903_159_594_2;
    -ZETA3 * K_B * temperature / (8.0 * PI * gap.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_plates_have_no_force() {
        let sys = PlateSystem::new(1e-7, 300.0, MaterialModel::vacuum(), MaterialModel::drude(1e16, 1e14));
        for r in [
            pressure_matsubara(&sys, 1e-6).unwrap(),
            pressure_realfreq_eq2(&sys, 1e-6).unwrap(),
            pressure_realfreq_eq5(&sys, 1e-6).unwrap(),
        ] {
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn ideal_metal_zero_temperature() {
        let sys = PlateSystem::symmetric(1e-6, 0.0, MaterialModel::IdealMetal);
        let r = pressure_matsubara(&sys, 1e-8).unwrap();
        let exact = ideal_metal_casimir_pressure(1e-6);
        assert!((r.value / exact - 1.0).abs() < 1e-6, "{} vs {}", r.value, exact);
        assert!((exact + 1.30e-3).abs() < 0.01e-3);
    }

    #[test]
    fn classical_limit() {
        let sys = PlateSystem::symmetric(2e-5, 300.0, MaterialModel::IdealMetal);
        let r = pressure_matsubara(&sys, 1e-8).unwrap();
        let exact = classical_limit_pressure(2e-5, 300.0);
        assert!((r.value / exact - 1.0).abs() < 1e-3, "{} vs {}", r.value, exact);
    }

    #[test]
    fn second_term_vanishes_on_evanescent_side() {
        let d1 = Complex64::new(0.3, 0.2);
        let d2 = Complex64::new(-0.5, 0.4);
        assert_eq!(rearranged_terms(d1, d2, Complex64::new(0.7, 0.0)).1, 0.0);
        // propagating side: −|q₀| weight with the retarded branch
        let u = 0.8;
        let (_, s) = rearranged_terms(d1, d2, Complex64::new(0.0, -u));
        let den = (1.0 - (Complex64::new(0.0, 2.0 * u)).exp() * d1 * d2).norm_sqr();
        let expect = u * d1.norm_sqr() * d2.norm_sqr() / den;
        assert!((s - expect).abs() < 1e-15 * expect);
    }

    #[test]
    fn rejects_bad_geometry() {
        let sys = PlateSystem::symmetric(-1.0, 300.0, MaterialModel::IdealMetal);
        assert!(matches!(pressure_matsubara(&sys, 1e-6), Err(Error::InvalidSystem(_))));
        let sys = PlateSystem::symmetric(1e-6, 300.0, MaterialModel::IdealMetal);
        assert!(pressure_realfreq_eq2(&sys, 1e-6).is_err());
    }
}
