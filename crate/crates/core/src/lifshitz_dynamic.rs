//! Normal Casimir pressure between plates in nonrelativistic relative motion.
//!
//! Plate 1 slides along x with speed V. Its amplitudes are taken at the
//! Doppler-shifted frequency ω⁺ = ω + k_xV, those of plate 2 at ω. By
//! default both plates share q₀ = (k² − ω²/c²)^{1/2}; see [`Kinematics`].
//! The result
//! splits into a first block (cross term with the two thermal factors
//! coth(ħω⁺/2k_BT) and coth(ħω/2k_BT)) and a second, propagating-only block
//! weighted by |q₀|.
//!
//! The pressure is assembled as the V = 0 value of the rearranged static
//! route plus the integral of the pointwise change of both blocks. The change
//! is integrated over the full (k_x, k_y) plane with k_x and −k_x evaluated
//! side by side, which keeps the V-odd part from swamping the small even
//! remainder.

use crate::constants::C;
use crate::error::{Error, Result};
use crate::lifshitz_static::{amplitudes, rearranged_parts, taper, thermal_factor, PlateSystem};
use crate::optics::{OpticsError, SpectralPoint};
use crate::quadrature::{integrate_samples, integrate_semi_infinite_samples, IntegralEstimate, QuadratureSpec, Sample};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default guard on |V|/c.
pub const DEFAULT_SPEED_LIMIT: f64 = 0.01;

/// Wavenumbers used in plate 1's amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kinematics {
    /// The common q₀, which is the same in plate 1's rest frame, with
    /// q₁ = (q₀² − ω⁺²(ε₁μ₁ − 1)/c²)^{1/2} and ε₁, μ₁ at ω⁺.
    #[default]
    Shared,
    /// q₀ and q₁ of plate 1 from k at ω⁺, q₀(ω⁺) = (k² − ω⁺²/c²)^{1/2}.
    /// Plate 1's light cone moves to k = |ω⁺|/c.
    ShiftedCone,
}

/// Two plates with plate 1 moving at velocity V along x.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicSystem {
    pub base: PlateSystem,
    /// m/s, either sign.
    pub velocity: f64,
    /// Largest accepted |V|/c.
    pub speed_limit: f64,
    pub kinematics: Kinematics,
}

impl DynamicSystem {
    pub fn new(base: PlateSystem, velocity: f64) -> Self {
        Self { base, velocity, speed_limit: DEFAULT_SPEED_LIMIT, kinematics: Kinematics::default() }
    }

    pub fn with_kinematics(mut self, kinematics: Kinematics) -> Self {
        self.kinematics = kinematics;
        self
    }

    pub fn with_speed_limit(mut self, limit: f64) -> Self {
        self.speed_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !self.velocity.is_finite() {
            return Err(Error::InvalidSystem(format!("velocity must be finite, got {}", self.velocity)));
        }
        let limit = self.speed_limit * C;
        if self.velocity.abs() >= limit {
            return Err(Error::VelocityGuard { speed: self.velocity.abs(), limit });
        }
        Ok(())
    }

    /// V/c.
    pub fn beta(&self) -> f64 {
        self.velocity / C
    }
}

/// Normal pressure between moving plates, Pa; negative for attraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicPressureResult {
    pub total: f64,
    pub term1: f64,
    pub term2: f64,
    pub total_error: f64,
    pub term1_error: f64,
    pub term2_error: f64,
    /// Electric and magnetic channel totals.
    pub electric: f64,
    pub magnetic: f64,
    /// Velocity-induced parts of (term1, term2), already included above.
    pub shift: (f64, f64),
    /// Error estimates of `shift`.
    pub shift_error: (f64, f64),
    /// Upper end of the frequency integral, rad/s.
    pub frequency_cutoff: f64,
    pub converged: bool,
}

impl DynamicPressureResult {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::AccuracyNotReached { value: self.total, error: self.total_error })
        }
    }
}

/// q̃ from its square, on the vacuum branch.
fn q_from_square(q2: f64) -> Complex64 {
    if q2 >= 0.0 {
        Complex64::new(q2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-q2).sqrt())
    }
}

/// Both blocks at (w, κ_x, κ_y) in gap units, per channel:
/// [block1_e, block1_m, block2_e, block2_m].
pub(crate) fn blocks(sys: &DynamicSystem, w: f64, kx: f64, ky: f64) -> std::result::Result<[f64; 4], OpticsError> {
    let kappa = kx.hypot(ky);
    blocks_with_q(sys, w, (kappa - w) * (kappa + w), kx)
}

/// As [`blocks`], with q̃² at (w, κ) supplied by the caller so that points
/// next to the light cone keep their distance from it.
fn blocks_with_q(sys: &DynamicSystem, w: f64, q2: f64, kx: f64) -> std::result::Result<[f64; 4], OpticsError> {
    let base = &sys.base;
    let l = base.gap;
    let ratio = base.thermal_ratio();
    let shift = sys.beta() * kx;
    let mut wp = w + shift;
    if wp == 0.0 {
        // Im Δ₁(ω⁺) coth(ħω⁺/2k_BT) has a finite limit on this line
        wp = if ratio.is_finite() { 1e-9 / ratio } else { 1e-12 * w.max(f64::MIN_POSITIVE) };
    }
    let q = q_from_square(q2);
    let decay = (-2.0 * q).exp();
    if decay == Complex64::new(0.0, 0.0) {
        return Ok([0.0; 4]);
    }
    let r2 = amplitudes(w * C / l, q, l, &base.plate2)?;
    let r1 = match sys.kinematics {
        Kinematics::Shared => amplitudes(wp * C / l, q, l, &base.plate1)?,
        _ if wp == w => amplitudes(w * C / l, q, l, &base.plate1)?,
        Kinematics::ShiftedCone => {
            // κ² − w⁺² = q̃² − (w⁺ − w)(w⁺ + w)
            let q1 = q_from_square(q2 - (wp - w) * (wp + w));
            amplitudes(wp * C / l, q1, l, &base.plate1)?
        }
    };
    let th = thermal_factor(ratio, w);
    let thp = thermal_factor(ratio, wp);
    let propagating = q2 < 0.0;
    let one = |d1: Complex64, d2: Complex64| {
        let den = (1.0 - decay * d1 * d2).norm_sqr();
        let wv = q * decay * d2;
        let b1 = (d1.im * wv.re * thp + d1.re * wv.im * th) / den;
        let b2 = if propagating { q.im.abs() * d1.norm_sqr() * d2.norm_sqr() * th / den } else { 0.0 };
        (b1, b2)
    };
    let (e1, e2) = one(r1.e, r2.e);
    let (m1, m2) = one(r1.m, r2.m);
    Ok([e1, m1, e2, m2])
}

/// (first block, second block) summed over j ∈ {e, m} at any spectral
/// point, as integrated by [`pressure_dynamic`], 1/m. The second block is
/// zero outside the light cone.
pub fn integrand_blocks(p: SpectralPoint, sys: &DynamicSystem) -> Result<(f64, f64)> {
    let l = sys.base.gap;
    let b = blocks(sys, p.omega * l / C, p.kx * l, p.ky * l)?;
    Ok(((b[0] + b[1]) / l, (b[2] + b[3]) / l))
}

/// First-block summand over j ∈ {e, m} at a spectral point, 1/m.
pub fn integrand_block1(p: SpectralPoint, sys: &DynamicSystem) -> Result<f64> {
    let l = sys.base.gap;
    let b = blocks(sys, p.omega * l / C, p.kx * l, p.ky * l)?;
    Ok((b[0] + b[1]) / l)
}

/// Second-block summand over j ∈ {e, m} at a propagating spectral point,
/// including the |q₀| weight, 1/m.
pub fn integrand_block2(p: SpectralPoint, sys: &DynamicSystem) -> Result<f64> {
    if !p.propagating() {
        return Err(Error::Optics(OpticsError::LightCone));
    }
    let l = sys.base.gap;
    let b = blocks(sys, p.omega * l / C, p.kx * l, p.ky * l)?;
    Ok((b[2] + b[3]) / l)
}

/// f(κ cos φ) + f(−κ cos φ) − 2f₀(κ cos φ) at q̃² = `q2`, where f₀ is the
/// same integrand at rest, times `jacobian`. The error part is the rounding
/// level of the differences.
fn paired_change<const N: usize, F>(f: &F, w: f64, q2: f64, c: f64, jacobian: f64) -> Sample<N>
where
    F: Fn(f64, f64, f64, bool) -> Option<[f64; N]>,
{
    let kx = (q2 + w * w).sqrt() * c;
    let (Some(a), Some(b), Some(z)) = (f(w, q2, kx, true), f(w, q2, -kx, true), f(w, q2, kx, false)) else {
        return ([0.0; N], 0.0);
    };
    let mut out = [0.0; N];
    let mut size = 0.0;
    for i in 0..N {
        out[i] = jacobian * ((a[i] + b[i]) - 2.0 * z[i]);
        size += a[i].abs() + b[i].abs() + 2.0 * z[i].abs();
    }
    (out, 64.0 * f64::EPSILON * size * jacobian.abs())
}

/// Velocity-induced change of a plane integral ∫₀^{π/2}dφ ∫κdκ at one w, to
/// relative tolerance `rel` or absolute target `abs`. `f(w, q̃², κ_x, moving)`
/// evaluates the integrand in gap units for the moving system or the system
/// at rest.
///
/// The radial integral is split at the light cone of the resting side: u = |q̃|
/// inside, q̃ outside. The moving side's light cones at κ = w/(1 ± β cos φ)
/// and the ω⁺ = 0 circle κ = w/(β cos φ) become marks.
pub(crate) fn plane_shift<const N: usize, F>(f: &F, beta: f64, w: f64, rel: f64, abs: f64) -> Sample<N>
where
    F: Fn(f64, f64, f64, bool) -> Option<[f64; N]> + Sync,
{
    let beta = beta.abs();
    let radial = QuadratureSpec::new(0.1 * rel).with_abs(0.1 * abs).with_max_panels(400);
    let angular = QuadratureSpec::new(rel).with_abs(0.5 * abs).with_max_panels(100);
    let r = integrate_samples(
        |phi| {
            let c = phi.cos();
            let bc = beta * c;
            let mut inside: Vec<f64> =
                (1..).map(|i| 0.5 * PI * i as f64).take_while(|&u| u < w.min(40.0 * PI)).collect();
            let k_in = w / (1.0 + bc);
            inside.push(((w - k_in) * (w + k_in)).sqrt());
            let mut outside = Vec::new();
            if bc < 1.0 {
                let k_out = w / (1.0 - bc);
                outside.push(((k_out - w) * (k_out + w)).sqrt());
            }
            if bc > 0.0 {
                let k_zero = w / bc;
                outside.push(((k_zero - w) * (k_zero + w)).sqrt());
            }
            let prop = integrate_samples(
                |u| paired_change(f, w, -u * u, c, u),
                0.0,
                w,
                &radial.clone().with_breakpoints(inside),
            );
            let evan = integrate_semi_infinite_samples(
                |q| paired_change(f, w, q * q, c, q),
                0.0,
                &radial.clone().with_breakpoints(outside).with_scale(0.5),
            );
            let mut v = prop.value;
            for (x, y) in v.iter_mut().zip(evan.value) {
                *x += y;
            }
            (v, prop.error + evan.error)
        },
        0.0,
        0.5 * PI,
        &angular,
    );
    (r.value, r.error)
}

/// Absolute target of the plane integral at w. Half of the budget is spread
/// evenly over [0, w_max], the other half evenly in ln w over twelve decades
/// below w_max, so that the many samples at small w are not held to the
/// accuracy needed where the w-panels are wide.
fn inner_abs(abs: f64, w: f64, w_max: f64) -> f64 {
    let decades = 12.0 * std::f64::consts::LN_10;
    let floor = w_max * 1e-12;
    0.1 * abs * (1.0 / w_max.max(1.0)).max(1.0 / (decades * w.max(floor)))
}

/// ∫₀^{w_max} dw of [`plane_shift`], faded out like the static frequency
/// integral so that static part plus shift is one windowed integral.
///
/// The pointwise changes cancel far below their own size, so targets are
/// absolute: a coarse pass at 5% of `static_size` sizes the shift, and
/// `target(coarse)` sets the final absolute target.
pub(crate) fn frequency_shift<const N: usize, F, T>(
    f: &F,
    beta: f64,
    w_max: f64,
    static_size: f64,
    target: T,
) -> IntegralEstimate<N>
where
    F: Fn(f64, f64, f64, bool) -> Option<[f64; N]> + Sync,
    T: Fn(&[f64; N]) -> f64,
{
    let beta = beta.abs();
    let mut marks: Vec<f64> = (0..8).map(|i| w_max * 10f64.powi(-i)).collect();
    marks.extend([1e-4, 1e-3, 1e-2, 0.1 * beta, beta, 10.0 * beta, 0.75 * w_max]);
    let spec = QuadratureSpec::new(1e-12).with_breakpoints(marks).with_max_panels(400).parallel(true);
    let run = |abs: f64, local_rel: f64| {
        integrate_samples(
            |w| {
                let g = taper(w, 0.75 * w_max, w_max);
                let (v, e) = plane_shift(f, beta, w, local_rel, inner_abs(abs, w, w_max));
                (v.map(|x| x * g), e * g)
            },
            0.0,
            w_max,
            &spec.clone().with_abs(abs),
        )
    };
    let coarse = run(0.05 * static_size, 1e-2);
    // the coarse values can be far off, so the target is refined until it
    // agrees with the values it produced
    let mut abs = target(&coarse.value);
    let mut r = run(abs, 1e-12);
    for _ in 0..2 {
        let next = target(&r.value);
        if next >= 0.5 * abs {
            break;
        }
        abs = next;
        r = run(abs, 1e-12);
    }
    r
}

/// Normal pressure between plates in relative motion, at relative tolerance `tol`.
/// The velocity-induced parts of term1 and term2 are resolved to `tol` of
/// their own size.
pub fn pressure_dynamic(sys: &DynamicSystem, tol: f64) -> Result<DynamicPressureResult> {
    dynamic(sys, tol, true)
}

/// As [`pressure_dynamic`], with only the total resolved to `tol`.
pub(crate) fn pressure_dynamic_total(sys: &DynamicSystem, tol: f64) -> Result<DynamicPressureResult> {
    dynamic(sys, tol, false)
}

fn dynamic(sys: &DynamicSystem, tol: f64, resolve_terms: bool) -> Result<DynamicPressureResult> {
    sys.validate()?;
    let base = &sys.base;
    let parts = rearranged_parts(base, tol)?;
    let (first, second) = parts.result.terms.unwrap_or((0.0, 0.0));
    let mut shift = (0.0, 0.0);
    let mut channels = (parts.result.breakdown.electric(), parts.result.breakdown.magnetic());
    let mut shift_error = (0.0, 0.0);
    let mut total_error = parts.result.error_estimate;
    let mut converged = parts.result.converged;
    if sys.velocity != 0.0 && parts.w_max > 0.0 {
        let rest = DynamicSystem { velocity: 0.0, ..sys.clone() };
        let f = |w: f64, q2: f64, kx: f64, moving: bool| {
            blocks_with_q(if moving { sys } else { &rest }, w, q2, kx).ok()
        };
        // ∫d²κ = 2 ∫₀^π dφ ∫κdκ by k_y symmetry; φ and π − φ are paired
        let s = -2.0 * base.pressure_unit() / (4.0 * PI.powi(3));
        let p_static = parts.result.value.abs() / s.abs();
        // resolve the larger of the net change and the first-block change,
        // the latter capped at the static value
        let r = frequency_shift(&f, sys.beta(), parts.w_max, p_static, |v| {
            let net = (v[0] + v[1] + v[2] + v[3]).abs();
            let first_block = if resolve_terms { (v[0] + v[1]).abs() } else { p_static };
            0.5 * tol * net.max(first_block.min(p_static))
        });
        shift = (s * (r.value[0] + r.value[1]), s * (r.value[2] + r.value[3]));
        channels.0 += s * (r.value[0] + r.value[2]);
        channels.1 += s * (r.value[1] + r.value[3]);
        let ce = r.component_error;
        shift_error = (s.abs() * (ce[0] + ce[1]), s.abs() * (ce[2] + ce[3]));
        total_error += s.abs() * r.error;
        // the block shifts can sit below the rounding level of the blocks
        // themselves; the total only needs its own tolerance
        converged &= r.converged || s.abs() * r.error <= 0.5 * tol * parts.result.value.abs();
    }
    let term1 = first + shift.0;
    let term2 = second + shift.1;
    Ok(DynamicPressureResult {
        total: parts.result.value + (shift.0 + shift.1),
        term1,
        term2,
        total_error,
        term1_error: parts.term_errors.0 + shift_error.0,
        term2_error: parts.term_errors.1 + shift_error.1,
        electric: channels.0,
        magnetic: channels.1,
        shift,
        shift_error,
        frequency_cutoff: parts.w_max * C / base.gap,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifshitz_static::pressure_realfreq_eq5;
    use crate::materials::{MaterialModel, Susceptibility};
    use crate::optics::{loop_function, reflection};
    use crate::lifshitz_static::thermal_factor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system(velocity: f64) -> DynamicSystem {
        let plate2 = MaterialModel::dielectric(Susceptibility::oscillator(2.5, 4e15, 2e14));
        DynamicSystem::new(PlateSystem::new(2e-7, 300.0, MaterialModel::drude(1.37e16, 5.3e13), plate2), velocity)
    }

    fn random_point(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
        let w = 10f64.powf(rng.gen_range(-2.0..1.5));
        let k = w * rng.gen_range(0.01..5.0);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        (w, k * phi.cos(), k * phi.sin())
    }

    #[test]
    fn at_rest_blocks_sum_to_loop_function_form() {
        // block1 + block2 = Im[q₀ L_e + q₀ L_m] coth(ħω/2k_BT) pointwise
        let sys = system(0.0);
        let l = sys.base.gap;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let (w, kx, ky) = random_point(&mut rng);
            let p = SpectralPoint::new(w * C / l, kx / l, ky / l);
            let r1 = reflection(p, &sys.base.plate1).unwrap();
            let r2 = reflection(p, &sys.base.plate2).unwrap();
            let q0 = r1.q0;
            let le = loop_function(r1.e, r2.e, q0, l).unwrap();
            let lm = loop_function(r1.m, r2.m, q0, l).unwrap();
            let th = thermal_factor(sys.base.thermal_ratio(), w);
            let expected = (q0 * (le + lm)).im * th;
            let b1 = integrand_block1(p, &sys).unwrap();
            let b2 = if p.propagating() { integrand_block2(p, &sys).unwrap() } else { 0.0 };
            let got = b1 + b2;
            let scale = (q0.norm() * (le.norm() + lm.norm()) * th).max(1e-300);
            assert!((got - expected).abs() <= 1e-10 * scale, "w={w} k=({kx},{ky}): {got} vs {expected}");
        }
    }

    #[test]
    fn joint_flip_of_kx_and_velocity_is_exact() {
        let (a, b) = (system(3e5), system(-3e5));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let (w, kx, ky) = random_point(&mut rng);
            assert_eq!(blocks(&a, w, kx, ky).unwrap(), blocks(&b, w, -kx, ky).unwrap());
        }
    }

    #[test]
    fn second_block_vanishes_outside_light_cone() {
        let sys = system(3e6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let w = 10f64.powf(rng.gen_range(-3.0..2.0));
            let k = w * (1.0 + 10f64.powf(rng.gen_range(-9.0..2.0)));
            let b = blocks(&sys, w, k, 0.0).unwrap();
            assert_eq!((b[2], b[3]), (0.0, 0.0));
            let l = sys.base.gap;
            let p = SpectralPoint::radial(w * C / l, k / l);
            assert!(integrand_block2(p, &sys).is_err());
        }
    }

    #[test]
    fn doppler_zero_line_is_the_limit_of_its_neighbourhood() {
        let sys = system(3e6);
        let beta = sys.beta();
        let (w, ky) = (1e-3, 0.4);
        let kx0 = -w / beta;
        let at = blocks(&sys, w, kx0, ky).unwrap();
        let near: Vec<[f64; 4]> =
            [1e-6, -1e-6].iter().map(|d| blocks(&sys, w, kx0 * (1.0 + d), ky).unwrap()).collect();
        for i in 0..2 {
            let mean = 0.5 * (near[0][i] + near[1][i]);
            assert!(at[i].is_finite());
            assert!((at[i] - mean).abs() <= 1e-4 * mean.abs().max(1e-300), "{i}: {} vs {mean}", at[i]);
        }
    }

    #[test]
    fn velocity_change_per_frequency_is_quadratic() {
        let sys = DynamicSystem::new(PlateSystem::symmetric(1e-6, 300.0, MaterialModel::drude(1e15, 1e14)), 0.0);
        let change = |beta: f64| {
            let moving = DynamicSystem { velocity: beta * C, ..sys.clone() };
            let f = |w: f64, q2: f64, kx: f64, m: bool| blocks_with_q(if m { &moving } else { &sys }, w, q2, kx).ok();
            let (v, _) = plane_shift(&f, beta, 2.0, 1e-8, 0.0);
            v.iter().sum::<f64>()
        };
        let (a, b) = (change(1e-5), change(1e-4));
        assert!((b / a / 100.0 - 1.0).abs() < 1e-2, "{a} {b}");
    }

    #[test]
    fn shifted_cone_blocks_are_not_quadratic_near_the_light_cone() {
        // with plate-frame wavenumbers the light cone of plate 1 moves
        // with V and single blocks change faster than V²
        let base = PlateSystem::symmetric(1e-6, 300.0, MaterialModel::drude(1e15, 1e14));
        let rest = DynamicSystem::new(base.clone(), 0.0);
        let (w, q2, kx) = (2.0, -1e-7, 2.0);
        let change = |beta: f64, k: Kinematics| {
            let moving = DynamicSystem::new(base.clone(), beta * C).with_kinematics(k);
            let a = blocks_with_q(&moving, w, q2, kx).unwrap();
            let b = blocks_with_q(&rest, w, q2, kx).unwrap();
            (a[0] - b[0]).abs()
        };
        let shared = change(1e-6, Kinematics::Shared) / change(1e-7, Kinematics::Shared);
        let frame = change(1e-6, Kinematics::ShiftedCone) / change(1e-7, Kinematics::ShiftedCone);
        assert!((shared / 10.0 - 1.0).abs() < 0.05, "{shared}");
        assert!(frame < 5.0, "{frame}");
    }

    #[test]
    fn zero_velocity_reproduces_rearranged_route() {
        let sys = system(0.0);
        let d = pressure_dynamic(&sys, 1e-3).unwrap();
        let s = pressure_realfreq_eq5(&sys.base, 1e-3).unwrap();
        assert_eq!(d.total, s.value);
        assert_eq!(d.shift, (0.0, 0.0));
        let (t1, t2) = s.terms.unwrap();
        assert_eq!((d.term1, d.term2), (t1, t2));
    }

    #[test]
    fn velocity_guard() {
        let sys = system(0.02 * C);
        assert!(matches!(pressure_dynamic(&sys, 1e-3), Err(Error::VelocityGuard { .. })));
        assert!(pressure_dynamic(&DynamicSystem { velocity: f64::NAN, ..system(0.0) }, 1e-3).is_err());
    }
}
