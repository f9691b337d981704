//! Command-line runs: configuration in, CSV out.

pub mod config;
pub mod verify;

pub use config::{parse_config, serialize_config, ConfigError, ConfigErrors, Mode, RunConfig};

use crate::error::Error;
use crate::lifshitz_dynamic::{pressure_dynamic, DynamicSystem};
use crate::materials::{MaterialModel, ParticleModel, Susceptibility};
use crate::lifshitz_static::{pressure_matsubara, pressure_realfreq_eq2, pressure_realfreq_eq5, PlateSystem};
use crate::polder_transition::{cp_force_analytic, cp_force_finite_difference, cp_force_matsubara, ParticleSurfaceSystem};
use config::{Compute, PolderRoute, StaticRoute, SweepVariable};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success,
    Validation,
    Accuracy,
    Verification,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            Self::Success => 0,
            Self::Validation => 1,
            Self::Accuracy => 2,
            Self::Verification => 3,
        }
    }
}

/// Exit status for a library error.
pub fn classify(e: &Error) -> ExitStatus {
    match e {
        Error::AccuracyNotReached { .. } | Error::MatsubaraDivergence { .. } | Error::Optics(_) => ExitStatus::Accuracy,
        Error::Material(_) | Error::InvalidSystem(_) | Error::VelocityGuard { .. } | Error::NotRarified(_) => {
            ExitStatus::Validation
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// CSV (or the verification table).
    pub text: String,
    /// One machine-readable line per problem, for the diagnostic stream.
    pub diagnostics: Vec<String>,
    pub status: ExitStatus,
}

/// Numbers of one output row. `None` marks a column the chosen route does
/// not produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub value: f64,
    pub error: f64,
    pub term1: Option<f64>,
    pub term2: Option<f64>,
    pub electric: f64,
    pub magnetic: f64,
    pub converged: bool,
}

fn plates(cfg: &RunConfig) -> PlateSystem {
    let m = |s: &Option<config::MaterialSpec>| s.as_ref().map(|m| m.model()).unwrap_or_else(MaterialModel::vacuum);
    PlateSystem::new(cfg.gap.unwrap_or(f64::NAN), cfg.temperature, m(&cfg.plate1), m(&cfg.plate2))
}

fn particle_system(cfg: &RunConfig) -> ParticleSurfaceSystem {
    let particle = cfg
        .particle
        .as_ref()
        .map(|p| p.model())
        .unwrap_or_else(|| ParticleModel::electric(Susceptibility::None, 1.0));
    let surface = cfg.surface.as_ref().map(|m| m.model()).unwrap_or_else(MaterialModel::vacuum);
    let mut sys = ParticleSurfaceSystem::new(particle, surface, cfg.height.unwrap_or(f64::NAN), cfg.temperature)
        .with_velocity(cfg.velocity)
        .with_sign(cfg.sign);
    if !cfg.magnetic {
        sys = sys.electric_only();
    }
    sys
}

/// The configuration with one swept value put in place.
fn at_point(cfg: &RunConfig, compute: Compute, variable: SweepVariable, x: f64) -> RunConfig {
    let mut c = cfg.clone();
    match variable {
        SweepVariable::Gap if compute == Compute::Polder => c.height = Some(x),
        SweepVariable::Gap => c.gap = Some(x),
        SweepVariable::Velocity => c.velocity = x,
        SweepVariable::Temperature => c.temperature = x,
    }
    c
}

/// Computes one row.
pub fn compute_row(cfg: &RunConfig, compute: Compute) -> Result<Row, Error> {
    let tol = cfg.tol;
    match compute {
        Compute::Static => {
            let sys = plates(cfg);
            let r = match cfg.static_route {
                StaticRoute::Direct => pressure_realfreq_eq2(&sys, tol)?,
                StaticRoute::Rearranged => pressure_realfreq_eq5(&sys, tol)?,
                StaticRoute::Matsubara => pressure_matsubara(&sys, tol)?,
            };
            Ok(Row {
                value: r.value,
                error: r.error_estimate,
                term1: r.terms.map(|t| t.0),
                term2: r.terms.map(|t| t.1),
                electric: r.breakdown.electric(),
                magnetic: r.breakdown.magnetic(),
                converged: r.converged,
            })
        }
        Compute::Dynamic => {
            let sys = DynamicSystem::new(plates(cfg), cfg.velocity).with_kinematics(cfg.kinematics);
            let r = pressure_dynamic(&sys, tol)?;
            Ok(Row {
                value: r.total,
                error: r.total_error,
                term1: Some(r.term1),
                term2: Some(r.term2),
                electric: r.electric,
                magnetic: r.magnetic,
                converged: r.converged,
            })
        }
        Compute::Polder => {
            let sys = particle_system(cfg);
            match cfg.polder_route {
                PolderRoute::Analytic => {
                    let r = cp_force_analytic(&sys, tol)?;
                    // the second block has no first-order part
                    Ok(Row {
                        value: r.force,
                        error: r.error,
                        term1: Some(r.force),
                        term2: Some(0.0),
                        electric: r.electric,
                        magnetic: r.magnetic,
                        converged: r.converged,
                    })
                }
                PolderRoute::Matsubara => {
                    let r = cp_force_matsubara(&sys, tol)?;
                    Ok(Row {
                        value: r.force,
                        error: r.error,
                        term1: None,
                        term2: None,
                        electric: r.electric,
                        magnetic: r.magnetic,
                        converged: r.converged,
                    })
                }
                PolderRoute::FiniteDifference => {
                    let n1 = cfg.particle.as_ref().and_then(|p| p.density).unwrap_or(f64::NAN);
                    let z = sys.separation;
                    let r = cp_force_finite_difference(&sys, n1, cfg.step * z, tol)?;
                    Ok(Row {
                        value: r.force,
                        error: r.error,
                        term1: Some(r.term1),
                        term2: Some(r.term2),
                        electric: r.electric,
                        magnetic: r.magnetic,
                        converged: r.converged,
                    })
                }
            }
        }
    }
}

/// 12 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn header(compute: Compute, swept: Option<(SweepVariable, Compute)>) -> String {
    let unit = if compute == Compute::Polder { "N" } else { "Pa" };
    let value = if compute == Compute::Polder { "force" } else { "pressure" };
    let mut cols = Vec::new();
    if let Some((v, c)) = swept {
        cols.push(match v {
            SweepVariable::Gap if c == Compute::Polder => "z_m".to_string(),
            SweepVariable::Gap => "l_m".to_string(),
            SweepVariable::Velocity => "V_m_per_s".to_string(),
            SweepVariable::Temperature => "T_K".to_string(),
        });
    }
    cols.push(format!("{value}_{unit}"));
    for c in ["error", "term1", "term2", "electric", "magnetic"] {
        cols.push(format!("{c}_{unit}"));
    }
    cols.push("status".into());
    cols.join(",")
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

/// Formats one result as CSV fields; non-finite numbers turn the row into
/// an error row.
fn row_fields(result: &Result<Row, Error>) -> (Vec<String>, String, Option<(ExitStatus, String)>) {
    match result {
        Ok(r) => {
            let nums = [Some(r.value), Some(r.error), r.term1, r.term2, Some(r.electric), Some(r.magnetic)];
            if nums.iter().flatten().all(|&x| finite(x)) {
                let fields = nums.iter().map(|x| x.map(format_number).unwrap_or_default()).collect();
                if r.converged {
                    (fields, "ok".into(), None)
                } else {
                    let msg = format!("accuracy not reached: error estimate {:e}", r.error);
                    (fields, "accuracy_not_reached".into(), Some((ExitStatus::Accuracy, msg)))
                }
            } else {
                let msg = "non-finite result".to_string();
                (vec![String::new(); 6], format!("error: {msg}"), Some((ExitStatus::Accuracy, msg)))
            }
        }
        Err(e) => (vec![String::new(); 6], format!("error: {e}"), Some((classify(e), e.to_string()))),
    }
}

fn kind(status: ExitStatus) -> &'static str {
    match status {
        ExitStatus::Success => "ok",
        ExitStatus::Validation => "validation",
        ExitStatus::Accuracy => "accuracy",
        ExitStatus::Verification => "verification",
    }
}

/// Runs a validated configuration.
pub fn run(cfg: &RunConfig) -> RunOutput {
    if cfg.mode == Mode::Verify {
        let checks = verify::run_suite();
        let status = if checks.iter().all(|c| c.passed()) { ExitStatus::Success } else { ExitStatus::Verification };
        let diagnostics = checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| format!("error,kind=verification,check={},measured={:e},expected={:e}", c.name, c.measured, c.expected))
            .collect();
        return RunOutput { text: verify::table(&checks), diagnostics, status };
    }
    let Some(compute) = cfg.compute() else {
        return RunOutput {
            text: String::new(),
            diagnostics: vec!["error,kind=validation,message=no computation selected".into()],
            status: ExitStatus::Validation,
        };
    };
    let sweep = cfg.sweep.as_ref().filter(|_| cfg.mode == Mode::Sweep);
    let points: Vec<Option<f64>> = match sweep {
        Some(s) => s.points().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let results: Vec<Result<Row, Error>> = points
        .par_iter()
        .map(|x| match (x, sweep) {
            (Some(x), Some(s)) => compute_row(&at_point(cfg, compute, s.variable, *x), compute),
            _ => compute_row(cfg, compute),
        })
        .collect();
    let mut text = header(compute, sweep.map(|s| (s.variable, compute)));
    text.push('\n');
    let mut status = ExitStatus::Success;
    let mut diagnostics = Vec::new();
    for (i, (x, result)) in points.iter().zip(&results).enumerate() {
        let (fields, row_status, problem) = row_fields(result);
        let mut cells = Vec::new();
        if let Some(x) = x {
            cells.push(format_number(*x));
        }
        cells.extend(fields);
        cells.push(quote(&row_status));
        let _ = writeln!(text, "{}", cells.join(","));
        if let Some((s, msg)) = problem {
            // validation problems outrank accuracy ones
            status = match (status, s) {
                (ExitStatus::Validation, _) | (_, ExitStatus::Validation) => ExitStatus::Validation,
                _ => s,
            };
            diagnostics.push(format!("error,kind={},row={},message={}", kind(s), i + 1, quote(&msg)));
        }
    }
    RunOutput { text, diagnostics, status }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(format_number(-1.3e-3), "-1.30000000000e-3");
        assert_eq!(format_number(-0.0), "0.00000000000e0");
        assert_eq!(format_number(123456789012345.0), "1.23456789012e14");
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(quote("ok"), "ok");
    }

    #[test]
    fn sweep_writes_one_row_per_point() {
        let text = "mode = sweep\n[geometry]\nT = 0\n[plate1]\nkind = ideal_metal\n[plate2]\nkind = ideal_metal\n\
            [static]\nroute = matsubara\n[sweep]\nvariable = l\nfrom = 1e-7\nto = 1e-6\ncount = 10\nspacing = log\ncompute = static\n";
        let out = run(&parse_config(text).unwrap());
        assert_eq!(out.status, ExitStatus::Success, "{:?}", out.diagnostics);
        let lines: Vec<&str> = out.text.lines().collect();
        assert_eq!(lines.len(), 11);
        assert!(lines[0].starts_with("l_m,pressure_Pa,error_Pa"));
        assert!(lines[1].starts_with("1.00000000000e-7,"));
    }

    #[test]
    fn ideal_metal_static_run_matches_closed_form() {
        let text = "mode = static\n[geometry]\nl = 1e-6\nT = 0\n[plate1]\nkind = ideal_metal\n[plate2]\nkind = ideal_metal\n[static]\nroute = matsubara\n";
        let out = run(&parse_config(text).unwrap());
        assert_eq!(out.status, ExitStatus::Success);
        let row = out.text.lines().nth(1).unwrap();
        let value: f64 = row.split(',').next().unwrap().parse().unwrap();
        let exact = crate::lifshitz_static::ideal_metal_casimir_pressure(1e-6);
        assert!((value / exact - 1.0).abs() < 5e-3);
    }

    #[test]
    fn failures_become_error_rows() {
        // real-frequency routes refuse ideal metals
        let text = "mode = static\n[geometry]\nl = 1e-6\n[plate1]\nkind = ideal_metal\n[plate2]\nkind = ideal_metal\n";
        let out = run(&parse_config(text).unwrap());
        assert_eq!(out.status, ExitStatus::Validation);
        let row = out.text.lines().nth(1).unwrap();
        assert!(row.starts_with(",,,,,,"), "{row}");
        assert!(row.contains("error:"));
        assert_eq!(out.diagnostics.len(), 1);
        assert!(out.diagnostics[0].starts_with("error,kind=validation,row=1"));
    }
}
