//! Run configuration: a flat `key = value` format with `[section]` headers.
//!
//! ```text
//! mode = sweep            # static | dynamic | polder | sweep | verify
//! tol = 1e-3
//!
//! [geometry]
//! l = 1e-6                # gap between the plates, m
//! T = 300                 # K
//! V = 0                   # velocity of plate 1 (or the particle) along x, m/s
//!
//! [plate1]
//! kind = drude            # vacuum | ideal_metal | drude | plasma | dielectric | lorentz
//! plasma = 1.37e16        # rad/s
//! damping = 5.3e13        # rad/s
//!
//! [plate2]
//! kind = drude
//! plasma = 1.37e16
//! damping = 5.3e13
//!
//! [sweep]
//! variable = l            # l | V | T
//! from = 1e-7
//! to = 1e-6
//! count = 10
//! spacing = log           # log | linear
//! compute = dynamic       # static | dynamic | polder
//! ```
//!
//! Casimir-Polder runs use `z` in `[geometry]` and the `[surface]` and
//! `[particle]` sections. Polarizabilities are Gaussian volumes in m³
//! (ε − 1 = 4πnα; multiply by 4πε₀ for SI C·m²/V). `#` starts a comment.

use crate::constants::C;
use crate::lifshitz_dynamic::{Kinematics, DEFAULT_SPEED_LIMIT};
use crate::materials::{MaterialModel, Oscillator, ParticleModel, Susceptibility};
use crate::polder_transition::TransitionSign;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Static,
    Dynamic,
    Polder,
    Sweep,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticRoute {
    /// Eq. (2) style direct real-frequency integral.
    Direct,
    /// Rearranged real-frequency integral with the two terms separated.
    Rearranged,
    Matsubara,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolderRoute {
    Analytic,
    FiniteDifference,
    Matsubara,
}

/// What a sweep computes at each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compute {
    Static,
    Dynamic,
    Polder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Gap,
    Velocity,
    Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialSpec {
    Vacuum,
    IdealMetal,
    Drude { plasma: f64, damping: f64 },
    Plasma { plasma: f64 },
    /// Constant ε rolled off above `cutoff`.
    Dielectric { eps: f64, cutoff: f64 },
    /// ε = 1 + Σ oscillators.
    Lorentz(Vec<Oscillator>),
}

impl MaterialSpec {
    pub fn model(&self) -> MaterialModel {
        match self {
            Self::Vacuum => MaterialModel::vacuum(),
            Self::IdealMetal => MaterialModel::IdealMetal,
            Self::Drude { plasma, damping } => MaterialModel::drude(*plasma, *damping),
            Self::Plasma { plasma } => MaterialModel::plasma(*plasma),
            Self::Dielectric { eps, cutoff } => {
                MaterialModel::dielectric(Susceptibility::constant(eps - 1.0, Some(*cutoff)))
            }
            Self::Lorentz(osc) => MaterialModel::dielectric(Susceptibility::Lorentz(osc.clone())),
        }
    }
}

/// One polarizability channel, Gaussian volume units (m³).
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizabilitySpec {
    None,
    Oscillator { alpha: f64, resonance: f64, damping: f64 },
    Constant { alpha: f64, cutoff: Option<f64> },
}

impl PolarizabilitySpec {
    fn susceptibility(&self) -> Susceptibility {
        match self {
            Self::None => Susceptibility::None,
            Self::Oscillator { alpha, resonance, damping } => Susceptibility::oscillator(*alpha, *resonance, *damping),
            Self::Constant { alpha, cutoff } => Susceptibility::constant(*alpha, *cutoff),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpec {
    pub electric: PolarizabilitySpec,
    pub magnetic: PolarizabilitySpec,
    /// Number density of the dilute plate in the finite-difference route, 1/m³.
    pub density: Option<f64>,
}

impl ParticleSpec {
    pub fn model(&self) -> ParticleModel {
        ParticleModel {
            electric: self.electric.susceptibility(),
            magnetic: self.magnetic.susceptibility(),
            density: self.density.unwrap_or(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub from: f64,
    pub to: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub compute: Compute,
}

impl SweepSpec {
    /// The swept values, endpoints included.
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.to;
                }
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.from + t * (self.to - self.from),
                    Spacing::Log => self.from * (self.to / self.from).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Relative tolerance.
    pub tol: f64,
    pub out: Option<String>,
    /// Plate gap l, m.
    pub gap: Option<f64>,
    /// Particle height z, m.
    pub height: Option<f64>,
    /// K.
    pub temperature: f64,
    /// m/s.
    pub velocity: f64,
    pub plate1: Option<MaterialSpec>,
    pub plate2: Option<MaterialSpec>,
    pub surface: Option<MaterialSpec>,
    pub particle: Option<ParticleSpec>,
    pub static_route: StaticRoute,
    pub kinematics: Kinematics,
    pub polder_route: PolderRoute,
    pub sign: TransitionSign,
    /// Finite-difference step as a fraction of z.
    pub step: f64,
    pub magnetic: bool,
    pub sweep: Option<SweepSpec>,
}

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_TEMPERATURE: f64 = 300.0;
pub const DEFAULT_STEP: f64 = 5e-3;

impl RunConfig {
    /// A configuration with every default filled and nothing else.
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            tol: DEFAULT_TOL,
            out: None,
            gap: None,
            height: None,
            temperature: DEFAULT_TEMPERATURE,
            velocity: 0.0,
            plate1: None,
            plate2: None,
            surface: None,
            particle: None,
            static_route: StaticRoute::Rearranged,
            kinematics: Kinematics::Shared,
            polder_route: PolderRoute::Analytic,
            sign: TransitionSign::Attractive,
            step: DEFAULT_STEP,
            magnetic: true,
            sweep: None,
        }
    }

    /// What each output row computes.
    pub fn compute(&self) -> Option<Compute> {
        match self.mode {
            Mode::Static => Some(Compute::Static),
            Mode::Dynamic => Some(Compute::Dynamic),
            Mode::Polder => Some(Compute::Polder),
            Mode::Sweep => self.sweep.as_ref().map(|s| s.compute),
            Mode::Verify => None,
        }
    }

    /// Checks that depend on the mode rather than on single keys. Returns
    /// messages without line numbers.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let Some(compute) = self.compute() else {
            if self.mode == Mode::Sweep {
                out.push("mode sweep needs a [sweep] section".into());
            }
            return out;
        };
        let swept = self.sweep.as_ref().filter(|_| self.mode == Mode::Sweep).map(|s| s.variable);
        let need = |out: &mut Vec<String>, present: bool, what: &str| {
            if !present {
                out.push(format!("missing {what}"));
            }
        };
        match compute {
            Compute::Static | Compute::Dynamic => {
                need(&mut out, self.gap.is_some() || swept == Some(SweepVariable::Gap), "[geometry] l");
                need(&mut out, self.plate1.is_some(), "section [plate1]");
                need(&mut out, self.plate2.is_some(), "section [plate2]");
                if compute == Compute::Static && (self.velocity != 0.0 || swept == Some(SweepVariable::Velocity)) {
                    out.push("static calculations ignore V; use dynamic".into());
                }
            }
            Compute::Polder => {
                need(&mut out, self.height.is_some() || swept == Some(SweepVariable::Gap), "[geometry] z");
                need(&mut out, self.surface.is_some(), "section [surface]");
                need(&mut out, self.particle.is_some(), "section [particle]");
                if self.polder_route == PolderRoute::FiniteDifference
                    && self.particle.as_ref().is_some_and(|p| p.density.is_none())
                {
                    out.push("route finite_difference needs [particle] density".into());
                }
                if self.polder_route == PolderRoute::Matsubara
                    && (self.velocity != 0.0 || swept == Some(SweepVariable::Velocity))
                {
                    out.push("route matsubara is static; V must be 0".into());
                }
            }
        }
        if let Some(s) = self.sweep.as_ref().filter(|_| self.mode == Mode::Sweep) {
            let limit = DEFAULT_SPEED_LIMIT * C;
            let bad = |x: f64| match s.variable {
                SweepVariable::Gap => !(x > 0.0),
                SweepVariable::Temperature => !(x >= 0.0),
                SweepVariable::Velocity => !(x.abs() < limit),
            };
            if bad(s.from) || bad(s.to) {
                out.push(format!("[sweep] range {}..{} leaves the allowed values of {}", s.from, s.to, variable_name(s.variable)));
            }
            if s.spacing == Spacing::Log && !(s.from > 0.0 && s.to > 0.0) {
                out.push("[sweep] log spacing needs from > 0 and to > 0".into());
            }
        }
        out
    }
}

/// One problem found while reading a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Every problem found in a configuration, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: [&str; 11] =
    ["", "geometry", "plate1", "plate2", "surface", "particle", "static", "dynamic", "polder", "sweep", "output"];

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

/// Keys of one section, consumed by the typed getters below. Anything left
/// over is reported as unknown.
struct Reader<'a> {
    name: &'a str,
    section: Option<&'a mut Section>,
    errors: &'a mut Vec<ConfigError>,
}

enum Bound {
    Positive,
    NonNegative,
    Any,
    /// 0 < x ≤ upper.
    UpTo(f64),
    /// |x| < limit.
    Below(f64),
}

impl Bound {
    fn check(&self, x: f64) -> Option<String> {
        let ok = match self {
            Self::Positive => x > 0.0,
            Self::NonNegative => x >= 0.0,
            Self::Any => true,
            Self::UpTo(u) => x > 0.0 && x <= *u,
            Self::Below(l) => x.abs() < *l,
        };
        if ok {
            return None;
        }
        Some(match self {
            Self::Positive => "must be > 0".into(),
            Self::NonNegative => "must be >= 0".into(),
            Self::Any => unreachable!(),
            Self::UpTo(u) => format!("must lie in (0, {u}]"),
            Self::Below(l) => format!("must satisfy |x| < {l:e}"),
        })
    }
}

impl<'a> Reader<'a> {
    fn header_line(&self) -> usize {
        self.section.as_ref().map_or(0, |s| s.line)
    }

    fn label(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("[{}] {}", self.name, key)
        }
    }

    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        let e = self.section.as_mut()?.entries.get_mut(key)?;
        e.used = true;
        Some((e.line, e.value.clone()))
    }

    fn error(&mut self, line: usize, message: String) {
        self.errors.push(ConfigError { line, message });
    }

    fn missing(&mut self, key: &str) {
        let line = self.header_line();
        let label = self.label(key);
        self.error(line, format!("missing required key {label}"));
    }

    fn number(&mut self, key: &str, bound: Bound) -> Option<f64> {
        let (line, text) = self.raw(key)?;
        let label = self.label(key);
        match text.parse::<f64>() {
            Ok(x) if x.is_finite() => match bound.check(x) {
                None => Some(x),
                Some(why) => {
                    self.error(line, format!("{label} {why}, got {text}"));
                    None
                }
            },
            _ => {
                self.error(line, format!("{label} is not a finite number: {text:?}"));
                None
            }
        }
    }

    fn required(&mut self, key: &str, bound: Bound) -> Option<f64> {
        if self.section.as_ref().is_some_and(|s| s.entries.contains_key(key)) {
            self.number(key, bound)
        } else {
            self.missing(key);
            None
        }
    }

    fn list(&mut self, key: &str, bound: Bound) -> Option<Vec<f64>> {
        let Some((line, text)) = self.raw(key) else {
            self.missing(key);
            return None;
        };
        let label = self.label(key);
        let mut out = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            match item.parse::<f64>() {
                Ok(x) if x.is_finite() => {
                    if let Some(why) = bound.check(x) {
                        self.error(line, format!("{label} {why}, got {item}"));
                        return None;
                    }
                    out.push(x);
                }
                _ => {
                    self.error(line, format!("{label} is not a list of finite numbers: {text:?}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)]) -> Option<T> {
        let (line, text) = self.raw(key)?;
        if let Some((_, v)) = options.iter().find(|(name, _)| *name == text) {
            return Some(*v);
        }
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        let label = self.label(key);
        self.error(line, format!("{label} must be one of {}, got {text:?}", names.join(", ")));
        None
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|(_, v)| v)
    }

    fn finish(self) {
        let Some(section) = self.section else { return };
        for (key, e) in &section.entries {
            if !e.used {
                let label = if self.name.is_empty() { key.clone() } else { format!("[{}] {}", self.name, key) };
                self.errors.push(ConfigError { line: e.line, message: format!("unknown key {label}") });
            }
        }
    }
}

const MODES: [(&str, Mode); 5] = [
    ("static", Mode::Static),
    ("dynamic", Mode::Dynamic),
    ("polder", Mode::Polder),
    ("sweep", Mode::Sweep),
    ("verify", Mode::Verify),
];
const STATIC_ROUTES: [(&str, StaticRoute); 3] =
    [("eq2", StaticRoute::Direct), ("eq5", StaticRoute::Rearranged), ("matsubara", StaticRoute::Matsubara)];
const POLDER_ROUTES: [(&str, PolderRoute); 3] = [
    ("analytic", PolderRoute::Analytic),
    ("finite_difference", PolderRoute::FiniteDifference),
    ("matsubara", PolderRoute::Matsubara),
];
const KINEMATICS: [(&str, Kinematics); 2] = [("shared", Kinematics::Shared), ("shifted_cone", Kinematics::ShiftedCone)];
const SIGNS: [(&str, TransitionSign); 2] =
    [("attractive", TransitionSign::Attractive), ("literal", TransitionSign::Literal)];
const COMPUTES: [(&str, Compute); 3] =
    [("static", Compute::Static), ("dynamic", Compute::Dynamic), ("polder", Compute::Polder)];
const VARIABLES: [(&str, SweepVariable); 3] =
    [("l", SweepVariable::Gap), ("V", SweepVariable::Velocity), ("T", SweepVariable::Temperature)];
const SPACINGS: [(&str, Spacing); 2] = [("linear", Spacing::Linear), ("log", Spacing::Log)];
const BOOLS: [(&str, bool); 2] = [("true", true), ("false", false)];

fn name_of<T: PartialEq + Copy>(options: &[(&'static str, T)], v: T) -> &'static str {
    options.iter().find(|(_, x)| *x == v).map(|(n, _)| *n).expect("every variant is named")
}

pub fn mode_name(m: Mode) -> &'static str {
    name_of(&MODES, m)
}

pub fn variable_name(v: SweepVariable) -> &'static str {
    name_of(&VARIABLES, v)
}

/// Parses a mode name as used by `mode =` and `--mode`.
pub fn parse_mode(text: &str) -> Option<Mode> {
    MODES.iter().find(|(n, _)| *n == text).map(|(_, m)| *m)
}

fn split(text: &str) -> (BTreeMap<String, Section>, Vec<ConfigError>) {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    sections.insert(String::new(), Section { line: 0, entries: BTreeMap::new() });
    let mut errors = Vec::new();
    let mut current = String::new();
    let mut skipping = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']').map(str::trim) else {
                errors.push(ConfigError { line, message: format!("malformed section header {content:?}") });
                skipping = true;
                continue;
            };
            if name.is_empty() || !SECTIONS.contains(&name) {
                errors.push(ConfigError { line, message: format!("unknown section [{name}]") });
                skipping = true;
                continue;
            }
            if sections.contains_key(name) {
                errors.push(ConfigError { line, message: format!("duplicate section [{name}]") });
                skipping = true;
                continue;
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = name.to_string();
            skipping = false;
            continue;
        }
        if skipping {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(ConfigError { line, message: format!("expected key = value, got {content:?}") });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            errors.push(ConfigError { line, message: "empty key".into() });
            continue;
        }
        let section = sections.get_mut(&current).expect("current section exists");
        if let Some(prev) = section.entries.get(key) {
            errors.push(ConfigError { line, message: format!("duplicate key {key} (first on line {})", prev.line) });
            continue;
        }
        section.entries.insert(key.to_string(), Entry { line, value: value.to_string(), used: false });
    }
    (sections, errors)
}

fn read_material(r: &mut Reader) -> Option<MaterialSpec> {
    r.section.as_ref()?;
    let kinds = [
        ("vacuum", 0),
        ("ideal_metal", 1),
        ("drude", 2),
        ("plasma", 3),
        ("dielectric", 4),
        ("lorentz", 5),
    ];
    let Some(kind) = (if r.section.as_ref().is_some_and(|s| s.entries.contains_key("kind")) {
        r.choice("kind", &kinds)
    } else {
        r.missing("kind");
        None
    }) else {
        // mark the rest as seen so one bad kind does not cascade
        if let Some(s) = r.section.as_mut() {
            s.entries.values_mut().for_each(|e| e.used = true);
        }
        return None;
    };
    match kind {
        0 => Some(MaterialSpec::Vacuum),
        1 => Some(MaterialSpec::IdealMetal),
        2 => {
            let plasma = r.required("plasma", Bound::Positive);
            let damping = r.required("damping", Bound::Positive);
            Some(MaterialSpec::Drude { plasma: plasma?, damping: damping? })
        }
        3 => Some(MaterialSpec::Plasma { plasma: r.required("plasma", Bound::Positive)? }),
        4 => {
            let eps = r.required("eps", Bound::Positive);
            let cutoff = r.required("cutoff", Bound::Positive);
            Some(MaterialSpec::Dielectric { eps: eps?, cutoff: cutoff? })
        }
        _ => {
            let strength = r.list("strength", Bound::Positive);
            let resonance = r.list("resonance", Bound::Positive);
            let damping = r.list("damping", Bound::NonNegative);
            let (s, w, g) = (strength?, resonance?, damping?);
            if s.len() != w.len() || s.len() != g.len() {
                let line = r.header_line();
                let label = r.label("strength/resonance/damping");
                r.error(line, format!("{label} lists must have equal lengths"));
                return None;
            }
            let osc = s
                .iter()
                .zip(&w)
                .zip(&g)
                .map(|((&strength, &resonance), &damping)| Oscillator { strength, resonance, damping })
                .collect();
            Some(MaterialSpec::Lorentz(osc))
        }
    }
}

fn read_polarizability(r: &mut Reader, prefix: &str, required: bool) -> Option<PolarizabilitySpec> {
    let key = |k: &str| format!("{prefix}{k}");
    let kinds = [("none", 0), ("oscillator", 1), ("constant", 2)];
    let has_kind = r.section.as_ref().is_some_and(|s| s.entries.contains_key(&key("kind")));
    if !has_kind {
        if required {
            r.missing(&key("kind"));
            return None;
        }
        return Some(PolarizabilitySpec::None);
    }
    match r.choice(&key("kind"), &kinds)? {
        0 => Some(PolarizabilitySpec::None),
        1 => {
            let alpha = r.required(&key("alpha"), Bound::Positive);
            let resonance = r.required(&key("resonance"), Bound::Positive);
            let damping = r.required(&key("damping"), Bound::NonNegative);
            Some(PolarizabilitySpec::Oscillator { alpha: alpha?, resonance: resonance?, damping: damping? })
        }
        _ => {
            let alpha = r.required(&key("alpha"), Bound::Positive);
            let cutoff = r.number(&key("cutoff"), Bound::Positive);
            Some(PolarizabilitySpec::Constant { alpha: alpha?, cutoff })
        }
    }
}

/// Parses and validates a configuration, collecting every error.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let (mut sections, mut errors) = split(text);
    let end_line = text.lines().count().max(1);
    let mut cfg = RunConfig::new(Mode::Static);
    let mut take = |name: &'static str| sections.remove(name);

    let mut top = take("");
    {
        let mut r = Reader { name: "", section: top.as_mut(), errors: &mut errors };
        match r.choice("mode", &MODES) {
            Some(m) => cfg.mode = m,
            None => {
                if !r.section.as_ref().is_some_and(|s| s.entries.contains_key("mode")) {
                    r.error(1, "missing required key mode".into());
                }
            }
        }
        if let Some(t) = r.number("tol", Bound::UpTo(0.1)) {
            cfg.tol = t;
        }
        cfg.out = r.string("out");
        r.finish();
    }

    let mut geometry = take("geometry");
    {
        let mut r = Reader { name: "geometry", section: geometry.as_mut(), errors: &mut errors };
        cfg.gap = r.number("l", Bound::Positive);
        cfg.height = r.number("z", Bound::Positive);
        if let Some(t) = r.number("T", Bound::NonNegative) {
            cfg.temperature = t;
        }
        if let Some(v) = r.number("V", Bound::Below(DEFAULT_SPEED_LIMIT * C)) {
            cfg.velocity = v;
        }
        r.finish();
    }

    for (name, slot) in [("plate1", &mut cfg.plate1), ("plate2", &mut cfg.plate2), ("surface", &mut cfg.surface)] {
        let mut sec = take(name);
        let mut r = Reader { name, section: sec.as_mut(), errors: &mut errors };
        *slot = read_material(&mut r);
        r.finish();
    }

    let mut particle = take("particle");
    {
        let mut r = Reader { name: "particle", section: particle.as_mut(), errors: &mut errors };
        if r.section.is_some() {
            let electric = read_polarizability(&mut r, "", true);
            let magnetic = read_polarizability(&mut r, "magnetic_", false);
            let density = r.number("density", Bound::Positive);
            if let (Some(electric), Some(magnetic)) = (electric, magnetic) {
                cfg.particle = Some(ParticleSpec { electric, magnetic, density });
            }
        }
        r.finish();
    }

    let mut sec = take("static");
    {
        let mut r = Reader { name: "static", section: sec.as_mut(), errors: &mut errors };
        if let Some(v) = r.choice("route", &STATIC_ROUTES) {
            cfg.static_route = v;
        }
        r.finish();
    }
    let mut sec = take("dynamic");
    {
        let mut r = Reader { name: "dynamic", section: sec.as_mut(), errors: &mut errors };
        if let Some(v) = r.choice("kinematics", &KINEMATICS) {
            cfg.kinematics = v;
        }
        r.finish();
    }
    let mut sec = take("polder");
    {
        let mut r = Reader { name: "polder", section: sec.as_mut(), errors: &mut errors };
        if let Some(v) = r.choice("route", &POLDER_ROUTES) {
            cfg.polder_route = v;
        }
        if let Some(v) = r.choice("sign", &SIGNS) {
            cfg.sign = v;
        }
        if let Some(v) = r.number("step", Bound::UpTo(0.25)) {
            cfg.step = v;
        }
        if let Some(v) = r.choice("magnetic", &BOOLS) {
            cfg.magnetic = v;
        }
        r.finish();
    }

    let mut sweep = take("sweep");
    let sweep_line = sweep.as_ref().map(|s| s.line);
    {
        let mut r = Reader { name: "sweep", section: sweep.as_mut(), errors: &mut errors };
        if r.section.is_some() {
            let variable = if r.section.as_ref().is_some_and(|s| s.entries.contains_key("variable")) {
                r.choice("variable", &VARIABLES)
            } else {
                r.missing("variable");
                None
            };
            let from = r.required("from", Bound::Any);
            let to = r.required("to", Bound::Any);
            let count = r.required("count", Bound::Any).and_then(|c| {
                if c >= 2.0 && c.fract() == 0.0 && c <= 1e6 {
                    Some(c as usize)
                } else {
                    let line = r.section.as_ref().and_then(|s| s.entries.get("count")).map_or(0, |e| e.line);
                    r.error(line, format!("[sweep] count must be an integer >= 2, got {c}"));
                    None
                }
            });
            let spacing = r.choice("spacing", &SPACINGS).unwrap_or(Spacing::Linear);
            let compute = r.choice("compute", &COMPUTES).unwrap_or(Compute::Dynamic);
            if let (Some(variable), Some(from), Some(to), Some(count)) = (variable, from, to, count) {
                cfg.sweep = Some(SweepSpec { variable, from, to, count, spacing, compute });
            }
        }
        r.finish();
    }

    let mut sec = take("output");
    {
        let mut r = Reader { name: "output", section: sec.as_mut(), errors: &mut errors };
        if let Some(p) = r.string("path") {
            if cfg.out.is_some() {
                let line = r.header_line();
                r.error(line, "output path given twice (out and [output] path)".into());
            }
            cfg.out = Some(p);
        }
        r.finish();
    }

    if errors.is_empty() {
        let line = if cfg.mode == Mode::Sweep { sweep_line.unwrap_or(end_line) } else { end_line };
        errors.extend(cfg.check().into_iter().map(|message| ConfigError { line, message }));
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|e| e.line);
        Err(ConfigErrors(errors))
    }
}

fn write_material(out: &mut String, name: &str, m: &MaterialSpec) {
    let _ = writeln!(out, "\n[{name}]");
    let join = |xs: Vec<f64>| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
    let _ = match m {
        MaterialSpec::Vacuum => writeln!(out, "kind = vacuum"),
        MaterialSpec::IdealMetal => writeln!(out, "kind = ideal_metal"),
        MaterialSpec::Drude { plasma, damping } => {
            writeln!(out, "kind = drude\nplasma = {plasma:?}\ndamping = {damping:?}")
        }
        MaterialSpec::Plasma { plasma } => writeln!(out, "kind = plasma\nplasma = {plasma:?}"),
        MaterialSpec::Dielectric { eps, cutoff } => writeln!(out, "kind = dielectric\neps = {eps:?}\ncutoff = {cutoff:?}"),
        MaterialSpec::Lorentz(osc) => writeln!(
            out,
            "kind = lorentz\nstrength = {}\nresonance = {}\ndamping = {}",
            join(osc.iter().map(|o| o.strength).collect()),
            join(osc.iter().map(|o| o.resonance).collect()),
            join(osc.iter().map(|o| o.damping).collect()),
        ),
    };
}

fn write_polarizability(out: &mut String, prefix: &str, p: &PolarizabilitySpec) {
    let _ = match p {
        PolarizabilitySpec::None => writeln!(out, "{prefix}kind = none"),
        PolarizabilitySpec::Oscillator { alpha, resonance, damping } => writeln!(
            out,
            "{prefix}kind = oscillator\n{prefix}alpha = {alpha:?}\n{prefix}resonance = {resonance:?}\n{prefix}damping = {damping:?}"
        ),
        PolarizabilitySpec::Constant { alpha, cutoff } => {
            let _ = writeln!(out, "{prefix}kind = constant\n{prefix}alpha = {alpha:?}");
            match cutoff {
                Some(c) => writeln!(out, "{prefix}cutoff = {c:?}"),
                None => Ok(()),
            }
        }
    };
}

/// Writes a configuration back in the format read by [`parse_config`].
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode = {}", mode_name(cfg.mode));
    let _ = writeln!(out, "tol = {:?}", cfg.tol);
    if let Some(p) = &cfg.out {
        let _ = writeln!(out, "out = {p}");
    }
    let _ = writeln!(out, "\n[geometry]");
    if let Some(l) = cfg.gap {
        let _ = writeln!(out, "l = {l:?}");
    }
    if let Some(z) = cfg.height {
        let _ = writeln!(out, "z = {z:?}");
    }
    let _ = writeln!(out, "T = {:?}\nV = {:?}", cfg.temperature, cfg.velocity);
    for (name, m) in [("plate1", &cfg.plate1), ("plate2", &cfg.plate2), ("surface", &cfg.surface)] {
        if let Some(m) = m {
            write_material(&mut out, name, m);
        }
    }
    if let Some(p) = &cfg.particle {
        let _ = writeln!(out, "\n[particle]");
        write_polarizability(&mut out, "", &p.electric);
        write_polarizability(&mut out, "magnetic_", &p.magnetic);
        if let Some(n) = p.density {
            let _ = writeln!(out, "density = {n:?}");
        }
    }
    let _ = writeln!(out, "\n[static]\nroute = {}", name_of(&STATIC_ROUTES, cfg.static_route));
    let _ = writeln!(out, "\n[dynamic]\nkinematics = {}", name_of(&KINEMATICS, cfg.kinematics));
    let _ = writeln!(
        out,
        "\n[polder]\nroute = {}\nsign = {}\nstep = {:?}\nmagnetic = {}",
        name_of(&POLDER_ROUTES, cfg.polder_route),
        name_of(&SIGNS, cfg.sign),
        cfg.step,
        cfg.magnetic
    );
    if let Some(s) = &cfg.sweep {
        let _ = writeln!(
            out,
            "\n[sweep]\nvariable = {}\nfrom = {:?}\nto = {:?}\ncount = {}\nspacing = {}\ncompute = {}",
            variable_name(s.variable),
            s.from,
            s.to,
            s.count,
            name_of(&SPACINGS, s.spacing),
            name_of(&COMPUTES, s.compute)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "mode = static\n[geometry]\nl = 1e-6\n[plate1]\nkind = ideal_metal\n[plate2]\nkind = ideal_metal\n";

    #[test]
    fn minimal_static_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.mode, Mode::Static);
        assert_eq!(cfg.tol, DEFAULT_TOL);
        assert_eq!(cfg.temperature, DEFAULT_TEMPERATURE);
        assert_eq!(cfg.velocity, 0.0);
        assert_eq!(cfg.static_route, StaticRoute::Rearranged);
        assert_eq!(cfg.gap, Some(1e-6));
        assert_eq!(cfg.plate1, Some(MaterialSpec::IdealMetal));
    }

    #[test]
    fn negative_gap_names_key_and_constraint() {
        let err = parse_config(&MINIMAL.replace("l = 1e-6", "l = -1")).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, 3);
        assert!(err.0[0].message.contains("[geometry] l"), "{}", err.0[0].message);
        assert!(err.0[0].message.contains("> 0"), "{}", err.0[0].message);
    }

    #[test]
    fn reports_every_error_with_its_line() {
        let text = "mode = sweep\ncolour = blue\n[geometry]\nl = abc\nT = -4\n[plate1]\nkind = drude\nplasma = 1e16\n[plate2]\nkind = unobtainium\n[sweep]\nvariable = l\nfrom = 1e-7\nto = 1e-6\ncount = 1\n[nonsense]\nx = 1\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<usize> = err.0.iter().map(|e| e.line).collect();
        let text_all = err.to_string();
        assert!(lines.contains(&2), "{text_all}");
        assert!(lines.contains(&4), "{text_all}");
        assert!(lines.contains(&5), "{text_all}");
        assert!(lines.contains(&6), "{text_all}"); // damping missing, reported at the header
        assert!(lines.contains(&10), "{text_all}");
        assert!(lines.contains(&15), "{text_all}");
        assert!(lines.contains(&16), "{text_all}");
        assert!(text_all.contains("unknown key colour"));
        assert!(text_all.contains("missing required key [plate1] damping"));
        assert!(text_all.contains("unknown section [nonsense]"));
    }

    #[test]
    fn missing_sections_are_reported() {
        let err = parse_config("mode = dynamic\n[geometry]\nl = 1e-7\n").unwrap_err();
        let s = err.to_string();
        assert!(s.contains("[plate1]") && s.contains("[plate2]"), "{s}");
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = parse_config(&format!("{MINIMAL}\n[static]\nroute = eq2\nroute = eq5\n")).unwrap_err();
        assert!(err.0[0].message.contains("duplicate key route"));
    }

    #[test]
    fn sweep_count_must_be_at_least_two() {
        let text = format!("{}\n[sweep]\nvariable = T\nfrom = 1\nto = 300\ncount = 1\ncompute = static\n", MINIMAL.replace("static", "sweep"));
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("count must be an integer >= 2"));
    }

    #[test]
    fn velocity_guard_is_a_validation_error() {
        let text = MINIMAL.replace("static", "dynamic").replace("l = 1e-6", "l = 1e-6\nV = 1e7");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("[geometry] V"));
    }

    #[test]
    fn sweep_points_hit_both_ends() {
        let s = SweepSpec {
            variable: SweepVariable::Gap,
            from: 1e-7,
            to: 1e-6,
            count: 4,
            spacing: Spacing::Log,
            compute: Compute::Static,
        };
        let p = s.points();
        assert_eq!(p.len(), 4);
        assert_eq!(p[0], 1e-7);
        assert_eq!(p[3], 1e-6);
        assert!((p[1] / p[0] - p[2] / p[1]).abs() < 1e-12);
    }

    #[test]
    fn serialize_round_trips() {
        let text = "mode = sweep\ntol = 2e-3\nout = r.csv\n[geometry]\nz = 2e-7\nT = 0\nV = 150.5\n\
            [surface]\nkind = lorentz\nstrength = 1.2, 0.4\nresonance = 3e15, 1.1e16\ndamping = 1e14, 0\n\
            [plate1]\nkind = dielectric\neps = 3.9\ncutoff = 2e16\n[plate2]\nkind = plasma\nplasma = 9e15\n\
            [particle]\nkind = oscillator\nalpha = 1e-29\nresonance = 5e15\ndamping = 1e14\n\
            magnetic_kind = constant\nmagnetic_alpha = 3e-31\ndensity = 1e22\n\
            [polder]\nroute = finite_difference\nsign = literal\nstep = 0.01\nmagnetic = false\n\
            [dynamic]\nkinematics = shifted_cone\n\
            [sweep]\nvariable = l\nfrom = 1e-7\nto = 1e-6\ncount = 5\nspacing = log\ncompute = polder\n";
        let a = parse_config(text).unwrap();
        let b = parse_config(&serialize_config(&a)).unwrap();
        assert_eq!(a, b);
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
    }
}
