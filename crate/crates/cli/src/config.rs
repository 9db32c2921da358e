//! Run configuration: an INI file with the sections `[scenario]`,
//! `[system]`, `[solve]` and `[output]`. Unknown sections and keys are
//! rejected so that typos surface as errors naming the field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use dirac_lfv_core::catalog::{make_coulomb, make_cprs, make_free_particle, make_shifted_oscillator, Scenario};
use dirac_lfv_core::model::Ambiguity;
use dirac_lfv_core::problems::Problem;
use dirac_lfv_core::{Component, SystemParams};
use ini::Ini;

use crate::error::CliError;

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Components {
    Plus,
    Minus,
    Both,
}

impl Components {
    pub fn list(self) -> Vec<Component> {
        match self {
            Components::Plus => vec![Component::Plus],
            Components::Minus => vec![Component::Minus],
            Components::Both => vec![Component::Plus, Component::Minus],
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "plus" => Some(Components::Plus),
            "minus" => Some(Components::Minus),
            "both" => Some(Components::Both),
            _ => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Components::Plus => "plus",
            Components::Minus => "minus",
            Components::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Format {
    Csv,
    Dat,
    Gnuplot,
    Txt,
}

impl Format {
    pub fn all() -> BTreeSet<Format> {
        [Format::Csv, Format::Dat, Format::Gnuplot, Format::Txt].into_iter().collect()
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "dat" => Some(Format::Dat),
            "gnuplot" => Some(Format::Gnuplot),
            "txt" => Some(Format::Txt),
            _ => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Dat => "dat",
            Format::Gnuplot => "gnuplot",
            Format::Txt => "txt",
        }
    }
}

/// Optional replacements for the default solve interval and node count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DomainOverride {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n0: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    /// Builder parameters; keys absent here take the builder defaults.
    pub params: BTreeMap<String, f64>,
    pub components: Components,
    pub k: usize,
    pub tol: f64,
    /// `None` selects the scenario's natural problem.
    pub problem: Option<Problem>,
    pub domain: DomainOverride,
    /// Rest mass; when set, spectra also carry E = +√(ε + m₀²v₀⁴).
    pub m0: Option<f64>,
    /// Reference velocity for E; defaults to the scenario's v₀.
    pub v0: Option<f64>,
    pub out_dir: PathBuf,
    pub formats: BTreeSet<Format>,
}

/// Builder parameters and their defaults, per scenario name.
fn builder_params(name: &str) -> Option<&'static [(&'static str, f64)]> {
    match name {
        "free_particle" => Some(&[("a", 1.0), ("omega0", 0.0)]),
        "shifted_oscillator" => Some(&[("v0", 1.0), ("alpha", 1.0), ("a", 1.0), ("b", 0.0)]),
        "coulomb" => Some(&[("v0", 1.0), ("alpha", 1.0), ("l", 2.0)]),
        "cprs" => Some(&[]),
        _ => None,
    }
}

fn config_error(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(field: &str, raw: &str) -> Result<f64, CliError> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| config_error(field, format!("expected a real number, got `{raw}`")))?;
    if !v.is_finite() {
        return Err(config_error(field, format!("must be finite, got `{raw}`")));
    }
    Ok(v)
}

fn parse_usize(field: &str, raw: &str) -> Result<usize, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| config_error(field, format!("expected a non-negative integer, got `{raw}`")))
}

impl RunConfig {
    /// Defaults for every field except the scenario.
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            params: BTreeMap::new(),
            components: Components::Both,
            k: DEFAULT_K,
            tol: DEFAULT_TOL,
            problem: None,
            domain: DomainOverride::default(),
            m0: None,
            v0: None,
            out_dir: PathBuf::from("out"),
            formats: Format::all(),
        }
    }

    pub fn from_ini_str(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| config_error("file", e.to_string()))?;
        let mut cfg = RunConfig::new("");
        let mut seen_scenario_name = false;
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            let mut keys = BTreeSet::new();
            for (key, value) in props.iter() {
                let field = format!("{section}.{key}");
                if !keys.insert(key) {
                    return Err(config_error(&field, "given more than once"));
                }
                match (section, key) {
                    ("scenario", "name") => {
                        cfg.scenario = value.trim().to_string();
                        seen_scenario_name = true;
                    }
                    ("scenario", _) => {
                        cfg.params.insert(key.to_string(), parse_f64(&field, value)?);
                    }
                    ("system", "m0") => cfg.m0 = Some(parse_f64(&field, value)?),
                    ("system", "v0") => cfg.v0 = Some(parse_f64(&field, value)?),
                    ("solve", "components") => {
                        cfg.components = Components::parse(value.trim())
                            .ok_or_else(|| config_error(&field, format!("expected plus, minus or both, got `{value}`")))?;
                    }
                    ("solve", "k") => cfg.k = parse_usize(&field, value)?,
                    ("solve", "tol") => cfg.tol = parse_f64(&field, value)?,
                    ("solve", "problem") => {
                        cfg.problem = Some(Problem::parse(value.trim()).ok_or_else(|| {
                            config_error(&field, format!("expected y_space, x_pdm or x_constant_mass, got `{value}`"))
                        })?);
                    }
                    ("solve", "lo") => cfg.domain.lo = Some(parse_f64(&field, value)?),
                    ("solve", "hi") => cfg.domain.hi = Some(parse_f64(&field, value)?),
                    ("solve", "n0") => cfg.domain.n0 = Some(parse_usize(&field, value)?),
                    ("output", "dir") => cfg.out_dir = PathBuf::from(value.trim()),
                    ("output", "formats") => {
                        cfg.formats = value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| Format::parse(s).ok_or_else(|| config_error(&field, format!("unknown format `{s}`"))))
                            .collect::<Result<_, _>>()?;
                    }
                    ("system" | "solve" | "output", _) => {
                        return Err(config_error(&field, "unknown key"));
                    }
                    _ => {
                        let name = if section.is_empty() { "(top level)" } else { section };
                        return Err(config_error(
                            name,
                            format!("unknown section; expected scenario, system, solve or output (key `{key}`)"),
                        ));
                    }
                }
            }
        }
        if !seen_scenario_name {
            return Err(config_error("scenario.name", "missing"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("file", format!("cannot read {}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    /// Canonical serialization: fixed section and key order, shortest
    /// round-trip representation of every number.
    pub fn to_ini_string(&self) -> String {
        let mut ini = Ini::new();
        ini.with_section(Some("scenario")).set("name", self.scenario.as_str());
        for (k, v) in &self.params {
            ini.with_section(Some("scenario")).set(k.as_str(), v.to_string());
        }
        if let Some(m0) = self.m0 {
            ini.with_section(Some("system")).set("m0", m0.to_string());
        }
        if let Some(v0) = self.v0 {
            ini.with_section(Some("system")).set("v0", v0.to_string());
        }
        let mut solve = ini.with_section(Some("solve"));
        solve
            .set("components", self.components.label())
            .set("k", self.k.to_string())
            .set("tol", self.tol.to_string());
        if let Some(p) = self.problem {
            solve.set("problem", p.label());
        }
        if let Some(lo) = self.domain.lo {
            solve.set("lo", lo.to_string());
        }
        if let Some(hi) = self.domain.hi {
            solve.set("hi", hi.to_string());
        }
        if let Some(n0) = self.domain.n0 {
            solve.set("n0", n0.to_string());
        }
        let formats: Vec<&str> = self.formats.iter().map(|f| f.label()).collect();
        ini.with_section(Some("output"))
            .set("dir", self.out_dir.to_string_lossy().into_owned())
            .set("formats", formats.join(", "));
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ini output is UTF-8")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k < 1 {
            return Err(config_error("solve.k", "must be >= 1"));
        }
        if !(self.tol > 0.0) {
            return Err(config_error("solve.tol", format!("must be > 0, got {}", self.tol)));
        }
        if let (Some(lo), Some(hi)) = (self.domain.lo, self.domain.hi) {
            if lo >= hi {
                return Err(config_error("solve.lo", format!("must be below solve.hi ({lo} >= {hi})")));
            }
        }
        if let Some(n0) = self.domain.n0 {
            if n0 < 3 {
                return Err(config_error("solve.n0", format!("need at least 3 nodes, got {n0}")));
            }
        }
        if self.formats.is_empty() {
            return Err(config_error("output.formats", "no output format selected"));
        }
        self.scenario()?;
        self.system()?;
        Ok(())
    }

    /// Build the scenario; builder errors are reported against
    /// `scenario.<param>`.
    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let spec = builder_params(&self.scenario).ok_or_else(|| {
            config_error(
                "scenario.name",
                format!(
                    "unknown scenario `{}`; expected free_particle, shifted_oscillator, coulomb or cprs",
                    self.scenario
                ),
            )
        })?;
        for key in self.params.keys() {
            if !spec.iter().any(|(k, _)| k == key) {
                return Err(config_error(
                    &format!("scenario.{key}"),
                    format!("not a parameter of {}", self.scenario),
                ));
            }
        }
        let p = |name: &str| {
            let default = spec.iter().find(|(k, _)| *k == name).expect("listed").1;
            self.params.get(name).copied().unwrap_or(default)
        };
        let built = match self.scenario.as_str() {
            "free_particle" => make_free_particle(p("a"), p("omega0")),
            "shifted_oscillator" => make_shifted_oscillator(p("v0"), p("alpha"), p("a"), p("b")),
            "coulomb" => make_coulomb(p("v0"), p("alpha"), p("l")),
            _ => make_cprs(),
        };
        built.map_err(|e| match e {
            dirac_lfv_core::Error::InvalidParameter { name, reason } => config_error(&format!("scenario.{name}"), reason),
            other => config_error("scenario", other.to_string()),
        })
    }

    /// System parameters when a rest mass is configured.
    pub fn system(&self) -> Result<Option<SystemParams>, CliError> {
        let Some(m0) = self.m0 else {
            if self.v0.is_some() {
                return Err(config_error("system.v0", "only meaningful together with system.m0"));
            }
            return Ok(None);
        };
        let v0 = match self.v0 {
            Some(v) => v,
            None => self.scenario()?.system.v0,
        };
        SystemParams::new(m0, v0, Ambiguity::default())
            .map(Some)
            .map_err(|e| match e {
                dirac_lfv_core::Error::InvalidParameter { name, reason } => config_error(&format!("system.{name}"), reason),
                other => config_error("system", other.to_string()),
            })
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ini_string())
    }
}
