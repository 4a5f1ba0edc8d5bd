//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! [sim]
//! nu = 0.1
//! alpha = 0.1
//! L = 1
//! n = 16
//! dt = 1e-3
//! dealias = two-thirds
//! T = 1
//! sample_dt = 1e-2
//!
//! [initial]
//! kind = single_mode          # zero | taylor_green | single_mode | random_solenoidal
//! k = (0, 0, 1)
//! amplitude = 1
//! direction = (1, 0, 0)
//!
//! [forcing]
//! kind = none                 # none | single_mode
//!
//! [run]
//! out = runs/decay
//! checks = energy, decay, dissipation
//! C_h2 = calibrate            # or a number
//! metric_N = 20
//! ```
//!
//! Keys are case-insensitive. Every key is optional; unknown keys and
//! sections are errors.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::fields::{random_solenoidal, single_mode, taylor_green};
use crate::model::{Dealias, Forcing, SimParams};
use crate::spectral::{Grid, SpectralVectorField};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {key}: {message}")]
pub struct ConfigError {
    /// 1-based line, 0 when the problem is not tied to one line.
    pub line: usize,
    pub key: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Zero,
    TaylorGreen,
    SingleMode { k: [i64; 3], amplitude: f64, direction: [f64; 3] },
    RandomSolenoidal { seed: u64, spectrum_slope: f64, cutoff: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    None,
    SingleMode { k: [i64; 3], amplitude: f64, direction: [f64; 3] },
}

/// Checks a run can perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Energy,
    Decay,
    Dissipation,
    Absorbing,
    H2,
    Pressure,
    Momentum,
    Continuity,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::Energy,
        Check::Decay,
        Check::Dissipation,
        Check::Absorbing,
        Check::H2,
        Check::Pressure,
        Check::Momentum,
        Check::Continuity,
    ];

    /// Checks run when none are requested.
    pub const DEFAULT: [Check; 7] = [
        Check::Energy,
        Check::Decay,
        Check::Dissipation,
        Check::Absorbing,
        Check::H2,
        Check::Pressure,
        Check::Momentum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Energy => "energy",
            Check::Decay => "decay",
            Check::Dissipation => "dissipation",
            Check::Absorbing => "absorbing",
            Check::H2 => "h2",
            Check::Pressure => "pressure",
            Check::Momentum => "momentum",
            Check::Continuity => "continuity",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown check '{s}'"))
    }
}

/// Parse a comma-separated check list; `all` selects every check.
pub fn parse_checks(s: &str) -> Result<Vec<Check>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if item == "all" {
            out.extend(Check::ALL);
        } else {
            out.push(item.parse()?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Generic constant of the higher-order estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenericConstant {
    /// Use the smallest value for which the bound holds on the run.
    Calibrate,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimParams,
    pub initial: InitialSpec,
    pub forcing: ForcingSpec,
    pub out: Option<PathBuf>,
    pub checks: Vec<Check>,
    pub c_h2: GenericConstant,
    pub metric_terms: usize,
    /// Largest accepted relative energy-identity residual.
    pub energy_tol: f64,
    /// Largest accepted relative momentum-balance residual.
    pub momentum_tol: f64,
    /// Window lengths of the dissipation check.
    pub dissipation_windows: Vec<f64>,
    /// Perturbation sizes of the continuity check.
    pub continuity_epsilons: Vec<f64>,
    pub continuity_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sim: SimParams::default(),
            initial: InitialSpec::Zero,
            forcing: ForcingSpec::None,
            out: None,
            checks: Check::DEFAULT.to_vec(),
            c_h2: GenericConstant::Calibrate,
            metric_terms: 20,
            energy_tol: 1e-5,
            momentum_tol: 1e-4,
            dissipation_windows: vec![0.5, 1.0],
            continuity_epsilons: vec![1e-2, 1e-3, 1e-4],
            continuity_seed: 1,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        self.sim.grid()
    }

    pub fn initial_state(&self) -> Result<SpectralVectorField, ConfigError> {
        build_initial(&self.initial, self.grid()).map_err(|m| err(0, "initial", m))
    }

    pub fn forcing_field(&self) -> Result<Forcing, ConfigError> {
        build_forcing(&self.forcing, self.grid()).map_err(|m| err(0, "forcing", m))
    }
}

fn build_initial(spec: &InitialSpec, grid: Grid) -> Result<SpectralVectorField, String> {
    match *spec {
        InitialSpec::Zero => Ok(SpectralVectorField::zeros(grid)),
        InitialSpec::TaylorGreen => Ok(taylor_green(grid)),
        InitialSpec::SingleMode { k, amplitude, direction } => {
            single_mode(grid, k, amplitude, direction).map_err(|e| e.to_string())
        }
        InitialSpec::RandomSolenoidal { seed, spectrum_slope, cutoff } => {
            random_solenoidal(grid, seed, spectrum_slope, cutoff).map_err(|e| e.to_string())
        }
    }
}

fn build_forcing(spec: &ForcingSpec, grid: Grid) -> Result<Forcing, String> {
    match *spec {
        ForcingSpec::None => Ok(Forcing::zero(grid)),
        ForcingSpec::SingleMode { k, amplitude, direction } => {
            if k[0] == 0 && k[1] == 0 {
                return Err(format!(
                    "k = {k:?} has k1 = k2 = 0: horizontal-mean obstruction, the constant K1 is undefined for such forcing"
                ));
            }
            let field = single_mode(grid, k, amplitude, direction).map_err(|e| e.to_string())?;
            Forcing::new(field).map_err(|e| e.to_string())
        }
    }
}

fn err(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

struct Entry {
    value: String,
    line: usize,
}

const KEYS: &[(&str, &[&str])] = &[
    ("sim", &["nu", "alpha", "l", "n", "dt", "dealias", "t", "sample_dt"]),
    ("initial", &["kind", "k", "amplitude", "direction", "seed", "spectrum_slope", "cutoff"]),
    ("forcing", &["kind", "k", "amplitude", "direction"]),
    (
        "run",
        &[
            "out",
            "checks",
            "c_h2",
            "metric_n",
            "energy_tol",
            "momentum_tol",
            "dissipation_r",
            "continuity_eps",
            "continuity_seed",
        ],
    ),
];

struct Table {
    entries: HashMap<(String, String), Entry>,
}

impl Table {
    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn parse<T: FromStr>(&mut self, section: &str, key: &str, what: &str) -> Result<Option<(T, usize)>, ConfigError> {
        match self.take(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(|v| Some((v, e.line)))
                .map_err(|_| err(e.line, key, format!("'{}' is not {what}", e.value))),
        }
    }

    fn real(&mut self, section: &str, key: &str) -> Result<Option<(f64, usize)>, ConfigError> {
        let v = self.parse::<f64>(section, key, "a number")?;
        if let Some((x, line)) = v {
            if !x.is_finite() {
                return Err(err(line, key, format!("{x} is not finite")));
            }
        }
        Ok(v)
    }

    fn triple<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<[T; 3]>, ConfigError> {
        let Some(e) = self.take(section, key) else {
            return Ok(None);
        };
        let inner = e.value.trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        let bad = || err(e.line, key, format!("'{}' is not a triple (a, b, c)", e.value));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut vals = parts.into_iter().map(|p| p.parse::<T>().map_err(|_| bad()));
        Ok(Some([vals.next().unwrap()?, vals.next().unwrap()?, vals.next().unwrap()?]))
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Option<(Vec<f64>, usize)>, ConfigError> {
        let Some(e) = self.take(section, key) else {
            return Ok(None);
        };
        let vals = e
            .value
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0))
            .collect::<Option<Vec<f64>>>()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| err(e.line, key, format!("'{}' is not a list of positive numbers", e.value)))?;
        Ok(Some((vals, e.line)))
    }
}

fn tokenize(text: &str) -> Result<Table, ConfigError> {
    let mut entries = HashMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line, content, "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(err(line, &name, "unknown section"));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, content, "expected 'key = value'"))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        let sec = section
            .clone()
            .ok_or_else(|| err(line, &key, "key outside of any [section]"))?;
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            return Err(err(line, &key, format!("unknown key in [{sec}]")));
        }
        if value.is_empty() {
            return Err(err(line, &key, "empty value"));
        }
        if entries.insert((sec.clone(), key.clone()), Entry { value, line }).is_some() {
            return Err(err(line, &key, format!("duplicate key in [{sec}]")));
        }
    }
    Ok(Table { entries })
}

fn mode_spec(t: &mut Table, section: &str) -> Result<([i64; 3], f64, [f64; 3]), ConfigError> {
    let k = t.triple::<i64>(section, "k")?.unwrap_or([1, 0, 0]);
    let amplitude = t.real(section, "amplitude")?.map(|v| v.0).unwrap_or(1.0);
    let direction = t.triple::<f64>(section, "direction")?.unwrap_or([0.0, 1.0, 0.0]);
    Ok((k, amplitude, direction))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut t = tokenize(text)?;
    let mut cfg = RunConfig::default();
    let mut lines: HashMap<&str, usize> = HashMap::new();

    let s = &mut cfg.sim;
    macro_rules! real_into {
        ($section:expr, $key:expr, $slot:expr) => {
            if let Some((v, line)) = t.real($section, $key)? {
                $slot = v;
                lines.insert($key, line);
            }
        };
    }
    real_into!("sim", "nu", s.nu);
    real_into!("sim", "alpha", s.alpha);
    real_into!("sim", "l", s.period_scale);
    real_into!("sim", "dt", s.dt);
    real_into!("sim", "t", s.final_time);
    real_into!("sim", "sample_dt", s.sample_dt);
    if let Some((n, line)) = t.parse::<usize>("sim", "n", "a non-negative integer")? {
        if n < 4 || n % 2 == 1 {
            return Err(err(line, "n", format!("{n} violates the constraint: n must be even and >= 4")));
        }
        s.n = n;
        lines.insert("n", line);
    }
    if let Some(e) = t.take("sim", "dealias") {
        s.dealias = e.value.parse::<Dealias>().map_err(|m| err(e.line, "dealias", m))?;
    }
    let positive = |key: &str, v: f64, strict: bool| {
        if (strict && v > 0.0) || (!strict && v >= 0.0) {
            Ok(())
        } else {
            let op = if strict { ">" } else { ">=" };
            Err(err(*lines.get(key).unwrap_or(&0), key, format!("{v} must be {op} 0")))
        }
    };
    positive("nu", s.nu, true)?;
    positive("alpha", s.alpha, false)?;
    positive("l", s.period_scale, true)?;
    positive("dt", s.dt, true)?;
    positive("t", s.final_time, false)?;
    positive("sample_dt", s.sample_dt, true)?;
    if let Err(e) = s.validate() {
        let msg = e.to_string();
        let key = if msg.contains("sample_dt") { "sample_dt" } else { "t" };
        return Err(err(*lines.get(key).unwrap_or(&0), key, msg));
    }

    let kind = t.take("initial", "kind");
    cfg.initial = match kind.as_ref().map(|e| e.value.as_str()) {
        None | Some("zero") => InitialSpec::Zero,
        Some("taylor_green") => InitialSpec::TaylorGreen,
        Some("single_mode") => {
            let (k, amplitude, direction) = mode_spec(&mut t, "initial")?;
            InitialSpec::SingleMode { k, amplitude, direction }
        }
        Some("random_solenoidal") => InitialSpec::RandomSolenoidal {
            seed: t.parse::<u64>("initial", "seed", "an unsigned integer")?.map(|v| v.0).unwrap_or(0),
            spectrum_slope: t.real("initial", "spectrum_slope")?.map(|v| v.0).unwrap_or(-2.0),
            cutoff: t.real("initial", "cutoff")?.map(|v| v.0).unwrap_or(4.0),
        },
        Some(other) => {
            return Err(err(
                kind.as_ref().unwrap().line,
                "kind",
                format!("unknown initial condition '{other}' (zero | taylor_green | single_mode | random_solenoidal)"),
            ))
        }
    };
    let init_line = kind.as_ref().map(|e| e.line).unwrap_or(0);
    build_initial(&cfg.initial, cfg.sim.grid()).map_err(|m| err(init_line, "initial", m))?;

    let kind = t.take("forcing", "kind");
    cfg.forcing = match kind.as_ref().map(|e| e.value.as_str()) {
        None | Some("none") => ForcingSpec::None,
        Some("single_mode") => {
            let (k, amplitude, direction) = mode_spec(&mut t, "forcing")?;
            ForcingSpec::SingleMode { k, amplitude, direction }
        }
        Some(other) => {
            return Err(err(
                kind.as_ref().unwrap().line,
                "kind",
                format!("unknown forcing '{other}' (none | single_mode)"),
            ))
        }
    };
    let forcing_line = kind.as_ref().map(|e| e.line).unwrap_or(0);
    build_forcing(&cfg.forcing, cfg.sim.grid()).map_err(|m| err(forcing_line, "forcing", m))?;

    if let Some(e) = t.take("run", "out") {
        cfg.out = Some(PathBuf::from(e.value));
    }
    if let Some(e) = t.take("run", "checks") {
        cfg.checks = parse_checks(&e.value).map_err(|m| err(e.line, "checks", m))?;
    }
    if let Some(e) = t.take("run", "c_h2") {
        cfg.c_h2 = if e.value == "calibrate" {
            GenericConstant::Calibrate
        } else {
            match e.value.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => GenericConstant::Fixed(v),
                _ => return Err(err(e.line, "c_h2", format!("'{}' is neither 'calibrate' nor a number >= 0", e.value))),
            }
        };
    }
    if let Some((n, line)) = t.parse::<usize>("run", "metric_n", "a positive integer")? {
        if n == 0 {
            return Err(err(line, "metric_n", "must be >= 1"));
        }
        cfg.metric_terms = n;
    }
    for (key, slot) in [("energy_tol", &mut cfg.energy_tol), ("momentum_tol", &mut cfg.momentum_tol)] {
        if let Some((v, line)) = t.real("run", key)? {
            if v <= 0.0 {
                return Err(err(line, key, "must be > 0"));
            }
            *slot = v;
        }
    }
    if let Some((v, _)) = t.list("run", "dissipation_r")? {
        cfg.dissipation_windows = v;
    }
    if let Some((v, line)) = t.list("run", "continuity_eps")? {
        if v.windows(2).any(|w| w[1] >= w[0]) {
            return Err(err(line, "continuity_eps", "values must be strictly decreasing"));
        }
        cfg.continuity_epsilons = v;
    }
    if let Some((v, _)) = t.parse::<u64>("run", "continuity_seed", "an unsigned integer")? {
        cfg.continuity_seed = v;
    }

    if let Some(((section, key), e)) = t.entries.into_iter().min_by_key(|(_, e)| e.line) {
        return Err(err(e.line, &key, format!("not used by [{section}] with the selected kind")));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse_config("[sim]\nn = 8\n").unwrap();
        assert_eq!(cfg.sim.dealias, Dealias::TwoThirds);
        assert_eq!(cfg.metric_terms, 20);
        assert_eq!(cfg.sim.n, 8);
        assert_eq!(cfg.initial, InitialSpec::Zero);
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn odd_n_names_key_and_constraint() {
        let e = parse_config("[sim]\nnu = 0.1\nn = 33\n").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (3, "n"));
        assert!(e.message.contains("even"), "{e}");
    }

    #[test]
    fn vertical_forcing_is_rejected() {
        let text = "[sim]\nn = 8\n[forcing]\nkind = single_mode\nk = (0, 0, 1)\ndirection = (1, 0, 0)\n";
        let e = parse_config(text).unwrap_err();
        assert!(e.message.contains("horizontal-mean"), "{e}");
        assert_eq!(e.line, 4);
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = parse_config("[sim]\n\nviscosity = 1\n").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (3, "viscosity"));
        assert!(parse_config("[solver]\n").is_err());
        assert!(parse_config("nu = 1\n").is_err());
        assert!(parse_config("[sim]\nnu = 1\nnu = 2\n").is_err());
    }

    #[test]
    fn full_config_parses() {
        let text = "\
# forced Taylor-Green
[sim]
nu = 0.05
alpha = 0.2
L = 2
n = 12
dt = 1e-3
dealias = none
T = 0.5
sample_dt = 0.01
[initial]
kind = random_solenoidal
seed = 7
spectrum_slope = -1.5
cutoff = 3
[forcing]
kind = single_mode
k = (1, 0, 0)
amplitude = 0.5
direction = (0, 1, 0)
[run]
out = somewhere
checks = energy, h2
C_h2 = 2.5
metric_N = 12
dissipation_r = 0.1, 0.2
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.sim.period_scale, 2.0);
        assert_eq!(cfg.sim.dealias, Dealias::None);
        assert_eq!(
            cfg.initial,
            InitialSpec::RandomSolenoidal { seed: 7, spectrum_slope: -1.5, cutoff: 3.0 }
        );
        assert_eq!(cfg.checks, vec![Check::Energy, Check::H2]);
        assert_eq!(cfg.c_h2, GenericConstant::Fixed(2.5));
        assert_eq!(cfg.metric_terms, 12);
        assert_eq!(cfg.dissipation_windows, vec![0.1, 0.2]);
        assert!(cfg.forcing_field().is_ok());
    }

    #[test]
    fn keys_for_another_kind_are_rejected() {
        let e = parse_config("[initial]\nkind = zero\nseed = 3\n").unwrap_err();
        assert_eq!(e.key, "seed");
    }

    #[test]
    fn lattice_violation_names_sample_dt() {
        let e = parse_config("[sim]\ndt = 0.01\nsample_dt = 0.015\n").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (3, "sample_dt"));
    }
}
