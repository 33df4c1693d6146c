//! Plain-text run configuration: one `key = value` pair per line, `#` starts
//! a comment, blank lines are ignored, unknown keys are rejected.
//!
//! ```text
//! # Compton bounce
//! experiment = trajectories
//! sigma = 0.1
//! omega = 2
//! q0 = 0.02 0.98, 0.10 0.90
//! ```
//!
//! Every key is listed in [`KEYS`]; see FORMATS.md for the full reference.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::initdata::{
    build_gaussian_product_with, normalize_for_x, normalize_global, CompatMode, GaussianProductSpec, InitialData,
    Normalization, TabulatedField, DEFAULT_AMPLITUDE_SEED,
};
use crate::solver::{CacheMode, Interaction, PlusPlusRoute, SolverConfig};

/// A configuration problem, located at a line and column (both 1-based).
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

/// The experiment a configuration runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Solve,
    Slice,
    Trajectories,
    Ensemble,
    Verify,
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Experiment::Solve),
            "slice" => Ok(Experiment::Slice),
            "trajectories" => Ok(Experiment::Trajectories),
            "ensemble" => Ok(Experiment::Ensemble),
            "verify" => Ok(Experiment::Verify),
            _ => Err(format!("unknown experiment '{s}' (solve, slice, trajectories, ensemble, verify)")),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Solve => "solve",
            Experiment::Slice => "slice",
            Experiment::Trajectories => "trajectories",
            Experiment::Ensemble => "ensemble",
            Experiment::Verify => "verify",
        };
        f.write_str(s)
    }
}

/// How the initial amplitudes of the Gaussian product are chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Amplitudes {
    /// Seeded random draw subject to compatibility.
    Random,
    /// All four amplitudes equal to one.
    Equal,
    /// Explicit (re, im) pairs for ψ₋₋, ψ₋₊, ψ₊₋, ψ₊₊.
    Explicit([(f64, f64); 4]),
}

/// All recognised keys.
pub const KEYS: &[&str] = &[
    "experiment",
    "output",
    "sigma",
    "separation",
    "theta",
    "amplitudes",
    "amplitudes_re",
    "amplitudes_im",
    "amplitude_seed",
    "truncate",
    "compat",
    "normalization",
    "data_file",
    "omega",
    "quad_tol",
    "char_grid_h",
    "cache_mode",
    "pp_route",
    "interaction",
    "times",
    "points",
    "csv_stride",
    "grid_n",
    "dt",
    "t_max",
    "q0",
    "n",
    "seed",
    "checkpoints",
    "theta_sweep",
    "free_overlay",
    "marginal_cells",
    "probe_count",
    "probe_seed",
    "rapidity",
    "conservation_cells",
    "mutations",
];

/// A fully parsed run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub output: String,
    pub sigma: f64,
    pub separation: f64,
    pub theta: f64,
    pub amplitudes: Amplitudes,
    pub amplitude_seed: u64,
    pub truncate: Option<f64>,
    pub compat: CompatMode,
    pub normalization: Normalization,
    pub data_file: Option<String>,
    pub omega: f64,
    pub quad_tol: f64,
    pub char_grid_h: f64,
    pub cache_mode: CacheMode,
    pub pp_route: PlusPlusRoute,
    pub interaction: Interaction,
    /// Slice / solve times.
    pub times: Vec<f64>,
    /// Explicit (t_ph, s_ph, t_el, s_el) points for `solve`; empty means the
    /// equal-time grids at `times`.
    pub points: Vec<[f64; 4]>,
    /// Points per axis of slice and solve grids.
    pub grid_n: usize,
    /// Write every `csv_stride`-th trajectory sample (the last one always).
    pub csv_stride: usize,
    pub dt: f64,
    pub t_max: f64,
    pub q0: Vec<(f64, f64)>,
    pub n: usize,
    pub seed: u64,
    pub checkpoints: Vec<f64>,
    pub theta_sweep: Vec<f64>,
    pub free_overlay: bool,
    pub marginal_cells: usize,
    pub probe_count: usize,
    pub probe_seed: u64,
    pub rapidity: f64,
    pub conservation_cells: usize,
    pub mutations: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            output: "out".into(),
            sigma: 0.1,
            separation: 1.0,
            theta: 0.0,
            amplitudes: Amplitudes::Random,
            amplitude_seed: DEFAULT_AMPLITUDE_SEED,
            truncate: None,
            compat: CompatMode::Separation,
            normalization: Normalization::RestFrame,
            data_file: None,
            omega: 2.0,
            quad_tol: 1e-10,
            char_grid_h: 1e-3,
            cache_mode: CacheMode::GridInterpolated,
            pp_route: PlusPlusRoute::Reduced,
            interaction: Interaction::Reflecting,
            times: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            points: Vec::new(),
            grid_n: 101,
            csv_stride: 1,
            dt: 1e-3,
            t_max: 1.0,
            q0: vec![(0.02, 0.98)],
            n: 100,
            seed: 1,
            checkpoints: vec![0.25, 0.5],
            theta_sweep: Vec::new(),
            free_overlay: true,
            marginal_cells: 360,
            probe_count: 100,
            probe_seed: 7,
            rapidity: 0.3,
            conservation_cells: 100,
            mutations: true,
        }
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{v}' is not finite"));
    }
    Ok(x)
}

fn parse_positive(v: &str) -> Result<f64, String> {
    let x = parse_f64(v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {v}"))
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split([',', ' ', '\t']).filter(|s| !s.is_empty()).map(parse_f64).collect()
}

fn parse_count(v: &str) -> Result<usize, String> {
    let n: usize = v.parse().map_err(|_| format!("'{v}' is not a non-negative integer"))?;
    Ok(n)
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("'{v}' is not a boolean (true/false)")),
    }
}

fn parse_pairs(v: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for item in v.split(',') {
        let nums: Vec<f64> = item.split_whitespace().map(parse_f64).collect::<Result<_, _>>()?;
        if nums.len() != 2 {
            return Err(format!("'{}' is not a pair of numbers", item.trim()));
        }
        out.push((nums[0], nums[1]));
    }
    if out.is_empty() {
        return Err("expected at least one pair".into());
    }
    Ok(out)
}

impl RunConfig {
    /// Parses configuration text. Text without any key is an error.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cfg = RunConfig::default();
        let mut seen = 0usize;
        let mut keys_seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(ParseError::new(line, col, "expected 'key = value'"));
            };
            let key_part = &content[..eq];
            let key = key_part.trim();
            let key_col = key_part.len() - key_part.trim_start().len() + 1;
            let val_part = &content[eq + 1..];
            let value = val_part.trim();
            let val_col = eq + 2 + (val_part.len() - val_part.trim_start().len());
            let Some(known) = KEYS.iter().copied().find(|k| *k == key) else {
                return Err(ParseError::new(line, key_col, format!("unknown key '{key}'")));
            };
            if keys_seen.contains(&known) {
                return Err(ParseError::new(line, key_col, format!("duplicate key '{key}'")));
            }
            keys_seen.push(known);
            if value.is_empty() {
                return Err(ParseError::new(line, val_col, format!("missing value for '{key}'")));
            }
            let mixes =
                |a: &str, b: &str| (known == a && keys_seen.contains(&b)) || (known == b && keys_seen.contains(&a));
            if mixes("amplitudes", "amplitudes_re") || mixes("amplitudes", "amplitudes_im") {
                return Err(ParseError::new(
                    line,
                    key_col,
                    "use either 'amplitudes' or 'amplitudes_re'/'amplitudes_im'",
                ));
            }
            cfg.set(key, value).map_err(|m| ParseError::new(line, val_col, m))?;
            seen += 1;
        }
        if seen == 0 {
            return Err(ParseError::new(1, 1, "configuration is empty"));
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "experiment" => self.experiment = Some(value.parse()?),
            "output" => self.output = value.to_string(),
            "sigma" => self.sigma = parse_positive(value)?,
            "separation" => {
                let d = parse_f64(value)?;
                if d < 0.0 {
                    return Err("separation must be non-negative".into());
                }
                self.separation = d;
            }
            "theta" => self.theta = parse_f64(value)?,
            "amplitudes" => {
                self.amplitudes = match value {
                    "random" => Amplitudes::Random,
                    "equal" => Amplitudes::Equal,
                    _ => {
                        let v = parse_list(value)?;
                        if v.len() != 8 {
                            return Err(
                                "amplitudes: expected 'random', 'equal' or 8 numbers (re im per component)".into()
                            );
                        }
                        Amplitudes::Explicit([(v[0], v[1]), (v[2], v[3]), (v[4], v[5]), (v[6], v[7])])
                    }
                }
            }
            "amplitudes_re" | "amplitudes_im" => {
                let v = parse_list(value)?;
                if v.len() != 4 {
                    return Err(format!("{key}: expected 4 numbers (mm, mp, pm, pp)"));
                }
                let mut a = match self.amplitudes {
                    Amplitudes::Explicit(a) => a,
                    _ => [(0.0, 0.0); 4],
                };
                for (slot, x) in a.iter_mut().zip(v) {
                    if key == "amplitudes_re" {
                        slot.0 = x;
                    } else {
                        slot.1 = x;
                    }
                }
                self.amplitudes = Amplitudes::Explicit(a);
            }
            "amplitude_seed" => self.amplitude_seed = value.parse().map_err(|_| format!("'{value}' is not a seed"))?,
            "truncate" => self.truncate = if value == "none" { None } else { Some(parse_positive(value)?) },
            "compat" => {
                self.compat = match value {
                    "separation" => CompatMode::Separation,
                    "pinned" => CompatMode::Pinned,
                    _ => return Err(format!("compat must be 'separation' or 'pinned', got '{value}'")),
                }
            }
            "normalization" => {
                self.normalization = match value {
                    "rest_frame" => Normalization::RestFrame,
                    "global" => Normalization::GlobalOnly,
                    _ => return Err(format!("normalization must be 'rest_frame' or 'global', got '{value}'")),
                }
            }
            "data_file" => self.data_file = Some(value.to_string()),
            "omega" => self.omega = parse_positive(value)?,
            "quad_tol" => self.quad_tol = parse_positive(value)?,
            "char_grid_h" => self.char_grid_h = parse_positive(value)?,
            "cache_mode" => {
                self.cache_mode = match value {
                    "grid" => CacheMode::GridInterpolated,
                    "direct" => CacheMode::DirectNested,
                    _ => return Err(format!("cache_mode must be 'grid' or 'direct', got '{value}'")),
                }
            }
            "pp_route" => {
                self.pp_route = match value {
                    "reduced" => PlusPlusRoute::Reduced,
                    "characteristic" => PlusPlusRoute::Characteristic,
                    _ => return Err(format!("pp_route must be 'reduced' or 'characteristic', got '{value}'")),
                }
            }
            "interaction" => {
                self.interaction = match value {
                    "reflecting" => Interaction::Reflecting,
                    "free" => Interaction::Free,
                    _ => return Err(format!("interaction must be 'reflecting' or 'free', got '{value}'")),
                }
            }
            "times" => {
                let v = parse_list(value)?;
                if v.iter().any(|t| *t < 0.0) {
                    return Err("times must be non-negative".into());
                }
                self.times = v;
            }
            "grid_n" => {
                let n = parse_count(value)?;
                if !(2..=4001).contains(&n) {
                    return Err("grid_n must be in 2..=4001".into());
                }
                self.grid_n = n;
            }
            "points" => {
                let mut pts = Vec::new();
                for item in value.split(',') {
                    let v: Vec<f64> = item.split_whitespace().map(parse_f64).collect::<Result<_, _>>()?;
                    if v.len() != 4 {
                        return Err(format!("'{}' is not a point 't_ph s_ph t_el s_el'", item.trim()));
                    }
                    pts.push([v[0], v[1], v[2], v[3]]);
                }
                self.points = pts;
            }
            "csv_stride" => {
                let n = parse_count(value)?;
                if n == 0 {
                    return Err("csv_stride must be positive".into());
                }
                self.csv_stride = n;
            }
            "dt" => self.dt = parse_positive(value)?,
            "t_max" => self.t_max = parse_positive(value)?,
            "q0" => self.q0 = parse_pairs(value)?,
            "n" => self.n = parse_count(value)?,
            "seed" => self.seed = value.parse().map_err(|_| format!("'{value}' is not a seed"))?,
            "checkpoints" => {
                let v = parse_list(value)?;
                if v.iter().any(|t| *t <= 0.0) {
                    return Err("checkpoints must be positive".into());
                }
                self.checkpoints = v;
            }
            "theta_sweep" => self.theta_sweep = parse_list(value)?,
            "free_overlay" => self.free_overlay = parse_bool(value)?,
            "marginal_cells" => {
                let n = parse_count(value)?;
                if n == 0 {
                    return Err("marginal_cells must be positive".into());
                }
                self.marginal_cells = n;
            }
            "probe_count" => self.probe_count = parse_count(value)?,
            "probe_seed" => self.probe_seed = value.parse().map_err(|_| format!("'{value}' is not a seed"))?,
            "rapidity" => {
                let a = parse_f64(value)?;
                if a.abs() > 0.5 {
                    return Err("rapidity must satisfy |a| <= 0.5".into());
                }
                self.rapidity = a;
            }
            "conservation_cells" => {
                let n = parse_count(value)?;
                if n == 0 {
                    return Err("conservation_cells must be positive".into());
                }
                self.conservation_cells = n;
            }
            "mutations" => self.mutations = parse_bool(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Solver settings of this configuration.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            omega: self.omega,
            quad_tol: self.quad_tol,
            char_grid_h: self.char_grid_h,
            cache_mode: self.cache_mode,
            pp_route: self.pp_route,
            interaction: self.interaction,
        }
    }

    /// Gaussian-product spec of this configuration.
    pub fn gaussian_spec(&self) -> GaussianProductSpec {
        let amplitudes = match &self.amplitudes {
            Amplitudes::Random => GaussianProductSpec::random_amplitudes(self.amplitude_seed, self.theta),
            Amplitudes::Equal => [Complex64::new(1.0, 0.0); 4],
            Amplitudes::Explicit(a) => a.map(|(re, im)| Complex64::new(re, im)),
        };
        GaussianProductSpec {
            sigma: self.sigma,
            separation: self.separation,
            amplitudes,
            theta: self.theta,
            truncate: self.truncate,
            compat: self.compat,
        }
    }

    /// Builds the initial data: the tabulated file when `data_file` is set,
    /// the Gaussian product otherwise.
    pub fn initial_data(&self) -> Result<InitialData, DataError> {
        match &self.data_file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| DataError::Io(format!("{path}: {e}")))?;
                let field = TabulatedField::from_csv(&text)?;
                let raw = InitialData::with_frame(
                    Arc::new(field),
                    self.theta,
                    crate::initdata::KillingVector::REST,
                    format!("tabulated: {path}"),
                )?;
                Ok(match self.normalization {
                    Normalization::RestFrame => normalize_for_x(&raw)?,
                    Normalization::GlobalOnly => normalize_global(&raw)?,
                })
            }
            None => Ok(build_gaussian_product_with(&self.gaussian_spec(), self.normalization)?),
        }
    }
}

/// Failure to build initial data from a configuration.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read data file {0}")]
    Io(String),
    #[error(transparent)]
    Numeric(#[from] crate::error::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_lists() {
        let cfg =
            RunConfig::parse("# header\nomega = 1.5 # inline\n\ntimes = 0, 0.5 1\nq0 = 0.02 0.98, 0.1 0.9\n").unwrap();
        assert_eq!(cfg.omega, 1.5);
        assert_eq!(cfg.times, vec![0.0, 0.5, 1.0]);
        assert_eq!(cfg.q0, vec![(0.02, 0.98), (0.1, 0.9)]);
    }

    #[test]
    fn errors_carry_positions() {
        let e = RunConfig::parse("omega = 2\n  bogus = 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = RunConfig::parse("sigma =  -1\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 10));
        let e = RunConfig::parse("# nothing\n\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(RunConfig::parse("omega\n").is_err());
        assert!(RunConfig::parse("omega = 1\nomega = 2\n").is_err());
    }
}
