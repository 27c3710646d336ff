//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! params.H = 1.0
//! params.chi = 1.0
//! grid.M = 101
//! model.response = holling2
//! init.p.profile = gaussian-bump
//! init.p.center = 0.3
//! ```
//!
//! Unknown keys are rejected, missing keys take the defaults below. A config
//! serialized with [`RunConfig::to_config_string`] parses back to the same
//! value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{FunctionalResponse, Grid, LightModel, Model, Parameters, State};
use crate::timestepper::SolverConfig;

const PARAM_KEYS: [&str; 10] = [
    "params.D",
    "params.H",
    "params.chi",
    "params.m",
    "params.m_p",
    "params.k",
    "params.r",
    "params.gamma",
    "params.nu",
    "params.n_H",
];

const PROFILE_FIELDS: [&str; 7] = [
    "profile",
    "base",
    "center",
    "width",
    "amplitude",
    "k",
    "path",
];

fn is_known_key(key: &str) -> bool {
    if PARAM_KEYS.contains(&key) {
        return true;
    }
    if let Some(rest) = key
        .strip_prefix("init.n.")
        .or_else(|| key.strip_prefix("init.p."))
    {
        return PROFILE_FIELDS.contains(&rest);
    }
    matches!(
        key,
        "grid.M"
            | "model.light"
            | "model.response"
            | "solver.dt"
            | "solver.t_end"
            | "solver.scheme"
            | "solver.snapshot_every"
            | "solver.positivity_tol"
            | "solver.clamp"
            | "init.z"
            | "analysis.window_start"
            | "analysis.window_end"
            | "output.dir"
            | "seed"
    )
}

/// Whether `key` holds a number (and so can be swept).
pub fn is_numeric_key(key: &str) -> bool {
    if PARAM_KEYS.contains(&key) {
        return true;
    }
    if let Some(rest) = key
        .strip_prefix("init.n.")
        .or_else(|| key.strip_prefix("init.p."))
    {
        return matches!(rest, "base" | "center" | "width" | "amplitude" | "k");
    }
    matches!(
        key,
        "grid.M"
            | "solver.dt"
            | "solver.t_end"
            | "solver.snapshot_every"
            | "solver.positivity_tol"
            | "init.z"
            | "analysis.window_start"
            | "analysis.window_end"
            | "seed"
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RawEntry {
    value: String,
    line: usize,
}

/// Parsed but unvalidated key-value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<String, RawEntry>,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw_line).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
            {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("invalid key `{key}`"),
                });
            }
            let mut value = value.trim();
            if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
                value = &value[1..value.len() - 1];
            } else if value.contains('"') {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unbalanced quotes in value of `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("empty value for `{key}`"),
                });
            }
            let entry = RawEntry {
                value: value.to_string(),
                line: line_no,
            };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}` (first set on line {})", prev.line),
                });
            }
        }
        Ok(RawConfig { entries })
    }

    /// Copy with `key` set to `value`, as if it were appended to the file.
    pub fn with_override(&self, key: &str, value: &str) -> Self {
        let mut out = self.clone();
        out.entries.insert(
            key.to_string(),
            RawEntry {
                value: value.to_string(),
                line: 0,
            },
        );
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::Validation {
                    key: key.to_string(),
                    message: format!("`{v}` is not a finite number"),
                }),
            })
            .transpose()
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn integer_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| Error::Validation {
                key: key.to_string(),
                message: format!("`{v}` is not a nonnegative integer"),
            }),
        }
    }

    fn parsed_or<T: std::str::FromStr<Err = String>>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|message| Error::Validation {
                key: key.to_string(),
                message,
            }),
        }
    }
}

/// Named initial profile of one field.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `base + amplitude * exp(-((h - center) / width)^2)`
    GaussianBump {
        base: f64,
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// `base + amplitude * cos(k π h / H)`
    CosineMode {
        base: f64,
        k: u64,
        amplitude: f64,
    },
    /// `base + amplitude * U[0, 1)` per node, drawn from the run seed.
    Random {
        base: f64,
        amplitude: f64,
    },
    /// Column `n` or `p` of a `h,n,p` CSV file.
    FromFile {
        path: PathBuf,
    },
}

impl Profile {
    fn name(&self) -> &'static str {
        match self {
            Profile::Constant { .. } => "constant",
            Profile::GaussianBump { .. } => "gaussian-bump",
            Profile::CosineMode { .. } => "cosine-mode",
            Profile::Random { .. } => "random",
            Profile::FromFile { .. } => "from-file",
        }
    }

    fn parse(
        raw: &RawConfig,
        field: &str,
        default_kind: &str,
        depth: f64,
        constant_default: f64,
    ) -> Result<Self> {
        let key = |name: &str| format!("init.{field}.{name}");
        let profile_key = key("profile");
        let kind = raw.get(&profile_key).unwrap_or(default_kind);
        let allowed: &[&str] = match kind {
            "constant" => &["base"],
            "gaussian-bump" => &["base", "center", "width", "amplitude"],
            "cosine-mode" => &["base", "k", "amplitude"],
            "random" => &["base", "amplitude"],
            "from-file" => &["path"],
            other => {
                return Err(Error::Validation {
                    key: profile_key,
                    message: format!(
                        "unknown profile `{other}` \
                         (expected constant | gaussian-bump | cosine-mode | random | from-file)"
                    ),
                })
            }
        };
        for name in PROFILE_FIELDS.iter().skip(1) {
            if raw.get(&key(name)).is_some() && !allowed.contains(name) {
                return Err(Error::Validation {
                    key: key(name),
                    message: format!("does not apply to profile `{kind}`"),
                });
            }
        }
        let profile = match kind {
            "constant" => Profile::Constant {
                value: raw.number_or(&key("base"), constant_default)?,
            },
            "gaussian-bump" => {
                let width = raw.number_or(&key("width"), 0.1 * depth)?;
                if width <= 0.0 {
                    return Err(Error::Validation {
                        key: key("width"),
                        message: "width must be > 0".into(),
                    });
                }
                Profile::GaussianBump {
                    base: raw.number_or(&key("base"), 0.0)?,
                    center: raw.number_or(&key("center"), 0.5 * depth)?,
                    width,
                    amplitude: raw.number_or(&key("amplitude"), 1.0)?,
                }
            }
            "cosine-mode" => Profile::CosineMode {
                base: raw.number_or(&key("base"), 1.0)?,
                k: raw.integer_or(&key("k"), 1)?,
                amplitude: raw.number_or(&key("amplitude"), 0.5)?,
            },
            "random" => Profile::Random {
                base: raw.number_or(&key("base"), 0.0)?,
                amplitude: raw.number_or(&key("amplitude"), 1.0)?,
            },
            _ => {
                let path_key = key("path");
                let path = PathBuf::from(raw.get(&path_key).ok_or_else(|| Error::Validation {
                    key: path_key.clone(),
                    message: "from-file profile needs a path".into(),
                })?);
                if !path.is_file() {
                    return Err(Error::MissingFile(path));
                }
                Profile::FromFile { path }
            }
        };
        Ok(profile)
    }

    fn write(&self, out: &mut String, field: &str) {
        let _ = writeln!(out, "init.{field}.profile = {}", self.name());
        let mut put = |name: &str, v: String| {
            let _ = writeln!(out, "init.{field}.{name} = {v}");
        };
        match self {
            Profile::Constant { value } => put("base", format!("{value:?}")),
            Profile::GaussianBump {
                base,
                center,
                width,
                amplitude,
            } => {
                put("base", format!("{base:?}"));
                put("center", format!("{center:?}"));
                put("width", format!("{width:?}"));
                put("amplitude", format!("{amplitude:?}"));
            }
            Profile::CosineMode { base, k, amplitude } => {
                put("base", format!("{base:?}"));
                put("k", k.to_string());
                put("amplitude", format!("{amplitude:?}"));
            }
            Profile::Random { base, amplitude } => {
                put("base", format!("{base:?}"));
                put("amplitude", format!("{amplitude:?}"));
            }
            Profile::FromFile { path } => put("path", format!("\"{}\"", path.display())),
        }
    }

    fn sample(&self, field: &str, grid: &Grid, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let h = grid.depth();
        Ok(match *self {
            Profile::Constant { value } => vec![value; grid.len()],
            Profile::GaussianBump {
                base,
                center,
                width,
                amplitude,
            } => grid
                .nodes()
                .map(|x| base + amplitude * (-((x - center) / width).powi(2)).exp())
                .collect(),
            Profile::CosineMode { base, k, amplitude } => grid
                .nodes()
                .map(|x| base + amplitude * (k as f64 * std::f64::consts::PI * x / h).cos())
                .collect(),
            Profile::Random { base, amplitude } => (0..grid.len())
                .map(|_| base + amplitude * rng.random::<f64>())
                .collect(),
            Profile::FromFile { ref path } => read_profile_column(path, field, grid)?,
        })
    }
}

fn read_profile_column(path: &Path, field: &str, grid: &Grid) -> Result<Vec<f64>> {
    let bad = |message: String| Error::DataFile {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let column = header
        .split(',')
        .position(|c| c.trim() == field)
        .ok_or_else(|| bad(format!("no `{field}` column in header `{header}`")))?;
    let values = lines
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .nth(column)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: cannot read `{field}`", i + 2)))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != grid.len() {
        return Err(bad(format!(
            "{} rows, grid has {} nodes",
            values.len(),
            grid.len()
        )));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub n: Profile,
    pub p: Profile,
    pub z: f64,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: Parameters,
    pub nodes: usize,
    pub light: LightModel,
    pub response: FunctionalResponse,
    pub solver: SolverConfig,
    pub init: InitialCondition,
    /// Extinction-fit window; defaults to the second half of the run.
    pub window_start: Option<f64>,
    pub window_end: Option<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    RunConfig::from_raw(&RawConfig::parse(text)?)
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        if let Some((key, entry)) = raw.entries.iter().find(|(k, _)| !is_known_key(k)) {
            return Err(Error::UnknownKey {
                key: key.clone(),
                line: entry.line,
            });
        }
        let d = Parameters::default();
        let params = Parameters {
            diffusivity: raw.number_or("params.D", d.diffusivity)?,
            depth: raw.number_or("params.H", d.depth)?,
            chi: raw.number_or("params.chi", d.chi)?,
            zoo_mortality: raw.number_or("params.m", d.zoo_mortality)?,
            phyto_mortality: raw.number_or("params.m_p", d.phyto_mortality)?,
            food_utilization: raw.number_or("params.k", d.food_utilization)?,
            uptake_rate: raw.number_or("params.r", d.uptake_rate)?,
            light_attenuation: raw.number_or("params.gamma", d.light_attenuation)?,
            self_shading: raw.number_or("params.nu", d.self_shading)?,
            boundary_nutrient: raw.number_or("params.n_H", d.boundary_nutrient)?,
        };
        params.validate().map_err(|e| match e {
            Error::InvalidParameter(message) => {
                let name = message.split_whitespace().next().unwrap_or_default();
                Error::Validation {
                    key: format!("params.{name}"),
                    message,
                }
            }
            other => other,
        })?;

        let nodes = raw.integer_or("grid.M", 101)?;
        if nodes < 3 {
            return Err(Error::Validation {
                key: "grid.M".into(),
                message: "M must be >= 3".into(),
            });
        }

        let sd = SolverConfig::default();
        let solver = SolverConfig {
            dt: raw.number_or("solver.dt", sd.dt)?,
            t_end: raw.number_or("solver.t_end", sd.t_end)?,
            scheme: raw.parsed_or("solver.scheme", sd.scheme)?,
            snapshot_every: raw.integer_or("solver.snapshot_every", sd.snapshot_every as u64)?
                as usize,
            positivity_tol: raw.number_or("solver.positivity_tol", sd.positivity_tol)?,
            clamp: match raw.get("solver.clamp") {
                None => sd.clamp,
                Some("true") => true,
                Some("false") => false,
                Some(v) => {
                    return Err(Error::Validation {
                        key: "solver.clamp".into(),
                        message: format!("`{v}` is not true or false"),
                    })
                }
            },
        };
        solver.validate().map_err(|e| match e {
            Error::InvalidParameter(message) => {
                let name = message.split_whitespace().next().unwrap_or_default();
                Error::Validation {
                    key: format!("solver.{name}"),
                    message,
                }
            }
            other => other,
        })?;

        let z = raw.number_or("init.z", 0.1)?;
        let init = InitialCondition {
            n: Profile::parse(raw, "n", "constant", params.depth, params.boundary_nutrient)?,
            p: Profile::parse(raw, "p", "gaussian-bump", params.depth, 0.0)?,
            z,
        };

        let window_start = raw.number("analysis.window_start")?;
        let window_end = raw.number("analysis.window_end")?;
        let (ws, we) = (
            window_start.unwrap_or(0.5 * solver.t_end),
            window_end.unwrap_or(solver.t_end),
        );
        if (window_start.is_some() || window_end.is_some())
            && !(0.0 <= ws && ws < we && we <= solver.t_end)
        {
            return Err(Error::Validation {
                key: "analysis.window_start".into(),
                message: format!("window [{ws}, {we}] must satisfy 0 <= start < end <= t_end"),
            });
        }

        Ok(RunConfig {
            params,
            nodes: nodes as usize,
            light: raw.parsed_or("model.light", LightModel::ExponentialDecay)?,
            response: raw.parsed_or("model.response", FunctionalResponse::HollingII)?,
            solver,
            init,
            window_start,
            window_end,
            output_dir: PathBuf::from(raw.get("output.dir").unwrap_or("out")),
            seed: raw.integer_or("seed", 0)?,
        })
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.params, self.light, self.response)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.params.depth, self.nodes)
    }

    pub fn extinction_window(&self) -> (f64, f64) {
        (
            self.window_start.unwrap_or(0.5 * self.solver.t_end),
            self.window_end.unwrap_or(self.solver.t_end),
        )
    }

    /// Initial state at `t = 0`. Random profiles draw from `seed`, nutrient first.
    pub fn initial_state(&self, grid: &Grid) -> Result<State> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.init.n.sample("n", grid, &mut rng)?;
        let p = self.init.p.sample("p", grid, &mut rng)?;
        Ok(State::new(n, p, self.init.z, 0.0))
    }

    /// Serializes every key explicitly.
    pub fn to_config_string(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let values = [
            p.diffusivity,
            p.depth,
            p.chi,
            p.zoo_mortality,
            p.phyto_mortality,
            p.food_utilization,
            p.uptake_rate,
            p.light_attenuation,
            p.self_shading,
            p.boundary_nutrient,
        ];
        for (key, v) in PARAM_KEYS.iter().zip(values) {
            let _ = writeln!(out, "{key} = {v:?}");
        }
        let s = &self.solver;
        let _ = writeln!(out, "grid.M = {}", self.nodes);
        let _ = writeln!(out, "model.light = {}", self.light);
        let _ = writeln!(out, "model.response = {}", self.response);
        let _ = writeln!(out, "solver.dt = {:?}", s.dt);
        let _ = writeln!(out, "solver.t_end = {:?}", s.t_end);
        let _ = writeln!(out, "solver.scheme = {}", s.scheme);
        let _ = writeln!(out, "solver.snapshot_every = {}", s.snapshot_every);
        let _ = writeln!(out, "solver.positivity_tol = {:?}", s.positivity_tol);
        let _ = writeln!(out, "solver.clamp = {}", s.clamp);
        self.init.n.write(&mut out, "n");
        self.init.p.write(&mut out, "p");
        let _ = writeln!(out, "init.z = {:?}", self.init.z);
        if let Some(v) = self.window_start {
            let _ = writeln!(out, "analysis.window_start = {v:?}");
        }
        if let Some(v) = self.window_end {
            let _ = writeln!(out, "analysis.window_end = {v:?}");
        }
        let _ = writeln!(out, "output.dir = \"{}\"", self.output_dir.display());
        let _ = writeln!(out, "seed = {}", self.seed);
        out
    }
}
