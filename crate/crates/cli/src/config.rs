//! Flat `key = value` experiment files.
//!
//! Keys before any section header, or under `[experiment]`, apply to every
//! command; `[simulate]`, `[sweep]` and `[demo-impossibility]` sections
//! override them for that command only. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use onebit_core::harness::ExperimentConfig;
use onebit_core::scenario::DEFAULT_MAX_REJECTS;
use onebit_core::{CoinMode, Error as CoreError, Protocol, Scenario, Schedule};

pub const COMMON_SECTION: &str = "experiment";
pub const SECTIONS: [&str; 4] = [COMMON_SECTION, "simulate", "sweep", "demo-impossibility"];

const KEYS: [&str; 17] = [
    "protocol",
    "scenario",
    "r0",
    "beta",
    "c0",
    "gamma",
    "clamp",
    "n",
    "n_grid",
    "replications",
    "test_points",
    "seed",
    "coin_mode",
    "default_label",
    "max_rejects",
    "grid_points",
    "c",
];

pub const DEMO_DEFAULT_GRID: [u64; 5] = [100, 1_000, 10_000, 100_000, 1_000_000];
pub const DEMO_DEFAULT_C: f64 = 2.0;
pub const DEMO_DEFAULT_GRID_POINTS: usize = 101;

/// A problem with one configuration key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { key: key.into(), reason: reason.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.reason)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    Demo,
}

impl Command {
    pub fn section(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Sweep => "sweep",
            Self::Demo => "demo-impossibility",
        }
    }
}

/// Parsed file: section name to its key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl FromStr for ConfigFile {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut file = Self::default();
        let mut section = COMMON_SECTION.to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(format!("line {}", lineno + 1), "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::new(
                        format!("[{name}]"),
                        format!("unknown section, expected one of {}", SECTIONS.join(", ")),
                    ));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(format!("line {}", lineno + 1), "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) && !key.starts_with("scenario.") {
                return Err(ConfigError::new(key, "unknown key"));
            }
            let entries = file.sections.entry(section.clone()).or_default();
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::new(key, format!("set twice in [{section}]")));
            }
        }
        Ok(file)
    }
}

impl ConfigFile {
    /// Effective keys for `command`: the common section overlaid with the
    /// command's own section.
    pub fn resolve(&self, command: Command) -> BTreeMap<String, String> {
        let mut out = self.sections.get(COMMON_SECTION).cloned().unwrap_or_default();
        if let Some(own) = self.sections.get(command.section()) {
            out.extend(own.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
        out
    }
}

fn parse<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|e| ConfigError::new(key, format!("cannot parse `{v}`: {e}"))))
        .transpose()
}

fn parse_grid(key: &str, value: &str) -> Result<Vec<u64>, ConfigError> {
    value
        .split(',')
        .map(|v| {
            let v = v.trim();
            // Allow `1e5` style sizes.
            v.parse::<u64>().or_else(|_| match v.parse::<f64>() {
                Ok(f) if f.fract() == 0.0 && f >= 0.0 && f < 2f64.powi(63) => Ok(f as u64),
                _ => Err(ConfigError::new(key, format!("`{v}` is not a non-negative integer"))),
            })
        })
        .collect()
}

fn core_error(e: CoreError) -> ConfigError {
    match e {
        CoreError::ScenarioParam { key, reason } => ConfigError::new(format!("scenario.{key}"), reason),
        CoreError::UnknownScenario(id) => {
            ConfigError::new("scenario", format!("unknown scenario `{id}`, expected one of {}", Scenario::IDS.join(", ")))
        }
        CoreError::UnknownProtocol(id) => ConfigError::new("protocol", format!("unknown protocol `{id}`")),
        CoreError::Schedule(msg) => {
            let key = msg.split_whitespace().next().unwrap_or("schedule").to_string();
            ConfigError::new(key, msg)
        }
        CoreError::Config(msg) => match msg.split_once(": ") {
            Some((key, reason)) if !key.contains(' ') => ConfigError::new(key, reason),
            _ => ConfigError::new("config", msg),
        },
        other => ConfigError::new("config", other.to_string()),
    }
}

/// Options for the impossibility demonstration beyond the experiment itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoOptions {
    pub grid_points: usize,
    pub c: f64,
}

/// Builds the experiment for `command` from resolved keys.
pub fn experiment(map: &BTreeMap<String, String>, command: Command) -> Result<(ExperimentConfig, DemoOptions), ConfigError> {
    let demo = command == Command::Demo;
    let protocol = match map.get("protocol") {
        Some(p) => p.parse::<Protocol>().map_err(core_error)?,
        None if demo => Protocol::RegNoAbstain,
        None => return Err(ConfigError::new("protocol", "required")),
    };
    if demo && protocol != Protocol::RegNoAbstain {
        return Err(ConfigError::new("protocol", "the demonstration runs reg_noabstain only"));
    }
    let params: BTreeMap<String, String> = map
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("scenario.").map(|k| (k.to_string(), v.clone())))
        .collect();
    let scenario = match map.get("scenario") {
        Some(id) => Scenario::from_params(id, &params).map_err(core_error)?,
        None if demo && params.is_empty() => Scenario::sine_1d(0.1),
        None => return Err(ConfigError::new("scenario", "required")),
    };

    let defaults = Schedule::default();
    let c: f64 = parse(map, "c")?.unwrap_or(DEMO_DEFAULT_C);
    let mut schedule = Schedule {
        r0: parse(map, "r0")?.unwrap_or(defaults.r0),
        beta: parse(map, "beta")?.unwrap_or(defaults.beta),
        c0: parse(map, "c0")?.unwrap_or(defaults.c0),
        gamma: parse(map, "gamma")?.unwrap_or(defaults.gamma),
        clamp: parse(map, "clamp")?,
    };
    if demo {
        // The demonstration needs a fixed scale c.
        schedule.c0 = c;
        schedule.gamma = 0.0;
        schedule.clamp = Some(c);
    }
    schedule.check().map_err(core_error)?;

    let n_grid = match command {
        Command::Simulate => vec![parse::<u64>(map, "n")?.ok_or_else(|| ConfigError::new("n", "required"))?],
        Command::Sweep => match map.get("n_grid") {
            Some(v) => parse_grid("n_grid", v)?,
            None => return Err(ConfigError::new("n_grid", "required")),
        },
        Command::Demo => match map.get("n_grid") {
            Some(v) => parse_grid("n_grid", v)?,
            None => DEMO_DEFAULT_GRID.to_vec(),
        },
    };

    let config = ExperimentConfig {
        protocol,
        scenario,
        schedule,
        n_grid,
        replications: parse(map, "replications")?.unwrap_or(20),
        test_points: parse(map, "test_points")?.unwrap_or(2000),
        master_seed: parse(map, "seed")?.unwrap_or(0),
        coin_mode: map.get("coin_mode").map(|v| v.parse::<CoinMode>()).transpose().map_err(core_error)?.unwrap_or_default(),
        default_label: parse(map, "default_label")?.unwrap_or(0),
        max_rejects: parse(map, "max_rejects")?.unwrap_or(DEFAULT_MAX_REJECTS),
    };
    config.validate().map_err(core_error)?;
    let options = DemoOptions { grid_points: parse(map, "grid_points")?.unwrap_or(DEMO_DEFAULT_GRID_POINTS), c };
    Ok((config, options))
}

/// The resolved configuration as `key = value` lines; feeding them back
/// through [`experiment`] reproduces `config`.
pub fn echo(config: &ExperimentConfig) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        out.insert(k.to_string(), v);
    };
    put("protocol", config.protocol.id().to_string());
    put("scenario", config.scenario.id().to_string());
    for (k, v) in config.scenario.params() {
        put(&format!("scenario.{k}"), v);
    }
    let s = &config.schedule;
    put("r0", s.r0.to_string());
    put("beta", s.beta.to_string());
    put("c0", s.c0.to_string());
    put("gamma", s.gamma.to_string());
    if let Some(c) = s.clamp {
        put("clamp", c.to_string());
    }
    put("n_grid", config.n_grid.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    put("replications", config.replications.to_string());
    put("test_points", config.test_points.to_string());
    put("seed", config.master_seed.to_string());
    put("coin_mode", config.coin_mode.id().to_string());
    put("default_label", config.default_label.to_string());
    put("max_rejects", config.max_rejects.to_string());
    out
}

/// [`echo`] rendered as a config file for the sweep command.
pub fn echo_text(config: &ExperimentConfig) -> String {
    echo(config).iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
