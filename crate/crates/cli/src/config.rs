//! Flat `key = value` simulation config documents.
//!
//! ```text
//! # comment
//! p = 3
//! flavor = uni
//! k = 20
//! shift = notfd:2
//! y = exact
//! ```

use std::collections::BTreeMap;
use std::fmt;

use cmtwist::twistsim::{Chebotarev, InitialLaw, ShiftMode, SimConfig, StepModel};
use cmtwist::{FieldParams, Flavor};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(
                f,
                "config line {line}, field `{}`: {}",
                self.field, self.message
            ),
            None => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: &[&str] = &[
    "p", "flavor", "n", "k", "samples", "seed", "shift", "y", "step", "initial", "chunk", "threads",
];

/// Raw values with the line each came from (`None` for flag overrides).
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Option<usize>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(lineno),
                    field: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError {
                    line: Some(lineno),
                    field: key,
                    message: format!("unknown key (known: {})", KEYS.join(", ")),
                });
            }
            raw.entries
                .insert(key, (value.trim().to_string(), Some(lineno)));
        }
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries
            .insert(key.to_string(), (value.to_string(), None));
    }

    fn get<T>(
        &self,
        key: &str,
        default: T,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((value, line)) => parse(value).map_err(|message| ConfigError {
                line: *line,
                field: key.to_string(),
                message,
            }),
        }
    }

    pub fn threads(&self) -> Result<Option<usize>, ConfigError> {
        self.get("threads", None, |s| {
            s.parse::<usize>()
                .map(Some)
                .map_err(|e| format!("{s:?}: {e}"))
        })
    }

    pub fn to_sim_config(&self) -> Result<SimConfig, ConfigError> {
        let p = self.get("p", 2u64, parse_num)?;
        let flavor = self.get("flavor", Flavor::Symplectic, |s| {
            s.parse::<Flavor>().map_err(|e| e.to_string())
        })?;
        let field = FieldParams::new(p, flavor).map_err(|e| ConfigError {
            line: self.entries.get("p").and_then(|v| v.1),
            field: "p".into(),
            message: e.to_string(),
        })?;
        let mut config = SimConfig::new(
            field,
            self.get("k", 20usize, parse_num)?,
            self.get("samples", 1_000_000u64, parse_num)?,
            self.get("seed", 0u64, parse_num)?,
        );
        config.n = self.get("n", 1u32, parse_num)?;
        config.shift_mode = self.get("shift", ShiftMode::NotFd(0), parse_shift)?;
        config.chebotarev = self.get("y", Chebotarev::Exact, parse_y)?;
        config.step_model = self.get("step", StepModel::ClosedForm, parse_step)?;
        config.initial = self.get("initial", InitialLaw::PointMass(0), parse_initial)?;
        config.chunk_size = self.get("chunk", config.chunk_size, parse_num)?;
        config.validate().map_err(|e| ConfigError {
            line: None,
            field: "config".into(),
            message: e.to_string(),
        })?;
        Ok(config)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("{s:?}: {e}"))
}

pub fn parse_shift(s: &str) -> Result<ShiftMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "fd" => Ok(ShiftMode::EqualsFd),
        other => match other.strip_prefix("notfd:") {
            Some(r) => parse_num(r).map(ShiftMode::NotFd),
            None => Err(format!("{s:?}: expected `fd` or `notfd:<r>`")),
        },
    }
}

pub fn format_shift(shift: ShiftMode) -> String {
    match shift {
        ShiftMode::EqualsFd => "fd".into(),
        ShiftMode::NotFd(r) => format!("notfd:{r}"),
    }
}

pub fn parse_y(s: &str) -> Result<Chebotarev, String> {
    if s.eq_ignore_ascii_case("exact") {
        return Ok(Chebotarev::Exact);
    }
    let y: f64 = parse_num(s)?;
    if y > 0.0 && !y.is_nan() {
        Ok(if y.is_infinite() {
            Chebotarev::Exact
        } else {
            Chebotarev::Bounded(y)
        })
    } else {
        Err(format!("{s:?}: Y must be positive or `exact`"))
    }
}

pub fn format_y(y: Chebotarev) -> String {
    match y {
        Chebotarev::Exact => "exact".into(),
        Chebotarev::Bounded(y) => y.to_string(),
    }
}

fn parse_step(s: &str) -> Result<StepModel, String> {
    match s {
        "closed" => Ok(StepModel::ClosedForm),
        "micro" => Ok(StepModel::MicroModel),
        _ => Err(format!("{s:?}: expected `closed` or `micro`")),
    }
}

fn parse_initial(s: &str) -> Result<InitialLaw, String> {
    if let Some(r) = s.strip_prefix("point:") {
        return parse_num(r).map(InitialLaw::PointMass);
    }
    if let Some(ws) = s.strip_prefix("weights:") {
        let weights = ws
            .split(',')
            .map(|w| parse_num::<f64>(w.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(InitialLaw::Weights(weights));
    }
    Err(format!(
        "{s:?}: expected `point:<r>` or `weights:<w0>,<w1>,...`"
    ))
}

pub fn format_initial(initial: &InitialLaw) -> String {
    match initial {
        InitialLaw::PointMass(r) => format!("point:{r}"),
        InitialLaw::Weights(w) => {
            let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
            format!("weights:{}", parts.join(","))
        }
    }
}
