//! Run configuration: command-line flags layered over an optional
//! `key=value` file whose keys are the long flag names.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use disentangle::{GaussianParams, PhysicalConstants};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 24301;
pub const DEFAULT_SAMPLES: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthScale {
    Auto,
    Fixed(f64),
}

impl FromStr for LengthScale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LengthScale::Auto);
        }
        s.parse::<f64>()
            .map(LengthScale::Fixed)
            .map_err(|_| format!("expected a length or 'auto', got '{s}'"))
    }
}

impl fmt::Display for LengthScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthScale::Auto => f.write_str("auto"),
            LengthScale::Fixed(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Temperature,
    A12,
    Time,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "temperature" | "temp" => Ok(Axis::Temperature),
            "a12" => Ok(Axis::A12),
            "time" => Ok(Axis::Time),
            _ => Err(format!(
                "axis must be one of temperature, a12, time (got '{s}')"
            )),
        }
    }
}

/// Values that may come from the file or the command line; `None` means unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigValues {
    pub a11: Option<f64>,
    pub a12: Option<f64>,
    pub temp: Option<f64>,
    pub time: Option<f64>,
    pub mass: Option<f64>,
    pub hbar: Option<f64>,
    pub kb: Option<f64>,
    pub length_scale: Option<LengthScale>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub tolerance: Option<f64>,
    pub status_exit: Option<bool>,
    pub axis: Option<Axis>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
}

impl ConfigValues {
    /// Fills every unset field of `self` from `lower`.
    pub fn over(self, lower: ConfigValues) -> ConfigValues {
        ConfigValues {
            a11: self.a11.or(lower.a11),
            a12: self.a12.or(lower.a12),
            temp: self.temp.or(lower.temp),
            time: self.time.or(lower.time),
            mass: self.mass.or(lower.mass),
            hbar: self.hbar.or(lower.hbar),
            kb: self.kb.or(lower.kb),
            length_scale: self.length_scale.or(lower.length_scale),
            seed: self.seed.or(lower.seed),
            samples: self.samples.or(lower.samples),
            tolerance: self.tolerance.or(lower.tolerance),
            status_exit: self.status_exit.or(lower.status_exit),
            axis: self.axis.or(lower.axis),
            start: self.start.or(lower.start),
            stop: self.stop.or(lower.stop),
            steps: self.steps.or(lower.steps),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value '{value}' for '{key}'"))
        }
        match key {
            "a11" => self.a11 = Some(parse(key, value)?),
            "a12" => self.a12 = Some(parse(key, value)?),
            "temp" => self.temp = Some(parse(key, value)?),
            "time" => self.time = Some(parse(key, value)?),
            "mass" => self.mass = Some(parse(key, value)?),
            "hbar" => self.hbar = Some(parse(key, value)?),
            "kb" => self.kb = Some(parse(key, value)?),
            "length-scale" => self.length_scale = Some(value.parse()?),
            "seed" => self.seed = Some(parse(key, value)?),
            "samples" => self.samples = Some(parse(key, value)?),
            "tolerance" => self.tolerance = Some(parse(key, value)?),
            "status-exit" => self.status_exit = Some(parse(key, value)?),
            "axis" => self.axis = Some(value.parse()?),
            "start" => self.start = Some(parse(key, value)?),
            "stop" => self.stop = Some(parse(key, value)?),
            "steps" => self.steps = Some(parse(key, value)?),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }
}

/// Parses a configuration file: one `key=value` per line, `#` starts a
/// comment, blank lines are ignored and later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<ConfigValues, CliError> {
    let mut values = ConfigValues::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config {
                line: line_no,
                message: format!("expected key=value, got '{line}'"),
            });
        };
        values
            .set(key.trim(), value.trim())
            .map_err(|message| CliError::Config {
                line: line_no,
                message,
            })?;
    }
    Ok(values)
}

pub fn load_config(path: &Path) -> Result<ConfigValues, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub params: GaussianParams,
    pub temperature: f64,
    pub time: f64,
    pub consts: PhysicalConstants,
    pub length_scale: LengthScale,
    pub seed: u64,
    pub samples: u64,
    pub tolerance: f64,
    pub status_exit: bool,
}

impl RunConfig {
    pub fn resolve(values: &ConfigValues) -> Result<Self, CliError> {
        let params = GaussianParams::new(values.a11.unwrap_or(2.0), values.a12.unwrap_or(1.0))?;
        let consts = PhysicalConstants::new(
            values.mass.unwrap_or(1.0),
            values.hbar.unwrap_or(1.0),
            values.kb.unwrap_or(1.0),
        )?;
        let temperature = values.temp.unwrap_or(0.0);
        if !temperature.is_finite() || temperature < 0.0 {
            return Err(CliError::Usage(format!(
                "temperature must be finite and non-negative, got {temperature}"
            )));
        }
        let time = values.time.unwrap_or(0.0);
        if !time.is_finite() {
            return Err(CliError::Usage(format!("time must be finite, got {time}")));
        }
        let length_scale = values.length_scale.unwrap_or(LengthScale::Auto);
        if let LengthScale::Fixed(l) = length_scale {
            if !l.is_finite() || l <= 0.0 {
                return Err(CliError::Usage(format!(
                    "length scale must be positive, got {l}"
                )));
            }
        }
        let tolerance = values.tolerance.unwrap_or(disentangle::DEFAULT_TOLERANCE);
        if !tolerance.is_finite() || tolerance < 0.0 {
            return Err(CliError::Usage(format!(
                "tolerance must be finite and non-negative, got {tolerance}"
            )));
        }
        let samples = values.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::Usage("samples must be at least 1".into()));
        }
        Ok(RunConfig {
            params,
            temperature,
            time,
            consts,
            length_scale,
            seed: values.seed.unwrap_or(DEFAULT_SEED),
            samples,
            tolerance,
            status_exit: values.status_exit.unwrap_or(false),
        })
    }

    pub fn length_scale_value(&self) -> Option<f64> {
        match self.length_scale {
            LengthScale::Auto => None,
            LengthScale::Fixed(l) => Some(l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn resolve(values: &ConfigValues) -> Result<Self, CliError> {
        let axis = values
            .axis
            .ok_or_else(|| CliError::Usage("sweep needs --axis".into()))?;
        let start = values
            .start
            .ok_or_else(|| CliError::Usage("sweep needs --start".into()))?;
        let stop = values
            .stop
            .ok_or_else(|| CliError::Usage("sweep needs --stop".into()))?;
        let steps = values
            .steps
            .ok_or_else(|| CliError::Usage("sweep needs --steps".into()))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(CliError::Usage("sweep bounds must be finite".into()));
        }
        if start >= stop {
            return Err(CliError::Usage(format!(
                "sweep needs start < stop (got start = {start}, stop = {stop})"
            )));
        }
        if steps < 2 {
            return Err(CliError::Usage(format!(
                "sweep needs at least 2 steps, got {steps}"
            )));
        }
        Ok(SweepSpec {
            axis,
            start,
            stop,
            steps,
        })
    }

    /// Grid values `start + (stop - start) i / (steps - 1)`, ends exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}
