//! Flat sectioned key-value configuration: one `key = value` per line under
//! `[section]` headers, `#` comments. Module invariants are re-validated at
//! parse time with line-level error messages.

use std::collections::BTreeMap;

use oscbath::bath::SpectralModel;
use oscbath::dynamics::{Sampling, SimConfig};
use oscbath::quad_model::BathSpec;

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

#[derive(Debug, Clone)]
pub enum BathConfig {
    Explicit(Vec<(f64, f64)>),
    Ohmic {
        gamma: f64,
        cutoff: Option<f64>,
        n_modes: usize,
    },
}

impl BathConfig {
    /// Default cutoff when the config omits it: 50 x the largest rate in
    /// the problem.
    pub fn cutoff_or_default(&self, omega: f64) -> f64 {
        match self {
            BathConfig::Ohmic { gamma, cutoff, .. } => {
                cutoff.unwrap_or(50.0 * omega.max(*gamma).max(1e-12))
            }
            BathConfig::Explicit(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mass: f64,
    pub omega: f64,
    pub bath: BathConfig,
    pub sim: SimConfig,
    pub output_path: Option<String>,
}

impl RunConfig {
    /// Materialize the bath as an explicit mode list.
    pub fn bath_spec(&self) -> Result<BathSpec, oscbath::Error> {
        match &self.bath {
            BathConfig::Explicit(pairs) => BathSpec::from_pairs(pairs),
            BathConfig::Ohmic { gamma, n_modes, .. } => {
                let cutoff = self.bath.cutoff_or_default(self.omega);
                let model = SpectralModel::ohmic(*gamma, cutoff, self.mass, *n_modes)?;
                Ok(oscbath::bath::discretize_ohmic(&model))
            }
        }
    }

    /// The spectral model, for commands that need the Ohmic recipe itself.
    pub fn spectral_model(&self) -> Option<Result<SpectralModel, oscbath::Error>> {
        match &self.bath {
            BathConfig::Ohmic { gamma, n_modes, .. } => {
                let cutoff = self.bath.cutoff_or_default(self.omega);
                Some(SpectralModel::ohmic(*gamma, cutoff, self.mass, *n_modes))
            }
            BathConfig::Explicit(_) => None,
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_f64(entries: &BTreeMap<String, Entry>, key: &str) -> Result<Option<f64>, ConfigError> {
    match entries.get(key) {
        None => Ok(None),
        Some(e) => e
            .value
            .parse::<f64>()
            .map(Some)
            .map_err(|_| ConfigError::at(e.line, format!("key {key:?}: not a number: {:?}", e.value))),
    }
}

fn require_f64(
    entries: &BTreeMap<String, Entry>,
    section: &str,
    key: &str,
) -> Result<f64, ConfigError> {
    parse_f64(entries, key)?
        .ok_or_else(|| ConfigError::general(format!("missing key {key:?} in section [{section}]")))
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut sections: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
    let mut modes: Vec<(usize, String)> = Vec::new();
    let mut current = String::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_lowercase();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line_no, format!("expected key = value, got {line:?}")))?;
        let key = key.trim().to_lowercase();
        let value = value.trim().to_string();
        if current.is_empty() {
            return Err(ConfigError::at(
                line_no,
                format!("key {key:?} appears before any [section] header"),
            ));
        }
        if current == "bath" && key == "mode" {
            modes.push((line_no, value));
            continue;
        }
        let section = sections.entry(current.clone()).or_default();
        if section.contains_key(&key) {
            return Err(ConfigError::at(
                line_no,
                format!("duplicate key {key:?} in section [{current}]"),
            ));
        }
        section.insert(key, Entry { line: line_no, value });
    }

    let osc = sections
        .get("oscillator")
        .ok_or_else(|| ConfigError::general("missing [oscillator] section"))?;
    let mass = require_f64(osc, "oscillator", "m")?;
    let omega = require_f64(osc, "oscillator", "omega")?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(ConfigError::general(format!(
            "oscillator key \"m\" must be positive, got {mass}"
        )));
    }
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(ConfigError::general(format!(
            "oscillator key \"omega\" must be nonnegative, got {omega}"
        )));
    }

    let bath_section = sections
        .get("bath")
        .ok_or_else(|| ConfigError::general("missing [bath] section"))?;
    let bath_type = bath_section
        .get("type")
        .map(|e| e.value.to_lowercase())
        .ok_or_else(|| ConfigError::general("missing key \"type\" in section [bath]"))?;
    let bath = match bath_type.as_str() {
        "explicit" => {
            let mut pairs = Vec::new();
            for (line, value) in &modes {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(ConfigError::at(
                        *line,
                        format!("key \"mode\" expects \"<mass> <frequency>\", got {value:?}"),
                    ));
                }
                let m: f64 = parts[0].parse().map_err(|_| {
                    ConfigError::at(*line, format!("mode mass is not a number: {:?}", parts[0]))
                })?;
                let w: f64 = parts[1].parse().map_err(|_| {
                    ConfigError::at(
                        *line,
                        format!("mode frequency is not a number: {:?}", parts[1]),
                    )
                })?;
                if !(m.is_finite() && m > 0.0 && w.is_finite() && w > 0.0) {
                    return Err(ConfigError::at(
                        *line,
                        format!("mode mass and frequency must be positive, got {m} {w}"),
                    ));
                }
                pairs.push((m, w));
            }
            BathConfig::Explicit(pairs)
        }
        "ohmic" => {
            if !modes.is_empty() {
                return Err(ConfigError::at(
                    modes[0].0,
                    "explicit \"mode\" entries are not allowed for bath type \"ohmic\"",
                ));
            }
            let gamma = require_f64(bath_section, "bath", "gamma")?;
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(ConfigError::general(format!(
                    "bath key \"gamma\" must be positive, got {gamma}"
                )));
            }
            let cutoff = parse_f64(bath_section, "cutoff")?;
            if let Some(c) = cutoff {
                if !(c.is_finite() && c > 0.0) {
                    return Err(ConfigError::general(format!(
                        "bath key \"cutoff\" must be positive, got {c}"
                    )));
                }
            }
            let n_modes = match bath_section.get("n_modes") {
                None => 256,
                Some(e) => e.value.parse::<usize>().map_err(|_| {
                    ConfigError::at(
                        e.line,
                        format!("key \"n_modes\": not a positive integer: {:?}", e.value),
                    )
                })?,
            };
            if n_modes == 0 {
                return Err(ConfigError::general("bath key \"n_modes\" must be at least 1"));
            }
            BathConfig::Ohmic {
                gamma,
                cutoff,
                n_modes,
            }
        }
        other => {
            return Err(ConfigError::general(format!(
                "bath key \"type\" must be \"explicit\" or \"ohmic\", got {other:?}"
            )))
        }
    };

    let empty = BTreeMap::new();
    let sim_section = sections.get("simulation").unwrap_or(&empty);
    let sampling = match sim_section.get("sampling") {
        None => Sampling::Wigner,
        Some(e) => match e.value.to_lowercase().as_str() {
            "classical" => Sampling::Classical,
            "wigner" => Sampling::Wigner,
            other => {
                return Err(ConfigError::at(
                    e.line,
                    format!("key \"sampling\" must be \"classical\" or \"wigner\", got {other:?}"),
                ))
            }
        },
    };
    let seed = match sim_section.get("seed") {
        None => 0,
        Some(e) => e.value.parse::<u64>().map_err(|_| {
            ConfigError::at(
                e.line,
                format!("key \"seed\": not an unsigned integer: {:?}", e.value),
            )
        })?,
    };
    let n_traj = match sim_section.get("n_traj") {
        None => 1000,
        Some(e) => e.value.parse::<usize>().map_err(|_| {
            ConfigError::at(
                e.line,
                format!("key \"n_traj\": not a positive integer: {:?}", e.value),
            )
        })?,
    };
    let sim = SimConfig {
        dt: parse_f64(sim_section, "dt")?.unwrap_or(0.01),
        t_max: parse_f64(sim_section, "t_max")?.unwrap_or(10.0),
        n_traj,
        seed,
        sampling,
        temperature: parse_f64(sim_section, "temperature")?.unwrap_or(0.0),
    };
    if !(sim.dt.is_finite() && sim.dt > 0.0) {
        return Err(ConfigError::general(format!(
            "simulation key \"dt\" must be positive, got {}",
            sim.dt
        )));
    }
    if !(sim.t_max.is_finite() && sim.t_max > 0.0) {
        return Err(ConfigError::general(format!(
            "simulation key \"t_max\" must be positive, got {}",
            sim.t_max
        )));
    }
    if !(sim.temperature.is_finite() && sim.temperature >= 0.0) {
        return Err(ConfigError::general(format!(
            "simulation key \"temperature\" must be nonnegative, got {}",
            sim.temperature
        )));
    }

    let output_path = sections
        .get("output")
        .and_then(|s| s.get("path"))
        .map(|e| e.value.clone());

    Ok(RunConfig {
        mass,
        omega,
        bath,
        sim,
        output_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
[oscillator]
m = 1.0
omega = 1.0

[bath]
type = explicit
mode = 1.0 0.5

[simulation]
dt = 0.02
t_max = 1.0
n_traj = 100
seed = 7
sampling = wigner
temperature = 0.0
";

    #[test]
    fn parses_explicit_bath() {
        let cfg = parse(GOOD).unwrap();
        assert_eq!(cfg.mass, 1.0);
        match &cfg.bath {
            BathConfig::Explicit(pairs) => assert_eq!(pairs, &vec![(1.0, 0.5)]),
            _ => panic!("wrong bath type"),
        }
        assert_eq!(cfg.sim.seed, 7);
    }

    #[test]
    fn reports_offending_line() {
        let bad = GOOD.replace("mode = 1.0 0.5", "mode = 1.0");
        let err = parse(&bad).unwrap_err();
        assert_eq!(err.line, Some(7));
        assert!(err.message.contains("mode"));
    }

    #[test]
    fn missing_section_named() {
        let err = parse("[oscillator]\nm = 1\nomega = 1\n").unwrap_err();
        assert!(err.message.contains("[bath]"));
    }

    #[test]
    fn ohmic_defaults() {
        let cfg = parse(
            "[oscillator]\nm = 1\nomega = 1\n[bath]\ntype = ohmic\ngamma = 0.1\n",
        )
        .unwrap();
        match cfg.bath {
            BathConfig::Ohmic {
                gamma,
                cutoff,
                n_modes,
            } => {
                assert_eq!(gamma, 0.1);
                assert_eq!(cutoff, None);
                assert_eq!(n_modes, 256);
            }
            _ => panic!("wrong bath type"),
        }
        assert_eq!(cfg.bath.cutoff_or_default(1.0), 50.0);
    }

    #[test]
    fn rejects_negative_mode() {
        let bad = GOOD.replace("mode = 1.0 0.5", "mode = -1.0 0.5");
        assert!(parse(&bad).is_err());
    }
}
