//! Plain-text key=value run configuration.
//!
//! Schema (10 keys): lambda_nm, cavity_length_mm, mass_ng, kappa_khz,
//! omega_m_khz, gamma_m_hz, pump_power_mw, probe_ratio, delta_mode,
//! detuning_mode. Frequency keys carry the 2pi convention (kappa_khz = 215
//! means kappa/2pi = 215 kHz). `#` starts a comment; blank lines are
//! ignored. Unknown and duplicate keys are errors rather than silently
//! dropped, so a typo cannot masquerade as a default.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};
use crate::steady::DetuningMode;
use crate::units;

/// The shipped default configuration (the reference cavity at 1 mW).
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.cfg");

const MANDATORY_KEYS: [&str; 7] = [
    "lambda_nm",
    "cavity_length_mm",
    "mass_ng",
    "kappa_khz",
    "omega_m_khz",
    "gamma_m_hz",
    "pump_power_mw",
];
const OPTIONAL_KEYS: [&str; 3] = ["probe_ratio", "delta_mode", "detuning_mode"];

/// A parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct Config {
    /// Cavity and mirror parameters, SI.
    pub system: SystemParams,
    /// Drive derived from the config: pump at omega0 - detuning_target,
    /// probe power = probe_ratio * pump power, probe detuning defaulting to
    /// omega_m (commands sweep it).
    pub drive: DriveParams,
    /// Probe/pump power ratio.
    pub probe_ratio: f64,
    /// Pump-detuning target, rad/s. Carried exactly; never re-derived from
    /// omega0 - omega_c, which rounds at the optical scale.
    pub detuning_target: f64,
    /// True when the target is the bare detuning and the static mirror
    /// shift must be solved self-consistently.
    pub self_consistent: bool,
    /// Key/value pairs as given, for manifests and reproduction.
    pub raw: BTreeMap<String, String>,
    /// Where the config came from: a path, or "builtin" for the default.
    pub source: String,
}

impl Config {
    /// Parse from text. `source` names the origin in error messages and
    /// manifests.
    pub fn parse_str(text: &str, source: &str) -> Result<Config> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{source}:{}: expected key = value, got {line:?}",
                    idx + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !MANDATORY_KEYS.contains(&key) && !OPTIONAL_KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "{source}:{}: unknown key {key:?}",
                    idx + 1
                )));
            }
            if value.is_empty() {
                return Err(Error::Config(format!(
                    "{source}:{}: key {key:?} has an empty value",
                    idx + 1
                )));
            }
            if raw.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!(
                    "{source}:{}: duplicate key {key:?}",
                    idx + 1
                )));
            }
        }
        for key in MANDATORY_KEYS {
            if !raw.contains_key(key) {
                return Err(Error::Config(format!("{source}: missing key {key:?}")));
            }
        }

        let number = |key: &str| -> Result<f64> {
            let text = &raw[key];
            let v: f64 = text.parse().map_err(|_| {
                Error::Config(format!("{source}: key {key:?} is not a number: {text:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::Config(format!(
                    "{source}: key {key:?} must be finite, got {text:?}"
                )));
            }
            Ok(v)
        };

        let system = SystemParams::new(
            units::rad_s_from_wavelength_nm(number("lambda_nm")?),
            units::m_from_mm(number("cavity_length_mm")?),
            units::rad_s_from_khz(number("kappa_khz")?),
            units::kg_from_ng(number("mass_ng")?),
            units::rad_s_from_khz(number("omega_m_khz")?),
            units::rad_s_from_hz(number("gamma_m_hz")?),
        );
        system.validate()?;

        let power_c = units::w_from_mw(number("pump_power_mw")?);
        if power_c < 0.0 {
            return Err(Error::Config(format!(
                "{source}: pump_power_mw must be non-negative"
            )));
        }
        let probe_ratio = if raw.contains_key("probe_ratio") {
            number("probe_ratio")?
        } else {
            1e-6
        };
        if probe_ratio < 0.0 {
            return Err(Error::Config(format!(
                "{source}: probe_ratio must be non-negative"
            )));
        }

        let self_consistent = match raw.get("delta_mode").map(String::as_str) {
            None | Some("fixed") => false,
            Some("self_consistent") => true,
            Some(other) => {
                return Err(Error::Config(format!(
                    "{source}: delta_mode must be \"fixed\" or \"self_consistent\", \
                     got {other:?}"
                )));
            }
        };
        let detuning_target = match raw.get("detuning_mode").map(String::as_str) {
            None | Some("omega_m") => system.omega_m,
            Some(text) => {
                let mult: f64 = text.parse().map_err(|_| {
                    Error::Config(format!(
                        "{source}: detuning_mode must be \"omega_m\" or a multiple \
                         of omega_m, got {text:?}"
                    ))
                })?;
                if !mult.is_finite() {
                    return Err(Error::Config(format!(
                        "{source}: detuning_mode multiple must be finite"
                    )));
                }
                mult * system.omega_m
            }
        };

        let omega_c = system.omega0 - detuning_target;
        if !(omega_c > 0.0) {
            return Err(Error::Config(format!(
                "{source}: pump frequency omega0 - detuning = {omega_c:e} rad/s \
                 must be positive"
            )));
        }
        let drive = DriveParams {
            omega_c,
            power_c,
            power_p: probe_ratio * power_c,
            delta: system.omega_m,
        };
        drive.validate(f64::INFINITY)?;

        Ok(Config {
            system,
            drive,
            probe_ratio,
            detuning_target,
            self_consistent,
            raw,
            source: source.to_string(),
        })
    }

    /// Parse a config file from disk.
    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse_str(&text, &path.display().to_string())
    }

    /// The shipped default configuration, parsed.
    pub fn builtin() -> Config {
        Config::parse_str(DEFAULT_CONFIG, "builtin").expect("shipped default config is valid")
    }

    /// Detuning handle for the steady-state solver, per delta_mode.
    pub fn detuning_mode(&self) -> DetuningMode {
        if self.self_consistent {
            DetuningMode::SelfConsistent {
                bare_detuning: self.detuning_target,
                branch: None,
            }
        } else {
            DetuningMode::Fixed(self.detuning_target)
        }
    }

    /// Copy with a different pump power (W), probe power rescaled to keep
    /// the configured ratio.
    pub fn with_pump_power(&self, power_c: f64) -> Config {
        let mut out = self.clone();
        out.drive.power_c = power_c;
        out.drive.power_p = self.probe_ratio * power_c;
        out
    }
}
