//! Run manifests and comparison reports: the JSON sidecars that make every
//! output reproducible and machine-checkable. No timestamps or other
//! ambient state; identical inputs serialize to identical bytes.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};
use crate::spectrum::{DipMetrics, GridSpec};
use crate::steady::OperatingPoint;

/// Hex-encoded SHA-256 of the compact JSON serialization of the parameter
/// set. Ties every CSV and report back to the exact numbers that made it.
pub fn params_hash(system: &SystemParams, drive: &DriveParams) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        system: &'a SystemParams,
        drive: &'a DriveParams,
    }
    let json =
        serde_json::to_string(&Key { system, drive }).expect("parameter serialization is total");
    let digest = Sha256::digest(json.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Sidecar describing one output-producing run. Serialized next to every
/// CSV; re-running `command` reproduces the outputs byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    /// Crate version that produced the output.
    pub tool_version: String,
    /// Argument vector that reproduces the run.
    pub command: Vec<String>,
    /// Config origin: a path, or "builtin".
    pub config_source: String,
    /// Config keys exactly as given.
    pub raw_config: BTreeMap<String, String>,
    /// Resolved cavity and mirror parameters, SI.
    pub system: SystemParams,
    /// Resolved drive, SI.
    pub drive: DriveParams,
    /// Pump-detuning target, rad/s.
    pub detuning_target: f64,
    /// Whether the static mirror shift was solved self-consistently.
    pub self_consistent: bool,
    /// Response evaluator ("exact", "sideband", "oracle"), if one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluator: Option<String>,
    /// Frequency grid, if the run swept one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Solved pump operating point, if the run has a single one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<OperatingPoint>,
    /// Pole-coalescence drive power, W, when defined for the setup.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_power_w: Option<f64>,
    /// Dip metrics of the swept spectrum, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<DipMetrics>,
    /// Files the run wrote, relative to the output directory.
    pub outputs: Vec<String>,
    /// SHA-256 over the resolved (system, drive) JSON.
    pub params_hash: String,
}

impl RunManifest {
    /// Pretty JSON plus trailing newline, the exact bytes written to disk.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("manifest serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

/// One delta point of a time-domain versus closed-form comparison. Numeric
/// fields are null when integration failed; `error` then says why.
#[derive(Debug, Clone, Serialize)]
pub struct OraclePoint {
    /// Pump power for this point, W.
    pub power_w: f64,
    /// Probe detuning from the pump, rad/s.
    pub delta: f64,
    pub analytic_re: Option<f64>,
    pub analytic_im: Option<f64>,
    pub oracle_re: Option<f64>,
    pub oracle_im: Option<f64>,
    /// |oracle - analytic| / |analytic|.
    pub rel_dev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregate of an oracle comparison run.
#[derive(Debug, Clone, Serialize)]
pub struct OracleSummary {
    /// Largest relative deviation among completed points.
    pub max_rel_dev: Option<f64>,
    /// Mean relative deviation among completed points.
    pub mean_rel_dev: Option<f64>,
    /// Points that integrated successfully.
    pub n_ok: usize,
    /// Points attempted.
    pub n_points: usize,
    /// False when any point failed to integrate.
    pub complete: bool,
    /// Acceptance threshold on max_rel_dev.
    pub threshold: f64,
    /// complete && max_rel_dev <= threshold.
    pub passed: bool,
    pub params_hash: String,
}

/// Full comparison report, serialized as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub points: Vec<OraclePoint>,
    pub summary: OracleSummary,
}

impl OracleReport {
    /// Assemble the summary from per-point results.
    pub fn new(points: Vec<OraclePoint>, threshold: f64, hash: String) -> OracleReport {
        let devs: Vec<f64> = points.iter().filter_map(|p| p.rel_dev).collect();
        let n_ok = devs.len();
        let complete = n_ok == points.len();
        let max_rel_dev = devs.iter().copied().fold(None, |m: Option<f64>, d| {
            Some(m.map_or(d, |m| m.max(d)))
        });
        let mean_rel_dev = if devs.is_empty() {
            None
        } else {
            Some(devs.iter().sum::<f64>() / devs.len() as f64)
        };
        let passed = complete && max_rel_dev.is_some_and(|m| m <= threshold);
        OracleReport {
            summary: OracleSummary {
                max_rel_dev,
                mean_rel_dev,
                n_ok,
                n_points: points.len(),
                complete,
                threshold,
                passed,
                params_hash: hash,
            },
            points,
        }
    }

    /// Error when the comparison did not pass, for exit-code mapping.
    pub fn check(&self) -> Result<()> {
        if self.summary.passed {
            return Ok(());
        }
        if !self.summary.complete {
            return Err(Error::Threshold(format!(
                "oracle comparison incomplete: {}/{} points integrated",
                self.summary.n_ok, self.summary.n_points
            )));
        }
        Err(Error::Threshold(format!(
            "oracle deviation {:e} exceeds threshold {:e}",
            self.summary.max_rel_dev.unwrap_or(f64::NAN),
            self.summary.threshold
        )))
    }

    /// Pretty JSON plus trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_parameter_sensitive() {
        let sys = SystemParams::reference_cavity();
        let drive = DriveParams {
            omega_c: sys.omega0 - sys.omega_m,
            power_c: 1e-3,
            power_p: 1e-9,
            delta: sys.omega_m,
        };
        let a = params_hash(&sys, &drive);
        let b = params_hash(&sys, &drive);
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert!(a.chars().all(|c| c.is_ascii_hexdigit()));
        let mut nudged = drive;
        nudged.power_c = 1.0000001e-3;
        assert_ne!(a, params_hash(&sys, &nudged));
    }

    #[test]
    fn report_summary_aggregates_and_checks() {
        let ok = |dev: f64| OraclePoint {
            power_w: 1e-3,
            delta: 1.0,
            analytic_re: Some(1.0),
            analytic_im: Some(0.0),
            oracle_re: Some(1.0),
            oracle_im: Some(0.0),
            rel_dev: Some(dev),
            error: None,
        };
        let report = OracleReport::new(vec![ok(1e-6), ok(3e-6)], 1e-2, "h".into());
        assert_eq!(report.summary.max_rel_dev, Some(3e-6));
        assert_eq!(report.summary.mean_rel_dev, Some(2e-6));
        assert!(report.summary.complete);
        assert!(report.summary.passed);
        report.check().unwrap();

        let strict = OracleReport::new(vec![ok(1e-6)], 1e-9, "h".into());
        assert!(!strict.summary.passed);
        assert!(matches!(strict.check(), Err(Error::Threshold(_))));

        let failed = OraclePoint {
            rel_dev: None,
            analytic_re: None,
            analytic_im: None,
            oracle_re: None,
            oracle_im: None,
            error: Some("stalled".into()),
            ..ok(0.0)
        };
        let partial = OracleReport::new(vec![ok(1e-6), failed], 1e-2, "h".into());
        assert!(!partial.summary.complete);
        assert!(!partial.summary.passed);
        assert_eq!(partial.summary.n_ok, 1);
    }

    #[test]
    fn json_sidecars_are_deterministic_and_timestamp_free() {
        let sys = SystemParams::reference_cavity();
        let drive = DriveParams {
            omega_c: sys.omega0 - sys.omega_m,
            power_c: 1e-3,
            power_p: 1e-9,
            delta: sys.omega_m,
        };
        let manifest = RunManifest {
            tool_version: "0.1.0".into(),
            command: vec!["omit".into(), "spectrum".into()],
            config_source: "builtin".into(),
            raw_config: BTreeMap::from([("kappa_khz".into(), "215".into())]),
            system: sys,
            drive,
            detuning_target: sys.omega_m,
            self_consistent: false,
            evaluator: Some("sideband".into()),
            grid: None,
            operating_point: None,
            critical_power_w: Some(3.8e-3),
            metrics: None,
            outputs: vec!["spectrum.csv".into()],
            params_hash: params_hash(&sys, &drive),
        };
        let a = manifest.to_json().unwrap();
        let b = manifest.to_json().unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        for word in ["time", "date", "stamp"] {
            assert!(
                !a.to_lowercase().contains(word),
                "manifest must not embed ambient state: found {word:?}"
            );
        }
        let value: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(value["system"]["kappa"], serde_json::json!(sys.kappa));
    }
}
