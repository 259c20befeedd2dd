//! Sweep orchestration: frequency spectra, power sweeps, figure presets,
//! and time-domain comparison runs, each emitting data plus a manifest that
//! reproduces it byte for byte.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::oracle::{oracle_response, IntegrationOptions};
use crate::params::{DriveParams, SystemParams};
use crate::report::{params_hash, OraclePoint, OracleReport, RunManifest};
use crate::response::{response_exact, response_no_coupling, poles};
use crate::spectrum::{compute_spectrum, dip_metrics, write_csv, DipMetrics, Evaluator, GridSpec};
use crate::steady::{
    critical_power, drive_for_target_beta, solve_operating_point, OperatingPoint,
};

/// Quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Probe offset x = delta - omega_m, rad/s.
    ProbeDetuningX,
    /// Pump power, W.
    PumpPower,
}

/// How each sweep point is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepEvaluator {
    /// Full closed-form response.
    Exact,
    /// Two-pole sideband form.
    Sideband,
    /// Time-domain integration (comparison runs only).
    Oracle,
}

impl SweepEvaluator {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepEvaluator::Exact => "exact",
            SweepEvaluator::Sideband => "sideband",
            SweepEvaluator::Oracle => "oracle",
        }
    }

    fn closed_form(&self) -> Result<Evaluator> {
        match self {
            SweepEvaluator::Exact => Ok(Evaluator::Exact),
            SweepEvaluator::Sideband => Ok(Evaluator::Sideband),
            SweepEvaluator::Oracle => Err(Error::InvalidParameter(
                "spectra evaluate closed forms; time-domain points go through \
                 the oracle comparison run"
                    .into(),
            )),
        }
    }
}

/// One sweep request.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    /// Lower bound: rad/s for frequency sweeps, W for power sweeps.
    pub lo: f64,
    /// Upper bound, same unit as `lo`.
    pub hi: f64,
    pub n_points: usize,
    pub evaluator: SweepEvaluator,
    /// Emit per-pole response columns.
    pub include_pole_parts: bool,
    /// Emit the coupling-off baseline column.
    pub include_baseline: bool,
    /// Compute dip metrics into the manifest.
    pub include_metrics: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || !(self.lo < self.hi) {
            return Err(Error::InvalidParameter(format!(
                "sweep range needs finite lo < hi, got [{:e}, {:e}]",
                self.lo, self.hi
            )));
        }
        if self.n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "sweep needs at least 2 points, got {}",
                self.n_points
            )));
        }
        Ok(())
    }
}

/// Completed spectrum run: where the files went and the headline numbers.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub operating_point: OperatingPoint,
    pub metrics: Option<DipMetrics>,
    pub critical_power_w: Option<f64>,
    pub rows: usize,
}

/// Completed power sweep.
#[derive(Debug, Clone)]
pub struct PowerSweepRun {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub critical_power_w: Option<f64>,
    pub rows: usize,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(bytes)?;
    f.flush()?;
    Ok(())
}

fn manifest_for(
    cfg: &Config,
    command: &[String],
    evaluator: Option<String>,
    grid: Option<GridSpec>,
    operating_point: Option<OperatingPoint>,
    critical_power_w: Option<f64>,
    metrics: Option<DipMetrics>,
    outputs: Vec<String>,
) -> RunManifest {
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_vec(),
        config_source: cfg.source.clone(),
        raw_config: cfg.raw.clone(),
        system: cfg.system,
        drive: cfg.drive,
        detuning_target: cfg.detuning_target,
        self_consistent: cfg.self_consistent,
        evaluator,
        grid,
        operating_point,
        critical_power_w,
        metrics,
        outputs,
        params_hash: params_hash(&cfg.system, &cfg.drive),
    }
}

/// Sweep the probe offset at fixed pump power and write `{stem}.csv` plus
/// `{stem}.manifest.json` under `out_dir`.
pub fn run_spectrum_command(
    cfg: &Config,
    spec: &SweepSpec,
    out_dir: &Path,
    stem: &str,
    command: &[String],
) -> Result<SpectrumRun> {
    spec.validate()?;
    if spec.variable != SweepVariable::ProbeDetuningX {
        return Err(Error::InvalidParameter(
            "spectrum sweeps vary the probe offset; use the power-sweep \
             command for pump power"
                .into(),
        ));
    }
    let evaluator = spec.evaluator.closed_form()?;
    let sys = &cfg.system;
    let op = solve_operating_point(sys, &cfg.drive, cfg.detuning_mode())?;
    let grid = GridSpec {
        x_min: spec.lo,
        x_max: spec.hi,
        n_points: spec.n_points,
    };
    let spectrum = compute_spectrum(
        sys,
        &op,
        &grid.build()?,
        evaluator,
        spec.include_baseline,
        spec.include_pole_parts,
    )?;
    let metrics = if spec.include_metrics {
        Some(dip_metrics(sys, &op, &spectrum)?)
    } else {
        None
    };
    let critical = critical_power(sys, Some(op.delta_eff)).ok();

    std::fs::create_dir_all(out_dir)?;
    let csv_name = format!("{stem}.csv");
    let manifest_name = format!("{stem}.manifest.json");
    let csv_path = out_dir.join(&csv_name);
    let manifest_path = out_dir.join(&manifest_name);

    let mut csv = Vec::new();
    write_csv(&spectrum, &mut csv)?;
    write_file(&csv_path, &csv)?;

    let manifest = manifest_for(
        cfg,
        command,
        Some(spec.evaluator.as_str().to_string()),
        Some(grid),
        Some(op),
        critical,
        metrics,
        vec![csv_name],
    );
    write_file(&manifest_path, manifest.to_json()?.as_bytes())?;

    Ok(SpectrumRun {
        csv_path,
        manifest_path,
        operating_point: op,
        metrics,
        critical_power_w: critical,
        rows: spec.n_points,
    })
}

/// Per-power metric rows. The grid for each power spans
/// +-min(10 |Im x_plus|, omega_m/2) so the narrow feature stays resolved at
/// every power while the broad line never dominates the window.
pub const POWER_SWEEP_CSV_HEADER: &str =
    "power_mw,beta,regime,dip_value,dip_class,narrow_hwhm,dispersion_slope";

/// Sweep the pump power and write metric rows. Bounds in `spec` are watts.
pub fn run_power_sweep(
    cfg: &Config,
    spec: &SweepSpec,
    out_dir: &Path,
    stem: &str,
    command: &[String],
) -> Result<PowerSweepRun> {
    spec.validate()?;
    if spec.variable != SweepVariable::PumpPower {
        return Err(Error::InvalidParameter(
            "power sweeps vary the pump power; use the spectrum command for \
             the probe offset"
                .into(),
        ));
    }
    if spec.lo < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pump power cannot be negative, got {:e} W",
            spec.lo
        )));
    }
    let evaluator = spec.evaluator.closed_form()?;
    let sys = cfg.system;

    let powers: Vec<f64> = (0..spec.n_points)
        .map(|i| spec.lo + (spec.hi - spec.lo) * i as f64 / (spec.n_points - 1) as f64)
        .collect();

    let rows: Vec<String> = powers
        .par_iter()
        .map(|&power| -> Result<String> {
            let local = cfg.with_pump_power(power);
            let op = solve_operating_point(&sys, &local.drive, local.detuning_mode())?;
            let narrow = poles(&sys, &op).x_plus.im.abs();
            let half = (10.0 * narrow).min(0.5 * sys.omega_m);
            let grid = GridSpec {
                x_min: -half,
                x_max: half,
                n_points: 4001,
            };
            let spectrum = compute_spectrum(&sys, &op, &grid.build()?, evaluator, false, false)?;
            let m = dip_metrics(&sys, &op, &spectrum)?;
            Ok(format!(
                "{},{},{},{},{},{},{}",
                crate::units::mw_from_w(power),
                op.beta,
                op.regime.as_str(),
                m.dip_value,
                m.classification.as_str(),
                m.narrow_hwhm_analytic,
                m.dispersion_slope_at_center
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let critical = critical_power(&sys, Some(cfg.detuning_target)).ok();

    std::fs::create_dir_all(out_dir)?;
    let csv_name = format!("{stem}.csv");
    let manifest_name = format!("{stem}.manifest.json");
    let csv_path = out_dir.join(&csv_name);
    let manifest_path = out_dir.join(&manifest_name);

    let mut csv = String::with_capacity(rows.len() * 96);
    csv.push_str(POWER_SWEEP_CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    write_file(&csv_path, csv.as_bytes())?;

    let manifest = manifest_for(
        cfg,
        command,
        Some(spec.evaluator.as_str().to_string()),
        None,
        None,
        critical,
        None,
        vec![csv_name],
    );
    write_file(&manifest_path, manifest.to_json()?.as_bytes())?;

    Ok(PowerSweepRun {
        csv_path,
        manifest_path,
        critical_power_w: critical,
        rows: rows.len(),
    })
}

/// Reproductions of the four published line-shape figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigurePreset {
    /// Absorptive quadrature, transparency dip at 1 mW.
    Fig2,
    /// Dispersive quadrature at 1 mW.
    Fig3,
    /// Absorptive quadrature, split doublet at 6.9 mW.
    Fig4,
    /// Dispersive quadrature at 6.9 mW.
    Fig5,
}

impl FigurePreset {
    pub fn stem(&self) -> &'static str {
        match self {
            FigurePreset::Fig2 => "fig2",
            FigurePreset::Fig3 => "fig3",
            FigurePreset::Fig4 => "fig4",
            FigurePreset::Fig5 => "fig5",
        }
    }

    /// 1 mW below the pole-coalescence power, 6.9 mW above it.
    pub fn power_w(&self) -> f64 {
        match self {
            FigurePreset::Fig2 | FigurePreset::Fig3 => 1e-3,
            FigurePreset::Fig4 | FigurePreset::Fig5 => 6.9e-3,
        }
    }

    /// The low-power figures overlay the coupling-off baseline.
    pub fn include_baseline(&self) -> bool {
        matches!(self, FigurePreset::Fig2 | FigurePreset::Fig3)
    }
}

/// Run a figure preset: the standard +-omega_m/2 grid with pole parts, at
/// the preset's pump power, on the two-pole evaluator.
pub fn run_figure(
    cfg: &Config,
    preset: FigurePreset,
    out_dir: &Path,
    command: &[String],
) -> Result<SpectrumRun> {
    let local = cfg.with_pump_power(preset.power_w());
    let grid = GridSpec::default_for(&local.system);
    let spec = SweepSpec {
        variable: SweepVariable::ProbeDetuningX,
        lo: grid.x_min,
        hi: grid.x_max,
        n_points: grid.n_points,
        evaluator: SweepEvaluator::Sideband,
        include_pole_parts: true,
        include_baseline: preset.include_baseline(),
        include_metrics: true,
    };
    run_spectrum_command(&local, &spec, out_dir, preset.stem(), command)
}

/// One time-domain comparison request.
#[derive(Debug, Clone)]
pub struct OracleCheckSpec {
    /// Probe detunings: n_points uniformly spaced in
    /// [delta_lo, delta_hi] * omega_m.
    pub n_points: usize,
    pub delta_lo_over_omega_m: f64,
    pub delta_hi_over_omega_m: f64,
    /// Pump powers as fractions of the pole-coalescence power; 0 compares
    /// against the coupling-off closed form.
    pub power_fractions: Vec<f64>,
    /// Acceptance bound on the max relative deviation.
    pub threshold: f64,
    /// Probe/pump amplitude ratio for the generated drives.
    pub probe_amp_ratio: f64,
    /// Use the dimensionless benchmark set instead of the configured
    /// cavity. The full-scale cavity separates its rates by four decades,
    /// so those runs are slow; they stay available behind this switch.
    pub use_scaled_params: bool,
    /// Integrator controls.
    pub options: IntegrationOptions,
}

impl Default for OracleCheckSpec {
    fn default() -> Self {
        OracleCheckSpec {
            n_points: 21,
            delta_lo_over_omega_m: 0.9,
            delta_hi_over_omega_m: 1.1,
            power_fractions: vec![0.5],
            threshold: 1e-2,
            probe_amp_ratio: 1e-3,
            use_scaled_params: true,
            options: IntegrationOptions::default(),
        }
    }
}

impl OracleCheckSpec {
    fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidParameter(
                "oracle comparison needs at least 2 detuning points".into(),
            ));
        }
        if !self.delta_lo_over_omega_m.is_finite()
            || !self.delta_hi_over_omega_m.is_finite()
            || !(self.delta_lo_over_omega_m < self.delta_hi_over_omega_m)
        {
            return Err(Error::InvalidParameter(
                "oracle comparison needs finite delta_lo < delta_hi".into(),
            ));
        }
        if self.power_fractions.is_empty() {
            return Err(Error::InvalidParameter(
                "oracle comparison needs at least one power fraction".into(),
            ));
        }
        if self
            .power_fractions
            .iter()
            .any(|f| !f.is_finite() || *f < 0.0)
        {
            return Err(Error::InvalidParameter(
                "power fractions must be finite and non-negative".into(),
            ));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidParameter(
                "oracle threshold must be positive".into(),
            ));
        }
        if !(self.probe_amp_ratio > 0.0)
            || self.probe_amp_ratio * self.probe_amp_ratio > crate::params::PROBE_RATIO_MAX_DEFAULT
        {
            return Err(Error::InvalidParameter(format!(
                "probe amplitude ratio {:e} must be positive with a squared \
                 value at most {:e}",
                self.probe_amp_ratio,
                crate::params::PROBE_RATIO_MAX_DEFAULT
            )));
        }
        Ok(())
    }
}

/// Run the comparison: for each (power fraction, delta) point integrate the
/// mean-value equations and compare the extracted response against the
/// closed form. Per-point failures are recorded and the run continues; the
/// summary flags incompleteness.
pub fn run_oracle_check(cfg: &Config, spec: &OracleCheckSpec) -> Result<OracleReport> {
    spec.validate()?;
    let sys = if spec.use_scaled_params {
        SystemParams::scaled_benchmark()
    } else {
        cfg.system
    };
    let edge = sys.kappa - 0.5 * sys.gamma_m;
    let beta_critical = 0.25 * edge * edge;
    let critical_w = critical_power(&sys, Some(sys.omega_m))?;

    let deltas: Vec<f64> = (0..spec.n_points)
        .map(|i| {
            let t = i as f64 / (spec.n_points - 1) as f64;
            (spec.delta_lo_over_omega_m
                + (spec.delta_hi_over_omega_m - spec.delta_lo_over_omega_m) * t)
                * sys.omega_m
        })
        .collect();

    // (fraction, delta) tasks with the per-fraction setup resolved once.
    struct Task {
        power_w: f64,
        delta: f64,
        drive: DriveParams,
        bare: Option<f64>,
        op: Option<OperatingPoint>,
    }
    let mut tasks = Vec::with_capacity(spec.power_fractions.len() * deltas.len());
    for &fraction in &spec.power_fractions {
        if fraction == 0.0 {
            let drive = DriveParams {
                omega_c: sys.omega0 - sys.omega_m,
                power_c: 0.0,
                power_p: spec.probe_amp_ratio * spec.probe_amp_ratio * critical_w,
                delta: sys.omega_m,
            };
            for &delta in &deltas {
                tasks.push(Task {
                    power_w: 0.0,
                    delta,
                    drive,
                    bare: None,
                    op: None,
                });
            }
        } else {
            let targeted = drive_for_target_beta(
                &sys,
                fraction * beta_critical,
                sys.omega_m,
                spec.probe_amp_ratio,
                sys.omega_m,
            )?;
            let op = solve_operating_point(
                &sys,
                &targeted.drive,
                crate::steady::DetuningMode::SelfConsistent {
                    bare_detuning: targeted.bare_detuning,
                    branch: None,
                },
            )?;
            for &delta in &deltas {
                tasks.push(Task {
                    power_w: targeted.drive.power_c,
                    delta,
                    drive: targeted.drive,
                    bare: Some(targeted.bare_detuning),
                    op: Some(op),
                });
            }
        }
    }

    let points: Vec<OraclePoint> = tasks
        .par_iter()
        .map(|task| {
            let analytic = match task.op {
                Some(ref op) => response_exact(&sys, op, task.delta).map(|r| r.value),
                None => Ok(response_no_coupling(&sys, task.drive.omega_c + task.delta).value),
            };
            let opts = IntegrationOptions {
                bare_detuning: task.bare,
                ..spec.options
            };
            let oracle =
                oracle_response(&sys, &task.drive, task.delta, &opts).map(|r| r.response.value);
            match (analytic, oracle) {
                (Ok(a), Ok(o)) => OraclePoint {
                    power_w: task.power_w,
                    delta: task.delta,
                    analytic_re: Some(a.re),
                    analytic_im: Some(a.im),
                    oracle_re: Some(o.re),
                    oracle_im: Some(o.im),
                    rel_dev: Some((o - a).norm() / a.norm()),
                    error: None,
                },
                (a, o) => OraclePoint {
                    power_w: task.power_w,
                    delta: task.delta,
                    analytic_re: a.as_ref().ok().map(|v| v.re),
                    analytic_im: a.as_ref().ok().map(|v| v.im),
                    oracle_re: o.as_ref().ok().map(|v| v.re),
                    oracle_im: o.as_ref().ok().map(|v| v.im),
                    rel_dev: None,
                    error: Some(match (a, o) {
                        (Err(e), _) => format!("closed form: {e}"),
                        (_, Err(e)) => format!("integration: {e}"),
                        _ => unreachable!("both sides succeeded"),
                    }),
                },
            }
        })
        .collect();

    let hash_drive = tasks
        .first()
        .map(|t| t.drive)
        .expect("validated specs have at least one task");
    Ok(OracleReport::new(
        points,
        spec.threshold,
        params_hash(&sys, &hash_drive),
    ))
}

/// Write an oracle report as `{stem}.json` under `out_dir`, with a manifest
/// capturing the generating command.
pub fn write_oracle_report(
    cfg: &Config,
    report: &OracleReport,
    out_dir: &Path,
    stem: &str,
    command: &[String],
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir)?;
    let report_name = format!("{stem}.json");
    let manifest_name = format!("{stem}.manifest.json");
    let report_path = out_dir.join(&report_name);
    let manifest_path = out_dir.join(&manifest_name);
    write_file(&report_path, report.to_json()?.as_bytes())?;
    let manifest = manifest_for(
        cfg,
        command,
        Some(SweepEvaluator::Oracle.as_str().to_string()),
        None,
        None,
        None,
        None,
        vec![report_name],
    );
    write_file(&manifest_path, manifest.to_json()?.as_bytes())?;
    Ok((report_path, manifest_path))
}
