//! Pump-probe response of a driven optomechanical cavity.
//!
//! A single cavity mode couples to a mechanical mode through radiation
//! pressure. A strong pump near the red sideband (effective detuning
//! Delta_eff close to omega_m) and a weak probe offset by delta from the
//! pump beat inside the cavity; the beat drives the mirror, and the
//! mirror's motion scatters pump light back onto the probe. That
//! interference carves a narrow transparency window into the cavity line
//! and, past a critical pump power, splits the line into a doublet.
//!
//! Every observable reduces to three rates and one drive number: the
//! cavity half-width kappa, the mechanical half-width gamma_m/2, the
//! effective detuning Delta_eff, and the coupling
//! beta = chi0^2 c0^2 / (2 m hbar omega_m) in rad^2/s^2 set by the
//! circulating pump field. In the resolved-sideband window, with
//! x = delta - omega_m, the probe transmission is the two-pole form
//!
//! ```text
//! eps_T(x) = 2 kappa / (kappa - i x + beta / (gamma_m / 2 - i x))
//! ```
//!
//! whose poles coalesce at 4 beta = (kappa - gamma_m/2)^2; the pump power
//! reaching that coupling is the critical power separating the dip regime
//! from the split doublet. [`response_exact`] keeps the full linear
//! response with no sideband assumption.
//!
//! Two independent routes compute every response: the closed forms above,
//! and direct time-domain integration of the nonlinear mean-value
//! equations ([`oracle_response`]). The two routes are compared, never
//! merged; [`run_oracle_check`] automates the comparison.
//!
//! # Units
//!
//! Internal frequencies, rates, and detunings are angular (rad/s); kappa
//! and gamma_m are half-widths. Config files quote frequencies divided by
//! 2 pi (kHz for kappa and omega_m, Hz for gamma_m) and are converted on
//! load. Powers are watts in the API and milliwatts at the CLI surface.
//! Masses are kilograms internally, nanograms in config files.
//!
//! # Capabilities
//!
//! - [`params`]: validated system and drive parameters, including the
//!   dimensionless benchmark set used for fast cross-checks.
//! - [`steady`]: pump-only operating point (photon number, static mirror
//!   shift, bistable branches), regime classification, critical power,
//!   linearized stability.
//! - [`response`]: closed-form transmission, poles, residues, and the
//!   partial-fraction decomposition.
//! - [`spectrum`]: frequency grids, CSV emission, dip and width metrics.
//! - [`oracle`]: adaptive time-domain integrator for the mean-value
//!   equations with harmonic extraction.
//! - [`sweep`]: artifact-producing runs (spectra, power sweeps, figure
//!   presets, integrator cross-checks) with reproducible manifests.
//! - [`config`]: key = value run files; [`report`]: run manifests.
//!
//! Each capability has a runnable demonstration under `examples/`:
//! `transparency_spectrum`, `pole_interference`, `power_sweep`,
//! `oracle_crosscheck`, `dispersion_and_width`.
//!
//! ```
//! use omit::{response_sideband, solve_operating_point, Config};
//!
//! let cfg = Config::builtin();
//! let op = solve_operating_point(&cfg.system, &cfg.drive, cfg.detuning_mode())?;
//! let dip = response_sideband(&cfg.system, &op, 0.0).value.re;
//! assert!(dip > 0.0 && dip < 0.011);
//! # Ok::<(), omit::Error>(())
//! ```

pub mod config;
pub mod error;
pub mod oracle;
pub mod params;
pub mod report;
pub mod response;
pub mod spectrum;
pub mod steady;
pub mod sweep;
pub mod units;

pub use config::Config;
pub use error::{Error, Result};
pub use oracle::{
    extract_harmonics, integrate_mean_values, oracle_response, HarmonicExtract,
    IntegrationOptions, MeanState, OracleRun, Trajectory,
};
pub use params::{DriveParams, SystemParams, ValidationWarning};
pub use report::{OraclePoint, OracleReport, OracleSummary, RunManifest};
pub use response::{
    poles, quadratures, residues, response_exact, response_no_coupling, response_sideband,
    ComplexResponse, PoleDecomposition, Poles,
};
pub use spectrum::{
    compute_spectrum, dip_metrics, write_csv, DipClass, DipMetrics, Evaluator, GridSpec, Spectrum,
};
pub use steady::{
    classify_regime, critical_power, critical_power_from_state, drive_for_target_beta,
    solve_operating_point, stability_check, Branch, DetuningMode, OperatingPoint, Regime,
    StabilityReport, TargetedDrive,
};
pub use units::{mw_from_w, w_from_mw};
pub use sweep::{
    run_figure, run_oracle_check, run_power_sweep, run_spectrum_command, write_oracle_report,
    FigurePreset, OracleCheckSpec, PowerSweepRun, SpectrumRun, SweepEvaluator, SweepSpec,
    SweepVariable,
};
