//! Thin command-line front end. All computation lives in the library;
//! this binary parses arguments, loads config, dispatches, and formats
//! errors as one-line JSON on standard error with exit codes 0 (success),
//! 2 (validation), 3 (numerical failure), 4 (threshold breach).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use omit::params::PROBE_RATIO_MAX_DEFAULT;
use omit::report::params_hash;
use omit::response::{poles, residues};
use omit::steady::{critical_power, solve_operating_point};
use omit::sweep::{
    run_figure, run_oracle_check, run_power_sweep, run_spectrum_command, write_oracle_report,
    FigurePreset, OracleCheckSpec, SweepEvaluator, SweepSpec, SweepVariable,
};
use omit::{Config, Error, IntegrationOptions, Result};

#[derive(Parser)]
#[command(
    name = "omit",
    version,
    about = "Pump-probe response of a driven optomechanical cavity"
)]
struct Cli {
    /// Config file (key=value lines); the built-in reference cavity when
    /// omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Override the configured pump power, mW.
    #[arg(long, global = true)]
    power_mw: Option<f64>,

    /// Override the configured probe/pump power ratio.
    #[arg(long, global = true)]
    probe_ratio: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvaluatorArg {
    /// Full closed-form response.
    Exact,
    /// Two-pole sideband form.
    Sideband,
}

impl From<EvaluatorArg> for SweepEvaluator {
    fn from(e: EvaluatorArg) -> Self {
        match e {
            EvaluatorArg::Exact => SweepEvaluator::Exact,
            EvaluatorArg::Sideband => SweepEvaluator::Sideband,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the probe offset and write the response spectrum as CSV.
    Spectrum {
        /// Lower probe offset, units of the mechanical frequency.
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        lo: f64,
        /// Upper probe offset, units of the mechanical frequency.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        hi: f64,
        /// Grid points including both edges.
        #[arg(long, default_value_t = 4001)]
        points: usize,
        #[arg(long, value_enum, default_value_t = EvaluatorArg::Sideband)]
        evaluator: EvaluatorArg,
        /// Emit per-pole partial-fraction columns.
        #[arg(long)]
        pole_parts: bool,
        /// Emit the coupling-off baseline columns.
        #[arg(long)]
        baseline: bool,
        /// Compute dip metrics into the manifest (needs a grid that
        /// resolves the narrow feature).
        #[arg(long)]
        metrics: bool,
    },
    /// Print the response poles, residues, and regime as JSON.
    Poles,
    /// Print the pole-coalescence pump power as JSON.
    CriticalPower,
    /// Sweep the pump power and write per-power dip metrics as CSV.
    PowerSweep {
        /// Lowest pump power, mW.
        #[arg(long, default_value_t = 0.0)]
        lo_mw: f64,
        /// Highest pump power, mW.
        #[arg(long, default_value_t = 10.0)]
        hi_mw: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, value_enum, default_value_t = EvaluatorArg::Sideband)]
        evaluator: EvaluatorArg,
    },
    /// Integrate the mean-value equations across a detuning grid and
    /// compare against the closed-form response.
    OracleCheck {
        /// Probe detuning points across [0.9, 1.1] mechanical frequencies.
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Pump powers as comma-separated fractions of the
        /// pole-coalescence power; 0 compares the coupling-off line.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        fractions: Vec<f64>,
        /// Acceptance bound on the max relative deviation.
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
        /// Probe/pump amplitude ratio for the generated drives.
        #[arg(long, default_value_t = 1e-3)]
        probe_amp_ratio: f64,
        /// Integrate the configured cavity instead of the dimensionless
        /// benchmark set (slow: the full-scale rates span four decades).
        #[arg(long)]
        full_scale: bool,
    },
    /// Absorptive quadrature with transparency dip, 1 mW pump.
    Fig2,
    /// Dispersive quadrature, 1 mW pump.
    Fig3,
    /// Absorptive quadrature with split doublet, 6.9 mW pump.
    Fig4,
    /// Dispersive quadrature, 6.9 mW pump.
    Fig5,
}

fn error_json(e: &Error) -> String {
    serde_json::json!({
        "error": {
            "code": e.exit_code(),
            "kind": e.kind(),
            "message": e.to_string(),
        }
    })
    .to_string()
}

fn complex_json(z: num_complex::Complex64) -> serde_json::Value {
    serde_json::json!({ "re": z.re, "im": z.im })
}

fn print_json(v: &serde_json::Value) {
    let text = serde_json::to_string_pretty(v).expect("value serialization is infallible");
    println!("{text}");
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::builtin(),
    };
    if let Some(ratio) = cli.probe_ratio {
        if !ratio.is_finite() || ratio < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "probe ratio must be finite and non-negative, got {ratio:e}"
            )));
        }
        cfg.probe_ratio = ratio;
        cfg.drive.power_p = ratio * cfg.drive.power_c;
    }
    if let Some(mw) = cli.power_mw {
        cfg = cfg.with_pump_power(omit::units::w_from_mw(mw));
    }
    for w in cfg.system.validate()? {
        eprintln!("warning: {w}");
    }
    for w in cfg.drive.validate(PROBE_RATIO_MAX_DEFAULT)? {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let argv: Vec<String> = std::env::args().collect();

    match &cli.command {
        Command::Spectrum {
            lo,
            hi,
            points,
            evaluator,
            pole_parts,
            baseline,
            metrics,
        } => {
            let spec = SweepSpec {
                variable: SweepVariable::ProbeDetuningX,
                lo: lo * cfg.system.omega_m,
                hi: hi * cfg.system.omega_m,
                n_points: *points,
                evaluator: (*evaluator).into(),
                include_pole_parts: *pole_parts,
                include_baseline: *baseline,
                include_metrics: *metrics,
            };
            let run = run_spectrum_command(&cfg, &spec, &cli.out, "spectrum", &argv)?;
            let mut summary = serde_json::json!({
                "csv": run.csv_path,
                "manifest": run.manifest_path,
                "rows": run.rows,
                "beta": run.operating_point.beta,
                "regime": run.operating_point.regime.as_str(),
            });
            if let Some(m) = run.metrics {
                summary["dip_value"] = m.dip_value.into();
                summary["dip_class"] = m.classification.as_str().into();
            }
            print_json(&summary);
        }
        Command::Poles => {
            let sys = &cfg.system;
            let op = solve_operating_point(sys, &cfg.drive, cfg.detuning_mode())?;
            let p = poles(sys, &op);
            let mut out = serde_json::json!({
                "beta": op.beta,
                "delta_eff": op.delta_eff,
                "photon_number": op.c0_sq,
                "regime": op.regime.as_str(),
                "x_plus": complex_json(p.x_plus),
                "x_minus": complex_json(p.x_minus),
                "params_hash": params_hash(sys, &cfg.drive),
            });
            match residues(sys, &op) {
                Ok(d) => {
                    out["a_plus"] = complex_json(d.a_plus);
                    out["a_minus"] = complex_json(d.a_minus);
                }
                Err(Error::DegeneratePoles(msg)) => {
                    out["residue_note"] = msg.into();
                }
                Err(e) => return Err(e),
            }
            print_json(&out);
        }
        Command::CriticalPower => {
            let sys = &cfg.system;
            let op = solve_operating_point(sys, &cfg.drive, cfg.detuning_mode())?;
            let crit_w = critical_power(sys, Some(op.delta_eff))?;
            let edge = sys.kappa - 0.5 * sys.gamma_m;
            let out = serde_json::json!({
                "critical_power_w": crit_w,
                "critical_power_mw": omit::units::mw_from_w(crit_w),
                "beta_critical": 0.25 * edge * edge,
                "delta_eff": op.delta_eff,
                "configured_power_w": cfg.drive.power_c,
                "configured_regime": op.regime.as_str(),
                "params_hash": params_hash(sys, &cfg.drive),
            });
            print_json(&out);
        }
        Command::PowerSweep {
            lo_mw,
            hi_mw,
            points,
            evaluator,
        } => {
            let spec = SweepSpec {
                variable: SweepVariable::PumpPower,
                lo: omit::units::w_from_mw(*lo_mw),
                hi: omit::units::w_from_mw(*hi_mw),
                n_points: *points,
                evaluator: (*evaluator).into(),
                include_pole_parts: false,
                include_baseline: false,
                include_metrics: true,
            };
            let run = run_power_sweep(&cfg, &spec, &cli.out, "power_sweep", &argv)?;
            let summary = serde_json::json!({
                "csv": run.csv_path,
                "manifest": run.manifest_path,
                "rows": run.rows,
                "critical_power_w": run.critical_power_w,
            });
            print_json(&summary);
        }
        Command::OracleCheck {
            points,
            fractions,
            threshold,
            probe_amp_ratio,
            full_scale,
        } => {
            let spec = OracleCheckSpec {
                n_points: *points,
                power_fractions: fractions.clone(),
                threshold: *threshold,
                probe_amp_ratio: *probe_amp_ratio,
                use_scaled_params: !*full_scale,
                options: IntegrationOptions::default(),
                ..OracleCheckSpec::default()
            };
            let report = run_oracle_check(&cfg, &spec)?;
            let (report_path, manifest_path) =
                write_oracle_report(&cfg, &report, &cli.out, "oracle_check", &argv)?;
            let summary = serde_json::json!({
                "report": report_path,
                "manifest": manifest_path,
                "summary": report.summary,
            });
            print_json(&summary);
            report.check()?;
        }
        Command::Fig2 | Command::Fig3 | Command::Fig4 | Command::Fig5 => {
            let preset = match &cli.command {
                Command::Fig2 => FigurePreset::Fig2,
                Command::Fig3 => FigurePreset::Fig3,
                Command::Fig4 => FigurePreset::Fig4,
                Command::Fig5 => FigurePreset::Fig5,
                _ => unreachable!("outer match covers figures only"),
            };
            let run = run_figure(&cfg, preset, &cli.out, &argv)?;
            let summary = serde_json::json!({
                "csv": run.csv_path,
                "manifest": run.manifest_path,
                "rows": run.rows,
                "pump_power_w": preset.power_w(),
                "beta": run.operating_point.beta,
                "regime": run.operating_point.regime.as_str(),
                "dip_value": run.metrics.map(|m| m.dip_value),
            });
            print_json(&summary);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{}", error_json(&e));
            std::process::exit(e.exit_code());
        }
    }
}
