//! Cross-check the closed-form response against direct time-domain
//! integration of the mean-value equations, on the dimensionless benchmark
//! set and at one full-scale point.
//!
//! Usage: cargo run --example oracle_crosscheck

use omit::{
    oracle_response, response_exact, run_oracle_check, solve_operating_point,
    write_oracle_report, Config, DetuningMode, IntegrationOptions, OracleCheckSpec,
};
use std::path::Path;

fn main() -> omit::Result<()> {
    let cfg = Config::builtin();

    // Dimensionless benchmark: 11 detunings across the sideband at half the
    // critical coupling, integrator vs closed form.
    let spec = OracleCheckSpec {
        n_points: 11,
        ..OracleCheckSpec::default()
    };
    let report = run_oracle_check(&cfg, &spec)?;
    let s = &report.summary;
    println!(
        "benchmark set: {} points, max |oracle - analytic|/|analytic| = {:.3e}",
        s.n_ok,
        s.max_rel_dev.unwrap_or(f64::NAN)
    );
    let worst = report
        .points
        .iter()
        .max_by(|a, b| a.rel_dev.partial_cmp(&b.rel_dev).unwrap())
        .expect("report has points");
    // The benchmark set is dimensionless, so the drive power is quoted in
    // its own units rather than watts.
    println!(
        "worst point: delta = {:.4e} at drive power {:.3e}",
        worst.delta, worst.power_w
    );

    let out = Path::new("out/oracle_crosscheck");
    let command = vec!["example:oracle_crosscheck".to_string()];
    let (report_path, manifest_path) =
        write_oracle_report(&cfg, &report, out, "oracle_check", &command)?;
    println!("wrote {}", report_path.display());
    println!("wrote {}", manifest_path.display());

    // One full-scale point. The integrator runs the bare dynamics, so the
    // closed form is evaluated at the self-consistent operating point of
    // the same bare detuning.
    let sys = cfg.system;
    let bare = sys.omega0 - cfg.drive.omega_c;
    let op = solve_operating_point(
        &sys,
        &cfg.drive,
        DetuningMode::SelfConsistent {
            bare_detuning: bare,
            branch: None,
        },
    )?;
    let delta = 0.95 * sys.omega_m;
    let exact = response_exact(&sys, &op, delta)?.value;
    let run = oracle_response(&sys, &cfg.drive, delta, &IntegrationOptions::default())?;
    let dev = (run.response.value - exact).norm() / exact.norm();
    println!();
    println!("full scale at delta = 0.95 omega_m, 1 mW:");
    println!("  closed form  {:.9} {:+.9}i", exact.re, exact.im);
    println!(
        "  integrator   {:.9} {:+.9}i",
        run.response.value.re, run.response.value.im
    );
    println!("  relative deviation {dev:.3e}");
    println!(
        "  settled after {:.3e} s, cycle residual {:.1e}",
        run.transient_end, run.cycle_residual
    );
    Ok(())
}
