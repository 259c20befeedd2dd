//! Sweep the pump power across the pole-splitting threshold and show the
//! regime flip bracketing the critical power in the emitted CSV.
//!
//! Usage: cargo run --example power_sweep

use omit::{
    critical_power, mw_from_w, run_power_sweep, solve_operating_point, w_from_mw, Config,
    SweepEvaluator, SweepSpec, SweepVariable,
};
use std::path::Path;

fn main() -> omit::Result<()> {
    let cfg = Config::builtin();

    let spec = SweepSpec {
        variable: SweepVariable::PumpPower,
        lo: 0.0,
        hi: w_from_mw(10.0),
        n_points: 41,
        evaluator: SweepEvaluator::Sideband,
        include_pole_parts: false,
        include_baseline: false,
        include_metrics: false,
    };
    let out = Path::new("out/power_sweep");
    let command = vec!["example:power_sweep".to_string()];
    let run = run_power_sweep(&cfg, &spec, out, "power_sweep", &command)?;

    let op = solve_operating_point(&cfg.system, &cfg.drive, cfg.detuning_mode())?;
    let crit = critical_power(&cfg.system, Some(op.delta_eff))?;
    println!("critical power {:.6} mW", mw_from_w(crit));
    println!("wrote {} ({} rows)", run.csv_path.display(), run.rows);
    println!();

    // Re-read the artifact and print the rows bracketing the regime flip.
    let text = std::fs::read_to_string(&run.csv_path)?;
    let lines: Vec<&str> = text.lines().collect();
    println!("{}", lines[0]);
    let mut prev_regime = "";
    for pair in lines[1..].windows(2) {
        let regime = |row: &str| row.split(',').nth(2).unwrap_or("").to_string();
        let (a, b) = (regime(pair[0]), regime(pair[1]));
        if a == "eit_region" && b != "eit_region" && prev_regime != "printed" {
            println!("{}", pair[0]);
            println!("{}", pair[1]);
            let p_lo: f64 = pair[0].split(',').next().unwrap().parse().unwrap();
            let p_hi: f64 = pair[1].split(',').next().unwrap().parse().unwrap();
            println!();
            println!(
                "flip between {p_lo} and {p_hi} mW brackets the critical {:.4} mW",
                mw_from_w(crit)
            );
            prev_regime = "printed";
        }
    }
    Ok(())
}
