//! How the transparency dip, its width, and the center dispersion slope
//! move with pump power, and where the leading-order width formula
//! gamma_m/2 + beta/kappa stops being adequate.
//!
//! Usage: cargo run --example dispersion_and_width

use omit::{
    compute_spectrum, dip_metrics, solve_operating_point, w_from_mw, Config, Evaluator, GridSpec,
};

fn main() -> omit::Result<()> {
    let cfg = Config::builtin();
    let sys = cfg.system;
    let mode = cfg.detuning_mode();

    println!(
        "   P (mW)   beta/kappa^2       dip    hwhm grid   hwhm pole   leading-order   slope sign"
    );
    for &mw in &[0.25, 0.5, 1.0, 2.0, 3.0, 3.5] {
        let local = cfg.with_pump_power(w_from_mw(mw));
        let op = solve_operating_point(&sys, &local.drive, mode)?;
        let grid = GridSpec {
            x_min: -0.3 * sys.omega_m,
            x_max: 0.3 * sys.omega_m,
            n_points: 4001,
        }
        .build()?;
        let spectrum = compute_spectrum(&sys, &op, &grid, Evaluator::Sideband, false, false)?;
        let m = dip_metrics(&sys, &op, &spectrum)?;

        let leading = 0.5 * sys.gamma_m + op.beta / sys.kappa;
        let hwhm_grid = m
            .narrow_hwhm_numeric
            .map(|w| format!("{w:9.1}"))
            .unwrap_or_else(|| "        -".to_string());
        println!(
            "{mw:9.2}   {:12.5}   {:7.4}   {hwhm_grid}   {:9.1}   {leading:13.1}   {:>10}",
            op.beta / (sys.kappa * sys.kappa),
            m.dip_value,
            m.narrow_hwhm_analytic,
            if m.dispersion_slope_at_center > 0.0 { "+" } else { "-" },
        );
    }

    println!();
    println!("the leading-order width is adequate only while beta/kappa^2 stays small:");
    println!("by 1 mW (beta/kappa^2 = 0.065) it sits 7% below the pole width and 7% above");
    println!("the width measured on the grid, which the overlapping broad line compresses.");
    Ok(())
}
