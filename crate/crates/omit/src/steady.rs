//! Steady-state operating point of the pumped cavity: effective detuning,
//! intracavity photon number, interference strength, regime classification,
//! the critical-power boundary, and a linearized stability check.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};

/// Root choice when the self-consistent photon-number cubic is bistable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Lowest photon number; the branch connected by continuation from
    /// zero pump power.
    Lowest,
    /// Highest photon number.
    Highest,
}

/// How the effective pump detuning is determined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetuningMode {
    /// Take the effective detuning as given; the static mirror shift is
    /// considered already absorbed into it. Value in rad/s.
    Fixed(f64),
    /// Solve Delta = bare_detuning - 2*beta/omega_m self-consistently,
    /// where bare_detuning = omega0 - omega_c (rad/s). `branch` picks a
    /// root when the cubic is bistable; `None` makes bistability an error.
    SelfConsistent {
        bare_detuning: f64,
        branch: Option<Branch>,
    },
}

/// Which side of the pole-coalescence boundary the operating point sits on.
/// The boundary compares 4*beta against (kappa - gamma_m/2)^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// 4*beta below the boundary: both response poles sit at zero offset
    /// from the sideband and the narrow one carves a transparency dip.
    EitRegion,
    /// On the boundary within a 1e-9 relative band: poles coincide.
    Critical,
    /// 4*beta above the boundary: poles split to symmetric offsets and the
    /// line shape becomes a doublet.
    SplittingRegion,
}

impl Regime {
    /// Stable lowercase token used in CSV output and manifests.
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::EitRegion => "eit_region",
            Regime::Critical => "critical",
            Regime::SplittingRegion => "splitting_region",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solved steady state of the pumped cavity (probe off).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    /// Effective pump detuning including the static mirror shift, rad/s.
    pub delta_eff: f64,
    /// Intracavity pump photon number |c0|^2, dimensionless.
    pub c0_sq: f64,
    /// Interference strength beta = chi0^2 |c0|^2 / (2 m hbar omega_m),
    /// rad^2/s^2.
    pub beta: f64,
    /// Radiation-pressure coupling constant hbar*omega0/L, N in SI.
    pub chi0: f64,
    /// Side of the pole-coalescence boundary.
    pub regime: Regime,
}

impl OperatingPoint {
    /// Static mirror displacement chi0*|c0|^2/(m*omega_m^2), m in SI.
    pub fn mean_displacement(&self, sys: &SystemParams) -> f64 {
        self.chi0 * self.c0_sq / (sys.mass * sys.omega_m * sys.omega_m)
    }
}

/// Linearized stability result. Report only: marginal spectra (real parts
/// within rounding of zero) count as unstable.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// True when every drift-matrix eigenvalue has strictly negative real
    /// part beyond the rounding band.
    pub stable: bool,
    /// Drift-matrix eigenvalues as (re, im) pairs, rad/s, sorted by
    /// descending real part.
    pub eigenvalues: Vec<(f64, f64)>,
    /// Largest eigenvalue real part, rad/s.
    pub max_re: f64,
}

fn beta_from_photon_number(sys: &SystemParams, c0_sq: f64) -> f64 {
    let chi0 = sys.chi0();
    chi0 * chi0 * c0_sq / (2.0 * sys.mass * sys.hbar * sys.omega_m)
}

/// Radiation-pressure frequency-shift coefficient s = chi0^2/(m hbar
/// omega_m^2), so that Delta = bare - s*|c0|^2 and s*|c0|^2 = 2*beta/omega_m.
fn shift_coefficient(sys: &SystemParams) -> f64 {
    let chi0 = sys.chi0();
    chi0 * chi0 / (sys.mass * sys.hbar * sys.omega_m * sys.omega_m)
}

/// Classify which side of the pole-coalescence boundary `beta` falls on.
pub fn classify_regime(sys: &SystemParams, beta: f64) -> Regime {
    let edge = (sys.kappa - 0.5 * sys.gamma_m).powi(2);
    let four_beta = 4.0 * beta;
    let band = 1e-9 * edge.max(four_beta);
    if (four_beta - edge).abs() <= band {
        Regime::Critical
    } else if four_beta < edge {
        Regime::EitRegion
    } else {
        Regime::SplittingRegion
    }
}

/// Real roots of x^3 + a*x^2 + b*x + c, ascending, polished by Newton steps
/// on the monic cubic. A repeated root appears once per multiplicity.
fn cubic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let mut roots = if disc > 0.0 {
        // One real root; the unconditionally stable single-cube-root form
        // avoids cancellation between the two classic cube-root terms.
        let s = disc.sqrt();
        let t = if half_q >= 0.0 { -half_q - s } else { -half_q + s };
        let u = t.cbrt();
        let root = if u == 0.0 { 0.0 } else { u - third_p / u };
        vec![root + shift]
    } else if disc < 0.0 {
        let r = (-third_p).sqrt();
        let theta = (-half_q / (r * r * r)).clamp(-1.0, 1.0).acos();
        let mut v: Vec<f64> = (0..3)
            .map(|k| 2.0 * r * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    } else if p == 0.0 {
        vec![shift, shift, shift]
    } else {
        let double = -1.5 * q / p + shift;
        let simple = 3.0 * q / p + shift;
        let mut v = vec![double, double, simple];
        v.sort_by(f64::total_cmp);
        v
    };

    for x in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*x + a) * *x + b) * *x + c;
            let df = (3.0 * *x + 2.0 * a) * *x + b;
            if df != 0.0 && f.is_finite() {
                let step = f / df;
                if step.is_finite() {
                    *x -= step;
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Solve the pumped steady state.
///
/// In `Fixed` mode the photon number follows directly from the Lorentzian
/// denominator. In `SelfConsistent` mode the photon number solves the cubic
/// u^3 - 2*D0*u^2 + (kappa^2 + D0^2)*u = s*eps_c^2 in the shift variable
/// u = s*|c0|^2; the returned root is the one connected by continuation from
/// zero pump power (damped fixed-point iteration, polynomial fallback), and
/// three coexisting roots are an error unless a branch is named.
pub fn solve_operating_point(
    sys: &SystemParams,
    drive: &DriveParams,
    mode: DetuningMode,
) -> Result<OperatingPoint> {
    sys.validate()?;
    drive.validate(f64::INFINITY)?;
    let eps_c = drive.pump_amplitude(sys)?;
    let kappa_sq = sys.kappa * sys.kappa;
    let chi0 = sys.chi0();

    let (delta_eff, c0_sq) = match mode {
        DetuningMode::Fixed(delta) => {
            if !delta.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "fixed detuning must be finite, got {delta:e}"
                )));
            }
            (delta, eps_c * eps_c / (kappa_sq + delta * delta))
        }
        DetuningMode::SelfConsistent {
            bare_detuning,
            branch,
        } => {
            if !bare_detuning.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "bare detuning must be finite, got {bare_detuning:e}"
                )));
            }
            let s = shift_coefficient(sys);
            let rhs = s * eps_c * eps_c;
            let u = solve_shift_cubic(sys, bare_detuning, rhs, branch, s)?;
            let c0_sq = u / s;
            let delta_eff = bare_detuning - u;
            if eps_c > 0.0 {
                let residual = (c0_sq * (kappa_sq + delta_eff * delta_eff) - eps_c * eps_c).abs()
                    / (eps_c * eps_c);
                if residual >= 1e-9 {
                    return Err(Error::Numerical(format!(
                        "self-consistent photon number failed its residual check: \
                         relative residual {residual:e} >= 1e-9"
                    )));
                }
            }
            (delta_eff, c0_sq)
        }
    };

    let beta = beta_from_photon_number(sys, c0_sq);
    Ok(OperatingPoint {
        delta_eff,
        c0_sq,
        beta,
        chi0,
        regime: classify_regime(sys, beta),
    })
}

/// Solve u^3 - 2*D0*u^2 + (kappa^2+D0^2)*u - rhs = 0 for the physical shift
/// u = s*|c0|^2 >= 0. `s` is only used to convert roots to photon numbers in
/// the bistable error report.
fn solve_shift_cubic(
    sys: &SystemParams,
    bare: f64,
    rhs: f64,
    branch: Option<Branch>,
    s: f64,
) -> Result<f64> {
    if rhs == 0.0 {
        return Ok(0.0);
    }
    let kappa_sq = sys.kappa * sys.kappa;
    // Scale to a dimensionless cubic so the coefficients stay O(1).
    let w = sys.kappa.max(bare.abs()).max(rhs.cbrt());
    let a = -2.0 * bare / w;
    let b = (kappa_sq + bare * bare) / (w * w);
    let c = -rhs / (w * w * w);
    let roots: Vec<f64> = cubic_real_roots(a, b, c)
        .into_iter()
        .map(|v| (v * w).max(0.0))
        .collect();

    let distinct = {
        let mut d: Vec<f64> = Vec::new();
        for &r in &roots {
            if d.last().map_or(true, |&prev| r - prev > 1e-9 * r.abs().max(prev.abs())) {
                d.push(r);
            }
        }
        d
    };

    if distinct.len() == 3 {
        return match branch {
            None => Err(Error::Bistable {
                roots: distinct.iter().map(|&u| u / s).collect(),
            }),
            Some(Branch::Lowest) => Ok(polish_root(distinct[0], bare, kappa_sq, rhs)),
            Some(Branch::Highest) => Ok(polish_root(distinct[2], bare, kappa_sq, rhs)),
        };
    }

    // Single physical root: damped fixed-point continuation from zero power,
    // with the polynomial root as fallback when the iteration stalls.
    let mut u = 0.0_f64;
    let mut converged = false;
    for _ in 0..200 {
        let denom = kappa_sq + (bare - u) * (bare - u);
        let next = 0.5 * u + 0.5 * rhs / denom;
        let du = (next - u).abs();
        u = next;
        if du <= 1e-12 * u.abs() {
            converged = true;
            break;
        }
    }
    let candidate = if converged { u } else { distinct[0] };
    Ok(polish_root(candidate, bare, kappa_sq, rhs))
}

fn polish_root(u0: f64, bare: f64, kappa_sq: f64, rhs: f64) -> f64 {
    let mut u = u0;
    for _ in 0..3 {
        let d = bare - u;
        let f = u * (kappa_sq + d * d) - rhs;
        let df = kappa_sq + d * d - 2.0 * u * d;
        if df != 0.0 {
            let step = f / df;
            if step.is_finite() {
                u -= step;
            }
        }
    }
    u.max(0.0)
}

/// Pump power at which the two response poles coalesce, W.
///
/// `delta_eff` is the effective detuning entering the Lorentzian photon-
/// number factor; it defaults to omega_m (the resolved-sideband working
/// point). The pump carrier is placed at omega0 - delta_eff. The photon
/// number cancels, so the result is independent of the actual drive:
/// power = m*hbar^2*omega_c*omega_m*(kappa^2+Delta^2)*(kappa-gamma_m/2)^2
///         / (4*kappa*chi0^2).
pub fn critical_power(sys: &SystemParams, delta_eff: Option<f64>) -> Result<f64> {
    sys.validate()?;
    let delta = delta_eff.unwrap_or(sys.omega_m);
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "detuning must be finite, got {delta:e}"
        )));
    }
    let omega_c = sys.omega0 - delta;
    if !(omega_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "derived pump frequency omega0 - delta = {omega_c:e} rad/s must be positive"
        )));
    }
    let chi0 = sys.chi0();
    let g = 0.5 * sys.gamma_m;
    let edge = (sys.kappa - g) * (sys.kappa - g);
    Ok(sys.mass * sys.hbar * sys.hbar * omega_c * sys.omega_m
        * (sys.kappa * sys.kappa + delta * delta)
        * edge
        / (4.0 * sys.kappa * chi0 * chi0))
}

/// Pole-coalescence power recomputed from a solved operating point and its
/// drive, W: power = hbar*omega_c*|c0|^2*(kappa^2+Delta^2)*(kappa-gamma_m/2)^2
/// / (8*kappa*beta). Because beta is proportional to |c0|^2 the drive power
/// cancels; this form exists to let tests witness that cancellation.
pub fn critical_power_from_state(
    sys: &SystemParams,
    drive: &DriveParams,
    op: &OperatingPoint,
) -> Result<f64> {
    if !(op.beta > 0.0) {
        return Err(Error::InvalidParameter(
            "pole-coalescence power from state needs a driven operating point (beta > 0)".into(),
        ));
    }
    let g = 0.5 * sys.gamma_m;
    let edge = (sys.kappa - g) * (sys.kappa - g);
    Ok(sys.hbar * drive.omega_c * op.c0_sq
        * (sys.kappa * sys.kappa + op.delta_eff * op.delta_eff)
        * edge
        / (8.0 * sys.kappa * op.beta))
}

/// A drive built for a target operating point, carrying the exact bare
/// detuning. `omega0 - drive.omega_c` rounds at the optical scale (one ulp
/// of omega0 can exceed 1e-8 of the detuning), so consumers that need the
/// bare detuning must take it from here instead of re-deriving it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetedDrive {
    pub drive: DriveParams,
    /// Exact omega0 - omega_c, rad/s, before optical-scale rounding.
    pub bare_detuning: f64,
}

/// Build a drive that realizes the target interference strength at the given
/// effective detuning. The pump sits at omega0 - (delta_eff + 2*beta/omega_m)
/// so a self-consistent solve reproduces delta_eff; probe power is chosen so
/// that the amplitude ratio eps_p/eps_c equals `probe_amp_ratio` exactly at
/// the probe's own carrier.
pub fn drive_for_target_beta(
    sys: &SystemParams,
    beta: f64,
    delta_eff: f64,
    probe_amp_ratio: f64,
    delta: f64,
) -> Result<TargetedDrive> {
    sys.validate()?;
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target beta must be finite and non-negative, got {beta:e}"
        )));
    }
    let chi0 = sys.chi0();
    let c0_sq = 2.0 * sys.mass * sys.hbar * sys.omega_m * beta / (chi0 * chi0);
    let eps_c_sq = c0_sq * (sys.kappa * sys.kappa + delta_eff * delta_eff);
    let bare = delta_eff + 2.0 * beta / sys.omega_m;
    let omega_c = sys.omega0 - bare;
    if !(omega_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "derived pump frequency {omega_c:e} rad/s must be positive; \
             lower the target beta or the detuning"
        )));
    }
    let omega_p = omega_c + delta;
    if !(omega_p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "derived probe frequency {omega_p:e} rad/s must be positive"
        )));
    }
    let power_c = eps_c_sq * sys.hbar * omega_c / (2.0 * sys.kappa);
    let power_p =
        probe_amp_ratio * probe_amp_ratio * eps_c_sq * sys.hbar * omega_p / (2.0 * sys.kappa);
    Ok(TargetedDrive {
        drive: DriveParams {
            omega_c,
            power_c,
            power_p,
            delta,
        },
        bare_detuning: bare,
    })
}

/// Eigenvalue test of the 4x4 drift matrix of the linearized mean-value
/// system in the variables (dq, dp, Re dc, Im dc).
///
/// Report only: no domain validation beyond what the matrix needs, so
/// undamped or otherwise out-of-hierarchy parameter sets can be probed.
pub fn stability_check(
    sys: &SystemParams,
    drive: &DriveParams,
    op: &OperatingPoint,
) -> Result<StabilityReport> {
    if !(sys.mass > 0.0) || !(sys.hbar > 0.0) {
        return Err(Error::InvalidParameter(
            "stability check needs positive mass and hbar".into(),
        ));
    }
    if drive.power_c > 0.0 && !(drive.omega_c > 0.0) {
        return Err(Error::InvalidParameter(
            "stability check needs a positive pump frequency when the pump is on".into(),
        ));
    }
    let eps_c = (2.0 * sys.kappa * drive.power_c / (sys.hbar * drive.omega_c)).sqrt();
    let c0 = if eps_c == 0.0 {
        Complex64::ZERO
    } else {
        Complex64::new(eps_c, 0.0) / Complex64::new(sys.kappa, op.delta_eff)
    };
    let delta = op.delta_eff;
    // State rescaled to zero-point units (q by sqrt(m*omega_m/hbar), p by
    // 1/sqrt(m*hbar*omega_m)): a similarity transform that leaves the
    // eigenvalues unchanged but balances entries that would otherwise span
    // tens of orders of magnitude and defeat the eigensolver.
    let g_rate = op.chi0 / (sys.hbar * sys.mass * sys.omega_m).sqrt();
    let m = Matrix4::new(
        0.0,
        sys.omega_m,
        0.0,
        0.0,
        -sys.omega_m,
        -sys.gamma_m,
        2.0 * g_rate * c0.re,
        2.0 * g_rate * c0.im,
        -g_rate * c0.im,
        0.0,
        -sys.kappa,
        delta,
        g_rate * c0.re,
        0.0,
        -delta,
        -sys.kappa,
    );
    let eig = m.complex_eigenvalues();
    let mut eigenvalues: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    eigenvalues.sort_by(|a, b| b.0.total_cmp(&a.0));
    let max_re = eigenvalues[0].0;
    let scale = sys
        .kappa
        .abs()
        .max(sys.gamma_m.abs())
        .max(sys.omega_m.abs())
        .max(delta.abs())
        .max(1.0);
    let stable = max_re < -1e-12 * scale;
    Ok(StabilityReport {
        stable,
        eigenvalues,
        max_re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PROBE_RATIO_MAX_DEFAULT;

    fn one_mw_drive(sys: &SystemParams) -> DriveParams {
        DriveParams {
            omega_c: sys.omega0 - sys.omega_m,
            power_c: 1e-3,
            power_p: 1e-9,
            delta: sys.omega_m,
        }
    }

    #[test]
    fn fixed_mode_reference_photon_number_and_beta() {
        let sys = SystemParams::reference_cavity();
        let drive = one_mw_drive(&sys);
        let op =
            solve_operating_point(&sys, &drive, DetuningMode::Fixed(sys.omega_m)).unwrap();
        assert!((op.c0_sq - 3.8871037596459883e8).abs() / op.c0_sq < 1e-12);
        assert!((op.beta - 1.1912757970876709e11).abs() / op.beta < 1e-12);
        let beta_over_kappa_sq = op.beta / (sys.kappa * sys.kappa);
        assert!(
            (beta_over_kappa_sq - 0.06527932601697795).abs() < 1e-12,
            "beta/kappa^2 = {beta_over_kappa_sq}"
        );
        assert_eq!(op.regime, Regime::EitRegion);
    }

    #[test]
    fn undriven_cavity_is_trivial_in_both_modes() {
        let sys = SystemParams::reference_cavity();
        let drive = DriveParams {
            power_c: 0.0,
            power_p: 0.0,
            ..one_mw_drive(&sys)
        };
        let fixed =
            solve_operating_point(&sys, &drive, DetuningMode::Fixed(sys.omega_m)).unwrap();
        assert_eq!(fixed.c0_sq, 0.0);
        assert_eq!(fixed.beta, 0.0);
        let bare = 1.234e6;
        let sc = solve_operating_point(
            &sys,
            &drive,
            DetuningMode::SelfConsistent {
                bare_detuning: bare,
                branch: None,
            },
        )
        .unwrap();
        assert_eq!(sc.c0_sq, 0.0);
        assert_eq!(sc.delta_eff, bare);
    }

    #[test]
    fn self_consistent_round_trip_recovers_fixed_delta() {
        let sys = SystemParams::reference_cavity();
        let drive = one_mw_drive(&sys);
        let fixed =
            solve_operating_point(&sys, &drive, DetuningMode::Fixed(sys.omega_m)).unwrap();
        let bare = sys.omega_m + 2.0 * fixed.beta / sys.omega_m;
        assert!((bare - 5990218.18213819).abs() / bare < 1e-9);
        let sc = solve_operating_point(
            &sys,
            &drive,
            DetuningMode::SelfConsistent {
                bare_detuning: bare,
                branch: None,
            },
        )
        .unwrap();
        assert!(
            (sc.delta_eff - sys.omega_m).abs() / sys.omega_m < 1e-9,
            "delta_eff = {:e}",
            sc.delta_eff
        );
        assert!((sc.c0_sq - fixed.c0_sq).abs() / fixed.c0_sq < 1e-9);
    }

    #[test]
    fn bistable_region_errors_without_branch_and_resolves_with_it() {
        let sys = SystemParams::reference_cavity();
        let bare = 5990218.18213819;
        let drive = DriveParams {
            power_c: 8e-3,
            ..one_mw_drive(&sys)
        };
        let mode = DetuningMode::SelfConsistent {
            bare_detuning: bare,
            branch: None,
        };
        let err = solve_operating_point(&sys, &drive, mode).unwrap_err();
        match err {
            Error::Bistable { roots } => {
                let expect = [
                    3.447771792829956e9,
                    5.1999677772763916e10,
                    6.085431486435352e10,
                ];
                assert_eq!(roots.len(), 3);
                for (r, e) in roots.iter().zip(expect) {
                    assert!((r - e).abs() / e < 1e-9, "root {r:e} vs {e:e}");
                }
            }
            other => panic!("expected bistable error, got {other:?}"),
        }
        let low = solve_operating_point(
            &sys,
            &drive,
            DetuningMode::SelfConsistent {
                bare_detuning: bare,
                branch: Some(Branch::Lowest),
            },
        )
        .unwrap();
        assert!((low.c0_sq - 3.447771792829956e9).abs() / low.c0_sq < 1e-9);
        let high = solve_operating_point(
            &sys,
            &drive,
            DetuningMode::SelfConsistent {
                bare_detuning: bare,
                branch: Some(Branch::Highest),
            },
        )
        .unwrap();
        assert!((high.c0_sq - 6.085431486435352e10).abs() / high.c0_sq < 1e-9);
    }

    #[test]
    fn bistability_onset_sits_between_seven_and_seven_and_a_half_mw() {
        let sys = SystemParams::reference_cavity();
        let bare = 5990218.18213819;
        for (power, bistable) in [(7.0e-3, false), (7.5e-3, true)] {
            let drive = DriveParams {
                power_c: power,
                ..one_mw_drive(&sys)
            };
            let result = solve_operating_point(
                &sys,
                &drive,
                DetuningMode::SelfConsistent {
                    bare_detuning: bare,
                    branch: None,
                },
            );
            assert_eq!(
                matches!(result, Err(Error::Bistable { .. })),
                bistable,
                "power {power} W"
            );
        }
    }

    #[test]
    fn critical_power_reference_value_and_limits() {
        let sys = SystemParams::reference_cavity();
        let pc = critical_power(&sys, None).unwrap();
        assert!((pc - 3.8271852458678337e-3).abs() / pc < 1e-12);
        assert_eq!(pc, critical_power(&sys, Some(sys.omega_m)).unwrap());

        let mut doubled = sys;
        doubled.mass *= 2.0;
        let pc2 = critical_power(&doubled, None).unwrap();
        assert!((pc2 - 2.0 * pc).abs() / pc < 1e-12);

        let mut degenerate = sys;
        degenerate.gamma_m = 2.0 * sys.kappa;
        assert_eq!(critical_power(&degenerate, None).unwrap(), 0.0);
    }

    #[test]
    fn critical_power_from_state_cancels_the_drive() {
        let sys = SystemParams::reference_cavity();
        let closed = critical_power(&sys, None).unwrap();
        for power in [0.5e-3, 1e-3, 6.9e-3] {
            let drive = DriveParams {
                power_c: power,
                ..one_mw_drive(&sys)
            };
            let op =
                solve_operating_point(&sys, &drive, DetuningMode::Fixed(sys.omega_m)).unwrap();
            let from_state = critical_power_from_state(&sys, &drive, &op).unwrap();
            assert!(
                (from_state - closed).abs() / closed < 1e-12,
                "power {power}: {from_state:e} vs {closed:e}"
            );
        }
    }

    #[test]
    fn regime_flips_exactly_at_critical_power() {
        let sys = SystemParams::reference_cavity();
        let pc = critical_power(&sys, None).unwrap();
        let drive_at = |p: f64| DriveParams {
            power_c: p,
            ..one_mw_drive(&sys)
        };
        let regime_at = |p: f64| {
            solve_operating_point(&sys, &drive_at(p), DetuningMode::Fixed(sys.omega_m))
                .unwrap()
                .regime
        };
        assert_eq!(regime_at(0.99 * pc), Regime::EitRegion);
        assert_eq!(regime_at(1.01 * pc), Regime::SplittingRegion);
        assert_eq!(regime_at(pc), Regime::Critical);
    }

    #[test]
    fn drive_for_target_beta_round_trips() {
        let sys = SystemParams::reference_cavity();
        let target = 1.1912757970876709e11;
        let targeted =
            drive_for_target_beta(&sys, target, sys.omega_m, 1e-4, sys.omega_m).unwrap();
        let drive = targeted.drive;
        assert!(drive.validate(PROBE_RATIO_MAX_DEFAULT).unwrap().is_empty());
        assert!((targeted.bare_detuning - 5990218.18213819).abs() < 1e-3);
        let op = solve_operating_point(
            &sys,
            &drive,
            DetuningMode::SelfConsistent {
                bare_detuning: targeted.bare_detuning,
                branch: None,
            },
        )
        .unwrap();
        assert!((op.beta - target).abs() / target < 1e-9);
        assert!((op.delta_eff - sys.omega_m).abs() / sys.omega_m < 1e-9);
        // The optical-scale subtraction loses what the exact field keeps.
        let rederived = sys.omega0 - drive.omega_c;
        assert!((rederived - targeted.bare_detuning).abs() < 1.0);
        let ratio = drive.probe_amplitude(&sys).unwrap() / drive.pump_amplitude(&sys).unwrap();
        assert!((ratio - 1e-4).abs() < 1e-16);
    }

    #[test]
    fn stability_reference_points_are_stable() {
        let sys = SystemParams::reference_cavity();
        for (power, expect_max_re) in [(1e-3, -94353.307f64), (6.9e-3, -675663.894f64)] {
            let drive = DriveParams {
                power_c: power,
                ..one_mw_drive(&sys)
            };
            let op =
                solve_operating_point(&sys, &drive, DetuningMode::Fixed(sys.omega_m)).unwrap();
            let report = stability_check(&sys, &drive, &op).unwrap();
            assert!(report.stable, "power {power}: max_re {:e}", report.max_re);
            assert!(
                (report.max_re - expect_max_re).abs() / expect_max_re.abs() < 1e-6,
                "power {power}: max_re {:e}",
                report.max_re
            );
            assert_eq!(report.eigenvalues.len(), 4);
        }
    }

    #[test]
    fn undamped_system_reports_marginal_as_unstable() {
        let sys = SystemParams {
            omega0: 1.7703492173955385e15,
            length: 25e-3,
            kappa: 0.0,
            mass: 145e-12,
            omega_m: 5.950176485899068e6,
            gamma_m: 0.0,
            hbar: crate::units::HBAR,
        };
        let drive = DriveParams {
            omega_c: sys.omega0 - sys.omega_m,
            power_c: 0.0,
            power_p: 0.0,
            delta: sys.omega_m,
        };
        let op = OperatingPoint {
            delta_eff: sys.omega_m,
            c0_sq: 0.0,
            beta: 0.0,
            chi0: sys.chi0(),
            regime: Regime::SplittingRegion,
        };
        let report = stability_check(&sys, &drive, &op).unwrap();
        assert!(!report.stable, "marginal spectrum must not report stable");
        assert!(report.max_re.abs() < 1.0, "max_re {:e}", report.max_re);
    }

    #[test]
    fn cubic_solver_handles_known_factorizations() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let r = cubic_real_roots(-6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // (x-5)(x^2+1) = x^3 - 5x^2 + x - 5
        let r = cubic_real_roots(-5.0, 1.0, -5.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 5.0).abs() < 1e-12);
        // (x-1)^2(x-4) = x^3 - 6x^2 + 9x - 4
        let r = cubic_real_roots(-6.0, 9.0, -4.0);
        assert!(r.len() == 3 || r.len() == 1);
        assert!((r.last().unwrap() - 4.0).abs() < 1e-9 || (r[0] - 1.0).abs() < 1e-9);
    }
}
