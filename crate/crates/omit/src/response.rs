//! Probe-frequency response of the pumped cavity: the exact linear response,
//! the sideband-resolved two-pole form, the pole-residue decomposition, and
//! quadrature access.
//!
//! The response is the dimensionless output/probe field ratio, normalized so
//! an undriven cavity at probe resonance returns exactly 2. Its real part is
//! the absorptive quadrature and its imaginary part the dispersive one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::steady::OperatingPoint;

/// Dimensionless probe response. The quadratures are exactly the real and
/// imaginary parts of `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResponse {
    pub value: Complex64,
}

impl ComplexResponse {
    /// Absorptive quadrature (real part).
    pub fn vp(&self) -> f64 {
        self.value.re
    }

    /// Dispersive quadrature (imaginary part).
    pub fn vtp(&self) -> f64 {
        self.value.im
    }
}

/// Exact (vp, vtp) decomposition of a response.
pub fn quadratures(r: ComplexResponse) -> (f64, f64) {
    (r.vp(), r.vtp())
}

/// The two poles of the sideband-resolved response in the offset variable
/// x = delta - omega_m. `x_plus` is the narrow pole: below the coalescence
/// boundary it is the purely imaginary root with the smaller |Im|, above it
/// the root with positive real part; one continuous formula covers both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poles {
    pub x_plus: Complex64,
    pub x_minus: Complex64,
}

/// Poles plus partial-fraction residues of the two-pole response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleDecomposition {
    pub x_plus: Complex64,
    pub x_minus: Complex64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
}

/// Response of the bare cavity (pump off): 2*kappa/(kappa - i*(omega_p-omega0)).
pub fn response_no_coupling(sys: &SystemParams, omega_p: f64) -> ComplexResponse {
    let det = omega_p - sys.omega0;
    ComplexResponse {
        value: Complex64::new(2.0 * sys.kappa, 0.0) / Complex64::new(sys.kappa, -det),
    }
}

/// Exact linear response at probe-pump detuning `delta`, with no
/// sideband-resolved assumption:
///
/// response = (2*kappa/d) * ((delta^2 - omega_m^2 + i*gamma_m*delta)
///            * (kappa - i*(Delta + delta)) - 2i*omega_m*beta),
/// d = (delta^2 - omega_m^2 + i*gamma_m*delta) * ((kappa - i*delta)^2
///     + Delta^2) + 4*Delta*omega_m*beta.
pub fn response_exact(
    sys: &SystemParams,
    op: &OperatingPoint,
    delta: f64,
) -> Result<ComplexResponse> {
    let mech = Complex64::new(
        delta * delta - sys.omega_m * sys.omega_m,
        sys.gamma_m * delta,
    );
    let kd = Complex64::new(sys.kappa, -delta);
    let cav = kd * kd + op.delta_eff * op.delta_eff;
    let shift = 4.0 * op.delta_eff * sys.omega_m * op.beta;
    let d = mech * cav + shift;
    let mut scale = mech.norm() * cav.norm() + shift.abs();
    if scale == 0.0 {
        scale = sys.omega_m.powi(4);
    }
    if d.norm() < 1e-30 * scale {
        return Err(Error::Numerical(format!(
            "response denominator vanishes at delta = {delta:e} rad/s (undamped pole); \
             |d| = {:e} against scale {scale:e}",
            d.norm()
        )));
    }
    let num = mech * Complex64::new(sys.kappa, -(op.delta_eff + delta))
        - Complex64::new(0.0, 2.0 * sys.omega_m * op.beta);
    Ok(ComplexResponse {
        value: 2.0 * sys.kappa * num / d,
    })
}

/// Sideband-resolved two-pole response at offset x = delta - omega_m:
/// 2*kappa/(kappa - i*x + beta/(gamma_m/2 - i*x)).
///
/// The undamped line center (gamma_m = 0, x = 0, beta > 0) is the strict
/// transparency point; the limit value 0 is returned exactly there.
pub fn response_sideband(sys: &SystemParams, op: &OperatingPoint, x: f64) -> ComplexResponse {
    let g = 0.5 * sys.gamma_m;
    if g == 0.0 && x == 0.0 && op.beta > 0.0 {
        return ComplexResponse {
            value: Complex64::ZERO,
        };
    }
    let denom = Complex64::new(sys.kappa, -x) + op.beta / Complex64::new(g, -x);
    ComplexResponse {
        value: Complex64::new(2.0 * sys.kappa, 0.0) / denom,
    }
}

/// Poles of the sideband-resolved response:
/// x_pm = (-i*(kappa + gamma_m/2) pm sqrt(4*beta - (kappa - gamma_m/2)^2))/2
/// with the principal square root.
///
/// The discriminant is built with a +0.0 imaginary part so the principal
/// root of a negative real argument lands exactly on the positive imaginary
/// axis and the below-boundary poles stay purely imaginary.
pub fn poles(sys: &SystemParams, op: &OperatingPoint) -> Poles {
    let g = 0.5 * sys.gamma_m;
    let edge = sys.kappa - g;
    let disc = Complex64::new(4.0 * op.beta - edge * edge, 0.0);
    let r = disc.sqrt();
    let base = Complex64::new(0.0, -(sys.kappa + g));
    Poles {
        x_plus: (base + r) / 2.0,
        x_minus: (base - r) / 2.0,
    }
}

/// Partial-fraction residues of the two-pole response:
/// A_pm = -(pm) 2*kappa*(gamma_m/2 - i*x_pm)/(x_plus - x_minus), satisfying
/// A_plus + A_minus = 2i*kappa.
///
/// Degenerate poles (at the coalescence boundary) have no partial-fraction
/// form; evaluate `response_sideband` directly there instead.
pub fn residues(sys: &SystemParams, op: &OperatingPoint) -> Result<PoleDecomposition> {
    let g = 0.5 * sys.gamma_m;
    // Degeneracy is witnessed on the discriminant, not the separation: the
    // square root turns an eps-level discriminant into a sqrt(eps)-level
    // separation, so a separation threshold cannot distinguish an exactly
    // critical operating point from float rounding. The band matches the
    // Critical regime classification.
    if crate::steady::classify_regime(sys, op.beta) == crate::steady::Regime::Critical {
        return Err(Error::DegeneratePoles(
            "poles coalesce at the boundary between the dip and splitting regions; \
             the response has no partial-fraction form there, evaluate the two-pole \
             response directly"
                .into(),
        ));
    }
    let p = poles(sys, op);
    let sep = p.x_plus - p.x_minus;
    let two_kappa = 2.0 * sys.kappa;
    let a_plus = -two_kappa * (Complex64::new(g, 0.0) - Complex64::i() * p.x_plus) / sep;
    let a_minus = two_kappa * (Complex64::new(g, 0.0) - Complex64::i() * p.x_minus) / sep;
    Ok(PoleDecomposition {
        x_plus: p.x_plus,
        x_minus: p.x_minus,
        a_plus,
        a_minus,
    })
}

/// Evaluate the partial-fraction form A_plus/(x - x_plus) + A_minus/(x - x_minus).
pub fn pole_sum(dec: &PoleDecomposition, x: f64) -> Complex64 {
    dec.a_plus / (Complex64::new(x, 0.0) - dec.x_plus)
        + dec.a_minus / (Complex64::new(x, 0.0) - dec.x_minus)
}
