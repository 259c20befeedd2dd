//! Physical parameter sets for the cavity, the mechanical oscillator, and
//! the two optical drives.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::HBAR;

/// Default cap on probe-to-pump power ratio for linear-response validity.
/// The analytic response assumes the probe perturbs the pumped steady state
/// only to first order; stronger probes trigger a warning, not an error.
pub const PROBE_RATIO_MAX_DEFAULT: f64 = 1e-3;

/// Fixed constants of the optomechanical system.
///
/// All frequencies are angular (rad/s). `hbar` names the reduced Planck
/// constant in whatever unit system the other fields use: the SI value for
/// laboratory parameter sets, 1.0 for dimensionless benchmark sets. Carrying
/// it as a field lets dimensionless cross-validation runs flow through the
/// same formulas as SI runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Cavity resonance frequency, rad/s.
    pub omega0: f64,
    /// Cavity length, m.
    pub length: f64,
    /// Cavity amplitude decay rate, rad/s.
    pub kappa: f64,
    /// Effective mass of the movable mirror, kg.
    pub mass: f64,
    /// Mechanical resonance frequency, rad/s.
    pub omega_m: f64,
    /// Mechanical amplitude damping rate, rad/s.
    pub gamma_m: f64,
    /// Reduced Planck constant in this unit system.
    pub hbar: f64,
}

/// Non-fatal validity findings. The formulas stay well defined outside the
/// usual hierarchy, so these report rather than reject.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationWarning {
    /// gamma_m >= kappa: the narrow transparency feature needs the
    /// mechanical line to be much sharper than the cavity line.
    DampingHierarchy { gamma_m: f64, kappa: f64 },
    /// Probe power exceeds the linear-response ratio cap.
    StrongProbe { ratio: f64, max: f64 },
}

impl std::fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationWarning::DampingHierarchy { gamma_m, kappa } => write!(
                f,
                "gamma_m ({gamma_m:e} rad/s) is not below kappa ({kappa:e} rad/s); \
                 transparency-window formulas remain valid but the dip will not be narrow"
            ),
            ValidationWarning::StrongProbe { ratio, max } => write!(
                f,
                "probe/pump power ratio {ratio:e} exceeds the linear-response cap {max:e}; \
                 the analytic response treats the probe to first order only"
            ),
        }
    }
}

impl SystemParams {
    /// Construct an SI parameter set (`hbar` = CODATA value).
    pub fn new(
        omega0: f64,
        length: f64,
        kappa: f64,
        mass: f64,
        omega_m: f64,
        gamma_m: f64,
    ) -> Self {
        SystemParams {
            omega0,
            length,
            kappa,
            mass,
            omega_m,
            gamma_m,
            hbar: HBAR,
        }
    }

    /// Reference cavity used by the examples and the shipped default config:
    /// 1064 nm light in a 25 mm cavity with a 145 ng mirror,
    /// kappa/2pi = 215 kHz, omega_m/2pi = 947 kHz, gamma_m/2pi = 141 Hz.
    pub fn reference_cavity() -> Self {
        use crate::units::*;
        SystemParams::new(
            rad_s_from_wavelength_nm(1064.0),
            m_from_mm(25.0),
            rad_s_from_khz(215.0),
            kg_from_ng(145.0),
            rad_s_from_khz(947.0),
            rad_s_from_hz(141.0),
        )
    }

    /// Dimensionless benchmark set for time-domain cross-validation:
    /// omega_m = 1, kappa = 0.1, gamma_m = 0.005, mass = hbar = 1, and
    /// omega0 = length = 100 so the coupling constant hbar*omega0/length
    /// equals 1. The optical scale is kept two decades above omega_m so
    /// derived carrier frequencies stay positive.
    pub fn scaled_benchmark() -> Self {
        SystemParams {
            omega0: 100.0,
            length: 100.0,
            kappa: 0.1,
            mass: 1.0,
            omega_m: 1.0,
            gamma_m: 0.005,
            hbar: 1.0,
        }
    }

    /// Radiation-pressure coupling constant hbar*omega0/length (force per
    /// photon, N in SI).
    pub fn chi0(&self) -> f64 {
        self.hbar * self.omega0 / self.length
    }

    /// Mechanical quality factor omega_m/gamma_m.
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Check field domains. Returns warnings for physically unusual but
    /// well-defined inputs; errors for inputs the formulas cannot accept.
    pub fn validate(&self) -> Result<Vec<ValidationWarning>> {
        let fields = [
            ("omega0", self.omega0),
            ("length", self.length),
            ("kappa", self.kappa),
            ("mass", self.mass),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("hbar", self.hbar),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and strictly positive, got {v:e}"
                )));
            }
        }
        if !self.quality_factor().is_finite() {
            return Err(Error::InvalidParameter(
                "quality factor omega_m/gamma_m is not finite".into(),
            ));
        }
        let mut warnings = Vec::new();
        if self.gamma_m >= self.kappa {
            warnings.push(ValidationWarning::DampingHierarchy {
                gamma_m: self.gamma_m,
                kappa: self.kappa,
            });
        }
        Ok(warnings)
    }
}

/// Pump and probe drive settings.
///
/// The probe is offset from the pump by `delta`, so its absolute frequency
/// is `omega_c + delta`. Powers are the launched beam powers feeding the
/// single input port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveParams {
    /// Pump (coupling) laser frequency, rad/s.
    pub omega_c: f64,
    /// Pump power, W.
    pub power_c: f64,
    /// Probe power, W.
    pub power_p: f64,
    /// Probe-pump detuning omega_p - omega_c, rad/s.
    pub delta: f64,
}

impl DriveParams {
    /// Absolute probe frequency omega_c + delta, rad/s.
    pub fn omega_p(&self) -> f64 {
        self.omega_c + self.delta
    }

    /// Check drive domains against `probe_ratio_max` (pass
    /// [`PROBE_RATIO_MAX_DEFAULT`] unless a config overrides it).
    pub fn validate(&self, probe_ratio_max: f64) -> Result<Vec<ValidationWarning>> {
        if !self.omega_c.is_finite() || self.omega_c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "omega_c must be finite and strictly positive, got {:e}",
                self.omega_c
            )));
        }
        if !self.power_c.is_finite() || self.power_c < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "power_c must be finite and non-negative, got {:e}",
                self.power_c
            )));
        }
        if !self.power_p.is_finite() || self.power_p < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "power_p must be finite and non-negative, got {:e}",
                self.power_p
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        let mut warnings = Vec::new();
        if self.power_c > 0.0 {
            let ratio = self.power_p / self.power_c;
            if ratio > probe_ratio_max {
                warnings.push(ValidationWarning::StrongProbe {
                    ratio,
                    max: probe_ratio_max,
                });
            }
        }
        Ok(warnings)
    }
}

/// Coupling constant hbar*omega0/length for an SI cavity (N).
///
/// `omega0 = 0` is accepted as a degenerate limit and yields 0; callers that
/// care should treat it as a warning condition. Non-positive length is a
/// domain error because the constant diverges.
pub fn coupling_constant(omega0: f64, length: f64) -> Result<f64> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cavity length must be finite and strictly positive, got {length:e}"
        )));
    }
    if !omega0.is_finite() || omega0 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "omega0 must be finite and non-negative, got {omega0:e}"
        )));
    }
    Ok(HBAR * omega0 / length)
}

/// Intracavity drive amplitude sqrt(2*kappa*power/(hbar*omega)) for an SI
/// carrier (units rad/s, i.e. a rate).
pub fn field_amplitude_from_power(power: f64, carrier_frequency: f64, kappa: f64) -> Result<f64> {
    amplitude_with_hbar(power, carrier_frequency, kappa, HBAR)
}

/// Unit-system-aware drive amplitude; internal paths use this with
/// `SystemParams::hbar` so dimensionless sets work unchanged.
pub(crate) fn amplitude_with_hbar(
    power: f64,
    carrier_frequency: f64,
    kappa: f64,
    hbar: f64,
) -> Result<f64> {
    if !(carrier_frequency > 0.0) || !carrier_frequency.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "carrier frequency must be finite and strictly positive, got {carrier_frequency:e}"
        )));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kappa must be finite and strictly positive, got {kappa:e}"
        )));
    }
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power must be finite and non-negative, got {power:e}"
        )));
    }
    Ok((2.0 * kappa * power / (hbar * carrier_frequency)).sqrt())
}

impl DriveParams {
    /// Pump amplitude in this system's units.
    pub fn pump_amplitude(&self, sys: &SystemParams) -> Result<f64> {
        amplitude_with_hbar(self.power_c, self.omega_c, sys.kappa, sys.hbar)
    }

    /// Probe amplitude in this system's units (uses the probe's own carrier).
    pub fn probe_amplitude(&self, sys: &SystemParams) -> Result<f64> {
        amplitude_with_hbar(self.power_p, self.omega_p(), sys.kappa, sys.hbar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_constant_reference_value() {
        let sys = SystemParams::reference_cavity();
        let chi0 = coupling_constant(sys.omega0, sys.length).unwrap();
        assert!((chi0 - 7.467841563653364e-18).abs() / chi0 < 1e-12);
        assert_eq!(chi0, sys.chi0());
    }

    #[test]
    fn coupling_constant_scaling_and_limits() {
        let sys = SystemParams::reference_cavity();
        let chi0 = coupling_constant(sys.omega0, sys.length).unwrap();
        let half = coupling_constant(sys.omega0, 2.0 * sys.length).unwrap();
        assert!((half - chi0 / 2.0).abs() / chi0 < 1e-15);
        assert_eq!(coupling_constant(0.0, sys.length).unwrap(), 0.0);
        assert!(coupling_constant(sys.omega0, 0.0).is_err());
        assert!(coupling_constant(sys.omega0, -1.0).is_err());
    }

    #[test]
    fn amplitude_from_power_reference_value() {
        let sys = SystemParams::reference_cavity();
        // Pump red-detuned from the cavity line by omega_m.
        let omega_c = sys.omega0 - sys.omega_m;
        let eps_c = field_amplitude_from_power(1e-3, omega_c, sys.kappa).unwrap();
        assert!((eps_c - 1.202975023886851e11).abs() / eps_c < 1e-12);
    }

    #[test]
    fn amplitude_from_power_scaling() {
        let sys = SystemParams::reference_cavity();
        let omega_c = sys.omega0 - sys.omega_m;
        assert_eq!(
            field_amplitude_from_power(0.0, omega_c, sys.kappa).unwrap(),
            0.0
        );
        let one = field_amplitude_from_power(1e-3, omega_c, sys.kappa).unwrap();
        let four = field_amplitude_from_power(4e-3, omega_c, sys.kappa).unwrap();
        assert!((four - 2.0 * one).abs() / one < 1e-12);
        assert!(field_amplitude_from_power(1e-3, 0.0, sys.kappa).is_err());
        assert!(field_amplitude_from_power(1e-3, omega_c, 0.0).is_err());
    }

    #[test]
    fn validation_accepts_reference_and_warns_on_hierarchy() {
        let sys = SystemParams::reference_cavity();
        assert!(sys.validate().unwrap().is_empty());
        assert!((sys.quality_factor() - 6716.312056737589).abs() < 1e-6);

        let mut inverted = sys;
        inverted.gamma_m = 2.0 * sys.kappa;
        let warnings = inverted.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(matches!(
            warnings[0],
            ValidationWarning::DampingHierarchy { .. }
        ));
    }

    #[test]
    fn validation_rejects_non_positive_fields() {
        let mut sys = SystemParams::reference_cavity();
        sys.mass = 0.0;
        assert!(sys.validate().is_err());
        let mut sys = SystemParams::reference_cavity();
        sys.kappa = f64::NAN;
        assert!(sys.validate().is_err());
    }

    #[test]
    fn drive_validation_flags_strong_probe() {
        let sys = SystemParams::reference_cavity();
        let drive = DriveParams {
            omega_c: sys.omega0 - sys.omega_m,
            power_c: 1e-3,
            power_p: 1e-2,
            delta: sys.omega_m,
        };
        let warnings = drive.validate(PROBE_RATIO_MAX_DEFAULT).unwrap();
        assert!(matches!(warnings[0], ValidationWarning::StrongProbe { .. }));

        let weak = DriveParams {
            power_p: 1e-9,
            ..drive
        };
        assert!(weak.validate(PROBE_RATIO_MAX_DEFAULT).unwrap().is_empty());
        let bad = DriveParams {
            power_c: -1.0,
            ..drive
        };
        assert!(bad.validate(PROBE_RATIO_MAX_DEFAULT).is_err());
    }

    #[test]
    fn scaled_benchmark_is_self_consistent() {
        let sys = SystemParams::scaled_benchmark();
        assert!(sys.validate().unwrap().is_empty());
        assert_eq!(sys.chi0(), 1.0);
        assert_eq!(sys.omega_m, 1.0);
        assert_eq!(sys.kappa, 0.1);
        assert_eq!(sys.gamma_m, 0.005);
    }
}
