//! Unit conversions between quoted experimental units and the internal system.
//!
//! Internal convention: SI throughout, with every frequency-like quantity an
//! angular frequency in rad/s. Config files and CLI flags quote frequencies
//! the way lab papers do (`kappa_khz = 215` means kappa/2pi = 215 kHz), so
//! each converter here carries the 2pi factor explicitly and has an exact
//! inverse.

use std::f64::consts::TAU;

/// Reduced Planck constant, J s (CODATA value truncated to 10 digits).
pub const HBAR: f64 = 1.054571817e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ordinary frequency in Hz to angular frequency in rad/s.
pub fn rad_s_from_hz(f_hz: f64) -> f64 {
    TAU * f_hz
}

/// Angular frequency in rad/s to ordinary frequency in Hz.
pub fn hz_from_rad_s(omega: f64) -> f64 {
    omega / TAU
}

/// Ordinary frequency in kHz to angular frequency in rad/s.
pub fn rad_s_from_khz(f_khz: f64) -> f64 {
    TAU * f_khz * 1e3
}

/// Angular frequency in rad/s to ordinary frequency in kHz.
pub fn khz_from_rad_s(omega: f64) -> f64 {
    omega / TAU / 1e3
}

/// Vacuum wavelength in nm to optical angular frequency in rad/s.
pub fn rad_s_from_wavelength_nm(lambda_nm: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / (lambda_nm * 1e-9)
}

/// Optical angular frequency in rad/s to vacuum wavelength in nm.
pub fn wavelength_nm_from_rad_s(omega: f64) -> f64 {
    TAU * SPEED_OF_LIGHT / omega / 1e-9
}

/// Millimetres to metres.
pub fn m_from_mm(mm: f64) -> f64 {
    mm * 1e-3
}

/// Metres to millimetres.
pub fn mm_from_m(m: f64) -> f64 {
    m / 1e-3
}

/// Nanograms to kilograms.
pub fn kg_from_ng(ng: f64) -> f64 {
    ng * 1e-12
}

/// Kilograms to nanograms.
pub fn ng_from_kg(kg: f64) -> f64 {
    kg / 1e-12
}

/// Milliwatts to watts.
pub fn w_from_mw(mw: f64) -> f64 {
    mw * 1e-3
}

/// Watts to milliwatts.
pub fn mw_from_w(w: f64) -> f64 {
    w / 1e-3
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROUND_TRIP_REL: f64 = 1e-15;

    fn assert_round_trip(x: f64, fwd: fn(f64) -> f64, back: fn(f64) -> f64) {
        let y = back(fwd(x));
        assert!(
            (y - x).abs() <= ROUND_TRIP_REL * x.abs(),
            "round trip {x} -> {y}"
        );
    }

    #[test]
    fn frequency_round_trips() {
        for &f in &[1.0, 141.0, 215e3, 947e3, 1.7e15] {
            assert_round_trip(f, rad_s_from_hz, hz_from_rad_s);
            assert_round_trip(f, rad_s_from_khz, khz_from_rad_s);
        }
    }

    #[test]
    fn wavelength_round_trips() {
        for &l in &[532.0, 1064.0, 1550.0] {
            assert_round_trip(l, rad_s_from_wavelength_nm, wavelength_nm_from_rad_s);
        }
    }

    #[test]
    fn mechanical_unit_round_trips() {
        for &x in &[0.5, 25.0, 145.0, 6.9] {
            assert_round_trip(x, m_from_mm, mm_from_m);
            assert_round_trip(x, kg_from_ng, ng_from_kg);
            assert_round_trip(x, w_from_mw, mw_from_w);
        }
    }

    #[test]
    fn known_conversions() {
        let kappa = rad_s_from_khz(215.0);
        assert!((kappa - 1.350884841043611e6).abs() < 1e-6);
        let omega0 = rad_s_from_wavelength_nm(1064.0);
        assert!((omega0 - 1.7703492173955385e15).abs() / 1.77e15 < 1e-15);
    }
}
