//! Spectra over probe-detuning grids: evaluator selection, per-pole
//! contributions, baseline traces, CSV serialization, and dip metrics
//! (depth, widths, dispersion slope, line-shape class).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::response::{pole_sum, residues, response_exact, response_sideband};
use crate::steady::{classify_regime, OperatingPoint, Regime};

/// Which closed form evaluates the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    /// Full linear response with no sideband-resolved assumption.
    Exact,
    /// Two-pole sideband-resolved form in x = delta - omega_m.
    Sideband,
}

impl Evaluator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Evaluator::Exact => "exact",
            Evaluator::Sideband => "sideband",
        }
    }
}

impl std::fmt::Display for Evaluator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform grid in the offset variable x = delta - omega_m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Left edge, rad/s.
    pub x_min: f64,
    /// Right edge, rad/s.
    pub x_max: f64,
    /// Number of points, at least 2; both edges are included.
    pub n_points: usize,
}

impl GridSpec {
    /// Default spectroscopy window: 4001 points across x/omega_m in
    /// [-0.5, 0.5], more than 100 points inside a 1 mW-scale narrow feature.
    pub fn default_for(sys: &SystemParams) -> Self {
        GridSpec {
            x_min: -0.5 * sys.omega_m,
            x_max: 0.5 * sys.omega_m,
            n_points: 4001,
        }
    }

    /// Materialize the grid with exact endpoints.
    pub fn build(&self) -> Result<Vec<f64>> {
        if !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::InvalidParameter(
                "grid edges must be finite".into(),
            ));
        }
        if !(self.x_min < self.x_max) {
            return Err(Error::InvalidParameter(format!(
                "grid needs x_min < x_max, got [{:e}, {:e}]",
                self.x_min, self.x_max
            )));
        }
        if self.n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {}",
                self.n_points
            )));
        }
        let n = self.n_points;
        let step = (self.x_max - self.x_min) / (n - 1) as f64;
        let mut grid: Vec<f64> = (0..n).map(|i| self.x_min + step * i as f64).collect();
        grid[n - 1] = self.x_max;
        Ok(grid)
    }
}

/// Evaluated spectrum. All traces are ordered by grid index.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Offsets x = delta - omega_m, rad/s, strictly increasing.
    pub x: Vec<f64>,
    /// Total response per point.
    pub total: Vec<Complex64>,
    /// Narrow-pole partial-fraction contribution, when requested.
    pub pole_plus: Option<Vec<Complex64>>,
    /// Broad-pole partial-fraction contribution, when requested.
    pub pole_minus: Option<Vec<Complex64>>,
    /// Response of the same cavity with the pump coupling off, when
    /// requested.
    pub baseline: Option<Vec<Complex64>>,
    /// Evaluator that produced `total`.
    pub evaluator: Evaluator,
    /// Mechanical frequency used to map x to delta, rad/s.
    pub omega_m: f64,
}

/// Evaluate the response over `grid` (strictly increasing, may be a single
/// point). Points are computed in parallel; output order always follows the
/// grid. The baseline is the beta = 0 response under the same evaluator, so
/// for the exact evaluator it keeps the operating point's detuning.
/// Pole parts require non-degenerate poles.
pub fn compute_spectrum(
    sys: &SystemParams,
    op: &OperatingPoint,
    grid: &[f64],
    evaluator: Evaluator,
    include_baseline: bool,
    include_pole_parts: bool,
) -> Result<Spectrum> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid must be non-empty".into()));
    }
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!(
                "grid must be strictly increasing, found {:e} before {:e}",
                w[0], w[1]
            )));
        }
    }
    if !grid.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidParameter("grid points must be finite".into()));
    }

    let decomposition = if include_pole_parts {
        Some(residues(sys, op)?)
    } else {
        None
    };

    let total: Vec<Complex64> = match evaluator {
        Evaluator::Exact => grid
            .par_iter()
            .map(|&x| response_exact(sys, op, sys.omega_m + x).map(|r| r.value))
            .collect::<Result<Vec<_>>>()?,
        Evaluator::Sideband => grid
            .par_iter()
            .map(|&x| response_sideband(sys, op, x).value)
            .collect(),
    };

    let (pole_plus, pole_minus) = match decomposition {
        Some(dec) => {
            let plus: Vec<Complex64> = grid
                .par_iter()
                .map(|&x| dec.a_plus / (Complex64::new(x, 0.0) - dec.x_plus))
                .collect();
            let minus: Vec<Complex64> = grid
                .par_iter()
                .map(|&x| dec.a_minus / (Complex64::new(x, 0.0) - dec.x_minus))
                .collect();
            debug_assert!({
                let i = grid.len() / 2;
                (plus[i] + minus[i] - pole_sum(&dec, grid[i])).norm() < 1e-12
            });
            (Some(plus), Some(minus))
        }
        None => (None, None),
    };

    let baseline = if include_baseline {
        let bare = OperatingPoint { beta: 0.0, ..*op };
        Some(match evaluator {
            Evaluator::Exact => grid
                .par_iter()
                .map(|&x| response_exact(sys, &bare, sys.omega_m + x).map(|r| r.value))
                .collect::<Result<Vec<_>>>()?,
            Evaluator::Sideband => grid
                .par_iter()
                .map(|&x| response_sideband(sys, &bare, x).value)
                .collect(),
        })
    } else {
        None
    };

    Ok(Spectrum {
        x: grid.to_vec(),
        total,
        pole_plus,
        pole_minus,
        baseline,
        evaluator,
        omega_m: sys.omega_m,
    })
}

/// Mandatory CSV header, in column order.
pub const CSV_HEADER: &str = "x_over_omega_m,delta_rad_s,re_epsT,im_epsT,vp,vtp,\
re_pole_plus,im_pole_plus,re_pole_minus,im_pole_minus,re_baseline,im_baseline";

/// Serialize the spectrum as CSV. Values use shortest round-trip decimal
/// formatting; absent optional traces become NaN columns.
pub fn write_csv<W: std::io::Write>(spectrum: &Spectrum, out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    let nan = Complex64::new(f64::NAN, f64::NAN);
    for i in 0..spectrum.x.len() {
        let x = spectrum.x[i];
        let t = spectrum.total[i];
        let pp = spectrum.pole_plus.as_ref().map_or(nan, |v| v[i]);
        let pm = spectrum.pole_minus.as_ref().map_or(nan, |v| v[i]);
        let b = spectrum.baseline.as_ref().map_or(nan, |v| v[i]);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            x / spectrum.omega_m,
            x + spectrum.omega_m,
            t.re,
            t.im,
            t.re,
            t.im,
            pp.re,
            pp.im,
            pm.re,
            pm.im,
            b.re,
            b.im
        )?;
    }
    Ok(())
}

/// Line-shape class of the absorptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DipClass {
    /// Coupling off: bare cavity line, no narrow feature.
    NoDip,
    /// Narrow transparency dip on the broad cavity line. Includes the
    /// boundary case of coalesced poles, where the dip is maximally wide
    /// but not yet split.
    EitDip,
    /// Two separated absorption maxima with a central minimum.
    SplitDoublet,
}

impl DipClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            DipClass::NoDip => "no_dip",
            DipClass::EitDip => "eit_dip",
            DipClass::SplitDoublet => "split_doublet",
        }
    }
}

impl std::fmt::Display for DipClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Spectroscopic metrics of one spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipMetrics {
    /// Absorptive quadrature at the grid point nearest x = 0.
    pub dip_value: f64,
    /// Narrow linewidth |Im x_plus| from the pole, rad/s.
    pub narrow_hwhm_analytic: f64,
    /// Numeric half-width of the inverted narrow feature, rad/s; None when
    /// the shape has no dip or the half crossing leaves the window.
    pub narrow_hwhm_numeric: Option<f64>,
    /// Broad linewidth |Im x_minus| from the pole, rad/s.
    pub broad_hwhm: f64,
    /// d vtp / dx at the center, s/rad, by 5-point centered finite
    /// difference on the grid.
    pub dispersion_slope_at_center: f64,
    pub classification: DipClass,
}

/// Extract dip metrics from a computed spectrum.
///
/// Needs the narrow feature resolved: at least 8 grid points strictly
/// inside |x| < |Im x_plus| when the pump is on, and 5 points overall for
/// the slope stencil. The numeric half-width is measured on
/// (baseline - total) of the absorptive quadrature, restricted to
/// |x| <= 10 |Im x_plus|, with linear interpolation between grid points;
/// the baseline is the closed form 2 kappa^2/(kappa^2 + x^2).
pub fn dip_metrics(
    sys: &SystemParams,
    op: &OperatingPoint,
    spectrum: &Spectrum,
) -> Result<DipMetrics> {
    let n = spectrum.x.len();
    if n < 5 {
        return Err(Error::Resolution(format!(
            "dip metrics need at least 5 grid points for the slope stencil, got {n}"
        )));
    }
    let p = crate::response::poles(sys, op);
    let narrow_hwhm_analytic = p.x_plus.im.abs();
    let broad_hwhm = p.x_minus.im.abs();

    let center = (0..n)
        .min_by(|&a, &b| spectrum.x[a].abs().total_cmp(&spectrum.x[b].abs()))
        .expect("non-empty grid");

    if op.beta > 0.0 {
        let inside = spectrum
            .x
            .iter()
            .filter(|x| x.abs() < narrow_hwhm_analytic)
            .count();
        if inside < 8 {
            return Err(Error::Resolution(format!(
                "narrow feature of half-width {narrow_hwhm_analytic:e} rad/s covers only \
                 {inside} grid points (need 8); use a grid step of at most {:e} rad/s",
                narrow_hwhm_analytic / 4.0
            )));
        }
    }

    if center + 2 >= n || center < 2 {
        return Err(Error::Resolution(
            "grid does not surround x = 0 with two points on each side".into(),
        ));
    }
    let h = spectrum.x[center + 1] - spectrum.x[center];
    for k in [center - 2, center - 1, center, center + 1] {
        let hk = spectrum.x[k + 1] - spectrum.x[k];
        if (hk - h).abs() > 1e-9 * h.abs() {
            return Err(Error::Resolution(
                "slope stencil needs uniform grid spacing around the center".into(),
            ));
        }
    }
    let vtp = |i: usize| spectrum.total[i].im;
    let dispersion_slope_at_center = (-vtp(center + 2) + 8.0 * vtp(center + 1)
        - 8.0 * vtp(center - 1)
        + vtp(center - 2))
        / (12.0 * h);

    let dip_value = spectrum.total[center].re;

    let classification = if op.beta == 0.0 {
        DipClass::NoDip
    } else if classify_regime(sys, op.beta) == Regime::SplittingRegion {
        DipClass::SplitDoublet
    } else {
        DipClass::EitDip
    };

    let narrow_hwhm_numeric = if classification == DipClass::EitDip {
        numeric_half_width(sys, spectrum, center, narrow_hwhm_analytic)
    } else {
        None
    };

    Ok(DipMetrics {
        dip_value,
        narrow_hwhm_analytic,
        narrow_hwhm_numeric,
        broad_hwhm,
        dispersion_slope_at_center,
        classification,
    })
}

/// Half-width at half depth of the inverted feature f(x) = baseline - vp(x),
/// scanning outward on the positive side from the center.
fn numeric_half_width(
    sys: &SystemParams,
    spectrum: &Spectrum,
    center: usize,
    window_scale: f64,
) -> Option<f64> {
    let kappa_sq = sys.kappa * sys.kappa;
    let feature = |i: usize| {
        let x = spectrum.x[i];
        2.0 * kappa_sq / (kappa_sq + x * x) - spectrum.total[i].re
    };
    let depth0 = feature(center);
    if !(depth0 > 0.0) {
        return None;
    }
    let half = 0.5 * depth0;
    let window = 10.0 * window_scale;
    let mut prev = depth0;
    for i in center + 1..spectrum.x.len() {
        if spectrum.x[i] - spectrum.x[center] > window {
            return None;
        }
        let cur = feature(i);
        if cur <= half {
            let x0 = spectrum.x[i - 1];
            let x1 = spectrum.x[i];
            let t = (prev - half) / (prev - cur);
            return Some(x0 + t * (x1 - x0) - spectrum.x[center]);
        }
        prev = cur;
    }
    None
}
