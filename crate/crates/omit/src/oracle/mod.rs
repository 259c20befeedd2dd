//! Time-domain cross-check of the closed-form response: integrates the
//! nonlinear mean-value equations with pump and probe on, waits for the
//! probe-beat limit cycle, and reads the probe-frequency Fourier component
//! of the intracavity field out of it.

pub mod dopri5;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams, PROBE_RATIO_MAX_DEFAULT};
use crate::response::ComplexResponse;
use crate::steady::{
    solve_operating_point, stability_check, Branch, DetuningMode, OperatingPoint, StabilityReport,
};

use self::dopri5::{integrate, DenseStep, Options as OdeOptions};

/// Cycle-to-cycle residual below which the limit cycle counts as reached.
const CYCLE_RESIDUAL_TOL: f64 = 1e-6;
/// The settling horizon starts at 10/gamma_m and doubles at most this often.
const MAX_TRANSIENT_DOUBLINGS: usize = 5;
/// Trajectory sampling is capped at this many stored points.
const MAX_TRAJECTORY_SAMPLES: usize = 4_000_000;

/// Mean-value state of the coupled mirror-cavity system in the frame
/// rotating at the pump frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanState {
    /// Mirror position, m.
    pub q: f64,
    /// Mirror momentum, kg m/s.
    pub p: f64,
    /// Real part of the rotating-frame cavity amplitude, dimensionless.
    pub c_re: f64,
    /// Imaginary part of the rotating-frame cavity amplitude, dimensionless.
    pub c_im: f64,
}

impl MeanState {
    /// Cavity amplitude as a complex number.
    pub fn c(&self) -> Complex64 {
        Complex64::new(self.c_re, self.c_im)
    }

    fn to_array(self) -> [f64; 4] {
        [self.q, self.p, self.c_re, self.c_im]
    }

    fn from_array(y: [f64; 4]) -> Self {
        MeanState {
            q: y[0],
            p: y[1],
            c_re: y[2],
            c_im: y[3],
        }
    }

    fn is_finite(&self) -> bool {
        self.q.is_finite() && self.p.is_finite() && self.c_re.is_finite() && self.c_im.is_finite()
    }
}

/// Sampled solution of the mean-value equations, carrying the drive that
/// produced it so downstream analysis is reproducible.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Sample times, s, strictly increasing.
    pub times: Vec<f64>,
    /// States at `times`.
    pub states: Vec<MeanState>,
    /// Drive that generated the run.
    pub drive: DriveParams,
}

/// Fourier components of the cavity amplitude over a whole number of
/// probe-beat periods, in the absolute-time basis {1, e^{-i delta t},
/// e^{+i delta t}}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicExtract {
    /// Coefficient of e^{-i delta t}: the component driven directly by the
    /// probe.
    pub amp_at_plus_delta: Complex64,
    /// Coefficient of e^{+i delta t}: the four-wave-mixing sideband.
    /// Diagnostic only; it never enters the transmission coefficient.
    pub amp_at_minus_delta: Complex64,
    /// Mean (dc) component.
    pub amp_dc: Complex64,
}

/// Controls for the time-domain runs.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    /// Integrator relative tolerance.
    pub rel_tol: f64,
    /// Integrator absolute tolerance.
    pub abs_tol: f64,
    /// Probe launch phase phi: the probe drive enters as
    /// eps_p * e^{-i(delta t + phi)}, rad.
    pub probe_phase: f64,
    /// Integrate even when the linearized steady state is unstable.
    pub force_unstable: bool,
    /// Projection window length in probe-beat periods.
    pub n_periods: usize,
    /// Samples per beat period for settling checks and projection.
    pub samples_per_period: usize,
    /// Photon-number branch when the pump cubic is bistable.
    pub branch: Option<Branch>,
    /// Exact bare detuning omega0 - omega_c when the caller knows it to
    /// better than float rounding at the optical scale (see
    /// `steady::TargetedDrive`); None recomputes it from the drive.
    pub bare_detuning: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            probe_phase: 0.0,
            force_unstable: false,
            n_periods: 32,
            samples_per_period: 256,
            branch: None,
            bare_detuning: None,
        }
    }
}

impl IntegrationOptions {
    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "integration tolerances must be strictly positive".into(),
            ));
        }
        if !self.probe_phase.is_finite() {
            return Err(Error::InvalidParameter("probe phase must be finite".into()));
        }
        if self.n_periods < 1 {
            return Err(Error::InvalidParameter(
                "projection needs at least one beat period".into(),
            ));
        }
        if self.samples_per_period < 8 {
            return Err(Error::InvalidParameter(
                "settling and projection need at least 8 samples per period".into(),
            ));
        }
        Ok(())
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..OdeOptions::default()
        }
    }
}

/// One completed time-domain response measurement with its diagnostics.
#[derive(Debug, Clone)]
pub struct OracleRun {
    /// Transmission coefficient 2*kappa*amp_at_plus_delta/eps_p.
    pub response: ComplexResponse,
    /// All three extracted Fourier components.
    pub harmonics: HarmonicExtract,
    /// Pump-only operating point used for initialization and stability.
    pub operating_point: OperatingPoint,
    /// Linearized stability of that operating point.
    pub stability: StabilityReport,
    /// End of the discarded transient, s.
    pub transient_end: f64,
    /// Length of the projection window, s.
    pub window: f64,
    /// Cycle-to-cycle residual at which settling was accepted.
    pub cycle_residual: f64,
}

/// Zero-point scales for the mechanical state: length sqrt(hbar/(2 m
/// omega_m)) and the matching momentum m*omega_m*length. The integrator
/// carries q and p divided by these so every state component sits at
/// O(1)..O(1e3); raw SI mechanics (q ~ 1e-16 m) would fall below any
/// workable scalar abs_tol and leave the mechanical error unconstrained.
fn zp_scales(sys: &SystemParams) -> (f64, f64) {
    let xs = (sys.hbar / (2.0 * sys.mass * sys.omega_m)).sqrt();
    (xs, sys.mass * sys.omega_m * xs)
}

fn to_zp(sys: &SystemParams, y: [f64; 4]) -> [f64; 4] {
    let (xs, ps) = zp_scales(sys);
    [y[0] / xs, y[1] / ps, y[2], y[3]]
}

fn from_zp(sys: &SystemParams, y: [f64; 4]) -> [f64; 4] {
    let (xs, ps) = zp_scales(sys);
    [y[0] * xs, y[1] * ps, y[2], y[3]]
}

/// Right-hand side of the four real mean-value equations on the
/// zero-point-scaled state [q/xs, p/ps, Re c, Im c]. `bare` is the bare
/// pump detuning omega0 - omega_c; the dynamic radiation-pressure shift
/// (chi0/hbar)*q stays inside the equations rather than being folded into
/// an effective detuning, so the static shift emerges on its own.
fn mean_rhs(
    sys: &SystemParams,
    bare: f64,
    eps_c: f64,
    eps_p: f64,
    delta: f64,
    phase: f64,
) -> impl FnMut(f64, &[f64; 4]) -> [f64; 4] {
    let (xs, ps) = zp_scales(sys);
    let omega_m = sys.omega_m;
    let gamma_m = sys.gamma_m;
    let kappa = sys.kappa;
    let chi0 = sys.chi0();
    let shift_per_unit = chi0 / sys.hbar * xs;
    let force_per_photon = chi0 / ps;
    move |t: f64, y: &[f64; 4]| {
        let (q, p, c_re, c_im) = (y[0], y[1], y[2], y[3]);
        let det = bare - shift_per_unit * q;
        let (s, c) = (delta * t + phase).sin_cos();
        [
            omega_m * p,
            -omega_m * q - gamma_m * p + force_per_photon * (c_re * c_re + c_im * c_im),
            -kappa * c_re + det * c_im + eps_c + eps_p * c,
            -kappa * c_im - det * c_re - eps_p * s,
        ]
    }
}

/// Integrate the mean-value equations from `initial` over [0, t_end] and
/// return a uniformly sampled trajectory, densely enough to resolve the
/// fastest rate max(kappa, omega_m, |bare detuning|, |delta|) with
/// `samples_per_period` points per cycle (capped at 4e6 samples).
pub fn integrate_mean_values(
    sys: &SystemParams,
    drive: &DriveParams,
    initial: MeanState,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    sys.validate()?;
    drive.validate(f64::INFINITY)?;
    opts.validate()?;
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration horizon must be finite and positive, got {t_end:e}"
        )));
    }
    if !initial.is_finite() {
        return Err(Error::InvalidParameter(
            "initial state must be finite".into(),
        ));
    }
    let eps_c = drive.pump_amplitude(sys)?;
    let eps_p = drive.probe_amplitude(sys)?;
    let bare = opts.bare_detuning.unwrap_or(sys.omega0 - drive.omega_c);
    let mut f = mean_rhs(sys, bare, eps_c, eps_p, drive.delta, opts.probe_phase);

    let fastest = sys
        .kappa
        .max(sys.omega_m)
        .max(bare.abs())
        .max(drive.delta.abs());
    let wanted = (t_end * fastest / std::f64::consts::TAU * opts.samples_per_period as f64).ceil();
    let n = if wanted >= MAX_TRAJECTORY_SAMPLES as f64 {
        MAX_TRAJECTORY_SAMPLES
    } else {
        (wanted as usize).max(2)
    };
    let times: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();

    let mut states = Vec::with_capacity(times.len());
    let mut next = 0usize;
    let y0 = to_zp(sys, initial.to_array());
    let mut last_good = (0.0_f64, y0);
    let run = integrate(
        &mut f,
        0.0,
        y0,
        t_end,
        &opts.ode(),
        &mut |step: &DenseStep<4>| {
            last_good = (step.t1(), step.eval(step.t1()));
            while next < times.len() && times[next] <= step.t1() {
                states.push(MeanState::from_array(from_zp(sys, step.eval(times[next]))));
                next += 1;
            }
        },
    );
    match run {
        Ok(y_final) => {
            while next < times.len() {
                states.push(MeanState::from_array(from_zp(sys, y_final)));
                next += 1;
            }
        }
        Err(Error::Numerical(msg)) => {
            let (t, y) = last_good;
            let y = from_zp(sys, y);
            return Err(Error::Numerical(format!(
                "{msg}; last good state at t = {t:e}: q = {:e}, p = {:e}, c = {:e} + {:e}i",
                y[0], y[1], y[2], y[3]
            )));
        }
        Err(e) => return Err(e),
    }
    Ok(Trajectory {
        times,
        states,
        drive: *drive,
    })
}

/// Trapezoidal projection of the cavity amplitude onto
/// {1, e^{-i delta t}, e^{+i delta t}} over the span of `times`.
/// Returns (dc, plus, minus). Phases are absolute times, so the result is a
/// window-start-independent Fourier coefficient for a periodic signal.
fn project_window(times: &[f64], cs: &[Complex64], delta: f64) -> (Complex64, Complex64, Complex64) {
    let width = times[times.len() - 1] - times[0];
    let mut dc = Complex64::ZERO;
    let mut plus = Complex64::ZERO;
    let mut minus = Complex64::ZERO;
    let mut prev_dc = cs[0];
    let (s0, c0) = (delta * times[0]).sin_cos();
    let mut prev_plus = cs[0] * Complex64::new(c0, s0);
    let mut prev_minus = cs[0] * Complex64::new(c0, -s0);
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        let (s, c) = (delta * times[i]).sin_cos();
        let cur_dc = cs[i];
        let cur_plus = cs[i] * Complex64::new(c, s);
        let cur_minus = cs[i] * Complex64::new(c, -s);
        dc += (prev_dc + cur_dc) * (0.5 * h);
        plus += (prev_plus + cur_plus) * (0.5 * h);
        minus += (prev_minus + cur_minus) * (0.5 * h);
        prev_dc = cur_dc;
        prev_plus = cur_plus;
        prev_minus = cur_minus;
    }
    (dc / width, plus / width, minus / width)
}

/// Project the cavity amplitude of the trailing `n_periods` probe-beat
/// periods of `traj` onto {1, e^{-i delta t}, e^{+i delta t}}.
///
/// The window is the last n_periods * 2*pi/|delta| of the trajectory; the
/// caller is responsible for having discarded the transient before it (at
/// least 10/gamma_m of settling, or a cycle-residual check as in
/// [`oracle_response`]). A window that is not covered, or is sampled more
/// coarsely than 8 points per period, is an error.
pub fn extract_harmonics(
    traj: &Trajectory,
    delta: f64,
    n_periods: usize,
) -> Result<HarmonicExtract> {
    if !delta.is_finite() || delta == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "harmonic extraction needs a nonzero finite beat detuning, got {delta:e}"
        )));
    }
    if n_periods < 1 {
        return Err(Error::InvalidParameter(
            "harmonic extraction needs at least one beat period".into(),
        ));
    }
    if traj.times.len() < 2 || traj.times.len() != traj.states.len() {
        return Err(Error::InvalidParameter(
            "trajectory must hold at least two samples with matching times".into(),
        ));
    }
    for w in traj.times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "trajectory times must be strictly increasing".into(),
            ));
        }
    }

    let period = std::f64::consts::TAU / delta.abs();
    let width = n_periods as f64 * period;
    let t_end = traj.times[traj.times.len() - 1];
    let t_start = t_end - width;
    if t_start < traj.times[0] - 1e-9 * width {
        return Err(Error::Resolution(format!(
            "trajectory spans {:e} s but the projection window needs {width:e} s \
             ({n_periods} beat periods); integrate longer",
            t_end - traj.times[0]
        )));
    }

    // Clip the leading partial segment at t_start by linear interpolation so
    // the window is a whole number of periods.
    let i0 = traj.times.partition_point(|&t| t < t_start);
    let (mut times, mut cs): (Vec<f64>, Vec<Complex64>) = (Vec::new(), Vec::new());
    if i0 > 0 && traj.times[i0] > t_start + 1e-12 * width {
        let (ta, tb) = (traj.times[i0 - 1], traj.times[i0]);
        let w = (t_start - ta) / (tb - ta);
        let ca = traj.states[i0 - 1].c();
        let cb = traj.states[i0].c();
        times.push(t_start);
        cs.push(ca + (cb - ca) * w);
    }
    times.extend_from_slice(&traj.times[i0..]);
    cs.extend(traj.states[i0..].iter().map(|s| s.c()));

    if times.len() < 8 * n_periods {
        return Err(Error::Resolution(format!(
            "projection window holds {} samples for {n_periods} periods; \
             need at least 8 per period",
            times.len()
        )));
    }
    let (amp_dc, amp_plus, amp_minus) = project_window(&times, &cs, delta);
    Ok(HarmonicExtract {
        amp_at_plus_delta: amp_plus,
        amp_at_minus_delta: amp_minus,
        amp_dc,
    })
}

/// Largest relative cycle-to-cycle change between two consecutive beat
/// periods sampled at the same phases. States carry zero-point mechanical
/// units, so both mechanical components already share one scale; cavity
/// components compare on the amplitude scale. Zero-signal components
/// compare as settled.
fn cycle_residual(a: &[[f64; 4]], b: &[[f64; 4]]) -> f64 {
    let mut mech_scale = 0.0_f64;
    let mut cav_scale = 0.0_f64;
    let mut mech_dev = 0.0_f64;
    let mut cav_dev = 0.0_f64;
    for (ya, yb) in a.iter().zip(b) {
        let ma = (ya[0] * ya[0] + ya[1] * ya[1]).sqrt();
        let mb = (yb[0] * yb[0] + yb[1] * yb[1]).sqrt();
        mech_scale = mech_scale.max(ma).max(mb);
        let ca = (ya[2] * ya[2] + ya[3] * ya[3]).sqrt();
        let cb = (yb[2] * yb[2] + yb[3] * yb[3]).sqrt();
        cav_scale = cav_scale.max(ca).max(cb);
        let dq = yb[0] - ya[0];
        let dp = yb[1] - ya[1];
        mech_dev = mech_dev.max((dq * dq + dp * dp).sqrt());
        let dr = yb[2] - ya[2];
        let di = yb[3] - ya[3];
        cav_dev = cav_dev.max((dr * dr + di * di).sqrt());
    }
    let mech = if mech_scale > 0.0 {
        mech_dev / mech_scale
    } else {
        0.0
    };
    let cav = if cav_scale > 0.0 {
        cav_dev / cav_scale
    } else {
        0.0
    };
    mech.max(cav)
}

/// Sample one beat period [t0, t0 + period] at `n` interior-plus-end points
/// and return (samples, state at period end).
fn sample_period<F>(
    f: &mut F,
    t0: f64,
    y0: [f64; 4],
    period: f64,
    n: usize,
    ode: &OdeOptions,
) -> Result<(Vec<[f64; 4]>, [f64; 4])>
where
    F: FnMut(f64, &[f64; 4]) -> [f64; 4],
{
    let times: Vec<f64> = (1..=n).map(|j| t0 + period * j as f64 / n as f64).collect();
    let t_end = t0 + period;
    let mut samples = Vec::with_capacity(n);
    let mut next = 0usize;
    let y_final = integrate(f, t0, y0, t_end, ode, &mut |step: &DenseStep<4>| {
        while next < times.len() && times[next] <= step.t1() {
            samples.push(step.eval(times[next]));
            next += 1;
        }
    })?;
    while next < times.len() {
        samples.push(y_final);
        next += 1;
    }
    Ok((samples, y_final))
}

/// Measure the transmission coefficient by direct time integration: settle
/// onto the probe-beat limit cycle, project the cavity amplitude onto the
/// probe frequency over `n_periods` whole periods, and normalize by the
/// probe amplitude, eps_T = 2*kappa*amp_at_plus_delta/eps_p.
///
/// `delta` overrides the detuning stored in `drive`. The pump-only steady
/// state initializes the run and must be linearly stable unless
/// `force_unstable` is set. The probe must stay weak: with the pump on,
/// power_p/power_c above 1e-3 is refused because the extraction assumes
/// linear response.
pub fn oracle_response(
    sys: &SystemParams,
    drive: &DriveParams,
    delta: f64,
    opts: &IntegrationOptions,
) -> Result<OracleRun> {
    sys.validate()?;
    opts.validate()?;
    if !delta.is_finite() || delta == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time-domain response needs a nonzero finite probe detuning, got {delta:e}"
        )));
    }
    let mut drv = *drive;
    drv.delta = delta;
    drv.validate(f64::INFINITY)?;
    if drv.power_c > 0.0 && drv.power_p / drv.power_c > PROBE_RATIO_MAX_DEFAULT {
        return Err(Error::InvalidParameter(format!(
            "probe/pump power ratio {:e} exceeds the weak-probe bound {PROBE_RATIO_MAX_DEFAULT:e}; \
             the harmonic extraction assumes linear response",
            drv.power_p / drv.power_c
        )));
    }
    let eps_p = drv.probe_amplitude(sys)?;
    if eps_p == 0.0 {
        return Err(Error::InvalidParameter(
            "time-domain response needs a nonzero probe power".into(),
        ));
    }
    let eps_c = drv.pump_amplitude(sys)?;
    let bare = opts.bare_detuning.unwrap_or(sys.omega0 - drv.omega_c);

    let op = solve_operating_point(
        sys,
        &drv,
        DetuningMode::SelfConsistent {
            bare_detuning: bare,
            branch: opts.branch,
        },
    )?;
    let stability = stability_check(sys, &drv, &op)?;
    if !stability.stable && !opts.force_unstable {
        return Err(Error::Numerical(format!(
            "pump-only steady state is linearly unstable (max eigenvalue real part \
             {:e} rad/s); integration would leave it. Set force_unstable to proceed",
            stability.max_re
        )));
    }

    let mut f = mean_rhs(sys, bare, eps_c, eps_p, delta, opts.probe_phase);
    let ode = opts.ode();
    let period = std::f64::consts::TAU / delta.abs();
    let spp = opts.samples_per_period;

    // Pump-only fixed point; the probe then rings up the beat on top of it.
    let c0 = if eps_c == 0.0 {
        Complex64::ZERO
    } else {
        Complex64::new(eps_c, 0.0) / Complex64::new(sys.kappa, op.delta_eff)
    };
    let mut y = to_zp(sys, [op.mean_displacement(sys), 0.0, c0.re, c0.im]);
    let mut t = 0.0_f64;

    // Settle: run to the 10/gamma_m floor, then demand two consecutive beat
    // periods agreeing pointwise to 1e-6; double the horizon on failure.
    let t_floor = 10.0 / sys.gamma_m;
    let mut target = t_floor.max(2.0 * period);
    let mut residual = f64::INFINITY;
    let mut settled = false;
    for _ in 0..=MAX_TRANSIENT_DOUBLINGS {
        if target > t {
            y = integrate(&mut f, t, y, target, &ode, &mut |_| {})?;
            t = target;
        }
        let (cycle_a, y_mid) = sample_period(&mut f, t, y, period, spp, &ode)?;
        let (cycle_b, y_end) = sample_period(&mut f, t + period, y_mid, period, spp, &ode)?;
        residual = cycle_residual(&cycle_a, &cycle_b);
        t += 2.0 * period;
        y = y_end;
        if residual < CYCLE_RESIDUAL_TOL {
            settled = true;
            break;
        }
        target = 2.0 * t;
    }
    if !settled {
        return Err(Error::Numerical(format!(
            "no probe-beat limit cycle after {t:e} s: cycle-to-cycle residual \
             {residual:e} still above {CYCLE_RESIDUAL_TOL:e}"
        )));
    }
    let transient_end = t;

    // Projection window: n_periods whole periods sampled uniformly,
    // endpoints included.
    let n_samples = opts.n_periods * spp;
    let width = opts.n_periods as f64 * period;
    let mut times = Vec::with_capacity(n_samples + 1);
    let mut cs = Vec::with_capacity(n_samples + 1);
    times.push(t);
    cs.push(Complex64::new(y[2], y[3]));
    let mut next = 0usize;
    let sample_times: Vec<f64> = (1..=n_samples)
        .map(|j| t + width * j as f64 / n_samples as f64)
        .collect();
    let y_final = integrate(&mut f, t, y, t + width, &ode, &mut |step: &DenseStep<4>| {
        while next < sample_times.len() && sample_times[next] <= step.t1() {
            let s = step.eval(sample_times[next]);
            times.push(sample_times[next]);
            cs.push(Complex64::new(s[2], s[3]));
            next += 1;
        }
    })?;
    while next < sample_times.len() {
        times.push(sample_times[next]);
        cs.push(Complex64::new(y_final[2], y_final[3]));
        next += 1;
    }

    let (amp_dc, amp_plus, amp_minus) = project_window(&times, &cs, delta);
    let harmonics = HarmonicExtract {
        amp_at_plus_delta: amp_plus,
        amp_at_minus_delta: amp_minus,
        amp_dc,
    };
    let value = 2.0 * sys.kappa * amp_plus / eps_p;
    Ok(OracleRun {
        response: ComplexResponse { value },
        harmonics,
        operating_point: op,
        stability,
        transient_end,
        window: width,
        cycle_residual: residual,
    })
}
