//! Adaptive 5(4) Dormand-Prince integrator with FSAL, PI step control, and
//! quartic dense output, over fixed-size real state vectors.

use crate::error::{Error, Result};

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFE: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
/// Step growth is capped at 10x, shrinkage at 5x per step.
const FACC1: f64 = 5.0;
const FACC2: f64 = 0.1;

/// Integrator controls.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    /// Relative tolerance entering the per-component error scale.
    pub rel_tol: f64,
    /// Absolute tolerance entering the per-component error scale.
    pub abs_tol: f64,
    /// Hard cap on |h|; None for unlimited.
    pub h_max: Option<f64>,
    /// Accepted-plus-rejected step budget before giving up.
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            h_max: None,
            max_steps: 5_000_000,
        }
    }
}

/// One accepted step with its quartic interpolant,
/// u(theta) = c0 + theta*(c1 + (1-theta)*(c2 + theta*(c3 + (1-theta)*c4))).
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    /// Step start time.
    pub t0: f64,
    /// Step size; the step covers [t0, t0 + h].
    pub h: f64,
    cont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    /// Step end time.
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` inside [t0, t1].
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = if self.h == 0.0 {
            0.0
        } else {
            (t - self.t0) / self.h
        };
        let s1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            let c = &self.cont;
            y[i] = c[0][i]
                + theta * (c[1][i] + s1 * (c[2][i] + theta * (c[3][i] + s1 * c[4][i])));
        }
        y
    }
}

fn rms_norm<const N: usize>(v: &[f64; N]) -> f64 {
    let sum: f64 = v.iter().map(|x| x * x).sum();
    (sum / N as f64).sqrt()
}

/// Classic starting-step heuristic: balance the first Euler increment
/// against the scaled solution and derivative magnitudes.
fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t_end: f64,
    opts: &Options,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let span = t_end - t0;
    let mut scaled_y = [0.0; N];
    let mut scaled_f = [0.0; N];
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        scaled_y[i] = y0[i] / sc;
        scaled_f[i] = f0[i] / sc;
    }
    let d0 = rms_norm(&scaled_y);
    let d1 = rms_norm(&scaled_f);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);

    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h0 * f0[i];
    }
    let f1 = f(t0 + h0, &y1);
    let mut scaled_df = [0.0; N];
    for i in 0..N {
        let sc = opts.abs_tol + opts.rel_tol * y0[i].abs();
        scaled_df[i] = (f1[i] - f0[i]) / sc;
    }
    let d2 = rms_norm(&scaled_df) / h0;

    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * span)
    } else {
        (0.01 / dmax).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrate y' = f(t, y) forward from (t0, y0) to t_end, reporting every
/// accepted step (with dense interpolant) to `on_step`. Returns the state at
/// t_end, which the final step hits exactly.
pub fn integrate<const N: usize, F, S>(
    f: &mut F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options,
    on_step: &mut S,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(&DenseStep<N>),
{
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "integration needs finite t0 < t_end, got [{t0:e}, {t_end:e}]"
        )));
    }
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "integration tolerances must be strictly positive".into(),
        ));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(f, t0, &y0, &k1, t_end, opts);
    if let Some(h_max) = opts.h_max {
        h = h.min(h_max);
    }
    let mut facold = 1e-4_f64;
    let mut last_rejected = false;
    let mut steps = 0usize;

    while t < t_end {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Numerical(format!(
                "integrator exceeded {} steps at t = {t:e} (span [{t0:e}, {t_end:e}])",
                opts.max_steps
            )));
        }
        if h < 1e-14 * t.abs().max(t_end.abs()) {
            return Err(Error::Numerical(format!(
                "step size underflow at t = {t:e}: h = {h:e}"
            )));
        }
        if t + 1.01 * h >= t_end {
            h = t_end - t;
        }

        let mut y2 = [0.0; N];
        for i in 0..N {
            y2[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = f(t + C2 * h, &y2);
        let mut y3 = [0.0; N];
        for i in 0..N {
            y3[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(t + C3 * h, &y3);
        let mut y4 = [0.0; N];
        for i in 0..N {
            y4[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(t + C4 * h, &y4);
        let mut y5 = [0.0; N];
        for i in 0..N {
            y5[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(t + C5 * h, &y5);
        let mut y6 = [0.0; N];
        for i in 0..N {
            y6[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(t + h, &y6);
        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let k7 = f(t + h, &y_new);

        let mut err_sq = 0.0;
        for i in 0..N {
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if !err.is_finite() {
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(FACC2, FACC1);
            facold = err.max(1e-4);
            let mut cont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k7[i] - bspl;
                cont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            on_step(&DenseStep { t0: t, h, cont });

            t += h;
            y = y_new;
            k1 = k7;

            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
                last_rejected = false;
            }
            if let Some(h_max) = opts.h_max {
                h_new = h_new.min(h_max);
            }
            h = h_new;
        } else {
            h /= FACC1.min(fac11 / SAFE);
            last_rejected = true;
        }
    }
    Ok(y)
}

/// Integrate and return the dense-output state at each requested time.
/// `sample_times` must be non-decreasing, with samples inside [t0, t_end];
/// integration runs to `t_end`.
pub fn integrate_sampled<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    sample_times: &[f64],
    opts: &Options,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    for w in sample_times.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidParameter(
                "sample times must be non-decreasing".into(),
            ));
        }
    }
    if let (Some(&first), Some(&last)) = (sample_times.first(), sample_times.last()) {
        if first < t0 || last > t_end {
            return Err(Error::InvalidParameter(format!(
                "sample times [{first:e}, {last:e}] leave the span [{t0:e}, {t_end:e}]"
            )));
        }
    }

    let mut samples = Vec::with_capacity(sample_times.len());
    let mut next = 0usize;
    let y_final = integrate(f, t0, y0, t_end, opts, &mut |step: &DenseStep<N>| {
        while next < sample_times.len() && sample_times[next] <= step.t1() {
            samples.push(step.eval(sample_times[next]));
            next += 1;
        }
    })?;
    // A final sample exactly at t_end can be left by float comparison.
    while next < sample_times.len() && sample_times[next] >= t_end {
        samples.push(y_final);
        next += 1;
    }
    if samples.len() != sample_times.len() {
        return Err(Error::Numerical(format!(
            "dense output covered only {} of {} samples",
            samples.len(),
            sample_times.len()
        )));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> Options {
        Options {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            ..Options::default()
        }
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let mut f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let y = integrate(&mut f, 0.0, [1.0], 5.0, &tight(), &mut |_| {}).unwrap();
        let want = (-5.0f64).exp();
        assert!((y[0] - want).abs() / want < 1e-8, "got {:e}", y[0]);
    }

    #[test]
    fn rotation_returns_to_start_and_preserves_norm() {
        let mut f = |_t: f64, y: &[f64; 2]| [-y[1], y[0]];
        let y = integrate(
            &mut f,
            0.0,
            [1.0, 0.0],
            std::f64::consts::TAU,
            &tight(),
            &mut |_| {},
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
        let norm = (y[0] * y[0] + y[1] * y[1]).sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn damped_oscillator_matches_analytic_solution() {
        let omega = 2.0;
        let zeta = 0.05;
        let mut f = |_t: f64, y: &[f64; 2]| {
            [y[1], -2.0 * zeta * omega * y[1] - omega * omega * y[0]]
        };
        let t = 10.0;
        let y = integrate(&mut f, 0.0, [1.0, 0.0], t, &tight(), &mut |_| {}).unwrap();
        let wd = omega * (1.0 - zeta * zeta).sqrt();
        let envelope = (-zeta * omega * t).exp();
        let want = envelope * ((wd * t).cos() + zeta * omega / wd * (wd * t).sin());
        assert!((y[0] - want).abs() < 1e-8, "got {:e} want {want:e}", y[0]);
    }

    #[test]
    fn tighter_tolerance_shrinks_the_error() {
        let run = |rel: f64| {
            let mut f = |_t: f64, y: &[f64; 1]| [-y[0]];
            let opts = Options {
                rel_tol: rel,
                abs_tol: rel * 1e-3,
                ..Options::default()
            };
            let y = integrate(&mut f, 0.0, [1.0], 5.0, &opts, &mut |_| {}).unwrap();
            (y[0] - (-5.0f64).exp()).abs()
        };
        let coarse = run(1e-5);
        let fine = run(1e-10);
        assert!(
            fine * 100.0 < coarse,
            "coarse {coarse:e} fine {fine:e}: tolerance must control the error"
        );
    }

    #[test]
    fn dense_output_tracks_the_solution_between_steps() {
        let times: Vec<f64> = (0..=50).map(|i| 0.1 * i as f64).collect();
        let mut f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let samples =
            integrate_sampled(&mut f, 0.0, [1.0], 5.0, &times, &tight()).unwrap();
        assert_eq!(samples.len(), times.len());
        for (t, s) in times.iter().zip(&samples) {
            let want = (-t).exp();
            assert!(
                (s[0] - want).abs() < 1e-8,
                "t = {t}: got {:e} want {want:e}",
                s[0]
            );
        }
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let opts = Options {
            max_steps: 3,
            ..tight()
        };
        let err = integrate(&mut f, 0.0, [1.0], 1e6, &opts, &mut |_| {}).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn rejects_bad_spans_and_tolerances() {
        let mut f = |_t: f64, y: &[f64; 1]| [-y[0]];
        assert!(integrate(&mut f, 1.0, [1.0], 0.0, &tight(), &mut |_| {}).is_err());
        let bad = Options {
            rel_tol: 0.0,
            ..Options::default()
        };
        assert!(integrate(&mut f, 0.0, [1.0], 1.0, &bad, &mut |_| {}).is_err());
        assert!(
            integrate_sampled(&mut f, 0.0, [1.0], 1.0, &[0.5, 0.2], &tight()).is_err()
        );
        assert!(
            integrate_sampled(&mut f, 0.0, [1.0], 1.0, &[0.5, 2.0], &tight()).is_err()
        );
    }
}
