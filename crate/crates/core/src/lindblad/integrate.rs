// SPDX-License-Identifier: Apache-2.0

//! Direct numerical integration of `dρ/dt = L[ρ]`.

use nalgebra::Complex;

use super::{build_liouvillian, vectorize, RateSet};
use crate::error::{Error, Result};
use crate::model::{DensityMatrix3, Matrix3c};

/// Step-size policy for [`evolve_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Embedded Dormand–Prince 5(4) with mixed error control.
    Adaptive { rtol: f64, atol: f64, max_steps: usize },
    /// Classical RK4 with a fixed step `dt`, clipped to land on output times.
    Fixed { dt: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive { rtol: 1e-10, atol: 1e-13, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Sampled solution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix3>,
    pub stats: SolverStats,
}

// Dormand–Prince tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the autonomous-or-not system `dy/dt = f(t, y)` and calls `out`
/// with the state at each requested time (non-decreasing, ≥ `t0`).
pub(crate) fn solve<F, O>(mut f: F, t0: f64, y0: &[f64], t_out: &[f64], control: StepControl, mut out: O) -> Result<SolverStats>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(usize, &[f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut stats = SolverStats::default();
    if t_out.iter().any(|x| !x.is_finite()) || t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&x| x < t0) {
        return Err(Error::param("t_grid", "output times must be finite, non-decreasing and >= t0"));
    }
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];

    match control {
        StepControl::Fixed { dt } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::param("dt", "must be > 0"));
            }
            for (i, &target) in t_out.iter().enumerate() {
                while t < target {
                    let h = dt.min(target - t);
                    rk4_step(&mut f, t, &mut y, h, &mut k, &mut tmp);
                    stats.evaluations += 4;
                    stats.accepted += 1;
                    t = if target - t <= dt { target } else { t + h };
                    if y.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Integration { t, reason: "non-finite state".into() });
                    }
                }
                out(i, &y);
            }
        }
        StepControl::Adaptive { rtol, atol, max_steps } => {
            if !(rtol > 0.0) || !(atol >= 0.0) {
                return Err(Error::param("rtol", "tolerances must be positive"));
            }
            f(t, &y, &mut k[0]);
            stats.evaluations += 1;
            let span = t_out.last().map_or(0.0, |&e| e - t0);
            let mut h = initial_step(&y, &k[0], rtol, atol, span);
            let mut ynew = vec![0.0; n];
            for (i, &target) in t_out.iter().enumerate() {
                while t < target {
                    if stats.accepted + stats.rejected >= max_steps {
                        return Err(Error::Integration { t, reason: format!("exceeded {max_steps} steps") });
                    }
                    let last = h >= target - t;
                    let hs = if last { target - t } else { h };
                    if hs <= 16.0 * f64::EPSILON * t.abs().max(span) {
                        return Err(Error::Integration { t, reason: format!("step size underflow (h = {hs:e})") });
                    }
                    for s in 1..7 {
                        for j in 0..n {
                            let mut acc = y[j];
                            for (m, a) in A[s][..s].iter().enumerate() {
                                acc += hs * a * k[m][j];
                            }
                            tmp[j] = acc;
                        }
                        let (head, tail) = k.split_at_mut(s);
                        let _ = head;
                        f(t + C[s] * hs, &tmp, &mut tail[0]);
                        if s == 6 {
                            ynew.copy_from_slice(&tmp);
                        }
                    }
                    stats.evaluations += 6;
                    let mut err = 0.0;
                    for j in 0..n {
                        let mut e = 0.0;
                        for s in 0..7 {
                            e += E[s] * k[s][j];
                        }
                        let sc = atol + rtol * y[j].abs().max(ynew[j].abs());
                        let r = hs * e / sc;
                        err += r * r;
                    }
                    let err = (err / n as f64).sqrt();
                    if !err.is_finite() {
                        return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
                    }
                    if err <= 1.0 {
                        t = if last { target } else { t + hs };
                        y.copy_from_slice(&ynew);
                        k.swap(0, 6);
                        stats.accepted += 1;
                        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        if !last {
                            h = hs * grow;
                        } else {
                            h = h.max(hs * grow);
                        }
                    } else {
                        stats.rejected += 1;
                        h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                    }
                }
                out(i, &y);
            }
        }
    }
    Ok(stats)
}

fn initial_step(y: &[f64], dy: &[f64], rtol: f64, atol: f64, span: f64) -> f64 {
    let n = y.len() as f64;
    let d0 = (y.iter().map(|v| (v / (atol + rtol * v.abs())).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (y.iter().zip(dy).map(|(v, d)| (d / (atol + rtol * v.abs())).powi(2)).sum::<f64>() / n).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-300) } else { 0.01 * d0 / d1 };
    if span > 0.0 {
        h.min(span)
    } else {
        h
    }
}

fn rk4_step<F: FnMut(f64, &[f64], &mut [f64])>(f: &mut F, t: f64, y: &mut [f64], h: f64, k: &mut [Vec<f64>], tmp: &mut [f64]) {
    let n = y.len();
    f(t, y, &mut k[0]);
    for j in 0..n {
        tmp[j] = y[j] + 0.5 * h * k[0][j];
    }
    f(t + 0.5 * h, tmp, &mut k[1]);
    for j in 0..n {
        tmp[j] = y[j] + 0.5 * h * k[1][j];
    }
    f(t + 0.5 * h, tmp, &mut k[2]);
    for j in 0..n {
        tmp[j] = y[j] + h * k[2][j];
    }
    f(t + h, tmp, &mut k[3]);
    for j in 0..n {
        y[j] += h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
    }
}

/// Integrates the master equation from `rho0` at `t = 0` and samples the
/// state on `t_grid` (s, non-decreasing, ≥ 0).
pub fn evolve_numeric(r: &RateSet, rho0: &DensityMatrix3, t_grid: &[f64], control: StepControl) -> Result<Trajectory> {
    let l = build_liouvillian(r)?;
    let m = *l.matrix();
    let v0 = vectorize(rho0.matrix());
    // real and imaginary parts evolve independently under the real generator
    let mut y0 = [0.0; 18];
    for i in 0..9 {
        y0[i] = v0[i].re;
        y0[9 + i] = v0[i].im;
    }
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        for i in 0..9 {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..9 {
                let a = m[(i, j)];
                if a != 0.0 {
                    re += a * y[j];
                    im += a * y[9 + j];
                }
            }
            dy[i] = re;
            dy[9 + i] = im;
        }
    };
    let mut states = Vec::with_capacity(t_grid.len());
    let stats = solve(rhs, 0.0, &y0, t_grid, control, |_, y| {
        let mat = Matrix3c::from_fn(|i, j| Complex::new(y[3 * i + j], y[9 + 3 * i + j]));
        states.push(DensityMatrix3::from_raw(mat));
    })?;
    Ok(Trajectory { times: t_grid.to_vec(), states, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{dephasing_rates, population_dynamics, relaxation_rates};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn grid(n: usize, t_end: f64) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn exponential_decay_accuracy() {
        let mut out = Vec::new();
        let stats = solve(
            |_, y, dy| dy[0] = -3.0 * y[0],
            0.0,
            &[1.0],
            &[0.5, 1.0, 2.0],
            StepControl::default(),
            |_, y| out.push(y[0]),
        )
        .unwrap();
        for (t, v) in [0.5f64, 1.0, 2.0].iter().zip(&out) {
            assert_relative_eq!(*v, (-3.0 * t).exp(), max_relative = 1e-9);
        }
        assert!(stats.accepted > 0);
        let mut fixed = Vec::new();
        solve(|_, y, dy| dy[0] = -3.0 * y[0], 0.0, &[1.0], &[1.0], StepControl::Fixed { dt: 1e-3 }, |_, y| {
            fixed.push(y[0])
        })
        .unwrap();
        assert_relative_eq!(fixed[0], (-3.0f64).exp(), max_relative = 1e-11);
    }

    #[test]
    fn reports_step_failure() {
        // finite-time blow-up of y' = y²
        let r = solve(|_, y, dy| dy[0] = y[0] * y[0], 0.0, &[1.0], &[2.0], StepControl::default(), |_, _| {});
        assert!(matches!(r, Err(Error::Integration { .. })));
        let r = solve(|_, _, dy| dy[0] = 0.0, 0.0, &[1.0], &[1.0, 0.5], StepControl::default(), |_, _| {});
        assert!(r.is_err());
    }

    #[test]
    fn zero_rates_constant() {
        let rho0 = DensityMatrix3::pure(Vector3::new(1.0, 2.0, 0.5).map(|x| Complex::new(x, 0.3 * x))).unwrap();
        let tr = evolve_numeric(&RateSet::zero(), &rho0, &[0.0, 1.0, 10.0], StepControl::default()).unwrap();
        for s in &tr.states {
            assert!((s.matrix() - rho0.matrix()).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_analytic_populations_and_dephasing() {
        let r = RateSet {
            gamma_dperp_pm: 2e3,
            gamma_dprime_p0: 3e3,
            gamma_dprime_m0: 5e3,
            gamma_dpar_0: 1e3,
            gamma_gperp_p0: 1e3,
            gamma_gperp_m0: 0.5e3,
            gamma_gpar_0: 0.7e3,
            valid: true,
        };
        let psi = Vector3::new(0.3, 0.5, 0.8).map(|x| Complex::new(x, 0.0));
        let rho0 = DensityMatrix3::pure(psi).unwrap();
        let ts = grid(40, 2e-3);
        let tr = evolve_numeric(&r, &rho0, &ts, StepControl::default()).unwrap();
        let sol = relaxation_rates(&r);
        let t2 = dephasing_rates(&r);
        for (t, s) in ts.iter().zip(&tr.states) {
            let p = sol.populations(rho0.populations(), *t);
            for k in 0..3 {
                assert!((s.populations()[k] - p[k]).abs() < 1e-9);
            }
            let want = rho0.element(0, 1) * (-t2.rate_0p() * t).exp();
            assert!((s.element(0, 1) - want).norm() < 1e-9);
            assert!((s.trace().re - 1.0).abs() < 1e-10);
            assert!(s.hermiticity_error() < 1e-10);
        }
        let diag = DensityMatrix3::from_populations([0.0, 0.0, 1.0]).unwrap();
        let tr = evolve_numeric(&r, &diag, &ts, StepControl::Fixed { dt: 1e-6 }).unwrap();
        let an = population_dynamics(&r, &diag, &ts).unwrap();
        for (s, p) in tr.states.iter().zip(&an) {
            assert!(s.is_diagonal(0.0));
            for k in 0..3 {
                assert!((s.populations()[k] - p[k]).abs() < 1e-10);
            }
        }
    }
}
