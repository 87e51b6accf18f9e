// SPDX-License-Identifier: Apache-2.0

//! Ensemble average of unitary evolutions under sampled classical fields.
//!
//! Each realization evolves the eigenvectors of `ρ(0)` in the interaction
//! picture of the static Hamiltonian. The noise is held constant over a step,
//! so the first Magnus term `∫ V_I dt` is exact; the step propagator is its
//! Cayley transform, which is unitary to rounding.

use nalgebra::{Complex, SymmetricEigen, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::stream_rng;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::{hamiltonian_matrix, DensityMatrix3, Matrix3c, SpinCenterParams, C64};
use crate::noise::{lorentz_shape, Spectrum};
use crate::par::Execution;

/// A classical field process `(E, B)` in the defect frame.
pub trait FieldNoise: Sync {
    type State: Send;
    /// Draws the stationary initial state.
    fn init(&self, rng: &mut ChaCha8Rng) -> Self::State;
    /// Returns the fields to hold over the next `dt` and advances the state.
    fn step(&self, state: &mut Self::State, rng: &mut ChaCha8Rng, dt: f64) -> ([f64; 3], [f64; 3]);
}

/// No noise at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl FieldNoise for NoNoise {
    type State = ();
    fn init(&self, _: &mut ChaCha8Rng) {}
    fn step(&self, _: &mut (), _: &mut ChaCha8Rng, _: f64) -> ([f64; 3], [f64; 3]) {
        ([0.0; 3], [0.0; 3])
    }
}

/// Independent Ornstein–Uhlenbeck processes on each field axis, all with
/// correlation time `tau_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuFieldNoise {
    electric: [f64; 3],
    magnetic: [f64; 3],
    tau_c: f64,
}

impl OuFieldNoise {
    /// Per-axis variances in (V/m)² and T².
    pub fn new(electric: [f64; 3], magnetic: [f64; 3], tau_c: f64) -> Result<Self> {
        for v in electric.iter().chain(&magnetic) {
            ensure_non_negative("variance", *v)?;
        }
        ensure_positive("tau_c", tau_c)?;
        Ok(OuFieldNoise { electric, magnetic, tau_c })
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }

    pub fn electric_spectrum(&self) -> AxisLorentzian {
        AxisLorentzian { variance: self.electric, tau: self.tau_c }
    }

    pub fn magnetic_spectrum(&self) -> AxisLorentzian {
        AxisLorentzian { variance: self.magnetic, tau: self.tau_c }
    }
}

impl FieldNoise for OuFieldNoise {
    type State = [f64; 6];

    fn init(&self, rng: &mut ChaCha8Rng) -> [f64; 6] {
        let sd = self.sd();
        std::array::from_fn(|k| if sd[k] > 0.0 { sd[k] * rng.sample::<f64, _>(StandardNormal) } else { 0.0 })
    }

    fn step(&self, state: &mut [f64; 6], rng: &mut ChaCha8Rng, dt: f64) -> ([f64; 3], [f64; 3]) {
        let out = ([state[0], state[1], state[2]], [state[3], state[4], state[5]]);
        let a = (-dt / self.tau_c).exp();
        let b = (-(-2.0 * dt / self.tau_c).exp_m1()).sqrt();
        for (s, sd) in state.iter_mut().zip(self.sd()) {
            if sd > 0.0 {
                *s = a * *s + b * sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        out
    }
}

impl OuFieldNoise {
    fn sd(&self) -> [f64; 6] {
        let e = self.electric.map(f64::sqrt);
        let b = self.magnetic.map(f64::sqrt);
        [e[0], e[1], e[2], b[0], b[1], b[2]]
    }
}

/// Per-axis Lorentzian `σ_k² 2τ/(1 + ω²τ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLorentzian {
    pub variance: [f64; 3],
    pub tau: f64,
}

impl Spectrum for AxisLorentzian {
    fn density(&self, omega: f64) -> [f64; 3] {
        let l = lorentz_shape(omega, self.tau);
        self.variance.map(|v| v * l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingOptions {
    /// Static field along the defect axis (T).
    pub bz: f64,
    /// Maximum step (s); each output interval is split evenly.
    pub dt: f64,
    pub realizations: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl AveragingOptions {
    pub fn new(dt: f64, realizations: usize, seed: u64) -> Self {
        AveragingOptions { bz: 0.0, dt, realizations, seed, execution: Execution::default() }
    }
}

/// Smallest accepted ensemble.
pub const MIN_REALIZATIONS: usize = 10;

/// Realization-averaged density matrix (Schrödinger picture) on the output
/// grid, with standard errors of the mean.
#[derive(Debug, Clone)]
pub struct StochasticAverage {
    pub times: Vec<f64>,
    pub mean: Vec<Matrix3c>,
    /// Standard error of each population.
    pub population_std_err: Vec<[f64; 3]>,
    /// Standard error of `ρ+0`, `ρ+−`, `ρ0−` (modulus of the complex spread).
    pub coherence_std_err: Vec<[f64; 3]>,
    pub realizations: usize,
    /// Largest `|Tr ρ − 1|` seen in any single realization.
    pub max_trace_error: f64,
}

impl StochasticAverage {
    pub fn populations(&self, i: usize) -> [f64; 3] {
        let m = &self.mean[i];
        [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re]
    }

    pub fn coherence(&self, i: usize, row: usize, col: usize) -> C64 {
        self.mean[i][(row, col)]
    }

    pub fn state(&self, i: usize) -> DensityMatrix3 {
        DensityMatrix3::from_raw(self.mean[i])
    }
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Averages `ρ(t)` over `opts.realizations` noise histories; realization `r`
/// uses stream `r` of `opts.seed`, and the average is accumulated in
/// realization order.
pub fn stochastic_average_evolution<N: FieldNoise>(
    params: &SpinCenterParams,
    noise: &N,
    rho0: &DensityMatrix3,
    t_grid: &[f64],
    opts: &AveragingOptions,
) -> Result<StochasticAverage> {
    params.validate()?;
    if opts.realizations < MIN_REALIZATIONS {
        return Err(Error::param(
            "realizations",
            format!("need at least {MIN_REALIZATIONS}, got {}", opts.realizations),
        ));
    }
    ensure_positive("dt", opts.dt)?;
    if !opts.bz.is_finite() {
        return Err(Error::param("bz", "must be finite"));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("t_grid", "must be finite, non-negative and non-decreasing"));
    }

    let h0 = hamiltonian_matrix(params, [0.0; 3], [0.0, 0.0, opts.bz]);
    let h_ref = hamiltonian_matrix(params, [0.0; 3], [0.0; 3]);
    let omega: [f64; 3] = std::array::from_fn(|a| 2.0 * std::f64::consts::PI * h0[(a, a)].re);

    let eig = SymmetricEigen::new(*rho0.matrix());
    let components: Vec<(f64, Vector3<C64>)> = (0..3)
        .filter(|&k| eig.eigenvalues[k] > 1e-15)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned()))
        .collect();

    let run = |r: usize| -> Vec<Matrix3c> {
        let mut rng = stream_rng(opts.seed, r as u64);
        let mut state = noise.init(&mut rng);
        let mut psi: Vec<Vector3<C64>> = components.iter().map(|c| c.1).collect();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(t_grid.len());
        for &target in t_grid {
            let span = target - t;
            if span > 0.0 {
                let nsub = ((span / opts.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let h = span / nsub as f64;
                for _ in 0..nsub {
                    let (e, b) = noise.step(&mut state, &mut rng, h);
                    let v = hamiltonian_matrix(params, e, b) - h_ref;
                    let mut a = Matrix3c::zeros();
                    for i in 0..3 {
                        a[(i, i)] = v[(i, i)] * (2.0 * std::f64::consts::PI * h);
                    }
                    for &(i, j) in &PAIRS {
                        let w = omega[i] - omega[j];
                        let g = phase_integral(w, t, h);
                        let x = v[(i, j)] * g * (2.0 * std::f64::consts::PI);
                        a[(i, j)] = x;
                        a[(j, i)] = x.conj();
                    }
                    let half = a * Complex::new(0.0, 0.5);
                    let lhs = Matrix3c::identity() + half;
                    let rhs = Matrix3c::identity() - half;
                    let u = lhs.try_inverse().expect("I + iA/2 is invertible for Hermitian A") * rhs;
                    for p in psi.iter_mut() {
                        *p = u * *p;
                    }
                    t += h;
                }
            }
            t = target;
            let mut rho = Matrix3c::zeros();
            for (p, (w, _)) in psi.iter().zip(&components) {
                rho += p * p.adjoint() * Complex::new(*w, 0.0);
            }
            for &(i, j) in &PAIRS {
                let ph = Complex::from_polar(1.0, -(omega[i] - omega[j]) * t);
                rho[(i, j)] *= ph;
                rho[(j, i)] = rho[(i, j)].conj();
            }
            out.push(rho);
        }
        out
    };
    let runs = opts.execution.map_range(opts.realizations, run);

    let m = opts.realizations as f64;
    let nt = t_grid.len();
    let mut mean = vec![Matrix3c::zeros(); nt];
    let mut max_trace_error: f64 = 0.0;
    for traj in &runs {
        for (acc, rho) in mean.iter_mut().zip(traj) {
            *acc += rho;
            max_trace_error = max_trace_error.max((rho.trace().re - 1.0).abs());
        }
    }
    for acc in &mut mean {
        *acc /= Complex::new(m, 0.0);
    }
    let mut pop_var = vec![[0.0; 3]; nt];
    let mut coh_var = vec![[0.0; 3]; nt];
    for traj in &runs {
        for i in 0..nt {
            for a in 0..3 {
                pop_var[i][a] += (traj[i][(a, a)].re - mean[i][(a, a)].re).powi(2);
            }
            for (c, &(a, b)) in PAIRS.iter().enumerate() {
                coh_var[i][c] += (traj[i][(a, b)] - mean[i][(a, b)]).norm_sqr();
            }
        }
    }
    let se = |v: f64| (v / (m - 1.0) / m).sqrt();
    Ok(StochasticAverage {
        times: t_grid.to_vec(),
        mean,
        population_std_err: pop_var.into_iter().map(|v| v.map(se)).collect(),
        coherence_std_err: coh_var.into_iter().map(|v| v.map(se)).collect(),
        realizations: opts.realizations,
        max_trace_error,
    })
}

/// `∫_t^{t+h} e^{iωs} ds`.
fn phase_integral(w: f64, t: f64, h: f64) -> C64 {
    let x = w * h;
    if x.abs() < 1e-4 {
        // series of (e^{ix} − 1)/(iω) to O(x³)
        let f = Complex::new(1.0 - x * x / 6.0, x / 2.0 - x * x * x / 24.0) * h;
        return Complex::from_polar(1.0, w * t) * f;
    }
    let e = Complex::new(x.cos() - 1.0, x.sin());
    Complex::from_polar(1.0, w * t) * e / Complex::new(0.0, w)
}
