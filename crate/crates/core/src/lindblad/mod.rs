// SPDX-License-Identifier: Apache-2.0

//! Markovian reduction of the noisy qutrit: channel rates, the eight Lindblad
//! operators, the 9×9 Liouvillian and its closed-form solution.
//!
//! Density matrices are vectorised row-major in the `(+, 0, −)` basis:
//! `vec(ρ)[3μ + ν] = ρ_μν`.

mod integrate;
mod relaxation;

pub use integrate::*;
pub use relaxation::*;

use std::f64::consts::PI;

use nalgebra::{Complex, SMatrix, SVector};

use crate::error::{ensure_non_negative, Error, Result};
use crate::model::{spin, Matrix3c, SpinCenterParams, TransitionFrequencies, C64, MINUS, PLUS, ZERO};
use crate::noise::Spectrum;

pub type Matrix9 = SMatrix<f64, 9, 9>;
pub type Matrix9c = SMatrix<C64, 9, 9>;
pub type Vector9c = SVector<C64, 9>;

/// Default half-width of the degeneracy guard band (rad/s).
pub const DEFAULT_DEGENERACY_GUARD: f64 = 2.0 * PI * 10e6;

/// Row-major position of `ρ_μν` in the vectorised state.
#[inline]
pub const fn vec_index(mu: usize, nu: usize) -> usize {
    3 * mu + nu
}

/// The five noise channels evaluated at the transition frequencies (1/s).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateSet {
    pub gamma_dperp_pm: f64,
    pub gamma_dprime_p0: f64,
    pub gamma_dprime_m0: f64,
    pub gamma_dpar_0: f64,
    pub gamma_gperp_p0: f64,
    pub gamma_gperp_m0: f64,
    pub gamma_gpar_0: f64,
    /// False when some pair of levels lies inside the degeneracy guard band,
    /// where the secular approximation behind these rates breaks down.
    pub valid: bool,
}

impl RateSet {
    pub fn zero() -> Self {
        RateSet { valid: true, ..Default::default() }
    }

    /// Rate set with only the relaxation combinations `γ`, `Ω+`, `Ω−` set
    /// (carried by `Γ_d⊥` and `Γ_d′`).
    pub fn from_relaxation(gamma: f64, omega_plus: f64, omega_minus: f64) -> Result<Self> {
        let r = RateSet {
            gamma_dperp_pm: gamma,
            gamma_dprime_p0: 2.0 * omega_plus,
            gamma_dprime_m0: 2.0 * omega_minus,
            ..Self::zero()
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("gamma_dperp_pm", self.gamma_dperp_pm)?;
        ensure_non_negative("gamma_dprime_p0", self.gamma_dprime_p0)?;
        ensure_non_negative("gamma_dprime_m0", self.gamma_dprime_m0)?;
        ensure_non_negative("gamma_dpar_0", self.gamma_dpar_0)?;
        ensure_non_negative("gamma_gperp_p0", self.gamma_gperp_p0)?;
        ensure_non_negative("gamma_gperp_m0", self.gamma_gperp_m0)?;
        ensure_non_negative("gamma_gpar_0", self.gamma_gpar_0)
    }

    /// `Γ_γd′(ω+0) = Γ_d′(ω+0) + Γ_γ⊥(ω+0)`.
    pub fn gamma_gd_p0(&self) -> f64 {
        self.gamma_dprime_p0 + self.gamma_gperp_p0
    }

    /// `Γ_γd′(ω−0)`.
    pub fn gamma_gd_m0(&self) -> f64 {
        self.gamma_dprime_m0 + self.gamma_gperp_m0
    }

    pub fn omega_plus(&self) -> f64 {
        0.5 * self.gamma_gd_p0()
    }

    pub fn omega_minus(&self) -> f64 {
        0.5 * self.gamma_gd_m0()
    }

    /// `γ = Γ_d⊥(ω+−)`.
    pub fn gamma_small(&self) -> f64 {
        self.gamma_dperp_pm
    }

    pub fn max_rate(&self) -> f64 {
        [
            self.gamma_dperp_pm,
            self.gamma_dprime_p0,
            self.gamma_dprime_m0,
            self.gamma_dpar_0,
            self.gamma_gperp_p0,
            self.gamma_gperp_m0,
            self.gamma_gpar_0,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluates the channel rates from electric and magnetic spectra. Spectra
/// are sampled at the signed transition frequencies.
pub fn rates_from_spectra(
    electric: &dyn Spectrum,
    magnetic: &dyn Spectrum,
    freqs: &TransitionFrequencies,
    params: &SpinCenterParams,
    guard: f64,
) -> Result<RateSet> {
    let (d_par, d_perp, d_prime) = params.electric_couplings_rad();
    let (g_par, g_perp) = params.magnetic_couplings_rad();
    let xy = |s: [f64; 3]| s[0] + s[1];

    let e_pm = electric.density(freqs.omega_pm);
    let e_p0 = electric.density(freqs.omega_p0);
    let e_m0 = electric.density(freqs.omega_m0);
    let e_0 = electric.density(0.0);
    let b_p0 = magnetic.density(freqs.omega_p0);
    let b_m0 = magnetic.density(freqs.omega_m0);
    let b_0 = magnetic.density(0.0);

    let r = RateSet {
        gamma_dperp_pm: d_perp * d_perp * xy(e_pm),
        gamma_dprime_p0: d_prime * d_prime * xy(e_p0),
        gamma_dprime_m0: d_prime * d_prime * xy(e_m0),
        gamma_dpar_0: d_par * d_par * e_0[2],
        gamma_gperp_p0: g_perp * g_perp * xy(b_p0),
        gamma_gperp_m0: g_perp * g_perp * xy(b_m0),
        gamma_gpar_0: g_par * g_par * b_0[2],
        valid: freqs.min_splitting() >= guard,
    };
    if r.validate().is_err() {
        return Err(Error::param("spectrum", format!("undefined at a transition frequency: {r:?}")));
    }
    Ok(r)
}

fn c(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

/// `L1 … L8` in the interaction picture.
pub fn lindblad_operators(r: &RateSet) -> Result<[Matrix3c; 8]> {
    r.validate()?;
    let (sz, sp, sm) = (spin::sz(), spin::s_plus(), spin::s_minus());
    let id = spin::identity();
    let half = |rate: f64| c(0.5 * rate.sqrt());
    Ok([
        (sz * sz - id * c(2.0 / 3.0)) * c(r.gamma_dpar_0.sqrt()),
        sp * sp * half(r.gamma_dperp_pm),
        sm * sm * half(r.gamma_dperp_pm),
        sz * sp * half(r.gamma_gd_p0()),
        sm * sz * half(r.gamma_gd_p0()),
        sp * sz * half(r.gamma_gd_m0()),
        sz * sm * half(r.gamma_gd_m0()),
        sz * c(r.gamma_gpar_0.sqrt()),
    ])
}

/// Row-major superoperator of `ρ ↦ Σ_k L ρ L† − ½{L†L, ρ}`.
pub fn dissipator_superoperator(ops: &[Matrix3c]) -> Matrix9c {
    let mut out = Matrix9c::zeros();
    let id = Matrix3c::identity();
    for l in ops {
        let ldl = l.adjoint() * l;
        // vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)
        out += l.kronecker(&l.conjugate());
        out -= ldl.kronecker(&id) * c(0.5);
        out -= id.kronecker(&ldl.transpose()) * c(0.5);
    }
    out
}

/// The 9×9 generator in block form.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian9 {
    matrix: Matrix9,
}

impl Liouvillian9 {
    pub fn matrix(&self) -> &Matrix9 {
        &self.matrix
    }

    /// Generator restricted to `(ρ++, ρ00, ρ−−)`.
    pub fn population_block(&self) -> nalgebra::Matrix3<f64> {
        let idx = [vec_index(PLUS, PLUS), vec_index(ZERO, ZERO), vec_index(MINUS, MINUS)];
        nalgebra::Matrix3::from_fn(|i, j| self.matrix[(idx[i], idx[j])])
    }

    /// `L[ρ]` for an arbitrary 3×3 matrix.
    pub fn apply(&self, rho: &Matrix3c) -> Matrix3c {
        unvectorize(&(self.matrix.map(c) * vectorize(rho)))
    }
}

pub fn vectorize(m: &Matrix3c) -> Vector9c {
    Vector9c::from_fn(|k, _| m[(k / 3, k % 3)])
}

pub fn unvectorize(v: &Vector9c) -> Matrix3c {
    Matrix3c::from_fn(|i, j| v[vec_index(i, j)])
}

/// Population relaxation matrix (rows/columns `+, 0, −`).
pub fn relaxation_matrix(r: &RateSet) -> nalgebra::Matrix3<f64> {
    let (g, op, om) = (r.gamma_small(), r.omega_plus(), r.omega_minus());
    nalgebra::Matrix3::new(
        -op - g, op, g, //
        op, -op - om, om, //
        g, om, -om - g,
    )
}

pub fn build_liouvillian(r: &RateSet) -> Result<Liouvillian9> {
    r.validate()?;
    let mut m = Matrix9::zeros();
    let pop = relaxation_matrix(r);
    let diag = [PLUS, ZERO, MINUS];
    for (i, &a) in diag.iter().enumerate() {
        for (j, &b) in diag.iter().enumerate() {
            m[(vec_index(a, a), vec_index(b, b))] = pop[(i, j)];
        }
    }
    let t2 = dephasing_rates(r);
    for (mu, nu, rate) in [
        (PLUS, ZERO, t2.rate_0p()),
        (MINUS, ZERO, t2.rate_0m()),
        (PLUS, MINUS, t2.rate_mp()),
    ] {
        m[(vec_index(mu, nu), vec_index(mu, nu))] = -rate;
        m[(vec_index(nu, mu), vec_index(nu, mu))] = -rate;
    }
    Ok(Liouvillian9 { matrix: m })
}

/// Coherence lifetimes (s) of the three two-level subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingTimes {
    pub t2_0p: f64,
    pub t2_0m: f64,
    pub t2_mp: f64,
}

impl DephasingTimes {
    pub fn rate_0p(&self) -> f64 {
        1.0 / self.t2_0p
    }

    pub fn rate_0m(&self) -> f64 {
        1.0 / self.t2_0m
    }

    pub fn rate_mp(&self) -> f64 {
        1.0 / self.t2_mp
    }
}

pub fn dephasing_rates(r: &RateSet) -> DephasingTimes {
    let common = r.gamma_gpar_0 + r.gamma_dperp_pm + r.gamma_dpar_0;
    let (gp, gm) = (r.gamma_gd_p0(), r.gamma_gd_m0());
    let rate_0p = 0.5 * (common + gp) + 0.25 * gm;
    let rate_0m = 0.5 * (common + gm) + 0.25 * gp;
    let rate_mp = 2.0 * r.gamma_gpar_0 + r.gamma_dperp_pm + 0.25 * (gp + gm);
    DephasingTimes { t2_0p: 1.0 / rate_0p, t2_0m: 1.0 / rate_0m, t2_mp: 1.0 / rate_mp }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::transition_frequencies;
    use crate::noise::{FlatSpectrum, LorentzianSpectrum, ZeroSpectrum};
    use approx::assert_relative_eq;

    fn sample_rates() -> RateSet {
        RateSet {
            gamma_dperp_pm: 1.3e3,
            gamma_dprime_p0: 0.7e3,
            gamma_dprime_m0: 2.1e3,
            gamma_dpar_0: 0.4e3,
            gamma_gperp_p0: 0.2e3,
            gamma_gperp_m0: 0.9e3,
            gamma_gpar_0: 0.6e3,
            valid: true,
        }
    }

    #[test]
    fn zero_spectra_give_zero_rates() {
        let p = SpinCenterParams::nv();
        let f = transition_frequencies(&p, 0.02);
        let r = rates_from_spectra(&ZeroSpectrum, &ZeroSpectrum, &f, &p, DEFAULT_DEGENERACY_GUARD).unwrap();
        assert_eq!(r, RateSet::zero());
    }

    #[test]
    fn flat_spectra_balance_omegas() {
        let p = SpinCenterParams::nv();
        let f = transition_frequencies(&p, 0.03);
        let r = rates_from_spectra(
            &FlatSpectrum([1e-3, 2e-3, 3e-3]),
            &FlatSpectrum([1e-20, 1e-20, 2e-20]),
            &f,
            &p,
            DEFAULT_DEGENERACY_GUARD,
        )
        .unwrap();
        assert_eq!(r.omega_plus(), r.omega_minus());
        let (dpar, dperp, dprime) = p.electric_couplings_rad();
        assert_relative_eq!(r.gamma_dperp_pm, dperp * dperp * 3e-3, max_relative = 1e-15);
        assert_relative_eq!(r.gamma_dprime_p0, dprime * dprime * 3e-3, max_relative = 1e-15);
        assert_relative_eq!(r.gamma_dpar_0, dpar * dpar * 3e-3, max_relative = 1e-15);
        assert!(r.valid);
    }

    #[test]
    fn steep_lorentzian_breaks_balance() {
        let p = SpinCenterParams::nv();
        let f = transition_frequencies(&p, 0.03);
        let lor = LorentzianSpectrum::new(1.0, 1e-8).unwrap();
        struct Iso(LorentzianSpectrum);
        impl Spectrum for Iso {
            fn density(&self, w: f64) -> [f64; 3] {
                [self.0.at(w); 3]
            }
        }
        let r = rates_from_spectra(&Iso(lor), &ZeroSpectrum, &f, &p, DEFAULT_DEGENERACY_GUARD).unwrap();
        assert!(r.omega_minus() > 1.5 * r.omega_plus());
    }

    #[test]
    fn degeneracy_guard_flags_crossing() {
        let p = SpinCenterParams::nv();
        let flat = FlatSpectrum([1e-3; 3]);
        let at = |bz| {
            rates_from_spectra(&flat, &ZeroSpectrum, &transition_frequencies(&p, bz), &p, DEFAULT_DEGENERACY_GUARD)
                .unwrap()
                .valid
        };
        assert!(!at(0.105));
        assert!(!at(0.0));
        assert!(at(0.05));
    }

    #[test]
    fn operator_structure() {
        for l in lindblad_operators(&RateSet::zero()).unwrap() {
            assert_eq!(l, Matrix3c::zeros());
        }
        let ops = lindblad_operators(&sample_rates()).unwrap();
        let nonzero = |m: &Matrix3c| {
            (0..9).filter(|&k| m[(k / 3, k % 3)].norm() > 0.0).map(|k| (k / 3, k % 3)).collect::<Vec<_>>()
        };
        assert_eq!(nonzero(&ops[1]), vec![(PLUS, MINUS)]);
        assert_eq!(nonzero(&ops[2]), vec![(MINUS, PLUS)]);
        assert_eq!(nonzero(&ops[3]), vec![(PLUS, ZERO)]);
        assert_eq!(nonzero(&ops[4]), vec![(ZERO, PLUS)]);
        assert_eq!(nonzero(&ops[5]), vec![(ZERO, MINUS)]);
        assert_eq!(nonzero(&ops[6]), vec![(MINUS, ZERO)]);
        assert!(lindblad_operators(&RateSet { gamma_gpar_0: -1.0, ..RateSet::zero() }).is_err());
    }

    #[test]
    fn block_form_matches_superoperator() {
        let r = sample_rates();
        let l = build_liouvillian(&r).unwrap();
        let sup = dissipator_superoperator(&lindblad_operators(&r).unwrap());
        let scale = r.max_rate();
        for i in 0..9 {
            for j in 0..9 {
                assert!((sup[(i, j)] - c(l.matrix()[(i, j)])).norm() <= 1e-13 * scale, "entry ({i},{j})");
            }
        }
        let pop = l.population_block();
        for j in 0..3 {
            assert!(pop.column(j).sum().abs() <= 1e-13 * scale);
        }
        assert_eq!(pop, relaxation_matrix(&r));
    }

    #[test]
    fn dephasing_examples() {
        let g = 1e3;
        let t = dephasing_rates(&RateSet { gamma_gpar_0: g, ..RateSet::zero() });
        assert_eq!(t.rate_0p(), g / 2.0);
        assert_eq!(t.rate_0m(), g / 2.0);
        assert_eq!(t.rate_mp(), 2.0 * g);
        let t = dephasing_rates(&RateSet { gamma_dprime_m0: g, ..RateSet::zero() });
        assert_eq!(t.rate_0p(), g / 4.0);
        let all = RateSet {
            gamma_dperp_pm: g,
            gamma_dprime_p0: g,
            gamma_dprime_m0: g,
            gamma_dpar_0: g,
            gamma_gperp_p0: g,
            gamma_gperp_m0: g,
            gamma_gpar_0: g,
            valid: true,
        };
        let t = dephasing_rates(&all);
        assert_relative_eq!(t.rate_0p(), 3.0 * g, max_relative = 1e-14);
        assert_relative_eq!(t.rate_0m(), 3.0 * g, max_relative = 1e-14);
        assert_relative_eq!(t.rate_mp(), 4.0 * g, max_relative = 1e-14);
        assert!(dephasing_rates(&RateSet::zero()).t2_0p.is_infinite());
    }

    #[test]
    fn dephasing_block_entries() {
        let r = sample_rates();
        let l = build_liouvillian(&r).unwrap();
        let t = dephasing_rates(&r);
        assert_eq!(l.matrix()[(vec_index(ZERO, PLUS), vec_index(ZERO, PLUS))], -t.rate_0p());
        assert_eq!(l.matrix()[(vec_index(MINUS, ZERO), vec_index(MINUS, ZERO))], -t.rate_0m());
        assert_eq!(l.matrix()[(vec_index(PLUS, MINUS), vec_index(PLUS, MINUS))], -t.rate_mp());
    }

    #[test]
    fn vectorisation_round_trip() {
        let m = Matrix3c::from_fn(|i, j| Complex::new(i as f64, j as f64));
        let v = vectorize(&m);
        assert_eq!(v[vec_index(2, 1)], m[(2, 1)]);
        assert_eq!(unvectorize(&v), m);
    }
}
