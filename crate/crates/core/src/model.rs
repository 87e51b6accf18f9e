// SPDX-License-Identifier: Apache-2.0

//! Defect model: constants of the C3v ground-state Hamiltonian, its 3×3
//! matrix, the bare transition frequencies and the surface/defect frame
//! geometry.
//!
//! Basis order everywhere is `(|T+⟩, |T0⟩, |T−⟩)`, i.e. index 0 is `m = +1`.
//! Hamiltonian entries are frequencies (`H/h`, Hz); spectra and rates use
//! angular frequencies (rad/s).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Complex, Matrix3, SymmetricEigen, Vector3};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

pub type C64 = Complex<f64>;
pub type Matrix3c = Matrix3<C64>;

/// Index of `|T+⟩`.
pub const PLUS: usize = 0;
/// Index of `|T0⟩`.
pub const ZERO: usize = 1;
/// Index of `|T−⟩`.
pub const MINUS: usize = 2;

const fn c(re: f64) -> C64 {
    Complex { re, im: 0.0 }
}

/// Spin-1 operators in the `(+, 0, −)` basis.
pub mod spin {
    use super::*;

    pub fn sz() -> Matrix3c {
        Matrix3c::from_diagonal(&Vector3::new(c(1.0), c(0.0), c(-1.0)))
    }

    pub fn s_plus() -> Matrix3c {
        let r2 = c(std::f64::consts::SQRT_2);
        let mut m = Matrix3c::zeros();
        m[(PLUS, ZERO)] = r2;
        m[(ZERO, MINUS)] = r2;
        m
    }

    pub fn s_minus() -> Matrix3c {
        s_plus().adjoint()
    }

    pub fn sx() -> Matrix3c {
        (s_plus() + s_minus()) * c(0.5)
    }

    pub fn sy() -> Matrix3c {
        (s_plus() - s_minus()) * Complex::new(0.0, -0.5)
    }

    pub fn identity() -> Matrix3c {
        Matrix3c::identity()
    }
}

/// Constants of the defect Hamiltonian.
///
/// `zero_field_splitting` in Hz, gyromagnetic ratios in Hz/T and the electric
/// dipole constants in Hz·m/V (the un-tilded, `H/h` convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinCenterParams {
    pub zero_field_splitting: f64,
    pub gamma_par: f64,
    pub gamma_perp: f64,
    pub d_par: f64,
    pub d_perp: f64,
    pub d_prime: f64,
}

impl SpinCenterParams {
    pub fn new(
        zero_field_splitting: f64,
        gamma_par: f64,
        gamma_perp: f64,
        d_par: f64,
        d_perp: f64,
        d_prime: f64,
    ) -> Result<Self> {
        let p = SpinCenterParams {
            zero_field_splitting,
            gamma_par,
            gamma_perp,
            d_par,
            d_perp,
            d_prime,
        };
        p.validate()?;
        Ok(p)
    }

    /// NV⁻ constants. `D` is chosen so that the `|T−⟩`/`|T0⟩` crossing sits at
    /// `B_c = 0.105 T` for `γ∥ = 28 GHz/T`.
    pub fn nv() -> Self {
        SpinCenterParams {
            zero_field_splitting: 2.94e9,
            gamma_par: 28e9,
            gamma_perp: 28e9,
            d_par: 0.35e-2,
            d_perp: 17e-2,
            d_prime: 17e-2 / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("zero_field_splitting", self.zero_field_splitting)?;
        ensure_non_negative("gamma_par", self.gamma_par)?;
        ensure_non_negative("gamma_perp", self.gamma_perp)?;
        ensure_non_negative("d_par", self.d_par)?;
        ensure_non_negative("d_perp", self.d_perp)?;
        ensure_non_negative("d_prime", self.d_prime)
    }

    /// Angular-frequency couplings `(d̃∥, d̃⊥, d̃′) = 2π (d∥, d⊥, d′)`.
    pub fn electric_couplings_rad(&self) -> (f64, f64, f64) {
        (2.0 * PI * self.d_par, 2.0 * PI * self.d_perp, 2.0 * PI * self.d_prime)
    }

    /// Angular-frequency couplings `(γ̃∥, γ̃⊥) = 2π (γ∥, γ⊥)`.
    pub fn magnetic_couplings_rad(&self) -> (f64, f64) {
        (2.0 * PI * self.gamma_par, 2.0 * PI * self.gamma_perp)
    }
}

/// Builds `H/h` (Hz) for electric field `e` (V/m) and magnetic field `b` (T),
/// both expressed in the defect frame.
pub fn hamiltonian_matrix(params: &SpinCenterParams, e: [f64; 3], b: [f64; 3]) -> Matrix3c {
    let [ex, ey, ez] = e;
    let [bx, by, bz] = b;
    let e_p = Complex::new(ex, ey);
    let e_m = Complex::new(ex, -ey);
    let b_p = Complex::new(bx, by);
    let b_m = Complex::new(bx, -by);

    let d = params.zero_field_splitting;
    let axial = (d + params.d_par * ez) / 3.0;
    let zeeman = params.gamma_par * bz;
    let dp = params.d_prime * FRAC_1_SQRT_2;
    let gp = params.gamma_perp * FRAC_1_SQRT_2;

    let mut h = Matrix3c::zeros();
    h[(PLUS, PLUS)] = c(axial + zeeman);
    h[(PLUS, ZERO)] = e_m * dp + b_m * gp;
    h[(PLUS, MINUS)] = -e_p * params.d_perp;

    h[(ZERO, PLUS)] = e_p * dp + b_p * gp;
    h[(ZERO, ZERO)] = c(-2.0 * axial);
    h[(ZERO, MINUS)] = -e_m * dp + b_m * gp;

    h[(MINUS, PLUS)] = -e_m * params.d_perp;
    h[(MINUS, ZERO)] = -e_p * dp + b_p * gp;
    h[(MINUS, MINUS)] = c(axial - zeeman);
    h
}

/// Bare level and transition angular frequencies (rad/s) at a static field
/// `B_z` along the defect axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionFrequencies {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega_zero: f64,
    /// `ω+ − ω0`.
    pub omega_p0: f64,
    /// `ω− − ω0`; negative past the `|T−⟩`/`|T0⟩` crossing.
    pub omega_m0: f64,
    /// `ω+ − ω−`.
    pub omega_pm: f64,
}

impl TransitionFrequencies {
    /// Smallest `|ω_μν|` over the three pairs.
    pub fn min_splitting(&self) -> f64 {
        self.omega_p0
            .abs()
            .min(self.omega_m0.abs())
            .min(self.omega_pm.abs())
    }
}

pub fn transition_frequencies(params: &SpinCenterParams, bz: f64) -> TransitionFrequencies {
    let omega_plus = 2.0 * PI * (params.zero_field_splitting + params.gamma_par * bz);
    let omega_minus = 2.0 * PI * (params.zero_field_splitting - params.gamma_par * bz);
    let omega_zero = 0.0;
    let omega_p0 = omega_plus - omega_zero;
    let omega_m0 = omega_minus - omega_zero;
    TransitionFrequencies {
        omega_plus,
        omega_minus,
        omega_zero,
        omega_p0,
        omega_m0,
        omega_pm: omega_p0 - omega_m0,
    }
}

/// Tilt between the defect symmetry axis and the surface normal, a rotation
/// by `theta` about the shared x axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRotation {
    theta: f64,
}

impl FrameRotation {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::param("theta", format!("must lie in [0, π], got {theta}")));
        }
        Ok(FrameRotation { theta })
    }

    pub fn aligned() -> Self {
        FrameRotation { theta: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Expresses a surface-frame vector `(x′, y′, z′)` in the defect frame.
    #[inline]
    pub fn to_defect(&self, v: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.theta.sin_cos();
        [v[0], v[1] * c - v[2] * s, v[1] * s + v[2] * c]
    }
}

/// Displacement from a defect at depth `z_def` to a surface point
/// `(x′, y′, 0)`, in defect-frame components.
pub fn surface_to_defect_displacement(
    rot: &FrameRotation,
    surface_point: (f64, f64),
    z_def: f64,
) -> Result<[f64; 3]> {
    ensure_positive("z_def", z_def)?;
    Ok(rot.to_defect([surface_point.0, surface_point.1, z_def]))
}

/// Default tolerance for density-matrix validation.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// A validated qutrit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix3(Matrix3c);

impl DensityMatrix3 {
    pub fn new(m: Matrix3c) -> Result<Self> {
        Self::with_tolerance(m, STATE_TOLERANCE)
    }

    /// Checks Hermiticity, unit trace and positivity to `tol`.
    pub fn with_tolerance(m: Matrix3c, tol: f64) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = (m - m.adjoint()).norm();
        if herm > tol * m.norm().max(1.0) {
            return Err(Error::InvalidState(format!("not Hermitian (‖ρ−ρ†‖ = {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let rho = DensityMatrix3(m);
        let min = rho.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Diagonal state with populations `(p+, p0, p−)`.
    pub fn from_populations(p: [f64; 3]) -> Result<Self> {
        Self::new(Matrix3c::from_diagonal(&Vector3::new(c(p[0]), c(p[1]), c(p[2]))))
    }

    /// Pure state `|ψ⟩⟨ψ|`; `psi` is normalised first.
    pub fn pure(psi: Vector3<C64>) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = psi / c(n);
        Self::new(psi * psi.adjoint())
    }

    /// Wraps a matrix without validation (integrator output).
    pub(crate) fn from_raw(m: Matrix3c) -> Self {
        DensityMatrix3(m)
    }

    pub fn matrix(&self) -> &Matrix3c {
        &self.0
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.0[(0, 0)].re, self.0[(1, 1)].re, self.0[(2, 2)].re]
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `‖ρ − ρ†‖_F`.
    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).norm()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * c(0.5);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    /// True when every off-diagonal element vanishes to `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }
}
