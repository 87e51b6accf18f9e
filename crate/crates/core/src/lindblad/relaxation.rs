// SPDX-License-Identifier: Apache-2.0

//! Closed-form population relaxation.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix2, Vector2, Vector3};

use super::{relaxation_matrix, RateSet};
use crate::error::{Error, Result};
use crate::model::DensityMatrix3;

/// Eigen-decomposition of the population relaxation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSolution {
    /// Fast generator eigenvalue `−1/T1⁺` (≤ 0).
    pub lambda_plus: f64,
    /// Slow generator eigenvalue `−1/T1⁻` (≤ 0).
    pub lambda_minus: f64,
    /// Unit eigenvectors for `0`, `λ+`, `λ−` in `(+, 0, −)` order.
    pub eigvecs: [Vector3<f64>; 3],
}

impl PopulationSolution {
    /// `1/T1⁺` (1/s).
    pub fn rate_plus(&self) -> f64 {
        -self.lambda_plus
    }

    /// `1/T1⁻` (1/s).
    pub fn rate_minus(&self) -> f64 {
        -self.lambda_minus
    }

    pub fn t1_plus(&self) -> f64 {
        1.0 / self.rate_plus()
    }

    pub fn t1_minus(&self) -> f64 {
        1.0 / self.rate_minus()
    }

    /// Mode amplitudes `(c1, c2, c3)` for initial populations `p0`, with the
    /// eigenvectors scaled as in [`Self::eigvecs`] except the stationary mode,
    /// which uses `(1, 1, 1)` so that `c1 = Tr ρ / 3`.
    pub fn coefficients(&self, p0: [f64; 3]) -> [f64; 3] {
        let p = Vector3::from(p0);
        let c1 = p.sum() / 3.0;
        let rest = p - Vector3::repeat(c1);
        let (v2, v3) = (&self.eigvecs[1], &self.eigvecs[2]);
        let gram = Matrix2::new(v2.dot(v2), v2.dot(v3), v3.dot(v2), v3.dot(v3));
        let rhs = Vector2::new(v2.dot(&rest), v3.dot(&rest));
        let c = gram.lu().solve(&rhs).unwrap_or(rhs);
        [c1, c[0], c[1]]
    }

    /// Populations at time `t` for initial populations `p0`.
    pub fn populations(&self, p0: [f64; 3], t: f64) -> [f64; 3] {
        let [c1, c2, c3] = self.coefficients(p0);
        let e2 = (self.lambda_plus * t).exp();
        let e3 = (self.lambda_minus * t).exp();
        let v = Vector3::repeat(c1) + self.eigvecs[1] * (c2 * e2) + self.eigvecs[2] * (c3 * e3);
        [v[0], v[1], v[2]]
    }
}

/// Orthonormal basis of the complement of `(1, 1, 1)`.
fn complement_basis() -> (Vector3<f64>, Vector3<f64>) {
    let u1 = Vector3::new(FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2);
    let s6 = 6f64.sqrt();
    let u2 = Vector3::new(1.0 / s6, -2.0 / s6, 1.0 / s6);
    (u1, u2)
}

/// Relaxation eigenvalues and eigenvectors of the population block.
///
/// The stationary vector `(1,1,1)` is deflated exactly; the remaining 2×2
/// symmetric block is diagonalised with the slow eigenvalue taken from the
/// determinant `3[γ(Ω+ + Ω−) + Ω+Ω−]`, which keeps full relative precision
/// when `γ ≫ Ω±`.
pub fn relaxation_rates(r: &RateSet) -> PopulationSolution {
    let (g, op, om) = (r.gamma_small(), r.omega_plus(), r.omega_minus());
    let s = op + om;
    let a = -2.0 * g - 0.5 * s;
    let d = -1.5 * s;
    let b = 3f64.sqrt() * 0.5 * (om - op);

    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let radius = half.hypot(b);
    let fast = mean - radius;
    let det = 3.0 * (g * s + op * om);
    let slow = if fast < 0.0 { det / fast } else { 0.0 };

    let (u1, u2) = complement_basis();
    let vec_for = |lambda: f64| -> Vector2<f64> {
        let c1 = Vector2::new(b, lambda - a);
        let c2 = Vector2::new(lambda - d, b);
        let w = if c1.norm_squared() >= c2.norm_squared() { c1 } else { c2 };
        let n = w.norm();
        if n > 0.0 {
            w / n
        } else {
            Vector2::zeros()
        }
    };
    let (w_fast, w_slow) = if radius > 0.0 {
        let wf = vec_for(fast);
        (wf, Vector2::new(-wf[1], wf[0]))
    } else {
        (Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0))
    };
    let lift = |w: Vector2<f64>| u1 * w[0] + u2 * w[1];
    PopulationSolution {
        lambda_plus: fast,
        lambda_minus: slow,
        eigvecs: [Vector3::repeat(1.0 / 3f64.sqrt()), lift(w_fast), lift(w_slow)],
    }
}

/// The closed-form pair `(1/T1⁺, 1/T1⁻)` written with the radical
/// `γ² − γ(Ω+ + Ω−) − Ω+Ω− + Ω+² + Ω−²`.
pub fn relaxation_rates_closed_form(gamma: f64, omega_plus: f64, omega_minus: f64) -> (f64, f64) {
    let (g, p, m) = (gamma, omega_plus, omega_minus);
    let root = (g * g - g * (p + m) - p * m + p * p + m * m).max(0.0).sqrt();
    (g + p + m + root, g + p + m - root)
}

/// Equal-Ω special case `(2γ + Ω, 3Ω)`, valid on the branch `γ ≥ Ω`.
pub fn equal_omega_rates(gamma: f64, omega: f64) -> Result<(f64, f64)> {
    crate::error::ensure_non_negative("gamma", gamma)?;
    crate::error::ensure_non_negative("omega", omega)?;
    if gamma < omega {
        return Err(Error::param("gamma", format!("must be >= omega ({omega:e}) on this branch, got {gamma:e}")));
    }
    Ok((2.0 * gamma + omega, 3.0 * omega))
}

/// Tolerance on off-diagonal entries for a "diagonal" initial state.
const DIAGONAL_TOL: f64 = 1e-12;

/// Populations `(ρ++, ρ00, ρ−−)` on `t_grid` from a diagonal initial state.
pub fn population_dynamics(r: &RateSet, rho0: &DensityMatrix3, t_grid: &[f64]) -> Result<Vec<[f64; 3]>> {
    r.validate()?;
    if !rho0.is_diagonal(DIAGONAL_TOL) {
        return Err(Error::InvalidState("initial state must be diagonal".into()));
    }
    if (rho0.trace().re - 1.0).abs() > DIAGONAL_TOL {
        return Err(Error::InvalidState("initial state must have unit trace".into()));
    }
    let sol = relaxation_rates(r);
    let p0 = rho0.populations();
    Ok(t_grid.iter().map(|&t| if t == 0.0 { p0 } else { sol.populations(p0, t) }).collect())
}

/// Full 3×3 eigenvalues of the relaxation matrix, sorted ascending.
pub fn relaxation_eigenvalues_dense(r: &RateSet) -> [f64; 3] {
    let mut e: Vec<f64> = nalgebra::SymmetricEigen::new(relaxation_matrix(r)).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    [e[0], e[1], e[2]]
}
