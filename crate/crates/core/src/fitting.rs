// SPDX-License-Identifier: Apache-2.0

//! Power-law fits `T2 = A·z^n` of coherence time against depth, in log space.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One measurement, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPoint {
    pub z: f64,
    pub t2: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthDataset {
    points: Vec<DepthPoint>,
}

impl DepthDataset {
    /// Requires `z > 0`, `T2 > 0`, and uncertainties on all points or none.
    pub fn new(points: Vec<DepthPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateData("empty dataset".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.z > 0.0 && p.z.is_finite()) || !(p.t2 > 0.0 && p.t2.is_finite()) {
                return Err(Error::DegenerateData(format!("point {i}: z and T2 must be finite and > 0")));
            }
            if let Some(s) = p.sigma {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::DegenerateData(format!("point {i}: sigma must be finite and > 0")));
                }
            }
        }
        let with_sigma = points.iter().filter(|p| p.sigma.is_some()).count();
        if with_sigma != 0 && with_sigma != points.len() {
            return Err(Error::DegenerateData("sigma must be given for every point or for none".into()));
        }
        Ok(DepthDataset { points })
    }

    /// Parses `z_nm,T2_us[,sigma_us]` CSV. Blank lines and `#` comments are
    /// skipped; the header row is mandatory.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut header: Option<bool> = None;
        let mut points = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let Some(has_sigma) = header else {
                header = Some(match cols.as_slice() {
                    ["z_nm", "T2_us"] => false,
                    ["z_nm", "T2_us", "sigma_us"] => true,
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: format!("expected header `z_nm,T2_us[,sigma_us]`, got `{line}`"),
                        })
                    }
                });
                continue;
            };
            let want = if has_sigma { 3 } else { 2 };
            if cols.len() != want {
                return Err(Error::Parse { line: line_no, reason: format!("expected {want} columns, got {}", cols.len()) });
            }
            let num = |s: &str, name: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse { line: line_no, reason: format!("{name}: cannot parse `{s}`") })
            };
            let z = num(cols[0], "z_nm")? * 1e-9;
            let t2 = num(cols[1], "T2_us")? * 1e-6;
            let sigma = if has_sigma { Some(num(cols[2], "sigma_us")? * 1e-6) } else { None };
            if !(z > 0.0) || !(t2 > 0.0) || sigma.is_some_and(|s| !(s > 0.0)) {
                return Err(Error::Parse { line: line_no, reason: "values must be positive".into() });
            }
            points.push(DepthPoint { z, t2, sigma });
        }
        if header.is_none() {
            return Err(Error::Parse { line: 0, reason: "missing header".into() });
        }
        DepthDataset::new(points)
    }

    pub fn points(&self) -> &[DepthPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Multiplies every depth by `z_scale` and every time (and sigma) by
    /// `t_scale`.
    pub fn scaled(&self, z_scale: f64, t_scale: f64) -> Result<Self> {
        DepthDataset::new(
            self.points
                .iter()
                .map(|p| DepthPoint { z: p.z * z_scale, t2: p.t2 * t_scale, sigma: p.sigma.map(|s| s * t_scale) })
                .collect(),
        )
    }

    fn has_sigma(&self) -> bool {
        self.points[0].sigma.is_some()
    }

    /// Log-space weights `(T2/σ)²`, or 1.
    fn weights(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma.map_or(1.0, |s| (p.t2 / s).powi(2))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub exponent: Exponent,
    /// Adds a depth-independent rate: `1/T2 = Γ0 + z^{−n}/A`.
    pub constant_rate: bool,
}

impl FitOptions {
    pub fn fixed(n: f64) -> Self {
        FitOptions { exponent: Exponent::Fixed(n), constant_rate: false }
    }

    pub fn free() -> Self {
        FitOptions { exponent: Exponent::Free, constant_rate: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// `A` in `T2 = A·z^n` (s·m⁻ⁿ).
    pub amplitude: f64,
    pub exponent: f64,
    /// Weighted RMS of the log-space misfit.
    pub residual: f64,
    /// Covariance of `(ln A, n)`; `None` without spare degrees of freedom.
    pub covariance: Option<[[f64; 2]; 2]>,
    /// Fitted `Γ0` (1/s) when the constant-rate term is enabled.
    pub constant_rate: Option<f64>,
}

impl PowerLawFit {
    pub fn predict(&self, z: f64) -> f64 {
        let base = 1.0 / (self.amplitude * z.powf(self.exponent));
        1.0 / (base + self.constant_rate.unwrap_or(0.0))
    }
}

pub fn fit_power_law(data: &DepthDataset, opts: FitOptions) -> Result<PowerLawFit> {
    if opts.constant_rate {
        return fit_with_offset(data, opts.exponent);
    }
    let w = data.weights();
    let x: Vec<f64> = data.points.iter().map(|p| p.z.ln()).collect();
    let y: Vec<f64> = data.points.iter().map(|p| p.t2.ln()).collect();
    let sw: f64 = w.iter().sum();
    let (ln_a, n, p) = match opts.exponent {
        Exponent::Fixed(n) => {
            if !n.is_finite() {
                return Err(Error::param("exponent", "must be finite"));
            }
            let ln_a = w.iter().zip(&x).zip(&y).map(|((w, x), y)| w * (y - n * x)).sum::<f64>() / sw;
            (ln_a, n, 1)
        }
        Exponent::Free => {
            if data.len() < 3 {
                return Err(Error::DegenerateData("a free exponent needs at least 3 points".into()));
            }
            let mx = w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() / sw;
            let my = w.iter().zip(&y).map(|(w, y)| w * y).sum::<f64>() / sw;
            let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * (x - mx).powi(2)).sum();
            let sxy: f64 = w.iter().zip(&x).zip(&y).map(|((w, x), y)| w * (x - mx) * (y - my)).sum();
            if sxx <= 1e-24 * sw * (1.0 + mx * mx) {
                return Err(Error::DegenerateData("all depths are equal".into()));
            }
            let n = sxy / sxx;
            (my - n * mx, n, 2)
        }
    };
    let rss: f64 = w.iter().zip(&x).zip(&y).map(|((w, x), y)| w * (y - ln_a - n * x).powi(2)).sum();
    let residual = (rss / sw).sqrt();
    let dof = data.len().saturating_sub(p);
    let scale = if data.has_sigma() { Some(1.0) } else if dof > 0 { Some(rss / dof as f64) } else { None };
    let covariance = scale.map(|s| match opts.exponent {
        Exponent::Fixed(_) => [[s / sw, 0.0], [0.0, 0.0]],
        Exponent::Free => {
            let sx: f64 = w.iter().zip(&x).map(|(w, x)| w * x).sum();
            let sxx: f64 = w.iter().zip(&x).map(|(w, x)| w * x * x).sum();
            let det = sw * sxx - sx * sx;
            [[s * sxx / det, -s * sx / det], [-s * sx / det, s * sw / det]]
        }
    });
    Ok(PowerLawFit { amplitude: ln_a.exp(), exponent: n, residual, covariance, constant_rate: None })
}

/// Levenberg–Marquardt on `r_i = ln T2_i + ln(Γ0 + B z_i^{−n})` over
/// `(ln B, ln Γ0[, n])`.
fn fit_with_offset(data: &DepthDataset, exponent: Exponent) -> Result<PowerLawFit> {
    let start = fit_power_law(data, FitOptions { exponent, constant_rate: false })?;
    let free = matches!(exponent, Exponent::Free);
    let np = if free { 3 } else { 2 };
    if data.len() < np {
        return Err(Error::DegenerateData(format!("the constant-rate fit needs at least {np} points")));
    }
    let w = data.weights();
    let sw: f64 = w.iter().sum();
    let min_rate = data.points.iter().map(|p| 1.0 / p.t2).fold(f64::INFINITY, f64::min);
    let mut p = vec![-start.amplitude.ln(), (0.1 * min_rate).ln(), start.exponent];

    let eval = |p: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let (b, g0, n) = (p[0].exp(), p[1].exp(), p[2]);
        let m = data.len();
        let mut r = DVector::zeros(m);
        let mut j = DMatrix::zeros(m, np);
        for (i, pt) in data.points.iter().enumerate() {
            let sq = w[i].sqrt();
            let bz = b * pt.z.powf(-n);
            let d = g0 + bz;
            r[i] = sq * (pt.t2.ln() + d.ln());
            j[(i, 0)] = sq * bz / d;
            j[(i, 1)] = sq * g0 / d;
            if free {
                j[(i, 2)] = -sq * bz * pt.z.ln() / d;
            }
        }
        (r, j)
    };
    let cost = |r: &DVector<f64>| r.norm_squared();
    let (mut r, mut j) = eval(&p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * &r;
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..np {
                a[(k, k)] += lambda * (jtj[(k, k)].abs() + 1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p.clone();
            for k in 0..np {
                trial[k] += step[k];
            }
            // keep ln Γ0 from running off to -inf
            trial[1] = trial[1].max(min_rate.ln() - 60.0);
            let (rt, jt2) = eval(&trial);
            if cost(&rt) < cost(&r) {
                let improvement = cost(&r) - cost(&rt);
                p = trial;
                r = rt;
                j = jt2;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                if improvement <= 1e-15 * (1.0 + cost(&r)) {
                    lambda = 1e12;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || lambda >= 1e12 {
            break;
        }
    }
    let rss = cost(&r);
    let dof = data.len().saturating_sub(np);
    let scale = if data.has_sigma() { Some(1.0) } else if dof > 0 { Some(rss / dof as f64) } else { None };
    let covariance = scale.and_then(|s| {
        let inv = (j.transpose() * &j).try_inverse()?;
        // ln A = −ln B
        let n_var = if free { inv[(2, 2)] } else { 0.0 };
        let cross = if free { -inv[(0, 2)] } else { 0.0 };
        Some([[s * inv[(0, 0)], s * cross], [s * cross, s * n_var]])
    });
    let n = if free { p[2] } else { start.exponent };
    Ok(PowerLawFit {
        amplitude: (-p[0]).exp(),
        exponent: n,
        residual: (rss / sw).sqrt(),
        covariance,
        constant_rate: Some(p[1].exp()),
    })
}

/// Residual ratio below which neither scaling is preferred.
pub const TIE_RATIO: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSelection {
    /// 2 (point-like) or 4 (dipole); `None` when inconclusive.
    pub preferred: Option<u32>,
    pub residual_2: f64,
    pub residual_4: f64,
    /// `max(residual) / min(residual)`.
    pub ratio: f64,
}

impl ModelSelection {
    pub fn is_inconclusive(&self) -> bool {
        self.preferred.is_none()
    }
}

/// Compares fixed-exponent fits with `n = 2` and `n = 4`.
pub fn model_select(data: &DepthDataset) -> Result<ModelSelection> {
    model_select_with(data, false)
}

pub fn model_select_with(data: &DepthDataset, constant_rate: bool) -> Result<ModelSelection> {
    let r2 = fit_power_law(data, FitOptions { exponent: Exponent::Fixed(2.0), constant_rate })?.residual;
    let r4 = fit_power_law(data, FitOptions { exponent: Exponent::Fixed(4.0), constant_rate })?.residual;
    let (lo, hi) = (r2.min(r4), r2.max(r4));
    let ratio = if hi == 0.0 { 1.0 } else { hi / lo };
    let preferred = if ratio <= TIE_RATIO {
        None
    } else if r2 < r4 {
        Some(2)
    } else {
        Some(4)
    };
    Ok(ModelSelection { preferred, residual_2: r2, residual_4: r4, ratio })
}
