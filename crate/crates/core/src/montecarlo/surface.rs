// SPDX-License-Identifier: Apache-2.0

//! Deterministic finite-patch variance: `n ∫∫ ⟨g²⟩ dx dy` over the square.

use super::ensemble::{mean_square_response, FieldFrame, Source};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::noise::SurfaceGeometry;
use crate::quadrature::{integrate_sinh, QuadOptions};

/// Per-axis variance from a uniform density `n_areal` of `source` filling
/// the `side × side` patch above the defect.
pub fn variance_surface_integral(source: &Source, n_areal: f64, geom: &SurfaceGeometry, side: f64) -> Result<[f64; 3]> {
    ensure_non_negative("n_areal", n_areal)?;
    ensure_positive("side", side)?;
    let frame = FieldFrame::new(geom);
    let z = geom.z_def();
    let h = 0.5 * side;
    let inner_opts = QuadOptions { rel_tol: 1e-11, max_intervals: 4000, ..Default::default() };
    let outer_opts = QuadOptions { rel_tol: 1e-9, max_intervals: 4000, ..Default::default() };
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut failure: Option<Error> = None;
        let outer = integrate_sinh(
            |x| {
                let scale = (x * x + z * z).sqrt();
                match integrate_sinh(|y| mean_square_response(source, &frame, x, y)[k], -h, h, scale, inner_opts) {
                    Ok(r) => r.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            -h,
            h,
            z,
            outer_opts,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        *slot = n_areal * outer?.value;
    }
    Ok(out)
}
