//! Recovering ellipsoid axis ratios from the Hessian of an interior potential.

use crate::error::{Error, Result};
use crate::ferrers::ferrers_coefficients;
use crate::linalg::{sym_eigen_desc, Mat3, Vec3};
use crate::shape::Ellipsoid;
#[allow(unused_imports)]
use num_traits::Float;

/// Admissible range of each semi-axis ratio relative to the first axis.
pub const RATIO_BOUNDS: (f64, f64) = (1e-3, 1e3);

/// `2 c_i` for axes `(1, e^x, e^y)`.
fn doubled_coefficients(x: f64, y: f64) -> Result<Vec3> {
    Ok(ferrers_coefficients(&Vec3::new(1.0, x.exp(), y.exp()))?.c * 2.0)
}

/// Allowed deviation of the measured Hessian trace from one.
pub const TRACE_TOL: f64 = 2e-2;

/// Ellipsoid whose interior Newtonian potential has Hessian `h`.
///
/// `h` must be symmetric positive definite with unit trace (within `2e-2`);
/// it is renormalized to trace exactly one before solving. Axis ratios are
/// found by Newton iteration on the log-ratios `(ln a2/a1, ln a3/a1)`; the
/// returned ellipsoid is centered at `center`, its principal frame is that of
/// `h` ordered from the longest to the shortest axis, and its longest semi-axis
/// equals `scale`.
pub fn ellipsoid_from_hessian(h: &Mat3, center: Vec3, scale: f64) -> Result<Ellipsoid> {
    if !(scale > 0.0) {
        return Err(Error::Precondition("scale must be positive".into()));
    }
    let sym = (h + h.transpose()) * 0.5;
    let tr = sym.trace();
    if !((tr - 1.0).abs() < TRACE_TOL) {
        return Err(Error::Precondition(alloc::format!("Hessian trace {tr:.6} is not 1 within {TRACE_TOL:e}")));
    }
    let (vals, frame) = sym_eigen_desc(&(sym / tr));
    if !(vals[2] > 0.0) {
        return Err(Error::Precondition("Hessian is not positive definite".into()));
    }
    // Ascending eigenvalues ↔ descending semi-axes.
    let target = Vec3::new(vals[2], vals[1], vals[0]);
    let mut rot = Mat3::from_columns(&[frame.column(2).into_owned(), frame.column(1).into_owned(), frame.column(0).into_owned()]);
    if rot.determinant() < 0.0 {
        let c: Vec3 = -rot.column(2).into_owned();
        rot.set_column(2, &c);
    }

    let residual = |x: f64, y: f64| -> Result<(f64, f64)> {
        let c = doubled_coefficients(x, y)?;
        Ok((c[0] - target[0], c[1] - target[1]))
    };
    let bound = RATIO_BOUNDS.1.ln();
    // Semi-axes scale roughly like the inverse square root of the curvature.
    let mut x = (0.5 * (target[0] / target[1]).ln()).clamp(-bound, bound);
    let mut y = (0.5 * (target[0] / target[2]).ln()).clamp(-bound, bound);
    let mut r = residual(x, y)?;
    let norm = |r: (f64, f64)| r.0.hypot(r.1);
    for _ in 0..200 {
        if norm(r) < 1e-14 {
            break;
        }
        let step = 1e-7;
        let rx = residual(x + step, y)?;
        let ry = residual(x, y + step)?;
        let j = [[(rx.0 - r.0) / step, (ry.0 - r.0) / step], [(rx.1 - r.1) / step, (ry.1 - r.1) / step]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = -(j[1][1] * r.0 - j[0][1] * r.1) / det;
        let dy = -(-j[1][0] * r.0 + j[0][0] * r.1) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let (nx, ny) = ((x + lambda * dx).clamp(-bound, bound), (y + lambda * dy).clamp(-bound, bound));
            let nr = residual(nx, ny)?;
            if norm(nr) < norm(r) {
                x = nx;
                y = ny;
                r = nr;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !(norm(r) < 1e-9) {
        return Err(Error::NoRoot(alloc::format!(
            "no semi-axis ratios within [{:e}, {:e}] reproduce Hessian eigenvalues {:?} (residual {:e})",
            RATIO_BOUNDS.0,
            RATIO_BOUNDS.1,
            target.as_slice(),
            norm(r)
        )));
    }
    let axes = Vec3::new(1.0, x.exp(), y.exp());
    let axes = axes * (scale / axes.max());
    Ellipsoid::new(center, axes, rot)
}
