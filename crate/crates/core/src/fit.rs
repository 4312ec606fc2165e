//! Least-squares quadratic forms `c0 + b·x + x·A·x`.

#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use nalgebra::{DMatrix, DVector};

/// `value = c0 + b·x + x·A·x`; the Hessian of the form is `2A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub c0: f64,
    pub b: Vec3,
    pub a: Mat3,
    /// RMS residual over the fitted samples, divided by the sample standard deviation.
    pub fit_rms: f64,
    /// Largest absolute residual, same normalization.
    pub fit_max: f64,
    /// Condition number of the (normalized) design matrix; 1 for exact forms.
    pub condition: f64,
}

impl QuadraticForm {
    pub fn exact(c0: f64, b: Vec3, a: Mat3) -> Self {
        Self { c0, b, a: (a + a.transpose()) * 0.5, fit_rms: 0.0, fit_max: 0.0, condition: 1.0 }
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.c0 + self.b.dot(x) + x.dot(&(self.a * x))
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        self.b + self.a * x * 2.0
    }

    pub fn hessian(&self) -> Mat3 {
        self.a * 2.0
    }

    pub fn laplacian(&self) -> f64 {
        2.0 * self.a.trace()
    }
}

const MIN_SAMPLES: usize = 10;

fn basis(u: &Vec3) -> [f64; 10] {
    [1.0, u[0], u[1], u[2], u[0] * u[0], u[1] * u[1], u[2] * u[2], u[0] * u[1], u[0] * u[2], u[1] * u[2]]
}

/// Fits `c0 + b·x + x·A·x` to `(point, value)` samples.
///
/// Coordinates are centered and scaled before building the design matrix so
/// the reported condition number reflects sample geometry rather than units.
pub fn quadratic_fit(points: &[Vec3], values: &[f64]) -> Result<QuadraticForm> {
    let n = points.len();
    if n != values.len() {
        return Err(Error::Precondition("points and values differ in length".into()));
    }
    if n < MIN_SAMPLES {
        return Err(Error::Precondition(alloc::format!("quadratic fit needs at least {MIN_SAMPLES} samples, got {n}")));
    }
    let mean = points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n as f64;
    let scale = points.iter().map(|p| (p - mean).amax()).fold(0.0f64, f64::max);
    if !(scale > 0.0) {
        return Err(Error::RankDeficient(f64::INFINITY));
    }
    let mut design = DMatrix::<f64>::zeros(n, 10);
    for (r, p) in points.iter().enumerate() {
        let row = basis(&((p - mean) / scale));
        for (c, v) in row.iter().enumerate() {
            design[(r, c)] = *v;
        }
    }
    let rhs = DVector::from_column_slice(values);
    let sv = design.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition < 1e12) {
        return Err(Error::RankDeficient(condition));
    }
    // Householder least squares: R c = Qᵀ y
    let qr = design.clone().qr();
    let qty = qr.q().transpose() * &rhs;
    let coef = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient(condition))?;
    let resid = &design * &coef - &rhs;

    let vmean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - vmean) * (v - vmean)).sum::<f64>() / n as f64;
    let vmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let denom = var.sqrt().max(f64::EPSILON * vmax).max(f64::MIN_POSITIVE);
    let rms = (resid.norm_squared() / n as f64).sqrt() / denom;
    let max = resid.amax() / denom;

    // back to physical coordinates: u = (x − m)/s
    let g = Mat3::new(
        coef[4], 0.5 * coef[7], 0.5 * coef[8],
        0.5 * coef[7], coef[5], 0.5 * coef[9],
        0.5 * coef[8], 0.5 * coef[9], coef[6],
    );
    let e = Vec3::new(coef[1], coef[2], coef[3]);
    let s2 = scale * scale;
    let a = g / s2;
    let b = e / scale - a * mean * 2.0;
    let c0 = coef[0] - e.dot(&mean) / scale + mean.dot(&(a * mean));
    Ok(QuadraticForm { c0, b, a, fit_rms: rms, fit_max: max, condition })
}
