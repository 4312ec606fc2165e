//! Interior Newtonian potential of a solid ellipsoid.
//!
//! Inside an ellipsoid with semi-axes `a` the potential `−(1/4π)∫ dy/|x−y|` is
//! the quadratic `c0 + Σ c_i x_i²` in body coordinates, where
//! `c_i = (a1a2a3/4) ∫_0^∞ ds / ((a_i² + s) Δ(s))`,
//! `c0 = −(a1a2a3/4) ∫_0^∞ ds / Δ(s)` and `Δ(s) = √∏(a_j² + s)`.
//! Both integrals are Carlson symmetric forms: `∫ ds/Δ = 2 R_F` and
//! `∫ ds/((a_i²+s)Δ) = (2/3) R_D(a_j², a_k², a_i²)`.

#[allow(unused_imports)]
use num_traits::Float;
use crate::error::{Error, Result};
use crate::fit::QuadraticForm;
use crate::linalg::{Mat3, Vec3};
use crate::shape::Ellipsoid;

/// Carlson's `R_F(x, y, z)` by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0025;
    const C1: f64 = 1.0 / 24.0;
    const C2: f64 = 0.1;
    const C3: f64 = 3.0 / 44.0;
    const C4: f64 = 1.0 / 14.0;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let (mut ave, mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (C1 * e2 - C2 - C3 * e3) * e2 + C4 * e3) / ave.sqrt()
}

/// Carlson's `R_D(x, y, z)` by duplication.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0015;
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let (mut ave, mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lam));
        fac *= 0.25;
        xt = 0.25 * (xt + lam);
        yt = 0.25 * (yt + lam);
        zt = 0.25 * (zt + lam);
        ave = 0.2 * (xt + yt + 3.0 * zt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac * (1.0 + ed * (-C1 + C5 * ed - C6 * dz * ee) + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (ave * ave.sqrt())
}

/// Body-frame coefficients of the interior potential `c0 + Σ c_i x_i²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FerrersCoefficients {
    pub c0: f64,
    pub c: Vec3,
}

fn check_axes(a: &Vec3) -> Result<()> {
    if !a.iter().all(|v| v.is_finite() && *v > 0.0) || a.min() < 1e-9 * a.max() {
        return Err(Error::InvalidShape("degenerate ellipsoid axes".into()));
    }
    Ok(())
}

pub fn ferrers_coefficients(a: &Vec3) -> Result<FerrersCoefficients> {
    check_axes(a)?;
    let a2 = a.component_mul(a);
    let v = a.product();
    let c = Vec3::new(
        v / 6.0 * carlson_rd(a2[1], a2[2], a2[0]),
        v / 6.0 * carlson_rd(a2[2], a2[0], a2[1]),
        v / 6.0 * carlson_rd(a2[0], a2[1], a2[2]),
    );
    Ok(FerrersCoefficients { c0: -0.5 * v * carlson_rf(a2[0], a2[1], a2[2]), c })
}

/// Adaptive Gauss–Kronrod (7/15) on `[lo, hi]`.
fn gauss_kronrod(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, depth: u32) -> f64 {
    const XK: [f64; 8] = [
        0.991455371120812639, 0.949107912342758525, 0.864864423359769073, 0.741531185599394440,
        0.586087235467691130, 0.405845151377397167, 0.207784955007898468, 0.0,
    ];
    const WK: [f64; 8] = [
        0.022935322010529225, 0.063092092629978553, 0.104790010322250184, 0.140653259715525919,
        0.169004726639267903, 0.190350578064785410, 0.204432940075298892, 0.209482141084727828,
    ];
    const WG: [f64; 4] = [0.129484966168869693, 0.279705391489276668, 0.381830050505118945, 0.417959183673469388];
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XK[i]) + f(c + h * XK[i]);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    let (k, g) = (k * h, g * h);
    if (k - g).abs() <= tol.max(1e-15 * k.abs()) || depth == 0 {
        k
    } else {
        gauss_kronrod(f, lo, c, 0.5 * tol, depth - 1) + gauss_kronrod(f, c, hi, 0.5 * tol, depth - 1)
    }
}

/// The same coefficients by direct quadrature of the defining integrals,
/// mapping `s ∈ [0, ∞)` to `u ∈ [0, 1)` through `s = a² (1/(1 − u)² − 1)`,
/// which keeps the `s^{-3/2}` tail of the constant term bounded at `u = 1`.
pub fn ferrers_coefficients_quadrature(a: &Vec3, tol: f64) -> Result<FerrersCoefficients> {
    check_axes(a)?;
    let a2 = a.component_mul(a);
    let v = a.product();
    let sc = a2.max();
    let delta = |s: f64| ((a2[0] + s) * (a2[1] + s) * (a2[2] + s)).sqrt();
    let integrate = |weight: &dyn Fn(f64) -> f64| {
        let f = |u: f64| {
            if u >= 1.0 {
                return 0.0;
            }
            let w = 1.0 / (1.0 - u);
            let s = sc * (w * w - 1.0);
            let ds = 2.0 * sc * w * w * w;
            weight(s) / delta(s) * ds
        };
        gauss_kronrod(&f, 0.0, 1.0, tol, 20)
    };
    let c0 = -0.25 * v * integrate(&|_| 1.0);
    let mut c = Vec3::zeros();
    for i in 0..3 {
        c[i] = 0.25 * v * integrate(&|s| 1.0 / (a2[i] + s));
    }
    Ok(FerrersCoefficients { c0, c })
}

/// Interior Newtonian potential of `e` as a world-frame quadratic form.
pub fn newtonian_ellipsoid(e: &Ellipsoid) -> Result<QuadraticForm> {
    let f = ferrers_coefficients(&e.semi_axes)?;
    let r = e.rotation;
    let a: Mat3 = r * Mat3::from_diagonal(&f.c) * r.transpose();
    let m = e.center;
    Ok(QuadraticForm::exact(f.c0 + m.dot(&(a * m)), -(a * m) * 2.0, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rotation_from_euler_deg;
    use proptest::prelude::*;

    #[test]
    fn carlson_reference_values() {
        // R_F(1,2,0) = Γ(1/4)² / (4√(2π)), R_D(0,2,1) = 3 Γ(3/4)² / √(2π) ... tabulated values
        assert!((carlson_rf(1.0, 2.0, 0.0) - 1.3110287771461).abs() < 1e-12);
        assert!((carlson_rd(0.0, 2.0, 1.0) - 1.7972103521034).abs() < 1e-12);
        assert!((carlson_rf(1.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((carlson_rd(1.0, 1.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ball_coefficients() {
        let f = ferrers_coefficients(&Vec3::repeat(1.0)).unwrap();
        assert!((f.c0 + 0.5).abs() < 1e-15);
        for i in 0..3 {
            assert!((f.c[i] - 1.0 / 6.0).abs() < 1e-15);
        }
        let q = newtonian_ellipsoid(&Ellipsoid::ball(Vec3::zeros(), 1.0).unwrap()).unwrap();
        assert!((q.eval(&Vec3::new(0.5, 0.0, 0.0)) + 0.4583333333333333).abs() < 1e-14);
    }

    #[test]
    fn quadrature_cross_check() {
        for a in [Vec3::new(1.0, 0.7, 0.4), Vec3::new(3.0, 0.2, 0.9), Vec3::new(0.05, 1.0, 1.0)] {
            let f = ferrers_coefficients(&a).unwrap();
            let g = ferrers_coefficients_quadrature(&a, 1e-13).unwrap();
            assert!((f.c0 - g.c0).abs() < 1e-10 * f.c0.abs(), "{a:?}");
            assert!((f.c - g.c).amax() < 1e-10, "{a:?}: {:?} {:?}", f.c, g.c);
        }
    }

    #[test]
    fn degenerate_rejected() {
        assert!(ferrers_coefficients(&Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn translated_rotated_form() {
        let e = Ellipsoid::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 0.7, 0.4), rotation_from_euler_deg([20.0, 30.0, 40.0])).unwrap();
        let q = newtonian_ellipsoid(&e).unwrap();
        let f = ferrers_coefficients(&e.semi_axes).unwrap();
        let body = Vec3::new(0.3, -0.2, 0.1);
        let x = e.center + e.rotation * body;
        let want = f.c0 + (0..3).map(|i| f.c[i] * body[i] * body[i]).sum::<f64>();
        assert!((q.eval(&x) - want).abs() < 1e-13);
        assert!(q.gradient(&e.center).norm() < 1e-13);
    }

    proptest! {
        #[test]
        fn laplacian_is_one(a in prop::array::uniform3(0.01f64..10.0)) {
            let f = ferrers_coefficients(&Vec3::from(a)).unwrap();
            prop_assert!((2.0 * f.c.sum() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn scale_invariance(a in prop::array::uniform3(0.05f64..5.0), t in 0.1f64..10.0) {
            let a = Vec3::from(a);
            let f = ferrers_coefficients(&a).unwrap();
            let g = ferrers_coefficients(&(a * t)).unwrap();
            prop_assert!((f.c - g.c).amax() < 1e-12);
            prop_assert!((g.c0 - t * t * f.c0).abs() < 1e-12 * g.c0.abs());
        }
    }
}
