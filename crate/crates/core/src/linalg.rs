//! Small fixed-size linear algebra on top of `nalgebra`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::SymmetricEigen;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

#[inline]
pub fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Largest absolute entry of `m - mᵀ`.
pub fn asymmetry(m: &Mat3) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order. The returned frame has orthonormal columns and
/// determinant +1; each column is signed so that its largest-magnitude
/// component is positive (the last column is flipped instead when needed to
/// fix the determinant).
pub fn sym_eigen_desc(m: &Mat3) -> (Vec3, Mat3) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut values = Vec3::zeros();
    let mut frame = Mat3::zeros();
    for (col, &src) in order.iter().enumerate() {
        values[col] = eig.eigenvalues[src];
        let mut v: Vec3 = eig.eigenvectors.column(src).into_owned();
        v /= v.norm();
        let lead = (0..3)
            .max_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap())
            .unwrap();
        if v[lead] < 0.0 {
            v = -v;
        }
        frame.set_column(col, &v);
    }
    if frame.determinant() < 0.0 {
        let c: Vec3 = -frame.column(2).into_owned();
        frame.set_column(2, &c);
    }
    (values, frame)
}

/// Rotation built from angles in degrees applied as `Rz(a[0]) · Ry(a[1]) · Rx(a[2])`.
pub fn rotation_from_euler_deg(angles: [f64; 3]) -> Mat3 {
    let [z, y, x] = angles.map(|a| a.to_radians());
    let rz = Mat3::new(z.cos(), -z.sin(), 0.0, z.sin(), z.cos(), 0.0, 0.0, 0.0, 1.0);
    let ry = Mat3::new(y.cos(), 0.0, y.sin(), 0.0, 1.0, 0.0, -y.sin(), 0.0, y.cos());
    let rx = Mat3::new(1.0, 0.0, 0.0, 0.0, x.cos(), -x.sin(), 0.0, x.sin(), x.cos());
    rz * ry * rx
}

/// True when `r` is orthonormal with determinant +1 within `tol`.
pub fn is_rotation(r: &Mat3, tol: f64) -> bool {
    let e = r.transpose() * r - Mat3::identity();
    max_abs(&e) <= tol && (r.determinant() - 1.0).abs() <= tol
}

/// Deterministic low-discrepancy unit vectors (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = core::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// The 26 lattice directions of a 3×3×3 neighbourhood, normalized.
pub fn neighbour_directions() -> Vec<Vec3> {
    let mut out = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                out.push(Vec3::new(i as f64, j as f64, k as f64).normalize());
            }
        }
    }
    out
}
