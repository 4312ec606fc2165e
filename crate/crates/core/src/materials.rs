//! Isotropic elastic constants, eigenstress classification and the scalar
//! material constants of the two-identical-eigenvalue reduction.

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;
use crate::linalg::{asymmetry, kron, max_abs, sym_eigen_desc, Mat3, Vec3};

/// Lamé constants of an isotropic medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameMaterial {
    pub lambda: f64,
    pub mu: f64,
}

impl LameMaterial {
    /// Builds an admissible material (`mu > 0`, `3 lambda + 2 mu > 0`).
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let m = Self { lambda, mu };
        m.check()?;
        Ok(m)
    }

    /// Constructs without validation; use [`LameMaterial::check`] before use.
    pub const fn unchecked(lambda: f64, mu: f64) -> Self {
        Self { lambda, mu }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.mu.is_finite()) {
            return Err(Error::InadmissibleMaterial("finite lambda, mu"));
        }
        if self.mu <= 0.0 {
            return Err(Error::InadmissibleMaterial("mu > 0"));
        }
        if 3.0 * self.lambda + 2.0 * self.mu <= 0.0 {
            return Err(Error::InadmissibleMaterial("3*lambda + 2*mu > 0"));
        }
        Ok(())
    }

    pub fn is_admissible(&self) -> bool {
        self.check().is_ok()
    }

    /// `C : eps` for a symmetric strain.
    pub fn stress_from_strain(&self, eps: &Mat3) -> Mat3 {
        Mat3::identity() * (self.lambda * eps.trace()) + eps * (2.0 * self.mu)
    }
}

/// Rank-four elastic stiffness `C_ijkl`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stiffness4 {
    pub c: [[[[f64; 3]; 3]; 3]; 3],
}

impl Stiffness4 {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.c[i][j][k][l]
    }

    /// Components in a frame rotated by `r`: `C'_ijkl = R_ia R_jb R_kc R_ld C_abcd`.
    pub fn rotated(&self, r: &Mat3) -> Stiffness4 {
        let mut out = [[[[0.0; 3]; 3]; 3]; 3];
        for (i, oi) in out.iter_mut().enumerate() {
            for (j, oj) in oi.iter_mut().enumerate() {
                for (k, ok) in oj.iter_mut().enumerate() {
                    for (l, ol) in ok.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for a in 0..3 {
                            for b in 0..3 {
                                for c in 0..3 {
                                    for d in 0..3 {
                                        s += r[(i, a)] * r[(j, b)] * r[(k, c)] * r[(l, d)] * self.c[a][b][c][d];
                                    }
                                }
                            }
                        }
                        *ol = s;
                    }
                }
            }
        }
        Stiffness4 { c: out }
    }

    pub fn max_abs_diff(&self, other: &Stiffness4) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        worst = worst.max((self.c[i][j][k][l] - other.c[i][j][k][l]).abs());
                    }
                }
            }
        }
        worst
    }

    /// Acoustic tensor `A_qm = C_qlmn xi_l xi_n`.
    pub fn acoustic(&self, xi: &Vec3) -> Mat3 {
        let mut a = Mat3::zeros();
        for q in 0..3 {
            for m in 0..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    for n in 0..3 {
                        s += self.c[q][l][m][n] * xi[l] * xi[n];
                    }
                }
                a[(q, m)] = s;
            }
        }
        a
    }
}

/// `C_ijkl = lambda δ_ij δ_kl + mu (δ_ik δ_jl + δ_il δ_jk)`.
pub fn make_isotropic_stiffness(material: &LameMaterial) -> Result<Stiffness4> {
    material.check()?;
    let (lam, mu) = (material.lambda, material.mu);
    let mut c = [[[[0.0; 3]; 3]; 3]; 3];
    for (i, ci) in c.iter_mut().enumerate() {
        for (j, cj) in ci.iter_mut().enumerate() {
            for (k, ck) in cj.iter_mut().enumerate() {
                for (l, cl) in ck.iter_mut().enumerate() {
                    *cl = lam * kron(i, j) * kron(k, l)
                        + mu * (kron(i, k) * kron(j, l) + kron(i, l) * kron(j, k));
                }
            }
        }
    }
    Ok(Stiffness4 { c })
}

/// Inverse of the isotropic acoustic tensor:
/// `L_pq = δ_pq/(mu|xi|²) − (mu+lambda) xi_p xi_q / (mu (2mu+lambda) |xi|⁴)`.
pub fn acoustic_inverse(material: &LameMaterial, xi: &Vec3) -> Result<Mat3> {
    material.check()?;
    let xi2 = xi.norm_squared();
    if !(xi2 > 0.0) {
        return Err(Error::ZeroWaveVector);
    }
    Ok(acoustic_inverse_unchecked(material.lambda, material.mu, xi))
}

#[inline]
pub(crate) fn acoustic_inverse_unchecked(lambda: f64, mu: f64, xi: &Vec3) -> Mat3 {
    let xi2 = xi.norm_squared();
    let a = 1.0 / (mu * xi2);
    let b = (mu + lambda) / (mu * (2.0 * mu + lambda) * xi2 * xi2);
    Mat3::identity() * a - xi * xi.transpose() * b
}

/// Spectral class of a symmetric eigenstress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralClass {
    AllEqual(f64),
    /// `k1` is the repeated eigenvalue, `k3` the distinct one (stored on axis 3).
    TwoEqual { k1: f64, k3: f64 },
    /// Principal values in descending order.
    AllDistinct(f64, f64, f64),
}

/// A classified uniform eigenstress.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenstress {
    pub tensor: Mat3,
    /// Principal values in descending order.
    pub principal_values: [f64; 3],
    /// Columns are principal directions. For `TwoEqual` the distinct direction is column 3.
    pub principal_frame: Mat3,
    pub spectral_class: SpectralClass,
}

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0f64.max(a.abs()).max(b.abs())
}

/// Principal decomposition and spectral class of a symmetric 3×3 tensor.
pub fn classify_eigenstress(sigma: &Mat3, rel_tol: f64) -> Result<Eigenstress> {
    let asym = asymmetry(sigma);
    if asym > 1e-12 * 1.0f64.max(max_abs(sigma)) {
        return Err(Error::NotSymmetric(asym));
    }
    let (vals, frame) = sym_eigen_desc(sigma);
    let k = [vals[0], vals[1], vals[2]];
    let e12 = close(k[0], k[1], rel_tol);
    let e23 = close(k[1], k[2], rel_tol);
    let e13 = close(k[0], k[2], rel_tol);
    let (class, frame) = if e12 && e23 || e13 {
        (SpectralClass::AllEqual((k[0] + k[1] + k[2]) / 3.0), Mat3::identity())
    } else if e12 {
        let distinct: Vec3 = frame.column(2).into_owned();
        (
            SpectralClass::TwoEqual { k1: 0.5 * (k[0] + k[1]), k3: k[2] },
            frame_with_third_axis(&distinct),
        )
    } else if e23 {
        let distinct: Vec3 = frame.column(0).into_owned();
        (
            SpectralClass::TwoEqual { k1: 0.5 * (k[1] + k[2]), k3: k[0] },
            frame_with_third_axis(&distinct),
        )
    } else {
        (SpectralClass::AllDistinct(k[0], k[1], k[2]), frame)
    };
    Ok(Eigenstress { tensor: *sigma, principal_values: k, principal_frame: frame, spectral_class: class })
}

/// Right-handed frame whose third column is `axis`; the first two columns are
/// Gram–Schmidt completions against the fixed reference axis least aligned
/// with `axis`.
fn frame_with_third_axis(axis: &Vec3) -> Mat3 {
    let e3 = axis.normalize();
    let reference = (0..3)
        .min_by(|&a, &b| e3[a].abs().partial_cmp(&e3[b].abs()).unwrap())
        .map(|i| {
            let mut v = Vec3::zeros();
            v[i] = 1.0;
            v
        })
        .unwrap();
    let e1 = (reference - e3 * e3.dot(&reference)).normalize();
    let e2 = e3.cross(&e1);
    Mat3::from_columns(&[e1, e2, e3])
}

impl Eigenstress {
    pub fn from_principal(k: [f64; 3]) -> Result<Self> {
        classify_eigenstress(&Mat3::from_diagonal(&Vec3::new(k[0], k[1], k[2])), DEFAULT_CLASSIFY_TOL)
    }

    /// `(k1, k3)` for the two-identical-eigenvalue class.
    pub fn two_equal(&self) -> Option<(f64, f64)> {
        match self.spectral_class {
            SpectralClass::TwoEqual { k1, k3 } => Some((k1, k3)),
            _ => None,
        }
    }
}

/// The constants `alpha, beta` (N / ∂²H reduction) and `gamma, eta`
/// (N / Ñ reduction) of the two-identical-eigenvalue case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl MaterialConstants {
    /// `(gamma, eta)` obtained by substituting `∂²H/∂x3² = (N − Ñ)/2` into the
    /// `alpha, beta` combinations and rescaling so that Ñ has unit weight:
    /// `(−(2 alpha + 1), −(2 beta + 1))`. Kept alongside the tabulated values so
    /// the two routes can be compared.
    pub fn gamma_eta_via_alpha_beta(&self) -> (f64, f64) {
        (-(2.0 * self.alpha + 1.0), -(2.0 * self.beta + 1.0))
    }
}

pub fn material_constants(material: &LameMaterial, k1: f64, k3: f64) -> Result<MaterialConstants> {
    material.check()?;
    if k1 == k3 {
        return Err(Error::CoincidentEigenvalues);
    }
    let (lam, mu) = (material.lambda, material.mu);
    let lpm = lam + mu;
    if lpm == 0.0 {
        return Err(Error::Degenerate("lambda + mu = 0"));
    }
    let inv = 1.0 / (lpm * (k1 - k3));
    Ok(MaterialConstants {
        alpha: -(mu * k1) * inv,
        beta: -(k3 * (lam + 2.0 * mu) - k1 * lpm) * inv,
        gamma: (k3 * lpm - k1 * (lam + 3.0 * mu)) * inv,
        eta: (k3 * (lam + 3.0 * mu) - k1 * lpm) * inv,
    })
}

/// A ray `lambda = ratio · mu`, `mu > 0`, of isotropic materials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialRay {
    pub ratio: f64,
    /// Some `mu > 0` on the ray satisfies `3 lambda + 2 mu > 0`.
    pub admissible: bool,
}

impl MaterialRay {
    pub fn from_ratio(ratio: f64) -> Self {
        Self { ratio, admissible: ratio.is_finite() && 3.0 * ratio + 2.0 > 0.0 }
    }

    pub fn material(&self, mu: f64) -> LameMaterial {
        LameMaterial::unchecked(self.ratio * mu, mu)
    }
}

/// Material ray on which `gamma = 0`, i.e. `k1 (lambda + 3mu) = k3 (lambda + mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma0Report {
    pub ray: MaterialRay,
    pub same_sign: bool,
}

pub fn special_material_gamma0(k1: f64, k3: f64) -> Result<Gamma0Report> {
    if k1 == k3 {
        return Err(Error::CoincidentEigenvalues);
    }
    Ok(Gamma0Report {
        ray: MaterialRay::from_ratio((k3 - 3.0 * k1) / (k1 - k3)),
        same_sign: k1 * k3 > 0.0,
    })
}

/// Rays for the `eta = 2` condition: the tabulated linear condition
/// `k1 (lambda + mu) = k3 (mu − lambda)` and the direct expansion of `eta = 2`,
/// `3 lambda (k3 − k1) + mu (5 k3 − 3 k1) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eta2Report {
    pub printed: MaterialRay,
    pub literal: MaterialRay,
    pub rays_agree: bool,
    pub same_sign: bool,
}

pub fn special_material_eta2(k1: f64, k3: f64) -> Result<Eta2Report> {
    if k1 == k3 {
        return Err(Error::CoincidentEigenvalues);
    }
    if k1 + k3 == 0.0 {
        return Err(Error::Degenerate("k1 + k3 = 0"));
    }
    let printed = MaterialRay::from_ratio((k3 - k1) / (k1 + k3));
    let literal = MaterialRay::from_ratio((3.0 * k1 - 5.0 * k3) / (3.0 * (k3 - k1)));
    let agree = (printed.ratio - literal.ratio).abs() <= 1e-9 * 1.0f64.max(printed.ratio.abs());
    Ok(Eta2Report { printed, literal, rays_agree: agree, same_sign: k1 * k3 > 0.0 })
}

/// Joint solvability of the `gamma = 0` and printed `eta = 2` conditions as a
/// homogeneous 2×2 system in `(lambda, mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointReport {
    pub determinant: f64,
    pub solvable: bool,
    pub ray: Option<MaterialRay>,
    pub same_sign: bool,
}

/// `2 (k3² − 2 k1 k3 − k1²)`.
pub fn joint_determinant(k1: f64, k3: f64) -> f64 {
    2.0 * (k3 * k3 - 2.0 * k1 * k3 - k1 * k1)
}

pub fn special_material_joint(k1: f64, k3: f64) -> Result<JointReport> {
    if k1 == k3 {
        return Err(Error::CoincidentEigenvalues);
    }
    let det = joint_determinant(k1, k3);
    let scale = 2.0 * (k1 * k1).max(k3 * k3);
    let solvable = det.abs() <= 1e-9 * scale;
    let ray = if solvable && k1 + k3 != 0.0 {
        Some(MaterialRay::from_ratio((k3 - k1) / (k1 + k3)))
    } else {
        None
    };
    Ok(JointReport { determinant: det, solvable, ray, same_sign: k1 * k3 > 0.0 })
}

/// Roots of the joint determinant in `k3/k1` over `[lo, hi]`: brackets sign
/// changes on a uniform scan with the given step, then bisects each bracket.
pub fn locate_joint_roots(lo: f64, hi: f64, step: f64) -> alloc::vec::Vec<f64> {
    let mut roots = alloc::vec::Vec::new();
    if !(step > 0.0) || !(hi > lo) {
        return roots;
    }
    let f = |r: f64| joint_determinant(1.0, r);
    let n = ((hi - lo) / step).ceil() as usize;
    let mut prev = lo;
    for i in 1..=n {
        let cur = (lo + i as f64 * step).min(hi);
        let (fa, fb) = (f(prev), f(cur));
        if fa == 0.0 {
            roots.push(prev);
        } else if fa * fb < 0.0 {
            roots.push(bisect(f, prev, cur));
        }
        prev = cur;
    }
    if f(hi) == 0.0 && roots.last().map_or(true, |&r| r != hi) {
        roots.push(hi);
    }
    roots
}

pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
