//! Volume-potential kernels and their exact integrals over rectangular cells.
//!
//! Every kernel here is a homogeneous function of the separation `X = x − y`.
//! That makes the integral over the box spanned by the origin and a corner
//! `(a, b, c)` reducible to three face integrals: the box is the union of three
//! pyramids with apex at the origin, one over each far face, and for a kernel
//! of degree `k` a pyramid of height `d` over face `F` contributes
//! `d / (3 + k) · ∫_F K dA`. The face integrals are smooth away from the foot
//! of the apex and are evaluated by Gauss–Legendre on segments graded
//! geometrically towards it, so cells adjacent to (or containing) the
//! evaluation point are integrated to near machine precision.

#[allow(unused_imports)]
use num_traits::Float;
use crate::linalg::Vec3;
use core::f64::consts::PI;

/// A homogeneous kernel `K(X)` with `M` components.
pub trait Kernel<const M: usize>: Sync {
    /// Homogeneity degree: `K(tX) = t^DEGREE K(X)`. Must exceed −3.
    const DEGREE: i32;
    /// Kernel value at separation `x − y`. Returns zeros at the origin.
    fn eval(&self, sep: &Vec3) -> [f64; M];
}

const FOUR_PI: f64 = 4.0 * PI;

/// Index pairs of the six independent second moments, in component order.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Position of the pair `(i, j)` in [`PAIRS`].
pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        _ => 5,
    }
}

/// Newtonian kernel and its axis-weighted companions:
/// `[−1/(4πr), −X_iX_j/(4πr³) for (i, j) in PAIRS]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScalarKernel;

impl Kernel<7> for ScalarKernel {
    const DEGREE: i32 = -1;

    #[inline]
    fn eval(&self, x: &Vec3) -> [f64; 7] {
        let r2 = x.norm_squared();
        if r2 == 0.0 {
            return [0.0; 7];
        }
        let r = r2.sqrt();
        let inv = 1.0 / (FOUR_PI * r);
        let inv3 = inv / r2;
        [
            -inv,
            -x[0] * x[0] * inv3,
            -x[1] * x[1] * inv3,
            -x[2] * x[2] * inv3,
            -x[0] * x[1] * inv3,
            -x[0] * x[2] * inv3,
            -x[1] * x[2] * inv3,
        ]
    }
}

/// Biharmonic kernel `−r/(8π)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BiharmonicKernel;

impl Kernel<1> for BiharmonicKernel {
    const DEGREE: i32 = 1;

    #[inline]
    fn eval(&self, x: &Vec3) -> [f64; 1] {
        [-x.norm() / (2.0 * FOUR_PI)]
    }
}

/// Gradient (with respect to the evaluation point) of every component of
/// [`ScalarKernel`]: entries `3c + m` hold `∂_m` of component `c`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradientKernel;

impl Kernel<21> for GradientKernel {
    const DEGREE: i32 = -2;

    #[inline]
    fn eval(&self, x: &Vec3) -> [f64; 21] {
        let mut out = [0.0; 21];
        let r2 = x.norm_squared();
        if r2 == 0.0 {
            return out;
        }
        let r = r2.sqrt();
        let inv3 = 1.0 / (FOUR_PI * r * r2);
        let inv5 = inv3 / r2;
        for m in 0..3 {
            out[m] = x[m] * inv3;
        }
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            let xij = x[i] * x[j];
            for m in 0..3 {
                let mut lin = 0.0;
                if i == m {
                    lin += x[j];
                }
                if j == m {
                    lin += x[i];
                }
                out[3 * (p + 1) + m] = -(lin * inv3 - 3.0 * xij * x[m] * inv5);
            }
        }
        out
    }
}

/// Axis-3 flux kernel `3 X_3² X / (4π r⁵)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FluxKernel;

impl Kernel<3> for FluxKernel {
    const DEGREE: i32 = -2;

    #[inline]
    fn eval(&self, x: &Vec3) -> [f64; 3] {
        let r2 = x.norm_squared();
        if r2 == 0.0 {
            return [0.0; 3];
        }
        let r = r2.sqrt();
        let s = 3.0 * x[2] * x[2] / (FOUR_PI * r2 * r2 * r);
        [s * x[0], s * x[1], s * x[2]]
    }
}

const GL_X: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
const GL_W: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

/// Breakpoints `0, d, 4d, 16d, … , len` for a face edge of length `len`
/// graded towards the foot point at distance `d`.
fn graded(d: f64, len: f64, out: &mut [f64; 40]) -> usize {
    out[0] = 0.0;
    let mut n = 1;
    let mut b = d;
    while b < len && n < 39 {
        out[n] = b;
        n += 1;
        b *= 4.0;
    }
    out[n] = len;
    n + 1
}

#[inline]
fn add<const M: usize>(acc: &mut [f64; M], v: &[f64; M], w: f64) {
    for c in 0..M {
        acc[c] += w * v[c];
    }
}

/// `∫∫ K(s ⊙ X) du dv` over the face `X[axis] = d`, the other two coordinates
/// ranging over `[0, e1] × [0, e2]`.
fn face_integral<K: Kernel<M>, const M: usize>(
    kernel: &K,
    axis: usize,
    d: f64,
    e1: f64,
    e2: f64,
    signs: &Vec3,
) -> [f64; M] {
    let (o1, o2) = ((axis + 1) % 3, (axis + 2) % 3);
    let mut b1 = [0.0; 40];
    let mut b2 = [0.0; 40];
    let n1 = graded(d, e1, &mut b1);
    let n2 = graded(d, e2, &mut b2);
    let mut acc = [0.0; M];
    let mut x = Vec3::zeros();
    x[axis] = signs[axis] * d;
    for s1 in 0..n1 - 1 {
        let (c1, h1) = (0.5 * (b1[s1] + b1[s1 + 1]), 0.5 * (b1[s1 + 1] - b1[s1]));
        for s2 in 0..n2 - 1 {
            let (c2, h2) = (0.5 * (b2[s2] + b2[s2 + 1]), 0.5 * (b2[s2 + 1] - b2[s2]));
            let mut seg = [0.0; M];
            for (&xa, &wa) in GL_X.iter().zip(GL_W.iter()) {
                for sa in [-1.0, 1.0] {
                    x[o1] = signs[o1] * (c1 + sa * h1 * xa);
                    for (&xb, &wb) in GL_X.iter().zip(GL_W.iter()) {
                        for sb in [-1.0, 1.0] {
                            x[o2] = signs[o2] * (c2 + sb * h2 * xb);
                            add(&mut seg, &kernel.eval(&x), wa * wb);
                        }
                    }
                }
            }
            add(&mut acc, &seg, h1 * h2);
        }
    }
    acc
}

/// Oriented corner primitive `G(X) = ∫_0^{X_1} ∫_0^{X_2} ∫_0^{X_3} K(ξ) dξ`.
pub fn corner_primitive<K: Kernel<M>, const M: usize>(kernel: &K, corner: &Vec3) -> [f64; M] {
    let mut out = [0.0; M];
    let a = corner.abs();
    let scale = a.max();
    if a.min() == 0.0 {
        return out;
    }
    let signs = Vec3::new(corner[0].signum(), corner[1].signum(), corner[2].signum());
    let factor = 1.0 / (3 + K::DEGREE) as f64;
    for axis in 0..3 {
        let d = a[axis];
        if d < 1e-14 * scale {
            continue;
        }
        let (e1, e2) = (a[(axis + 1) % 3], a[(axis + 2) % 3]);
        let f = face_integral(kernel, axis, d, e1, e2, &signs);
        add(&mut out, &f, d * factor);
    }
    let orient = signs.product();
    for v in out.iter_mut() {
        *v *= orient;
    }
    out
}

/// `∫_{cell} K(x − y) dy` for the axis-aligned cell `[lo, hi]`.
pub fn cell_integral<K: Kernel<M>, const M: usize>(kernel: &K, x: &Vec3, lo: &Vec3, hi: &Vec3) -> [f64; M] {
    let mut out = [0.0; M];
    for e in 0..8 {
        let y = Vec3::new(
            if e & 1 == 0 { lo[0] } else { hi[0] },
            if e & 2 == 0 { lo[1] } else { hi[1] },
            if e & 4 == 0 { lo[2] } else { hi[2] },
        );
        let sign = if (e & 1) ^ ((e >> 1) & 1) ^ ((e >> 2) & 1) == 0 { 1.0 } else { -1.0 };
        add(&mut out, &corner_primitive(kernel, &(x - y)), sign);
    }
    out
}

/// Exact integrals over every cell of a block of `n³` cells of spacing `h`
/// whose lowest corner is `origin`, sharing the `(n+1)³` corner primitives.
/// Output is indexed `i + n (j + n k)`.
pub fn block_cell_integrals<K: Kernel<M>, const M: usize>(
    kernel: &K,
    x: &Vec3,
    origin: &Vec3,
    h: &Vec3,
    n: usize,
    corners: &mut alloc::vec::Vec<[f64; M]>,
    cells: &mut alloc::vec::Vec<[f64; M]>,
) {
    let m = n + 1;
    corners.clear();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let y = origin + Vec3::new(i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]);
                corners.push(corner_primitive(kernel, &(x - y)));
            }
        }
    }
    cells.clear();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let mut acc = [0.0; M];
                for e in 0..8 {
                    let (di, dj, dk) = (e & 1, (e >> 1) & 1, (e >> 2) & 1);
                    let sign = if (di ^ dj ^ dk) == 0 { 1.0 } else { -1.0 };
                    add(&mut acc, &corners[(i + di) + m * ((j + dj) + m * (k + dk))], sign);
                }
                cells.push(acc);
            }
        }
    }
}

/// Closed-form Newtonian integral `∫_{[lo,hi]} dy / |x − y|` of a box
/// (the classical arctan/log antiderivative).
pub fn box_inverse_distance(x: &Vec3, lo: &Vec3, hi: &Vec3) -> f64 {
    fn prim(a: f64, b: f64, c: f64) -> f64 {
        let r = (a * a + b * b + c * c).sqrt();
        let mut s = 0.0;
        let terms = [(a, b, c), (b, c, a), (c, a, b)];
        for (p, q, t) in terms {
            if q != 0.0 && t != 0.0 && r + p != 0.0 {
                s += q * t * (r + p).abs().ln();
            }
            if p != 0.0 {
                s -= 0.5 * p * p * (q * t / (p * r)).atan();
            }
        }
        s
    }
    let mut out = 0.0;
    for e in 0..8 {
        let u = Vec3::new(
            if e & 1 == 0 { x[0] - lo[0] } else { x[0] - hi[0] },
            if e & 2 == 0 { x[1] - lo[1] } else { x[1] - hi[1] },
            if e & 4 == 0 { x[2] - lo[2] } else { x[2] - hi[2] },
        );
        let sign = if (e & 1) ^ ((e >> 1) & 1) ^ ((e >> 2) & 1) == 0 { 1.0 } else { -1.0 };
        out += sign * prim(u[0], u[1], u[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force tensor Gauss–Legendre over a box, subdividing `k` times per axis.
    fn brute<K: Kernel<M>, const M: usize>(kern: &K, x: &Vec3, lo: &Vec3, hi: &Vec3, k: usize) -> [f64; M] {
        let mut out = [0.0; M];
        let h = (hi - lo) / k as f64;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for (&xa, &wa) in GL_X.iter().zip(GL_W.iter()) {
                        for sa in [-1.0, 1.0] {
                            for (&xb, &wb) in GL_X.iter().zip(GL_W.iter()) {
                                for sb in [-1.0, 1.0] {
                                    for (&xc, &wc) in GL_X.iter().zip(GL_W.iter()) {
                                        for sc in [-1.0, 1.0] {
                                            let y = lo
                                                + Vec3::new(
                                                    h[0] * (a as f64 + 0.5 + 0.5 * sa * xa),
                                                    h[1] * (b as f64 + 0.5 + 0.5 * sb * xb),
                                                    h[2] * (c as f64 + 0.5 + 0.5 * sc * xc),
                                                );
                                            let w = wa * wb * wc * h.product() / 8.0;
                                            add(&mut out, &kern.eval(&(x - y)), w);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn unit_cube_center_potential() {
        // −(1/4π)∫ 1/r over the unit cube seen from its center
        let lo = Vec3::repeat(-0.5);
        let hi = Vec3::repeat(0.5);
        let closed = -box_inverse_distance(&Vec3::zeros(), &lo, &hi) / FOUR_PI;
        assert!((closed + 0.18940).abs() < 1e-5);
        let exact = cell_integral(&ScalarKernel, &Vec3::zeros(), &lo, &hi);
        assert!((exact[0] - closed).abs() < 1e-11);
    }

    #[test]
    fn second_moments_sum_to_newtonian() {
        let x = Vec3::new(0.13, -0.4, 0.27);
        let v = cell_integral(&ScalarKernel, &x, &Vec3::new(-0.2, -0.5, 0.0), &Vec3::new(0.3, 0.1, 0.4));
        assert!((v[1] + v[2] + v[3] - v[0]).abs() < 1e-12);
    }

    #[test]
    fn far_cell_matches_brute_force() {
        let x = Vec3::new(2.0, -1.3, 0.7);
        let lo = Vec3::new(-0.1, 0.0, 0.2);
        let hi = Vec3::new(0.2, 0.25, 0.5);
        let e = cell_integral(&GradientKernel, &x, &lo, &hi);
        let b = brute(&GradientKernel, &x, &lo, &hi, 2);
        for c in 0..21 {
            assert!((e[c] - b[c]).abs() < 1e-11 * (1.0 + b[c].abs()), "{c}: {} vs {}", e[c], b[c]);
        }
        let e = cell_integral(&BiharmonicKernel, &x, &lo, &hi);
        let b = brute(&BiharmonicKernel, &x, &lo, &hi, 1);
        assert!((e[0] - b[0]).abs() < 1e-13);
    }

    #[test]
    fn gradient_of_cell_integral_by_differences() {
        let lo = Vec3::new(-0.5, -0.5, -0.5);
        let hi = Vec3::new(0.5, 0.5, 0.5);
        let x = Vec3::new(0.1, 0.35, -0.2);
        let g = cell_integral(&GradientKernel, &x, &lo, &hi);
        let step = 1e-4;
        for m in 0..3 {
            let mut dx = Vec3::zeros();
            dx[m] = step;
            let p = cell_integral(&ScalarKernel, &(x + dx), &lo, &hi);
            let q = cell_integral(&ScalarKernel, &(x - dx), &lo, &hi);
            for c in 0..7 {
                let fd = (p[c] - q[c]) / (2.0 * step);
                assert!((fd - g[3 * c + m]).abs() < 1e-7, "comp {c} axis {m}: {fd} vs {}", g[3 * c + m]);
            }
        }
    }

    #[test]
    fn flux_kernel_is_combination_of_gradients() {
        // 3 X3² X / r⁵ = 2 e3 X3 / r³ − ∂(X3²/r³)
        let x = Vec3::new(0.3, -0.7, 0.45);
        let f = FluxKernel.eval(&x);
        let g = GradientKernel.eval(&x);
        for m in 0..3 {
            let lin = if m == 2 { 2.0 * x[2] / (FOUR_PI * x.norm().powi(3)) } else { 0.0 };
            // component 3 (X3X3) of ScalarKernel carries the −1/(4π) factor
            let want = lin + g[3 * 3 + m];
            assert!((f[m] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn block_matches_single_cells() {
        let x = Vec3::new(0.03, -0.02, 0.01);
        let h = Vec3::repeat(0.1);
        let origin = Vec3::repeat(-0.15);
        let mut corners = alloc::vec::Vec::new();
        let mut cells = alloc::vec::Vec::new();
        block_cell_integrals(&ScalarKernel, &x, &origin, &h, 3, &mut corners, &mut cells);
        let lo = origin + Vec3::new(0.1, 0.2, 0.0);
        let single = cell_integral(&ScalarKernel, &x, &lo, &(lo + h));
        let idx = 1 + 3 * (2 + 3 * 0);
        for c in 0..7 {
            assert!((cells[idx][c] - single[c]).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn exact_newtonian_matches_closed_form(
            x in prop::array::uniform3(-1.0f64..1.0),
            lo in prop::array::uniform3(-0.5f64..0.0),
            ext in prop::array::uniform3(0.05f64..0.6),
        ) {
            let x = Vec3::from(x);
            let lo = Vec3::from(lo);
            let hi = lo + Vec3::from(ext);
            let closed = -box_inverse_distance(&x, &lo, &hi) / FOUR_PI;
            let e = cell_integral(&ScalarKernel, &x, &lo, &hi);
            prop_assert!((e[0] - closed).abs() < 1e-10 * (1.0 + closed.abs()), "{} vs {}", e[0], closed);
        }
    }
}
