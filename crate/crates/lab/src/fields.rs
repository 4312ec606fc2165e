//! Interior displacement-gradient fields by the spectral and potential paths,
//! interior probe sets and uniformity metrics.

use eshelby_core::kernels::pair_index;
use eshelby_core::linalg::neighbour_directions;
use eshelby_core::materials::{Eigenstress, LameMaterial};
use eshelby_core::shape::InclusionShape;
use eshelby_core::{Error, Mat3, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::quadrature::{HessianSet, Potentials};
use crate::spectral::GradField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMethod {
    Spectral,
    Potential,
}

impl FieldMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectral => "spectral",
            Self::Potential => "potential",
        }
    }
}

/// Total displacement gradient `∂u_p/∂x_l` (row `p`, column `l`), unsymmetrized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub point: Vec3,
    pub grad_u: Mat3,
    pub method: FieldMethod,
    pub inside: bool,
}

/// Samples of a spectral solution at arbitrary points.
pub fn spectral_samples(field: &GradField, shape: &InclusionShape, points: &[Vec3]) -> Vec<FieldSample> {
    points
        .iter()
        .map(|x| FieldSample { point: *x, grad_u: field.sample(x), method: FieldMethod::Spectral, inside: shape.contains(x) })
        .collect()
}

/// Displacement gradient from the Hessians of `N` and of the eigenstress-weighted
/// potential `Ñ_σ = Σ_ij σ_ij M_ij`:
/// `(1/μ) σ·HessN − c/2 (tr σ HessN − Hess Ñ_σ)`, `c = (λ+μ)/(μ(λ+2μ))`.
/// For diagonal `σ` the second term is `c Σ_q σ_qq Hess(∂²H/∂x_q²)`.
pub fn grad_u_from_hessians(material: &LameMaterial, sigma: &Mat3, hess: &HessianSet) -> Mat3 {
    let (l, m) = (material.lambda, material.mu);
    let c = (l + m) / (m * (l + 2.0 * m));
    let hn = hess[0];
    let mut hs = Mat3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            hs += hess[1 + pair_index(i, j)] * sigma[(i, j)];
        }
    }
    sigma * hn / m - (hn * sigma.trace() - hs) * (c / 2.0)
}

/// Potential-path field at `points`: second derivatives by central
/// differences (step one quadrature cell) of closed-form gradients.
/// Exterior points are evaluated and flagged.
pub fn solve_potential(
    potentials: &Potentials,
    shape: &InclusionShape,
    material: &LameMaterial,
    sigma: &Eigenstress,
    points: &[Vec3],
) -> Result<Vec<FieldSample>> {
    material.check()?;
    let s = sigma.tensor;
    Ok(points
        .par_iter()
        .map(|x| FieldSample {
            point: *x,
            grad_u: grad_u_from_hessians(material, &s, &potentials.hessians(x)),
            method: FieldMethod::Potential,
            inside: shape.contains(x),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformityReport {
    pub mean_grad_u: Mat3,
    /// RMS over samples and the nine components of `g − mean`, over the
    /// Frobenius norm of the mean.
    pub rms_dev: f64,
    /// Largest component of `|g − mean|` over all samples, same normalization.
    pub max_dev: f64,
    pub n_samples: usize,
    pub erosion_margin: f64,
}

pub const MIN_UNIFORMITY_SAMPLES: usize = 20;

pub fn uniformity(samples: &[FieldSample], erosion_margin: f64) -> Result<UniformityReport> {
    if samples.len() < MIN_UNIFORMITY_SAMPLES {
        return Err(Error::Precondition(format!(
            "uniformity needs at least {MIN_UNIFORMITY_SAMPLES} interior samples, got {}",
            samples.len()
        )));
    }
    let method = samples[0].method;
    if samples.iter().any(|s| s.method != method) {
        return Err(Error::Precondition("uniformity samples mix field methods".into()));
    }
    if samples.iter().any(|s| !s.inside) {
        return Err(Error::Precondition("uniformity samples must lie inside the inclusion".into()));
    }
    let n = samples.len() as f64;
    // shifted by the first sample: exact for constant fields, less cancellation otherwise
    let first = samples[0].grad_u;
    let mean = first + samples.iter().fold(Mat3::zeros(), |a, s| a + (s.grad_u - first)) / n;
    let scale = mean.norm();
    if !(scale > 0.0) {
        return Err(Error::Degenerate("mean displacement gradient vanishes"));
    }
    let sq: f64 = samples.iter().map(|s| (s.grad_u - mean).norm_squared()).sum();
    let rms = (sq / (9.0 * n)).sqrt() / scale;
    let max = samples.iter().map(|s| (s.grad_u - mean).amax()).fold(0.0, f64::max) / scale;
    Ok(UniformityReport { mean_grad_u: mean, rms_dev: rms, max_dev: max, n_samples: samples.len(), erosion_margin })
}

/// Largest componentwise difference relative to the largest component of `reference`.
pub fn relative_difference(a: &Mat3, reference: &Mat3) -> f64 {
    (a - reference).amax() / reference.amax()
}

/// Interior erosion margin: two cells plus 5% of the smallest semi-extent.
pub fn erosion_margin(shape: &InclusionShape, spacing: f64) -> f64 {
    2.0 * spacing + 0.05 * shape.min_semi_extent()
}

/// `x` is inside and so are its offsets by `margin` in all 26 lattice directions.
pub fn is_eroded_interior(shape: &InclusionShape, x: &Vec3, margin: f64) -> bool {
    shape.contains(x) && neighbour_directions().iter().all(|d| shape.contains(&(x + d * margin)))
}

/// Points of the regular lattice of spacing `step` (anchored at the bounding-box
/// center) lying in the eroded interior.
pub fn lattice_probes(shape: &InclusionShape, step: f64, margin: f64) -> Vec<Vec3> {
    let bb = shape.bbox();
    let c = bb.center();
    let half = bb.extent() * 0.5;
    let m: Vec<i64> = (0..3).map(|a| (half[a] / step).floor() as i64).collect();
    let dirs = neighbour_directions();
    let mut out = Vec::new();
    for k in -m[2]..=m[2] {
        for j in -m[1]..=m[1] {
            for i in -m[0]..=m[0] {
                let x = c + Vec3::new(i as f64, j as f64, k as f64) * step;
                if shape.contains(&x) && dirs.iter().all(|d| shape.contains(&(x + d * margin))) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// `count` uniformly random eroded-interior points, reproducible from `seed`.
pub fn random_probes(shape: &InclusionShape, count: usize, margin: f64, seed: u64) -> Result<Vec<Vec3>> {
    let bb = shape.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) + 10_000 {
            return Err(Error::Degenerate("eroded interior too small for random probes"));
        }
        let u = Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        let x = bb.lo + bb.extent().component_mul(&u);
        if is_eroded_interior(shape, &x, margin) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Points at distance at least `clearance` from the boundary (inside or outside),
/// on a lattice of spacing `step` covering the bounding box grown by `pad`.
pub fn clear_of_boundary(shape: &InclusionShape, step: f64, pad: f64, clearance: f64) -> Vec<(Vec3, bool)> {
    let bb = shape.bbox();
    let c = bb.center();
    let half = bb.extent() * 0.5 + Vec3::repeat(pad);
    let m: Vec<i64> = (0..3).map(|a| (half[a] / step).floor() as i64).collect();
    let dirs = neighbour_directions();
    let mut out = Vec::new();
    for k in -m[2]..=m[2] {
        for j in -m[1]..=m[1] {
            for i in -m[0]..=m[0] {
                let x = c + Vec3::new(i as f64, j as f64, k as f64) * step;
                let inside = shape.contains(&x);
                let steady = (1..=4).all(|r| {
                    dirs.iter().all(|d| shape.contains(&(x + d * (clearance * r as f64 / 4.0))) == inside)
                });
                if steady {
                    out.push((x, inside));
                }
            }
        }
    }
    out
}

/// Eroded-interior voxel centers of a spectral grid.
pub fn interior_voxel_centers(field: &GradField, shape: &InclusionShape, margin: f64) -> Vec<Vec3> {
    let g = &field.grid;
    let bb = shape.bbox();
    (0..g.len())
        .into_par_iter()
        .filter_map(|idx| {
            let [i, j, k] = g.unindex(idx);
            let x = g.voxel_center(i, j, k);
            (bb.contains(&x) && is_eroded_interior(shape, &x, margin)).then_some(x)
        })
        .collect()
}

/// Stress from a displacement gradient and eigenstrain: `C:(sym ∇u − ε*)`.
pub fn stress(material: &LameMaterial, grad_u: &Mat3, eigenstrain: &Mat3) -> Mat3 {
    material.stress_from_strain(&((grad_u + grad_u.transpose()) * 0.5 - eigenstrain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureSpec;
    use eshelby_core::shape::Ellipsoid;

    fn constant(g: Mat3, n: usize) -> Vec<FieldSample> {
        (0..n)
            .map(|i| FieldSample { point: Vec3::new(i as f64, 0.0, 0.0), grad_u: g, method: FieldMethod::Spectral, inside: true })
            .collect()
    }

    #[test]
    fn constant_field_is_uniform() {
        let r = uniformity(&constant(Mat3::identity() * 0.3, 25), 0.1).unwrap();
        assert_eq!(r.rms_dev, 0.0);
        assert_eq!(r.max_dev, 0.0);
        assert_eq!(r.n_samples, 25);
    }

    #[test]
    fn uniformity_rejections() {
        assert!(uniformity(&constant(Mat3::identity(), 5), 0.0).is_err());
        let mut s = constant(Mat3::identity(), 25);
        s[3].method = FieldMethod::Potential;
        assert!(uniformity(&s, 0.0).is_err());
    }

    #[test]
    fn rms_below_max() {
        let mut s = constant(Mat3::identity(), 30);
        for (i, x) in s.iter_mut().enumerate() {
            x.grad_u[(0, 1)] = 0.01 * (i as f64).sin();
        }
        let r = uniformity(&s, 0.0).unwrap();
        assert!(r.rms_dev > 0.0 && r.rms_dev <= r.max_dev);
    }

    #[test]
    fn hydrostatic_collapse() {
        // for σ = kI the potential path is exactly k/(λ+2μ) HessN
        let mut hess = [Mat3::zeros(); 7];
        hess[0] = Mat3::new(0.4, 0.01, 0.0, 0.01, 0.35, 0.02, 0.0, 0.02, 0.25);
        for (idx, &(i, j)) in eshelby_core::kernels::PAIRS.iter().enumerate() {
            hess[1 + idx] = Mat3::from_fn(|r, c| 0.1 * (1 + i + 2 * j + r * c) as f64);
        }
        // Ñ for kI is k·(M11+M22+M33) = k·N: make the diagonal pair Hessians sum to HessN
        hess[3] = hess[0] - hess[1] - hess[2];
        let mat = LameMaterial::new(1.3, 0.7).unwrap();
        let k = 2.5;
        let g = grad_u_from_hessians(&mat, &(Mat3::identity() * k), &hess);
        let want = hess[0] * (k / (mat.lambda + 2.0 * mat.mu));
        assert!((g - want).amax() < 1e-14);
    }

    #[test]
    fn potential_path_hydrostatic_ball() {
        let shape: InclusionShape = Ellipsoid::ball(Vec3::zeros(), 1.0).unwrap().into();
        let p = Potentials::new(&shape, QuadratureSpec { resolution: 32, subsamples: 4 }).unwrap();
        let mat = LameMaterial::new(1.0, 1.0).unwrap();
        let s = Eigenstress::from_principal([3.0; 3]).unwrap();
        let pts = [Vec3::zeros(), Vec3::new(0.3, 0.1, -0.2)];
        for f in solve_potential(&p, &shape, &mat, &s, &pts).unwrap() {
            assert!(f.inside);
            assert!(relative_difference(&f.grad_u, &(Mat3::identity() / 3.0)) < 0.02, "{}", f.grad_u);
        }
    }

    #[test]
    fn probes_are_eroded_and_reproducible() {
        let shape: InclusionShape = Ellipsoid::axis_aligned(Vec3::zeros(), Vec3::new(1.0, 0.7, 0.4)).unwrap().into();
        let m = erosion_margin(&shape, 0.05);
        let a = random_probes(&shape, 30, m, 7).unwrap();
        assert_eq!(a, random_probes(&shape, 30, m, 7).unwrap());
        assert!(a.iter().all(|x| is_eroded_interior(&shape, x, m)));
        let l = lattice_probes(&shape, 0.1, m);
        assert!(l.len() > 50);
        assert!(l.iter().all(|x| shape.contains(x)));
    }

    use proptest::prelude::*;

    fn jittered(base: [f64; 9], noise: &[f64]) -> Vec<FieldSample> {
        let g = Mat3::from_row_slice(&base);
        noise
            .chunks(9)
            .enumerate()
            .map(|(i, c)| FieldSample {
                point: Vec3::new(i as f64, 0.0, 0.0),
                grad_u: g + Mat3::from_row_slice(c),
                method: FieldMethod::Spectral,
                inside: true,
            })
            .collect()
    }

    proptest! {
        #[test]
        fn uniformity_scale_and_order_invariant(
            base in prop::array::uniform9(0.2f64..1.0),
            noise in prop::collection::vec(-0.05f64..0.05, 9 * 24),
            c in 0.01f64..100.0,
        ) {
            let s = jittered(base, &noise);
            let r = uniformity(&s, 0.0).unwrap();
            prop_assert!(r.rms_dev <= r.max_dev * (1.0 + 1e-12));
            let scaled: Vec<_> = s.iter().map(|x| FieldSample { grad_u: x.grad_u * c, ..x.clone() }).collect();
            let rs = uniformity(&scaled, 0.0).unwrap();
            prop_assert!((rs.rms_dev - r.rms_dev).abs() <= 1e-10 * r.rms_dev.max(1e-300));
            let mut rev = s.clone();
            rev.reverse();
            let rr = uniformity(&rev, 0.0).unwrap();
            prop_assert!((rr.rms_dev - r.rms_dev).abs() <= 1e-10 * r.rms_dev.max(1e-300));
        }
    }
}
