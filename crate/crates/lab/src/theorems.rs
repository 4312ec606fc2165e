//! Checkers for the potential-theoretic conditions on inclusion shapes: the
//! interior minimum of `N` and the ellipsoid built from its Hessian, the
//! quadratic-potential test, the boundary flux test and the mixed-derivative
//! constancy condition.

use eshelby_core::ferrers::newtonian_ellipsoid;
use eshelby_core::fit::{quadratic_fit, QuadraticForm};
use eshelby_core::inverse::ellipsoid_from_hessian;
use eshelby_core::kernels::{FluxKernel, GradientKernel, ScalarKernel};
use eshelby_core::linalg::{fibonacci_sphere, sym_eigen_desc};
use eshelby_core::materials::{Eigenstress, LameMaterial};
use eshelby_core::shape::{contact_scale, Ellipsoid, GridSpec, InclusionShape, VoxelMask};
use eshelby_core::{Error, Mat3, Result, Vec3};
use rayon::prelude::*;

use crate::fields::{is_eroded_interior, lattice_probes};
use crate::quadrature::{Potentials, QuadratureSpec, SourceGrid};
use crate::spectral::{solve_spectral, GradField};
use crate::voxel::voxelize;

/// Decision thresholds; the defaults are pinned for 128³ grids with padding 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub residual_x3: f64,
    pub fit_rms: f64,
    pub mixed_dev: f64,
    pub trace: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { residual_x3: 1e-2, fit_rms: 1e-3, mixed_dev: 1e-2, trace: 2e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialMinimum {
    pub point: Vec3,
    pub value: f64,
    pub hessian: Mat3,
}

fn require_convex(shape: &InclusionShape) -> Result<()> {
    if shape.convex {
        Ok(())
    } else {
        Err(Error::Precondition("shape is not declared convex".into()))
    }
}

/// Interior minimum of quadrature `N`: lattice scan, then Newton steps on the
/// closed-form gradient with the finite-difference Hessian.
pub fn find_potential_minimum(shape: &InclusionShape, potentials: &Potentials) -> Result<PotentialMinimum> {
    require_convex(shape)?;
    let h = potentials.step();
    let grid = &potentials.fine;
    let scan_step = shape.bbox().max_extent() / 12.0;
    let mut cands = lattice_probes(shape, scan_step.min(shape.min_semi_extent() / 2.0), 2.0 * h);
    if cands.is_empty() {
        cands.push(shape.bbox().center());
    }
    let values: Vec<f64> = cands.par_iter().map(|x| grid.integrate(&ScalarKernel, &[*x], x)[0][0]).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    let mut x = cands[best];
    let tol = 1e-12 * shape.bbox().max_extent();
    for _ in 0..20 {
        let g = grid.integrate(&GradientKernel, &[x], &x)[0];
        let grad = Vec3::new(g[0], g[1], g[2]);
        let hess = Potentials::hessians_on(grid, &x, h)[0];
        let Some(inv) = hess.try_inverse() else {
            return Err(Error::Degenerate("singular Hessian of N during minimum search"));
        };
        let mut step = -(inv * grad);
        while !shape.contains(&(x + step)) && step.norm() > tol {
            step *= 0.5;
        }
        x += step;
        if step.norm() <= tol {
            break;
        }
    }
    if !is_eroded_interior(shape, &x, 2.0 * h) {
        return Err(Error::Degenerate("minimum of N lies on the boundary"));
    }
    let value = grid.integrate(&ScalarKernel, &[x], &x)[0][0];
    Ok(PotentialMinimum { point: x, value, hessian: Potentials::hessians_on(grid, &x, h)[0] })
}

/// Largest `t` such that `t·e` (scaled about its center) lies inside `shape`,
/// by bisection with boundary sampling.
pub fn inscribed_scale(shape: &InclusionShape, e: &Ellipsoid, samples: usize) -> Result<f64> {
    if !shape.contains(&e.center) {
        return Err(Error::Precondition("ellipsoid center lies outside the shape".into()));
    }
    let dirs = fibonacci_sphere(samples.max(16));
    let inside = |t: f64| {
        dirs.iter()
            .all(|d| shape.contains(&(e.center + e.rotation * d.component_mul(&e.semi_axes) * t)))
    };
    let (mut lo, mut hi) = (0.0, shape.bbox().max_extent() / e.semi_axes.min());
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if inside(m) {
            lo = m;
        } else {
            hi = m;
        }
    }
    if !(lo > 0.0) {
        return Err(Error::Degenerate("no scaled copy of the ellipsoid fits inside the shape"));
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub k1: f64,
    pub k3: f64,
    pub min_point: Vec3,
    pub hessian: Mat3,
    pub hessian_posdef: bool,
    pub trace_err: f64,
    pub ellipsoid_e: Ellipsoid,
    /// Semi-axes of `E` divided by the largest, in descending order.
    pub axis_ratios: [f64; 3],
    pub residual_x3: f64,
    pub columns: usize,
    /// `residual_x3` below threshold: consistent with the necessary condition.
    pub consistent: bool,
}

/// `x3` interval of the line `(x1, x2, ·)` inside `e`, if any.
fn chord(e: &Ellipsoid, x1: f64, x2: f64) -> Option<(f64, f64)> {
    // the squared gauge is exactly quadratic along the line
    let g = |z: f64| e.gauge(&Vec3::new(x1, x2, z)).powi(2);
    let z0 = e.center[2];
    let (g0, gp, gm) = (g(z0), g(z0 + 1.0), g(z0 - 1.0));
    let a = 0.5 * (gp + gm) - g0;
    let b = 0.5 * (gp - gm);
    let c = g0 - 1.0;
    let disc = b * b - 4.0 * a * c;
    if !(a > 0.0) || disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    Some((z0 + (-b - r) / (2.0 * a), z0 + (-b + r) / (2.0 * a)))
}

/// `N_Ω − N_E` on columns along `x3` inside `e`; returns the RMS over columns of
/// the within-column deviation, normalized by the standard deviation of `N_Ω`
/// over the same probes, and the number of columns used.
pub fn column_residual(potentials: &Potentials, e: &Ellipsoid, per_side: usize, per_column: usize) -> Result<(f64, usize)> {
    let ne = newtonian_ellipsoid(e)?;
    let bb = e.bbox();
    let mut columns = Vec::new();
    for j in 0..per_side {
        for i in 0..per_side {
            // interior lattice over the middle 80% of the footprint
            let u = 0.1 + 0.8 * (i as f64 + 0.5) / per_side as f64;
            let v = 0.1 + 0.8 * (j as f64 + 0.5) / per_side as f64;
            let x1 = bb.lo[0] + u * (bb.hi[0] - bb.lo[0]);
            let x2 = bb.lo[1] + v * (bb.hi[1] - bb.lo[1]);
            if let Some((lo, hi)) = chord(e, x1, x2) {
                let pad = 0.1 * (hi - lo);
                let pts: Vec<Vec3> = (0..per_column)
                    .map(|k| Vec3::new(x1, x2, lo + pad + (hi - lo - 2.0 * pad) * k as f64 / (per_column - 1) as f64))
                    .collect();
                columns.push(pts);
            }
        }
    }
    if columns.len() < 5 {
        return Err(Error::Degenerate("fewer than five probe columns fit inside the ellipsoid"));
    }
    let vals: Vec<Vec<(f64, f64)>> = columns
        .par_iter()
        .map(|col| {
            col.iter()
                .map(|x| {
                    let n = potentials.fine.integrate(&ScalarKernel, &[*x], x)[0][0];
                    (n, n - ne.eval(x))
                })
                .collect()
        })
        .collect();
    let all: Vec<f64> = vals.iter().flatten().map(|v| v.0).collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let std = (all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / all.len() as f64).sqrt();
    let mut acc = 0.0;
    for col in &vals {
        let m = col.iter().map(|v| v.1).sum::<f64>() / col.len() as f64;
        acc += col.iter().map(|v| (v.1 - m).powi(2)).sum::<f64>() / col.len() as f64;
    }
    let rms = (acc / vals.len() as f64).sqrt();
    Ok((rms / std.max(f64::MIN_POSITIVE), vals.len()))
}

/// Minimum of `N` → Hessian → ellipsoid with matching potential curvature,
/// sized to the largest copy inside `Ω` → `x3`-dependence of `N_Ω − N_E`.
pub fn check_theorem1(
    shape: &InclusionShape,
    material: &LameMaterial,
    k1: f64,
    k3: f64,
    potentials: &Potentials,
    thresholds: &Thresholds,
) -> Result<Theorem1Report> {
    material.check()?;
    if k1 == k3 {
        return Err(Error::Precondition("k1 and k3 must differ".into()));
    }
    let min = find_potential_minimum(shape, potentials)?;
    let hessian = min.hessian;
    let (vals, _) = sym_eigen_desc(&hessian);
    let hessian_posdef = vals[2] > 0.0;
    let trace_err = (hessian.trace() - 1.0).abs();
    let unit = ellipsoid_from_hessian(&hessian, min.point, 1.0)?;
    let t = inscribed_scale(shape, &unit, 4000)?;
    let e = Ellipsoid::new(unit.center, unit.semi_axes * t, unit.rotation)?;
    let m = e.semi_axes.max();
    let mut ratios = [e.semi_axes[0] / m, e.semi_axes[1] / m, e.semi_axes[2] / m];
    ratios.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (residual_x3, columns) = column_residual(potentials, &e, 7, 7)?;
    Ok(Theorem1Report {
        k1,
        k3,
        min_point: min.point,
        hessian,
        hessian_posdef,
        trace_err,
        ellipsoid_e: e,
        axis_ratios: ratios,
        residual_x3,
        columns,
        consistent: residual_x3 < thresholds.residual_x3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    EllipsoidConsistent,
    NotEllipsoid,
    /// Materials are linearly dependent; no conclusion drawn.
    Skipped,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Self::EllipsoidConsistent => "ellipsoid_consistent",
            Self::NotEllipsoid => "not_ellipsoid",
            Self::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub independent: bool,
    pub fit: Option<QuadraticForm>,
    pub verdict: Verdict,
}

/// `λ₁μ₂ − λ₂μ₁ ≠ 0` relative to the size of the products.
pub fn materials_independent(a: &LameMaterial, b: &LameMaterial) -> bool {
    let (p, q) = (a.lambda * b.mu, b.lambda * a.mu);
    (p - q).abs() > 1e-12 * p.abs().max(q.abs()).max(a.mu.abs() * b.mu.abs())
}

/// Quadratic fit of quadrature `N` at `probes`.
pub fn fit_interior_potential(potentials: &Potentials, probes: &[Vec3]) -> Result<QuadraticForm> {
    let vals: Vec<f64> = probes.par_iter().map(|x| potentials.fine.integrate(&ScalarKernel, &[*x], x)[0][0]).collect();
    quadratic_fit(probes, &vals)
}

pub fn check_theorem2(
    materials: [&LameMaterial; 2],
    k1: f64,
    k3: f64,
    potentials: &Potentials,
    probes: &[Vec3],
    thresholds: &Thresholds,
) -> Result<Theorem2Report> {
    materials[0].check()?;
    materials[1].check()?;
    if k1 == k3 {
        return Err(Error::Precondition("k1 and k3 must differ".into()));
    }
    if !materials_independent(materials[0], materials[1]) {
        return Ok(Theorem2Report { independent: false, fit: None, verdict: Verdict::Skipped });
    }
    let fit = fit_interior_potential(potentials, probes)?;
    let verdict = if fit.fit_rms < thresholds.fit_rms { Verdict::EllipsoidConsistent } else { Verdict::NotEllipsoid };
    Ok(Theorem2Report { independent: true, fit: Some(fit), verdict })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxReport {
    pub t_star: f64,
    pub q: Vec3,
    pub n: Vec3,
    pub f_at_q: Vec3,
    pub n_dot_f: f64,
    pub shell_volume: f64,
    /// Componentwise `|F(n) − F(n/2)|` plus a round-off bound for forming
    /// and summing the shell occupancy.
    pub est_error: Vec3,
    pub contact_unique: bool,
}

fn shell_grid(outer: &VoxelMask, inner: &VoxelMask) -> SourceGrid {
    let grid = outer.grid.clone();
    let fo = &outer.fractions;
    let fi = &inner.fractions;
    let co = outer.centroids.as_ref();
    let ci = inner.centroids.as_ref();
    let mut fractions = vec![0.0; grid.len()];
    let mut centroids = vec![Vec3::zeros(); grid.len()];
    for idx in 0..grid.len() {
        let f = (fo[idx] - fi[idx]).clamp(0.0, 1.0);
        let [i, j, k] = grid.unindex(idx);
        let center = grid.voxel_center(i, j, k);
        centroids[idx] = center;
        if f <= 0.0 {
            continue;
        }
        fractions[idx] = f;
        if let (Some(co), Some(ci)) = (co, ci) {
            let c = (co[idx] * fo[idx] - ci[idx] * fi[idx]) / (fo[idx] - fi[idx]);
            let h = grid.spacing() * 0.5;
            // clamp into the cell against cancellation in nearly empty cells
            centroids[idx] = Vec3::from_fn(|a, _| c[a].clamp(center[a] - h[a], center[a] + h[a]));
        }
    }
    SourceGrid::from_mask(&VoxelMask { grid, fractions, centroids: Some(centroids) })
}

/// Flux vector of the shell `E* \ Ω` at the contact point `Q`, where `E*` is
/// the smallest scaling of `e` about its center containing `Ω`.
pub fn flux_test(e: &Ellipsoid, omega: &InclusionShape, quad: QuadratureSpec, contact_samples: usize) -> Result<FluxReport> {
    let contact = contact_scale(e, omega, contact_samples)?;
    let e_star = Ellipsoid::new(e.center, e.semi_axes * contact.t_star, e.rotation)?;
    // Ω ⊆ E* at sampled points
    let bb = omega.bbox();
    let steps = 12;
    for k in 0..=steps {
        for j in 0..=steps {
            for i in 0..=steps {
                let t = Vec3::new(i as f64, j as f64, k as f64) / steps as f64;
                let x = bb.lo + bb.extent().component_mul(&t);
                if omega.contains(&x) && e_star.gauge(&x) > 1.0 + 1e-9 {
                    return Err(Error::Precondition("shape is not contained in the scaled ellipsoid".into()));
                }
            }
        }
    }
    let outer: InclusionShape = e_star.clone().into();
    let q = contact.q;
    let mut results = Vec::new();
    for n in [quad.resolution, (quad.resolution / 2).max(2)] {
        let grid = GridSpec::tight_around(&outer.bbox(), n, 3)?;
        let outer_mask = voxelize(&outer, &grid, quad.subsamples)?;
        let src = shell_grid(&outer_mask, &voxelize(omega, &grid, quad.subsamples)?);
        let f = Vec3::from(src.integrate(&FluxKernel, &[q], &q)[0]);
        // occupancies are differenced before summation: bound the cancellation
        // by the kernel magnitude over all of E*
        let mag = SourceGrid::from_mask(&outer_mask).magnitude_bound(&FluxKernel, &q);
        results.push((f, src.volume(), mag));
    }
    let (f, vol, mag) = results[0];
    let est_error = (f - results[1].0).abs() + Vec3::repeat(64.0 * f64::EPSILON * mag);
    Ok(FluxReport {
        t_star: contact.t_star,
        q,
        n: contact.n,
        f_at_q: f,
        n_dot_f: contact.n.dot(&f),
        shell_volume: vol,
        est_error,
        contact_unique: contact.unique,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    /// Off-diagonal pairs `(1,2), (1,3), (2,3)` of `HessN`: standard deviation
    /// over the probes divided by the mean of `tr HessN`.
    pub mixed_dev: [f64; 3],
    /// Mean of the off-diagonal Hessian entries, same normalization.
    pub mixed_mean: [f64; 3],
    pub identical_case_err: f64,
    pub probes: usize,
}

/// Constancy of the mixed second derivatives of `N` over `probes`, and the
/// hydrostatic-eigenstress collapse `∇u = k/(λ+2μ) HessN` between the spectral
/// field `field` (computed for `k·I`) and the quadrature Hessian.
pub fn appendix_checks(
    potentials: &Potentials,
    probes: &[Vec3],
    material: &LameMaterial,
    k: f64,
    field: &GradField,
) -> Result<AppendixReport> {
    if probes.len() < 2 {
        return Err(Error::Precondition("appendix checks need at least two probes".into()));
    }
    let hess: Vec<Mat3> = probes.par_iter().map(|x| potentials.hessians(x)[0]).collect();
    let n = hess.len() as f64;
    let tr = hess.iter().map(|h| h.trace()).sum::<f64>() / n;
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let mut dev = [0.0; 3];
    let mut mean = [0.0; 3];
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let m = hess.iter().map(|h| h[(i, j)]).sum::<f64>() / n;
        let v = hess.iter().map(|h| (h[(i, j)] - m).powi(2)).sum::<f64>() / n;
        dev[p] = v.sqrt() / tr.abs();
        mean[p] = m / tr.abs();
    }
    let coef = k / (material.lambda + 2.0 * material.mu);
    let mut worst: f64 = 0.0;
    for (x, h) in probes.iter().zip(hess.iter()) {
        let reference = h * coef;
        worst = worst.max((field.sample(x) - reference).norm() / reference.norm());
    }
    Ok(AppendixReport { mixed_dev: dev, mixed_mean: mean, identical_case_err: worst, probes: probes.len() })
}

/// Spectral field of the hydrostatic eigenstress `k·I` on a cubic grid.
pub fn hydrostatic_field(shape: &InclusionShape, material: &LameMaterial, k: f64, n: usize, padding: f64, subsamples: usize) -> Result<GradField> {
    let grid = GridSpec::cubic_around(&shape.bbox(), n, padding)?;
    solve_spectral(&voxelize(shape, &grid, subsamples)?, material, &Eigenstress::from_principal([k; 3])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::random_probes;
    use eshelby_core::ferrers::ferrers_coefficients;
    use eshelby_core::shape::Cuboid;

    fn spec(n: usize) -> QuadratureSpec {
        QuadratureSpec { resolution: n, subsamples: 4 }
    }

    fn ball_at(c: Vec3) -> InclusionShape {
        InclusionShape::from(Ellipsoid::ball(c, 1.0).unwrap()).with_convex(true)
    }

    #[test]
    fn minimum_of_ball() {
        let s = ball_at(Vec3::zeros());
        let p = Potentials::new(&s, spec(24)).unwrap();
        let m = find_potential_minimum(&s, &p).unwrap();
        assert!(m.point.norm() < 1e-6, "{:?}", m.point);
        assert!((m.hessian - Mat3::identity() / 3.0).amax() < 2e-3);
    }

    #[test]
    fn minimum_is_translation_covariant() {
        let c = Vec3::new(1.0, 2.0, 3.0);
        let s = ball_at(c);
        let p = Potentials::new(&s, spec(24)).unwrap();
        let m = find_potential_minimum(&s, &p).unwrap();
        assert!((m.point - c).norm() < 1e-6);
    }

    #[test]
    fn minimum_of_ellipsoid_matches_ferrers() {
        let c = Vec3::new(0.1, -0.2, 0.05);
        let e = Ellipsoid::axis_aligned(c, Vec3::new(1.0, 0.7, 0.4)).unwrap();
        let s = InclusionShape::from(e).with_convex(true);
        let p = Potentials::new(&s, spec(32)).unwrap();
        let m = find_potential_minimum(&s, &p).unwrap();
        let fc = ferrers_coefficients(&Vec3::new(1.0, 0.7, 0.4)).unwrap();
        assert!((m.point - c).norm() < 1e-4);
        assert!((m.hessian - Mat3::from_diagonal(&(fc.c * 2.0))).amax() < 3e-3, "{}", m.hessian);
    }

    #[test]
    fn nonconvex_rejected() {
        let s = InclusionShape::from(Ellipsoid::ball(Vec3::zeros(), 1.0).unwrap()).with_convex(false);
        let p = Potentials::new(&s, spec(8)).unwrap();
        assert!(find_potential_minimum(&s, &p).is_err());
    }

    #[test]
    fn inscribed_ball_in_cube() {
        let s: InclusionShape = Cuboid::new(Vec3::zeros(), Vec3::repeat(0.5)).unwrap().into();
        let unit = Ellipsoid::ball(Vec3::zeros(), 1.0).unwrap();
        let t = inscribed_scale(&s, &unit, 2000).unwrap();
        assert!((t - 0.5).abs() < 1e-3);
    }

    #[test]
    fn chord_of_ball() {
        let e = Ellipsoid::ball(Vec3::new(0.0, 0.0, 1.0), 2.0).unwrap();
        let (lo, hi) = chord(&e, 0.0, 0.0).unwrap();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
        assert!(chord(&e, 3.0, 0.0).is_none());
    }

    #[test]
    fn theorem1_on_ball() {
        let s = ball_at(Vec3::zeros());
        let p = Potentials::new(&s, spec(24)).unwrap();
        let r = check_theorem1(&s, &LameMaterial::new(1.0, 1.0).unwrap(), 1.0, 2.0, &p, &Thresholds::default()).unwrap();
        assert!(r.hessian_posdef);
        assert!(r.trace_err < 2e-2);
        assert!(r.residual_x3 < 1e-2, "{}", r.residual_x3);
        assert!((r.ellipsoid_e.semi_axes - Vec3::repeat(1.0)).amax() < 1e-2);
        assert!(r.consistent);
        assert!(check_theorem1(&s, &LameMaterial::new(1.0, 1.0).unwrap(), 1.0, 1.0, &p, &Thresholds::default()).is_err());
    }

    #[test]
    fn theorem2_dependent_materials_skip() {
        let s = ball_at(Vec3::zeros());
        let p = Potentials::new(&s, spec(8)).unwrap();
        let a = LameMaterial::new(1.0, 1.0).unwrap();
        let b = LameMaterial::new(2.0, 2.0).unwrap();
        let r = check_theorem2([&a, &b], 1.0, 2.0, &p, &[], &Thresholds::default()).unwrap();
        assert!(!r.independent);
        assert_eq!(r.verdict, Verdict::Skipped);
        assert!(materials_independent(&a, &LameMaterial::new(1.0, 2.0).unwrap()));
    }

    #[test]
    fn theorem2_ball_is_consistent() {
        let s = ball_at(Vec3::zeros());
        let p = Potentials::new(&s, spec(24)).unwrap();
        let probes = random_probes(&s, 60, 0.15, 3).unwrap();
        let a = LameMaterial::new(1.0, 1.0).unwrap();
        let b = LameMaterial::new(1.0, 2.0).unwrap();
        let r = check_theorem2([&a, &b], 1.0, 2.0, &p, &probes, &Thresholds::default()).unwrap();
        assert_eq!(r.verdict, Verdict::EllipsoidConsistent, "{:?}", r.fit);
    }

    #[test]
    fn flux_nested_balls() {
        let e = Ellipsoid::ball(Vec3::zeros(), 1.0).unwrap();
        let omega: InclusionShape = Ellipsoid::ball(Vec3::new(0.2, 0.0, 0.3), 0.5).unwrap().into();
        let r = flux_test(&e, &omega, spec(24), 2000).unwrap();
        assert!(r.shell_volume > 0.0);
        assert!(r.n_dot_f > 0.0, "{r:?}");
    }

    #[test]
    fn flux_of_empty_shell_vanishes() {
        let e = Ellipsoid::axis_aligned(Vec3::zeros(), Vec3::new(1.0, 0.7, 0.4)).unwrap();
        let omega: InclusionShape = e.clone().into();
        let r = flux_test(&e, &omega, spec(24), 2000).unwrap();
        assert!((r.t_star - 1.0).abs() < 1e-9);
        assert!(r.f_at_q.norm() < 3.0 * r.est_error.norm(), "{r:?}");
    }

    #[test]
    fn appendix_on_axis_aligned_ellipsoid() {
        let e = Ellipsoid::axis_aligned(Vec3::zeros(), Vec3::new(1.0, 0.7, 0.4)).unwrap();
        let s: InclusionShape = e.into();
        let p = Potentials::new(&s, spec(24)).unwrap();
        let probes = random_probes(&s, 12, 0.15, 5).unwrap();
        let mat = LameMaterial::new(1.0, 1.0).unwrap();
        let f = hydrostatic_field(&s, &mat, 1.0, 16, 3.0, 2).unwrap();
        let r = appendix_checks(&p, &probes, &mat, 1.0, &f).unwrap();
        assert!(r.mixed_dev.iter().all(|d| *d < 1e-2), "{r:?}");
        assert!(r.mixed_mean.iter().all(|d| d.abs() < 1e-2), "{r:?}");
    }

    #[test]
    fn appendix_identical_case_on_ball() {
        let s = ball_at(Vec3::zeros());
        let p = Potentials::new(&s, spec(16)).unwrap();
        let probes = random_probes(&s, 8, 0.3, 5).unwrap();
        let mat = LameMaterial::new(1.0, 2.0).unwrap();
        let f = hydrostatic_field(&s, &mat, 2.0, 64, 3.0, 4).unwrap();
        let r = appendix_checks(&p, &probes, &mat, 2.0, &f).unwrap();
        assert!(r.identical_case_err < 0.02, "{r:?}");
    }
}
