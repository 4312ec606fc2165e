//! Inclusion shapes, grids and the contact scale between an ellipsoid and a shape.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{fibonacci_sphere, is_rotation, Mat3, Vec3};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Aabb {
    pub fn center(&self) -> Vec3 {
        (self.lo + self.hi) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.hi - self.lo
    }

    pub fn max_extent(&self) -> f64 {
        self.extent().max()
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (0..3).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|i| other.lo[i] >= self.lo[i] && other.hi[i] <= self.hi[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub center: Vec3,
    pub semi_axes: Vec3,
    /// Body-to-world rotation: `x = center + rotation · x_body`.
    pub rotation: Mat3,
}

impl Ellipsoid {
    pub fn new(center: Vec3, semi_axes: Vec3, rotation: Mat3) -> Result<Self> {
        if !semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(Error::InvalidShape(format!("semi-axes must be positive, got {:?}", semi_axes.as_slice())));
        }
        if semi_axes.min() < 1e-9 * semi_axes.max() {
            return Err(Error::InvalidShape("degenerate ellipsoid: a semi-axis is below 1e-9 of the largest".into()));
        }
        if !is_rotation(&rotation, 1e-9) {
            return Err(Error::InvalidShape("ellipsoid rotation is not a proper rotation".into()));
        }
        Ok(Self { center, semi_axes, rotation })
    }

    pub fn axis_aligned(center: Vec3, semi_axes: Vec3) -> Result<Self> {
        Self::new(center, semi_axes, Mat3::identity())
    }

    pub fn ball(center: Vec3, radius: f64) -> Result<Self> {
        Self::axis_aligned(center, Vec3::repeat(radius))
    }

    pub fn to_body(&self, x: &Vec3) -> Vec3 {
        self.rotation.transpose() * (x - self.center)
    }

    /// Ellipsoidal gauge: `t` such that `x` lies on the boundary of the
    /// ellipsoid scaled by `t` about its center.
    pub fn gauge(&self, x: &Vec3) -> f64 {
        let b = self.to_body(x);
        b.component_div(&self.semi_axes).norm()
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        self.gauge(x) <= 1.0
    }

    /// Unit outward normal of the level set of the gauge through `x`.
    pub fn outward_normal(&self, x: &Vec3) -> Vec3 {
        let b = self.to_body(x);
        let a2 = self.semi_axes.component_mul(&self.semi_axes);
        (self.rotation * b.component_div(&a2)).normalize()
    }

    pub fn bbox(&self) -> Aabb {
        let mut half = Vec3::zeros();
        for i in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                s += (self.rotation[(i, j)] * self.semi_axes[j]).powi(2);
            }
            half[i] = s.sqrt();
        }
        Aabb { lo: self.center - half, hi: self.center + half }
    }

    pub fn volume(&self) -> f64 {
        4.0 * core::f64::consts::PI * self.semi_axes.product() / 3.0
    }
}

/// `E* = {t x | x ∈ E}` for an ellipsoid centered at the origin.
pub fn scale_about_origin(e: &Ellipsoid, t: f64) -> Result<Ellipsoid> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!("scale factor must be positive, got {t}")));
    }
    if e.center.norm() > 0.0 {
        return Err(Error::Precondition("ellipsoid must be centered at the origin".into()));
    }
    Ellipsoid::new(e.center, e.semi_axes * t, e.rotation)
}

/// Axis-aligned rectangular box.
#[derive(Debug, Clone, PartialEq)]
pub struct Cuboid {
    pub center: Vec3,
    pub half_extents: Vec3,
}

impl Cuboid {
    pub fn new(center: Vec3, half_extents: Vec3) -> Result<Self> {
        if !half_extents.iter().all(|h| h.is_finite() && *h > 0.0) {
            return Err(Error::InvalidShape("box half-extents must be positive".into()));
        }
        Ok(Self { center, half_extents })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        (0..3).all(|i| (x[i] - self.center[i]).abs() <= self.half_extents[i])
    }
}

/// `Σ |x_i / a_i|^p ≤ 1`, axis-aligned, `p ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superellipsoid {
    pub center: Vec3,
    pub semi_axes: Vec3,
    pub exponent: f64,
}

impl Superellipsoid {
    pub fn new(center: Vec3, semi_axes: Vec3, exponent: f64) -> Result<Self> {
        if !semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(Error::InvalidShape("superellipsoid semi-axes must be positive".into()));
        }
        if !(exponent >= 2.0 && exponent.is_finite()) {
            return Err(Error::InvalidShape(format!("superellipsoid exponent must be >= 2, got {exponent}")));
        }
        Ok(Self { center, semi_axes, exponent })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        let mut s = 0.0;
        for i in 0..3 {
            s += ((x[i] - self.center[i]) / self.semi_axes[i]).abs().powf(self.exponent);
        }
        s <= 1.0
    }

    pub fn volume(&self) -> f64 {
        let p = self.exponent;
        let g = libm::tgamma(1.0 + 1.0 / p);
        8.0 * self.semi_axes.product() * g * g * g / libm::tgamma(1.0 + 3.0 / p)
    }
}

/// A rectilinear grid of `dims` voxels covering `[origin, origin + lengths]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: [usize; 3],
    pub origin: Vec3,
    pub lengths: Vec3,
    pub padding_factor: f64,
}

impl GridSpec {
    pub fn new(dims: [usize; 3], origin: Vec3, lengths: Vec3, padding_factor: f64) -> Result<Self> {
        if dims.iter().any(|&n| n == 0) {
            return Err(Error::InvalidGrid("resolution must be positive on every axis".into()));
        }
        if !lengths.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::InvalidGrid("grid edge lengths must be positive".into()));
        }
        if !(padding_factor >= 1.0) {
            return Err(Error::InvalidGrid(format!("padding factor must be >= 1, got {padding_factor}")));
        }
        Ok(Self { dims, origin, lengths, padding_factor })
    }

    /// Cubic periodic cell of edge `padding · max_extent(bbox)` centered on the
    /// box, with `n` voxels per edge.
    pub fn cubic_around(bbox: &Aabb, n: usize, padding: f64) -> Result<Self> {
        let edge = padding * bbox.max_extent();
        let lengths = Vec3::repeat(edge);
        Self::new([n; 3], bbox.center() - lengths * 0.5, lengths, padding)
    }

    /// Cubic voxels of edge `max_extent / n`, covering the box plus `margin`
    /// voxels on every side.
    pub fn tight_around(bbox: &Aabb, n: usize, margin: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("resolution must be positive".into()));
        }
        let h = bbox.max_extent() / n as f64;
        let ext = bbox.extent();
        let mut dims = [0usize; 3];
        for i in 0..3 {
            dims[i] = (ext[i] / h - 1e-9).ceil().max(1.0) as usize + 2 * margin;
        }
        let lengths = Vec3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * h;
        let origin = bbox.center() - lengths * 0.5;
        Self::new(dims, origin, lengths, 1.0)
    }

    pub fn spacing(&self) -> Vec3 {
        Vec3::new(
            self.lengths[0] / self.dims[0] as f64,
            self.lengths[1] / self.dims[1] as f64,
            self.lengths[2] / self.dims[2] as f64,
        )
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing().product()
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let r = idx / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    pub fn voxel_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let h = self.spacing();
        self.origin + Vec3::new((i as f64 + 0.5) * h[0], (j as f64 + 0.5) * h[1], (k as f64 + 0.5) * h[2])
    }

    /// Voxel containing `x`, if inside the grid.
    pub fn locate(&self, x: &Vec3) -> Option<[usize; 3]> {
        let h = self.spacing();
        let mut out = [0usize; 3];
        for a in 0..3 {
            let u = (x[a] - self.origin[a]) / h[a];
            if !(u >= 0.0) || u >= self.dims[a] as f64 {
                return None;
            }
            out[a] = u as usize;
        }
        Some(out)
    }

    pub fn bbox(&self) -> Aabb {
        Aabb { lo: self.origin, hi: self.origin + self.lengths }
    }

    /// Voxel aspect ratio (largest / smallest spacing).
    pub fn aspect_ratio(&self) -> f64 {
        let h = self.spacing();
        h.max() / h.min()
    }

    pub fn aspect_ok(&self) -> bool {
        self.aspect_ratio() <= 2.0
    }

    /// The shape's bounding box scaled by the padding factor about its center
    /// must fit inside the grid box.
    pub fn check_covers(&self, bbox: &Aabb) -> Result<()> {
        let c = bbox.center();
        let half = bbox.extent() * (0.5 * self.padding_factor);
        let padded = Aabb { lo: c - half, hi: c + half };
        let tol = 1e-9 * self.lengths.max();
        let grid = self.bbox();
        let grown = Aabb { lo: grid.lo - Vec3::repeat(tol), hi: grid.hi + Vec3::repeat(tol) };
        if grown.contains_box(&padded) {
            Ok(())
        } else {
            Err(Error::InvalidGrid("grid box does not contain the padded bounding box of the shape".into()))
        }
    }
}

/// Occupancy fractions on a grid. Centroids of the occupied part of each
/// voxel are kept when the mask came from voxelizing an analytic shape.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelMask {
    pub grid: GridSpec,
    pub fractions: Vec<f64>,
    pub centroids: Option<Vec<Vec3>>,
}

impl VoxelMask {
    pub fn new(grid: GridSpec, fractions: Vec<f64>) -> Result<Self> {
        if fractions.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} occupancy values, got {}",
                grid.len(),
                fractions.len()
            )));
        }
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidShape("occupancy fractions must lie in [0, 1]".into()));
        }
        Ok(Self { grid, fractions, centroids: None })
    }

    /// Like [`VoxelMask::new`] but also requires a single 6-connected component.
    pub fn new_connected(grid: GridSpec, fractions: Vec<f64>) -> Result<Self> {
        let m = Self::new(grid, fractions)?;
        match m.component_count() {
            1 => Ok(m),
            0 => Err(Error::InvalidShape("voxel mask is empty".into())),
            n => Err(Error::InvalidShape(format!("voxel mask has {n} disconnected components"))),
        }
    }

    pub fn fraction(&self, i: usize, j: usize, k: usize) -> f64 {
        self.fractions[self.grid.index(i, j, k)]
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        self.grid
            .locate(x)
            .is_some_and(|[i, j, k]| self.fraction(i, j, k) > 0.5)
    }

    pub fn volume(&self) -> f64 {
        self.fractions.iter().sum::<f64>() * self.grid.voxel_volume()
    }

    /// Bounding box of voxels with positive occupancy (whole voxels).
    pub fn occupied_bbox(&self) -> Option<Aabb> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for (idx, &f) in self.fractions.iter().enumerate() {
            if f > 0.0 {
                any = true;
                let ijk = self.grid.unindex(idx);
                for a in 0..3 {
                    lo[a] = lo[a].min(ijk[a]);
                    hi[a] = hi[a].max(ijk[a] + 1);
                }
            }
        }
        if !any {
            return None;
        }
        let h = self.grid.spacing();
        let o = self.grid.origin;
        Some(Aabb {
            lo: Vec3::new(o[0] + lo[0] as f64 * h[0], o[1] + lo[1] as f64 * h[1], o[2] + lo[2] as f64 * h[2]),
            hi: Vec3::new(o[0] + hi[0] as f64 * h[0], o[1] + hi[1] as f64 * h[1], o[2] + hi[2] as f64 * h[2]),
        })
    }

    /// Number of 6-connected components of voxels with occupancy > 0.5.
    pub fn component_count(&self) -> usize {
        let [nx, ny, nz] = self.grid.dims;
        let mut seen = alloc::vec![false; self.fractions.len()];
        let mut stack = Vec::new();
        let mut count = 0;
        for start in 0..self.fractions.len() {
            if seen[start] || self.fractions[start] <= 0.5 {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let [i, j, k] = self.grid.unindex(idx);
                let mut visit = |ii: usize, jj: usize, kk: usize| {
                    let n = self.grid.index(ii, jj, kk);
                    if !seen[n] && self.fractions[n] > 0.5 {
                        seen[n] = true;
                        stack.push(n);
                    }
                };
                if i > 0 {
                    visit(i - 1, j, k);
                }
                if i + 1 < nx {
                    visit(i + 1, j, k);
                }
                if j > 0 {
                    visit(i, j - 1, k);
                }
                if j + 1 < ny {
                    visit(i, j + 1, k);
                }
                if k > 0 {
                    visit(i, j, k - 1);
                }
                if k + 1 < nz {
                    visit(i, j, k + 1);
                }
            }
        }
        count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    Ellipsoid(Ellipsoid),
    Box(Cuboid),
    Superellipsoid(Superellipsoid),
    VoxelMask(VoxelMask),
    Difference { outer: Box<InclusionShape>, inner: Box<InclusionShape> },
}

/// An inclusion domain with declared (not computed) convexity.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionShape {
    pub kind: ShapeKind,
    pub convex: bool,
}

impl From<Ellipsoid> for InclusionShape {
    fn from(e: Ellipsoid) -> Self {
        Self { kind: ShapeKind::Ellipsoid(e), convex: true }
    }
}

impl From<Cuboid> for InclusionShape {
    fn from(b: Cuboid) -> Self {
        Self { kind: ShapeKind::Box(b), convex: true }
    }
}

impl From<Superellipsoid> for InclusionShape {
    fn from(s: Superellipsoid) -> Self {
        Self { kind: ShapeKind::Superellipsoid(s), convex: true }
    }
}

impl From<VoxelMask> for InclusionShape {
    fn from(m: VoxelMask) -> Self {
        Self { kind: ShapeKind::VoxelMask(m), convex: false }
    }
}

impl InclusionShape {
    pub fn with_convex(mut self, convex: bool) -> Self {
        self.convex = convex;
        self
    }

    /// `outer \ inner`, validated by checking `inner ⊆ outer` on a lattice of
    /// points over the inner bounding box.
    pub fn difference(outer: InclusionShape, inner: InclusionShape) -> Result<Self> {
        let bb = inner.bbox();
        let n = 24;
        let ext = bb.extent();
        for k in 0..=n {
            for j in 0..=n {
                for i in 0..=n {
                    let x = bb.lo
                        + Vec3::new(
                            ext[0] * i as f64 / n as f64,
                            ext[1] * j as f64 / n as f64,
                            ext[2] * k as f64 / n as f64,
                        );
                    if inner.contains(&x) && !outer.contains(&x) {
                        return Err(Error::InvalidShape(format!(
                            "difference requires inner within outer; ({:.6}, {:.6}, {:.6}) is not",
                            x[0], x[1], x[2]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            kind: ShapeKind::Difference { outer: Box::new(outer), inner: Box::new(inner) },
            convex: false,
        })
    }

    pub fn contains(&self, x: &Vec3) -> bool {
        match &self.kind {
            ShapeKind::Ellipsoid(e) => e.contains(x),
            ShapeKind::Box(b) => b.contains(x),
            ShapeKind::Superellipsoid(s) => s.contains(x),
            ShapeKind::VoxelMask(m) => m.contains(x),
            ShapeKind::Difference { outer, inner } => outer.contains(x) && !inner.contains(x),
        }
    }

    pub fn bbox(&self) -> Aabb {
        match &self.kind {
            ShapeKind::Ellipsoid(e) => e.bbox(),
            ShapeKind::Box(b) => Aabb { lo: b.center - b.half_extents, hi: b.center + b.half_extents },
            ShapeKind::Superellipsoid(s) => Aabb { lo: s.center - s.semi_axes, hi: s.center + s.semi_axes },
            ShapeKind::VoxelMask(m) => m.occupied_bbox().unwrap_or_else(|| m.grid.bbox()),
            ShapeKind::Difference { outer, .. } => outer.bbox(),
        }
    }

    /// Exact volume for analytic variants; occupancy sum for masks.
    pub fn volume(&self) -> f64 {
        match &self.kind {
            ShapeKind::Ellipsoid(e) => e.volume(),
            ShapeKind::Box(b) => 8.0 * b.half_extents.product(),
            ShapeKind::Superellipsoid(s) => s.volume(),
            ShapeKind::VoxelMask(m) => m.volume(),
            ShapeKind::Difference { outer, inner } => outer.volume() - inner.volume(),
        }
    }

    /// Whether [`InclusionShape::volume`] is a closed-form value.
    pub fn has_analytic_volume(&self) -> bool {
        match &self.kind {
            ShapeKind::VoxelMask(_) => false,
            ShapeKind::Difference { outer, inner } => outer.has_analytic_volume() && inner.has_analytic_volume(),
            _ => true,
        }
    }

    /// Smallest semi-extent, used to size interior erosion margins.
    pub fn min_semi_extent(&self) -> f64 {
        match &self.kind {
            ShapeKind::Ellipsoid(e) => e.semi_axes.min(),
            ShapeKind::Box(b) => b.half_extents.min(),
            ShapeKind::Superellipsoid(s) => s.semi_axes.min(),
            _ => 0.5 * self.bbox().extent().min(),
        }
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match &self.kind {
            ShapeKind::Ellipsoid(e) => Some(e),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match &self.kind {
            ShapeKind::Ellipsoid(_) => "ellipsoid",
            ShapeKind::Box(_) => "box",
            ShapeKind::Superellipsoid(_) => "superellipsoid",
            ShapeKind::VoxelMask(_) => "voxel_mask",
            ShapeKind::Difference { .. } => "difference",
        }
    }
}

/// Smallest scaling of `e` about its center that contains `omega`, and where it touches.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPoint {
    pub t_star: f64,
    pub q: Vec3,
    pub n: Vec3,
    pub unique: bool,
    pub samples: usize,
}

/// Outermost boundary crossing of `omega` along the ray `c + s·d`, `s > 0`:
/// march inward from outside the bounding box, then bisect.
fn outermost_crossing(omega: &InclusionShape, c: &Vec3, d: &Vec3, s_max: f64, steps: usize) -> Option<f64> {
    let ds = s_max / steps as f64;
    let mut s_out = s_max;
    for i in (0..steps).rev() {
        let s = ds * i as f64;
        if omega.contains(&(c + d * s)) {
            let (mut a, mut b) = (s, s_out);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if omega.contains(&(c + d * m)) {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(a);
        }
        s_out = s;
    }
    None
}

/// Boundary-sampled contact scale. Directions are a golden-spiral set of
/// `samples` unit vectors plus the ± principal axes of `e`; along each ray from
/// the center of `e` the outermost boundary point of `omega` is located and its
/// gauge evaluated. The best direction is then polished by a shrinking pattern
/// search so `t_star` does not depend on sampling density at smooth contacts.
pub fn contact_scale(e: &Ellipsoid, omega: &InclusionShape, samples: usize) -> Result<ContactPoint> {
    if samples == 0 {
        return Err(Error::Precondition("contact scale needs at least one boundary sample".into()));
    }
    let bb = omega.bbox();
    if !bb.lo.iter().chain(bb.hi.iter()).all(|v| v.is_finite()) {
        return Err(Error::Precondition("shape is unbounded".into()));
    }
    let c = e.center;
    let far = (0..8)
        .map(|m| {
            let corner = Vec3::new(
                if m & 1 == 0 { bb.lo[0] } else { bb.hi[0] },
                if m & 2 == 0 { bb.lo[1] } else { bb.hi[1] },
                if m & 4 == 0 { bb.lo[2] } else { bb.hi[2] },
            );
            (corner - c).norm()
        })
        .fold(0.0f64, f64::max)
        * 1.01
        + 1e-12;
    let steps = 512;
    let mut dirs = fibonacci_sphere(samples);
    for a in 0..3 {
        let axis: Vec3 = e.rotation.column(a).into_owned();
        dirs.push(axis);
        dirs.push(-axis);
    }
    let probe = |d: &Vec3| -> Option<(f64, Vec3)> {
        outermost_crossing(omega, &c, d, far, steps).map(|s| {
            let y = c + d * s;
            (e.gauge(&y), y)
        })
    };
    let mut hits: Vec<(f64, Vec3, Vec3)> = Vec::with_capacity(dirs.len());
    for d in &dirs {
        if let Some((g, y)) = probe(d) {
            hits.push((g, y, *d));
        }
    }
    if hits.is_empty() {
        return Err(Error::Precondition("no boundary points found: shape is empty or misses the ellipsoid center rays".into()));
    }
    let sampled_max = hits.iter().map(|h| h.0).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * sampled_max.abs().max(1e-300);
    let near_max = hits.iter().filter(|h| h.0 >= sampled_max - tol).count();

    // Polish the leading candidates by a shrinking pattern search on the sphere;
    // several starts guard against a secondary local maximum winning the sampling.
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| hits[b].0.partial_cmp(&hits[a].0).unwrap_or(core::cmp::Ordering::Equal));
    let (mut best_g, mut best_y, _) = hits[order[0]];
    for &start in order.iter().take(12) {
        let (mut g0, mut y0, mut d0) = hits[start];
        let mut step = 2.0 * (4.0 / samples as f64).sqrt();
        while step > 1e-10 {
            let t1 = d0.cross(&if d0.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() }).normalize();
            let t2 = d0.cross(&t1);
            let mut improved = false;
            for (u, v) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.7, 0.7), (-0.7, 0.7), (0.7, -0.7), (-0.7, -0.7)] {
                let d = (d0 + (t1 * u + t2 * v) * step).normalize();
                if let Some((g, y)) = probe(&d) {
                    if g > g0 {
                        g0 = g;
                        y0 = y;
                        d0 = d;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if g0 > best_g {
            best_g = g0;
            best_y = y0;
        }
    }

    Ok(ContactPoint {
        t_star: best_g,
        q: best_y,
        n: e.outward_normal(&best_y),
        unique: near_max < 2,
        samples: hits.len(),
    })
}
