//! FFT evaluation of the interior displacement gradient of a uniform
//! eigenstress on a periodic, padded voxel box.

use std::f64::consts::PI;

use eshelby_core::materials::{Eigenstress, LameMaterial};
use eshelby_core::shape::{GridSpec, VoxelMask};
use eshelby_core::{Error, Mat3, Result, Vec3};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub const MIN_PADDING: f64 = 3.0;

/// `Γ_pl(ξ) = L_pq(ξ) σ_qj ξ_j ξ_l` for an isotropic medium, in closed form:
/// `(1/μ)[(σn)_p n_l − c (n·σn) n_p n_l]` with `n = ξ/|ξ|`, `c = (λ+μ)/(λ+2μ)`.
/// Homogeneous of degree zero in `ξ`.
pub fn green_operator(material: &LameMaterial, sigma: &Mat3, xi: &Vec3) -> Mat3 {
    let n = xi / xi.norm();
    let sn = sigma * n;
    let c = (material.lambda + material.mu) / (material.lambda + 2.0 * material.mu);
    (sn * n.transpose() - n * n.transpose() * (c * n.dot(&sn))) / material.mu
}

/// Average of [`green_operator`] over directions; used for the zero mode so
/// the periodic sum approximates the infinite-body integral.
pub fn green_operator_mean(material: &LameMaterial, sigma: &Mat3) -> Mat3 {
    let (l, m) = (material.lambda, material.mu);
    let c = (l + m) / (m * (l + 2.0 * m));
    sigma / (3.0 * m) - (sigma * 2.0 + Mat3::identity() * sigma.trace()) * (c / 15.0)
}

/// Nine real components `∂u_p/∂x_l` on the voxel centers of a grid; index `3p + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradField {
    pub grid: GridSpec,
    pub components: Vec<[f64; 9]>,
}

impl GradField {
    pub fn at_index(&self, idx: usize) -> Mat3 {
        Mat3::from_row_slice(&self.components[idx])
    }

    /// Periodic trilinear interpolation between voxel centers.
    pub fn sample(&self, x: &Vec3) -> Mat3 {
        let g = &self.grid;
        let h = g.spacing();
        let mut base = [0i64; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let u = (x[a] - g.origin[a]) / h[a] - 0.5;
            let f = u.floor();
            base[a] = f as i64;
            t[a] = u - f;
        }
        let wrap = |v: i64, n: usize| v.rem_euclid(n as i64) as usize;
        let mut acc = [0.0; 9];
        for corner in 0..8 {
            let o = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            let mut ijk = [0usize; 3];
            for a in 0..3 {
                w *= if o[a] == 1 { t[a] } else { 1.0 - t[a] };
                ijk[a] = wrap(base[a] + o[a] as i64, g.dims[a]);
            }
            if w == 0.0 {
                continue;
            }
            let v = &self.components[g.index(ijk[0], ijk[1], ijk[2])];
            for c in 0..9 {
                acc[c] += w * v[c];
            }
        }
        Mat3::from_row_slice(&acc)
    }
}

/// In-place 3D transform, x fastest, by 1D passes along each axis.
fn fft3(data: &mut [Complex<f64>], dims: [usize; 3], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = |p: &mut FftPlanner<f64>, n: usize| -> std::sync::Arc<dyn Fft<f64>> {
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    };
    let [nx, ny, nz] = dims;
    let fx = plan(&mut planner, nx);
    data.par_chunks_mut(nx * ny).for_each(|slab| fx.process(slab));

    let fy = plan(&mut planner, ny);
    data.par_chunks_mut(nx * ny).for_each(|slab| {
        let mut line = vec![Complex::default(); ny * nx];
        for j in 0..ny {
            for i in 0..nx {
                line[i * ny + j] = slab[i + nx * j];
            }
        }
        fy.process(&mut line);
        for j in 0..ny {
            for i in 0..nx {
                slab[i + nx * j] = line[i * ny + j];
            }
        }
    });

    let fz = plan(&mut planner, nz);
    let plane = nx * ny;
    let mut lines = vec![Complex::default(); plane * nz];
    for k in 0..nz {
        for p in 0..plane {
            lines[p * nz + k] = data[p + plane * k];
        }
    }
    lines.par_chunks_mut(nz * nx).for_each(|chunk| fz.process(chunk));
    for k in 0..nz {
        for p in 0..plane {
            data[p + plane * k] = lines[p * nz + k];
        }
    }
}

fn frequency(m: usize, n: usize, length: f64) -> f64 {
    let s = if m < n.div_ceil(2) { m as i64 } else { m as i64 - n as i64 };
    2.0 * PI * s as f64 / length
}

/// Separable smoothing applied to the occupancy before the Green operator.
///
/// The truncated Fourier series of the jump at the inclusion boundary rings
/// with amplitude decaying only like `h/d` at distance `d`. A compact window
/// of reach `r` cells replaces the occupancy `χ` by `ρ * χ`; since the
/// solution is linear and translation invariant in the occupancy, the field
/// at points farther than `r` cells from the boundary is the `ρ`-average of
/// the unsmoothed field, while the ringing is damped by the window's spectral
/// decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// Plain occupancy.
    None,
    /// Linear B-spline (tent), reach one cell: response `sinc²(ξh/2)` per axis.
    Tent,
    /// Cubic B-spline, reach two cells: response `sinc⁴(ξh/2)` per axis.
    /// Within the erosion margin (two cells plus a shape fraction) of the
    /// uniformity metric, and damps the ringing well below the tent.
    #[default]
    CubicBSpline,
}

impl Window {
    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Tent => "tent",
            Self::CubicBSpline => "cubic_bspline",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Self::None),
            "tent" => Some(Self::Tent),
            "cubic_bspline" => Some(Self::CubicBSpline),
            _ => None,
        }
    }

    /// Reach in cells.
    pub fn reach(&self) -> usize {
        match self {
            Self::None => 0,
            Self::Tent => 1,
            Self::CubicBSpline => 2,
        }
    }

    /// Fourier response at dimensionless frequencies `ξ_a h_a`.
    pub fn response(&self, t: &[f64; 3]) -> f64 {
        let power = match self {
            Self::None => return 1.0,
            Self::Tent => 2,
            Self::CubicBSpline => 4,
        };
        t.iter()
            .map(|&x| {
                let y = 0.5 * x;
                if y.abs() < 1e-8 { 1.0 - y * y / 6.0 } else { y.sin() / y }.powi(power)
            })
            .product()
    }
}

/// Displacement gradient of the eigenstress `sigma` prescribed on the
/// occupancy of `mask`, with the default [`Window`].
pub fn solve_spectral(mask: &VoxelMask, material: &LameMaterial, sigma: &Eigenstress) -> Result<GradField> {
    solve_spectral_with(mask, material, sigma, Window::default())
}

/// Forward transform of the (windowed) occupancy, multiplication by the Green
/// operator at continuous wave vectors, nine inverse transforms. The zero
/// mode uses the direction-averaged operator.
pub fn solve_spectral_with(mask: &VoxelMask, material: &LameMaterial, sigma: &Eigenstress, window: Window) -> Result<GradField> {
    material.check()?;
    let grid = &mask.grid;
    if grid.padding_factor < MIN_PADDING {
        return Err(Error::Precondition(format!(
            "padding factor {} is below the minimum {MIN_PADDING} required for the periodic solve",
            grid.padding_factor
        )));
    }
    if let Some(occ) = mask.occupied_bbox() {
        let ext = occ.extent();
        for a in 0..3 {
            // partially occupied boundary cells widen the occupied box by up to a cell per side
            if grid.lengths[a] < MIN_PADDING * (ext[a] - 2.0 * grid.spacing()[a]) * (1.0 - 1e-9) {
                return Err(Error::Precondition(format!(
                    "box edge {a} ({}) is shorter than {MIN_PADDING} times the occupied extent ({})",
                    grid.lengths[a], ext[a]
                )));
            }
        }
    }
    let dims = grid.dims;
    let total = grid.len();
    let s = sigma.tensor;

    let mut occ: Vec<Complex<f64>> = mask.fractions.iter().map(|&f| Complex::new(f, 0.0)).collect();
    fft3(&mut occ, dims, false);
    let freq: Vec<Vec<f64>> = (0..3).map(|a| (0..dims[a]).map(|m| frequency(m, dims[a], grid.lengths[a])).collect()).collect();
    let mean_op = green_operator_mean(material, &s);
    let norm = 1.0 / total as f64;

    let h = grid.spacing();
    let mut components = vec![[0.0; 9]; total];
    let mut buf = vec![Complex::default(); total];
    for p in 0..3 {
        for l in 0..3 {
            buf.par_iter_mut().enumerate().for_each(|(idx, out)| {
                let [i, j, k] = grid.unindex(idx);
                let g = if idx == 0 {
                    mean_op[(p, l)]
                } else {
                    let xi = Vec3::new(freq[0][i], freq[1][j], freq[2][k]);
                    green_operator(material, &s, &xi)[(p, l)]
                };
                let w = window.response(&[freq[0][i] * h[0], freq[1][j] * h[1], freq[2][k] * h[2]]);
                *out = occ[idx] * (g * norm * w);
            });
            fft3(&mut buf, dims, true);
            let c = 3 * p + l;
            components.par_iter_mut().zip(buf.par_iter()).for_each(|(dst, v)| dst[c] = v.re);
        }
    }
    Ok(GradField { grid: grid.clone(), components })
}
