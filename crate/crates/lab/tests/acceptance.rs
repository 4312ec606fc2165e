//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eshelby_lab::cli::{parse_sweep, run_sweep};
use eshelby_lab::config;
use eshelby_lab::core::linalg::rotation_from_euler_deg;
use eshelby_lab::core::materials::{material_constants, special_material_eta2, special_material_gamma0, special_material_joint, Eigenstress, LameMaterial};
use eshelby_lab::core::shape::{Cuboid, Ellipsoid, GridSpec, InclusionShape, Superellipsoid};
use eshelby_lab::core::{Mat3, Vec3};
use eshelby_lab::fields::{clear_of_boundary, erosion_margin, interior_voxel_centers, random_probes, relative_difference, solve_potential, spectral_samples, uniformity};
use eshelby_lab::io::Value;
use eshelby_lab::quadrature::{Potentials, QuadratureSpec};
use eshelby_lab::spectral::{solve_spectral, GradField};
use eshelby_lab::theorems::{appendix_checks, check_theorem1, fit_interior_potential, flux_test, hydrostatic_field, Thresholds};
use eshelby_lab::voxel::voxelize;

const PADDING: f64 = 3.0;
const SUBSAMPLES: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unit() -> LameMaterial {
    LameMaterial::new(1.0, 1.0).unwrap()
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn reference_ellipsoid() -> InclusionShape {
    Ellipsoid::axis_aligned(Vec3::zeros(), Vec3::new(1.0, 0.7, 0.4)).unwrap().into()
}

fn cube() -> InclusionShape {
    Cuboid::new(Vec3::zeros(), Vec3::repeat(0.5)).unwrap().into()
}

fn spectral(shape: &InclusionShape, n: usize, sigma: &Eigenstress) -> GradField {
    let grid = GridSpec::cubic_around(&shape.bbox(), n, PADDING).unwrap();
    solve_spectral(&voxelize(shape, &grid, SUBSAMPLES).unwrap(), &unit(), sigma).unwrap()
}

fn rms_dev(field: &GradField, shape: &InclusionShape, margin: f64) -> f64 {
    let pts = interior_voxel_centers(field, shape, margin);
    uniformity(&spectral_samples(field, shape, &pts), margin).unwrap().rms_dev
}

fn random_ellipsoid(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Ellipsoid {
    let axes = Vec3::from_fn(|_, _| rng.random_range(lo..hi));
    let ang = [rng.random_range(0.0..360.0), rng.random_range(0.0..180.0), rng.random_range(0.0..360.0)];
    Ellipsoid::new(Vec3::zeros(), axes, rotation_from_euler_deg(ang)).unwrap()
}

fn sorted_ratios(a: Vec3) -> [f64; 3] {
    let mut v = [a[0], a[1], a[2]];
    v.sort_by(|x, y| y.partial_cmp(x).unwrap());
    [1.0, v[1] / v[0], v[2] / v[0]]
}

/// Shared between criteria 2–4.
struct EllipsoidRun {
    rms: [f64; 3],
    cube_rms: f64,
    field128: GradField,
}

fn c1_sphere() -> Outcome {
    let shape: InclusionShape = Ellipsoid::ball(Vec3::zeros(), 1.0).unwrap().into();
    let f = spectral(&shape, 128, &Eigenstress::from_principal([3.0; 3]).unwrap());
    let margin = erosion_margin(&shape, f.grid.spacing().max());
    let pts = interior_voxel_centers(&f, &shape, margin);
    let expect = Mat3::identity() / 3.0;
    let err = spectral_samples(&f, &shape, &pts).iter().map(|s| (s.grad_u - expect).amax() / (1.0 / 3.0)).fold(0.0, f64::max);
    outcome(err < 1e-2, format!("max componentwise error {err:.3e} over {} interior voxels (< 1e-2)", pts.len()))
}

fn ellipsoid_run() -> EllipsoidRun {
    let shape = reference_ellipsoid();
    let sigma = Eigenstress::from_principal([1.0, 1.0, 2.0]).unwrap();
    let mut fields: Vec<GradField> = [32, 64, 128].iter().map(|&n| spectral(&shape, n, &sigma)).collect();
    // one physical region for all resolutions: the erosion margin of the finest grid
    let margin = erosion_margin(&shape, fields[2].grid.spacing().max());
    let rms = [0, 1, 2].map(|i| rms_dev(&fields[i], &shape, margin));
    let c = cube();
    let cf = spectral(&c, 128, &sigma);
    let cube_rms = rms_dev(&cf, &c, erosion_margin(&c, cf.grid.spacing().max()));
    EllipsoidRun { rms, cube_rms, field128: fields.pop().unwrap() }
}

fn c2_uniformity(r: &EllipsoidRun) -> Outcome {
    let [a, b, c] = r.rms;
    let slack = |x: f64, y: f64| y < x * 1.1;
    let strict = b < a && c < b;
    let pass = c < 2e-2 && slack(a, b) && slack(b, c);
    outcome(pass, format!("rms_dev 32/64/128 = {a:.3e} / {b:.3e} / {c:.3e} (128 < 2e-2, decreasing within 10%; strictly decreasing: {strict})"))
}

fn c3_cube(r: &EllipsoidRun) -> Outcome {
    let ratio = r.cube_rms / r.rms[2];
    outcome(ratio >= 5.0, format!("cube rms_dev {:.3e} = {ratio:.1}× ellipsoid (>= 5×)", r.cube_rms))
}

fn c4_dual_path(r: &EllipsoidRun) -> Outcome {
    let shape = reference_ellipsoid();
    let sigma = Eigenstress::from_principal([1.0, 1.0, 2.0]).unwrap();
    let margin = erosion_margin(&shape, r.field128.grid.spacing().max());
    let probes = random_probes(&shape, 30, margin, 4).unwrap();
    let pot = Potentials::new(&shape, quad()).unwrap();
    let spec = spectral_samples(&r.field128, &shape, &probes);
    let other = solve_potential(&pot, &shape, &unit(), &sigma, &probes).unwrap();
    let worst = spec.iter().zip(&other).map(|(a, b)| relative_difference(&a.grad_u, &b.grad_u)).fold(0.0, f64::max);
    outcome(worst < 2e-2, format!("max relative difference {worst:.3e} over 30 probes (< 2e-2)"))
}

fn c5_golden() -> Outcome {
    let shape: InclusionShape = Ellipsoid::ball(Vec3::zeros(), 1.0).unwrap().into();
    let p = Potentials::new(&shape, quad()).unwrap();
    let o = Vec3::zeros();
    let checks = [
        ("N(0)", p.newtonian(&o).value, -0.5),
        ("N(0.5,0,0)", p.newtonian(&Vec3::new(0.5, 0.0, 0.0)).value, -0.458333),
        ("N(2,0,0)", p.newtonian(&Vec3::new(2.0, 0.0, 0.0)).value, -0.166667),
        ("H(0)", p.biharmonic(&o).value, -0.125),
        ("Ntilde3(0)", p.n_tilde(&o, 2).value, -0.166667),
    ];
    let worst = checks.iter().map(|c| (c.1 - c.2).abs()).fold(0.0, f64::max);
    let vals: Vec<String> = checks.iter().map(|c| format!("{}={:.6}", c.0, c.1)).collect();
    outcome(worst < 1e-3, format!("{} (max error {worst:.2e} < 1e-3)", vals.join(" ")))
}

fn c6_harmonic() -> Outcome {
    let shape = reference_ellipsoid();
    let p = Potentials::new(&shape, quad()).unwrap();
    let h = p.step();
    let probes = clear_of_boundary(&shape, 0.2, 0.3, 3.0 * h);
    let (mut lap, mut bilap, mut dual) = (0.0f64, 0.0f64, 0.0f64);
    let (mut inside, mut outside) = (0, 0);
    for (x, ins) in &probes {
        let chi = if *ins { 1.0 } else { 0.0 };
        if *ins {
            inside += 1;
        } else {
            outside += 1;
        }
        lap = lap.max((p.laplacian_n(x) - chi).abs());
        bilap = bilap.max((p.bilaplacian_h(x) - chi).abs());
        for q in 0..3 {
            let closed = p.d2h_axis(x, q).value;
            let fd = p.d2h_fd(x, q).value;
            dual = dual.max((fd - closed).abs() / closed.abs());
        }
    }
    let pass = lap < 2e-2 && bilap < 5e-2 && dual < 1e-3;
    outcome(
        pass,
        format!("{inside} inside / {outside} outside probes: |ΔN−χ| {lap:.2e} (< 2e-2), |Δ²H−χ| {bilap:.2e} (< 5e-2), ∂²H finite-difference vs closed {dual:.2e} (< 1e-3)"),
    )
}

fn fit_rms(shape: &InclusionShape, seed: u64) -> f64 {
    let p = Potentials::new(shape, quad()).unwrap();
    let probes = random_probes(shape, 60, erosion_margin(shape, p.step()), seed).unwrap();
    fit_interior_potential(&p, &probes).unwrap().fit_rms
}

fn c7_shape_test() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ell: Vec<f64> = (0..3).map(|i| fit_rms(&random_ellipsoid(&mut rng, 0.4, 1.0).into(), 10 + i)).collect();
    let cube_rms = fit_rms(&cube(), 20);
    let sup: InclusionShape = Superellipsoid::new(Vec3::zeros(), Vec3::repeat(1.0), 4.0).unwrap().into();
    let sup_rms = fit_rms(&sup, 21);
    let pass = ell.iter().all(|r| *r < 1e-3) && cube_rms > 1e-2 && sup_rms > 1e-2;
    outcome(
        pass,
        format!(
            "ellipsoid fit_rms {:.2e}, {:.2e}, {:.2e} (< 1e-3); cube {cube_rms:.2e}, superellipsoid(4) {sup_rms:.2e} (> 1e-2)",
            ell[0], ell[1], ell[2]
        ),
    )
}

fn c8_theorem1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inputs = [
        Ellipsoid::new(Vec3::new(0.1, -0.05, 0.2), Vec3::new(1.0, 0.7, 0.4), rotation_from_euler_deg([20.0, 10.0, 35.0])).unwrap(),
        random_ellipsoid(&mut rng, 0.4, 1.0),
    ];
    let mut worst_ratio = 0.0f64;
    let mut worst_res = 0.0f64;
    let mut worst_trace = 0.0f64;
    for e in &inputs {
        let shape: InclusionShape = e.clone().into();
        let p = Potentials::new(&shape, quad()).unwrap();
        let r = check_theorem1(&shape, &unit(), 1.0, 2.0, &p, &Thresholds::default()).unwrap();
        let want = sorted_ratios(e.semi_axes);
        for i in 0..3 {
            worst_ratio = worst_ratio.max((r.axis_ratios[i] - want[i]).abs());
        }
        worst_res = worst_res.max(r.residual_x3);
        worst_trace = worst_trace.max(r.trace_err);
    }
    let pass = worst_ratio < 1e-4 && worst_res < 1e-2 && worst_trace < 2e-2;
    outcome(pass, format!("axis-ratio error {worst_ratio:.2e} (< 1e-4), residual_x3 {worst_res:.2e} (< 1e-2), |tr − 1| {worst_trace:.2e} (< 2e-2)"))
}

fn c9_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_ab = 0.0f64;
    let mut worst_ge = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let mu = rng.random_range(0.05..10.0);
        let lambda = rng.random_range(-2.0 * mu / 3.0 + 1e-3..10.0);
        let k1: f64 = rng.random_range(-5.0..5.0);
        let k3: f64 = rng.random_range(-5.0..5.0);
        if (k1 - k3).abs() < 1e-3 {
            continue;
        }
        n += 1;
        let m = LameMaterial::new(lambda, mu).unwrap();
        let c = material_constants(&m, k1, k3).unwrap();
        let ab = -(lambda + 2.0 * mu) / (lambda + mu);
        let ge = -2.0 * mu * (k1 + k3) / ((lambda + mu) * (k1 - k3));
        worst_ab = worst_ab.max(((c.alpha - c.beta) - ab).abs() / ab.abs().max(1.0));
        worst_ge = worst_ge.max(((c.gamma - c.eta) - ge).abs() / ge.abs().max(1.0));
    }
    let c = material_constants(&unit(), 1.0, 2.0).unwrap();
    let example = (c.alpha - 0.5).abs().max((c.beta - 2.0).abs()).max(c.gamma.abs()).max((c.eta + 3.0).abs());
    let pass = worst_ab < 1e-12 && worst_ge < 1e-12 && example < 1e-12;
    outcome(
        pass,
        format!(
            "α−β {worst_ab:.1e}, γ−η {worst_ge:.1e} over 1000 inputs (< 1e-12); (α,β,γ,η) = ({}, {}, {}, {})",
            c.alpha, c.beta, c.gamma, c.eta
        ),
    )
}

fn c10_special() -> Outcome {
    let g = special_material_gamma0(1.0, 2.0).unwrap();
    let e = special_material_eta2(1.0, 2.0).unwrap();
    let cfg = config::parse("command = \"special-material\"\n[eigenstress]\nk1 = 1.0\nk3 = 2.0\n").unwrap();
    let (_, summary) = run_sweep(&cfg, &parse_sweep("k3/k1=1.5:0.01:3").unwrap()).unwrap();
    let root = match summary.get("joint_determinant.roots") {
        Some(Value::Reals(r)) if r.len() == 1 => r[0],
        _ => f64::NAN,
    };
    let ratio = special_material_joint(1.0, root).ok().and_then(|j| j.ray).map_or(f64::NAN, |r| r.ratio);
    let root_err = (root - (1.0 + SQRT_2)).abs();
    let ratio_err = (ratio - (SQRT_2 - 1.0)).abs();
    let pass = (g.ray.ratio - 1.0).abs() < 1e-12 && (e.printed.ratio - 1.0 / 3.0).abs() < 1e-12 && !e.rays_agree && root_err < 1e-6 && ratio_err < 1e-9;
    outcome(
        pass,
        format!(
            "gamma0 ratio {}, eta2 ratio {:.6} (literal {:.6}, disagreement flagged: {}), sweep root {root:.9} (err {root_err:.1e} < 1e-6), joint ratio err {ratio_err:.1e} (< 1e-9)",
            g.ray.ratio, e.printed.ratio, e.literal.ratio, !e.rays_agree
        ),
    )
}

fn c11_flux() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut min_ndf = f64::INFINITY;
    let mut all_positive = true;
    for _ in 0..10 {
        let e = random_ellipsoid(&mut rng, 0.6, 1.2);
        let amin = e.semi_axes.min();
        // inside the inscribed ball of E, so strictly nested
        let off = Vec3::from_fn(|_, _| rng.random_range(-0.25..0.25)) * amin;
        let inner = Ellipsoid::new(
            off,
            Vec3::from_fn(|_, _| rng.random_range(0.25..0.6)) * amin,
            rotation_from_euler_deg([rng.random_range(0.0..360.0), rng.random_range(0.0..180.0), rng.random_range(0.0..360.0)]),
        )
        .unwrap();
        let r = flux_test(&e, &inner.into(), quad(), 20_000).unwrap();
        all_positive &= r.n_dot_f > 0.0;
        min_ndf = min_ndf.min(r.n_dot_f);
    }
    let e = Ellipsoid::new(Vec3::zeros(), Vec3::new(1.0, 0.7, 0.4), rotation_from_euler_deg([10.0, 20.0, 30.0])).unwrap();
    let r = flux_test(&e, &e.clone().into(), quad(), 20_000).unwrap();
    let (fnorm, err) = (r.f_at_q.norm(), r.est_error.norm());
    let pass = all_positive && fnorm < 3.0 * err;
    outcome(pass, format!("min n·F over 10 nested pairs {min_ndf:.3e} (> 0); Ω = E*: ‖F‖ {fnorm:.2e} vs 3× error {:.2e}", 3.0 * err))
}

fn mixed_dev(shape: &InclusionShape, seed: u64) -> (f64, f64) {
    let p = Potentials::new(shape, quad()).unwrap();
    let field = hydrostatic_field(shape, &unit(), 1.0, 64, PADDING, SUBSAMPLES).unwrap();
    let margin = erosion_margin(shape, field.grid.spacing().max());
    let probes = random_probes(shape, 30, margin, seed).unwrap();
    let r = appendix_checks(&p, &probes, &unit(), 1.0, &field).unwrap();
    (r.mixed_dev.iter().copied().fold(0.0, f64::max), r.identical_case_err)
}

fn c12_appendix() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ells = [reference_ellipsoid(), random_ellipsoid(&mut rng, 0.4, 1.0).into()];
    let ell: Vec<f64> = ells.iter().enumerate().map(|(i, s)| mixed_dev(s, 30 + i as u64).0).collect();
    let (cube_dev, _) = mixed_dev(&cube(), 40);
    let pass = ell.iter().all(|d| *d < 1e-2) && cube_dev > 1e-2;
    outcome(pass, format!("ellipsoid mixed_dev {:.2e}, {:.2e} (< 1e-2); cube {cube_dev:.2e} (> 1e-2)", ell[0], ell[1]))
}

fn main() {
    // libtest flags (e.g. --nocapture) are accepted and ignored
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome, f64)> = Vec::new();
    let mut timed = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!("{} {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o, secs));
    };
    timed("1 sphere hydrostatic exactness", &mut c1_sphere);
    let run = ellipsoid_run();
    timed("2 ellipsoid uniformity", &mut || c2_uniformity(&run));
    timed("3 cube non-uniformity", &mut || c3_cube(&run));
    timed("4 dual-path field agreement", &mut || c4_dual_path(&run));
    timed("5 potential golden values", &mut c5_golden);
    timed("6 harmonic/biharmonic structure", &mut c6_harmonic);
    timed("7 quadratic shape test", &mut c7_shape_test);
    timed("8 theorem-1 pipeline", &mut c8_theorem1);
    timed("9 material-constant identities", &mut c9_identities);
    timed("10 special-material algebra", &mut c10_special);
    timed("11 flux positivity", &mut c11_flux);
    timed("12 mixed-derivative constancy", &mut c12_appendix);
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("acceptance: {} passed, {failed} failed in {:.0}s", results.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
