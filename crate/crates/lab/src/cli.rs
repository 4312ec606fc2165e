//! Batch runner: binds a config to the lab operations and writes artifacts.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config error, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

use eshelby_core::materials::{locate_joint_roots, special_material_eta2, special_material_gamma0, special_material_joint};
use eshelby_core::shape::{GridSpec, InclusionShape, ShapeKind};
use eshelby_core::Mat3;

use crate::config::{self, appendix_k, Command, ConfigError, ExperimentConfig, LoadError};
use crate::fields::{erosion_margin, interior_voxel_centers, random_probes, relative_difference, solve_potential, spectral_samples, uniformity};
use crate::io::{self, Report, Value};
use crate::quadrature::{newtonian_analytic, Method, PotentialKind, Potentials};
use crate::spectral::{solve_spectral_with, GradField};
use crate::theorems::{appendix_checks, check_theorem1, check_theorem2, fit_interior_potential, flux_test, hydrostatic_field};
use crate::voxel::voxelize;

#[derive(Debug, Parser)]
#[command(name = "eshelby", version, about = "Eshelby inclusion experiments: potentials, fields and uniformity checks")]
pub struct Args {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// `key=v1,v2,...`; a value may be a range `lo:step:hi`. The key is a
    /// dotted config path (e.g. `grid.resolution`) or `k3/k1`.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Failure {
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure in {module}: {reason}")]
    Numerical { module: &'static str, reason: String },
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical { .. } => 3,
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io(m) => Failure::Io(m),
            LoadError::Config(c) => Failure::Config(c),
        }
    }
}

fn numerical(module: &'static str) -> impl Fn(eshelby_core::Error) -> Failure {
    move |e| Failure::Numerical { module, reason: e.to_string() }
}

/// A named file body produced by a run.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub suffix: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

type FResult<T> = std::result::Result<T, Failure>;

fn put_mat(r: &mut Report, key: &str, m: &Mat3) {
    r.put(key, *m);
}

fn spectral_field(cfg: &ExperimentConfig, shape: &InclusionShape) -> FResult<GradField> {
    let g = &cfg.grid;
    let grid = GridSpec::cubic_around(&shape.bbox(), g.resolution, g.padding).map_err(numerical("geometry"))?;
    let mask = voxelize(shape, &grid, g.subsamples).map_err(numerical("geometry"))?;
    let sigma = cfg.eigenstress()?.build()?;
    solve_spectral_with(&mask, &cfg.material()?, &sigma, g.window()?).map_err(numerical("fields"))
}

fn potentials(cfg: &ExperimentConfig, shape: &InclusionShape) -> FResult<Potentials> {
    Potentials::new(shape, cfg.quadrature.spec()?).map_err(numerical("potentials"))
}

fn probes_for(cfg: &ExperimentConfig, shape: &InclusionShape, spacing: f64) -> FResult<Vec<eshelby_core::Vec3>> {
    let margin = cfg.probes.margin.unwrap_or_else(|| erosion_margin(shape, spacing));
    random_probes(shape, cfg.probes.count, margin, cfg.seed).map_err(numerical("fields"))
}

fn grid_header(r: &mut Report, cfg: &ExperimentConfig, field: &GradField) {
    r.put("resolution", cfg.grid.resolution)
        .put("padding", cfg.grid.padding)
        .put("window", cfg.grid.window.as_str())
        .put("spacing", field.grid.spacing().max());
}

/// Runs one experiment in memory.
pub fn execute(cfg: &ExperimentConfig) -> FResult<Outcome> {
    cfg.validate()?;
    let hash = cfg.hash();
    let mut r = Report::new();
    let mut artifacts = Vec::new();
    r.put("command", cfg.command.name());
    match cfg.command {
        Command::Field => {
            let shape = cfg.shape()?;
            let field = spectral_field(cfg, &shape)?;
            grid_header(&mut r, cfg, &field);
            let pts = probes_for(cfg, &shape, field.grid.spacing().max())?;
            let mut samples = spectral_samples(&field, &shape, &pts);
            let mean = samples.iter().fold(Mat3::zeros(), |a, s| a + s.grad_u) / samples.len() as f64;
            r.put("probes", pts.len());
            put_mat(&mut r, "mean_grad_u", &mean);
            put_mat(&mut r, "mean_strain", &((mean + mean.transpose()) * 0.5));
            put_mat(&mut r, "mean_rotation", &((mean - mean.transpose()) * 0.5));
            if cfg.probes.dual_path {
                let pot = potentials(cfg, &shape)?;
                let sigma = cfg.eigenstress()?.build()?;
                let other = solve_potential(&pot, &shape, &cfg.material()?, &sigma, &pts).map_err(numerical("fields"))?;
                let mut diffs: Vec<f64> = samples.iter().zip(&other).map(|(s, p)| relative_difference(&s.grad_u, &p.grad_u)).collect();
                diffs.sort_by(f64::total_cmp);
                r.put("dual_path_max_rel_diff", *diffs.last().unwrap())
                    .put("dual_path_median_rel_diff", diffs[diffs.len() / 2]);
                samples.extend(other);
            }
            if cfg.wants("csv") {
                artifacts.push(Artifact { suffix: "samples.csv".into(), bytes: io::field_csv(&samples, &hash).into_bytes() });
            }
            if cfg.wants("bin") {
                let bytes = io::encode_field_dump(&field).map_err(|e| Failure::Io(e.to_string()))?;
                artifacts.push(Artifact { suffix: "field.eshf".into(), bytes });
            }
        }
        Command::Uniformity => {
            let shape = cfg.shape()?;
            let field = spectral_field(cfg, &shape)?;
            grid_header(&mut r, cfg, &field);
            let margin = cfg.probes.margin.unwrap_or_else(|| erosion_margin(&shape, field.grid.spacing().max()));
            let pts = interior_voxel_centers(&field, &shape, margin);
            let u = uniformity(&spectral_samples(&field, &shape, &pts), margin).map_err(numerical("fields"))?;
            r.put("n_samples", u.n_samples).put("erosion_margin", u.erosion_margin).put("rms_dev", u.rms_dev).put("max_dev", u.max_dev);
            put_mat(&mut r, "mean_grad_u", &u.mean_grad_u);
            if cfg.wants("bin") {
                let bytes = io::encode_field_dump(&field).map_err(|e| Failure::Io(e.to_string()))?;
                artifacts.push(Artifact { suffix: "field.eshf".into(), bytes });
            }
        }
        Command::Potential => {
            let shape = cfg.shape()?;
            let block = cfg.potential.as_ref().expect("validated");
            let pts: Vec<_> = block.points.iter().map(|p| eshelby_core::Vec3::new(p[0], p[1], p[2])).collect();
            let pot = potentials(cfg, &shape)?;
            let mut samples = Vec::new();
            for kind in block.kinds()? {
                samples.extend(pot.batch(&pts, kind));
            }
            if block.analytic {
                if let ShapeKind::Ellipsoid(e) = &shape.kind {
                    for x in &pts {
                        samples.push(newtonian_analytic(e, x).map_err(numerical("potentials"))?);
                    }
                }
            }
            let worst = samples.iter().filter(|s| s.method == Method::Quadrature).map(|s| s.est_error).fold(0.0, f64::max);
            r.put("points", pts.len()).put("samples", samples.len()).put("max_est_error", worst);
            for s in samples.iter().filter(|s| s.kind == PotentialKind::N && s.method == Method::Quadrature).take(1) {
                r.put("first_n", s.value);
            }
            if cfg.wants("csv") {
                artifacts.push(Artifact { suffix: "samples.csv".into(), bytes: io::potential_csv(&samples, &hash).into_bytes() });
            }
        }
        Command::ShapeTest => {
            let shape = cfg.shape()?;
            let pot = potentials(cfg, &shape)?;
            let pts = probes_for(cfg, &shape, pot.step())?;
            let fit = fit_interior_potential(&pot, &pts).map_err(numerical("theorems"))?;
            let consistent = fit.fit_rms < cfg.thresholds.fit_rms;
            r.put("shape", shape.type_name())
                .put("probes", pts.len())
                .put("fit_rms", fit.fit_rms)
                .put("fit_max", fit.fit_max)
                .put("condition", fit.condition)
                .put("laplacian", fit.laplacian())
                .put("quadratic", consistent)
                .put("verdict", if consistent { "ellipsoid_consistent" } else { "not_ellipsoid" });
            put_mat(&mut r, "hessian", &fit.hessian());
        }
        Command::Theorem1 => {
            let shape = cfg.shape()?;
            let (k1, k3) = cfg.eigenstress()?.two_equal()?;
            let pot = potentials(cfg, &shape)?;
            let t = check_theorem1(&shape, &cfg.material()?, k1, k3, &pot, &cfg.thresholds.into()).map_err(numerical("theorems"))?;
            r.put("k1", t.k1).put("k3", t.k3).put("min_point", t.min_point);
            put_mat(&mut r, "hessian", &t.hessian);
            r.put("hessian_posdef", t.hessian_posdef)
                .put("trace_err", t.trace_err)
                .put("trace_ok", t.trace_err < cfg.thresholds.trace)
                .put("e_center", t.ellipsoid_e.center)
                .put("e_semi_axes", t.ellipsoid_e.semi_axes)
                .put("axis_ratios", t.axis_ratios)
                .put("residual_x3", t.residual_x3)
                .put("columns", t.columns)
                .put("verdict", if t.consistent { "consistent" } else { "inconsistent" });
        }
        Command::Theorem2 => {
            let shape = cfg.shape()?;
            let (k1, k3) = cfg.eigenstress()?.two_equal()?;
            let [m1, m2] = cfg.material_pair()?;
            let pot = potentials(cfg, &shape)?;
            let pts = probes_for(cfg, &shape, pot.step())?;
            let t = check_theorem2([&m1, &m2], k1, k3, &pot, &pts, &cfg.thresholds.into()).map_err(numerical("theorems"))?;
            r.put("independent", t.independent);
            if let Some(fit) = &t.fit {
                r.put("fit_rms", fit.fit_rms).put("fit_max", fit.fit_max).put("condition", fit.condition);
                put_mat(&mut r, "hessian", &fit.hessian());
            }
            r.put("verdict", t.verdict.name());
        }
        Command::Flux => {
            let shape = cfg.shape()?;
            let fb = cfg.flux.as_ref().expect("validated");
            let f = flux_test(&fb.ellipsoid()?, &shape, cfg.quadrature.spec()?, fb.contact_samples).map_err(numerical("theorems"))?;
            let norm = f.f_at_q.norm();
            let err = f.est_error.norm();
            r.put("t_star", f.t_star)
                .put("q", f.q)
                .put("n", f.n)
                .put("f_at_q", f.f_at_q)
                .put("f_norm", norm)
                .put("n_dot_f", f.n_dot_f)
                .put("est_error", f.est_error)
                .put("est_error_norm", err)
                .put("shell_volume", f.shell_volume)
                .put("contact_unique", f.contact_unique)
                .put("positive", f.n_dot_f > 0.0)
                .put("vanishes_within_error", norm < 3.0 * err);
        }
        Command::SpecialMaterial => {
            let (k1, k3) = cfg.eigenstress()?.two_equal()?;
            special_material(&mut r, k1, k3)?;
            if let Some(s) = &cfg.special {
                r.put("joint_roots_k3_over_k1", Value::Reals(locate_joint_roots(s.scan_lo, s.scan_hi, s.scan_step)));
            }
        }
        Command::Appendix => {
            let shape = cfg.shape()?;
            let material = cfg.material()?;
            let k = match &cfg.eigenstress {
                Some(e) => appendix_k(e)?,
                None => 1.0,
            };
            let g = &cfg.grid;
            let field = hydrostatic_field(&shape, &material, k, g.resolution, g.padding, g.subsamples).map_err(numerical("fields"))?;
            let pot = potentials(cfg, &shape)?;
            let pts = probes_for(cfg, &shape, field.grid.spacing().max().max(pot.step()))?;
            let a = appendix_checks(&pot, &pts, &material, k, &field).map_err(numerical("theorems"))?;
            let worst = a.mixed_dev.iter().copied().fold(0.0, f64::max);
            r.put("probes", a.probes)
                .put("mixed_dev", a.mixed_dev)
                .put("mixed_mean", a.mixed_mean)
                .put("mixed_dev_max", worst)
                .put("mixed_constant", worst < cfg.thresholds.mixed_dev)
                .put("identical_case_err", a.identical_case_err);
        }
    }
    Ok(Outcome { report: r, artifacts })
}

fn special_material(r: &mut Report, k1: f64, k3: f64) -> FResult<()> {
    let m = numerical("materials");
    let g = special_material_gamma0(k1, k3).map_err(&m)?;
    r.put("k1", k1)
        .put("k3", k3)
        .put("gamma0_ratio", g.ray.ratio)
        .put("gamma0_admissible", g.ray.admissible)
        .put("same_sign", g.same_sign);
    match special_material_eta2(k1, k3) {
        Ok(e) => {
            r.put("eta2_ratio", e.printed.ratio)
                .put("eta2_admissible", e.printed.admissible)
                .put("eta2_literal_ratio", e.literal.ratio)
                .put("eta2_literal_admissible", e.literal.admissible)
                .put("eta2_rays_agree", e.rays_agree);
        }
        Err(e) => {
            r.put("eta2_status", e.to_string());
        }
    }
    let j = special_material_joint(k1, k3).map_err(&m)?;
    r.put("joint_determinant", j.determinant).put("joint_solvable", j.solvable);
    if let Some(ray) = j.ray {
        r.put("joint_ratio", ray.ratio).put("joint_admissible", ray.admissible);
    }
    Ok(())
}

// ---------------------------------------------------------------- sweeps

/// A parsed `--sweep` argument.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub values: Vec<String>,
}

pub const RATIO_KEY: &str = "k3/k1";

pub fn parse_sweep(arg: &str) -> std::result::Result<Sweep, ConfigError> {
    let err = |m: &str| ConfigError::new("--sweep", m);
    let (key, list) = arg.split_once('=').ok_or_else(|| err("expected key=v1,v2,..."))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(err("empty sweep key"));
    }
    let mut values = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        if parts.len() == 3 {
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(&format!("bad range `{item}`")));
            let (lo, step, hi) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || hi < lo {
                return Err(err(&format!("range `{item}` needs lo <= hi and step > 0")));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            for i in 0..=n {
                // printed with 12 decimals so 1.5 + 91·0.01 reads as 2.41
                let v = lo + i as f64 * step;
                values.push(format!("{}", (v * 1e12).round() / 1e12));
            }
        } else {
            values.push(item.to_string());
        }
    }
    if values.is_empty() {
        return Err(err("empty sweep list"));
    }
    Ok(Sweep { key: key.to_string(), values })
}

/// Config with the swept key set to `value`. The key must exist in the
/// resolved config (after defaults); the new value keeps the old type.
pub fn apply_sweep(cfg: &ExperimentConfig, key: &str, value: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
    let bad = |m: String| ConfigError::new(key, m);
    if key == RATIO_KEY {
        let r: f64 = value.parse().map_err(|_| bad(format!("`{value}` is not a number")))?;
        let mut c = cfg.clone();
        let e = c.eigenstress.as_mut().ok_or_else(|| ConfigError::new("eigenstress", "k3/k1 sweep needs an eigenstress block"))?;
        let k1 = e.k1.ok_or_else(|| ConfigError::new("eigenstress.k1", "k3/k1 sweep needs principal values"))?;
        e.k3 = Some(r * k1);
        return Ok(c);
    }
    let mut doc = toml::Value::try_from(cfg).map_err(|e| bad(e.to_string()))?;
    let mut slot = &mut doc;
    for part in key.split('.') {
        slot = slot
            .as_table_mut()
            .and_then(|t| t.get_mut(part))
            .ok_or_else(|| bad("swept key does not exist in the config".into()))?;
    }
    *slot = match slot {
        toml::Value::Integer(_) => toml::Value::Integer(value.parse().map_err(|_| bad(format!("`{value}` is not an integer")))?),
        toml::Value::Float(_) => toml::Value::Float(value.parse().map_err(|_| bad(format!("`{value}` is not a number")))?),
        toml::Value::Boolean(_) => toml::Value::Boolean(value.parse().map_err(|_| bad(format!("`{value}` is not a boolean")))?),
        toml::Value::String(_) => toml::Value::String(value.to_string()),
        _ => return Err(bad("only scalar keys can be swept".into())),
    };
    let mut out: ExperimentConfig = doc.try_into().map_err(|e: toml::de::Error| bad(e.message().to_string()))?;
    out.base_dir = cfg.base_dir.clone();
    Ok(out)
}

pub const MONOTONE_SLACK: f64 = 0.1;

/// Table of per-value reports plus a summary with monotonicity flags and
/// sign changes of every scalar column.
pub fn run_sweep(cfg: &ExperimentConfig, sweep: &Sweep) -> FResult<(String, Report)> {
    let hash = format!("{}+sweep:{}={}", cfg.hash(), sweep.key, sweep.values.join(","));
    let mut rows = Vec::new();
    for v in &sweep.values {
        let c = apply_sweep(cfg, &sweep.key, v)?;
        rows.push((v.clone(), execute(&c)?.report));
    }
    let mut columns: Vec<String> = Vec::new();
    for (_, r) in &rows {
        for (k, _) in &r.entries {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut table = io::provenance(&hash);
    table.push_str(&sweep.key);
    for c in &columns {
        table.push(',');
        table.push_str(c);
    }
    table.push('\n');
    for (v, r) in &rows {
        table.push_str(v);
        for c in &columns {
            table.push(',');
            match r.get(c) {
                Some(Value::Real(x)) => table.push_str(&io::real(*x)),
                Some(Value::Int(x)) => table.push_str(&x.to_string()),
                Some(Value::Bool(x)) => table.push_str(&x.to_string()),
                Some(Value::Text(t)) => table.push_str(&t.replace(',', ";")),
                Some(Value::Reals(xs)) => table.push_str(&xs.iter().map(|x| io::real(*x)).collect::<Vec<_>>().join(";")),
                None => {}
            }
        }
        table.push('\n');
    }

    let mut s = Report::new();
    s.put("command", cfg.command.name()).put("sweep_key", sweep.key.as_str()).put("rows", rows.len());
    let xs: Option<Vec<f64>> = sweep.values.iter().map(|v| v.parse().ok()).collect();
    for c in &columns {
        let Some(ys) = rows.iter().map(|(_, r)| match r.get(c) {
            Some(Value::Real(y)) => Some(*y),
            _ => None,
        }).collect::<Option<Vec<f64>>>() else { continue };
        if ys.len() < 2 || ys.iter().all(|y| *y == ys[0]) {
            continue;
        }
        let all = |f: fn(f64, f64) -> bool| ys.windows(2).all(|w| f(w[0], w[1]));
        s.put(&format!("{c}.strictly_decreasing"), all(|a, b| b < a))
            .put(&format!("{c}.decreasing_within_slack"), all(|a, b| b < a + MONOTONE_SLACK * a.abs()))
            .put(&format!("{c}.strictly_increasing"), all(|a, b| b > a));
        let Some(xs) = &xs else { continue };
        let mut brackets = Vec::new();
        let mut roots = Vec::new();
        for i in 0..ys.len() - 1 {
            if ys[i] == 0.0 {
                brackets.extend([xs[i], xs[i]]);
                roots.push(xs[i]);
            } else if ys[i] * ys[i + 1] < 0.0 {
                brackets.extend([xs[i], xs[i + 1]]);
                roots.push(refine_root(cfg, sweep, c, (xs[i], ys[i]), (xs[i + 1], ys[i + 1]))?);
            }
        }
        if !roots.is_empty() {
            s.put(&format!("{c}.sign_change_brackets"), Value::Reals(brackets)).put(&format!("{c}.roots"), Value::Reals(roots));
        }
    }
    Ok((table, s))
}

/// Root of a swept column inside a sign-change bracket: bisection by re-running
/// the experiment when it is cheap (special-material), linear interpolation
/// otherwise.
fn refine_root(cfg: &ExperimentConfig, sweep: &Sweep, col: &str, a: (f64, f64), b: (f64, f64)) -> FResult<f64> {
    let linear = a.0 - a.1 * (b.0 - a.0) / (b.1 - a.1);
    if cfg.command != Command::SpecialMaterial {
        return Ok(linear);
    }
    let eval = |x: f64| -> FResult<Option<f64>> {
        let c = apply_sweep(cfg, &sweep.key, &format!("{x:e}"))?;
        Ok(execute(&c)?.report.get(col).and_then(Value::as_real))
    };
    let (mut lo, mut flo, mut hi) = (a.0, a.1, b.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let Some(fm) = eval(mid)? else { return Ok(linear) };
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ---------------------------------------------------------------- driver

fn write(path: &Path, bytes: &[u8]) -> FResult<()> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Loads, validates, runs and writes artifacts; returns the written paths.
pub fn run(args: &Args) -> FResult<Vec<PathBuf>> {
    let mut cfg = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let sweep = args.sweep.as_deref().map(parse_sweep).transpose()?;
    cfg.validate()?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("."));
    let prefix = cfg.output.prefix.clone().unwrap_or_else(|| cfg.command.name().to_string());
    let hash = cfg.hash();

    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    if let Some(sweep) = sweep {
        let (table, summary) = run_sweep(&cfg, &sweep)?;
        let sweep_hash = format!("{hash}+sweep:{}={}", sweep.key, sweep.values.join(","));
        files.push((dir.join(format!("{prefix}.sweep.csv")), table.into_bytes()));
        files.push((dir.join(format!("{prefix}.sweep.txt")), summary.to_kv(&sweep_hash).into_bytes()));
    } else {
        let out = execute(&cfg)?;
        if cfg.wants("kv") {
            files.push((dir.join(format!("{prefix}.report.txt")), out.report.to_kv(&hash).into_bytes()));
        }
        if cfg.wants("csv") {
            files.push((dir.join(format!("{prefix}.report.csv")), out.report.to_record_csv(&hash).into_bytes()));
        }
        for a in out.artifacts {
            let p = dir.join(format!("{prefix}.{}", a.suffix));
            if a.suffix.ends_with(".csv") || a.suffix.ends_with(".txt") {
                files.push((p, a.bytes));
            } else {
                // binary dumps have a fixed layout; provenance goes in a sidecar
                let meta = format!("{}format = \"{}\"\n", io::provenance(&hash), a.suffix);
                files.push((PathBuf::from(format!("{}.meta", p.display())), meta.into_bytes()));
                files.push((p, a.bytes));
            }
        }
    }
    fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    for (p, b) in &files {
        write(p, b)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| run(&args)) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECIAL: &str = "command = \"special-material\"\n[eigenstress]\nk1 = 1.0\nk3 = 2.0\n";

    #[test]
    fn sweep_parsing() {
        let s = parse_sweep("grid.resolution=32,64,128").unwrap();
        assert_eq!(s.values, ["32", "64", "128"]);
        let r = parse_sweep("k3/k1=1.5:0.01:3").unwrap();
        assert_eq!(r.values.len(), 151);
        assert_eq!(r.values[91], "2.41");
        assert_eq!(r.values.last().unwrap(), "3");
        assert_eq!(parse_sweep("grid.resolution=").unwrap_err().key, "--sweep");
        assert!(parse_sweep("grid.resolution").is_err());
    }

    #[test]
    fn sweep_key_must_exist_and_keep_type() {
        let c = config::parse(SPECIAL).unwrap();
        assert!(apply_sweep(&c, "grid.resolution", "64").is_ok());
        assert!(apply_sweep(&c, "grid.nope", "64").is_err());
        assert!(apply_sweep(&c, "grid.resolution", "6.5").is_err());
        let d = apply_sweep(&c, "eigenstress.k3", "3").unwrap();
        assert_eq!(d.eigenstress.unwrap().k3, Some(3.0));
    }

    #[test]
    fn special_material_report() {
        let out = execute(&config::parse(SPECIAL).unwrap()).unwrap();
        let r = &out.report;
        assert_eq!(r.get("gamma0_ratio"), Some(&Value::Real(1.0)));
        assert!((r.get("eta2_ratio").unwrap().as_real().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.get("eta2_rays_agree"), Some(&Value::Bool(false)));
        assert_eq!(r.get("joint_determinant"), Some(&Value::Real(-2.0)));
    }

    #[test]
    fn ratio_sweep_finds_joint_root() {
        let c = config::parse(SPECIAL).unwrap();
        let (table, s) = run_sweep(&c, &parse_sweep("k3/k1=1.5:0.01:3").unwrap()).unwrap();
        assert_eq!(table.lines().count(), 2 + 151);
        let Some(Value::Reals(roots)) = s.get("joint_determinant.roots") else { panic!("no root") };
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - (1.0 + 2f64.sqrt())).abs() < 1e-9);
        let Some(Value::Reals(b)) = s.get("joint_determinant.sign_change_brackets") else { panic!() };
        assert!((b[0] - 2.41).abs() < 1e-12 && (b[1] - 2.42).abs() < 1e-12);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Io("x".into()).exit_code(), 1);
        assert_eq!(Failure::Config(ConfigError::new("k", "m")).exit_code(), 2);
        assert_eq!(Failure::Numerical { module: "fields", reason: "r".into() }.exit_code(), 3);
    }
}
