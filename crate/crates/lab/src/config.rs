//! Experiment configuration: a strict TOML document (unknown keys rejected).
//!
//! ```toml
//! command = "uniformity"
//! seed = 7
//!
//! [shape]
//! type = "ellipsoid"
//! semi_axes = [1.0, 0.7, 0.4]
//!
//! [material]
//! lambda = 1.0
//! mu = 1.0
//!
//! [eigenstress]
//! k1 = 1.0
//! k3 = 2.0
//!
//! [grid]
//! resolution = 128
//! padding = 3.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use eshelby_core::linalg::rotation_from_euler_deg;
use eshelby_core::materials::{classify_eigenstress, Eigenstress, LameMaterial};
use eshelby_core::shape::{Cuboid, Ellipsoid, InclusionShape, Superellipsoid};
use eshelby_core::{Mat3, Vec3};

use crate::quadrature::{PotentialKind, QuadratureSpec};
use crate::spectral::{Window, MIN_PADDING};
use crate::theorems::Thresholds;

/// A configuration problem, attributed to the offending key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), message: message.into() }
    }
}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Field,
    Potential,
    Uniformity,
    ShapeTest,
    Theorem1,
    Theorem2,
    Flux,
    SpecialMaterial,
    Appendix,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Field => "field",
            Self::Potential => "potential",
            Self::Uniformity => "uniformity",
            Self::ShapeTest => "shape-test",
            Self::Theorem1 => "theorem1",
            Self::Theorem2 => "theorem2",
            Self::Flux => "flux",
            Self::SpecialMaterial => "special-material",
            Self::Appendix => "appendix",
        }
    }

    /// Blocks the command reads; only these enter the config hash.
    fn blocks(&self) -> &'static [&'static str] {
        match self {
            Self::Field => &["shape", "material", "eigenstress", "grid", "quadrature", "probes"],
            Self::Potential => &["shape", "quadrature", "potential"],
            Self::Uniformity => &["shape", "material", "eigenstress", "grid", "probes"],
            Self::ShapeTest => &["shape", "quadrature", "probes", "thresholds"],
            Self::Theorem1 => &["shape", "material", "eigenstress", "quadrature", "thresholds"],
            Self::Theorem2 => &["shape", "materials", "eigenstress", "quadrature", "probes", "thresholds"],
            Self::Flux => &["shape", "flux", "quadrature"],
            Self::SpecialMaterial => &["eigenstress", "special"],
            Self::Appendix => &["shape", "material", "eigenstress", "grid", "quadrature", "probes", "thresholds"],
        }
    }

    fn uses_seed(&self) -> bool {
        matches!(self, Self::Field | Self::ShapeTest | Self::Theorem2 | Self::Appendix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeType {
    Ellipsoid,
    Sphere,
    Box,
    Superellipsoid,
    VoxelMask,
    Difference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeBlock {
    #[serde(rename = "type")]
    pub kind: ShapeType,
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default)]
    pub rotation_euler_deg: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_extents: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// Declared convexity; defaults to true for the analytic convex shapes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convex: Option<bool>,
    /// Voxel-mask file (`ESHV1`), relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<Box<ShapeBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<ShapeBlock>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialBlock {
    pub lambda: f64,
    pub mu: f64,
}

/// Principal values `k1, k2, k3` (`k2` defaults to `k1`) or a full symmetric tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenstressBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<[[f64; 3]; 3]>,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn default_rel_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_padding")]
    pub padding: f64,
    #[serde(default = "default_subsamples")]
    pub subsamples: usize,
    #[serde(default = "default_window")]
    pub window: String,
}

fn default_resolution() -> usize {
    128
}
fn default_padding() -> f64 {
    3.0
}
fn default_subsamples() -> usize {
    4
}
fn default_window() -> String {
    Window::default().name().to_string()
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { resolution: default_resolution(), padding: default_padding(), subsamples: default_subsamples(), window: default_window() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    #[serde(default = "default_quad_resolution")]
    pub resolution: usize,
    #[serde(default = "default_quad_subsamples")]
    pub subsamples: usize,
}

fn default_quad_resolution() -> usize {
    QuadratureSpec::default().resolution
}
fn default_quad_subsamples() -> usize {
    QuadratureSpec::default().subsamples
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        Self { resolution: default_quad_resolution(), subsamples: default_quad_subsamples() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbesBlock {
    #[serde(default = "default_probe_count")]
    pub count: usize,
    /// Distance kept from the boundary (also the uniformity erosion margin);
    /// defaults to the erosion margin of the grid in use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    /// `field` only: also evaluate the potential path at the probes.
    #[serde(default = "yes")]
    pub dual_path: bool,
}

fn default_probe_count() -> usize {
    30
}
fn yes() -> bool {
    true
}

impl Default for ProbesBlock {
    fn default() -> Self {
        Self { count: default_probe_count(), margin: None, dual_path: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsBlock {
    #[serde(default = "d_residual")]
    pub residual_x3: f64,
    #[serde(default = "d_fit")]
    pub fit_rms: f64,
    #[serde(default = "d_mixed")]
    pub mixed_dev: f64,
    #[serde(default = "d_trace")]
    pub trace: f64,
}

fn d_residual() -> f64 {
    Thresholds::default().residual_x3
}
fn d_fit() -> f64 {
    Thresholds::default().fit_rms
}
fn d_mixed() -> f64 {
    Thresholds::default().mixed_dev
}
fn d_trace() -> f64 {
    Thresholds::default().trace
}

impl Default for ThresholdsBlock {
    fn default() -> Self {
        let t = Thresholds::default();
        Self { residual_x3: t.residual_x3, fit_rms: t.fit_rms, mixed_dev: t.mixed_dev, trace: t.trace }
    }
}

impl From<ThresholdsBlock> for Thresholds {
    fn from(t: ThresholdsBlock) -> Self {
        Thresholds { residual_x3: t.residual_x3, fit_rms: t.fit_rms, mixed_dev: t.mixed_dev, trace: t.trace }
    }
}

/// The ellipsoid `E` whose minimal scaling contains the shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxBlock {
    #[serde(default)]
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    #[serde(default)]
    pub rotation_euler_deg: [f64; 3],
    #[serde(default = "default_contact_samples")]
    pub contact_samples: usize,
}

fn default_contact_samples() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub points: Vec<[f64; 3]>,
    /// `N`, `H`, `d2H1`..`d2H3`, `Ntilde1`..`Ntilde3`.
    #[serde(default = "default_kinds")]
    pub kinds: Vec<String>,
    /// For ellipsoids, add closed-form `N` rows.
    #[serde(default)]
    pub analytic: bool,
}

fn default_kinds() -> Vec<String> {
    vec!["N".into()]
}

/// Optional root scan of the joint determinant over `k3/k1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialBlock {
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    /// Any of `kv`, `csv`, `bin`.
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["kv".into(), "csv".into()]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: None, prefix: None, formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub materials: Option<Vec<MaterialBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenstress: Option<EigenstressBlock>,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    #[serde(default)]
    pub probes: ProbesBlock,
    #[serde(default)]
    pub thresholds: ThresholdsBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<FluxBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special: Option<SpecialBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    /// Directory that relative paths resolve against; not part of the document.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Parses a TOML document. Syntax errors and unknown keys are reported with
/// the parser's message, which names the key.
pub fn parse(text: &str) -> CResult<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let key = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("unknown field") || msg.contains("missing field") || msg.contains("unknown variant"))
            .unwrap_or("<document>")
            .to_string();
        ConfigError::new(key, e.to_string().trim_end().to_string())
    })?;
    Ok(cfg)
}

pub fn load(path: &Path) -> std::result::Result<ExperimentConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse(&text).map_err(LoadError::Config)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Config(ConfigError),
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn need<'a, T>(opt: &'a Option<T>, key: &str, cmd: Command) -> CResult<&'a T> {
    opt.as_ref().ok_or_else(|| ConfigError::new(key, format!("block is required by command `{}`", cmd.name())))
}

fn shape_err(key: &str, e: eshelby_core::Error) -> ConfigError {
    ConfigError::new(key, e.to_string())
}

impl ShapeBlock {
    pub fn build(&self, key: &str, base_dir: &Path) -> CResult<InclusionShape> {
        let center = vec3(self.center);
        let rotated = self.rotation_euler_deg != [0.0; 3];
        let field = |f: &str| format!("{key}.{f}");
        let shape: InclusionShape = match self.kind {
            ShapeType::Ellipsoid => {
                let axes = self.semi_axes.ok_or_else(|| ConfigError::new(field("semi_axes"), "required for type = \"ellipsoid\""))?;
                Ellipsoid::new(center, vec3(axes), rotation_from_euler_deg(self.rotation_euler_deg))
                    .map_err(|e| shape_err(&field("semi_axes"), e))?
                    .into()
            }
            ShapeType::Sphere => {
                let r = self.radius.ok_or_else(|| ConfigError::new(field("radius"), "required for type = \"sphere\""))?;
                Ellipsoid::ball(center, r).map_err(|e| shape_err(&field("radius"), e))?.into()
            }
            ShapeType::Box => {
                let h = self.half_extents.ok_or_else(|| ConfigError::new(field("half_extents"), "required for type = \"box\""))?;
                if rotated {
                    return Err(ConfigError::new(field("rotation_euler_deg"), "boxes are axis-aligned"));
                }
                Cuboid::new(center, vec3(h)).map_err(|e| shape_err(&field("half_extents"), e))?.into()
            }
            ShapeType::Superellipsoid => {
                let axes = self.semi_axes.ok_or_else(|| ConfigError::new(field("semi_axes"), "required for type = \"superellipsoid\""))?;
                let p = self.exponent.ok_or_else(|| ConfigError::new(field("exponent"), "required for type = \"superellipsoid\""))?;
                if rotated {
                    return Err(ConfigError::new(field("rotation_euler_deg"), "superellipsoids are axis-aligned"));
                }
                let s = Superellipsoid::new(center, vec3(axes), p).map_err(|e| shape_err(&field("exponent"), e))?;
                // p < 1 gives a non-convex star
                InclusionShape::from(s).with_convex(p >= 1.0)
            }
            ShapeType::VoxelMask => {
                let p = self.path.as_ref().ok_or_else(|| ConfigError::new(field("path"), "required for type = \"voxel_mask\""))?;
                let p = base_dir.join(p);
                let mask = crate::io::read_voxel_mask(&p).map_err(|e| ConfigError::new(field("path"), format!("{}: {e}", p.display())))?;
                mask.into()
            }
            ShapeType::Difference => {
                let o = self.outer.as_ref().ok_or_else(|| ConfigError::new(field("outer"), "required for type = \"difference\""))?;
                let i = self.inner.as_ref().ok_or_else(|| ConfigError::new(field("inner"), "required for type = \"difference\""))?;
                let outer = o.build(&field("outer"), base_dir)?;
                let inner = i.build(&field("inner"), base_dir)?;
                InclusionShape::difference(outer, inner).map_err(|e| shape_err(&field("inner"), e))?
            }
        };
        Ok(match self.convex {
            Some(c) => shape.with_convex(c),
            None => shape,
        })
    }
}

impl MaterialBlock {
    pub fn build(&self, key: &str) -> CResult<LameMaterial> {
        LameMaterial::new(self.lambda, self.mu).map_err(|e| ConfigError::new(key, e.to_string()))
    }
}

impl EigenstressBlock {
    pub fn build(&self) -> CResult<Eigenstress> {
        let key = "eigenstress";
        let tensor = match (self.tensor, self.k1, self.k2, self.k3) {
            (Some(t), None, None, None) => Mat3::from_fn(|i, j| t[i][j]),
            (None, Some(k1), k2, Some(k3)) => Mat3::from_diagonal(&Vec3::new(k1, k2.unwrap_or(k1), k3)),
            (Some(_), ..) => return Err(ConfigError::new("eigenstress.tensor", "give either a tensor or k1/k2/k3, not both")),
            (None, None, ..) => return Err(ConfigError::new("eigenstress.k1", "required unless a tensor is given")),
            (None, _, _, None) => return Err(ConfigError::new("eigenstress.k3", "required unless a tensor is given")),
        };
        classify_eigenstress(&tensor, self.rel_tol).map_err(|e| ConfigError::new(key, e.to_string()))
    }

    /// `(k1, k3)` of a two-equal eigenstress.
    pub fn two_equal(&self) -> CResult<(f64, f64)> {
        self.build()?
            .two_equal()
            .ok_or_else(|| ConfigError::new("eigenstress", "needs exactly two equal principal values (k1 = k2 != k3)"))
    }
}

impl GridBlock {
    pub fn window(&self) -> CResult<Window> {
        Window::from_name(&self.window).ok_or_else(|| ConfigError::new("grid.window", format!("unknown window `{}` (none, tent, cubic_bspline)", self.window)))
    }

    pub fn check_spectral(&self) -> CResult<()> {
        if !(self.padding >= MIN_PADDING) {
            return Err(ConfigError::new(
                "grid.padding",
                format!(
                    "padding {} violates the periodic-image precondition: the box edge must be at least {MIN_PADDING} times the shape extent",
                    self.padding
                ),
            ));
        }
        if self.resolution < 8 {
            return Err(ConfigError::new("grid.resolution", "must be at least 8"));
        }
        if self.subsamples == 0 {
            return Err(ConfigError::new("grid.subsamples", "must be positive"));
        }
        self.window().map(|_| ())
    }
}

impl QuadratureBlock {
    pub fn spec(&self) -> CResult<QuadratureSpec> {
        if self.resolution < 4 {
            return Err(ConfigError::new("quadrature.resolution", "must be at least 4"));
        }
        if self.subsamples == 0 {
            return Err(ConfigError::new("quadrature.subsamples", "must be positive"));
        }
        Ok(QuadratureSpec { resolution: self.resolution, subsamples: self.subsamples })
    }
}

pub fn parse_kind(s: &str) -> Option<PotentialKind> {
    let axis = |rest: &str| match rest {
        "1" => Some(0),
        "2" => Some(1),
        "3" => Some(2),
        _ => None,
    };
    match s {
        "N" => Some(PotentialKind::N),
        "H" => Some(PotentialKind::H),
        _ => {
            if let Some(r) = s.strip_prefix("d2H") {
                axis(r).map(PotentialKind::D2H)
            } else if let Some(r) = s.strip_prefix("Ntilde") {
                axis(r).map(PotentialKind::NTilde)
            } else {
                None
            }
        }
    }
}

impl PotentialBlock {
    pub fn kinds(&self) -> CResult<Vec<PotentialKind>> {
        if self.points.is_empty() {
            return Err(ConfigError::new("potential.points", "must not be empty"));
        }
        self.kinds
            .iter()
            .map(|k| parse_kind(k).ok_or_else(|| ConfigError::new("potential.kinds", format!("unknown potential `{k}` (N, H, d2H1-3, Ntilde1-3)"))))
            .collect()
    }
}

impl FluxBlock {
    pub fn ellipsoid(&self) -> CResult<Ellipsoid> {
        Ellipsoid::new(vec3(self.center), vec3(self.semi_axes), rotation_from_euler_deg(self.rotation_euler_deg))
            .map_err(|e| ConfigError::new("flux.semi_axes", e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn shape(&self) -> CResult<InclusionShape> {
        need(&self.shape, "shape", self.command)?.build("shape", &self.base_dir)
    }

    pub fn material(&self) -> CResult<LameMaterial> {
        need(&self.material, "material", self.command)?.build("material")
    }

    pub fn material_pair(&self) -> CResult<[LameMaterial; 2]> {
        let ms = need(&self.materials, "materials", self.command)?;
        if ms.len() != 2 {
            return Err(ConfigError::new("materials", format!("expected two materials, got {}", ms.len())));
        }
        Ok([ms[0].build("materials[0]")?, ms[1].build("materials[1]")?])
    }

    pub fn eigenstress(&self) -> CResult<&EigenstressBlock> {
        need(&self.eigenstress, "eigenstress", self.command)
    }

    /// Checks everything the command needs, so that failures surface as
    /// config errors before any computation.
    pub fn validate(&self) -> CResult<()> {
        use Command::*;
        let cmd = self.command;
        for f in &self.output.formats {
            if !matches!(f.as_str(), "kv" | "csv" | "bin") {
                return Err(ConfigError::new("output.formats", format!("unknown format `{f}` (kv, csv, bin)")));
            }
        }
        let uses = |b: &str| cmd.blocks().contains(&b);
        if uses("shape") {
            self.shape()?;
        }
        if uses("material") {
            self.material()?;
        }
        if uses("materials") {
            self.material_pair()?;
        }
        if uses("grid") {
            self.grid.check_spectral()?;
        }
        if uses("quadrature") {
            self.quadrature.spec()?;
        }
        if uses("probes") && self.probes.count < 10 {
            return Err(ConfigError::new("probes.count", "must be at least 10"));
        }
        match cmd {
            Field | Uniformity => {
                self.eigenstress()?.build()?;
            }
            Theorem1 | Theorem2 | SpecialMaterial => {
                self.eigenstress()?.two_equal()?;
            }
            Appendix => {
                if let Some(e) = &self.eigenstress {
                    appendix_k(e)?;
                }
            }
            Potential => {
                need(&self.potential, "potential", cmd)?.kinds()?;
            }
            Flux => {
                need(&self.flux, "flux", cmd)?.ellipsoid()?;
            }
            ShapeTest => {}
        }
        if cmd == Theorem1 && !self.shape()?.convex {
            return Err(ConfigError::new("shape.convex", "theorem1 requires a shape declared convex"));
        }
        if let (SpecialMaterial, Some(s)) = (cmd, &self.special) {
            if !(s.scan_step > 0.0) || !(s.scan_hi > s.scan_lo) {
                return Err(ConfigError::new("special.scan_step", "scan needs scan_lo < scan_hi and a positive step"));
            }
        }
        Ok(())
    }

    /// SHA-256 over the blocks the command reads, after defaults are filled
    /// in; formatting, key order, comments and the output block do not count.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            let keep = self.command.blocks();
            obj.retain(|k, _| k == "command" || (k == "seed" && self.command.uses_seed()) || keep.contains(&k.as_str()));
        }
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }
}

/// Hydrostatic magnitude for the identical-eigenvalue appendix check.
pub fn appendix_k(e: &EigenstressBlock) -> CResult<f64> {
    let s = e.build()?;
    match s.spectral_class {
        eshelby_core::materials::SpectralClass::AllEqual(k) if k != 0.0 => Ok(k),
        _ => Err(ConfigError::new("eigenstress", "appendix needs a nonzero hydrostatic eigenstress (k1 = k2 = k3)")),
    }
}
