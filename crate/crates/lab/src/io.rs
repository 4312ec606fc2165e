//! Artifact formats: binary voxel masks and field dumps, CSV tables and
//! key/value report documents.
//!
//! Binary layout (little-endian): 5-byte magic, three `u32` dims, origin and
//! edge lengths as six `f64`, then `f32` data with x fastest. Masks (`ESHV1`)
//! carry one occupancy value per voxel; field dumps (`ESHF1`) carry a `u32`
//! channel count after the header and then all channels of a voxel together.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use eshelby_core::shape::{GridSpec, VoxelMask};
use eshelby_core::Vec3;

use crate::fields::FieldSample;
use crate::quadrature::PotentialSample;
use crate::spectral::GradField;

pub const MASK_MAGIC: &[u8; 5] = b"ESHV1";
pub const FIELD_MAGIC: &[u8; 5] = b"ESHF1";
pub const TOOL_VERSION: &str = concat!("eshelby ", env!("CARGO_PKG_VERSION"));

/// Reals with 17 significant digits.
pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn write_header(w: &mut impl Write, magic: &[u8; 5], grid: &GridSpec) -> io::Result<()> {
    w.write_all(magic)?;
    for d in grid.dims {
        let d = u32::try_from(d).map_err(|_| io_err("grid dimension exceeds u32"))?;
        w.write_all(&d.to_le_bytes())?;
    }
    for v in grid.origin.iter().chain(grid.lengths.iter()) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_header(r: &mut impl Read, magic: &[u8; 5]) -> io::Result<([usize; 3], Vec3, Vec3)> {
    let mut m = [0u8; 5];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(io_err(format!("bad magic {:?}, expected {:?}", String::from_utf8_lossy(&m), String::from_utf8_lossy(magic))));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    let mut f = [0.0f64; 6];
    for v in f.iter_mut() {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        *v = f64::from_le_bytes(b);
    }
    Ok((dims, Vec3::new(f[0], f[1], f[2]), Vec3::new(f[3], f[4], f[5])))
}

fn read_f32s(r: &mut impl Read, n: usize) -> io::Result<Vec<f32>> {
    let mut bytes = vec![0u8; 4 * n];
    r.read_exact(&mut bytes)?;
    let mut rest = Vec::new();
    if r.read_to_end(&mut rest)? != 0 {
        return Err(io_err("trailing bytes after grid data"));
    }
    Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

pub fn encode_voxel_mask(mask: &VoxelMask) -> io::Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(65 + 4 * mask.fractions.len());
    write_header(&mut buf, MASK_MAGIC, &mask.grid)?;
    for f in &mask.fractions {
        buf.extend_from_slice(&(*f as f32).to_le_bytes());
    }
    Ok(buf)
}

pub fn write_voxel_mask(path: &Path, mask: &VoxelMask) -> io::Result<()> {
    fs::write(path, encode_voxel_mask(mask)?)
}

/// Reads a mask. The stored format has no padding factor; it is taken as the
/// smallest ratio of box edge to occupied extent.
pub fn read_voxel_mask(path: &Path) -> io::Result<VoxelMask> {
    let mut r = io::BufReader::new(fs::File::open(path)?);
    let (dims, origin, lengths) = read_header(&mut r, MASK_MAGIC)?;
    let n = dims.iter().product();
    let data = read_f32s(&mut r, n)?;
    let grid = GridSpec::new(dims, origin, lengths, 1.0).map_err(|e| io_err(e.to_string()))?;
    let mask = VoxelMask::new(grid, data.iter().map(|v| *v as f64).collect()).map_err(|e| io_err(e.to_string()))?;
    let padding = match mask.occupied_bbox() {
        Some(bb) => (0..3).map(|a| lengths[a] / bb.extent()[a]).fold(f64::INFINITY, f64::min).max(1.0),
        None => 1.0,
    };
    let grid = GridSpec::new(dims, origin, lengths, padding).map_err(|e| io_err(e.to_string()))?;
    Ok(VoxelMask { grid, ..mask })
}

pub fn encode_field_dump(field: &GradField) -> io::Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(69 + 36 * field.components.len());
    write_header(&mut buf, FIELD_MAGIC, &field.grid)?;
    buf.extend_from_slice(&9u32.to_le_bytes());
    for c in &field.components {
        for v in c {
            buf.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    Ok(buf)
}

pub fn write_field_dump(path: &Path, field: &GradField) -> io::Result<()> {
    fs::write(path, encode_field_dump(field)?)
}

pub fn read_field_dump(path: &Path) -> io::Result<GradField> {
    let mut r = io::BufReader::new(fs::File::open(path)?);
    let (dims, origin, lengths) = read_header(&mut r, FIELD_MAGIC)?;
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    if u32::from_le_bytes(b) != 9 {
        return Err(io_err("field dump must have 9 channels"));
    }
    let n: usize = dims.iter().product();
    let data = read_f32s(&mut r, 9 * n)?;
    let grid = GridSpec::new(dims, origin, lengths, 1.0).map_err(|e| io_err(e.to_string()))?;
    let components = data
        .chunks_exact(9)
        .map(|c| {
            let mut a = [0.0; 9];
            for (d, s) in a.iter_mut().zip(c) {
                *d = *s as f64;
            }
            a
        })
        .collect();
    Ok(GradField { grid, components })
}

/// Provenance line placed before CSV headers and at the top of reports.
pub fn provenance(config_hash: &str) -> String {
    format!("# tool={TOOL_VERSION} config_hash={config_hash}\n")
}

pub fn potential_csv(samples: &[PotentialSample], config_hash: &str) -> String {
    let mut s = provenance(config_hash);
    s.push_str("x1,x2,x3,kind,axis,value,est_error,method\n");
    for p in samples {
        let axis = p.kind.axis().map(|a| (a + 1).to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            real(p.point[0]),
            real(p.point[1]),
            real(p.point[2]),
            p.kind.name(),
            axis,
            real(p.value),
            real(p.est_error),
            p.method.name()
        );
    }
    s
}

pub fn field_csv(samples: &[FieldSample], config_hash: &str) -> String {
    let mut s = provenance(config_hash);
    s.push_str("x1,x2,x3");
    for p in 1..=3 {
        for l in 1..=3 {
            let _ = write!(s, ",du{p}{l}");
        }
    }
    s.push_str(",method,inside\n");
    for f in samples {
        let _ = write!(s, "{},{},{}", real(f.point[0]), real(f.point[1]), real(f.point[2]));
        for p in 0..3 {
            for l in 0..3 {
                let _ = write!(s, ",{}", real(f.grad_u[(p, l)]));
            }
        }
        let _ = writeln!(s, ",{},{}", f.method.name(), f.inside);
    }
    s
}

/// A value in a report document.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Reals(Vec<f64>),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Real(v) => real(*v),
            Value::Int(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Text(t) => format!("\"{}\"", t.replace('\\', "\\\\").replace('"', "\\\"")),
            Value::Reals(v) => format!("[{}]", v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(", ")),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Value::Real(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}
impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}
impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}
impl From<Vec3> for Value {
    fn from(v: Vec3) -> Self {
        Value::Reals(v.iter().copied().collect())
    }
}
impl From<eshelby_core::Mat3> for Value {
    /// Row-major.
    fn from(m: eshelby_core::Mat3) -> Self {
        Value::Reals(m.transpose().iter().copied().collect())
    }
}
impl From<[f64; 3]> for Value {
    fn from(v: [f64; 3]) -> Self {
        Value::Reals(v.to_vec())
    }
}

/// Flat ordered record of named values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.entries.push((key.to_string(), v.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// `key = value` lines after a provenance comment.
    pub fn to_kv(&self, config_hash: &str) -> String {
        let mut s = provenance(config_hash);
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {}", v.render());
        }
        s
    }

    /// The same record as a one-row CSV table; vectors are split into
    /// `key_1, key_2, …` columns.
    pub fn to_record_csv(&self, config_hash: &str) -> String {
        let mut head = Vec::new();
        let mut row = Vec::new();
        for (k, v) in &self.entries {
            match v {
                Value::Reals(xs) => {
                    for (i, x) in xs.iter().enumerate() {
                        head.push(format!("{k}_{}", i + 1));
                        row.push(real(*x));
                    }
                }
                Value::Text(t) => {
                    head.push(k.clone());
                    row.push(t.replace(',', ";"));
                }
                other => {
                    head.push(k.clone());
                    row.push(other.render());
                }
            }
        }
        format!("{}{}\n{}\n", provenance(config_hash), head.join(","), row.join(","))
    }
}
