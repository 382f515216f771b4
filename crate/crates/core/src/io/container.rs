//! Binary BR-DF container.
//!
//! Little-endian header of 56 bytes followed by the SDF and then each UDF
//! as `R^3` f32 values in z-fastest order:
//!
//! | offset | type     | field        |
//! |--------|----------|--------------|
//! | 0      | [u8; 4]  | magic `BRDF` |
//! | 4      | u32      | version      |
//! | 8      | u32      | resolution   |
//! | 12     | u32      | face count   |
//! | 16     | f64      | truncation   |
//! | 24     | 3 x f64  | center       |
//! | 48     | f64      | scale        |

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{BrDf, NormalizeTransform, ScalarField3};
use crate::Point;

pub const MAGIC: &[u8; 4] = b"BRDF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 56;

/// Total file size for a given lattice and face count.
pub fn container_len(resolution: usize, face_count: usize) -> usize {
    HEADER_LEN + 4 * resolution.pow(3) * (face_count + 1)
}

pub fn encode_container(b: &BrDf) -> Vec<u8> {
    let r = b.resolution();
    let mut out = Vec::with_capacity(container_len(r, b.face_count()));
    let t = b.transform();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(r as u32).to_le_bytes());
    out.extend_from_slice(&(b.face_count() as u32).to_le_bytes());
    out.extend_from_slice(&b.truncation().to_le_bytes());
    for c in t.center.iter() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&t.scale.to_le_bytes());
    for field in std::iter::once(&b.sdf).chain(&b.udfs) {
        for v in field.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

/// Parse a container, validating the header before touching the payload.
pub fn decode_container(bytes: &[u8]) -> Result<BrDf> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(bytes.len(), format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(format_err(0, format!("bad magic {:?}", &bytes[0..4])));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let r = u32_at(bytes, 8) as usize;
    if r < 2 {
        return Err(format_err(8, format!("resolution {r}")));
    }
    let faces = u32_at(bytes, 12) as usize;
    if faces == 0 {
        return Err(format_err(12, "face count 0"));
    }
    let tau = f64_at(bytes, 16);
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(format_err(16, format!("truncation {tau}")));
    }
    let center = Point::new(f64_at(bytes, 24), f64_at(bytes, 32), f64_at(bytes, 40));
    if center.iter().any(|c| !c.is_finite()) {
        return Err(format_err(24, "non-finite center"));
    }
    let scale = f64_at(bytes, 48);
    let transform = NormalizeTransform::new(center, scale).map_err(|e| format_err(48, e.to_string()))?;
    let expected = r
        .checked_pow(3)
        .and_then(|n| n.checked_mul(faces + 1))
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| format_err(8, "lattice size overflows"))?;
    if bytes.len() != expected {
        return Err(format_err(
            bytes.len(),
            format!("size mismatch: expected {expected} bytes for R={r}, F={faces}, found {}", bytes.len()),
        ));
    }

    let n = r.pow(3);
    let field = |k: usize| -> Result<ScalarField3> {
        let start = HEADER_LEN + 4 * n * k;
        let values: Vec<f32> = bytes[start..start + 4 * n]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let limit = tau as f32;
        if let Some(i) = values.iter().position(|v| !(v.abs() <= limit)) {
            return Err(format_err(start + 4 * i, format!("value {} outside truncation band", values[i])));
        }
        if k > 0 {
            if let Some(i) = values.iter().position(|v| *v < 0.0) {
                return Err(format_err(start + 4 * i, format!("negative UDF value {}", values[i])));
            }
        }
        ScalarField3::new(r, values, transform, tau).map_err(|e| format_err(start, e.to_string()))
    };
    let sdf = field(0)?;
    let udfs = (1..=faces).map(field).collect::<Result<Vec<_>>>()?;
    BrDf::new(sdf, udfs)
}

pub fn write_brdf(b: &BrDf, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_container(b)).map_err(|e| Error::io(path, e))
}

pub fn read_brdf(path: impl AsRef<Path>) -> Result<BrDf> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_container(&bytes)
}
