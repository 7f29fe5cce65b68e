//! The workbench volume file format (DVOL).
//!
//! A DVOL file is a line-oriented text header followed by the raw voxel
//! payload in x-fastest order, little-endian:
//!
//! ```text
//! DVOL 1
//! dims = 64 64 32
//! spacing = 0.7 0.7 2.5
//! origin = -120.0 -80.5 10.0
//! modality = CT
//! value-type = int16
//! byte-order = little-endian
//! end
//! <nx*ny*nz samples>
//! ```
//!
//! `value-type` is one of `int16`, `float32` or `float64`. An optional
//! `direction` key holding the nine cosines of the axis directions is accepted
//! only when it is the identity.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::{Error, Result, Volume};

const MAGIC: &str = "DVOL 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Int16,
    Float32,
    Float64,
}

impl ValueType {
    fn name(self) -> &'static str {
        match self {
            ValueType::Int16 => "int16",
            ValueType::Float32 => "float32",
            ValueType::Float64 => "float64",
        }
    }

    fn width(self) -> usize {
        match self {
            ValueType::Int16 => 2,
            ValueType::Float32 => 4,
            ValueType::Float64 => 8,
        }
    }

    /// Narrowest type that stores every value exactly.
    pub fn narrowest_for(values: &[f64]) -> Self {
        let fits_i16 = values.iter().all(|&v| {
            v.fract() == 0.0 && v >= i16::MIN as f64 && v <= i16::MAX as f64 && !(v == 0.0 && v.is_sign_negative())
        });
        if fits_i16 {
            return ValueType::Int16;
        }
        if values.iter().all(|&v| (v as f32) as f64 == v || v.is_nan()) {
            return ValueType::Float32;
        }
        ValueType::Float64
    }
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let file = fs::File::open(path)?;
    decode(BufReader::new(file))
}

pub fn write_volume(vol: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode(vol, ValueType::narrowest_for(vol.voxels()));
    fs::write(path, bytes)?;
    Ok(())
}

/// Serializes a volume with an explicit sample type. Values that do not fit
/// the type are converted with `as` semantics.
pub fn encode(vol: &Volume, value_type: ValueType) -> Vec<u8> {
    let mut out = Vec::with_capacity(256 + vol.len() * value_type.width());
    let [nx, ny, nz] = vol.dims();
    let [sx, sy, sz] = vol.spacing();
    let [ox, oy, oz] = vol.origin();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "dims = {nx} {ny} {nz}").unwrap();
    writeln!(out, "spacing = {sx:?} {sy:?} {sz:?}").unwrap();
    writeln!(out, "origin = {ox:?} {oy:?} {oz:?}").unwrap();
    writeln!(out, "modality = {}", vol.modality()).unwrap();
    writeln!(out, "value-type = {}", value_type.name()).unwrap();
    writeln!(out, "byte-order = little-endian").unwrap();
    writeln!(out, "end").unwrap();
    for &v in vol.voxels() {
        match value_type {
            ValueType::Int16 => out.extend_from_slice(&(v as i16).to_le_bytes()),
            ValueType::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            ValueType::Float64 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    out
}

pub fn decode(mut reader: impl BufRead) -> Result<Volume> {
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(Error::MalformedHeader(format!("expected `{MAGIC}`, found `{}`", line.trim_end())));
    }
    let mut dims = None;
    let mut spacing = None;
    let mut origin = [0.0; 3];
    let mut modality = String::from("OT");
    let mut value_type = None;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::MalformedHeader("missing `end` line".into()));
        }
        let text = line.trim_end();
        if text == "end" {
            break;
        }
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (key, value) = text
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Error::MalformedHeader(format!("expected `key = value`, found `{text}`")))?;
        match key {
            "dims" => dims = Some(parse_triple::<usize>(key, value)?),
            "spacing" => spacing = Some(parse_triple::<f64>(key, value)?),
            "origin" => origin = parse_triple::<f64>(key, value)?,
            "modality" => modality = value.to_string(),
            "value-type" => {
                value_type = Some(match value {
                    "int16" => ValueType::Int16,
                    "float32" => ValueType::Float32,
                    "float64" => ValueType::Float64,
                    other => return Err(Error::MalformedHeader(format!("unsupported value-type `{other}`"))),
                })
            }
            "byte-order" => {
                if value != "little-endian" {
                    return Err(Error::MalformedHeader(format!("unsupported byte-order `{value}`")));
                }
            }
            "direction" => {
                let cos: Vec<f64> = value
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| Error::MalformedHeader(format!("bad direction `{value}`"))))
                    .collect::<Result<_>>()?;
                let identity = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
                if cos.len() != 9 || cos.iter().zip(identity).any(|(a, b)| (a - b).abs() > 1e-6) {
                    return Err(Error::MalformedHeader("oblique orientation is not supported".into()));
                }
            }
            other => return Err(Error::MalformedHeader(format!("unknown key `{other}`"))),
        }
    }
    let dims = dims.ok_or_else(|| Error::MalformedHeader("missing dims".into()))?;
    let spacing = spacing.ok_or_else(|| Error::MalformedHeader("missing spacing".into()))?;
    let value_type = value_type.ok_or_else(|| Error::MalformedHeader("missing value-type".into()))?;

    let mut payload = Vec::new();
    reader.read_to_end(&mut payload)?;
    let width = value_type.width();
    let expected = dims[0] * dims[1] * dims[2];
    if payload.len() % width != 0 || payload.len() / width != expected {
        return Err(Error::SizeMismatch { expected, actual: payload.len() / width });
    }
    let voxels: Vec<f64> = payload
        .chunks_exact(width)
        .map(|c| match value_type {
            ValueType::Int16 => i16::from_le_bytes([c[0], c[1]]) as f64,
            ValueType::Float32 => f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64,
            ValueType::Float64 => f64::from_le_bytes(c.try_into().expect("8 bytes")),
        })
        .collect();
    Volume::new(dims, spacing, origin, voxels, modality)
}

fn parse_triple<T: std::str::FromStr>(key: &str, value: &str) -> Result<[T; 3]> {
    let parts: Vec<T> = value
        .split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| Error::MalformedHeader(format!("bad {key} `{value}`"))))
        .collect::<Result<_>>()?;
    <[T; 3]>::try_from(parts).map_err(|_| Error::MalformedHeader(format!("{key} needs three components")))
}
