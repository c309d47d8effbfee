//! Minimal PLY reader/writer for vertex clouds.
//!
//! Reads ASCII and binary little-endian files with any element layout, keeping
//! only the `x`, `y`, `z` properties of the `vertex` element.

use std::fs;
use std::io::Write;
use std::path::Path;

use primalign::{MetricMap, Vec3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn decode(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

impl Element {
    fn coordinate_slots(&self) -> Option<[usize; 3]> {
        let find = |axis: &str| {
            self.properties
                .iter()
                .position(|p| matches!(p, Property::Scalar { name, .. } if name == axis))
        };
        Some([find("x")?, find("y")?, find("z")?])
    }
}

struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    /// Byte offset of the body.
    body_start: usize,
    /// Number of header lines, for ASCII error locations.
    lines: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut pos = 0;
    let mut line_no = 0;
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&c| c == b'\n')
            .ok_or_else(|| BenchError::at_line(line_no + 1, "header is not terminated by end_header"))?;
        let raw = &bytes[pos..pos + end];
        pos += end + 1;
        line_no += 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| BenchError::at_line(line_no, "header is not valid UTF-8"))?
            .trim_end_matches('\r');
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if line_no == 1 {
            if tokens != ["ply"] {
                return Err(BenchError::at_line(1, "missing 'ply' magic"));
            }
            continue;
        }
        match tokens.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                encoding = Some(match *fmt {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    other => return Err(BenchError::UnsupportedFormat(other.to_string())),
                });
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| BenchError::at_line(line_no, format!("bad element count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", count, item, _name] => {
                let (Some(count), Some(item)) = (Scalar::parse(count), Scalar::parse(item)) else {
                    return Err(BenchError::at_line(line_no, "unknown list property type"));
                };
                elements
                    .last_mut()
                    .ok_or_else(|| BenchError::at_line(line_no, "property before any element"))?
                    .properties
                    .push(Property::List { count, item });
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty)
                    .ok_or_else(|| BenchError::at_line(line_no, format!("unknown property type '{ty}'")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| BenchError::at_line(line_no, "property before any element"))?
                    .properties
                    .push(Property::Scalar {
                        name: name.to_string(),
                        ty,
                    });
            }
            ["end_header"] => break,
            _ => return Err(BenchError::at_line(line_no, format!("unrecognized header line '{line}'"))),
        }
    }
    let encoding = encoding.ok_or_else(|| BenchError::at_line(line_no, "missing format line"))?;
    Ok(Header {
        encoding,
        elements,
        body_start: pos,
        lines: line_no,
    })
}

fn read_ascii(header: &Header, body: &[u8]) -> Result<Vec<Vec3>> {
    let text = std::str::from_utf8(body).map_err(|e| {
        BenchError::at_offset((header.body_start + e.valid_up_to()) as u64, "body is not valid UTF-8")
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (header.lines + i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let mut points = Vec::new();
    for el in &header.elements {
        let slots = (el.name == "vertex").then(|| el.coordinate_slots()).flatten();
        for _ in 0..el.count {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| BenchError::at_line(header.lines, format!("missing '{}' rows", el.name)))?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let mut values = Vec::with_capacity(el.properties.len());
            let mut t = 0;
            let take = |t: &mut usize| -> Result<f64> {
                let tok = tokens
                    .get(*t)
                    .ok_or_else(|| BenchError::at_line(line_no, "too few values"))?;
                *t += 1;
                tok.parse::<f64>()
                    .map_err(|_| BenchError::at_line(line_no, format!("bad number '{tok}'")))
            };
            for p in &el.properties {
                match p {
                    Property::Scalar { .. } => values.push(take(&mut t)?),
                    Property::List { .. } => {
                        let n = take(&mut t)?;
                        for _ in 0..n as usize {
                            take(&mut t)?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if let Some([x, y, z]) = slots {
                points.push(Vec3::new(values[x], values[y], values[z]));
            }
        }
    }
    Ok(points)
}

fn read_binary(header: &Header, body: &[u8]) -> Result<Vec<Vec3>> {
    let mut pos = 0usize;
    let mut points = Vec::new();
    let offset = |pos: usize| (header.body_start + pos) as u64;
    let take = |pos: &mut usize, ty: Scalar| -> Result<f64> {
        let end = *pos + ty.size();
        let bytes = body
            .get(*pos..end)
            .ok_or_else(|| BenchError::at_offset(offset(*pos), "unexpected end of binary body"))?;
        *pos = end;
        Ok(ty.decode(bytes))
    };
    for el in &header.elements {
        let slots = (el.name == "vertex").then(|| el.coordinate_slots()).flatten();
        for _ in 0..el.count {
            let mut values = [0.0; 3];
            for (k, p) in el.properties.iter().enumerate() {
                match p {
                    Property::Scalar { ty, .. } => {
                        let v = take(&mut pos, *ty)?;
                        if let Some(slot) = slots.and_then(|s| s.iter().position(|&i| i == k)) {
                            values[slot] = v;
                        }
                    }
                    Property::List { count, item } => {
                        let n = take(&mut pos, *count)? as usize;
                        for _ in 0..n {
                            take(&mut pos, *item)?;
                        }
                    }
                }
            }
            if slots.is_some() {
                points.push(Vec3::from(values));
            }
        }
    }
    Ok(points)
}

/// Parses the vertex positions of a PLY document.
pub fn parse_ply(bytes: &[u8]) -> Result<Vec<Vec3>> {
    let header = parse_header(bytes)?;
    let vertex = header
        .elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| BenchError::at_line(header.lines, "no vertex element"))?;
    if vertex.coordinate_slots().is_none() {
        return Err(BenchError::at_line(header.lines, "vertex element lacks x/y/z"));
    }
    let body = &bytes[header.body_start..];
    match header.encoding {
        PlyEncoding::Ascii => read_ascii(&header, body),
        PlyEncoding::BinaryLittleEndian => read_binary(&header, body),
    }
}

pub fn load_ply(path: &Path) -> Result<MetricMap> {
    Ok(MetricMap::from_points(parse_ply(&fs::read(path)?)?))
}

/// Serializes points as a PLY document with double-precision coordinates.
///
/// ASCII output uses the shortest round-trip representation, so reading the
/// file back yields bit-identical coordinates.
pub fn encode_ply(points: &[Vec3], encoding: PlyEncoding) -> Vec<u8> {
    let format = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    let mut out = format!(
        "ply\nformat {format} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        points.len()
    )
    .into_bytes();
    for p in points {
        match encoding {
            PlyEncoding::Ascii => writeln!(out, "{} {} {}", p.x, p.y, p.z).expect("writing to Vec"),
            PlyEncoding::BinaryLittleEndian => {
                for c in p.iter() {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
    }
    out
}

pub fn write_ply(path: &Path, points: &[Vec3], encoding: PlyEncoding) -> Result<()> {
    fs::write(path, encode_ply(points, encoding))?;
    Ok(())
}

/// Picks `n` points by a fixed stride over a seeded shuffle of the map.
///
/// With `n >= map.points.len()` the result is a permutation of all points.
pub fn downsample(map: &MetricMap, n: usize, seed: u64) -> MetricMap {
    let mut order: Vec<usize> = (0..map.points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let picked: Vec<Vec3> = if n >= order.len() {
        order.iter().map(|&i| map.points[i]).collect()
    } else {
        let stride = order.len() / n.max(1);
        order.iter().step_by(stride).take(n).map(|&i| map.points[i]).collect()
    };
    MetricMap::from_points(picked)
}
