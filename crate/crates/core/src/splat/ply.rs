//! Binary little-endian PLY in the common splatting layout: positions,
//! `f_dc_*`/`f_rest_*` SH coefficients, logit opacity, log scales and a
//! `rot_0..3` (w, x, y, z) quaternion, plus an optional `source_view` tag.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::num::{logit, sigmoid, Real};
use crate::splat::gaussian::{sh_coeff_count, GaussianPrimitive, GaussianScene, MAX_SH_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq)]
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
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<(String, Scalar)>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::PlySchema(format!("malformed header: {}", msg.into()))
}

fn parse_header(bytes: &[u8]) -> Result<(Vec<Element>, usize)> {
    const END: &[u8] = b"end_header\n";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| malformed("no end_header"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| malformed("not ASCII"))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(malformed("missing ply magic"));
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    for line in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "binary_little_endian", _] => format_seen = true,
            ["format", other, ..] => return Err(Error::PlySchema(format!("unsupported format {other}"))),
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| malformed(format!("bad element count {count:?}")))?,
                properties: Vec::new(),
            }),
            ["property", "list", ..] => return Err(Error::PlySchema("list properties are not supported".into())),
            ["property", ty, name] => {
                let scalar = Scalar::parse(ty).ok_or_else(|| malformed(format!("unknown type {ty}")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| malformed("property before element"))?
                    .properties
                    .push((name.to_string(), scalar));
            }
            _ => return Err(malformed(format!("unexpected line {line:?}"))),
        }
    }
    if !format_seen {
        return Err(malformed("missing format line"));
    }
    Ok((elements, end + END.len()))
}

/// Decodes a scene from PLY bytes.
pub fn parse_ply<T: Real>(bytes: &[u8]) -> Result<GaussianScene<T>> {
    let (elements, mut offset) = parse_header(bytes)?;
    let mut vertex = None;
    for el in &elements {
        let stride: usize = el.properties.iter().map(|(_, s)| s.size()).sum();
        if el.name == "vertex" {
            vertex = Some((el, offset, stride));
            break;
        }
        offset += stride * el.count;
    }
    let (el, start, stride) = vertex.ok_or_else(|| Error::PlySchema("no vertex element".into()))?;
    let mut columns: HashMap<&str, (usize, Scalar)> = HashMap::new();
    let mut at = 0;
    for (name, s) in &el.properties {
        columns.insert(name.as_str(), (at, *s));
        at += s.size();
    }
    let need = |name: &str| columns.get(name).copied().ok_or_else(|| Error::PlySchema(format!("missing property {name:?}")));
    let pos = [need("x")?, need("y")?, need("z")?];
    let opacity = need("opacity")?;
    let scale = [need("scale_0")?, need("scale_1")?, need("scale_2")?];
    let rot = [need("rot_0")?, need("rot_1")?, need("rot_2")?, need("rot_3")?];
    let dc = [need("f_dc_0")?, need("f_dc_1")?, need("f_dc_2")?];
    let n_rest = (0..).take_while(|i| columns.contains_key(format!("f_rest_{i}").as_str())).count();
    let degree = (0..=MAX_SH_DEGREE)
        .find(|&l| 3 * (sh_coeff_count(l) - 1) == n_rest)
        .ok_or_else(|| Error::PlySchema(format!("{n_rest} f_rest properties match no SH degree")))?;
    let rest: Vec<(usize, Scalar)> = (0..n_rest).map(|i| need(&format!("f_rest_{i}"))).collect::<Result<_>>()?;
    let view = columns.get("source_view").copied();
    let end = start + stride * el.count;
    if bytes.len() < end {
        return Err(Error::SizeMismatch(format!("vertex data needs {end} bytes, file has {}", bytes.len())));
    }
    let per_channel = sh_coeff_count(degree) - 1;
    let mut prims = Vec::with_capacity(el.count);
    for v in 0..el.count {
        let row = &bytes[start + v * stride..start + (v + 1) * stride];
        let get = |(o, s): (usize, Scalar)| s.read(&row[o..]);
        let lit = |c: (usize, Scalar)| T::lit(get(c));
        let mut sh = vec![[T::zero(); 3]; sh_coeff_count(degree)];
        sh[0] = dc.map(lit);
        for ch in 0..3 {
            for k in 0..per_channel {
                sh[k + 1][ch] = lit(rest[ch * per_channel + k]);
            }
        }
        let mut g = GaussianPrimitive {
            center: Vector3::new(lit(pos[0]), lit(pos[1]), lit(pos[2])),
            rotation: nalgebra::UnitQuaternion::identity(),
            scale: Vector3::new(lit(scale[0]).exp(), lit(scale[1]).exp(), lit(scale[2]).exp()),
            opacity: sigmoid(lit(opacity)),
            sh,
            source_view: view.map(|c| get(c) as u32).unwrap_or(0),
        };
        g.set_rotation(rot.map(lit)).map_err(|e| Error::PlySchema(format!("vertex {v}: {e}")))?;
        prims.push(g);
    }
    GaussianScene::new(prims, degree)
}

/// Encodes a scene; values are stored as `f32`.
pub fn encode_ply<T: Real>(scene: &GaussianScene<T>) -> Vec<u8> {
    let per_channel = sh_coeff_count(scene.sh_degree) - 1;
    let mut header = String::from("ply\nformat binary_little_endian 1.0\n");
    header += &format!("element vertex {}\n", scene.len());
    let mut names: Vec<String> = ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"].map(String::from).to_vec();
    names.extend((0..3 * per_channel).map(|i| format!("f_rest_{i}")));
    names.extend(["opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"].map(String::from));
    for n in &names {
        header += &format!("property float {n}\n");
    }
    header += "property uint source_view\nend_header\n";
    let mut out = header.into_bytes();
    let put = |v: T, out: &mut Vec<u8>| out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    for g in &scene.primitives {
        for c in g.center.iter() {
            put(*c, &mut out);
        }
        for c in g.sh[0] {
            put(c, &mut out);
        }
        for ch in 0..3 {
            for k in 0..per_channel {
                put(g.sh[k + 1][ch], &mut out);
            }
        }
        put(logit(g.opacity), &mut out);
        for s in g.scale.iter() {
            put(s.ln(), &mut out);
        }
        for q in g.rotation_wxyz() {
            put(q, &mut out);
        }
        out.extend_from_slice(&g.source_view.to_le_bytes());
    }
    out
}

pub fn load_ply<T: Real>(path: impl AsRef<Path>) -> Result<GaussianScene<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&bytes)
}

pub fn save_ply<T: Real>(scene: &GaussianScene<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_ply(scene)).map_err(|e| Error::io(path, e))
}
