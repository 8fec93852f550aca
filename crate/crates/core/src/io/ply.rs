//! PLY reader and writer, ASCII and binary little-endian.
//!
//! The reader honors the element/property layout declared in the header:
//! vertex `x`/`y`/`z` must be float32 or float64, face indices come from a
//! `vertex_indices` (or `vertex_index`) integer list, and everything else,
//! including whole foreign elements, is skipped by walking the declared
//! layout. Big-endian files are rejected up front. The writer emits float64
//! coordinates, so a write/read cycle reproduces positions bit-exactly in
//! both flavors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{MeshError, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFlavor {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<ScalarType> {
        Some(match name {
            "char" | "int8" => ScalarType::I8,
            "uchar" | "uint8" => ScalarType::U8,
            "short" | "int16" => ScalarType::I16,
            "ushort" | "uint16" => ScalarType::U16,
            "int" | "int32" => ScalarType::I32,
            "uint" | "uint32" => ScalarType::U32,
            "float" | "float32" => ScalarType::F32,
            "double" | "float64" => ScalarType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            ScalarType::I8 | ScalarType::U8 => 1,
            ScalarType::I16 | ScalarType::U16 => 2,
            ScalarType::I32 | ScalarType::U32 => 4,
            ScalarType::F32 => 4,
            ScalarType::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, ScalarType::F32 | ScalarType::F64)
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List {
        name: String,
        count: ScalarType,
        item: ScalarType,
    },
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar { name, .. } | Property::List { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Scalar read from the body; integers and floats are kept apart so indices
/// never pass through a lossy float conversion.
#[derive(Debug, Clone, Copy)]
enum Value {
    Int(i64),
    Float(f64),
}

impl Value {
    fn as_f64(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Float(v) => v,
        }
    }
}

pub fn read_ply(path: &Path) -> Result<Mesh> {
    let file = File::open(path).map_err(|e| MeshError::io(path, e))?;
    Ok(parse_ply(BufReader::new(file), path)?.0)
}

pub fn read_ply_flavored(path: &Path) -> Result<(Mesh, PlyFlavor)> {
    let file = File::open(path).map_err(|e| MeshError::io(path, e))?;
    parse_ply(BufReader::new(file), path)
}

fn read_header_line<R: BufRead>(r: &mut R, line_no: &mut usize, path: &Path) -> Result<String> {
    let mut line = String::new();
    let n = r.read_line(&mut line).map_err(|e| MeshError::io(path, e))?;
    if n == 0 {
        return Err(MeshError::parse(
            path,
            *line_no,
            "unexpected end of file inside header",
        ));
    }
    *line_no += 1;
    Ok(line.trim().to_string())
}

pub(crate) fn parse_ply<R: BufRead>(mut r: R, path: &Path) -> Result<(Mesh, PlyFlavor)> {
    let mut line_no = 0usize;
    let magic = read_header_line(&mut r, &mut line_no, path)?;
    if magic != "ply" {
        return Err(MeshError::parse(path, 1, "not a PLY file (missing 'ply' magic)"));
    }

    let mut flavor: Option<PlyFlavor> = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let line = read_header_line(&mut r, &mut line_no, path)?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.first().copied() {
            None | Some("comment") | Some("obj_info") => continue,
            Some("format") => {
                let kind = tokens.get(1).copied().unwrap_or("");
                flavor = Some(match kind {
                    "ascii" => PlyFlavor::Ascii,
                    "binary_little_endian" => PlyFlavor::BinaryLittleEndian,
                    "binary_big_endian" => {
                        return Err(MeshError::parse(
                            path,
                            line_no,
                            "big-endian PLY is not supported",
                        ))
                    }
                    other => {
                        return Err(MeshError::parse(
                            path,
                            line_no,
                            format!("unknown PLY format '{other}'"),
                        ))
                    }
                });
            }
            Some("element") => {
                let (name, count) = match (tokens.get(1), tokens.get(2)) {
                    (Some(n), Some(c)) => (n.to_string(), c.parse::<usize>()),
                    _ => {
                        return Err(MeshError::parse(path, line_no, "malformed element record"))
                    }
                };
                let count = count.map_err(|_| {
                    MeshError::parse(path, line_no, "element count must be a non-negative integer")
                })?;
                elements.push(Element {
                    name,
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements.last_mut().ok_or_else(|| {
                    MeshError::parse(path, line_no, "property record before any element")
                })?;
                let prop = if tokens.get(1).copied() == Some("list") {
                    match (
                        tokens.get(2).and_then(|t| ScalarType::parse(t)),
                        tokens.get(3).and_then(|t| ScalarType::parse(t)),
                        tokens.get(4),
                    ) {
                        (Some(count), Some(item), Some(name)) => Property::List {
                            name: name.to_string(),
                            count,
                            item,
                        },
                        _ => {
                            return Err(MeshError::parse(
                                path,
                                line_no,
                                "malformed list property record",
                            ))
                        }
                    }
                } else {
                    match (tokens.get(1).and_then(|t| ScalarType::parse(t)), tokens.get(2)) {
                        (Some(ty), Some(name)) => Property::Scalar {
                            name: name.to_string(),
                            ty,
                        },
                        _ => {
                            return Err(MeshError::parse(
                                path,
                                line_no,
                                "malformed property record",
                            ))
                        }
                    }
                };
                element.properties.push(prop);
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(MeshError::parse(
                    path,
                    line_no,
                    format!("unknown header record '{other}'"),
                ));
            }
        }
    }
    let flavor = flavor
        .ok_or_else(|| MeshError::parse(path, line_no, "header is missing a format record"))?;

    let mut body = match flavor {
        PlyFlavor::Ascii => Body::Ascii { r, line_no },
        PlyFlavor::BinaryLittleEndian => Body::Binary { r, offset: 0 },
    };

    let mut vertices: Vec<Point3<f64>> = Vec::new();
    // Polygons with the line (ASCII) or 0 (binary) where they started, for
    // late index validation.
    let mut polygons: Vec<(Vec<u32>, usize)> = Vec::new();

    for element in &elements {
        match element.name.as_str() {
            "vertex" => {
                let xyz = ["x", "y", "z"].map(|axis| {
                    element.properties.iter().position(|p| p.name() == axis)
                });
                let mut coord_slots = [0usize; 3];
                for (k, slot) in xyz.iter().enumerate() {
                    let Some(i) = slot else {
                        return Err(MeshError::parse(
                            path,
                            0,
                            "vertex element lacks x/y/z properties",
                        ));
                    };
                    match element.properties[*i] {
                        Property::Scalar { ty, .. } if ty.is_float() => coord_slots[k] = *i,
                        _ => {
                            return Err(MeshError::parse(
                                path,
                                0,
                                "vertex coordinates must be float32 or float64 scalars",
                            ))
                        }
                    }
                }
                vertices.reserve(element.count.min(1 << 24));
                for _ in 0..element.count {
                    let mut coord = [0.0f64; 3];
                    body.walk(path, &element.properties, |slot, value| {
                        for (k, want) in coord_slots.iter().enumerate() {
                            if slot == *want {
                                coord[k] = value.as_f64();
                            }
                        }
                    })?;
                    vertices.push(Point3::new(coord[0], coord[1], coord[2]));
                }
            }
            "face" => {
                let list_slot = element.properties.iter().position(|p| {
                    matches!(p, Property::List { name, .. }
                        if name == "vertex_indices" || name == "vertex_index")
                });
                let Some(list_slot) = list_slot else {
                    return Err(MeshError::parse(
                        path,
                        0,
                        "face element lacks a vertex_indices list property",
                    ));
                };
                if let Property::List { count, item, .. } = &element.properties[list_slot] {
                    if count.is_float() || item.is_float() {
                        return Err(MeshError::parse(
                            path,
                            0,
                            "face index list must use integer types",
                        ));
                    }
                }
                for _ in 0..element.count {
                    let at = body.position();
                    let mut poly: Vec<u32> = Vec::new();
                    let mut bad: Option<i64> = None;
                    body.walk_lists(path, &element.properties, list_slot, |value| {
                        let idx = match value {
                            Value::Int(v) => v,
                            Value::Float(v) => v as i64,
                        };
                        if idx < 0 || idx > u32::MAX as i64 {
                            bad.get_or_insert(idx);
                        } else {
                            poly.push(idx as u32);
                        }
                    })?;
                    if let Some(idx) = bad {
                        return Err(MeshError::parse(
                            path,
                            at,
                            format!("face index {idx} out of range"),
                        ));
                    }
                    if poly.len() < 3 {
                        return Err(MeshError::parse(
                            path,
                            at,
                            format!("face has {} vertices, need at least 3", poly.len()),
                        ));
                    }
                    polygons.push((poly, at));
                }
            }
            _ => {
                // Foreign element: walk and drop.
                for _ in 0..element.count {
                    body.walk(path, &element.properties, |_, _| {})?;
                }
            }
        }
    }

    let mut faces: Vec<[u32; 3]> = Vec::new();
    for (poly, at) in polygons {
        for &idx in &poly {
            if idx as usize >= vertices.len() {
                return Err(MeshError::parse(
                    path,
                    at,
                    format!(
                        "face index {idx} out of range (file has {} vertices)",
                        vertices.len()
                    ),
                ));
            }
        }
        for k in 1..poly.len() - 1 {
            faces.push([poly[0], poly[k], poly[k + 1]]);
        }
    }

    Ok((Mesh::new(vertices, faces)?, flavor))
}

/// Body reader that walks declared property layouts in either flavor.
enum Body<R> {
    Ascii { r: R, line_no: usize },
    Binary { r: R, offset: u64 },
}

impl<R: BufRead> Body<R> {
    /// Line number for ASCII, 0 for binary (offset goes in the message).
    fn position(&self) -> usize {
        match self {
            Body::Ascii { line_no, .. } => *line_no + 1,
            Body::Binary { .. } => 0,
        }
    }

    /// Reads one element instance, invoking `sink(property_slot, value)` for
    /// every scalar, including each list item.
    fn walk(
        &mut self,
        path: &Path,
        properties: &[Property],
        mut sink: impl FnMut(usize, Value),
    ) -> Result<()> {
        self.walk_impl(path, properties, &mut |slot, _in_list, value| {
            sink(slot, value)
        })
    }

    /// Reads one element instance, invoking `sink` only for items of the list
    /// property in `list_slot` (the list length header is not reported).
    fn walk_lists(
        &mut self,
        path: &Path,
        properties: &[Property],
        list_slot: usize,
        mut sink: impl FnMut(Value),
    ) -> Result<()> {
        self.walk_impl(path, properties, &mut |slot, in_list, value| {
            if slot == list_slot && in_list {
                sink(value);
            }
        })
    }

    fn walk_impl(
        &mut self,
        path: &Path,
        properties: &[Property],
        sink: &mut dyn FnMut(usize, bool, Value),
    ) -> Result<()> {
        match self {
            Body::Ascii { r, line_no } => {
                let mut line = String::new();
                let n = r.read_line(&mut line).map_err(|e| MeshError::io(path, e))?;
                if n == 0 {
                    return Err(MeshError::parse(
                        path,
                        *line_no,
                        "unexpected end of file in body",
                    ));
                }
                *line_no += 1;
                let here = *line_no;
                let mut tokens = line.split_whitespace();
                let mut next = |what: &str| -> Result<&str> {
                    tokens.next().ok_or_else(|| {
                        MeshError::parse(path, here, format!("missing {what} token"))
                    })
                };
                for (slot, prop) in properties.iter().enumerate() {
                    match prop {
                        Property::Scalar { ty, name } => {
                            let tok = next(name)?;
                            sink(slot, false, parse_token(tok, *ty, path, here)?);
                        }
                        Property::List { count, item, name } => {
                            let tok = next(name)?;
                            let len = match parse_token(tok, *count, path, here)? {
                                Value::Int(v) if v >= 0 => v as usize,
                                _ => {
                                    return Err(MeshError::parse(
                                        path,
                                        here,
                                        format!("bad list count '{tok}'"),
                                    ))
                                }
                            };
                            for _ in 0..len {
                                let tok = next(name)?;
                                sink(slot, true, parse_token(tok, *item, path, here)?);
                            }
                        }
                    }
                }
                Ok(())
            }
            Body::Binary { r, offset } => {
                for (slot, prop) in properties.iter().enumerate() {
                    match prop {
                        Property::Scalar { ty, .. } => {
                            let v = read_binary_scalar(r, *ty, offset, path)?;
                            sink(slot, false, v);
                        }
                        Property::List { count, item, .. } => {
                            let len = match read_binary_scalar(r, *count, offset, path)? {
                                Value::Int(v) if v >= 0 => v as usize,
                                other => {
                                    return Err(MeshError::parse(
                                        path,
                                        0,
                                        format!(
                                            "bad list count {other:?} at byte offset {offset}"
                                        ),
                                    ))
                                }
                            };
                            for _ in 0..len {
                                let v = read_binary_scalar(r, *item, offset, path)?;
                                sink(slot, true, v);
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

fn parse_token(tok: &str, ty: ScalarType, path: &Path, line: usize) -> Result<Value> {
    let bad = || MeshError::parse(path, line, format!("bad value '{tok}'"));
    if ty.is_float() {
        tok.parse::<f64>().map(Value::Float).map_err(|_| bad())
    } else {
        tok.parse::<i64>().map(Value::Int).map_err(|_| bad())
    }
}

fn read_binary_scalar<R: BufRead>(
    r: &mut R,
    ty: ScalarType,
    offset: &mut u64,
    path: &Path,
) -> Result<Value> {
    let mut buf = [0u8; 8];
    let slice = &mut buf[..ty.size()];
    r.read_exact(slice).map_err(|_| {
        MeshError::parse(
            path,
            0,
            format!("unexpected end of file at byte offset {offset} of body"),
        )
    })?;
    *offset += ty.size() as u64;
    Ok(match ty {
        ScalarType::I8 => Value::Int(i8::from_le_bytes([slice[0]]) as i64),
        ScalarType::U8 => Value::Int(slice[0] as i64),
        ScalarType::I16 => Value::Int(i16::from_le_bytes([slice[0], slice[1]]) as i64),
        ScalarType::U16 => Value::Int(u16::from_le_bytes([slice[0], slice[1]]) as i64),
        ScalarType::I32 => {
            Value::Int(i32::from_le_bytes(slice.try_into().unwrap()) as i64)
        }
        ScalarType::U32 => {
            Value::Int(u32::from_le_bytes(slice.try_into().unwrap()) as i64)
        }
        ScalarType::F32 => {
            Value::Float(f32::from_le_bytes(slice.try_into().unwrap()) as f64)
        }
        ScalarType::F64 => Value::Float(f64::from_le_bytes(slice.try_into().unwrap())),
    })
}

pub fn write_ply(mesh: &Mesh, path: &Path, flavor: PlyFlavor) -> Result<()> {
    let file = File::create(path).map_err(|e| MeshError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| MeshError::io(path, e);

    let format = match flavor {
        PlyFlavor::Ascii => "ascii",
        PlyFlavor::BinaryLittleEndian => "binary_little_endian",
    };
    write!(
        w,
        "ply\nformat {format} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertex_count(),
        mesh.face_count()
    )
    .map_err(io_err)?;

    match flavor {
        PlyFlavor::Ascii => {
            for v in mesh.vertices() {
                writeln!(w, "{} {} {}", v.x, v.y, v.z).map_err(io_err)?;
            }
            for f in mesh.faces() {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2]).map_err(io_err)?;
            }
        }
        PlyFlavor::BinaryLittleEndian => {
            for v in mesh.vertices() {
                for c in [v.x, v.y, v.z] {
                    w.write_all(&c.to_le_bytes()).map_err(io_err)?;
                }
            }
            for f in mesh.faces() {
                w.write_all(&[3u8]).map_err(io_err)?;
                for &idx in f {
                    let idx = i32::try_from(idx).map_err(|_| {
                        MeshError::InvalidArgument(format!(
                            "vertex index {idx} exceeds the int32 range of the PLY face list"
                        ))
                    })?;
                    w.write_all(&idx.to_le_bytes()).map_err(io_err)?;
                }
            }
        }
    }
    w.flush().map_err(io_err)
}
