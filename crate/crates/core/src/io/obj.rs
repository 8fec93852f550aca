//! Wavefront OBJ reader and writer.
//!
//! The reader handles `v` and `f` records, 1-based and negative (relative)
//! indices, `i/j/k` attribute syntax (only the vertex index is used), and
//! fan-triangulates polygons. All other record types are ignored. The writer
//! emits positions and faces only; `f64`'s shortest-round-trip formatting
//! keeps coordinates exact through a write/read cycle.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Point3;

use crate::error::{MeshError, Result};
use crate::mesh::Mesh;

pub fn read_obj(path: &Path) -> Result<Mesh> {
    let file = File::open(path).map_err(|e| MeshError::io(path, e))?;
    parse_obj(BufReader::new(file), path)
}

fn parse_obj<R: BufRead>(reader: R, path: &Path) -> Result<Mesh> {
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| MeshError::io(path, e))?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coord = [0.0f64; 3];
                for c in &mut coord {
                    let tok = tokens.next().ok_or_else(|| {
                        MeshError::parse(path, lineno, "vertex needs 3 coordinates")
                    })?;
                    *c = tok.parse().map_err(|_| {
                        MeshError::parse(path, lineno, format!("bad coordinate '{tok}'"))
                    })?;
                }
                vertices.push(Point3::new(coord[0], coord[1], coord[2]));
            }
            Some("f") => {
                let mut poly: Vec<u32> = Vec::new();
                for tok in tokens {
                    poly.push(resolve_index(tok, vertices.len(), path, lineno)?);
                }
                if poly.len() < 3 {
                    return Err(MeshError::parse(
                        path,
                        lineno,
                        format!("face has {} vertices, need at least 3", poly.len()),
                    ));
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            // Normals, texture coordinates, groups, materials, comments.
            _ => {}
        }
    }

    Mesh::new(vertices, faces)
}

/// OBJ face token: `i`, `i/t`, `i/t/n`, or `i//n`; positive indices are
/// 1-based, negative count back from the most recent vertex.
fn resolve_index(token: &str, vertex_count: usize, path: &Path, lineno: usize) -> Result<u32> {
    let first = token.split('/').next().unwrap_or("");
    let idx: i64 = first
        .parse()
        .map_err(|_| MeshError::parse(path, lineno, format!("bad face index '{token}'")))?;
    let resolved = if idx > 0 {
        idx - 1
    } else if idx < 0 {
        vertex_count as i64 + idx
    } else {
        return Err(MeshError::parse(path, lineno, "face index 0 is not valid"));
    };
    if resolved < 0 || resolved >= vertex_count as i64 {
        return Err(MeshError::parse(
            path,
            lineno,
            format!("face index {idx} out of range ({vertex_count} vertices so far)"),
        ));
    }
    Ok(resolved as u32)
}

pub fn write_obj(mesh: &Mesh, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| MeshError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| MeshError::io(path, e);
    for v in mesh.vertices() {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z).map_err(io_err)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<Mesh> {
        parse_obj(Cursor::new(text), Path::new("test.obj"))
    }

    #[test]
    fn single_triangle() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.face_count(), 1);
        assert_eq!(m.faces()[0], [0, 1, 2]);
    }

    #[test]
    fn negative_indices_resolve_relative_to_current_count() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(m.faces()[0], [0, 1, 2]);
    }

    #[test]
    fn attribute_syntax_keeps_vertex_index_only() {
        let m = parse(
            "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/1/1 3//1\n",
        )
        .unwrap();
        assert_eq!(m.faces()[0], [0, 1, 2]);
    }

    #[test]
    fn quad_becomes_triangle_fan() {
        let m = parse("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(m.face_count(), 2);
        assert_eq!(m.faces()[0], [0, 1, 2]);
        assert_eq!(m.faces()[1], [0, 2, 3]);
    }

    #[test]
    fn junk_face_line_reports_line_number() {
        let err = parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n").unwrap_err();
        match err {
            MeshError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_coordinate_reports_line_number() {
        let err = parse("v 0 zero 0\n").unwrap_err();
        match err {
            MeshError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn index_out_of_range_is_rejected() {
        assert!(matches!(
            parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"),
            Err(MeshError::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n"),
            Err(MeshError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn non_manifold_obj_is_rejected_with_edge() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nv 1 1 1\nf 1 2 3\nf 1 2 4\nf 1 2 5\n";
        match parse(text) {
            Err(MeshError::NonManifoldEdge { a: 0, b: 1 }) => {}
            other => panic!("expected non-manifold edge (0,1), got {other:?}"),
        }
    }
}
