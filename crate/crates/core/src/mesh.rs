//! Indexed triangle mesh with cached adjacency.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Point3;

use crate::error::{MeshError, Result};

/// Triangle mesh stored as an indexed face set, immutable after construction.
///
/// Faces are vertex index triples in counter-clockwise order. Construction
/// validates that every face has three distinct, in-range indices and that no
/// edge is shared by more than two faces (manifold with boundary). Adjacency
/// is built once and cached:
///
/// * `vertex_to_faces[v]` lists incident faces in ascending face order,
/// * `face_adjacency[f][k]` is the face across edge `(face[k], face[(k+1)%3])`,
///   or `None` on a boundary.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[u32; 3]>,
    vertex_to_faces: Vec<Vec<u32>>,
    face_adjacency: Vec<[Option<u32>; 3]>,
}

/// Undirected edge with its incident faces. `face_b` is `None` on boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshEdge {
    pub a: u32,
    pub b: u32,
    pub face_a: u32,
    pub face_b: Option<u32>,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let nv = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            let [a, b, c] = *f;
            let distinct = a != b && b != c && a != c;
            let in_range = (a as usize) < nv && (b as usize) < nv && (c as usize) < nv;
            if !distinct || !in_range {
                return Err(MeshError::InvalidFace {
                    face: fi,
                    indices: *f,
                    vertex_count: nv,
                });
            }
        }

        // Edge slots hold at most two incident faces; a third is non-manifold.
        let mut edge_slots: BTreeMap<(u32, u32), (u32, Option<u32>)> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for k in 0..3 {
                let key = ordered(f[k], f[(k + 1) % 3]);
                match edge_slots.get_mut(&key) {
                    None => {
                        edge_slots.insert(key, (fi as u32, None));
                    }
                    Some((_, second @ None)) => *second = Some(fi as u32),
                    Some((_, Some(_))) => {
                        return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 })
                    }
                }
            }
        }

        let mut vertex_to_faces = vec![Vec::new(); nv];
        let mut face_adjacency = vec![[None; 3]; faces.len()];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_to_faces[v as usize].push(fi as u32);
            }
            for k in 0..3 {
                let key = ordered(f[k], f[(k + 1) % 3]);
                let (first, second) = edge_slots[&key];
                face_adjacency[fi][k] = if first == fi as u32 { second } else { Some(first) };
            }
        }

        Ok(Mesh {
            vertices,
            faces,
            vertex_to_faces,
            face_adjacency,
        })
    }

    /// Same connectivity with new vertex positions. Adjacency is reused, so
    /// the position count must match.
    pub fn with_positions(&self, positions: Vec<Point3<f64>>) -> Result<Self> {
        if positions.len() != self.vertices.len() {
            return Err(MeshError::VertexCountMismatch {
                expected: self.vertices.len(),
                got: positions.len(),
            });
        }
        Ok(Mesh {
            vertices: positions,
            faces: self.faces.clone(),
            vertex_to_faces: self.vertex_to_faces.clone(),
            face_adjacency: self.face_adjacency.clone(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    /// Faces incident on a vertex, in ascending face order.
    pub fn incident_faces(&self, vertex: usize) -> &[u32] {
        &self.vertex_to_faces[vertex]
    }

    /// Edge-adjacent faces, aligned with the face's edges: slot `k` crosses
    /// edge `(face[k], face[(k+1)%3])`.
    pub fn adjacent_faces(&self, face: usize) -> [Option<u32>; 3] {
        self.face_adjacency[face]
    }

    /// Ordered 1-ring of a vertex: each neighbor paired with the faces
    /// incident on the connecting edge (two for interior edges, one on a
    /// boundary). Neighbors ascend by index; faces ascend within each entry.
    /// Isolated vertices yield an empty star.
    pub fn vertex_star(&self, vertex: usize) -> Vec<(u32, Vec<u32>)> {
        let mut neighbors = BTreeSet::new();
        for &f in &self.vertex_to_faces[vertex] {
            for &v in &self.faces[f as usize] {
                if v as usize != vertex {
                    neighbors.insert(v);
                }
            }
        }
        neighbors
            .into_iter()
            .map(|j| {
                let on_edge: Vec<u32> = self.vertex_to_faces[vertex]
                    .iter()
                    .copied()
                    .filter(|&f| self.faces[f as usize].contains(&j))
                    .collect();
                (j, on_edge)
            })
            .collect()
    }

    /// Unique undirected edges sorted by `(a, b)`, each with its incident
    /// faces.
    pub fn edges(&self) -> Vec<MeshEdge> {
        let mut slots: BTreeMap<(u32, u32), (u32, Option<u32>)> = BTreeMap::new();
        for (fi, f) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let key = ordered(f[k], f[(k + 1) % 3]);
                match slots.get_mut(&key) {
                    None => {
                        slots.insert(key, (fi as u32, None));
                    }
                    Some((_, second)) => *second = Some(fi as u32),
                }
            }
        }
        slots
            .into_iter()
            .map(|((a, b), (fa, fb))| MeshEdge {
                a,
                b,
                face_a: fa,
                face_b: fb,
            })
            .collect()
    }
}
