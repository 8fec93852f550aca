//! Per-face geometry (normals, areas, centroids) and global mesh statistics.

use nalgebra::{Point3, Vector3};

use crate::error::{MeshError, Result};
use crate::mesh::Mesh;

/// Per-face geometric quantities, all indexed by face.
///
/// A face is flagged degenerate when its area falls below
/// `1e-12 * bbox_diagonal^2`; degenerate faces get a zero normal and are
/// excluded from filtering sums and skipped as filter centers downstream.
#[derive(Debug, Clone)]
pub struct FaceField {
    pub normals: Vec<Vector3<f64>>,
    pub areas: Vec<f64>,
    pub centroids: Vec<Point3<f64>>,
    pub degenerate: Vec<bool>,
}

impl FaceField {
    pub fn of(mesh: &Mesh) -> FaceField {
        let diag = bbox_diagonal(mesh.vertices());
        let threshold = 1e-12 * diag * diag;

        let n = mesh.face_count();
        let mut normals = Vec::with_capacity(n);
        let mut areas = Vec::with_capacity(n);
        let mut centroids = Vec::with_capacity(n);
        let mut degenerate = Vec::with_capacity(n);

        for f in mesh.faces() {
            let a = mesh.vertices()[f[0] as usize];
            let b = mesh.vertices()[f[1] as usize];
            let c = mesh.vertices()[f[2] as usize];
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            // `!(area > threshold)` also catches NaN coordinates.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            let degen = !(area > threshold);
            normals.push(if degen {
                Vector3::zeros()
            } else {
                cross / (2.0 * area)
            });
            areas.push(area);
            centroids.push(Point3::from((a.coords + b.coords + c.coords) / 3.0));
            degenerate.push(degen);
        }

        FaceField {
            normals,
            areas,
            centroids,
            degenerate,
        }
    }
}

/// Global scale statistics used to derive default parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    /// Mean length over unique edges.
    pub avg_edge_length: f64,
    /// Mean centroid distance over edge-sharing face pairs. Falls back to
    /// `avg_edge_length` when the mesh has no adjacent face pair.
    pub avg_centroid_distance: f64,
    /// Diagonal of the axis-aligned bounding box over all vertices.
    pub bbox_diagonal: f64,
}

impl MeshStats {
    pub fn of(mesh: &Mesh) -> Result<MeshStats> {
        let edges = mesh.edges();
        if edges.is_empty() {
            return Err(MeshError::NoEdges);
        }
        let total: f64 = edges
            .iter()
            .map(|e| {
                (mesh.vertices()[e.a as usize] - mesh.vertices()[e.b as usize]).norm()
            })
            .sum();
        let avg_edge_length = total / edges.len() as f64;

        let field = FaceField::of(mesh);
        let mut pair_total = 0.0;
        let mut pairs = 0usize;
        for f in 0..mesh.face_count() {
            for g in mesh.adjacent_faces(f).into_iter().flatten() {
                if (g as usize) > f {
                    pair_total += (field.centroids[f] - field.centroids[g as usize]).norm();
                    pairs += 1;
                }
            }
        }
        let avg_centroid_distance = if pairs > 0 {
            pair_total / pairs as f64
        } else {
            avg_edge_length
        };

        Ok(MeshStats {
            avg_edge_length,
            avg_centroid_distance,
            bbox_diagonal: bbox_diagonal(mesh.vertices()),
        })
    }
}

pub(crate) fn bbox_diagonal(vertices: &[Point3<f64>]) -> f64 {
    let Some(first) = vertices.first() else {
        return 0.0;
    };
    let mut min = first.coords;
    let mut max = first.coords;
    for v in &vertices[1..] {
        min = min.inf(&v.coords);
        max = max.sup(&v.coords);
    }
    (max - min).norm()
}
