//! Quantitative evaluation of a denoised mesh against its clean reference:
//! mean angular deviation of face normals, an area-weighted positional error
//! against the reference surface, a circumradius-based triangle quality
//! index, flipped-normal counting, and dihedral feature-edge detection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closest::TriangleGrid;
use crate::error::{MeshError, Result};
use crate::field::FaceField;
use crate::mesh::Mesh;

/// Mean angle between corresponding unit vectors, face pairs with a
/// degenerate member excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleError {
    pub radians: f64,
    pub degrees: f64,
    pub excluded_faces: usize,
}

/// Mean angular deviation between corresponding face normals of two fields
/// with identical connectivity.
pub fn normal_deviation(denoised: &FaceField, reference: &FaceField) -> Result<AngleError> {
    if denoised.normals.len() != reference.normals.len() {
        return Err(MeshError::FaceCountMismatch {
            left: denoised.normals.len(),
            right: reference.normals.len(),
        });
    }
    let mut total = 0.0;
    let mut counted = 0usize;
    for i in 0..denoised.normals.len() {
        if denoised.degenerate[i] || reference.degenerate[i] {
            continue;
        }
        // atan2 stays accurate for near-parallel normals, where acos of the
        // dot product loses half the significant digits.
        let d = &denoised.normals[i];
        let r = &reference.normals[i];
        total += d.cross(r).norm().atan2(d.dot(r));
        counted += 1;
    }
    let radians = if counted > 0 { total / counted as f64 } else { 0.0 };
    Ok(AngleError {
        radians,
        degrees: radians.to_degrees(),
        excluded_faces: denoised.normals.len() - counted,
    })
}

/// Area-weighted RMS distance from the denoised vertices to the reference
/// surface: `sqrt( sum_i (sum of star areas) dist_i^2 / (3 * total area) )`,
/// with areas taken from the denoised mesh. A uniformly offset mesh scores
/// exactly the offset height.
pub fn positional_error(denoised: &Mesh, reference: &Mesh) -> Result<f64> {
    let grid = TriangleGrid::build(reference)?;
    let field = FaceField::of(denoised);
    let total_area: f64 = field.areas.iter().sum();
    // `!(x > 0)` also rejects NaN areas.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(total_area > 0.0) {
        return Err(MeshError::InvalidArgument(
            "denoised mesh has zero total area".into(),
        ));
    }
    let weighted: f64 = (0..denoised.vertex_count())
        .into_par_iter()
        .map(|v| {
            let star_area: f64 = denoised
                .incident_faces(v)
                .iter()
                .map(|&f| field.areas[f as usize])
                .sum();
            if star_area == 0.0 {
                return 0.0;
            }
            let d = grid.distance(denoised.vertices()[v]);
            star_area * d * d
        })
        .sum();
    Ok((weighted / (3.0 * total_area)).sqrt())
}

/// Per-face circumradius over shortest edge. Equilateral triangles score
/// `1/sqrt(3)`, slivers blow up, degenerate faces get `+inf` and are left
/// out of the mean and max.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityIndex {
    pub per_face: Vec<f64>,
    pub mean: f64,
    pub max: f64,
    pub degenerate_faces: usize,
}

pub fn quality_index(mesh: &Mesh) -> QualityIndex {
    let field = FaceField::of(mesh);
    let mut per_face = Vec::with_capacity(mesh.face_count());
    let mut sum = 0.0;
    let mut max = 0.0f64;
    let mut degenerate = 0usize;
    for (i, f) in mesh.faces().iter().enumerate() {
        if field.degenerate[i] {
            per_face.push(f64::INFINITY);
            degenerate += 1;
            continue;
        }
        let a = (mesh.vertices()[f[1] as usize] - mesh.vertices()[f[0] as usize]).norm();
        let b = (mesh.vertices()[f[2] as usize] - mesh.vertices()[f[1] as usize]).norm();
        let c = (mesh.vertices()[f[0] as usize] - mesh.vertices()[f[2] as usize]).norm();
        let circumradius = a * b * c / (4.0 * field.areas[i]);
        let q = circumradius / a.min(b).min(c);
        per_face.push(q);
        sum += q;
        max = max.max(q);
    }
    let counted = per_face.len() - degenerate;
    QualityIndex {
        per_face,
        mean: if counted > 0 { sum / counted as f64 } else { 0.0 },
        max,
        degenerate_faces: degenerate,
    }
}

/// Number of faces whose denoised normal points against the reference
/// normal. Degenerate faces have a zero normal and never count.
pub fn flipped_normals(denoised: &FaceField, reference: &FaceField) -> Result<usize> {
    if denoised.normals.len() != reference.normals.len() {
        return Err(MeshError::FaceCountMismatch {
            left: denoised.normals.len(),
            right: reference.normals.len(),
        });
    }
    Ok(denoised
        .normals
        .iter()
        .zip(&reference.normals)
        .filter(|(d, r)| d.dot(r) < 0.0)
        .count())
}

/// Interior edges whose two incident faces disagree by at least
/// `threshold_deg` in normal angle (both faces non-degenerate). Sorted by
/// vertex pair.
pub fn feature_edges(mesh: &Mesh, field: &FaceField, threshold_deg: f64) -> Vec<(u32, u32)> {
    let threshold = threshold_deg.to_radians();
    mesh.edges()
        .into_iter()
        .filter_map(|e| {
            let fb = e.face_b? as usize;
            let fa = e.face_a as usize;
            if field.degenerate[fa] || field.degenerate[fb] {
                return None;
            }
            let angle = field.normals[fa]
                .dot(&field.normals[fb])
                .clamp(-1.0, 1.0)
                .acos();
            (angle >= threshold).then_some((e.a, e.b))
        })
        .collect()
}

/// Parameters echoed into reports: similarity scale, fidelity weight, and
/// outer iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub sigma_s: f64,
    pub lambda: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "msae_deg")]
    pub msae_degrees: f64,
    #[serde(rename = "msae_rad")]
    pub msae_radians: f64,
    pub msae_excluded_faces: usize,
    /// Area-weighted RMS vertex-to-surface distance, in model units.
    #[serde(rename = "e_v")]
    pub positional_error: f64,
    #[serde(rename = "q_mean")]
    pub quality_mean: f64,
    #[serde(rename = "q_max")]
    pub quality_max: f64,
    #[serde(rename = "q_degenerate_faces")]
    pub quality_degenerate_faces: usize,
    #[serde(rename = "flip_count")]
    pub flipped_normals: usize,
    pub feature_angle_degrees: f64,
    pub feature_edge_count: usize,
    #[serde(rename = "params_echo")]
    pub params: Option<ParamsEcho>,
}

/// Full comparison of a denoised mesh against its clean reference. The
/// meshes must share connectivity.
pub fn evaluate(
    denoised: &Mesh,
    reference: &Mesh,
    feature_angle_degrees: f64,
    params: Option<ParamsEcho>,
) -> Result<MetricsReport> {
    if denoised.face_count() != reference.face_count() {
        return Err(MeshError::FaceCountMismatch {
            left: denoised.face_count(),
            right: reference.face_count(),
        });
    }
    let denoised_field = FaceField::of(denoised);
    let reference_field = FaceField::of(reference);
    let angle = normal_deviation(&denoised_field, &reference_field)?;
    let quality = quality_index(denoised);
    let features = feature_edges(denoised, &denoised_field, feature_angle_degrees);
    Ok(MetricsReport {
        msae_degrees: angle.degrees,
        msae_radians: angle.radians,
        msae_excluded_faces: angle.excluded_faces,
        positional_error: positional_error(denoised, reference)?,
        quality_mean: quality.mean,
        quality_max: quality.max,
        quality_degenerate_faces: quality.degenerate_faces,
        flipped_normals: flipped_normals(&denoised_field, &reference_field)?,
        feature_angle_degrees,
        feature_edge_count: features.len(),
        params,
    })
}

impl MetricsReport {
    /// Fixed-width table with the positional error scaled by 1e3, matching
    /// the usual presentation of these benchmarks.
    pub fn table(&self) -> String {
        let params = match &self.params {
            Some(p) => format!("({}, {}, {})", p.sigma_s, p.lambda, p.iterations),
            None => "-".to_string(),
        };
        let mut out = String::new();
        out.push_str(&format!(
            "{:<12} {:<12} {:<10} {:<10} {:<7} {:<15} {}\n",
            "MSAE (deg)", "E_v (x1e-3)", "Q mean", "Q max", "flips", "feature edges", "params (sigma_s, lambda, iters)"
        ));
        out.push_str(&format!(
            "{:<12.4} {:<12.4} {:<10.4} {:<10.4} {:<7} {:<15} {}\n",
            self.msae_degrees,
            self.positional_error * 1e3,
            self.quality_mean,
            self.quality_max,
            self.flipped_normals,
            self.feature_edge_count,
            params
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::{Point3, Rotation3, Vector3};

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    fn synthetic_field(normals: Vec<Vector3<f64>>) -> FaceField {
        let n = normals.len();
        FaceField {
            normals,
            areas: vec![1.0; n],
            centroids: vec![Point3::origin(); n],
            degenerate: vec![false; n],
        }
    }

    #[test]
    fn identical_fields_have_zero_deviation() {
        let m = shapes::icosphere(1.0, 1);
        let f = FaceField::of(&m);
        let angle = normal_deviation(&f, &f).unwrap();
        assert_eq!(angle.radians, 0.0);
        assert_eq!(angle.degrees, 0.0);
        assert_eq!(angle.excluded_faces, 0);
    }

    #[test]
    fn deviation_averages_per_face_angles() {
        // Three faces at 10 degrees, three at 0: mean is 5 degrees.
        let tilt = Rotation3::from_axis_angle(&Vector3::y_axis(), 10.0_f64.to_radians());
        let up = Vector3::z();
        let reference = synthetic_field(vec![up; 6]);
        let denoised = synthetic_field(vec![
            tilt * up,
            tilt * up,
            tilt * up,
            up,
            up,
            up,
        ]);
        let angle = normal_deviation(&denoised, &reference).unwrap();
        assert_relative_eq!(angle.degrees, 5.0, epsilon = 1e-10);
    }

    #[test]
    fn deviation_skips_degenerate_pairs() {
        let mut reference = synthetic_field(vec![Vector3::z(); 3]);
        let denoised = synthetic_field(vec![Vector3::z(), Vector3::x(), Vector3::z()]);
        reference.degenerate[1] = true;
        reference.normals[1] = Vector3::zeros();
        let angle = normal_deviation(&denoised, &reference).unwrap();
        assert_eq!(angle.excluded_faces, 1);
        assert_eq!(angle.radians, 0.0);
    }

    #[test]
    fn deviation_requires_matching_counts() {
        let a = synthetic_field(vec![Vector3::z(); 3]);
        let b = synthetic_field(vec![Vector3::z(); 4]);
        assert!(matches!(
            normal_deviation(&a, &b),
            Err(MeshError::FaceCountMismatch { .. })
        ));
    }

    #[test]
    fn positional_error_of_identity_is_zero() {
        let m = shapes::icosphere(1.0, 2);
        assert_eq!(positional_error(&m, &m).unwrap(), 0.0);
    }

    #[test]
    fn positional_error_of_uniform_offset_is_the_offset() {
        // Every vertex sits exactly h above the reference plane and the star
        // areas telescope against the total area, so E_v == h.
        let reference = shapes::plane(6, 6, 1.0);
        let h = 0.05;
        let lifted = reference
            .with_positions(
                reference
                    .vertices()
                    .iter()
                    .map(|v| p(v.x, v.y, v.z + h))
                    .collect(),
            )
            .unwrap();
        assert_relative_eq!(positional_error(&lifted, &reference).unwrap(), h, epsilon = 1e-12);
    }

    #[test]
    fn positional_error_weights_by_star_area() {
        // One interior vertex lifted by h: only its star contributes, so
        // E_v = h * sqrt(star_area / (3 * total_area)).
        let reference = shapes::plane(4, 4, 1.0);
        let center = 2 * 5 + 2;
        let mut positions = reference.vertices().to_vec();
        positions[center].z += 0.125;
        let denoised = reference.with_positions(positions).unwrap();

        let field = FaceField::of(&denoised);
        let star_area: f64 = denoised
            .incident_faces(center)
            .iter()
            .map(|&f| field.areas[f as usize])
            .sum();
        let total: f64 = field.areas.iter().sum();
        let expected = 0.125 * (star_area / (3.0 * total)).sqrt();
        assert_relative_eq!(
            positional_error(&denoised, &reference).unwrap(),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn positional_error_needs_reference_faces() {
        let empty = Mesh::new(vec![p(0.0, 0.0, 0.0)], vec![]).unwrap();
        let m = shapes::plane(1, 1, 1.0);
        assert!(matches!(
            positional_error(&m, &empty),
            Err(MeshError::InvalidArgument(_))
        ));
    }

    #[test]
    fn quality_of_known_triangles() {
        // Equilateral: 1/sqrt(3).
        let h = 3.0_f64.sqrt() / 2.0;
        let eq = Mesh::new(
            vec![p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.5, h, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_relative_eq!(
            quality_index(&eq).per_face[0],
            1.0 / 3.0_f64.sqrt(),
            epsilon = 1e-12
        );

        // Right isoceles with unit legs: circumradius sqrt(2)/2 over edge 1.
        let ri = Mesh::new(
            vec![p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_relative_eq!(
            quality_index(&ri).per_face[0],
            2.0_f64.sqrt() / 2.0,
            epsilon = 1e-12
        );

        // Needle with edges (1, 1, 1.99): hand-evaluated circumradius ratio.
        let apex_h = (1.0 - 0.995f64 * 0.995).sqrt();
        let needle = Mesh::new(
            vec![p(0.0, 0.0, 0.0), p(1.99, 0.0, 0.0), p(0.995, apex_h, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_relative_eq!(
            quality_index(&needle).per_face[0],
            5.0062617,
            max_relative = 1e-6
        );
    }

    #[test]
    fn quality_excludes_degenerate_faces() {
        let m = Mesh::new(
            vec![
                p(0.0, 0.0, 0.0),
                p(1.0, 0.0, 0.0),
                p(0.0, 1.0, 0.0),
                p(2.0, 0.0, 0.0), // collinear with 0 and 1
            ],
            vec![[0, 1, 2], [0, 3, 1]],
        )
        .unwrap();
        let q = quality_index(&m);
        assert!(q.per_face[1].is_infinite());
        assert_eq!(q.degenerate_faces, 1);
        assert_relative_eq!(q.mean, 2.0_f64.sqrt() / 2.0, epsilon = 1e-12);
        assert!(q.max.is_finite());
    }

    #[test]
    fn flipped_normals_counts_reversals() {
        let m = shapes::icosphere(1.0, 1);
        let reference = FaceField::of(&m);
        let mut denoised = reference.clone();
        for f in [3usize, 17, 40] {
            denoised.normals[f] = -denoised.normals[f];
        }
        assert_eq!(flipped_normals(&denoised, &reference).unwrap(), 3);
        assert_eq!(flipped_normals(&reference, &reference).unwrap(), 0);
    }

    #[test]
    fn cube_feature_edges_are_the_twelve_axis_edges() {
        let m = shapes::cube_grid(1, 1.0);
        let field = FaceField::of(&m);
        let edges = feature_edges(&m, &field, 65.0);
        assert_eq!(edges.len(), 12);
        for (a, b) in &edges {
            let va = m.vertices()[*a as usize];
            let vb = m.vertices()[*b as usize];
            let differing = (va.x != vb.x) as u8 + (va.y != vb.y) as u8 + (va.z != vb.z) as u8;
            assert_eq!(differing, 1, "feature edge must be a cube edge, not a diagonal");
        }
    }

    #[test]
    fn feature_threshold_straddles_the_ridge_angle() {
        let m = shapes::roof(2, 3, 1.0, 60.0);
        let field = FaceField::of(&m);
        assert!(feature_edges(&m, &field, 65.0).is_empty());
        let ridge = feature_edges(&m, &field, 55.0);
        assert_eq!(ridge.len(), 3);
        for (a, b) in &ridge {
            assert_eq!(m.vertices()[*a as usize].x, 0.0);
            assert_eq!(m.vertices()[*b as usize].x, 0.0);
        }
    }

    #[test]
    fn evaluate_self_comparison_and_json_round_trip() {
        let m = shapes::cube_grid(2, 1.0);
        let report = evaluate(
            &m,
            &m,
            65.0,
            Some(ParamsEcho {
                sigma_s: 0.55,
                lambda: 0.2,
                iterations: 100,
            }),
        )
        .unwrap();
        assert_eq!(report.msae_degrees, 0.0);
        assert_eq!(report.positional_error, 0.0);
        assert_eq!(report.flipped_normals, 0);
        assert_eq!(report.feature_edge_count, 12 * 2);

        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);

        let table = report.table();
        assert!(table.contains("MSAE"), "{table}");
        assert!(table.contains("(0.55, 0.2, 100)"), "{table}");
    }

    #[test]
    fn evaluate_rejects_mismatched_meshes() {
        let a = shapes::plane(2, 2, 1.0);
        let b = shapes::plane(3, 2, 1.0);
        assert!(matches!(
            evaluate(&a, &b, 65.0, None),
            Err(MeshError::FaceCountMismatch { .. })
        ));
    }

    #[test]
    fn rotated_mesh_deviation_matches_rotation_angle() {
        let m = shapes::icosphere(1.0, 1);
        let rot = Rotation3::from_axis_angle(&Vector3::x_axis(), 0.02);
        let rotated = m
            .with_positions(m.vertices().iter().map(|v| rot * v).collect())
            .unwrap();
        let angle =
            normal_deviation(&FaceField::of(&rotated), &FaceField::of(&m)).unwrap();
        // Normals off the rotation axis tilt by at most the rotation angle.
        assert!(angle.radians <= 0.02 + 1e-12);
        assert!(angle.radians > 0.01);
        assert_abs_diff_eq!(angle.degrees, angle.radians.to_degrees(), epsilon = 1e-15);
    }
}
