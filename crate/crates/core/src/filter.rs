//! Robust bilateral face-normal filter.
//!
//! Each face normal is replaced by an area-weighted average over its
//! neighborhood disk. Weights combine a Gaussian falloff on centroid distance
//! with a similarity kernel on the normal difference `|n_i - n_j|`; the
//! default similarity kernel is Tukey's bi-weight, which reaches exactly zero
//! at `sigma_s` and therefore stops smoothing across sharp features outright.
//! All outputs are computed from the input normals (a Jacobi-style pass) and
//! renormalized to unit length.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::field::FaceField;
use crate::neighborhood::NeighborDisks;

/// Similarity kernel on the normal difference. `Gaussian` exists for
/// ablation; unlike Tukey's bi-weight it never reaches zero, so it leaks
/// smoothing across features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityKernel {
    #[default]
    Tukey,
    Gaussian,
}

#[derive(Debug, Clone, Copy)]
pub struct FilterParams {
    /// Spatial falloff scale; the mesh-derived default is the mean
    /// adjacent-centroid distance.
    pub sigma_c: f64,
    /// Similarity cutoff scale on `|n_i - n_j|`, which lives in [0, 2].
    pub sigma_s: f64,
    pub similarity: SimilarityKernel,
}

impl FilterParams {
    pub fn new(sigma_c: f64, sigma_s: f64) -> FilterParams {
        FilterParams {
            sigma_c,
            sigma_s,
            similarity: SimilarityKernel::Tukey,
        }
    }
}

/// Tukey bi-weight: `0.5 * (1 - (x/sigma)^2)^2` inside the support,
/// identically zero at and beyond `x = sigma`.
pub fn tukey_weight(x: f64, sigma: f64) -> f64 {
    if x >= sigma {
        return 0.0;
    }
    let t = x / sigma;
    let u = 1.0 - t * t;
    0.5 * u * u
}

/// Gaussian falloff `exp(-x^2 / (2 sigma^2))`.
pub fn gaussian_weight(x: f64, sigma: f64) -> f64 {
    (-x * x / (2.0 * sigma * sigma)).exp()
}

#[derive(Debug, Clone)]
pub struct FilteredNormals {
    /// Unit normals per face; degenerate faces keep their zero normal.
    pub normals: Vec<Vector3<f64>>,
    /// Faces whose weighted average could not be renormalized and kept their
    /// input normal instead.
    pub warnings: usize,
}

pub fn filter_normals(
    field: &FaceField,
    disks: &NeighborDisks,
    params: &FilterParams,
) -> FilteredNormals {
    let results: Vec<(Vector3<f64>, bool)> = (0..field.normals.len())
        .into_par_iter()
        .map(|i| filter_one(field, disks, params, i))
        .collect();

    let warnings = results.iter().filter(|(_, warned)| *warned).count();
    FilteredNormals {
        normals: results.into_iter().map(|(n, _)| n).collect(),
        warnings,
    }
}

fn filter_one(
    field: &FaceField,
    disks: &NeighborDisks,
    params: &FilterParams,
    i: usize,
) -> (Vector3<f64>, bool) {
    // Degenerate faces are not filter centers; they keep their zero normal.
    if field.degenerate[i] {
        return (field.normals[i], false);
    }

    let center_normal = field.normals[i];
    let mut sum = Vector3::zeros();
    let mut normalizer = 0.0;
    for entry in disks.disk(i) {
        let j = entry.face as usize;
        if field.degenerate[j] {
            continue;
        }
        let spatial = gaussian_weight(entry.distance, params.sigma_c);
        let difference = (center_normal - field.normals[j]).norm();
        let similarity = match params.similarity {
            SimilarityKernel::Tukey => tukey_weight(difference, params.sigma_s),
            SimilarityKernel::Gaussian => gaussian_weight(difference, params.sigma_s),
        };
        let weight = field.areas[j] * spatial * similarity;
        sum += weight * field.normals[j];
        normalizer += weight;
    }

    if normalizer <= 0.0 {
        return (center_normal, true);
    }
    let averaged = sum / normalizer;
    let length = averaged.norm();
    if length < 1e-12 {
        return (center_normal, true);
    }
    (averaged / length, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::MeshStats;
    use crate::mesh::Mesh;
    use crate::neighborhood::{self, DiskEntry};
    use crate::shapes;
    use approx::assert_relative_eq;
    use nalgebra::{Point3, Rotation3, Vector3};

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    #[test]
    fn tukey_weight_frozen_values() {
        // Hand-evaluated: 0.5 (1 - (x/s)^2)^2.
        assert_eq!(tukey_weight(0.0, 1.0), 0.5);
        assert_eq!(tukey_weight(1.0, 1.0), 0.0);
        assert_eq!(tukey_weight(1.5, 1.0), 0.0, "beyond the support");
        assert_eq!(tukey_weight(0.5, 1.0), 0.28125);
        assert_eq!(tukey_weight(0.3, 0.6), 0.28125, "scales with sigma");
    }

    #[test]
    fn gaussian_weight_frozen_values() {
        assert_eq!(gaussian_weight(0.0, 0.7), 1.0);
        assert_relative_eq!(gaussian_weight(0.7, 0.7), (-0.5f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(gaussian_weight(2.1, 0.7), (-4.5f64).exp(), epsilon = 1e-15);
    }

    fn filter_setup(mesh: &Mesh, sigma_s: f64) -> (FaceField, NeighborDisks, FilterParams) {
        let field = FaceField::of(mesh);
        let stats = MeshStats::of(mesh).unwrap();
        let disks = NeighborDisks::build(mesh, &field, neighborhood::default_radius(&stats));
        let params = FilterParams::new(stats.avg_centroid_distance, sigma_s);
        (field, disks, params)
    }

    #[test]
    fn flat_plane_normals_are_unchanged() {
        let mesh = shapes::plane(5, 5, 1.0);
        let (field, disks, params) = filter_setup(&mesh, 0.6);
        let out = filter_normals(&field, &disks, &params);
        assert_eq!(out.warnings, 0);
        for (got, want) in out.normals.iter().zip(&field.normals) {
            assert_relative_eq!(got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn tukey_cutoff_keeps_sharp_pair_intact() {
        // Two roof faces with a 90-degree normal angle: |n_a - n_b| = sqrt(2)
        // exceeds sigma_s = 0.6, so each face only sees itself.
        let mesh = shapes::roof(1, 1, 1.0, 90.0);
        let (field, disks, params) = filter_setup(&mesh, 0.6);
        let out = filter_normals(&field, &disks, &params);
        assert_eq!(out.warnings, 0);
        for (got, want) in out.normals.iter().zip(&field.normals) {
            assert_relative_eq!(got, want, epsilon = 1e-14);
        }
    }

    /// Independent oracle: plain scalar loop over every face pair with the
    /// weight formulas written out literally.
    fn filtered_oracle(
        mesh: &Mesh,
        field: &FaceField,
        radius: f64,
        sigma_c: f64,
        sigma_s: f64,
    ) -> Vec<Vector3<f64>> {
        (0..mesh.face_count())
            .map(|i| {
                if field.degenerate[i] {
                    return field.normals[i];
                }
                let mut sum = Vector3::zeros();
                for j in 0..mesh.face_count() {
                    if field.degenerate[j] {
                        continue;
                    }
                    let d = (field.centroids[i] - field.centroids[j]).norm();
                    if d > radius {
                        continue;
                    }
                    let x = (field.normals[i] - field.normals[j]).norm();
                    let similarity = if x >= sigma_s {
                        0.0
                    } else {
                        0.5 * (1.0 - (x / sigma_s) * (x / sigma_s)).powi(2)
                    };
                    let w = field.areas[j]
                        * (-d * d / (2.0 * sigma_c * sigma_c)).exp()
                        * similarity;
                    sum += w * field.normals[j];
                }
                sum.normalize()
            })
            .collect()
    }

    #[test]
    fn five_face_fan_matches_scalar_oracle() {
        // Tilted fan: five distinct normals, fully connected disk. The oracle
        // scans all pairs, so agreement also confirms the BFS disk loses
        // nothing at a generous radius.
        let mesh = shapes::regular_fan(5, 1.0, 0.35);
        let field = FaceField::of(&mesh);
        let stats = MeshStats::of(&mesh).unwrap();
        let radius = 10.0 * stats.avg_centroid_distance;
        let sigma_c = stats.avg_centroid_distance;
        let sigma_s = 0.8;

        let disks = NeighborDisks::build(&mesh, &field, radius);
        let params = FilterParams::new(sigma_c, sigma_s);
        let got = filter_normals(&field, &disks, &params);
        let want = filtered_oracle(&mesh, &field, radius, sigma_c, sigma_s);

        assert_eq!(got.warnings, 0);
        for (g, w) in got.normals.iter().zip(&want) {
            assert_relative_eq!(g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn outputs_are_unit_length_on_noisy_mesh() {
        let mesh = crate::noise::add_noise(
            &shapes::icosphere(1.0, 2),
            &crate::noise::NoiseSpec {
                distribution: crate::noise::NoiseDistribution::Gaussian,
                direction: crate::noise::NoiseDirection::Random,
                intensity: 0.3,
                seed: 7,
            },
        )
        .unwrap();
        let (field, disks, params) = filter_setup(&mesh, 0.7);
        let out = filter_normals(&field, &disks, &params);
        for (f, n) in out.normals.iter().enumerate() {
            if !field.degenerate[f] {
                assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_neighbors_are_excluded_and_skipped_as_centers() {
        // A flat pair plus a zero-area sliver hanging off one edge. The
        // sliver must neither receive a filtered normal nor perturb its
        // neighbors' averages.
        let mesh = Mesh::new(
            vec![
                p(0.0, 0.0, 0.0),
                p(1.0, 0.0, 0.0),
                p(0.0, 1.0, 0.0),
                p(1.0, -1.0, 0.0),
                p(0.5, -0.5, 0.0), // collinear with vertices 0 and 3
            ],
            vec![[0, 1, 2], [0, 3, 1], [0, 4, 3]],
        )
        .unwrap();
        let field = FaceField::of(&mesh);
        assert!(field.degenerate[2], "sliver must be degenerate");

        let stats = MeshStats::of(&mesh).unwrap();
        let disks = NeighborDisks::build(&mesh, &field, 100.0 * stats.avg_centroid_distance);
        let out = filter_normals(&field, &disks, &FilterParams::new(1.0, 0.8));
        assert_eq!(out.normals[2], Vector3::zeros());
        assert_eq!(out.warnings, 0);
        for f in 0..2 {
            assert_relative_eq!(out.normals[f], Vector3::z(), epsilon = 1e-14);
        }
    }

    #[test]
    fn cancelled_average_warns_and_keeps_input() {
        // Disk engineered so the contributions cancel exactly: the center's
        // self weight 0.5625 * 0.5 = 0.28125 against two opposing faces at
        // 0.5 * 0.28125 each (sigma_s = 4 puts the antipodal normal
        // difference of 2 at similarity exactly 0.28125). Every product is
        // a dyadic rational, so the sum is a bitwise zero vector.
        let field = FaceField {
            normals: vec![Vector3::z(), -Vector3::z(), -Vector3::z()],
            areas: vec![0.5625, 0.5, 0.5],
            centroids: vec![Point3::origin(); 3],
            degenerate: vec![false; 3],
        };
        let self_disk = |f: u32| vec![DiskEntry { face: f, distance: 0.0 }];
        let disks = NeighborDisks::from_disks(
            vec![
                (0..3).map(|f| DiskEntry { face: f, distance: 0.0 }).collect(),
                self_disk(1),
                self_disk(2),
            ],
            1.0,
        );
        let params = FilterParams {
            sigma_c: 1.0,
            sigma_s: 4.0,
            similarity: SimilarityKernel::Tukey,
        };
        assert_eq!(tukey_weight(2.0, 4.0), 0.28125);
        let out = filter_normals(&field, &disks, &params);
        assert_eq!(out.warnings, 1);
        assert_eq!(out.normals[0], Vector3::z());
        assert_eq!(out.normals[1], -Vector3::z());
    }

    #[test]
    fn rotation_equivariance() {
        let mesh = shapes::regular_fan(7, 1.0, 0.4);
        let rot = Rotation3::from_euler_angles(0.9, -0.3, 1.7);
        let rotated = mesh
            .with_positions(mesh.vertices().iter().map(|v| rot * v).collect())
            .unwrap();

        let (field_a, disks_a, params) = filter_setup(&mesh, 0.9);
        let (field_b, disks_b, _) = filter_setup(&rotated, 0.9);
        let out_a = filter_normals(&field_a, &disks_a, &params);
        let out_b = filter_normals(&field_b, &disks_b, &params);
        for (a, b) in out_a.normals.iter().zip(&out_b.normals) {
            assert_relative_eq!(rot * a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn face_relabeling_permutes_outputs() {
        let mesh = shapes::regular_fan(6, 1.0, 0.3);
        // Rotate the face list; geometry is identical.
        let mut faces = mesh.faces().to_vec();
        faces.rotate_left(2);
        let relabeled = Mesh::new(mesh.vertices().to_vec(), faces).unwrap();

        let (field_a, disks_a, params) = filter_setup(&mesh, 0.9);
        let (field_b, disks_b, _) = filter_setup(&relabeled, 0.9);
        let out_a = filter_normals(&field_a, &disks_a, &params);
        let out_b = filter_normals(&field_b, &disks_b, &params);
        for f in 0..mesh.face_count() {
            let g = (f + mesh.face_count() - 2) % mesh.face_count();
            assert_relative_eq!(out_a.normals[f], out_b.normals[g], epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_kernel_leaks_across_the_crease() {
        // Same sharp pair as the Tukey cutoff test: the Gaussian similarity
        // kernel never reaches zero, so the normals tilt toward each other.
        let mesh = shapes::roof(1, 1, 1.0, 90.0);
        let field = FaceField::of(&mesh);
        let stats = MeshStats::of(&mesh).unwrap();
        let disks =
            NeighborDisks::build(&mesh, &field, neighborhood::default_radius(&stats));
        let params = FilterParams {
            sigma_c: stats.avg_centroid_distance,
            sigma_s: 0.6,
            similarity: SimilarityKernel::Gaussian,
        };
        let out = filter_normals(&field, &disks, &params);
        let moved = (out.normals[0] - field.normals[0]).norm();
        assert!(moved > 1e-3, "gaussian similarity must smooth the pair, moved {moved}");
    }
}
