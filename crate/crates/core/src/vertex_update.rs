//! Vertex reconstruction from filtered face normals.
//!
//! Each pass moves every vertex by two terms computed from a position
//! snapshot (Jacobi style, so results are independent of traversal order):
//!
//! * an orthogonality step that pulls the star's edges perpendicular to the
//!   filtered normals of their incident faces, averaged over the star with a
//!   `1 / (3 |F_v|)` factor. It is a guaranteed-descent step on the quadratic
//!   energy `sum (n_k . (v_i - v_j))^2` over star edges;
//! * a fidelity term `lambda * R` that resists tangential drift, built from
//!   the squared-edge-length-weighted differential coordinate `D` and its
//!   tangential part `D_t` as `R = D + D_t`. When a vertex normal cannot be
//!   defined the tangential projection falls back to `D_t = D` (so `R = 2D`)
//!   and the event is counted.

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::error::{MeshError, Result};
use crate::field::FaceField;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy)]
pub struct UpdateParams {
    /// Initial fidelity weight; the pipeline decays it per outer iteration.
    pub lambda: f64,
    /// Per-iteration multiplier on lambda.
    pub decay: f64,
    /// Jacobi passes per outer iteration.
    pub inner_vertex_iters: usize,
}

impl UpdateParams {
    pub fn new(lambda: f64) -> UpdateParams {
        UpdateParams {
            lambda,
            decay: 0.6,
            inner_vertex_iters: 1,
        }
    }
}

pub fn decay_lambda(lambda: f64, decay: f64) -> f64 {
    lambda * decay
}

/// Area-weighted mean of the given face normals over the vertex's star,
/// renormalized. `None` when the star has no usable face or the mean cancels
/// below 1e-12.
pub fn vertex_normal(
    mesh: &Mesh,
    field: &FaceField,
    face_normals: &[Vector3<f64>],
    vertex: usize,
) -> Option<Vector3<f64>> {
    let mut weighted = Vector3::zeros();
    let mut total_area = 0.0;
    for &f in mesh.incident_faces(vertex) {
        let f = f as usize;
        if !field.degenerate[f] {
            weighted += field.areas[f] * face_normals[f];
            total_area += field.areas[f];
        }
    }
    if total_area <= 0.0 {
        return None;
    }
    let mean = weighted / total_area;
    let length = mean.norm();
    if length < 1e-12 {
        None
    } else {
        Some(mean / length)
    }
}

/// Differential coordinate of a vertex: offset from the vertex to the
/// weighted mean of its 1-ring, with squared edge lengths as weights. Zero
/// for isolated vertices and rings collapsed onto the vertex.
pub fn differential_coordinate(mesh: &Mesh, vertex: usize) -> Vector3<f64> {
    differential_at(mesh.vertices(), &ring_of(mesh, vertex), vertex)
}

fn ring_of(mesh: &Mesh, vertex: usize) -> Vec<u32> {
    let mut ring: Vec<u32> = mesh
        .incident_faces(vertex)
        .iter()
        .flat_map(|&f| mesh.faces()[f as usize])
        .filter(|&v| v as usize != vertex)
        .collect();
    ring.sort_unstable();
    ring.dedup();
    ring
}

fn differential_at(positions: &[Point3<f64>], ring: &[u32], vertex: usize) -> Vector3<f64> {
    let v = positions[vertex];
    let mut weight_sum = 0.0;
    let mut weighted = Vector3::zeros();
    for &j in ring {
        let neighbor = positions[j as usize];
        let w = (neighbor - v).norm_squared();
        weight_sum += w;
        weighted += w * neighbor.coords;
    }
    if weight_sum > 0.0 {
        weighted / weight_sum - v.coords
    } else {
        Vector3::zeros()
    }
}

/// Splits the differential coordinate against a unit vertex normal:
/// returns the tangential part `d_t = d - (d . n) n` and the combined
/// fidelity vector `r = d + d_t`.
pub fn fidelity_term(d: Vector3<f64>, normal: Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let tangential = d - d.dot(&normal) * normal;
    (tangential, d + tangential)
}

/// Mean pull of the star's edges toward orthogonality with the filtered
/// normals: `1/(3 |F_v|) * sum over faces k and their two edges (i, j) of
/// (n_k . (v_j - v_i)) n_k`. Zero for vertices without faces.
pub fn orthogonality_step(
    mesh: &Mesh,
    face_normals: &[Vector3<f64>],
    vertex: usize,
) -> Vector3<f64> {
    step_at(mesh.vertices(), mesh, face_normals, vertex)
}

fn step_at(
    positions: &[Point3<f64>],
    mesh: &Mesh,
    face_normals: &[Vector3<f64>],
    vertex: usize,
) -> Vector3<f64> {
    let star = mesh.incident_faces(vertex);
    if star.is_empty() {
        return Vector3::zeros();
    }
    let v = positions[vertex];
    let mut sum = Vector3::zeros();
    for &k in star {
        let normal = face_normals[k as usize];
        for &j in &mesh.faces()[k as usize] {
            if j as usize != vertex {
                sum += normal.dot(&(positions[j as usize] - v)) * normal;
            }
        }
    }
    sum / (3.0 * star.len() as f64)
}

#[derive(Debug, Clone)]
pub struct VertexUpdate {
    pub positions: Vec<Point3<f64>>,
    /// Vertices whose normal was undefined, making the fidelity term fall
    /// back to `R = 2D`.
    pub normal_fallbacks: usize,
}

pub fn update_vertices(
    mesh: &Mesh,
    field: &FaceField,
    face_normals: &[Vector3<f64>],
    params: &UpdateParams,
    lambda: f64,
) -> Result<VertexUpdate> {
    if face_normals.len() != mesh.face_count() {
        return Err(MeshError::FaceCountMismatch {
            left: mesh.face_count(),
            right: face_normals.len(),
        });
    }
    let vertex_count = mesh.vertex_count();
    let rings: Vec<Vec<u32>> = (0..vertex_count)
        .into_par_iter()
        .map(|v| ring_of(mesh, v))
        .collect();
    // Normals depend on the per-iteration face field, not on positions, so
    // they hold across inner passes.
    let normals: Vec<Option<Vector3<f64>>> = (0..vertex_count)
        .into_par_iter()
        .map(|v| vertex_normal(mesh, field, face_normals, v))
        .collect();
    let normal_fallbacks = normals.iter().filter(|n| n.is_none()).count();

    let mut positions = mesh.vertices().to_vec();
    for _ in 0..params.inner_vertex_iters.max(1) {
        let next: Vec<Point3<f64>> = (0..vertex_count)
            .into_par_iter()
            .map(|i| {
                let step = step_at(&positions, mesh, face_normals, i);
                let d = differential_at(&positions, &rings[i], i);
                let r = match normals[i] {
                    Some(n) => fidelity_term(d, n).1,
                    None => 2.0 * d,
                };
                positions[i] + step + lambda * r
            })
            .collect();
        if let Some(bad) = next
            .iter()
            .position(|p| !p.coords.iter().all(|c| c.is_finite()))
        {
            return Err(MeshError::NonFiniteVertex { vertex: bad });
        }
        positions = next;
    }

    Ok(VertexUpdate {
        positions,
        normal_fallbacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
        Point3::new(x, y, z)
    }

    #[test]
    fn decay_values() {
        assert_relative_eq!(decay_lambda(0.2, 0.6), 0.12, epsilon = 1e-15);
        assert_eq!(decay_lambda(0.0, 0.6), 0.0);
        let mut lambda = 0.2;
        for _ in 0..5 {
            lambda = decay_lambda(lambda, 0.6);
        }
        assert_relative_eq!(lambda, 0.2 * 0.6_f64.powi(5), epsilon = 1e-14);
    }

    #[test]
    fn vertex_normal_of_flat_fan_is_up() {
        let m = shapes::regular_fan(6, 1.0, 0.0);
        let field = FaceField::of(&m);
        let n = vertex_normal(&m, &field, &field.normals, 0).unwrap();
        assert_relative_eq!(n, Vector3::z(), epsilon = 1e-15);
    }

    #[test]
    fn vertex_normal_of_orthogonal_corner() {
        // Three equal-area faces in the coordinate planes meeting at the
        // origin: normals +z, +x, +y average to (1,1,1)/sqrt(3).
        let m = Mesh::new(
            vec![
                p(0.0, 0.0, 0.0),
                p(1.0, 0.0, 0.0),
                p(0.0, 1.0, 0.0),
                p(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 2, 3], [0, 3, 1]],
        )
        .unwrap();
        let field = FaceField::of(&m);
        let n = vertex_normal(&m, &field, &field.normals, 0).unwrap();
        let s = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(n, Vector3::new(s, s, s), epsilon = 1e-14);
    }

    #[test]
    fn vertex_normal_is_area_weighted() {
        // Areas 1 and 2 with normals +z and +x: mean direction (2, 0, 1)/sqrt(5).
        let m = Mesh::new(
            vec![
                p(0.0, 0.0, 0.0),
                p(2.0, 0.0, 0.0),
                p(0.0, 1.0, 0.0),
                p(0.0, 2.0, 0.0),
                p(0.0, 0.0, 2.0),
            ],
            vec![[0, 1, 2], [0, 3, 4]],
        )
        .unwrap();
        let field = FaceField::of(&m);
        assert_relative_eq!(field.areas[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(field.areas[1], 2.0, epsilon = 1e-15);
        let n = vertex_normal(&m, &field, &field.normals, 0).unwrap();
        let s = 5.0_f64.sqrt();
        assert_relative_eq!(n, Vector3::new(2.0 / s, 0.0, 1.0 / s), epsilon = 1e-14);
    }

    #[test]
    fn vertex_normal_undefined_cases() {
        // Isolated vertex: no incident faces.
        let m = Mesh::new(
            vec![p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0), p(9.0, 9.0, 9.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let field = FaceField::of(&m);
        assert!(vertex_normal(&m, &field, &field.normals, 3).is_none());

        // Opposite-orientation sandwich: the area-weighted mean cancels.
        let s = Mesh::new(
            vec![p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)],
            vec![[0, 1, 2], [0, 2, 1]],
        )
        .unwrap();
        let sf = FaceField::of(&s);
        assert!(vertex_normal(&s, &sf, &sf.normals, 0).is_none());
    }

    #[test]
    fn differential_coordinate_frozen_example() {
        // Neighbors at (1,0,0) and (0,2,0) with squared-length weights 1 and
        // 4: weighted mean (0.2, 1.6, 0), and D equals it at the origin.
        let m = Mesh::new(
            vec![p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 2.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let d = differential_coordinate(&m, 0);
        assert_relative_eq!(d, Vector3::new(0.2, 1.6, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn differential_coordinate_vanishes_on_symmetric_ring() {
        let m = shapes::regular_fan(6, 1.0, 0.0);
        assert_relative_eq!(
            differential_coordinate(&m, 0),
            Vector3::zeros(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn differential_coordinate_is_translation_invariant() {
        let m = shapes::regular_fan(7, 1.3, 0.4);
        let shift = Vector3::new(12.0, -7.5, 3.25);
        let moved = m
            .with_positions(m.vertices().iter().map(|v| v + shift).collect())
            .unwrap();
        for v in 0..m.vertex_count() {
            assert_relative_eq!(
                differential_coordinate(&m, v),
                differential_coordinate(&moved, v),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn fidelity_term_cases() {
        let n = Vector3::z();
        // Purely normal D: tangential part vanishes, R = D.
        let (dt, r) = fidelity_term(Vector3::new(0.0, 0.0, 2.0), n);
        assert_relative_eq!(dt, Vector3::zeros(), epsilon = 1e-15);
        assert_relative_eq!(r, Vector3::new(0.0, 0.0, 2.0), epsilon = 1e-15);
        // Purely tangential D: R doubles it.
        let (dt, r) = fidelity_term(Vector3::new(1.0, 0.0, 0.0), n);
        assert_relative_eq!(dt, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(r, Vector3::new(2.0, 0.0, 0.0), epsilon = 1e-15);
        // Mixed.
        let (dt, r) = fidelity_term(Vector3::new(1.0, 0.0, 1.0), n);
        assert_relative_eq!(dt, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(r, Vector3::new(2.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn step_vanishes_for_own_geometric_normals() {
        // A face's geometric normal is orthogonal to its own edges, so with
        // unfiltered normals every vertex is already optimal.
        let m = shapes::regular_fan(6, 1.0, 0.37);
        let field = FaceField::of(&m);
        for v in 0..m.vertex_count() {
            assert_relative_eq!(
                orthogonality_step(&m, &field.normals, v),
                Vector3::zeros(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn lifted_fan_apex_steps_down_by_two_thirds() {
        // Hand-derived: with all filtered normals vertical, the apex of a
        // closed 6-fan at height h collects 12 edge terms of -h over a
        // normalizer of 18, a step of -2h/3; each rim vertex collects 2h
        // over 6, a step of +h/3. One pass flattens the fan to z = h/3.
        let h = 0.9;
        let m = shapes::regular_fan(6, 1.0, h);
        let field = FaceField::of(&m);
        let vertical = vec![Vector3::z(); m.face_count()];

        let apex = orthogonality_step(&m, &vertical, 0);
        assert_relative_eq!(apex, Vector3::new(0.0, 0.0, -2.0 * h / 3.0), epsilon = 1e-14);
        let rim = orthogonality_step(&m, &vertical, 1);
        assert_relative_eq!(rim, Vector3::new(0.0, 0.0, h / 3.0), epsilon = 1e-14);

        let params = UpdateParams::new(0.0);
        let out = update_vertices(&m, &field, &vertical, &params, 0.0).unwrap();
        for pos in &out.positions {
            assert_relative_eq!(pos.z, h / 3.0, epsilon = 1e-14);
        }

        // A second inner pass leaves the now-flat fan alone.
        let two = UpdateParams {
            inner_vertex_iters: 2,
            ..params
        };
        let twice = update_vertices(&m, &field, &vertical, &two, 0.0).unwrap();
        for (a, b) in out.positions.iter().zip(&twice.positions) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn flat_plane_is_a_fixed_point_at_zero_lambda() {
        let m = shapes::plane(4, 4, 1.0);
        let field = FaceField::of(&m);
        let out = update_vertices(&m, &field, &field.normals, &UpdateParams::new(0.0), 0.0)
            .unwrap();
        assert_eq!(out.positions, m.vertices());
        assert_eq!(out.normal_fallbacks, 0);
    }

    #[test]
    fn symmetric_interior_vertex_survives_positive_lambda() {
        let m = shapes::plane(4, 4, 1.0);
        let field = FaceField::of(&m);
        let out = update_vertices(&m, &field, &field.normals, &UpdateParams::new(0.2), 0.2)
            .unwrap();
        let center = 2 * 5 + 2;
        assert_relative_eq!(out.positions[center], m.vertices()[center], epsilon = 1e-13);
    }

    fn jittered_fan(seed: u64) -> (Mesh, Vec<Vector3<f64>>) {
        let base = shapes::regular_fan(6, 1.0, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = base
            .vertices()
            .iter()
            .map(|v| {
                p(
                    v.x + rng.random_range(-0.1..0.1),
                    v.y + rng.random_range(-0.1..0.1),
                    v.z + rng.random_range(-0.1..0.1),
                )
            })
            .collect();
        let mesh = base.with_positions(positions).unwrap();
        let normals = (0..mesh.face_count())
            .map(|_| {
                Vector3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.5..1.5),
                )
                .normalize()
            })
            .collect();
        (mesh, normals)
    }

    /// The energy the step descends: sum over star edges and their incident
    /// faces of the squared normal component of the edge.
    fn star_energy(mesh: &Mesh, normals: &[Vector3<f64>], vertex: usize, at: Point3<f64>) -> f64 {
        let mut e = 0.0;
        for (j, faces) in mesh.vertex_star(vertex) {
            for k in faces {
                let d = at - mesh.vertices()[j as usize];
                let t = normals[k as usize].dot(&d);
                e += t * t;
            }
        }
        e
    }

    #[test]
    fn step_matches_finite_difference_gradient() {
        for seed in 0..8 {
            let (mesh, normals) = jittered_fan(seed);
            for vertex in 0..mesh.vertex_count() {
                let star_size = mesh.incident_faces(vertex).len() as f64;
                let v = mesh.vertices()[vertex];
                let eps = 1e-6;
                let mut grad = Vector3::zeros();
                for axis in 0..3 {
                    let mut fwd = v;
                    let mut bwd = v;
                    fwd.coords[axis] += eps;
                    bwd.coords[axis] -= eps;
                    grad[axis] = (star_energy(&mesh, &normals, vertex, fwd)
                        - star_energy(&mesh, &normals, vertex, bwd))
                        / (2.0 * eps);
                }
                let expected = -grad / (6.0 * star_size);
                let got = orthogonality_step(&mesh, &normals, vertex);
                assert_relative_eq!(got, expected, epsilon = 1e-9, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn step_never_increases_star_energy() {
        // The step is -grad E / (6 |F_v|); the Hessian's largest eigenvalue
        // is at most 4 |F_v|, so the effective step size stays well inside
        // the stable range and energy cannot increase.
        for seed in 0..10 {
            let (mesh, normals) = jittered_fan(seed);
            for vertex in 0..mesh.vertex_count() {
                let before = star_energy(&mesh, &normals, vertex, mesh.vertices()[vertex]);
                let step = orthogonality_step(&mesh, &normals, vertex);
                let after =
                    star_energy(&mesh, &normals, vertex, mesh.vertices()[vertex] + step);
                assert!(
                    after <= before * (1.0 + 1e-12),
                    "energy rose from {before} to {after}"
                );
            }
        }
    }

    #[test]
    fn undefined_normals_fall_back_and_are_counted() {
        let m = Mesh::new(
            vec![p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0)],
            vec![[0, 1, 2], [0, 2, 1]],
        )
        .unwrap();
        let field = FaceField::of(&m);
        let out = update_vertices(&m, &field, &field.normals, &UpdateParams::new(0.1), 0.1)
            .unwrap();
        assert_eq!(out.normal_fallbacks, 3);
        assert!(out
            .positions
            .iter()
            .all(|p| p.coords.iter().all(|c| c.is_finite())));
    }

    #[test]
    fn non_finite_result_is_reported_with_vertex() {
        let m = shapes::regular_fan(5, 1.0, 0.1);
        let field = FaceField::of(&m);
        let mut normals = field.normals.clone();
        normals[2] = Vector3::new(f64::NAN, 0.0, 0.0);
        let err = update_vertices(&m, &field, &normals, &UpdateParams::new(0.0), 0.0);
        assert!(matches!(err, Err(MeshError::NonFiniteVertex { .. })));
    }

    #[test]
    fn normal_count_mismatch_is_rejected() {
        let m = shapes::regular_fan(5, 1.0, 0.1);
        let field = FaceField::of(&m);
        let err = update_vertices(
            &m,
            &field,
            &field.normals[..3],
            &UpdateParams::new(0.0),
            0.0,
        );
        assert!(matches!(err, Err(MeshError::FaceCountMismatch { .. })));
    }
}
