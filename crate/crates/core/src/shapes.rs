//! Procedural meshes for tests, benchmarks, and demos: planes, fans, an
//! icosphere, a grid-tessellated cube, and a two-plane roof with a sharp
//! ridge. All generators produce manifold meshes with outward or upward
//! normals.

use std::collections::HashMap;

use nalgebra::Point3;

use crate::mesh::Mesh;

/// Flat triangulated grid in the xy-plane with `nx * ny` cells of the given
/// spacing. Every quad is split along the same diagonal, so each interior
/// vertex has a point-symmetric 1-ring.
pub fn plane(nx: usize, ny: usize, spacing: f64) -> Mesh {
    assert!(nx >= 1 && ny >= 1);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let mut faces = Vec::with_capacity(2 * nx * ny);
    let idx = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    Mesh::new(vertices, faces).expect("grid is manifold")
}

/// Closed triangle fan: a center vertex at height `apex_z` surrounded by a
/// regular `n`-gon of the given radius in the z = 0 plane. The center is the
/// only interior vertex.
pub fn regular_fan(n: usize, radius: f64, apex_z: f64) -> Mesh {
    assert!(n >= 3);
    let mut vertices = vec![Point3::new(0.0, 0.0, apex_z)];
    for k in 0..n {
        let t = std::f64::consts::TAU * k as f64 / n as f64;
        vertices.push(Point3::new(radius * t.cos(), radius * t.sin(), 0.0));
    }
    let faces = (0..n as u32)
        .map(|k| [0, k + 1, (k + 1) % n as u32 + 1])
        .collect();
    Mesh::new(vertices, faces).expect("fan is manifold")
}

/// Regular icosahedron with the given circumradius.
pub fn icosahedron(radius: f64) -> Mesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let vertices = raw
        .iter()
        .map(|&(x, y, z)| {
            let v = nalgebra::Vector3::new(x, y, z).normalize() * radius;
            Point3::from(v)
        })
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    Mesh::new(vertices, faces).expect("icosahedron is manifold")
}

/// Sphere approximation: icosahedron subdivided `subdivisions` times with
/// every vertex projected onto the sphere. Face count is `20 * 4^s`.
pub fn icosphere(radius: f64, subdivisions: usize) -> Mesh {
    let base = icosahedron(radius);
    let mut vertices: Vec<Point3<f64>> = base.vertices().to_vec();
    let mut faces: Vec<[u32; 3]> = base.faces().to_vec();

    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut midpoint = |a: u32, b: u32, vertices: &mut Vec<Point3<f64>>| -> u32 {
            let key = if a < b { (a, b) } else { (b, a) };
            *midpoints.entry(key).or_insert_with(|| {
                let m = (vertices[a as usize].coords + vertices[b as usize].coords) / 2.0;
                vertices.push(Point3::from(m.normalize() * radius));
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }

    Mesh::new(vertices, faces).expect("icosphere is manifold")
}

/// Closed cube surface centered at the origin with edge length `size`, each
/// side tessellated into an `n x n` grid (12 n^2 triangles). Side boundaries
/// are welded, so the cube's twelve edges are sharp interior creases.
pub fn cube_grid(n: usize, size: f64) -> Mesh {
    assert!(n >= 1);
    let step = size / n as f64;
    let min = -size / 2.0;
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut lattice: HashMap<(usize, usize, usize), u32> = HashMap::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();

    let mut vertex_at =
        |key: (usize, usize, usize), vertices: &mut Vec<Point3<f64>>| -> u32 {
            *lattice.entry(key).or_insert_with(|| {
                vertices.push(Point3::new(
                    min + key.0 as f64 * step,
                    min + key.1 as f64 * step,
                    min + key.2 as f64 * step,
                ));
                (vertices.len() - 1) as u32
            })
        };

    // (map (u, v) -> lattice key, flip winding for outward orientation)
    type KeyFn = fn(usize, usize, usize) -> (usize, usize, usize);
    let sides: [(KeyFn, bool); 6] = [
        (|u, v, _| (u, v, 0), true),   // bottom, -z
        (|u, v, n| (u, v, n), false),  // top, +z
        (|u, v, _| (u, 0, v), false),  // front, -y
        (|u, v, n| (u, n, v), true),   // back, +y
        (|u, v, _| (0, u, v), true),   // left, -x
        (|u, v, n| (n, u, v), false),  // right, +x
    ];

    for (key_of, flip) in sides {
        for v in 0..n {
            for u in 0..n {
                let k00 = vertex_at(key_of(u, v, n), &mut vertices);
                let k10 = vertex_at(key_of(u + 1, v, n), &mut vertices);
                let k11 = vertex_at(key_of(u + 1, v + 1, n), &mut vertices);
                let k01 = vertex_at(key_of(u, v + 1, n), &mut vertices);
                if flip {
                    faces.push([k00, k11, k10]);
                    faces.push([k00, k01, k11]);
                } else {
                    faces.push([k00, k10, k11]);
                    faces.push([k00, k11, k01]);
                }
            }
        }
    }

    Mesh::new(vertices, faces).expect("cube surface is manifold")
}

/// Two rectangular planes meeting along a ridge on the y-axis, like a tent
/// roof. `normal_angle_deg` is the angle between the two face normals, so 90
/// gives slopes of 45 degrees on both sides. The grid has `2 * half_cols`
/// columns along x and `rows` rows along y; ridge vertices sit at x = 0.
pub fn roof(half_cols: usize, rows: usize, spacing: f64, normal_angle_deg: f64) -> Mesh {
    assert!(half_cols >= 1 && rows >= 1);
    let slope = (normal_angle_deg.to_radians() / 2.0).tan();
    let cols = 2 * half_cols;
    let mut vertices = Vec::with_capacity((cols + 1) * (rows + 1));
    for j in 0..=rows {
        for i in 0..=cols {
            let x = (i as f64 - half_cols as f64) * spacing;
            vertices.push(Point3::new(x, j as f64 * spacing, -x.abs() * slope));
        }
    }
    let idx = |i: usize, j: usize| (j * (cols + 1) + i) as u32;
    let mut faces = Vec::with_capacity(2 * cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    Mesh::new(vertices, faces).expect("roof is manifold")
}
