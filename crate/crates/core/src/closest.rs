//! Exact point-to-surface distance queries.
//!
//! `closest_point_on_triangle` classifies the query against the triangle's
//! Voronoi regions (vertex, edge, interior) and is exact for degenerate
//! triangles too, where it falls back to the nearest edge segment. The
//! `TriangleGrid` accelerates nearest-triangle queries with a uniform grid
//! over triangle bounding boxes, searched in expanding cell shells; a shell
//! at Chebyshev index `s` can only contain geometry at least `(s-1) * cell`
//! away, so the search stops as soon as the best hit beats that bound. The
//! result is always identical to a scan over every triangle.

use nalgebra::Point3;

use crate::error::{MeshError, Result};
use crate::mesh::Mesh;

pub fn closest_point_on_triangle(
    p: Point3<f64>,
    a: Point3<f64>,
    b: Point3<f64>,
    c: Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;

    // Degenerate (collinear or collapsed) triangles have no interior.
    let cross = ab.cross(&ac);
    let scale = ab.norm_squared().max(ac.norm_squared()).max((c - b).norm_squared());
    if cross.norm_squared() <= 1e-24 * scale * scale {
        let candidates = [
            closest_point_on_segment(p, a, b),
            closest_point_on_segment(p, b, c),
            closest_point_on_segment(p, a, c),
        ];
        return candidates
            .into_iter()
            .min_by(|x, y| {
                (p - x).norm_squared().total_cmp(&(p - y).norm_squared())
            })
            .unwrap();
    }

    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }

    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

fn closest_point_on_segment(p: Point3<f64>, a: Point3<f64>, b: Point3<f64>) -> Point3<f64> {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

/// Uniform grid over a mesh's triangles for nearest-point queries.
pub struct TriangleGrid {
    triangles: Vec<[Point3<f64>; 3]>,
    cells: Vec<Vec<u32>>,
    counts: [usize; 3],
    min: Point3<f64>,
    cell: f64,
}

impl TriangleGrid {
    pub fn build(mesh: &Mesh) -> Result<TriangleGrid> {
        if mesh.face_count() == 0 {
            return Err(MeshError::InvalidArgument(
                "reference mesh has no faces".into(),
            ));
        }
        let triangles: Vec<[Point3<f64>; 3]> = mesh
            .faces()
            .iter()
            .map(|f| {
                [
                    mesh.vertices()[f[0] as usize],
                    mesh.vertices()[f[1] as usize],
                    mesh.vertices()[f[2] as usize],
                ]
            })
            .collect();

        let mut min = triangles[0][0].coords;
        let mut max = min;
        for t in &triangles {
            for v in t {
                min = min.inf(&v.coords);
                max = max.sup(&v.coords);
            }
        }
        let extent = max - min;
        let longest = extent.x.max(extent.y).max(extent.z);
        // Aim for cube cells, roughly cbrt(F) along the longest axis.
        let divisions = (triangles.len() as f64).cbrt().ceil().max(1.0);
        let cell = if longest > 0.0 { longest / divisions } else { 1.0 };

        let counts = [
            axis_count(extent.x, cell),
            axis_count(extent.y, cell),
            axis_count(extent.z, cell),
        ];
        let mut cells = vec![Vec::new(); counts[0] * counts[1] * counts[2]];
        let grid_min = Point3::from(min);
        for (i, t) in triangles.iter().enumerate() {
            let mut lo = t[0].coords;
            let mut hi = lo;
            for v in &t[1..] {
                lo = lo.inf(&v.coords);
                hi = hi.sup(&v.coords);
            }
            let lo = cell_index(Point3::from(lo), grid_min, cell, counts);
            let hi = cell_index(Point3::from(hi), grid_min, cell, counts);
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    for z in lo[2]..=hi[2] {
                        cells[flat_index([x, y, z], counts)].push(i as u32);
                    }
                }
            }
        }

        Ok(TriangleGrid {
            triangles,
            cells,
            counts,
            min: grid_min,
            cell,
        })
    }

    pub fn distance(&self, p: Point3<f64>) -> f64 {
        self.closest_point(p).1
    }

    pub fn closest_point(&self, p: Point3<f64>) -> (Point3<f64>, f64) {
        let home = cell_index(p, self.min, self.cell, self.counts);
        let max_shell = (0..3)
            .map(|axis| home[axis].max(self.counts[axis] - 1 - home[axis]))
            .max()
            .unwrap();

        let mut best_d2 = f64::INFINITY;
        let mut best = p;
        let mut seen = vec![false; self.triangles.len()];
        for shell in 0..=max_shell {
            if best_d2.is_finite() {
                let reachable = (shell as f64 - 1.0).max(0.0) * self.cell;
                if reachable * reachable >= best_d2 {
                    break;
                }
            }
            self.for_each_shell_cell(home, shell, |cell| {
                for &t in &self.cells[cell] {
                    if std::mem::replace(&mut seen[t as usize], true) {
                        continue;
                    }
                    let [a, b, c] = self.triangles[t as usize];
                    let q = closest_point_on_triangle(p, a, b, c);
                    let d2 = (p - q).norm_squared();
                    if d2 < best_d2 {
                        best_d2 = d2;
                        best = q;
                    }
                }
            });
        }
        (best, best_d2.sqrt())
    }

    fn for_each_shell_cell(&self, home: [usize; 3], shell: usize, mut f: impl FnMut(usize)) {
        let s = shell as isize;
        let range = |axis: usize| {
            let h = home[axis] as isize;
            (h - s).max(0)..=(h + s).min(self.counts[axis] as isize - 1)
        };
        for x in range(0) {
            for y in range(1) {
                for z in range(2) {
                    let cheb = (x - home[0] as isize)
                        .abs()
                        .max((y - home[1] as isize).abs())
                        .max((z - home[2] as isize).abs());
                    if cheb == s {
                        f(flat_index([x as usize, y as usize, z as usize], self.counts));
                    }
                }
            }
        }
    }
}

fn axis_count(extent: f64, cell: f64) -> usize {
    ((extent / cell).ceil() as usize).max(1)
}

fn cell_index(p: Point3<f64>, min: Point3<f64>, cell: f64, counts: [usize; 3]) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for axis in 0..3 {
        let raw = ((p.coords[axis] - min.coords[axis]) / cell).floor();
        idx[axis] = (raw.max(0.0) as usize).min(counts[axis] - 1);
    }
    idx
}

fn flat_index(idx: [usize; 3], counts: [usize; 3]) -> usize {
    (idx[2] * counts[1] + idx[1]) * counts[0] + idx[0]
}
