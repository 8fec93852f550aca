//! Per-face neighborhoods for the normal filter.
//!
//! A face's neighborhood ("disk") is grown by breadth-first search over edge
//! adjacency, admitting faces whose centroid lies within `radius` of the
//! center face's centroid, inclusive. Traversal only continues through
//! admitted faces, so the disk is a connected patch around the center rather
//! than a plain Euclidean ball; the center itself is always present at
//! distance zero. Disks are built once from the noisy mesh and reused across
//! iterations unless the caller opts into recomputation.

use std::collections::{HashSet, VecDeque};

use rayon::prelude::*;

use crate::field::{FaceField, MeshStats};
use crate::mesh::Mesh;

/// Default filter radius: twice the mean adjacent-centroid distance.
pub fn default_radius(stats: &MeshStats) -> f64 {
    2.0 * stats.avg_centroid_distance
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskEntry {
    pub face: u32,
    /// Euclidean centroid distance to the disk's center face.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct NeighborDisks {
    disks: Vec<Vec<DiskEntry>>,
    radius: f64,
}

impl NeighborDisks {
    pub fn build(mesh: &Mesh, field: &FaceField, radius: f64) -> NeighborDisks {
        let disks = (0..mesh.face_count())
            .into_par_iter()
            .map(|i| {
                let center = field.centroids[i];
                let mut disk = vec![DiskEntry {
                    face: i as u32,
                    distance: 0.0,
                }];
                // Rejection is distance-based and distance is measured from
                // the center, so a face rejected once can be marked visited:
                // no other path changes its distance.
                let mut visited: HashSet<u32> = HashSet::new();
                visited.insert(i as u32);
                let mut queue: VecDeque<u32> = VecDeque::new();
                queue.push_back(i as u32);
                while let Some(f) = queue.pop_front() {
                    for g in mesh.adjacent_faces(f as usize).into_iter().flatten() {
                        if visited.insert(g) {
                            let distance = (field.centroids[g as usize] - center).norm();
                            if distance <= radius {
                                disk.push(DiskEntry { face: g, distance });
                                queue.push_back(g);
                            }
                        }
                    }
                }
                disk
            })
            .collect();
        NeighborDisks { disks, radius }
    }

    /// Hand-built disks for kernel tests that need exact weight control.
    #[cfg(test)]
    pub(crate) fn from_disks(disks: Vec<Vec<DiskEntry>>, radius: f64) -> NeighborDisks {
        NeighborDisks { disks, radius }
    }

    pub fn disk(&self, face: usize) -> &[DiskEntry] {
        &self.disks[face]
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn face_count(&self) -> usize {
        self.disks.len()
    }
}
