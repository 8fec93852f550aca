//! Synthetic vertex noise for benchmarking denoisers against a known clean
//! mesh.
//!
//! Displacement magnitudes are drawn per vertex from a Gaussian or uniform
//! distribution whose scale is `intensity * avg_edge_length`; directions are
//! either random unit vectors or the clean mesh's area-weighted vertex
//! normals. Draws come from a seeded ChaCha8 stream consumed in vertex order
//! on one thread (magnitude first, then direction), so results are
//! reproducible byte for byte across runs and machines.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{MeshError, Result};
use crate::field::{FaceField, MeshStats};
use crate::mesh::Mesh;
use crate::vertex_update::vertex_normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDistribution {
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseDirection {
    /// Uniform random unit vector per vertex.
    Random,
    /// The clean mesh's area-weighted vertex normal; vertices with an
    /// undefined normal stay put.
    VertexNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub distribution: NoiseDistribution,
    pub direction: NoiseDirection,
    /// Magnitude scale in units of the mesh's mean edge length.
    pub intensity: f64,
    pub seed: u64,
}

pub fn add_noise(mesh: &Mesh, spec: &NoiseSpec) -> Result<Mesh> {
    if !spec.intensity.is_finite() || spec.intensity < 0.0 {
        return Err(MeshError::InvalidArgument(format!(
            "noise intensity must be finite and non-negative, got {}",
            spec.intensity
        )));
    }
    let stats = MeshStats::of(mesh)?;
    let sigma = spec.intensity * stats.avg_edge_length;
    if sigma == 0.0 {
        return mesh.with_positions(mesh.vertices().to_vec());
    }

    let normals = match spec.direction {
        NoiseDirection::Random => None,
        NoiseDirection::VertexNormal => {
            let field = FaceField::of(mesh);
            let per_vertex: Vec<Option<Vector3<f64>>> = (0..mesh.vertex_count())
                .map(|v| vertex_normal(mesh, &field, &field.normals, v))
                .collect();
            Some(per_vertex)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut positions = Vec::with_capacity(mesh.vertex_count());
    for (v, position) in mesh.vertices().iter().enumerate() {
        let magnitude = match spec.distribution {
            NoiseDistribution::Gaussian => sigma * rng.sample::<f64, _>(StandardNormal),
            NoiseDistribution::Uniform => rng.random_range(-sigma..=sigma),
        };
        let direction = match &normals {
            None => random_unit(&mut rng),
            Some(per_vertex) => match per_vertex[v] {
                Some(n) => n,
                None => Vector3::zeros(),
            },
        };
        positions.push(position + magnitude * direction);
    }
    mesh.with_positions(positions)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}
