//! End-to-end denoising loop: per outer iteration, recompute face geometry,
//! run the robust normal filter over precomputed centroid disks, then move
//! vertices toward normal/edge orthogonality with a decaying fidelity term.

use serde::{Deserialize, Serialize};

use crate::error::{MeshError, Result};
use crate::field::{FaceField, MeshStats};
use crate::filter::{self, FilterParams, SimilarityKernel};
use crate::mesh::Mesh;
use crate::neighborhood::NeighborDisks;
use crate::vertex_update::{self, UpdateParams};

fn default_decay() -> f64 {
    0.6
}

fn default_inner_iters() -> usize {
    1
}

/// Tunable knobs for a denoising run. `sigma_c` and `radius` default to the
/// mesh's mean adjacent-centroid distance and twice that, respectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiseConfig {
    pub sigma_s: f64,
    pub lambda: f64,
    pub iterations: usize,
    #[serde(default)]
    pub sigma_c: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_inner_iters")]
    pub inner_vertex_iters: usize,
    #[serde(default)]
    pub recompute_disks: bool,
    #[serde(default)]
    pub similarity: SimilarityKernel,
}

impl DenoiseConfig {
    pub fn new(sigma_s: f64, lambda: f64, iterations: usize) -> Self {
        Self {
            sigma_s,
            lambda,
            iterations,
            sigma_c: None,
            radius: None,
            decay: default_decay(),
            inner_vertex_iters: default_inner_iters(),
            recompute_disks: false,
            similarity: SimilarityKernel::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(MeshError::InvalidArgument(msg.into()));
        if !(self.sigma_s > 0.0 && self.sigma_s.is_finite()) {
            return invalid("sigma_s must be positive and finite");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return invalid("lambda must be non-negative and finite");
        }
        if self.iterations == 0 {
            return invalid("iterations must be at least 1");
        }
        if let Some(s) = self.sigma_c {
            if !(s > 0.0 && s.is_finite()) {
                return invalid("sigma_c must be positive and finite");
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return invalid("radius must be positive and finite");
            }
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return invalid("decay must be in (0, 1]");
        }
        if self.inner_vertex_iters == 0 {
            return invalid("inner_vertex_iters must be at least 1");
        }
        Ok(())
    }
}

/// One outer iteration's worth of diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 1-based outer iteration index.
    pub iteration: usize,
    /// Fidelity weight used this iteration, before decay.
    pub lambda: f64,
    /// Largest single-vertex displacement this iteration.
    pub max_displacement: f64,
    /// Faces whose filtered normal collapsed and was kept as the input.
    pub filter_warnings: usize,
    /// Vertices whose mean filtered normal was undefined during the update.
    pub normal_fallbacks: usize,
}

#[derive(Debug, Clone)]
pub struct DenoiseResult {
    pub mesh: Mesh,
    pub log: Vec<IterationRecord>,
    /// Neighborhood radius actually used.
    pub radius: f64,
    /// Spatial kernel width actually used.
    pub sigma_c: f64,
}

pub fn denoise(mesh: &Mesh, config: &DenoiseConfig) -> Result<DenoiseResult> {
    config.validate()?;
    let stats = MeshStats::of(mesh)?;
    let sigma_c = config.sigma_c.unwrap_or(stats.avg_centroid_distance);
    let radius = config
        .radius
        .unwrap_or(2.0 * stats.avg_centroid_distance);
    let filter_params = FilterParams {
        sigma_c,
        sigma_s: config.sigma_s,
        similarity: config.similarity,
    };

    let update_params = UpdateParams {
        lambda: config.lambda,
        decay: config.decay,
        inner_vertex_iters: config.inner_vertex_iters,
    };

    let mut current = mesh.clone();
    let mut disks: Option<NeighborDisks> = None;
    let mut lambda = config.lambda;
    let mut log = Vec::with_capacity(config.iterations);

    for iteration in 1..=config.iterations {
        let field = FaceField::of(&current);
        if disks.is_none() || config.recompute_disks {
            disks = Some(NeighborDisks::build(&current, &field, radius));
        }
        let filtered =
            filter::filter_normals(&field, disks.as_ref().expect("disks built above"), &filter_params);
        let update = vertex_update::update_vertices(
            &current,
            &field,
            &filtered.normals,
            &update_params,
            lambda,
        )?;

        let max_displacement = current
            .vertices()
            .iter()
            .zip(&update.positions)
            .map(|(old, new)| (new - old).norm())
            .fold(0.0f64, f64::max);

        current = current.with_positions(update.positions)?;
        log.push(IterationRecord {
            iteration,
            lambda,
            max_displacement,
            filter_warnings: filtered.warnings,
            normal_fallbacks: update.normal_fallbacks,
        });
        lambda = vertex_update::decay_lambda(lambda, config.decay);
    }

    Ok(DenoiseResult {
        mesh: current,
        log,
        radius,
        sigma_c,
    })
}
