//! C ABI for the mesh denoising library.
//!
//! Meshes cross the boundary as opaque handles created by `md_mesh_load` or
//! `md_mesh_from_buffers` and released with `md_mesh_free`. Every function
//! returns an [`MdStatus`]; on failure the thread-local error message is
//! readable via `md_last_error_message`. Panics are caught at the boundary
//! and surface as `MD_STATUS_INTERNAL`.
//!
//! The generated header lives at `include/mesh_denoise.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mesh_denoise::error::MeshError;
use mesh_denoise::field::MeshStats;
use mesh_denoise::filter::SimilarityKernel;
use mesh_denoise::io;
use mesh_denoise::mesh::Mesh;
use mesh_denoise::metrics;
use mesh_denoise::noise::{self, NoiseDirection, NoiseDistribution, NoiseSpec};
use mesh_denoise::pipeline::{self, DenoiseConfig};

/// Result code for every ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdStatus {
    MdStatusOk = 0,
    /// A required pointer argument was null.
    MdStatusNullPointer = 1,
    /// A parameter was out of range or otherwise unusable.
    MdStatusInvalidArgument = 2,
    /// The file could not be read or written.
    MdStatusIo = 3,
    /// The file exists but its content is malformed.
    MdStatusParse = 4,
    /// The mesh violates a structural invariant (non-manifold edge, bad
    /// face indices, vertex/face count mismatch, no edges).
    MdStatusStructure = 5,
    /// A vertex became non-finite during denoising.
    MdStatusNumeric = 6,
    /// A panic was caught at the ABI boundary; state may be inconsistent.
    MdStatusInternal = 7,
}

/// Opaque triangle mesh handle.
pub struct MdMesh {
    inner: Mesh,
}

/// Noise magnitude distribution.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdNoiseDistribution {
    MdNoiseGaussian = 0,
    MdNoiseUniform = 1,
}

/// Noise displacement direction model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdNoiseDirection {
    MdNoiseRandomDirection = 0,
    MdNoiseVertexNormalDirection = 1,
}

/// Synthetic corruption parameters. `intensity` scales the mean edge length.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MdNoiseSpec {
    pub distribution: MdNoiseDistribution,
    pub direction: MdNoiseDirection,
    pub intensity: f64,
    pub seed: u64,
}

/// Similarity kernel for the normal filter.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdSimilarityKernel {
    MdSimilarityTukey = 0,
    MdSimilarityGaussian = 1,
}

/// Denoising parameters. `sigma_c` and `radius` accept a non-positive value
/// to request the mesh-derived defaults (the mean adjacent-centroid distance
/// and twice it). `decay` and `inner_vertex_iters` accept 0 for the defaults
/// 0.6 and 1.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MdDenoiseConfig {
    pub sigma_s: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub sigma_c: f64,
    pub radius: f64,
    pub decay: f64,
    pub inner_vertex_iters: usize,
    pub recompute_disks: bool,
    pub similarity: MdSimilarityKernel,
}

/// A config with every optional field set to its default-requesting value.
/// Callers still must fill in `sigma_s`, `lambda`, and `iterations`.
#[no_mangle]
pub extern "C" fn md_denoise_config_default() -> MdDenoiseConfig {
    MdDenoiseConfig {
        sigma_s: 0.0,
        lambda: 0.0,
        iterations: 0,
        sigma_c: 0.0,
        radius: 0.0,
        decay: 0.0,
        inner_vertex_iters: 0,
        recompute_disks: false,
        similarity: MdSimilarityKernel::MdSimilarityTukey,
    }
}

/// Summary statistics of a mesh.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MdMeshStats {
    pub vertex_count: usize,
    pub face_count: usize,
    pub avg_edge_length: f64,
    pub avg_centroid_distance: f64,
    pub bbox_diagonal: f64,
}

/// Evaluation of a denoised mesh against a clean reference.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MdMetrics {
    pub msae_degrees: f64,
    pub msae_radians: f64,
    /// Area-weighted RMS vertex-to-surface distance, in model units.
    pub positional_error: f64,
    pub quality_mean: f64,
    pub quality_max: f64,
    pub flipped_faces: usize,
    pub feature_edge_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|cell| {
        *cell.borrow_mut() = Some(CString::new(sanitized).expect("nul bytes stripped above"));
    });
}

fn clear_error() {
    LAST_ERROR.with(|cell| cell.borrow_mut().take());
}

fn status_of(err: &MeshError) -> MdStatus {
    match err {
        MeshError::Io { .. } => MdStatus::MdStatusIo,
        MeshError::Parse { .. } => MdStatus::MdStatusParse,
        MeshError::NonManifoldEdge { .. }
        | MeshError::InvalidFace { .. }
        | MeshError::NoEdges
        | MeshError::VertexCountMismatch { .. }
        | MeshError::FaceCountMismatch { .. } => MdStatus::MdStatusStructure,
        MeshError::NonFiniteVertex { .. } => MdStatus::MdStatusNumeric,
        MeshError::InvalidArgument(_) => MdStatus::MdStatusInvalidArgument,
    }
}

fn fail(err: MeshError) -> MdStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null_pointer(name: &str) -> MdStatus {
    set_error(&format!("{name} must not be null"));
    MdStatus::MdStatusNullPointer
}

/// Runs `f` with panics converted to `MdStatusInternal`. A successful call
/// clears the error slot, so `md_last_error_message` reports an empty string
/// until the next failure.
fn guarded(f: impl FnOnce() -> MdStatus) -> MdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == MdStatus::MdStatusOk {
                clear_error();
            }
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic with non-string payload".to_string());
            set_error(&format!("internal panic: {message}"));
            MdStatus::MdStatusInternal
        }
    }
}

unsafe fn path_from(ptr_name: &str, raw: *const c_char) -> Result<&Path, MdStatus> {
    if raw.is_null() {
        return Err(null_pointer(ptr_name));
    }
    match unsafe { CStr::from_ptr(raw) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error(&format!("{ptr_name} is not valid UTF-8"));
            Err(MdStatus::MdStatusInvalidArgument)
        }
    }
}

unsafe fn mesh_from<'a>(name: &str, raw: *const MdMesh) -> Result<&'a Mesh, MdStatus> {
    if raw.is_null() {
        return Err(null_pointer(name));
    }
    Ok(&unsafe { &*raw }.inner)
}

fn export(mesh: Mesh, out: *mut *mut MdMesh) -> MdStatus {
    if out.is_null() {
        return null_pointer("out_mesh");
    }
    unsafe { *out = Box::into_raw(Box::new(MdMesh { inner: mesh })) };
    MdStatus::MdStatusOk
}

/// Copies the last error message (UTF-8, NUL-terminated) into `buffer` and
/// returns the full message length in bytes, excluding the terminator. A
/// null or too-small buffer still gets the length (and a truncated,
/// NUL-terminated copy if it has any room). Returns 0 when the last call
/// succeeded.
///
/// # Safety
/// `buffer` must be null or point to `length` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn md_last_error_message(buffer: *mut c_char, length: usize) -> usize {
    LAST_ERROR.with(|cell| {
        let borrow = cell.borrow();
        let Some(message) = borrow.as_ref() else {
            if !buffer.is_null() && length > 0 {
                unsafe { *buffer = 0 };
            }
            return 0;
        };
        let bytes = message.as_bytes();
        if !buffer.is_null() && length > 0 {
            let copy = bytes.len().min(length - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr(), buffer.cast::<u8>(), copy);
                *buffer.add(copy) = 0;
            }
        }
        bytes.len()
    })
}

/// Loads a mesh from an OBJ or PLY file, chosen by extension.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out_mesh` a valid
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_load(path: *const c_char, out_mesh: *mut *mut MdMesh) -> MdStatus {
    guarded(|| {
        let path = match unsafe { path_from("path", path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::format_for(path).and_then(|format| io::load_mesh(path, format)) {
            Ok(mesh) => export(mesh, out_mesh),
            Err(e) => fail(e),
        }
    })
}

/// Saves a mesh to an OBJ or PLY file, chosen by extension. PLY output is
/// binary little-endian; pass `ascii = true` for text PLY.
///
/// # Safety
/// `mesh` must be a live handle from this library and `path` a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_save(
    mesh: *const MdMesh,
    path: *const c_char,
    ascii: bool,
) -> MdStatus {
    guarded(|| {
        let mesh = match unsafe { mesh_from("mesh", mesh) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        let path = match unsafe { path_from("path", path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        let format = match io::format_for(path) {
            Ok(io::MeshFormat::PlyBinary) if ascii => io::MeshFormat::PlyAscii,
            Ok(f) => f,
            Err(e) => return fail(e),
        };
        match io::save_mesh(mesh, path, format) {
            Ok(()) => MdStatus::MdStatusOk,
            Err(e) => fail(e),
        }
    })
}

/// Builds a mesh from flat arrays: `vertices` holds `vertex_count * 3`
/// doubles (xyz interleaved), `indices` holds `face_count * 3` vertex
/// indices.
///
/// # Safety
/// `vertices` must be readable for `vertex_count * 3` doubles, `indices`
/// for `face_count * 3` u32 values, and `out_mesh` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_from_buffers(
    vertices: *const f64,
    vertex_count: usize,
    indices: *const u32,
    face_count: usize,
    out_mesh: *mut *mut MdMesh,
) -> MdStatus {
    guarded(|| {
        if vertices.is_null() && vertex_count > 0 {
            return null_pointer("vertices");
        }
        if indices.is_null() && face_count > 0 {
            return null_pointer("indices");
        }
        let (Some(scalar_count), Some(index_count)) =
            (vertex_count.checked_mul(3), face_count.checked_mul(3))
        else {
            set_error("vertex or face count overflows the address space");
            return MdStatus::MdStatusInvalidArgument;
        };
        let positions = unsafe { std::slice::from_raw_parts(vertices, scalar_count) }
            .chunks_exact(3)
            .map(|c| nalgebra::Point3::new(c[0], c[1], c[2]))
            .collect();
        let faces = unsafe { std::slice::from_raw_parts(indices, index_count) }
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        match Mesh::new(positions, faces) {
            Ok(mesh) => export(mesh, out_mesh),
            Err(e) => fail(e),
        }
    })
}

/// Releases a mesh handle. Null is a no-op.
///
/// # Safety
/// `mesh` must be null or a live handle from this library; the handle is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_free(mesh: *mut MdMesh) {
    if !mesh.is_null() {
        drop(unsafe { Box::from_raw(mesh) });
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_vertex_count(mesh: *const MdMesh) -> usize {
    if mesh.is_null() {
        return 0;
    }
    unsafe { &*mesh }.inner.vertex_count()
}

/// Number of faces, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_face_count(mesh: *const MdMesh) -> usize {
    if mesh.is_null() {
        return 0;
    }
    unsafe { &*mesh }.inner.face_count()
}

/// Copies vertex positions into `buffer` as xyz-interleaved doubles.
/// `capacity` is the buffer length in doubles and must be at least
/// `3 * vertex_count`.
///
/// # Safety
/// `mesh` must be a live handle and `buffer` writable for `capacity`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_vertices(
    mesh: *const MdMesh,
    buffer: *mut f64,
    capacity: usize,
) -> MdStatus {
    guarded(|| {
        let mesh = match unsafe { mesh_from("mesh", mesh) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        if buffer.is_null() {
            return null_pointer("buffer");
        }
        let needed = mesh.vertex_count() * 3;
        if capacity < needed {
            set_error(&format!(
                "vertex buffer holds {capacity} doubles, need {needed}"
            ));
            return MdStatus::MdStatusInvalidArgument;
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buffer, needed) };
        for (chunk, v) in out.chunks_exact_mut(3).zip(mesh.vertices()) {
            chunk[0] = v.x;
            chunk[1] = v.y;
            chunk[2] = v.z;
        }
        MdStatus::MdStatusOk
    })
}

/// Copies face indices into `buffer`, three per face. `capacity` is the
/// buffer length in u32 and must be at least `3 * face_count`.
///
/// # Safety
/// `mesh` must be a live handle and `buffer` writable for `capacity` u32
/// values.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_faces(
    mesh: *const MdMesh,
    buffer: *mut u32,
    capacity: usize,
) -> MdStatus {
    guarded(|| {
        let mesh = match unsafe { mesh_from("mesh", mesh) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        if buffer.is_null() {
            return null_pointer("buffer");
        }
        let needed = mesh.face_count() * 3;
        if capacity < needed {
            set_error(&format!(
                "face buffer holds {capacity} indices, need {needed}"
            ));
            return MdStatus::MdStatusInvalidArgument;
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buffer, needed) };
        for (chunk, f) in out.chunks_exact_mut(3).zip(mesh.faces()) {
            chunk.copy_from_slice(f);
        }
        MdStatus::MdStatusOk
    })
}

/// Fills `out_stats` with summary statistics.
///
/// # Safety
/// `mesh` must be a live handle and `out_stats` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn md_mesh_stats(
    mesh: *const MdMesh,
    out_stats: *mut MdMeshStats,
) -> MdStatus {
    guarded(|| {
        let mesh = match unsafe { mesh_from("mesh", mesh) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        if out_stats.is_null() {
            return null_pointer("out_stats");
        }
        match MeshStats::of(mesh) {
            Ok(stats) => {
                unsafe {
                    *out_stats = MdMeshStats {
                        vertex_count: mesh.vertex_count(),
                        face_count: mesh.face_count(),
                        avg_edge_length: stats.avg_edge_length,
                        avg_centroid_distance: stats.avg_centroid_distance,
                        bbox_diagonal: stats.bbox_diagonal,
                    };
                }
                MdStatus::MdStatusOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Corrupts `mesh` with synthetic noise into a new handle.
///
/// # Safety
/// `mesh` must be a live handle, `spec` a valid readable pointer, and
/// `out_mesh` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn md_add_noise(
    mesh: *const MdMesh,
    spec: *const MdNoiseSpec,
    out_mesh: *mut *mut MdMesh,
) -> MdStatus {
    guarded(|| {
        let mesh = match unsafe { mesh_from("mesh", mesh) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        if spec.is_null() {
            return null_pointer("spec");
        }
        let spec = unsafe { *spec };
        let spec = NoiseSpec {
            distribution: match spec.distribution {
                MdNoiseDistribution::MdNoiseGaussian => NoiseDistribution::Gaussian,
                MdNoiseDistribution::MdNoiseUniform => NoiseDistribution::Uniform,
            },
            direction: match spec.direction {
                MdNoiseDirection::MdNoiseRandomDirection => NoiseDirection::Random,
                MdNoiseDirection::MdNoiseVertexNormalDirection => NoiseDirection::VertexNormal,
            },
            intensity: spec.intensity,
            seed: spec.seed,
        };
        match noise::add_noise(mesh, &spec) {
            Ok(noisy) => export(noisy, out_mesh),
            Err(e) => fail(e),
        }
    })
}

/// Denoises `mesh` into a new handle. See [`MdDenoiseConfig`] for the
/// default-requesting sentinel values.
///
/// # Safety
/// `mesh` must be a live handle, `config` a valid readable pointer, and
/// `out_mesh` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn md_denoise(
    mesh: *const MdMesh,
    config: *const MdDenoiseConfig,
    out_mesh: *mut *mut MdMesh,
) -> MdStatus {
    guarded(|| {
        let mesh = match unsafe { mesh_from("mesh", mesh) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        if config.is_null() {
            return null_pointer("config");
        }
        let c = unsafe { *config };
        let mut config = DenoiseConfig::new(c.sigma_s, c.lambda, c.iterations);
        if c.sigma_c > 0.0 {
            config.sigma_c = Some(c.sigma_c);
        }
        if c.radius > 0.0 {
            config.radius = Some(c.radius);
        }
        if c.decay > 0.0 {
            config.decay = c.decay;
        }
        if c.inner_vertex_iters > 0 {
            config.inner_vertex_iters = c.inner_vertex_iters;
        }
        config.recompute_disks = c.recompute_disks;
        config.similarity = match c.similarity {
            MdSimilarityKernel::MdSimilarityTukey => SimilarityKernel::Tukey,
            MdSimilarityKernel::MdSimilarityGaussian => SimilarityKernel::Gaussian,
        };
        match pipeline::denoise(mesh, &config) {
            Ok(result) => export(result.mesh, out_mesh),
            Err(e) => fail(e),
        }
    })
}

/// Scores `denoised` against `reference` (same connectivity required) with
/// feature edges counted at the `feature_angle_degrees` dihedral threshold.
///
/// # Safety
/// `denoised` and `reference` must be live handles and `out_metrics` a
/// valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn md_metrics(
    denoised: *const MdMesh,
    reference: *const MdMesh,
    feature_angle_degrees: f64,
    out_metrics: *mut MdMetrics,
) -> MdStatus {
    guarded(|| {
        let denoised = match unsafe { mesh_from("denoised", denoised) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        let reference = match unsafe { mesh_from("reference", reference) } {
            Ok(m) => m,
            Err(status) => return status,
        };
        if out_metrics.is_null() {
            return null_pointer("out_metrics");
        }
        match metrics::evaluate(denoised, reference, feature_angle_degrees, None) {
            Ok(report) => {
                unsafe {
                    *out_metrics = MdMetrics {
                        msae_degrees: report.msae_degrees,
                        msae_radians: report.msae_radians,
                        positional_error: report.positional_error,
                        quality_mean: report.quality_mean,
                        quality_max: report.quality_max,
                        flipped_faces: report.flipped_normals,
                        feature_edge_count: report.feature_edge_count,
                    };
                }
                MdStatus::MdStatusOk
            }
            Err(e) => fail(e),
        }
    })
}
