/* C interface for the mesh-denoise library. Generated by cbindgen; do not edit. */

#ifndef MESH_DENOISE_H
#define MESH_DENOISE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Similarity kernel for the normal filter.
 */
typedef enum MdSimilarityKernel {
  MD_SIMILARITY_TUKEY = 0,
  MD_SIMILARITY_GAUSSIAN = 1,
} MdSimilarityKernel;

/**
 * Result code for every ABI call.
 */
typedef enum MdStatus {
  MD_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MD_STATUS_NULL_POINTER = 1,
  /**
   * A parameter was out of range or otherwise unusable.
   */
  MD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The file could not be read or written.
   */
  MD_STATUS_IO = 3,
  /**
   * The file exists but its content is malformed.
   */
  MD_STATUS_PARSE = 4,
  /**
   * The mesh violates a structural invariant (non-manifold edge, bad
   * face indices, vertex/face count mismatch, no edges).
   */
  MD_STATUS_STRUCTURE = 5,
  /**
   * A vertex became non-finite during denoising.
   */
  MD_STATUS_NUMERIC = 6,
  /**
   * A panic was caught at the ABI boundary; state may be inconsistent.
   */
  MD_STATUS_INTERNAL = 7,
} MdStatus;

/**
 * Noise magnitude distribution.
 */
typedef enum MdNoiseDistribution {
  MD_NOISE_GAUSSIAN = 0,
  MD_NOISE_UNIFORM = 1,
} MdNoiseDistribution;

/**
 * Noise displacement direction model.
 */
typedef enum MdNoiseDirection {
  MD_NOISE_RANDOM_DIRECTION = 0,
  MD_NOISE_VERTEX_NORMAL_DIRECTION = 1,
} MdNoiseDirection;

/**
 * Opaque triangle mesh handle.
 */
typedef struct MdMesh MdMesh;

/**
 * Denoising parameters. `sigma_c` and `radius` accept a non-positive value
 * to request the mesh-derived defaults (the mean adjacent-centroid distance
 * and twice it). `decay` and `inner_vertex_iters` accept 0 for the defaults
 * 0.6 and 1.
 */
typedef struct MdDenoiseConfig {
  double sigma_s;
  double lambda;
  size_t iterations;
  double sigma_c;
  double radius;
  double decay;
  size_t inner_vertex_iters;
  bool recompute_disks;
  enum MdSimilarityKernel similarity;
} MdDenoiseConfig;

/**
 * Summary statistics of a mesh.
 */
typedef struct MdMeshStats {
  size_t vertex_count;
  size_t face_count;
  double avg_edge_length;
  double avg_centroid_distance;
  double bbox_diagonal;
} MdMeshStats;

/**
 * Synthetic corruption parameters. `intensity` scales the mean edge length.
 */
typedef struct MdNoiseSpec {
  enum MdNoiseDistribution distribution;
  enum MdNoiseDirection direction;
  double intensity;
  uint64_t seed;
} MdNoiseSpec;

/**
 * Evaluation of a denoised mesh against a clean reference.
 */
typedef struct MdMetrics {
  double msae_degrees;
  double msae_radians;
  /**
   * Area-weighted RMS vertex-to-surface distance, in model units.
   */
  double positional_error;
  double quality_mean;
  double quality_max;
  size_t flipped_faces;
  size_t feature_edge_count;
} MdMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * A config with every optional field set to its default-requesting value.
 * Callers still must fill in `sigma_s`, `lambda`, and `iterations`.
 */
struct MdDenoiseConfig md_denoise_config_default(void);

/**
 * Copies the last error message (UTF-8, NUL-terminated) into `buffer` and
 * returns the full message length in bytes, excluding the terminator. A
 * null or too-small buffer still gets the length (and a truncated,
 * NUL-terminated copy if it has any room). Returns 0 when the last call
 * succeeded.
 *
 * # Safety
 * `buffer` must be null or point to `length` writable bytes.
 */
size_t md_last_error_message(char *buffer, size_t length);

/**
 * Loads a mesh from an OBJ or PLY file, chosen by extension.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out_mesh` a valid
 * writable pointer.
 */
enum MdStatus md_mesh_load(const char *path, struct MdMesh **out_mesh);

/**
 * Saves a mesh to an OBJ or PLY file, chosen by extension. PLY output is
 * binary little-endian; pass `ascii = true` for text PLY.
 *
 * # Safety
 * `mesh` must be a live handle from this library and `path` a valid
 * NUL-terminated string.
 */
enum MdStatus md_mesh_save(const struct MdMesh *mesh, const char *path, bool ascii);

/**
 * Builds a mesh from flat arrays: `vertices` holds `vertex_count * 3`
 * doubles (xyz interleaved), `indices` holds `face_count * 3` vertex
 * indices.
 *
 * # Safety
 * `vertices` must be readable for `vertex_count * 3` doubles, `indices`
 * for `face_count * 3` u32 values, and `out_mesh` must be writable.
 */
enum MdStatus md_mesh_from_buffers(const double *vertices,
                                   size_t vertex_count,
                                   const uint32_t *indices,
                                   size_t face_count,
                                   struct MdMesh **out_mesh);

/**
 * Releases a mesh handle. Null is a no-op.
 *
 * # Safety
 * `mesh` must be null or a live handle from this library; the handle is
 * invalid afterwards.
 */
void md_mesh_free(struct MdMesh *mesh);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or a live handle from this library.
 */
size_t md_mesh_vertex_count(const struct MdMesh *mesh);

/**
 * Number of faces, or 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or a live handle from this library.
 */
size_t md_mesh_face_count(const struct MdMesh *mesh);

/**
 * Copies vertex positions into `buffer` as xyz-interleaved doubles.
 * `capacity` is the buffer length in doubles and must be at least
 * `3 * vertex_count`.
 *
 * # Safety
 * `mesh` must be a live handle and `buffer` writable for `capacity`
 * doubles.
 */
enum MdStatus md_mesh_vertices(const struct MdMesh *mesh, double *buffer, size_t capacity);

/**
 * Copies face indices into `buffer`, three per face. `capacity` is the
 * buffer length in u32 and must be at least `3 * face_count`.
 *
 * # Safety
 * `mesh` must be a live handle and `buffer` writable for `capacity` u32
 * values.
 */
enum MdStatus md_mesh_faces(const struct MdMesh *mesh, uint32_t *buffer, size_t capacity);

/**
 * Fills `out_stats` with summary statistics.
 *
 * # Safety
 * `mesh` must be a live handle and `out_stats` a valid writable pointer.
 */
enum MdStatus md_mesh_stats(const struct MdMesh *mesh, struct MdMeshStats *out_stats);

/**
 * Corrupts `mesh` with synthetic noise into a new handle.
 *
 * # Safety
 * `mesh` must be a live handle, `spec` a valid readable pointer, and
 * `out_mesh` a valid writable pointer.
 */
enum MdStatus md_add_noise(const struct MdMesh *mesh,
                           const struct MdNoiseSpec *spec,
                           struct MdMesh **out_mesh);

/**
 * Denoises `mesh` into a new handle. See [`MdDenoiseConfig`] for the
 * default-requesting sentinel values.
 *
 * # Safety
 * `mesh` must be a live handle, `config` a valid readable pointer, and
 * `out_mesh` a valid writable pointer.
 */
enum MdStatus md_denoise(const struct MdMesh *mesh,
                         const struct MdDenoiseConfig *config,
                         struct MdMesh **out_mesh);

/**
 * Scores `denoised` against `reference` (same connectivity required) with
 * feature edges counted at the `feature_angle_degrees` dihedral threshold.
 *
 * # Safety
 * `denoised` and `reference` must be live handles and `out_metrics` a
 * valid writable pointer.
 */
enum MdStatus md_metrics(const struct MdMesh *denoised,
                         const struct MdMesh *reference,
                         double feature_angle_degrees,
                         struct MdMetrics *out_metrics);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MESH_DENOISE_H */
