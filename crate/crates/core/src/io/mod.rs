//! Mesh file I/O: Wavefront OBJ and PLY (ASCII or binary little-endian).

mod obj;
mod ply;

use std::path::Path;

pub use obj::{read_obj, write_obj};
pub use ply::{read_ply, read_ply_flavored, write_ply, PlyFlavor};

use crate::error::{MeshError, Result};
use crate::mesh::Mesh;

/// On-disk format. PLY files declare their flavor in the header, so loading
/// either PLY variant accepts both; the distinction matters when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
    PlyBinary,
}

/// Picks a format from the file extension: `.obj`, or `.ply` (binary
/// little-endian when writing).
pub fn format_for(path: &Path) -> Result<MeshFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("obj") => Ok(MeshFormat::Obj),
        Some("ply") => Ok(MeshFormat::PlyBinary),
        _ => Err(MeshError::InvalidArgument(format!(
            "cannot infer mesh format from '{}': use a .obj or .ply extension",
            path.display()
        ))),
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<Mesh> {
    match format {
        MeshFormat::Obj => read_obj(path),
        MeshFormat::PlyAscii | MeshFormat::PlyBinary => read_ply(path),
    }
}

/// Loads by extension and reports the concrete format found, resolving the
/// PLY flavor from the header. Lets callers write output in the same shape
/// the input arrived in.
pub fn load_mesh_detected(path: &Path) -> Result<(Mesh, MeshFormat)> {
    match format_for(path)? {
        MeshFormat::Obj => Ok((read_obj(path)?, MeshFormat::Obj)),
        MeshFormat::PlyAscii | MeshFormat::PlyBinary => {
            let (mesh, flavor) = read_ply_flavored(path)?;
            let format = match flavor {
                PlyFlavor::Ascii => MeshFormat::PlyAscii,
                PlyFlavor::BinaryLittleEndian => MeshFormat::PlyBinary,
            };
            Ok((mesh, format))
        }
    }
}

pub fn save_mesh(mesh: &Mesh, path: &Path, format: MeshFormat) -> Result<()> {
    match format {
        MeshFormat::Obj => write_obj(mesh, path),
        MeshFormat::PlyAscii => write_ply(mesh, path, PlyFlavor::Ascii),
        MeshFormat::PlyBinary => write_ply(mesh, path, PlyFlavor::BinaryLittleEndian),
    }
}
