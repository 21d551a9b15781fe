//! Mesh file formats.

mod obj;
mod ply;

use std::path::{Path, PathBuf};

use gripmap_core::mesh::{CleanupStats, MeshError, WELD_TOLERANCE};
use gripmap_core::TriangleMesh;
use thiserror::Error;

pub use obj::{read_obj, write_obj};
pub use ply::{export_colored_ply, read_ply, write_ply, PLY_QUALITY_CHANNEL, PLY_RGB_CHANNEL};

#[derive(Debug, Error)]
pub enum MeshIoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed OBJ: {source}")]
    Obj { path: PathBuf, source: tobj::LoadError },
    #[error("{path}: malformed PLY: {message}")]
    Ply { path: PathBuf, message: String },
    #[error("{path}: unsupported mesh format (expected .obj or .ply)")]
    UnsupportedFormat { path: PathBuf },
    #[error("{path}: {source}")]
    Mesh { path: PathBuf, source: MeshError },
}

impl MeshIoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        MeshIoError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn ply(path: &Path, message: impl Into<String>) -> Self {
        MeshIoError::Ply { path: path.to_path_buf(), message: message.into() }
    }

    pub(crate) fn mesh(path: &Path, source: MeshError) -> Self {
        MeshIoError::Mesh { path: path.to_path_buf(), source }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<MeshFormat, MeshIoError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("obj") => Ok(MeshFormat::Obj),
            Some("ply") => Ok(MeshFormat::Ply),
            _ => Err(MeshIoError::UnsupportedFormat { path: path.to_path_buf() }),
        }
    }
}

/// Loads an OBJ or PLY file, welds at 1e-7 m, drops degenerate triangles
/// and optionally rescales.
pub fn load_mesh(path: &Path, scale: Option<f64>) -> Result<(TriangleMesh, CleanupStats), MeshIoError> {
    let (mesh, stats) = match MeshFormat::from_path(path)? {
        MeshFormat::Obj => read_obj(path, WELD_TOLERANCE)?,
        MeshFormat::Ply => read_ply(path, WELD_TOLERANCE)?,
    };
    log::debug!(
        "{}: {} -> {} vertices, {} -> {} triangles",
        path.display(),
        stats.input_vertices,
        mesh.vertex_count(),
        stats.input_triangles,
        mesh.triangle_count()
    );
    Ok(match scale {
        Some(s) if s != 1.0 => (mesh.scaled(s), stats),
        _ => (mesh, stats),
    })
}

/// Writes the mesh in the format named by the extension (PLY is binary LE).
pub fn save_mesh(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshIoError> {
    match MeshFormat::from_path(path)? {
        MeshFormat::Obj => write_obj(mesh, path),
        MeshFormat::Ply => write_ply(mesh, path),
    }
}

/// Fan triangulation of a polygon's vertex loop.
pub(crate) fn fan(poly: &[u32], out: &mut Vec<[u32; 3]>) {
    for i in 1..poly.len().saturating_sub(1) {
        out.push([poly[0], poly[i], poly[i + 1]]);
    }
}
