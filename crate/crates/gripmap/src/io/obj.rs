use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use gripmap_core::mesh::CleanupStats;
use gripmap_core::{TriangleMesh, Vec3};

use super::MeshIoError;

/// Reads `v` and `f` records from every object in the file. Materials are
/// ignored.
pub fn read_obj(path: &Path, tolerance: f64) -> Result<(TriangleMesh, CleanupStats), MeshIoError> {
    let file = File::open(path).map_err(|e| MeshIoError::io(path, e))?;
    let options = tobj::LoadOptions { triangulate: true, ..Default::default() };
    let (models, _) = tobj::load_obj_buf(&mut BufReader::new(file), &options, |_| Err(tobj::LoadError::GenericFailure))
        .map_err(|source| MeshIoError::Obj { path: path.to_path_buf(), source })?;
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for m in &models {
        let base = positions.len() as u32;
        positions.extend(m.mesh.positions.chunks_exact(3).map(|p| Vec3::new(p[0], p[1], p[2])));
        faces.extend(m.mesh.indices.chunks_exact(3).map(|f| [base + f[0], base + f[1], base + f[2]]));
    }
    TriangleMesh::from_soup(positions, faces, tolerance).map_err(|e| MeshIoError::mesh(path, e))
}

pub fn write_obj(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshIoError> {
    let file = File::create(path).map_err(|e| MeshIoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        for v in mesh.vertices() {
            writeln!(w, "v {:?} {:?} {:?}", v.x, v.y, v.z)?;
        }
        for t in mesh.triangles() {
            writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        w.flush()
    };
    body().map_err(|e| MeshIoError::io(path, e))
}
