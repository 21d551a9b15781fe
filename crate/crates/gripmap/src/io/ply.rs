use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use gripmap_core::mesh::{Attribute, CleanupStats};
use gripmap_core::ramp::ColorRamp;
use gripmap_core::{TriangleMesh, Vec3};
use ply_rs::parser::Parser;
use ply_rs::ply::{DefaultElement, Property};

use super::{fan, MeshIoError};

/// Channel that receives `red/green/blue` vertex properties on read.
pub const PLY_RGB_CHANNEL: &str = "rgb";
/// Channel that receives the `quality` vertex property on read.
pub const PLY_QUALITY_CHANNEL: &str = "quality";

fn scalar(p: &Property) -> Option<f64> {
    Some(match *p {
        Property::Char(v) => v as f64,
        Property::UChar(v) => v as f64,
        Property::Short(v) => v as f64,
        Property::UShort(v) => v as f64,
        Property::Int(v) => v as f64,
        Property::UInt(v) => v as f64,
        Property::Float(v) => v as f64,
        Property::Double(v) => v,
        _ => return None,
    })
}

fn index_list(p: &Property) -> Option<Vec<i64>> {
    Some(match p {
        Property::ListChar(v) => v.iter().map(|&i| i as i64).collect(),
        Property::ListUChar(v) => v.iter().map(|&i| i as i64).collect(),
        Property::ListShort(v) => v.iter().map(|&i| i as i64).collect(),
        Property::ListUShort(v) => v.iter().map(|&i| i as i64).collect(),
        Property::ListInt(v) => v.iter().map(|&i| i as i64).collect(),
        Property::ListUInt(v) => v.iter().map(|&i| i as i64).collect(),
        _ => return None,
    })
}

/// Reads ascii or binary PLY. Vertex colors and `quality` become
/// attribute channels.
pub fn read_ply(path: &Path, tolerance: f64) -> Result<(TriangleMesh, CleanupStats), MeshIoError> {
    let file = File::open(path).map_err(|e| MeshIoError::io(path, e))?;
    let ply = Parser::<DefaultElement>::new()
        .read_ply(&mut BufReader::new(file))
        .map_err(|e| MeshIoError::ply(path, e.to_string()))?;
    let vertices = ply.payload.get("vertex").ok_or_else(|| MeshIoError::ply(path, "no vertex element"))?;
    let faces = ply.payload.get("face").ok_or_else(|| MeshIoError::ply(path, "no face element"))?;

    let mut positions = Vec::with_capacity(vertices.len());
    let has_rgb = vertices.first().is_some_and(|v| ["red", "green", "blue"].iter().all(|k| v.contains_key(*k)));
    let has_quality = vertices.first().is_some_and(|v| v.contains_key("quality"));
    let mut rgb = Vec::new();
    let mut quality = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        let coord = |k: &str| {
            v.get(k).and_then(scalar).ok_or_else(|| MeshIoError::ply(path, format!("vertex {i}: missing `{k}`")))
        };
        positions.push(Vec3::new(coord("x")?, coord("y")?, coord("z")?));
        if has_rgb {
            let c = |k: &str| coord(k).map(|x| x.clamp(0.0, 255.0) as u8);
            rgb.push([c("red")?, c("green")?, c("blue")?]);
        }
        if has_quality {
            quality.push(coord("quality")?);
        }
    }

    let mut tris = Vec::with_capacity(faces.len());
    for (i, f) in faces.iter().enumerate() {
        let list = f
            .get("vertex_indices")
            .or_else(|| f.get("vertex_index"))
            .and_then(index_list)
            .ok_or_else(|| MeshIoError::ply(path, format!("face {i}: missing vertex index list")))?;
        let poly = list
            .iter()
            .map(|&k| u32::try_from(k).map_err(|_| MeshIoError::ply(path, format!("face {i}: negative index"))))
            .collect::<Result<Vec<u32>, _>>()?;
        fan(&poly, &mut tris);
    }

    let mut attributes = BTreeMap::new();
    if has_rgb {
        attributes.insert(PLY_RGB_CHANNEL.to_string(), Attribute::Rgb(rgb));
    }
    if has_quality {
        attributes.insert(PLY_QUALITY_CHANNEL.to_string(), Attribute::Scalar(quality));
    }
    TriangleMesh::from_soup_with_attributes(positions, tris, attributes, tolerance).map_err(|e| MeshIoError::mesh(path, e))
}

fn write(mesh: &TriangleMesh, colors: Option<(&[[u8; 3]], &[f64])>, path: &Path) -> Result<(), MeshIoError> {
    let file = File::create(path).map_err(|e| MeshIoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "ply\nformat binary_little_endian 1.0")?;
        writeln!(w, "element vertex {}", mesh.vertex_count())?;
        writeln!(w, "property double x\nproperty double y\nproperty double z")?;
        if colors.is_some() {
            writeln!(w, "property uchar red\nproperty uchar green\nproperty uchar blue\nproperty float quality")?;
        }
        writeln!(w, "element face {}", mesh.triangle_count())?;
        writeln!(w, "property list uchar int vertex_indices\nend_header")?;
        for (i, p) in mesh.vertices().iter().enumerate() {
            for c in [p.x, p.y, p.z] {
                w.write_all(&c.to_le_bytes())?;
            }
            if let Some((rgb, q)) = colors {
                w.write_all(&rgb[i])?;
                w.write_all(&(q[i] as f32).to_le_bytes())?;
            }
        }
        for t in mesh.triangles() {
            w.write_all(&[3])?;
            for &k in t {
                w.write_all(&(k as i32).to_le_bytes())?;
            }
        }
        w.flush()
    };
    body().map_err(|e| MeshIoError::io(path, e))
}

/// Geometry only, binary little-endian.
pub fn write_ply(mesh: &TriangleMesh, path: &Path) -> Result<(), MeshIoError> {
    write(mesh, None, path)
}

/// Binary little-endian PLY colored by a scalar channel (min blue, max red)
/// with the raw values in `quality`.
pub fn export_colored_ply(mesh: &TriangleMesh, channel: &str, ramp: &ColorRamp, path: &Path) -> Result<(), MeshIoError> {
    let values = mesh.scalar(channel).map_err(|e| MeshIoError::mesh(path, e))?;
    let colors = ramp.colorize(values);
    write(mesh, Some((&colors, values)), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gripmap_core::fixtures;

    #[test]
    fn ascii_cube_with_quads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cube.ply");
        let (v, _) = fixtures::unit_cube_indexed();
        let mut text = String::from(
            "ply\nformat ascii 1.0\nelement vertex 8\nproperty float x\nproperty float y\nproperty float z\n\
             element face 6\nproperty list uchar int vertex_indices\nend_header\n",
        );
        for q in &v {
            text += &format!("{} {} {}\n", q.x, q.y, q.z);
        }
        for f in ["0 3 2 1", "4 5 6 7", "0 1 5 4", "1 2 6 5", "2 3 7 6", "3 0 4 7"] {
            text += &format!("4 {f}\n");
        }
        std::fs::write(&p, text).unwrap();
        let (m, _) = read_ply(&p, 1e-7).unwrap();
        assert_eq!((m.vertex_count(), m.triangle_count()), (8, 12));
    }

    #[test]
    fn colored_export_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cup.ply");
        let mut m = fixtures::tapered_cup_default();
        let heights: Vec<f64> = m.vertices().iter().map(|v| v.z).collect();
        m.set_scalar("height", heights.clone()).unwrap();
        let ramp = ColorRamp::default();
        export_colored_ply(&m, "height", &ramp, &p).unwrap();
        let (back, _) = read_ply(&p, 1e-7).unwrap();
        assert_eq!(back.vertex_count(), m.vertex_count());
        assert_eq!(back.rgb(PLY_RGB_CHANNEL).unwrap(), ramp.colorize(&heights).as_slice());
        let q = back.scalar(PLY_QUALITY_CHANNEL).unwrap();
        assert!(q.iter().zip(&heights).all(|(a, b)| (a - b).abs() < 1e-6));
        let bytes = std::fs::read(&p).unwrap();
        assert!(bytes.starts_with(b"ply\nformat binary_little_endian 1.0\n"));
    }

    #[test]
    fn geometry_only_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cup.ply");
        let m = fixtures::tapered_cup_default();
        write_ply(&m, &p).unwrap();
        let (back, _) = read_ply(&p, 1e-7).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
    }

    #[test]
    fn missing_channel_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let m = fixtures::unit_cube();
        let err = export_colored_ply(&m, "nope", &ColorRamp::default(), &dir.path().join("x.ply")).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }
}
