//! Indexed triangle meshes with named per-vertex attribute channels.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{triangle_cross, triangle_normal, Aabb, Vec3};

/// Default weld tolerance in meters.
pub const WELD_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("mesh is empty")]
    EmptyMesh,
    #[error("mesh too small after cleanup: {vertices} vertices, {triangles} triangles (need at least 4 of each)")]
    TooSmall { vertices: usize, triangles: usize },
    #[error("triangle {triangle} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange { triangle: usize, index: u32, count: usize },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("attribute `{name}` has {got} values, expected {expected}")]
    AttributeLength { name: String, expected: usize, got: usize },
    #[error("missing vertex channel `{0}`")]
    MissingChannel(String),
    #[error("vertex channel `{0}` has the wrong kind")]
    WrongChannelKind(String),
}

/// One per-vertex attribute channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Attribute {
    Scalar(Vec<f64>),
    Rgb(Vec<[u8; 3]>),
}

impl Attribute {
    pub fn len(&self) -> usize {
        match self {
            Attribute::Scalar(v) => v.len(),
            Attribute::Rgb(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn gather(&self, order: &[usize]) -> Attribute {
        match self {
            Attribute::Scalar(v) => Attribute::Scalar(order.iter().map(|&i| v[i]).collect()),
            Attribute::Rgb(v) => Attribute::Rgb(order.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// What load-time cleanup did to a triangle soup.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanupStats {
    pub input_vertices: usize,
    pub input_triangles: usize,
    pub welded_vertices: usize,
    pub dropped_triangles: usize,
    pub unreferenced_vertices: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    attributes: BTreeMap<String, Attribute>,
}

impl TriangleMesh {
    /// Builds a mesh from already clean indexed data.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        validate(&vertices, &triangles)?;
        Ok(TriangleMesh { vertices, triangles, attributes: BTreeMap::new() })
    }

    /// Welds duplicate vertices, drops degenerate triangles and unreferenced
    /// vertices, then validates.
    pub fn from_soup(
        positions: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        tolerance: f64,
    ) -> Result<(Self, CleanupStats), MeshError> {
        Self::from_soup_with_attributes(positions, faces, BTreeMap::new(), tolerance)
    }

    /// Like [`TriangleMesh::from_soup`]; attribute values of a welded
    /// vertex come from its first occurrence.
    pub fn from_soup_with_attributes(
        positions: Vec<Vec3>,
        faces: Vec<[u32; 3]>,
        attributes: BTreeMap<String, Attribute>,
        tolerance: f64,
    ) -> Result<(Self, CleanupStats), MeshError> {
        if positions.is_empty() || faces.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        for (i, p) in positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(MeshError::NonFinite(i));
            }
        }
        for (t, f) in faces.iter().enumerate() {
            for &i in f {
                if i as usize >= positions.len() {
                    return Err(MeshError::IndexOutOfRange { triangle: t, index: i, count: positions.len() });
                }
            }
        }
        for (name, a) in &attributes {
            if a.len() != positions.len() {
                return Err(MeshError::AttributeLength {
                    name: name.clone(),
                    expected: positions.len(),
                    got: a.len(),
                });
            }
        }

        let (remap, reps) = weld_vertices(&positions, tolerance);
        let welded: Vec<Vec3> = reps.iter().map(|&i| positions[i]).collect();

        let diag = Aabb::from_points(&welded).diagonal();
        let area_floor = 1e-12 * diag * diag;
        let mut kept = Vec::with_capacity(faces.len());
        for f in &faces {
            let t = [remap[f[0] as usize], remap[f[1] as usize], remap[f[2] as usize]];
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                continue;
            }
            let twice_area =
                triangle_cross(&welded[t[0] as usize], &welded[t[1] as usize], &welded[t[2] as usize]).norm();
            if twice_area <= 2.0 * area_floor {
                continue;
            }
            kept.push(t);
        }

        // Compact away vertices no surviving triangle references.
        let mut used = vec![false; welded.len()];
        for t in &kept {
            for &i in t {
                used[i as usize] = true;
            }
        }
        let mut compact = vec![u32::MAX; welded.len()];
        let mut order = Vec::new();
        for (i, &u) in used.iter().enumerate() {
            if u {
                compact[i] = order.len() as u32;
                order.push(i);
            }
        }
        let vertices: Vec<Vec3> = order.iter().map(|&i| welded[i]).collect();
        let triangles: Vec<[u32; 3]> = kept
            .iter()
            .map(|t| [compact[t[0] as usize], compact[t[1] as usize], compact[t[2] as usize]])
            .collect();
        let source: Vec<usize> = order.iter().map(|&i| reps[i]).collect();
        let attributes = attributes.into_iter().map(|(k, a)| (k, a.gather(&source))).collect();

        let stats = CleanupStats {
            input_vertices: positions.len(),
            input_triangles: faces.len(),
            welded_vertices: positions.len() - welded.len(),
            dropped_triangles: faces.len() - triangles.len(),
            unreferenced_vertices: welded.len() - vertices.len(),
        };
        validate(&vertices, &triangles)?;
        Ok((TriangleMesh { vertices, triangles, attributes }, stats))
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0] as usize], self.vertices[t[1] as usize], self.vertices[t[2] as usize]]
    }

    pub fn face_normal(&self, i: usize) -> Vec3 {
        let [a, b, c] = self.triangle(i);
        triangle_normal(&a, &b, &c).unwrap_or_else(Vec3::z)
    }

    pub fn face_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * triangle_cross(&a, &b, &c).norm()
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for (i, t) in self.triangles.iter().enumerate() {
            let [a, b, c] = self.triangle(i);
            let n = triangle_cross(&a, &b, &c);
            for &v in t {
                acc[v as usize] += n;
            }
        }
        acc.into_iter()
            .map(|n| {
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    Vec3::zeros()
                }
            })
            .collect()
    }

    /// One third of the incident triangle area per vertex.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.vertices.len()];
        for (i, t) in self.triangles.iter().enumerate() {
            let a = self.face_area(i) / 3.0;
            for &v in t {
                acc[v as usize] += a;
            }
        }
        acc
    }

    /// Applies `f` to every vertex. Attributes are kept.
    pub fn map_vertices<F: FnMut(&Vec3) -> Vec3>(&self, mut f: F) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(&mut f).collect(),
            triangles: self.triangles.clone(),
            attributes: self.attributes.clone(),
        }
    }

    pub fn scaled(&self, factor: f64) -> TriangleMesh {
        self.map_vertices(|p| p * factor)
    }

    pub fn attributes(&self) -> &BTreeMap<String, Attribute> {
        &self.attributes
    }

    pub fn set_attribute(&mut self, name: &str, attr: Attribute) -> Result<(), MeshError> {
        if attr.len() != self.vertices.len() {
            return Err(MeshError::AttributeLength {
                name: name.to_string(),
                expected: self.vertices.len(),
                got: attr.len(),
            });
        }
        self.attributes.insert(name.to_string(), attr);
        Ok(())
    }

    pub fn set_scalar(&mut self, name: &str, values: Vec<f64>) -> Result<(), MeshError> {
        self.set_attribute(name, Attribute::Scalar(values))
    }

    pub fn set_rgb(&mut self, name: &str, values: Vec<[u8; 3]>) -> Result<(), MeshError> {
        self.set_attribute(name, Attribute::Rgb(values))
    }

    pub fn scalar(&self, name: &str) -> Result<&[f64], MeshError> {
        match self.attributes.get(name) {
            Some(Attribute::Scalar(v)) => Ok(v),
            Some(_) => Err(MeshError::WrongChannelKind(name.to_string())),
            None => Err(MeshError::MissingChannel(name.to_string())),
        }
    }

    pub fn rgb(&self, name: &str) -> Result<&[[u8; 3]], MeshError> {
        match self.attributes.get(name) {
            Some(Attribute::Rgb(v)) => Ok(v),
            Some(_) => Err(MeshError::WrongChannelKind(name.to_string())),
            None => Err(MeshError::MissingChannel(name.to_string())),
        }
    }
}

fn validate(vertices: &[Vec3], triangles: &[[u32; 3]]) -> Result<(), MeshError> {
    if vertices.is_empty() || triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    if vertices.len() < 4 || triangles.len() < 4 {
        return Err(MeshError::TooSmall { vertices: vertices.len(), triangles: triangles.len() });
    }
    for (i, p) in vertices.iter().enumerate() {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(MeshError::NonFinite(i));
        }
    }
    for (t, tri) in triangles.iter().enumerate() {
        for &i in tri {
            if i as usize >= vertices.len() {
                return Err(MeshError::IndexOutOfRange { triangle: t, index: i, count: vertices.len() });
            }
        }
    }
    Ok(())
}

/// Greedy spatial-hash weld.
///
/// Returns the old→new index map and, per new vertex, the index of the input
/// vertex that represents it. A vertex joins the earliest representative
/// within `tolerance`; representatives are pairwise farther apart than
/// `tolerance`, which makes the operation idempotent.
pub fn weld_vertices(positions: &[Vec3], tolerance: f64) -> (Vec<u32>, Vec<usize>) {
    let mut remap = Vec::with_capacity(positions.len());
    let mut reps: Vec<usize> = Vec::new();
    if tolerance <= 0.0 {
        let mut exact: BTreeMap<[u64; 3], u32> = BTreeMap::new();
        for (i, p) in positions.iter().enumerate() {
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            let id = *exact.entry(key).or_insert_with(|| {
                reps.push(i);
                (reps.len() - 1) as u32
            });
            remap.push(id);
        }
        return (remap, reps);
    }
    let cell = |v: f64| (v / tolerance).floor() as i64;
    let tol2 = tolerance * tolerance;
    let mut grid: BTreeMap<(i64, i64, i64), Vec<u32>> = BTreeMap::new();
    for (i, p) in positions.iter().enumerate() {
        let (cx, cy, cz) = (cell(p.x), cell(p.y), cell(p.z));
        let mut best: Option<u32> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &r in list {
                            if (positions[reps[r as usize]] - p).norm_squared() <= tol2
                                && best.is_none_or(|b| r < b)
                            {
                                best = Some(r);
                            }
                        }
                    }
                }
            }
        }
        let id = match best {
            Some(r) => r,
            None => {
                reps.push(i);
                let r = (reps.len() - 1) as u32;
                grid.entry((cx, cy, cz)).or_default().push(r);
                r
            }
        };
        remap.push(id);
    }
    (remap, reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn cube_loads_clean() {
        let (p, f) = fixtures::unit_cube_indexed();
        let (m, stats) = TriangleMesh::from_soup(p, f, WELD_TOLERANCE).unwrap();
        assert_eq!((m.vertex_count(), m.triangle_count()), (8, 12));
        assert_eq!(stats.dropped_triangles, 0);
    }

    #[test]
    fn duplicated_cube_welds_to_eight() {
        let (p, f) = fixtures::unit_cube_soup();
        assert_eq!(p.len(), 36);
        let (m, stats) = TriangleMesh::from_soup(p, f, WELD_TOLERANCE).unwrap();
        assert_eq!((m.vertex_count(), m.triangle_count()), (8, 12));
        assert_eq!(stats.welded_vertices, 28);
    }

    #[test]
    fn zero_area_triangle_dropped() {
        let (mut p, mut f) = fixtures::unit_cube_indexed();
        let base = p.len() as u32;
        p.push(Vec3::new(0.0, 0.0, 0.0));
        p.push(Vec3::new(0.1, 0.0, 0.0));
        p.push(Vec3::new(0.2, 0.0, 0.0));
        f.push([base, base + 1, base + 2]);
        let (m, stats) = TriangleMesh::from_soup(p, f, WELD_TOLERANCE).unwrap();
        assert_eq!(m.triangle_count(), 12);
        assert_eq!(stats.dropped_triangles, 1);
        assert_eq!(m.vertex_count(), 8);
    }

    #[test]
    fn welding_is_idempotent() {
        let (p, f) = fixtures::unit_cube_soup();
        let (m, _) = TriangleMesh::from_soup(p, f, WELD_TOLERANCE).unwrap();
        let (m2, stats) =
            TriangleMesh::from_soup(m.vertices().to_vec(), m.triangles().to_vec(), WELD_TOLERANCE).unwrap();
        assert_eq!(m, m2);
        assert_eq!(stats.welded_vertices, 0);
    }

    #[test]
    fn weld_chain_keeps_far_representatives() {
        let t = 1.0;
        let pts = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.9, 0.0, 0.0), Vec3::new(1.8, 0.0, 0.0)];
        let (remap, reps) = weld_vertices(&pts, t);
        assert_eq!(remap, vec![0, 0, 1]);
        assert_eq!(reps, vec![0, 2]);
    }

    #[test]
    fn attributes_follow_welding() {
        let (p, f) = fixtures::unit_cube_soup();
        let vals: Vec<f64> = (0..p.len()).map(|i| i as f64).collect();
        let mut attrs = BTreeMap::new();
        attrs.insert("q".to_string(), Attribute::Scalar(vals));
        let (m, _) = TriangleMesh::from_soup_with_attributes(p.clone(), f, attrs, WELD_TOLERANCE).unwrap();
        let q = m.scalar("q").unwrap();
        for (i, v) in m.vertices().iter().enumerate() {
            let first = p.iter().position(|x| x == v).unwrap();
            assert_eq!(q[i], first as f64);
        }
    }

    #[test]
    fn bad_index_rejected() {
        let (p, mut f) = fixtures::unit_cube_indexed();
        f.push([0, 1, 99]);
        assert!(matches!(
            TriangleMesh::from_soup(p, f, WELD_TOLERANCE),
            Err(MeshError::IndexOutOfRange { index: 99, .. })
        ));
    }

    #[test]
    fn vertex_normals_point_outward_on_cube() {
        let (p, f) = fixtures::unit_cube_indexed();
        let (m, _) = TriangleMesh::from_soup(p, f, WELD_TOLERANCE).unwrap();
        for (v, n) in m.vertices().iter().zip(m.vertex_normals()) {
            assert!(v.dot(&n) > 0.0);
        }
    }
}
