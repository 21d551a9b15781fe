//! Deterministic synthetic meshes: surfaces of revolution for cups, an
//! annular cylinder, a goblet, plus a cube and an icosphere.
//!
//! Revolved solids are described by a closed profile in the `(r, z)` half
//! plane traversed counterclockwise (r to the right, z up). Profile points
//! on the axis become single pole vertices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;
use crate::grasp::GraspCandidate;
use crate::mesh::TriangleMesh;

/// Cube of edge 1 centered at the origin: 8 vertices, 12 outward triangles.
pub fn unit_cube_indexed() -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let mut p = Vec::with_capacity(8);
    for z in [-0.5, 0.5] {
        p.push(Vec3::new(-0.5, -0.5, z));
        p.push(Vec3::new(0.5, -0.5, z));
        p.push(Vec3::new(0.5, 0.5, z));
        p.push(Vec3::new(-0.5, 0.5, z));
    }
    let f = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [2, 3, 7],
        [2, 7, 6],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    (p, f)
}

/// The same cube with every triangle owning its three vertices.
pub fn unit_cube_soup() -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let (p, f) = unit_cube_indexed();
    let mut pos = Vec::with_capacity(36);
    let mut faces = Vec::with_capacity(12);
    for t in f {
        let base = pos.len() as u32;
        for i in t {
            pos.push(p[i as usize]);
        }
        faces.push([base, base + 1, base + 2]);
    }
    (pos, faces)
}

pub fn unit_cube() -> TriangleMesh {
    let (p, f) = unit_cube_indexed();
    TriangleMesh::new(p, f).expect("cube is valid")
}

/// Splits every profile edge longer than `max_edge` into equal pieces.
pub fn subdivide_closed(profile: &[(f64, f64)], max_edge: f64) -> Vec<(f64, f64)> {
    let n = profile.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (r0, z0) = profile[i];
        let (r1, z1) = profile[(i + 1) % n];
        let len = ((r1 - r0).powi(2) + (z1 - z0).powi(2)).sqrt();
        // Edges along the axis collapse to poles; splitting them would only
        // add unreferenced vertices.
        let on_axis = r0.abs() < 1e-12 && r1.abs() < 1e-12;
        let pieces = if max_edge > 0.0 && !on_axis { (len / max_edge).ceil().max(1.0) as usize } else { 1 };
        for k in 0..pieces {
            let s = k as f64 / pieces as f64;
            out.push((r0 + s * (r1 - r0), z0 + s * (z1 - z0)));
        }
    }
    out
}

/// Revolves a closed counterclockwise `(r, z)` profile around the z axis.
pub fn revolve(profile: &[(f64, f64)], segments: usize) -> TriangleMesh {
    assert!(segments >= 3, "need at least three segments");
    let n = profile.len();
    let mut vertices = Vec::new();
    // Per profile point: first vertex index and whether it is a pole.
    let mut rings: Vec<(u32, bool)> = Vec::with_capacity(n);
    for &(r, z) in profile {
        let first = vertices.len() as u32;
        if r.abs() < 1e-12 {
            vertices.push(Vec3::new(0.0, 0.0, z));
            rings.push((first, true));
        } else {
            for j in 0..segments {
                let th = TAU * j as f64 / segments as f64;
                vertices.push(Vec3::new(r * th.cos(), r * th.sin(), z));
            }
            rings.push((first, false));
        }
    }
    let at = |i: usize, j: usize| -> u32 {
        let (first, pole) = rings[i];
        if pole {
            first
        } else {
            first + (j % segments) as u32
        }
    };
    let mut triangles = Vec::new();
    for i in 0..n {
        let k = (i + 1) % n;
        let (pi, pk) = (rings[i].1, rings[k].1);
        if pi && pk {
            continue;
        }
        for j in 0..segments {
            if !pi {
                triangles.push([at(i, j), at(i, j + 1), at(k, j)]);
            }
            if !pk {
                triangles.push([at(k, j), at(i, j + 1), at(k, j + 1)]);
            }
        }
    }
    TriangleMesh::new(vertices, triangles).expect("revolved profile is valid")
}

/// Annular cylinder standing on z = 0, open at both ends except for the
/// ring faces joining inner and outer walls.
pub fn annulus(r_out: f64, r_in: f64, height: f64, segments: usize, vertical_divisions: usize) -> TriangleMesh {
    let profile = annulus_profile(r_out, r_in, height, vertical_divisions);
    revolve(&profile, segments)
}

fn annulus_profile(r_out: f64, r_in: f64, height: f64, divisions: usize) -> Vec<(f64, f64)> {
    let mut p = vec![(r_in, 0.0)];
    for k in 0..divisions {
        p.push((r_out, height * k as f64 / divisions as f64));
    }
    p.push((r_out, height));
    for k in (1..=divisions).rev() {
        p.push((r_in, height * k as f64 / divisions as f64));
    }
    p
}

/// Solid cylinder (no inner wall) standing on z = 0.
pub fn solid_cylinder(radius: f64, height: f64, segments: usize, max_edge: f64) -> TriangleMesh {
    let profile = subdivide_closed(&[(0.0, 0.0), (radius, 0.0), (radius, height), (0.0, height)], max_edge);
    revolve(&profile, segments)
}

/// The annulus from the thickness oracle: outer 40 mm, inner 38 mm,
/// height 100 mm, about 4.6k triangles.
pub fn reference_annulus() -> TriangleMesh {
    annulus(0.040, 0.038, 0.100, 128, 8)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rim {
    Plain,
    /// Circular bead of the given diameter centered on the wall top.
    Rolled { diameter: f64 },
}

/// Conical cup with a flat base plate. The wall thickness varies linearly
/// from bottom to top and is measured horizontally.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CupSpec {
    /// Height of the wall top (bead center for rolled rims).
    pub height: f64,
    pub r_bottom: f64,
    pub r_top: f64,
    pub wall_bottom: f64,
    pub wall_top: f64,
    pub base_thickness: f64,
    pub rim: Rim,
    pub segments: usize,
    pub max_edge: f64,
    pub bead_segments: usize,
}

impl CupSpec {
    pub fn outer_radius(&self, z: f64) -> f64 {
        self.r_bottom + (self.r_top - self.r_bottom) * (z / self.height)
    }

    pub fn wall(&self, z: f64) -> f64 {
        self.wall_bottom + (self.wall_top - self.wall_bottom) * (z / self.height)
    }

    /// Highest point of the cup.
    pub fn top(&self) -> f64 {
        match self.rim {
            Rim::Plain => self.height,
            Rim::Rolled { diameter } => self.height + 0.5 * diameter,
        }
    }

    /// Outermost rim point as `(r, z)`.
    pub fn rim_contact(&self) -> (f64, f64) {
        match self.rim {
            Rim::Plain => (self.outer_radius(self.height - 0.001), self.height - 0.001),
            Rim::Rolled { diameter } => (self.r_top - 0.5 * self.wall_top + 0.5 * diameter, self.height),
        }
    }

    pub fn profile(&self) -> Vec<(f64, f64)> {
        let tb = self.base_thickness;
        let inner_base = (self.outer_radius(tb) - self.wall(tb), tb);
        let mut p = vec![(0.0, 0.0), (self.r_bottom, 0.0)];
        match self.rim {
            Rim::Plain => {
                p.push((self.r_top, self.height));
                p.push((self.r_top - self.wall_top, self.height));
                p.push(inner_base);
                p.push((0.0, tb));
                subdivide_closed(&p, self.max_edge)
            }
            Rim::Rolled { diameter } => {
                let rad = 0.5 * diameter;
                let half = 0.5 * self.wall_top;
                let rc = self.r_top - half;
                let zc = self.height;
                let s = (rad * rad - half * half).sqrt();
                p.push((rc + half, zc - s));
                let mut body = subdivide_closed(&p, self.max_edge);
                // subdivide_closed also emitted the closing edge back to the
                // start; keep only up to the outer bead joint.
                let joint = body.iter().position(|&q| q == (rc + half, zc - s)).unwrap();
                body.truncate(joint + 1);
                let th0 = (-s).atan2(half);
                let th1 = (-s).atan2(-half) + TAU;
                let nb = self.bead_segments.max(8);
                for k in 1..nb {
                    let th = th0 + (th1 - th0) * k as f64 / nb as f64;
                    body.push((rc + rad * th.cos(), zc + rad * th.sin()));
                }
                let mut tail = vec![(rc - half, zc - s), inner_base, (0.0, tb)];
                tail.push((0.0, 0.0));
                let tail = open_polyline(&tail, self.max_edge);
                body.extend(tail.into_iter().take_while(|&q| q != (0.0, 0.0)));
                body
            }
        }
    }

    pub fn mesh(&self) -> TriangleMesh {
        revolve(&self.profile(), self.segments)
    }
}

/// Subdivides an open polyline (endpoints included).
fn open_polyline(points: &[(f64, f64)], max_edge: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in points.windows(2) {
        let (r0, z0) = w[0];
        let (r1, z1) = w[1];
        let len = ((r1 - r0).powi(2) + (z1 - z0).powi(2)).sqrt();
        let pieces = (len / max_edge).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let s = k as f64 / pieces as f64;
            out.push((r0 + s * (r1 - r0), z0 + s * (z1 - z0)));
        }
    }
    out.push(points[points.len() - 1]);
    out
}

const CUP_SEGMENTS: usize = 96;
const CUP_EDGE: f64 = 0.004;

/// Cup whose wall thickens linearly from 1 mm at the bottom to 3 mm at the top.
pub fn tapered_cup_spec() -> CupSpec {
    CupSpec {
        height: 0.100,
        r_bottom: 0.026,
        r_top: 0.036,
        wall_bottom: 0.001,
        wall_top: 0.003,
        base_thickness: 0.002,
        rim: Rim::Plain,
        segments: CUP_SEGMENTS,
        max_edge: CUP_EDGE,
        bead_segments: 24,
    }
}

pub fn tapered_cup_default() -> TriangleMesh {
    tapered_cup_spec().mesh()
}

/// 1 mm wall with a straight cut rim.
pub fn plain_rim_cup_spec() -> CupSpec {
    CupSpec { wall_bottom: 0.001, wall_top: 0.001, ..tapered_cup_spec() }
}

/// 1 mm wall ending in a rolled bead three wall thicknesses across.
pub fn rolled_rim_cup_spec() -> CupSpec {
    CupSpec { rim: Rim::Rolled { diameter: 0.003 }, ..plain_rim_cup_spec() }
}

/// Thin paper cup with a rolled lip.
pub fn paper_cup_spec() -> CupSpec {
    CupSpec {
        height: 0.095,
        r_bottom: 0.026,
        r_top: 0.037,
        wall_bottom: 0.0005,
        wall_top: 0.0005,
        base_thickness: 0.0008,
        rim: Rim::Rolled { diameter: 0.0036 },
        segments: CUP_SEGMENTS,
        max_edge: CUP_EDGE,
        bead_segments: 24,
    }
}

/// Thin-walled disposable plastic cup with a rolled lip.
pub fn plastic_cup_spec() -> CupSpec {
    CupSpec {
        height: 0.100,
        r_bottom: 0.025,
        r_top: 0.036,
        wall_bottom: 0.0003,
        wall_top: 0.0003,
        base_thickness: 0.0006,
        rim: Rim::Rolled { diameter: 0.003 },
        segments: CUP_SEGMENTS,
        max_edge: CUP_EDGE,
        bead_segments: 24,
    }
}

/// Stemmed glass: flat foot, solid stem, conical bowl bottom and a straight
/// thin bowl wall.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GobletSpec {
    pub foot_radius: f64,
    pub foot_thickness: f64,
    pub stem_radius: f64,
    pub stem_top: f64,
    pub bowl_radius: f64,
    pub cone_top: f64,
    pub height: f64,
    pub bowl_wall: f64,
    /// Solid material above the stem top before the bowl cavity starts.
    pub cavity_lift: f64,
    pub segments: usize,
    pub max_edge: f64,
}

impl Default for GobletSpec {
    fn default() -> Self {
        GobletSpec {
            foot_radius: 0.035,
            foot_thickness: 0.003,
            stem_radius: 0.005,
            stem_top: 0.070,
            bowl_radius: 0.040,
            cone_top: 0.100,
            height: 0.150,
            bowl_wall: 0.0012,
            cavity_lift: 0.004,
            segments: CUP_SEGMENTS,
            max_edge: CUP_EDGE,
        }
    }
}

impl GobletSpec {
    pub fn profile(&self) -> Vec<(f64, f64)> {
        let k = (self.cone_top - self.stem_top) / (self.bowl_radius - self.stem_radius);
        let lift = self.bowl_wall * (1.0 + k * k).sqrt();
        let inner = |r: f64| self.stem_top + k * (r - self.stem_radius) + lift;
        let r_wall = self.bowl_radius - self.bowl_wall;
        let z_apex = self.stem_top + self.cavity_lift;
        let r_flat = self.stem_radius + (z_apex - self.stem_top - lift) / k;
        let p = [
            (0.0, 0.0),
            (self.foot_radius, 0.0),
            (self.foot_radius, self.foot_thickness),
            (self.stem_radius, self.foot_thickness),
            (self.stem_radius, self.stem_top),
            (self.bowl_radius, self.cone_top),
            (self.bowl_radius, self.height),
            (r_wall, self.height),
            (r_wall, inner(r_wall)),
            (r_flat, z_apex),
            (0.0, z_apex),
        ];
        subdivide_closed(&p, self.max_edge)
    }

    pub fn mesh(&self) -> TriangleMesh {
        revolve(&self.profile(), self.segments)
    }
}

pub fn glass_goblet() -> TriangleMesh {
    GobletSpec::default().mesh()
}

/// Subdivided icosahedron projected onto a sphere.
pub fn icosphere(subdivisions: usize, radius: f64) -> TriangleMesh {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut v: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut f: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut mid = |a: u32, b: u32, v: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                v.push(((v[a as usize] + v[b as usize]) * 0.5).normalize());
                (v.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(f.len() * 4);
        for [a, b, c] in f {
            let ab = mid(a, b, &mut v);
            let bc = mid(b, c, &mut v);
            let ca = mid(c, a, &mut v);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        f = next;
    }
    let v = v.into_iter().map(|p| p * radius).collect();
    TriangleMesh::new(v, f).expect("icosphere is valid")
}

/// Five-finger grasp around a vertical object: four fingertips spread on
/// one side and the thumb opposite, all at height `z` on radius `r`.
pub fn ring_candidate(id: &str, z: f64, r: f64, phase: f64, utility: f64, functional_score: f64) -> GraspCandidate {
    let angles = [phase - 0.6, phase - 0.2, phase + 0.2, phase + 0.6, phase + PI];
    let mut contacts = [[0.0; 3]; 5];
    for (c, a) in contacts.iter_mut().zip(angles) {
        *c = [r * a.cos(), r * a.sin(), z];
    }
    let standoff = r + 0.06;
    GraspCandidate {
        id: String::from(id),
        t: [standoff * phase.cos(), standoff * phase.sin(), z],
        r6d: [0.0, 0.0, 1.0, -phase.cos(), -phase.sin(), 0.0],
        theta: [0.0; 24],
        contacts,
        utility,
        functional_score,
    }
}

/// Fixture names accepted by [`by_name`].
pub const NAMES: [&str; 8] = [
    "annulus",
    "tapered_cup",
    "plain_rim_cup",
    "rolled_rim_cup",
    "paper_cup",
    "plastic_cup",
    "glass_goblet",
    "icosphere",
];

pub fn by_name(name: &str) -> Option<TriangleMesh> {
    Some(match name {
        "annulus" => reference_annulus(),
        "tapered_cup" => tapered_cup_default(),
        "plain_rim_cup" => plain_rim_cup_spec().mesh(),
        "rolled_rim_cup" => rolled_rim_cup_spec().mesh(),
        "paper_cup" => paper_cup_spec().mesh(),
        "plastic_cup" => plastic_cup_spec().mesh(),
        "glass_goblet" => glass_goblet(),
        "icosphere" => icosphere(3, 0.05),
        _ => return None,
    })
}

/// Human-readable summary used in logs and fixture listings.
pub fn describe(mesh: &TriangleMesh) -> String {
    format!("{} vertices, {} triangles", mesh.vertex_count(), mesh.triangle_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signed_volume(m: &TriangleMesh) -> f64 {
        (0..m.triangle_count())
            .map(|i| {
                let [a, b, c] = m.triangle(i);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    fn is_closed(m: &TriangleMesh) -> bool {
        let mut edges: BTreeMap<(u32, u32), i32> = BTreeMap::new();
        for t in m.triangles() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a, b)).or_default() += 1;
                *edges.entry((b, a)).or_default() -= 1;
            }
        }
        edges.values().all(|&c| c == 0)
    }

    #[test]
    fn annulus_volume_and_size() {
        let m = reference_annulus();
        assert!(m.triangle_count() > 4000 && m.triangle_count() < 5200);
        assert!(is_closed(&m));
        let exact = PI * (0.04f64.powi(2) - 0.038f64.powi(2)) * 0.1;
        let polygon = exact * (128.0 / TAU) * (TAU / 128.0).sin();
        assert!((signed_volume(&m) - polygon).abs() < 1e-9 * exact.max(1.0));
    }

    #[test]
    fn fixtures_are_closed_and_outward() {
        for name in NAMES {
            let m = by_name(name).unwrap();
            assert!(is_closed(&m), "{name} not closed");
            assert!(signed_volume(&m) > 0.0, "{name} inside out");
        }
    }

    #[test]
    fn rolled_rim_profile_reaches_bead_top() {
        let s = rolled_rim_cup_spec();
        let m = s.mesh();
        let top = m.vertices().iter().map(|v| v.z).fold(f64::MIN, f64::max);
        assert!((top - s.top()).abs() < 1e-4);
    }

    #[test]
    fn cube_soup_has_36_vertices() {
        assert_eq!(unit_cube_soup().0.len(), 36);
    }

    #[test]
    fn ring_candidate_contacts_on_radius() {
        let g = ring_candidate("a", 0.05, 0.03, 0.4, 0.8, 0.9);
        for c in g.contacts {
            assert!(((c[0] * c[0] + c[1] * c[1]).sqrt() - 0.03).abs() < 1e-12);
            assert_eq!(c[2], 0.05);
        }
    }
}
