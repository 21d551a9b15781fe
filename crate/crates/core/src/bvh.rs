//! Bounding volume hierarchy over mesh triangles, plus the two queries the
//! pipeline needs: nearest ray hit and closest surface point.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{closest_point_on_triangle, ray_triangle, Aabb, Vec3};
use crate::mesh::TriangleMesh;

/// Minimum accepted hit distance; keeps rays from re-hitting their origin.
pub const RAY_EPSILON: f64 = 1e-9;

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayHit {
    pub point: Vec3,
    /// Unit geometric normal following the triangle winding.
    pub normal: Vec3,
    pub triangle: usize,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycentricLocation {
    pub triangle: usize,
    pub weights: [f64; 3],
    /// Closest point on the surface.
    pub point: Vec3,
    /// Distance from the query to `point`.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocateError {
    #[error("point ({x:.6}, {y:.6}, {z:.6}) lies outside the inflated mesh bounding box")]
    OutOfDomain { x: f64, y: f64, z: f64 },
}

#[derive(Clone, Debug)]
struct Node {
    bbox: Aabb,
    /// Leaf: first entry in `order`. Inner: index of the left child; the
    /// right child is `left + 1`.
    first: u32,
    /// Triangle count for leaves, 0 for inner nodes.
    count: u32,
}

/// Median-split BVH with at most four triangles per leaf.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Bvh {
        let n = mesh.triangle_count();
        let mut boxes = Vec::with_capacity(n);
        let mut centroids = Vec::with_capacity(n);
        let pad = 1e-12 * (1.0 + mesh.bounding_box().diagonal());
        for i in 0..n {
            let [a, b, c] = mesh.triangle(i);
            boxes.push(Aabb::from_points([&a, &b, &c]).padded(pad));
            centroids.push((a + b + c) / 3.0);
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = Vec::with_capacity(2 * n / LEAF_SIZE + 1);
        nodes.push(Node { bbox: Aabb::empty(), first: 0, count: 0 });
        let mut stack = alloc::vec![(0usize, 0usize, n)];
        while let Some((node, lo, hi)) = stack.pop() {
            let bbox = order[lo..hi]
                .iter()
                .fold(Aabb::empty(), |acc, &t| acc.union(&boxes[t as usize]));
            if hi - lo <= LEAF_SIZE {
                nodes[node] = Node { bbox, first: lo as u32, count: (hi - lo) as u32 };
                continue;
            }
            let cbox = Aabb::from_points(order[lo..hi].iter().map(|&t| &centroids[t as usize]));
            let axis = cbox.longest_axis();
            let mid = lo + (hi - lo) / 2;
            order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                centroids[a as usize][axis]
                    .total_cmp(&centroids[b as usize][axis])
                    .then(a.cmp(&b))
            });
            let left = nodes.len();
            nodes.push(Node { bbox: Aabb::empty(), first: 0, count: 0 });
            nodes.push(Node { bbox: Aabb::empty(), first: 0, count: 0 });
            nodes[node] = Node { bbox, first: left as u32, count: 0 };
            stack.push((left + 1, mid, hi));
            stack.push((left, lo, mid));
        }
        Bvh { nodes, order }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// A mesh together with its acceleration structure. Immutable once built.
#[derive(Clone, Debug)]
pub struct MeshIndex<'m> {
    mesh: &'m TriangleMesh,
    bvh: Bvh,
    domain: Aabb,
}

impl<'m> MeshIndex<'m> {
    pub fn new(mesh: &'m TriangleMesh) -> Self {
        MeshIndex { mesh, bvh: Bvh::build(mesh), domain: mesh.bounding_box().inflated(0.1) }
    }

    pub fn mesh(&self) -> &'m TriangleMesh {
        self.mesh
    }

    /// Nearest hit with distance in `(RAY_EPSILON, max_dist]`. Equal
    /// distances resolve to the lower triangle index.
    pub fn raycast(&self, origin: &Vec3, dir: &Vec3, max_dist: f64) -> Option<RayHit> {
        debug_assert!((dir.norm() - 1.0).abs() <= 1e-6, "ray direction must be unit length");
        let mut best: Option<(f64, usize)> = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.bvh.nodes[ni as usize];
            let limit = best.map_or(max_dist, |(t, _)| t);
            let Some(entry) = node.bbox.ray_entry(origin, dir, limit * (1.0 + 1e-12) + 1e-15) else {
                continue;
            };
            if let Some((t, _)) = best {
                if entry > t * (1.0 + 1e-12) + 1e-15 {
                    continue;
                }
            }
            if node.count > 0 {
                let lo = node.first as usize;
                for &tri in &self.bvh.order[lo..lo + node.count as usize] {
                    consider_triangle(self.mesh, tri as usize, origin, dir, max_dist, &mut best);
                }
            } else {
                stack.push(node.first + 1);
                stack.push(node.first);
            }
        }
        best.map(|(t, tri)| make_hit(self.mesh, origin, dir, t, tri))
    }

    /// Closest surface point, its triangle and barycentric weights. Equal
    /// distances resolve to the lower triangle index.
    pub fn locate_point(&self, p: &Vec3) -> Result<BarycentricLocation, LocateError> {
        if !self.domain.contains(p) {
            return Err(LocateError::OutOfDomain { x: p.x, y: p.y, z: p.z });
        }
        let mut best: Option<(f64, usize, Vec3, [f64; 3])> = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.bvh.nodes[ni as usize];
            if let Some((d2, ..)) = best {
                if node.bbox.distance_squared(p) > d2 {
                    continue;
                }
            }
            if node.count > 0 {
                let lo = node.first as usize;
                for &tri in &self.bvh.order[lo..lo + node.count as usize] {
                    let tri = tri as usize;
                    let [a, b, c] = self.mesh.triangle(tri);
                    let (q, w) = closest_point_on_triangle(p, &a, &b, &c);
                    let d2 = (q - p).norm_squared();
                    let better = match best {
                        None => true,
                        Some((bd, bt, ..)) => d2 < bd || (d2 == bd && tri < bt),
                    };
                    if better {
                        best = Some((d2, tri, q, w));
                    }
                }
            } else {
                let (l, r) = (node.first, node.first + 1);
                // Visit the nearer child first.
                let dl = self.bvh.nodes[l as usize].bbox.distance_squared(p);
                let dr = self.bvh.nodes[r as usize].bbox.distance_squared(p);
                if dl <= dr {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        let (d2, triangle, point, weights) = best.expect("mesh has at least one triangle");
        Ok(BarycentricLocation { triangle, weights, point, distance: d2.sqrt() })
    }

    /// Interpolates a per-vertex scalar at the surface point closest to `p`.
    pub fn interpolate(&self, values: &[f64], p: &Vec3) -> Result<f64, LocateError> {
        let loc = self.locate_point(p)?;
        let t = self.mesh.triangles()[loc.triangle];
        Ok(loc.weights[0] * values[t[0] as usize]
            + loc.weights[1] * values[t[1] as usize]
            + loc.weights[2] * values[t[2] as usize])
    }
}

fn consider_triangle(
    mesh: &TriangleMesh,
    tri: usize,
    origin: &Vec3,
    dir: &Vec3,
    max_dist: f64,
    best: &mut Option<(f64, usize)>,
) {
    let [a, b, c] = mesh.triangle(tri);
    if let Some((t, _, _)) = ray_triangle(origin, dir, &a, &b, &c) {
        if t > RAY_EPSILON && t <= max_dist {
            let better = match *best {
                None => true,
                Some((bt, bi)) => t < bt || (t == bt && tri < bi),
            };
            if better {
                *best = Some((t, tri));
            }
        }
    }
}

fn make_hit(mesh: &TriangleMesh, origin: &Vec3, dir: &Vec3, t: f64, tri: usize) -> RayHit {
    RayHit { point: origin + dir * t, normal: mesh.face_normal(tri), triangle: tri, distance: t }
}

/// Reference raycast testing every triangle; the BVH path must agree with it.
pub fn raycast_brute_force(mesh: &TriangleMesh, origin: &Vec3, dir: &Vec3, max_dist: f64) -> Option<RayHit> {
    let mut best = None;
    for tri in 0..mesh.triangle_count() {
        consider_triangle(mesh, tri, origin, dir, max_dist, &mut best);
    }
    best.map(|(t, tri)| make_hit(mesh, origin, dir, t, tri))
}

/// Index of the vertex nearest to `p` (lowest index on ties).
pub fn nearest_vertex(mesh: &TriangleMesh, p: &Vec3) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for (i, v) in mesh.vertices().iter().enumerate() {
        let d = (v - p).norm_squared();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}
