//! Vector aliases, bounding boxes and the two triangle primitives everything
//! else is built on: ray intersection and closest point.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Vec3>>(points: I) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn centroid(&self) -> Vec3 {
        0.5 * (self.min + self.max)
    }

    pub fn diagonal(&self) -> f64 {
        self.extent().norm()
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Box grown on every side by `margin`.
    pub fn padded(&self, margin: f64) -> Aabb {
        Aabb {
            min: self.min - Vec3::repeat(margin),
            max: self.max + Vec3::repeat(margin),
        }
    }

    /// Box grown on each side by `fraction` of its extent along that axis.
    pub fn inflated(&self, fraction: f64) -> Aabb {
        let m = self.extent() * fraction;
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn distance_squared(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let d = if p[i] < self.min[i] {
                self.min[i] - p[i]
            } else if p[i] > self.max[i] {
                p[i] - self.max[i]
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2
    }

    /// Slab test. Returns the entry parameter (clamped to 0) when the ray
    /// overlaps the box within `[0, t_max]`.
    pub fn ray_entry(&self, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0_f64;
        let mut t1 = t_max;
        for i in 0..3 {
            if dir[i] == 0.0 {
                if origin[i] < self.min[i] || origin[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[i];
            let mut a = (self.min[i] - origin[i]) * inv;
            let mut b = (self.max[i] - origin[i]) * inv;
            if a > b {
                core::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

/// Möller–Trumbore intersection without back-face culling.
///
/// Returns `(t, u, v)` where the hit point is `(1-u-v)·a + u·b + v·c`.
/// Edges are inclusive so a ray through a shared edge hits both triangles.
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    let scale = e1.norm() * e2.norm();
    if scale == 0.0 || det.abs() <= 1e-14 * scale {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    Some((t, u, v))
}

/// Closest point on triangle `abc` to `p` and its barycentric weights
/// `(w_a, w_b, w_c)`, following the Voronoi-region walk from Ericson's
/// Real-Time Collision Detection.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Twice the signed-area vector of triangle `abc`.
pub fn triangle_cross(a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    (b - a).cross(&(c - a))
}

pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * triangle_cross(a, b, c).norm()
}

/// Unit normal by winding order, `None` for a zero-area triangle.
pub fn triangle_normal(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<Vec3> {
    let n = triangle_cross(a, b, c);
    let len = n.norm();
    if len > 0.0 && len.is_finite() {
        Some(n / len)
    } else {
        None
    }
}

/// Any unit vector orthogonal to `v`.
pub fn any_orthogonal(v: &Vec3) -> Vec3 {
    let helper = if v.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    v.cross(&helper).normalize()
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = core::f64::consts::TAU;
    let mut r = phi % tau;
    if r < 0.0 {
        r += tau;
    }
    if r >= tau {
        r -= tau;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> (Vec3, Vec3, Vec3) {
        (Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0))
    }

    #[test]
    fn ray_hits_triangle_interior() {
        let (a, b, c) = tri();
        let (t, u, v) = ray_triangle(&Vec3::new(0.25, 0.25, 1.0), &-Vec3::z(), &a, &b, &c).unwrap();
        assert!((t - 1.0).abs() < 1e-15);
        assert!((u - 0.25).abs() < 1e-15 && (v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ray_parallel_to_plane_misses() {
        let (a, b, c) = tri();
        assert!(ray_triangle(&Vec3::new(0.2, 0.2, 1.0), &Vec3::x(), &a, &b, &c).is_none());
    }

    #[test]
    fn closest_point_regions() {
        let (a, b, c) = tri();
        let (q, w) = closest_point_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c);
        assert_eq!(q, a);
        assert_eq!(w, [1.0, 0.0, 0.0]);
        let (q, w) = closest_point_on_triangle(&Vec3::new(0.5, -1.0, 3.0), &a, &b, &c);
        assert!((q - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
        assert!((w[1] - 0.5).abs() < 1e-15);
        let centroid = (a + b + c) / 3.0;
        let (_, w) = closest_point_on_triangle(&(centroid + Vec3::z() * 0.001), &a, &b, &c);
        for wi in w {
            assert!((wi - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn slab_test_axis_parallel_ray() {
        let b = Aabb { min: Vec3::repeat(-0.5), max: Vec3::repeat(0.5) };
        assert_eq!(b.ray_entry(&Vec3::new(0.0, 0.0, 2.0), &-Vec3::z(), 10.0), Some(1.5));
        assert_eq!(b.ray_entry(&Vec3::new(0.0, 0.0, 2.0), &Vec3::z(), 10.0), None);
        assert_eq!(b.ray_entry(&Vec3::new(0.7, 0.0, 2.0), &-Vec3::z(), 10.0), None);
    }

    #[test]
    fn wrap_angle_range() {
        let tau = core::f64::consts::TAU;
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(-0.1) - (tau - 0.1)).abs() < 1e-15);
        assert!(wrap_angle(-1e-300) < tau);
        assert!((wrap_angle(3.0 * tau + 1.0) - 1.0).abs() < 1e-12);
    }
}
