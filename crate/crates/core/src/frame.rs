//! Principal-axis frame of an object and the cylindrical coordinates built
//! on it.

use alloc::vec::Vec;

use nalgebra::{Matrix3, SymmetricEigen};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, Vec3};
use crate::mesh::TriangleMesh;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("vertex covariance is rank deficient (eigenvalues {0:?}); vertices are coplanar or collinear")]
    DegenerateGeometry([f64; 3]),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexWeighting {
    /// Every vertex counts once.
    #[default]
    Uniform,
    /// Each vertex weighted by a third of its incident triangle area.
    Area,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameOptions {
    pub weighting: VertexWeighting,
    /// Relative gap below which the two minor eigenvalues count as tied.
    pub tie_tolerance: f64,
    /// Major/middle eigenvalue ratio below which the axis is low confidence.
    pub low_confidence_ratio: f64,
    /// Height fraction at each end used to decide which way is up.
    pub end_band: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions { weighting: VertexWeighting::Uniform, tie_tolerance: 1e-6, low_confidence_ratio: 1.2, end_band: 0.1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipalFrame {
    pub center: Vec3,
    pub e_u: Vec3,
    pub e_v: Vec3,
    pub e_h: Vec3,
    pub height_range: (f64, f64),
    /// Covariance eigenvalues in descending order.
    pub eigenvalues: [f64; 3],
    pub low_confidence: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylindrical {
    pub h: f64,
    pub phi: f64,
    pub r: f64,
}

impl PrincipalFrame {
    /// Frame with the given origin and axes; `e_v` completes a right-handed set.
    pub fn from_axes(center: Vec3, e_u: Vec3, e_h: Vec3, height_range: (f64, f64)) -> Self {
        let e_v = e_h.cross(&e_u);
        PrincipalFrame { center, e_u, e_v, e_h, height_range, eigenvalues: [0.0; 3], low_confidence: false }
    }

    pub fn to_cylindrical(&self, p: &Vec3) -> Cylindrical {
        let d = p - self.center;
        let u = d.dot(&self.e_u);
        let v = d.dot(&self.e_v);
        let r = (u * u + v * v).sqrt();
        let phi = if r == 0.0 { 0.0 } else { wrap_angle(v.atan2(u)) };
        Cylindrical { h: d.dot(&self.e_h), phi, r }
    }

    pub fn from_cylindrical(&self, h: f64, phi: f64, r: f64) -> Vec3 {
        self.center + self.e_h * h + self.radial(phi) * r
    }

    /// Unit radial direction at angle `phi`.
    pub fn radial(&self, phi: f64) -> Vec3 {
        self.e_u * phi.cos() + self.e_v * phi.sin()
    }

    pub fn height(&self) -> f64 {
        self.height_range.1 - self.height_range.0
    }
}

pub fn compute_frame(mesh: &TriangleMesh, opts: &FrameOptions) -> Result<PrincipalFrame, FrameError> {
    let verts = mesh.vertices();
    let weights: Vec<f64> = match opts.weighting {
        VertexWeighting::Uniform => alloc::vec![1.0; verts.len()],
        VertexWeighting::Area => mesh.vertex_areas(),
    };
    let total: f64 = weights.iter().sum();
    let center = verts.iter().zip(&weights).fold(Vec3::zeros(), |acc, (v, w)| acc + v * *w) / total;
    let mut cov = Matrix3::zeros();
    for (v, w) in verts.iter().zip(&weights) {
        let d = v - center;
        cov += d * d.transpose() * *w;
    }
    cov /= total;

    let eig = SymmetricEigen::new(cov);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambdas = [eig.eigenvalues[idx[0]], eig.eigenvalues[idx[1]], eig.eigenvalues[idx[2]]];
    if !(lambdas[0] > 0.0) || lambdas[2] <= 1e-10 * lambdas[0] {
        return Err(FrameError::DegenerateGeometry(lambdas));
    }
    let axis = |k: usize| -> Vec3 {
        let c = eig.eigenvectors.column(idx[k]);
        Vec3::new(c[0], c[1], c[2]).normalize()
    };
    let mut e_h = axis(0);

    // Minor axes: for a tied pair any in-plane basis is an eigenbasis, so
    // anchor it to world x; otherwise orient the eigenvector towards +x.
    let tied = lambdas[1] - lambdas[2] <= opts.tie_tolerance * lambdas[1];
    let e_u = if tied {
        in_plane_reference(&e_h)
    } else {
        orient_towards_world(axis(1))
    };
    let e_u = (e_u - e_h * e_u.dot(&e_h)).normalize();

    // Up is the end with the larger mean radius.
    let hs: Vec<f64> = verts.iter().map(|v| (v - center).dot(&e_h)).collect();
    let (h_min, h_max) = hs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &h| (a.min(h), b.max(h)));
    let band = opts.end_band * (h_max - h_min);
    let radius = |v: &Vec3| {
        let d = v - center;
        (d - e_h * d.dot(&e_h)).norm()
    };
    let mean_r = |pick: &dyn Fn(f64) -> bool| {
        let (s, n) = verts
            .iter()
            .zip(&hs)
            .filter(|(_, h)| pick(**h))
            .fold((0.0, 0usize), |(s, n), (v, _)| (s + radius(v), n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    };
    let r_top = mean_r(&|h| h >= h_max - band);
    let r_bot = mean_r(&|h| h <= h_min + band);
    let scale = r_top.max(r_bot).max(f64::MIN_POSITIVE);
    let flip = if (r_top - r_bot).abs() <= 1e-6 * scale {
        orient_towards_world(e_h).dot(&e_h) < 0.0
    } else {
        r_bot > r_top
    };
    if flip {
        e_h = -e_h;
    }
    let e_v = e_h.cross(&e_u);
    let e_u = e_v.cross(&e_h);

    let (lo, hi) = if flip { (-h_max, -h_min) } else { (h_min, h_max) };
    Ok(PrincipalFrame {
        center,
        e_u,
        e_v,
        e_h,
        height_range: (lo, hi),
        eigenvalues: lambdas,
        low_confidence: lambdas[0] < opts.low_confidence_ratio * lambdas[1],
    })
}

/// World x projected into the plane orthogonal to `n` (falls back to y, z).
fn in_plane_reference(n: &Vec3) -> Vec3 {
    for w in [Vec3::x(), Vec3::y(), Vec3::z()] {
        let p = w - n * w.dot(n);
        if p.norm() > 1e-6 {
            return p.normalize();
        }
    }
    unreachable!("a unit vector cannot be parallel to all three world axes")
}

/// Sign-flips `v` so its first clearly nonzero component along world
/// z, then x, then y is positive.
fn orient_towards_world(v: Vec3) -> Vec3 {
    for k in [2usize, 0, 1] {
        if v[k].abs() > 1e-9 {
            return if v[k] < 0.0 { -v } else { v };
        }
    }
    v
}
