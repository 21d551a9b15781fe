//! Wall thickness over a cylindrical L×A grid by two-stage raycasting.
//!
//! Ray one comes in horizontally from outside and finds the outer wall
//! point `p1` with normal `n1`. Ray two starts just inside `p1` and travels
//! against the in-plane part of `n1` until it leaves the material at `p2`;
//! the sample is `|p2 - p1|`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::MeshIndex;
use crate::frame::PrincipalFrame;
use crate::geometry::Vec3;
use crate::stats::median;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThicknessError {
    #[error("invalid grid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no grid cell produced a thickness sample; mesh and frame do not match")]
    AllCellsInvalid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThicknessConfig {
    pub layers: usize,
    pub bins: usize,
    pub probes: usize,
    /// Layers at each end that always get edge refinement.
    pub edge_layers: usize,
    pub seed: u64,
    /// Offset of the second ray origin into the material (m).
    pub epsilon: f64,
    /// Ray one starts at this multiple of the largest mesh radius.
    pub outer_radius_factor: f64,
    /// Hits whose normal is within this angle of the axis are base-facing
    /// and excluded from the lateral grid (degrees).
    pub axial_normal_deg: f64,
    /// Minimum in-plane normal length for a usable second ray.
    pub min_projection: f64,
    /// Layers whose miss rate exceeds this are refined as well.
    pub refine_miss_rate: f64,
    /// Jitter span as a fraction of the cell size.
    pub jitter: f64,
    /// Gap kept between the measured base plate and the first lateral layer (m).
    pub base_clearance: f64,
    /// Height fraction at the bottom that counts as the base region.
    pub base_band: f64,
}

impl Default for ThicknessConfig {
    fn default() -> Self {
        ThicknessConfig {
            layers: 32,
            bins: 64,
            probes: 3,
            edge_layers: 2,
            seed: 0,
            epsilon: 1e-5,
            outer_radius_factor: 1.5,
            axial_normal_deg: 30.0,
            min_projection: 0.1,
            refine_miss_rate: 0.3,
            jitter: 0.5,
            base_clearance: 1e-3,
            base_band: 0.1,
        }
    }
}

impl ThicknessConfig {
    pub fn validate(&self) -> Result<(), ThicknessError> {
        if self.layers < 8 {
            return Err(ThicknessError::InvalidConfig("need at least 8 layers"));
        }
        if self.bins < 16 {
            return Err(ThicknessError::InvalidConfig("need at least 16 angular bins"));
        }
        if self.probes == 0 {
            return Err(ThicknessError::InvalidConfig("need at least one probe per cell"));
        }
        if !(self.epsilon > 0.0) || !(self.outer_radius_factor > 1.0) {
            return Err(ThicknessError::InvalidConfig("epsilon must be positive and the outer radius factor above 1"));
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(ThicknessError::InvalidConfig("jitter must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Placement of the grid around the frame axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub layers: usize,
    pub bins: usize,
    pub h_lo: f64,
    pub h_hi: f64,
    /// Radius ray one starts from.
    pub r_out: f64,
}

impl GridGeometry {
    pub fn dh(&self) -> f64 {
        (self.h_hi - self.h_lo) / self.layers as f64
    }

    pub fn dphi(&self) -> f64 {
        core::f64::consts::TAU / self.bins as f64
    }

    pub fn layer_height(&self, l: usize) -> f64 {
        self.h_lo + (l as f64 + 0.5) * self.dh()
    }

    pub fn bin_angle(&self, a: usize) -> f64 {
        (a as f64 + 0.5) * self.dphi()
    }

    /// Continuous `(layer, bin)` coordinates where cell centers are integers.
    pub fn continuous_index(&self, h: f64, phi: f64) -> (f64, f64) {
        ((h - self.h_lo) / self.dh() - 0.5, phi / self.dphi() - 0.5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessGrid {
    pub geometry: GridGeometry,
    /// Row-major `layers × bins` thickness in meters.
    pub tau: Vec<f64>,
    /// Whether the cell produced its own sample before completion.
    pub mask: Vec<bool>,
    pub layer_heights: Vec<f64>,
    /// Fraction of cells per layer that had no sample before completion.
    pub miss_rate: Vec<f64>,
    pub refined_layers: Vec<usize>,
    /// Bottom plate thickness measured along the axis, if there is one.
    pub base_thickness: Option<f64>,
}

impl ThicknessGrid {
    pub fn layers(&self) -> usize {
        self.geometry.layers
    }

    pub fn bins(&self) -> usize {
        self.geometry.bins
    }

    pub fn at(&self, l: usize, a: usize) -> f64 {
        self.tau[l * self.geometry.bins + a]
    }

    pub fn layer(&self, l: usize) -> &[f64] {
        let b = self.geometry.bins;
        &self.tau[l * b..(l + 1) * b]
    }

    pub fn layer_mean(&self, l: usize) -> f64 {
        self.layer(l).iter().sum::<f64>() / self.geometry.bins as f64
    }

    pub fn mean(&self) -> f64 {
        self.tau.iter().sum::<f64>() / self.tau.len() as f64
    }

    /// Uniform grid, mostly for tests and synthetic inputs.
    pub fn filled(geometry: GridGeometry, value: f64) -> ThicknessGrid {
        let n = geometry.layers * geometry.bins;
        ThicknessGrid {
            layer_heights: (0..geometry.layers).map(|l| geometry.layer_height(l)).collect(),
            geometry,
            tau: vec![value; n],
            mask: vec![true; n],
            miss_rate: vec![0.0; geometry.layers],
            refined_layers: Vec::new(),
            base_thickness: None,
        }
    }
}

/// Result of one two-stage probe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProbeOutcome {
    Thickness(f64),
    /// Ray one found nothing.
    Miss,
    /// Outer hit faces along the axis (base or top face).
    AxialFacing,
    /// In-plane normal too short for a stable second ray.
    Unstable,
    /// Ray two never left the material.
    NoExit,
}

/// Two-stage probe at height `h` and angle `phi`.
pub fn probe_ray(index: &MeshIndex<'_>, frame: &PrincipalFrame, h: f64, phi: f64, r_out: f64, cfg: &ThicknessConfig) -> ProbeOutcome {
    let origin = frame.from_cylindrical(h, phi, r_out);
    let dir = -frame.radial(phi);
    let Some(hit) = index.raycast(&origin, &dir, 2.0 * r_out) else {
        return ProbeOutcome::Miss;
    };
    let n1 = if hit.normal.dot(&dir) > 0.0 { -hit.normal } else { hit.normal };
    let axial = n1.dot(&frame.e_h);
    if axial.abs() >= cfg.axial_normal_deg.to_radians().cos() {
        return ProbeOutcome::AxialFacing;
    }
    let planar = n1 - frame.e_h * axial;
    let len = planar.norm();
    if len < cfg.min_projection {
        return ProbeOutcome::Unstable;
    }
    let dir2 = -planar / len;
    second_ray(index, &hit.point, &dir2, 4.0 * r_out, cfg.epsilon)
}

fn second_ray(index: &MeshIndex<'_>, p1: &Vec3, dir: &Vec3, max_dist: f64, eps: f64) -> ProbeOutcome {
    let start = p1 + dir * eps;
    match index.raycast(&start, dir, max_dist) {
        Some(hit) => ProbeOutcome::Thickness((hit.point - p1).norm()),
        None => ProbeOutcome::NoExit,
    }
}

fn cell_rng(seed: u64, pass: u64, l: usize, a: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((pass << 48) | ((l as u64) << 24) | a as u64);
    rng
}

/// Median thickness over jittered probes of cell `(l, a)`, `None` when no
/// probe produced a sample.
pub fn probe_cell(
    index: &MeshIndex<'_>,
    frame: &PrincipalFrame,
    geometry: &GridGeometry,
    l: usize,
    a: usize,
    cfg: &ThicknessConfig,
) -> Option<f64> {
    let mut rng = cell_rng(cfg.seed, 0, l, a);
    let (h0, phi0) = (geometry.layer_height(l), geometry.bin_angle(a));
    let (jh, jp) = (cfg.jitter * geometry.dh(), cfg.jitter * geometry.dphi());
    let mut samples = Vec::with_capacity(cfg.probes);
    for _ in 0..cfg.probes {
        let h = h0 + (rng.random::<f64>() - 0.5) * jh;
        let phi = phi0 + (rng.random::<f64>() - 0.5) * jp;
        if let ProbeOutcome::Thickness(t) = probe_ray(index, frame, h, phi, geometry.r_out, cfg) {
            samples.push(t);
        }
    }
    median(&samples)
}

/// Base plate thickness from rays shot up along the axis under the object.
pub fn probe_base(index: &MeshIndex<'_>, frame: &PrincipalFrame, cfg: &ThicknessConfig) -> Option<f64> {
    let mesh = index.mesh();
    let (h_min, h_max) = frame.height_range;
    let height = h_max - h_min;
    let band_top = h_min + cfg.base_band * height;
    let r_bottom = mesh
        .vertices()
        .iter()
        .map(|v| frame.to_cylindrical(v))
        .filter(|c| c.h <= band_top)
        .fold(0.0f64, |m, c| m.max(c.r));
    if r_bottom <= 0.0 {
        return None;
    }
    let margin = 0.05 * height + 1e-3;
    let cos_lim = cfg.axial_normal_deg.to_radians().cos();
    let mut samples = Vec::new();
    for frac in [0.35, 0.55, 0.75] {
        for k in 0..3 {
            let phi = core::f64::consts::TAU * (k as f64 + 0.25) / 3.0;
            let origin = frame.from_cylindrical(h_min - margin, phi, frac * r_bottom);
            let Some(hit) = index.raycast(&origin, &frame.e_h, height + 2.0 * margin) else {
                continue;
            };
            if frame.to_cylindrical(&hit.point).h > band_top {
                continue;
            }
            let n1 = if hit.normal.dot(&frame.e_h) > 0.0 { -hit.normal } else { hit.normal };
            if -n1.dot(&frame.e_h) < cos_lim {
                continue;
            }
            if let ProbeOutcome::Thickness(t) = second_ray(index, &hit.point, &-n1, height + 2.0 * margin, cfg.epsilon) {
                samples.push(t);
            }
        }
    }
    median(&samples)
}

/// Probes, completes and smooths the grid. Edge refinement is separate.
pub fn build_thickness_grid(
    index: &MeshIndex<'_>,
    frame: &PrincipalFrame,
    cfg: &ThicknessConfig,
) -> Result<ThicknessGrid, ThicknessError> {
    cfg.validate()?;
    let mesh = index.mesh();
    let max_r = mesh.vertices().iter().map(|v| frame.to_cylindrical(v).r).fold(0.0, f64::max);
    let base_thickness = probe_base(index, frame, cfg);
    let (h_min, h_max) = frame.height_range;
    let h_lo = match base_thickness {
        Some(t) => (h_min + t + cfg.base_clearance).min(h_min + 0.5 * (h_max - h_min)),
        None => h_min,
    };
    let geometry = GridGeometry {
        layers: cfg.layers,
        bins: cfg.bins,
        h_lo,
        h_hi: h_max,
        r_out: cfg.outer_radius_factor * max_r,
    };
    let (l_n, a_n) = (cfg.layers, cfg.bins);
    let mut tau = vec![0.0; l_n * a_n];
    let mut mask = vec![false; l_n * a_n];
    for l in 0..l_n {
        for a in 0..a_n {
            if let Some(t) = probe_cell(index, frame, &geometry, l, a, cfg) {
                tau[l * a_n + a] = t;
                mask[l * a_n + a] = true;
            }
        }
    }
    let miss_rate = (0..l_n)
        .map(|l| mask[l * a_n..(l + 1) * a_n].iter().filter(|&&m| !m).count() as f64 / a_n as f64)
        .collect();
    complete(&mut tau, &mask, l_n, a_n)?;
    smooth(&mut tau, l_n, a_n);
    Ok(ThicknessGrid {
        layer_heights: (0..l_n).map(|l| geometry.layer_height(l)).collect(),
        geometry,
        tau,
        mask,
        miss_rate,
        refined_layers: Vec::new(),
        base_thickness,
    })
}

/// Fills cells without a sample: nearest valid cell along the angular ring
/// (ties averaged), then for empty layers the nearest filled layer.
pub fn complete(tau: &mut [f64], mask: &[bool], layers: usize, bins: usize) -> Result<(), ThicknessError> {
    let mut layer_ok = vec![false; layers];
    for l in 0..layers {
        let row = &mask[l * bins..(l + 1) * bins];
        if !row.iter().any(|&m| m) {
            continue;
        }
        layer_ok[l] = true;
        let orig: Vec<f64> = tau[l * bins..(l + 1) * bins].to_vec();
        for a in 0..bins {
            if row[a] {
                continue;
            }
            for d in 1..=bins / 2 {
                let left = (a + bins - d) % bins;
                let right = (a + d) % bins;
                let vals: Vec<f64> = [left, right].iter().filter(|&&i| row[i]).map(|&i| orig[i]).collect();
                if !vals.is_empty() {
                    tau[l * bins + a] = if left == right { vals[0] } else { vals.iter().sum::<f64>() / vals.len() as f64 };
                    break;
                }
            }
        }
    }
    if !layer_ok.iter().any(|&ok| ok) {
        return Err(ThicknessError::AllCellsInvalid);
    }
    let source: Vec<f64> = tau.to_vec();
    for l in 0..layers {
        if layer_ok[l] {
            continue;
        }
        for d in 1..layers {
            let below = l.checked_sub(d).filter(|&k| layer_ok[k]);
            let above = Some(l + d).filter(|&k| k < layers && layer_ok[k]);
            let picks: Vec<usize> = below.into_iter().chain(above).collect();
            if picks.is_empty() {
                continue;
            }
            for a in 0..bins {
                tau[l * bins + a] = picks.iter().map(|&k| source[k * bins + a]).sum::<f64>() / picks.len() as f64;
            }
            break;
        }
    }
    Ok(())
}

/// Separable `[1, 1, 1] / 3` smoothing: angular with wraparound, then
/// vertical with replicated end layers.
pub fn smooth(tau: &mut [f64], layers: usize, bins: usize) {
    let src = tau.to_vec();
    for l in 0..layers {
        for a in 0..bins {
            let prev = src[l * bins + (a + bins - 1) % bins];
            let next = src[l * bins + (a + 1) % bins];
            tau[l * bins + a] = (prev + src[l * bins + a] + next) / 3.0;
        }
    }
    if layers < 2 {
        return;
    }
    let src = tau.to_vec();
    for l in 0..layers {
        let lo = l.saturating_sub(1);
        let hi = (l + 1).min(layers - 1);
        for a in 0..bins {
            tau[l * bins + a] = (src[lo * bins + a] + src[l * bins + a] + src[hi * bins + a]) / 3.0;
        }
    }
}

/// Layers that edge refinement revisits.
pub fn boundary_layers(grid: &ThicknessGrid, cfg: &ThicknessConfig) -> Vec<usize> {
    let l_n = grid.layers();
    let mut set = BTreeSet::new();
    for k in 0..cfg.edge_layers.min(l_n) {
        set.insert(k);
        set.insert(l_n - 1 - k);
    }
    for (l, &m) in grid.miss_rate.iter().enumerate() {
        if m > cfg.refine_miss_rate {
            set.insert(l);
        }
    }
    set.into_iter().collect()
}

/// Re-probes boundary layers at doubled angular resolution, doubled probe
/// count and two extra sublayers; each bin takes the maximum of its
/// subcell medians so reinforced rims are not underestimated.
pub fn refine_edges(
    grid: &ThicknessGrid,
    index: &MeshIndex<'_>,
    frame: &PrincipalFrame,
    cfg: &ThicknessConfig,
) -> ThicknessGrid {
    let mut out = grid.clone();
    let g = grid.geometry;
    let (dh, dphi) = (g.dh(), g.dphi());
    let layers = boundary_layers(grid, cfg);
    for &l in &layers {
        for a in 0..g.bins {
            let mut rng = cell_rng(cfg.seed, 1, l, a);
            let mut best: Option<f64> = None;
            for sub_h in [-0.25, 0.0, 0.25] {
                for sub_a in [-0.25, 0.25] {
                    let h0 = g.layer_height(l) + sub_h * dh;
                    let phi0 = g.bin_angle(a) + sub_a * dphi;
                    let mut samples = Vec::with_capacity(2 * cfg.probes);
                    for _ in 0..2 * cfg.probes {
                        let h = h0 + (rng.random::<f64>() - 0.5) * cfg.jitter * 0.5 * dh;
                        let phi = phi0 + (rng.random::<f64>() - 0.5) * cfg.jitter * 0.5 * dphi;
                        if let ProbeOutcome::Thickness(t) = probe_ray(index, frame, h, phi, g.r_out, cfg) {
                            samples.push(t);
                        }
                    }
                    if let Some(m) = median(&samples) {
                        best = Some(best.map_or(m, |b: f64| b.max(m)));
                    }
                }
            }
            if let Some(b) = best {
                out.tau[l * g.bins + a] = b;
            }
        }
    }
    out.refined_layers = layers;
    out
}

/// Build followed by edge refinement.
pub fn estimate_thickness(
    index: &MeshIndex<'_>,
    frame: &PrincipalFrame,
    cfg: &ThicknessConfig,
) -> Result<ThicknessGrid, ThicknessError> {
    let grid = build_thickness_grid(index, frame, cfg)?;
    Ok(refine_edges(&grid, index, frame, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frame::{compute_frame, FrameOptions};

    #[test]
    fn single_hole_filled_from_ring() {
        let (l_n, a_n) = (8, 16);
        let mut tau = vec![0.002; l_n * a_n];
        let mut mask = vec![true; l_n * a_n];
        tau[3 * a_n + 5] = 0.0;
        mask[3 * a_n + 5] = false;
        complete(&mut tau, &mask, l_n, a_n).unwrap();
        assert_eq!(tau[3 * a_n + 5], 0.002);
    }

    #[test]
    fn empty_layer_copies_nearest_layers() {
        let (l_n, a_n) = (8, 16);
        let mut tau: Vec<f64> = (0..l_n * a_n).map(|i| (i / a_n) as f64).collect();
        let mut mask = vec![true; l_n * a_n];
        for a in 0..a_n {
            mask[4 * a_n + a] = false;
            mask[7 * a_n + a] = false;
        }
        complete(&mut tau, &mask, l_n, a_n).unwrap();
        assert!(tau[4 * a_n..5 * a_n].iter().all(|&v| v == 4.0), "mean of layers 3 and 5");
        assert!(tau[7 * a_n..].iter().all(|&v| v == 6.0));
    }

    #[test]
    fn all_invalid_is_an_error() {
        let mut tau = vec![0.0; 8 * 16];
        let mask = vec![false; 8 * 16];
        assert_eq!(complete(&mut tau, &mask, 8, 16), Err(ThicknessError::AllCellsInvalid));
    }

    #[test]
    fn smoothing_preserves_constant_and_wraps() {
        let (l_n, a_n) = (8, 16);
        let mut tau = vec![1.0; l_n * a_n];
        smooth(&mut tau, l_n, a_n);
        assert!(tau.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let mut spike = vec![0.0; l_n * a_n];
        spike[0] = 9.0;
        smooth(&mut spike, l_n, a_n);
        assert!(spike[a_n - 1] > 0.0, "angular neighbour across the seam receives mass");
    }

    #[test]
    fn config_limits() {
        let cfg = ThicknessConfig { layers: 4, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = ThicknessConfig { bins: 8, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn solid_cylinder_reads_as_diameter() {
        let m = fixtures::solid_cylinder(0.01, 0.1, 64, 0.01);
        let frame = compute_frame(&m, &FrameOptions::default()).unwrap();
        let idx = MeshIndex::new(&m);
        let cfg = ThicknessConfig::default();
        let out = probe_ray(&idx, &frame, 0.0, 0.3, 0.05, &cfg);
        match out {
            ProbeOutcome::Thickness(t) => assert!((t - 0.02).abs() < 1e-4, "{t}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn probe_above_geometry_misses() {
        let m = fixtures::reference_annulus();
        let frame = compute_frame(&m, &FrameOptions::default()).unwrap();
        let idx = MeshIndex::new(&m);
        let cfg = ThicknessConfig::default();
        assert_eq!(probe_ray(&idx, &frame, 0.2, 1.0, 0.06, &cfg), ProbeOutcome::Miss);
    }
}
