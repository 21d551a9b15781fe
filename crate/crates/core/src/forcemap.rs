//! Admissible lateral force map built from the thickness field.
//!
//! `F(l,a) = min((F_base(l,a) + Σ_s b_s(l)) · k_m, F_clamp)` with
//! `F_base = c_base · τ^p` (p = 1 by default) and Gaussian vertical
//! bonuses around locally reinforced layers.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::command::ObjectId;
use crate::frame::PrincipalFrame;
use crate::mesh::{MeshError, TriangleMesh};
use crate::ramp::ColorRamp;
use crate::thickness::{GridGeometry, ThicknessGrid};

/// Name of the per-vertex force channel.
pub const FORCE_CHANNEL: &str = "admissible_force";
/// Name of the companion color channel.
pub const FORCE_COLOR_CHANNEL: &str = "admissible_force_rgb";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForceMapError {
    #[error("invalid material model: {0}")]
    InvalidMaterial(&'static str),
    #[error("calibration needs at least one target zone")]
    NoTargets,
    #[error("zone `{0}` covers no grid layer")]
    EmptyZone(String),
    #[error("zone `{label}` has zero thickness but target {target} N")]
    InfeasibleCalibration { label: String, target: f64 },
    #[error("zone `{0}` has a non-positive target")]
    InvalidTarget(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialId {
    Paper,
    Plastic,
    Glass,
}

impl MaterialId {
    pub fn for_object(object: ObjectId) -> MaterialId {
        match object {
            ObjectId::PaperCup => MaterialId::Paper,
            ObjectId::PlasticCup => MaterialId::Plastic,
            ObjectId::GlassGoblet => MaterialId::Glass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub material: MaterialId,
    pub k_m: f64,
    /// Slope of the base force law (N/m when `exponent` is 1).
    pub c_base: f64,
    pub f_clamp: f64,
    #[serde(default = "one")]
    pub exponent: f64,
}

fn one() -> f64 {
    1.0
}

impl MaterialModel {
    /// Placeholder coefficients before calibration.
    pub fn defaults(material: MaterialId) -> MaterialModel {
        let k_m = match material {
            MaterialId::Paper => 1.0,
            MaterialId::Plastic => 0.2,
            MaterialId::Glass => 12.0,
        };
        MaterialModel { material, k_m, c_base: 2400.0, f_clamp: 1000.0, exponent: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ForceMapError> {
        if !(self.k_m > 0.0 && self.k_m.is_finite()) {
            return Err(ForceMapError::InvalidMaterial("k_m must be positive"));
        }
        if !(self.f_clamp > 0.0) {
            return Err(ForceMapError::InvalidMaterial("F_clamp must be positive"));
        }
        if !(self.c_base >= 0.0 && self.c_base.is_finite()) {
            return Err(ForceMapError::InvalidMaterial("c_base must be non-negative"));
        }
        if !(self.exponent > 0.0) {
            return Err(ForceMapError::InvalidMaterial("exponent must be positive"));
        }
        Ok(())
    }
}

/// Force before bonuses and material scaling.
pub fn base_force(tau: f64, material: &MaterialModel) -> f64 {
    let tau = tau.max(0.0);
    if material.exponent == 1.0 {
        material.c_base * tau
    } else {
        material.c_base * tau.powf(material.exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BonusParams {
    pub beta: f64,
    /// Gaussian width in layers.
    pub sigma: f64,
    /// Minimum peak prominence as a fraction of the grid-wide mean.
    pub prominence: f64,
}

impl Default for BonusParams {
    fn default() -> Self {
        BonusParams { beta: 0.25, sigma: 1.5, prominence: 0.2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReinforcedLayer {
    pub layer: usize,
    /// Peak bonus `β · F̄(s)` in newtons.
    pub amplitude: f64,
}

/// Mean base force of each layer.
pub fn layer_base_means(grid: &ThicknessGrid, material: &MaterialModel) -> Vec<f64> {
    (0..grid.layers())
        .map(|l| grid.layer(l).iter().map(|&t| base_force(t, material)).sum::<f64>() / grid.bins() as f64)
        .collect()
}

/// Topographic prominence of a local maximum at `i`. A maximum on the
/// first or last layer only has one side to descend.
pub fn prominence(values: &[f64], i: usize) -> f64 {
    let peak = values[i];
    let side_min = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut m: Option<f64> = None;
        for j in range {
            if values[j] > peak {
                break;
            }
            m = Some(m.map_or(values[j], |x: f64| x.min(values[j])));
        }
        m
    };
    let left = side_min(&mut (0..i).rev());
    let right = side_min(&mut (i + 1..values.len()));
    let base = match (left, right) {
        (Some(l), Some(r)) => l.max(r),
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (None, None) => peak,
    };
    peak - base
}

/// Local maxima of the layer means; plateaus count once, at their top end.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left_ok = i == 0 || values[i] >= values[i - 1];
            let right_ok = i + 1 == n || values[i] > values[i + 1];
            let has_neighbour_below = (i > 0 && values[i] > values[i - 1]) || (i + 1 < n && values[i] > values[i + 1]);
            left_ok && right_ok && has_neighbour_below
        })
        .collect()
}

pub fn detect_reinforced_layers(grid: &ThicknessGrid, material: &MaterialModel, bonus: &BonusParams) -> Vec<ReinforcedLayer> {
    let means = layer_base_means(grid, material);
    let grid_mean = means.iter().sum::<f64>() / means.len() as f64;
    let threshold = bonus.prominence * grid_mean;
    local_maxima(&means)
        .into_iter()
        .filter(|&i| grid_mean > 0.0 && prominence(&means, i) >= threshold)
        .map(|i| ReinforcedLayer { layer: i, amplitude: bonus.beta * means[i] })
        .collect()
}

/// `Σ_s b_s(l)`.
pub fn bonus_at(reinforced: &[ReinforcedLayer], layer: f64, sigma: f64) -> f64 {
    reinforced
        .iter()
        .map(|s| {
            let d = layer - s.layer as f64;
            s.amplitude * (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceMap {
    pub object: Option<ObjectId>,
    pub material: MaterialModel,
    pub bonus: BonusParams,
    pub frame: PrincipalFrame,
    pub geometry: GridGeometry,
    /// Row-major `layers × bins` admissible force (N).
    pub grid: Vec<f64>,
    pub reinforced_layers: Vec<ReinforcedLayer>,
    /// Admissible force of the bottom face, if the object has one.
    pub base_force: Option<f64>,
    /// One value per mesh vertex; empty until projected.
    pub per_vertex: Vec<f64>,
}

impl ForceMap {
    pub fn layers(&self) -> usize {
        self.geometry.layers
    }

    pub fn bins(&self) -> usize {
        self.geometry.bins
    }

    pub fn at(&self, l: usize, a: usize) -> f64 {
        self.grid[l * self.geometry.bins + a]
    }

    pub fn layer_mean(&self, l: usize) -> f64 {
        let b = self.geometry.bins;
        self.grid[l * b..(l + 1) * b].iter().sum::<f64>() / b as f64
    }

    pub fn grid_range(&self) -> (f64, f64) {
        self.grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Largest per-vertex value (the ranking's `F_max`).
    pub fn vertex_max(&self) -> f64 {
        self.per_vertex.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear sample at height `h` and angle `phi`: periodic in angle,
    /// clamped to the end layers in height.
    pub fn sample(&self, h: f64, phi: f64) -> f64 {
        bilinear(&self.grid, &self.geometry, h, phi)
    }
}

/// Bilinear interpolation over a row-major periodic grid.
pub fn bilinear(values: &[f64], g: &GridGeometry, h: f64, phi: f64) -> f64 {
    let (lc, ac) = g.continuous_index(h, phi);
    let lc = lc.clamp(0.0, (g.layers - 1) as f64);
    let l0 = lc.floor() as usize;
    let l1 = (l0 + 1).min(g.layers - 1);
    let fl = lc - l0 as f64;
    let af = ac.floor();
    let fa = ac - af;
    let n = g.bins as i64;
    let a0 = (af as i64).rem_euclid(n) as usize;
    let a1 = (a0 + 1) % g.bins;
    let v = |l: usize, a: usize| values[l * g.bins + a];
    let lo = v(l0, a0) * (1.0 - fa) + v(l0, a1) * fa;
    let hi = v(l1, a0) * (1.0 - fa) + v(l1, a1) * fa;
    lo * (1.0 - fl) + hi * fl
}

/// Applies the force formula cellwise. The per-vertex array stays empty.
pub fn build_force_map(
    grid: &ThicknessGrid,
    reinforced: &[ReinforcedLayer],
    material: &MaterialModel,
    bonus: &BonusParams,
    frame: &PrincipalFrame,
) -> ForceMap {
    let bins = grid.bins();
    let mut values = Vec::with_capacity(grid.tau.len());
    for l in 0..grid.layers() {
        let b = bonus_at(reinforced, l as f64, bonus.sigma);
        for a in 0..bins {
            values.push(((base_force(grid.at(l, a), material) + b) * material.k_m).min(material.f_clamp));
        }
    }
    let base = grid.base_thickness.map(|t| (base_force(t, material) * material.k_m).min(material.f_clamp));
    ForceMap {
        object: None,
        material: *material,
        bonus: *bonus,
        frame: *frame,
        geometry: grid.geometry,
        grid: values,
        reinforced_layers: reinforced.to_vec(),
        base_force: base,
        per_vertex: Vec::new(),
    }
}

/// Vertices counted as bottom face: normal within `axial_deg` of the axis
/// and below the first lateral layer. Only meaningful when the map has a
/// base force.
pub fn base_region(map: &ForceMap, mesh: &TriangleMesh, axial_deg: f64) -> Vec<bool> {
    let cos_lim = axial_deg.to_radians().cos();
    let normals = mesh.vertex_normals();
    mesh.vertices()
        .iter()
        .zip(&normals)
        .map(|(v, n)| {
            map.base_force.is_some()
                && map.frame.to_cylindrical(v).h < map.geometry.h_lo
                && n.dot(&map.frame.e_h).abs() >= cos_lim
        })
        .collect()
}

/// Per-vertex forces: bilinear grid lookup for lateral vertices, the base
/// force for bottom-face vertices.
pub fn project_to_vertices(map: &ForceMap, mesh: &TriangleMesh) -> Vec<f64> {
    let base = base_region(map, mesh, 30.0);
    mesh.vertices()
        .iter()
        .zip(base)
        .map(|(v, is_base)| match (is_base, map.base_force) {
            (true, Some(f)) => f,
            _ => {
                let c = map.frame.to_cylindrical(v);
                map.sample(c.h, c.phi)
            }
        })
        .collect()
}

/// Stores the force channel and its heat-map colors on the mesh.
pub fn attach_to_mesh(map: &ForceMap, mesh: &mut TriangleMesh, ramp: &ColorRamp) -> Result<(), MeshError> {
    mesh.set_scalar(FORCE_CHANNEL, map.per_vertex.clone())?;
    mesh.set_rgb(FORCE_COLOR_CHANNEL, ramp.colorize(&map.per_vertex))
}

/// Full force-map stage: reinforcement detection, cellwise formula and
/// vertex projection.
pub fn compute_force_map(
    grid: &ThicknessGrid,
    mesh: &TriangleMesh,
    frame: &PrincipalFrame,
    material: &MaterialModel,
    bonus: &BonusParams,
) -> Result<ForceMap, ForceMapError> {
    material.validate()?;
    let reinforced = detect_reinforced_layers(grid, material, bonus);
    let mut map = build_force_map(grid, &reinforced, material, bonus, frame);
    map.per_vertex = project_to_vertices(&map, mesh);
    Ok(map)
}

/// Structural zone given as a height interval above the object's lowest
/// point (m).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneSpec {
    pub label: String,
    pub from: f64,
    pub to: f64,
}

impl ZoneSpec {
    pub fn new(label: &str, from: f64, to: f64) -> ZoneSpec {
        ZoneSpec { label: String::from(label), from, to }
    }

    /// Layers whose centers fall inside the interval.
    pub fn layers(&self, geometry: &GridGeometry, frame: &PrincipalFrame) -> Vec<usize> {
        let h0 = frame.height_range.0;
        (0..geometry.layers)
            .filter(|&l| {
                let above = geometry.layer_height(l) - h0;
                above >= self.from && above <= self.to
            })
            .collect()
    }

    /// Zone for a height `z` above the base, if any.
    pub fn contains(&self, above_base: f64) -> bool {
        above_base >= self.from && above_base <= self.to
    }
}

/// Mean force over every cell of the zone's layers.
pub fn zone_mean(map: &ForceMap, zone: &ZoneSpec) -> Option<f64> {
    let layers = zone.layers(&map.geometry, &map.frame);
    if layers.is_empty() {
        return None;
    }
    Some(layers.iter().map(|&l| map.layer_mean(l)).sum::<f64>() / layers.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneTarget {
    pub zone: ZoneSpec,
    /// Target mean admissible force (N).
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneFit {
    pub label: String,
    pub target: f64,
    pub fitted: f64,
    pub residual: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub material: MaterialModel,
    pub zones: Vec<ZoneFit>,
}

/// Fits `c_base` (with `k_m = 1`) so zone means match their targets.
///
/// The map is linear in `c_base` before clamping, so the fit is a
/// one-parameter least squares on relative residuals
/// `(c·g_i − t_i) / t_i`, where `g_i` is the zone mean at `c_base = 1`.
pub fn calibrate_material(
    targets: &[ZoneTarget],
    grid: &ThicknessGrid,
    frame: &PrincipalFrame,
    template: &MaterialModel,
    bonus: &BonusParams,
) -> Result<Calibration, ForceMapError> {
    if targets.is_empty() {
        return Err(ForceMapError::NoTargets);
    }
    let unit = MaterialModel { k_m: 1.0, c_base: 1.0, f_clamp: f64::INFINITY, ..*template };
    let reinforced = detect_reinforced_layers(grid, &unit, bonus);
    let unit_map = build_force_map(grid, &reinforced, &unit, bonus, frame);
    let (mut num, mut den) = (0.0, 0.0);
    for t in targets {
        if !(t.target > 0.0) {
            return Err(ForceMapError::InvalidTarget(t.zone.label.clone()));
        }
        let g = zone_mean(&unit_map, &t.zone).ok_or_else(|| ForceMapError::EmptyZone(t.zone.label.clone()))?;
        if !(g > 0.0) {
            return Err(ForceMapError::InfeasibleCalibration { label: t.zone.label.clone(), target: t.target });
        }
        let w = 1.0 / (t.target * t.target);
        num += g * t.target * w;
        den += g * g * w;
    }
    let material = MaterialModel { k_m: 1.0, c_base: num / den, ..*template };
    material.validate()?;
    let reinforced = detect_reinforced_layers(grid, &material, bonus);
    let fitted_map = build_force_map(grid, &reinforced, &material, bonus, frame);
    let zones = targets
        .iter()
        .map(|t| {
            let fitted = zone_mean(&fitted_map, &t.zone).unwrap_or(0.0);
            ZoneFit {
                label: t.zone.label.clone(),
                target: t.target,
                fitted,
                residual: fitted - t.target,
                relative_error: (fitted - t.target) / t.target,
            }
        })
        .collect();
    Ok(Calibration { material, zones })
}
