//! Pipeline configuration and per-object profiles.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gripmap_core::fixtures::{self, ring_candidate, CupSpec, GobletSpec};
use gripmap_core::forcemap::{BonusParams, ZoneSpec, ZoneTarget};
use gripmap_core::grasp::RankParams;
use gripmap_core::grip::GripScenario;
use gripmap_core::thickness::ThicknessConfig;
use gripmap_core::{GraspCandidate, ImpedanceParams, MaterialId, MaterialModel, ObjectId};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything that shapes an object's force map and grip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectProfile {
    /// Built-in fixture used when no mesh path is given.
    pub fixture: String,
    pub material: MaterialId,
    /// Zone means to fit `c_base` to. Empty keeps the material table value.
    #[serde(default)]
    pub zones: Vec<ZoneTarget>,
    /// Object mass (kg).
    pub mass: f64,
    pub mu: f64,
    /// Contact penalty stiffness (N/m).
    pub k_wall: f64,
    /// Fixed baseline stiffness; calibrated against the executed grasp when absent.
    #[serde(default)]
    pub k_base: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub mesh: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    /// Multiplies mesh coordinates after loading.
    pub scale: Option<f64>,
    pub thickness: ThicknessConfig,
    pub bonus: BonusParams,
    pub materials: BTreeMap<MaterialId, MaterialModel>,
    pub objects: BTreeMap<ObjectId, ObjectProfile>,
    pub ranking: RankParams,
    pub impedance: ImpedanceParams,
    pub grip: GripScenario,
    /// Reject the whole candidate file on the first invalid entry.
    pub strict_candidates: bool,
    pub trace_csv: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let materials = [MaterialId::Paper, MaterialId::Plastic, MaterialId::Glass]
            .into_iter()
            .map(|m| (m, MaterialModel::defaults(m)))
            .collect();
        let objects = ObjectId::ALL.into_iter().map(|o| (o, default_profile(o))).collect();
        PipelineConfig {
            seed: 0,
            mesh: None,
            candidates: None,
            lexicon: None,
            scale: None,
            thickness: ThicknessConfig::default(),
            bonus: BonusParams::default(),
            materials,
            objects,
            ranking: RankParams::default(),
            impedance: ImpedanceParams::default(),
            grip: GripScenario::default(),
            strict_candidates: false,
            trace_csv: false,
        }
    }
}

fn zone(label: &str, from: f64, to: f64, target: f64) -> ZoneTarget {
    ZoneTarget { zone: ZoneSpec::new(label, from, to), target }
}

/// Built-in profile. Zone heights are meters above the object's lowest point.
pub fn default_profile(object: ObjectId) -> ObjectProfile {
    match object {
        ObjectId::PaperCup => ObjectProfile {
            fixture: "paper_cup".into(),
            material: MaterialId::Paper,
            zones: vec![zone("wall", 0.02, 0.07, 4.8), zone("rim", 0.0935, 0.1, 41.2)],
            mass: 0.012,
            mu: 0.5,
            k_wall: 1e5,
            k_base: None,
        },
        ObjectId::PlasticCup => ObjectProfile {
            fixture: "plastic_cup".into(),
            material: MaterialId::Plastic,
            zones: vec![zone("wall", 0.02, 0.07, 0.3), zone("rim", 0.098, 0.11, 3.7)],
            mass: 0.035,
            mu: 0.5,
            k_wall: 1e5,
            k_base: None,
        },
        ObjectId::GlassGoblet => ObjectProfile {
            fixture: "glass_goblet".into(),
            material: MaterialId::Glass,
            zones: vec![zone("stem", 0.01, 0.06, 565.0), zone("bowl", 0.11, 0.145, 69.0)],
            mass: 0.2,
            mu: 0.4,
            k_wall: 1e6,
            k_base: None,
        },
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: PipelineConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.thickness.validate()?;
        for m in self.materials.values() {
            m.validate()?;
        }
        self.impedance.validate()?;
        let r = &self.ranking;
        if !(r.alpha >= 0.0) || !(0.0..=1.0).contains(&r.tau_f) || r.top_m == 0 {
            bail!("ranking: alpha must be >= 0, tau_f in [0, 1] and top_m >= 1");
        }
        for (id, p) in &self.objects {
            if !(p.mass > 0.0 && p.mu > 0.0 && p.k_wall > 0.0) {
                bail!("object {}: mass, mu and k_wall must be positive", id.as_str());
            }
            if p.k_base.is_some_and(|k| !(k > 0.0)) {
                bail!("object {}: k_base must be positive", id.as_str());
            }
        }
        for path in [&self.mesh, &self.candidates, &self.lexicon].into_iter().flatten() {
            if !path.exists() {
                bail!("{} does not exist", path.display());
            }
        }
        Ok(())
    }

    pub fn profile(&self, object: ObjectId) -> ObjectProfile {
        self.objects.get(&object).cloned().unwrap_or_else(|| default_profile(object))
    }

    pub fn material(&self, id: MaterialId) -> MaterialModel {
        self.materials.get(&id).copied().unwrap_or_else(|| MaterialModel::defaults(id))
    }

    /// Grip scenario with the object's physical parameters filled in.
    pub fn scenario(&self, profile: &ObjectProfile, lambda: f64) -> GripScenario {
        GripScenario { mass: profile.mass, mu: profile.mu, k_wall: profile.k_wall, lambda, ..self.grip }
    }

    /// Canonical JSON and its SHA-256.
    pub fn fingerprint(&self) -> (String, String) {
        let json = serde_json::to_string(self).expect("config serializes");
        let hash = hex::encode(Sha256::digest(json.as_bytes()));
        (json, hash)
    }
}

/// Fixture grasp sets: the first entry is the highest-utility grasp on the
/// weakest zone, the second a slightly lower-utility grasp on the strongest.
pub fn fixture_candidates(object: ObjectId) -> Vec<GraspCandidate> {
    let cup = |spec: CupSpec, utilities: [f64; 5]| {
        let ring = |id: &str, z: f64, u: f64| ring_candidate(id, z, spec.outer_radius(z), 0.0, u, 0.8);
        let (rr, rz) = spec.rim_contact();
        let h = spec.height;
        vec![
            ring("wall_mid", 0.5 * h, utilities[0]),
            ring_candidate("rim", rz, rr, 0.0, utilities[1], 0.8),
            ring("wall_high", 0.7 * h, utilities[2]),
            ring("wall_low", 0.3 * h, utilities[3]),
            ring("wall_upper", 0.8 * h, utilities[4]),
        ]
    };
    match object {
        ObjectId::PaperCup => cup(fixtures::paper_cup_spec(), [0.82, 0.80, 0.78, 0.76, 0.71]),
        ObjectId::PlasticCup => cup(fixtures::plastic_cup_spec(), [0.81, 0.79, 0.77, 0.74, 0.70]),
        ObjectId::GlassGoblet => {
            let g = GobletSpec::default();
            let bowl = |id: &str, z: f64, u: f64| ring_candidate(id, z, g.bowl_radius, 0.0, u, 0.8);
            let stem = |id: &str, z: f64, u: f64| ring_candidate(id, z, g.stem_radius, 0.0, u, 0.7);
            vec![
                bowl("bowl", 0.125, 0.84),
                stem("stem", 0.04, 0.82),
                bowl("bowl_low", 0.11, 0.79),
                bowl("bowl_high", 0.14, 0.77),
                bowl("bowl_mid", 0.118, 0.75),
            ]
        }
    }
}

/// Default profile for a fixture name, if it belongs to one of the objects.
pub fn object_for_fixture(name: &str) -> Option<ObjectId> {
    ObjectId::ALL.into_iter().find(|&o| default_profile(o).fixture == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let (json, hash) = cfg.fingerprint();
        let back: PipelineConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.fingerprint().1, hash);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"seed": 7, "ranking": {"alpha": 0.5}}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.ranking.alpha, 0.5);
        assert_eq!(cfg.ranking.tau_f, 0.5);
        assert_eq!(cfg.objects.len(), 3);
    }

    #[test]
    fn fixture_candidates_meet_the_utility_gap() {
        for o in ObjectId::ALL {
            let c = fixture_candidates(o);
            assert_eq!(c.len(), 5);
            assert!(c.iter().all(|g| g.validate().is_ok()));
            assert!((c[0].utility - c[1].utility) / c[0].utility < 0.03);
            assert!(c[1..].iter().all(|g| g.utility < c[0].utility));
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.ranking.tau_f = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.objects.get_mut(&ObjectId::PaperCup).unwrap().mass = 0.0;
        assert!(cfg.validate().is_err());
    }
}
