//! Stage runners shared by the subcommands and the end-to-end pipeline.

use std::fmt;
use std::path::{Path, PathBuf};

use gripmap_core::bvh::MeshIndex;
use gripmap_core::command::ParseError;
use gripmap_core::fixtures;
use gripmap_core::forcemap::{attach_to_mesh, calibrate_material, compute_force_map, Calibration, ZoneSpec, ZoneTarget, FORCE_CHANNEL};
use gripmap_core::frame::{compute_frame, FrameOptions};
use gripmap_core::grasp::{functional_filter, report_top_m, score_and_select, RankError, RankParams, RankingReport, Selection};
use gripmap_core::grip::{self, calibrate_k_base, grasp_contacts, GripError, GripScenario};
use gripmap_core::ramp::ColorRamp;
use gripmap_core::thickness::{estimate_thickness, ThicknessGrid};
use gripmap_core::{
    parse_command, ForceMap, GraspCandidate, GripMode, GripReport, ImpedanceParams, Lexicon, MaterialModel, ObjectId,
    TaskCommand, TriangleMesh,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{fixture_candidates, ObjectProfile, PipelineConfig};
use crate::formats::{self, CandidateSet, ForceMapFile, Rejection};
use crate::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Parse,
    Mesh,
    ForceMap,
    Rank,
    Grip,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Parse => "parse",
            Stage::Mesh => "mesh",
            Stage::ForceMap => "forcemap",
            Stage::Rank => "rank",
            Stage::Grip => "grip",
            Stage::Output => "output",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    Validation,
    NoSafeGrasp,
    GripFailure,
    Other,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Other => 1,
            FailureKind::Validation => 2,
            FailureKind::NoSafeGrasp => 3,
            FailureKind::GripFailure => 4,
        }
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage: {source:#}")]
pub struct StageError {
    pub stage: Stage,
    pub kind: FailureKind,
    #[source]
    pub source: anyhow::Error,
}

impl StageError {
    pub fn new(stage: Stage, kind: FailureKind, source: impl Into<anyhow::Error>) -> Self {
        StageError { stage, kind, source: source.into() }
    }

    pub fn validation(stage: Stage, source: impl Into<anyhow::Error>) -> Self {
        Self::new(stage, FailureKind::Validation, source)
    }

    pub fn other(stage: Stage, source: impl Into<anyhow::Error>) -> Self {
        Self::new(stage, FailureKind::Other, source)
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

pub type StageResult<T> = Result<T, StageError>;

pub fn load_lexicon(path: Option<&Path>) -> StageResult<Lexicon> {
    match path {
        None => Ok(Lexicon::standard()),
        Some(p) => formats::read_json(p).map_err(|e| StageError::validation(Stage::Parse, e)),
    }
}

pub fn run_parse(text: &str, lexicon: &Lexicon) -> StageResult<TaskCommand> {
    parse_command(text, lexicon).map_err(|e: ParseError| StageError::validation(Stage::Parse, e))
}

/// Mesh from a file, or the named fixture.
pub fn resolve_mesh(path: Option<&Path>, fixture: &str, scale: Option<f64>) -> StageResult<(TriangleMesh, String)> {
    match path {
        Some(p) => io::load_mesh(p, scale)
            .map(|(m, _)| (m, p.display().to_string()))
            .map_err(|e| StageError::validation(Stage::Mesh, e)),
        None => fixtures::by_name(fixture)
            .map(|m| {
                let m = match scale {
                    Some(s) if s != 1.0 => m.scaled(s),
                    _ => m,
                };
                (m, format!("fixture:{fixture}"))
            })
            .ok_or_else(|| StageError::validation(Stage::Mesh, anyhow::anyhow!("unknown fixture `{fixture}`"))),
    }
}

pub struct ForceMapOutput {
    pub map: ForceMap,
    pub grid: ThicknessGrid,
    pub calibration: Option<Calibration>,
}

/// Frame, thickness, optional calibration against zone targets, force map
/// and vertex projection.
pub fn run_forcemap(
    mesh: &TriangleMesh,
    object: Option<ObjectId>,
    material: &MaterialModel,
    zones: &[ZoneTarget],
    cfg: &PipelineConfig,
) -> StageResult<ForceMapOutput> {
    let stage = |e: anyhow::Error| StageError::validation(Stage::ForceMap, e);
    let index = MeshIndex::new(mesh);
    let frame = compute_frame(mesh, &FrameOptions::default()).map_err(|e| stage(e.into()))?;
    if frame.low_confidence {
        log::warn!("principal axis is weakly determined; force map layers may not follow the object");
    }
    let tcfg = gripmap_core::thickness::ThicknessConfig { seed: cfg.seed, ..cfg.thickness };
    let grid = estimate_thickness(&index, &frame, &tcfg).map_err(|e| stage(e.into()))?;
    let (material, calibration) = if zones.is_empty() {
        (*material, None)
    } else {
        let cal = calibrate_material(zones, &grid, &frame, material, &cfg.bonus).map_err(|e| stage(e.into()))?;
        for z in &cal.zones {
            log::info!("zone {}: target {:.3} N, fitted {:.3} N ({:+.1}%)", z.label, z.target, z.fitted, 100.0 * z.relative_error);
        }
        (cal.material, Some(cal))
    };
    let mut map = compute_force_map(&grid, mesh, &frame, &material, &cfg.bonus).map_err(|e| stage(e.into()))?;
    map.object = object;
    Ok(ForceMapOutput { map, grid, calibration })
}

pub fn write_force_map(out: &ForceMapOutput, mesh: &TriangleMesh, json: &Path, ply: Option<&Path>) -> StageResult<()> {
    formats::write_json(&ForceMapFile::from_map(&out.map, out.calibration.clone()), json)
        .map_err(|e| StageError::other(Stage::Output, e))?;
    if let Some(ply) = ply {
        let mut colored = mesh.clone();
        attach_to_mesh(&out.map, &mut colored, &ColorRamp::default()).map_err(|e| StageError::other(Stage::Output, e))?;
        io::export_colored_ply(&colored, FORCE_CHANNEL, &ColorRamp::default(), ply)
            .map_err(|e| StageError::other(Stage::Output, e))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOutput {
    #[serde(flatten)]
    pub report: RankingReport,
    /// Entries of the candidate file that failed validation.
    pub rejected: Vec<Rejection>,
    /// Candidates below the functional threshold.
    pub functional_rejected: Vec<String>,
}

/// Functional filter, force-map scoring and the ranking report.
pub fn run_rank(
    mesh: &TriangleMesh,
    map: &ForceMap,
    candidates: &CandidateSet,
    params: &RankParams,
    zones: &[ZoneSpec],
) -> StageResult<(Selection, RankOutput)> {
    if map.per_vertex.len() != mesh.vertex_count() {
        return Err(StageError::validation(
            Stage::Rank,
            anyhow::anyhow!("force map has {} vertex values, mesh has {} vertices", map.per_vertex.len(), mesh.vertex_count()),
        ));
    }
    let g_star = functional_filter(&candidates.accepted, params.tau_f);
    let functional_rejected = candidates
        .accepted
        .iter()
        .filter(|c| !g_star.iter().any(|g| g.id == c.id))
        .map(|c| c.id.clone())
        .collect();
    let index = MeshIndex::new(mesh);
    let selection = score_and_select(&g_star, map, &index, params).map_err(|e| {
        let kind = match e {
            RankError::NoSurvivors { .. } | RankError::NoCandidates => FailureKind::NoSafeGrasp,
            _ => FailureKind::Validation,
        };
        StageError::new(Stage::Rank, kind, e)
    })?;
    let report = report_top_m(&selection, &g_star, map, zones, params, params.top_m);
    Ok((selection, RankOutput { report, rejected: candidates.rejected.clone(), functional_rejected }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripOutput {
    pub grasp: String,
    pub k_base: f64,
    pub k_base_calibrated: bool,
    pub params: ImpedanceParams,
    pub scenario: GripScenario,
    pub f_map_max: f64,
    pub verdict: String,
    #[serde(flatten)]
    pub report: GripReport,
}

/// Runs the grip on `grasp`. Without a configured `K_base` it is calibrated
/// against the grasp's weakest contact.
pub fn run_grip(
    mesh: &TriangleMesh,
    map: &ForceMap,
    grasp: &GraspCandidate,
    mode: GripMode,
    lambda: f64,
    profile: &ObjectProfile,
    cfg: &PipelineConfig,
    keep_trace: bool,
) -> StageResult<GripOutput> {
    let contacts = grasp_contacts(grasp, mesh, &map.per_vertex);
    let scenario = cfg.scenario(profile, lambda);
    let f_star_min = contacts.iter().flatten().map(|c| c.f_max).fold(f64::INFINITY, f64::min);
    let (k_base, calibrated) = match profile.k_base {
        Some(k) => (k, false),
        None => match calibrate_k_base(f_star_min, 2.0, &cfg.impedance, &scenario) {
            Ok(k) => (k, true),
            Err(e) if matches!(mode, GripMode::Under | GripMode::Over) => {
                return Err(StageError::validation(Stage::Grip, e));
            }
            Err(e) => {
                log::debug!("K_base calibration skipped: {e}");
                (cfg.impedance.k_base, false)
            }
        },
    };
    let params = ImpedanceParams { k_base, ..cfg.impedance };
    let report = grip::run_grip(&contacts, map.vertex_max(), mode, &params, &scenario, keep_trace).map_err(|e| {
        let kind = match e {
            GripError::InvalidParams(_) | GripError::NoContact(_) | GripError::InfeasibleCalibration { .. } => {
                FailureKind::Validation
            }
            GripError::NumericalDivergence { .. } => FailureKind::Other,
        };
        StageError::new(Stage::Grip, kind, e)
    })?;
    Ok(GripOutput {
        grasp: grasp.id.clone(),
        k_base,
        k_base_calibrated: calibrated,
        params,
        scenario,
        f_map_max: map.vertex_max(),
        verdict: report.verdict().to_string(),
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub versions: Versions,
    pub command: String,
    pub task: TaskCommand,
    pub mesh_source: String,
    pub candidates_source: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub artifacts: Vec<FileDigest>,
    pub selected: String,
    pub grip_success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub gripmap: String,
    pub gripmap_core: String,
    pub forcemap_format: String,
}

impl Versions {
    pub fn current() -> Self {
        Versions {
            gripmap: env!("CARGO_PKG_VERSION").to_string(),
            gripmap_core: gripmap_core::VERSION.to_string(),
            forcemap_format: formats::FORCEMAP_FORMAT.to_string(),
        }
    }
}

pub fn digest(path: &Path) -> anyhow::Result<FileDigest> {
    let bytes = std::fs::read(path)?;
    Ok(FileDigest {
        name: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    })
}

pub const FORCEMAP_JSON: &str = "forcemap.json";
pub const FORCEMAP_PLY: &str = "forcemap.ply";
pub const RANKING_JSON: &str = "ranking.json";
pub const GRIP_JSON: &str = "grip.json";
pub const GRIP_TRACE_CSV: &str = "grip_trace.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

pub struct PipelineOutcome {
    pub task: TaskCommand,
    pub selected: String,
    pub grip: GripOutput,
    pub artifacts: Vec<PathBuf>,
}

impl PipelineOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.grip.report.success {
            0
        } else {
            FailureKind::GripFailure.exit_code()
        }
    }
}

/// parse → force map → rank → grip, writing every artifact and a manifest
/// into `out`.
pub fn run_pipeline(cfg: &PipelineConfig, text: &str, out: &Path, mode: GripMode) -> StageResult<PipelineOutcome> {
    cfg.validate().map_err(|e| StageError::validation(Stage::Config, e))?;
    std::fs::create_dir_all(out).map_err(|e| StageError::other(Stage::Output, e))?;
    let output = |e: anyhow::Error| StageError::other(Stage::Output, e);

    let lexicon = load_lexicon(cfg.lexicon.as_deref())?;
    let task = run_parse(text, &lexicon)?;
    log::info!("task: {:?} {:?} {:?} (lambda {})", task.object_id, task.action, task.mode, task.lambda);
    let profile = cfg.profile(task.object_id);

    let (mesh, mesh_source) = resolve_mesh(cfg.mesh.as_deref(), &profile.fixture, cfg.scale)?;
    let fm = run_forcemap(&mesh, Some(task.object_id), &cfg.material(profile.material), &profile.zones, cfg)?;
    let fm_json = out.join(FORCEMAP_JSON);
    let fm_ply = out.join(FORCEMAP_PLY);
    write_force_map(&fm, &mesh, &fm_json, Some(&fm_ply))?;

    let (candidates, candidates_source) = match &cfg.candidates {
        Some(p) => (
            formats::read_candidates(p, cfg.strict_candidates).map_err(|e| StageError::validation(Stage::Rank, e))?,
            p.display().to_string(),
        ),
        None => (
            CandidateSet { accepted: fixture_candidates(task.object_id), rejected: Vec::new() },
            format!("fixture:{}", task.object_id.as_str()),
        ),
    };
    let params = RankParams { lambda: task.lambda, ..cfg.ranking };
    let zones: Vec<ZoneSpec> = profile.zones.iter().map(|z| z.zone.clone()).collect();
    let (selection, ranking) = run_rank(&mesh, &fm.map, &candidates, &params, &zones)?;
    let rank_json = out.join(RANKING_JSON);
    formats::write_json(&ranking, &rank_json).map_err(output)?;

    let chosen = candidates.accepted.iter().find(|c| c.id == selection.selected().id).expect("selected from input");
    let grip = run_grip(&mesh, &fm.map, chosen, mode, task.lambda, &profile, cfg, cfg.trace_csv)?;
    let grip_json = out.join(GRIP_JSON);
    let mut artifacts = vec![fm_json, fm_ply, rank_json, grip_json.clone()];
    if cfg.trace_csv {
        let p = out.join(GRIP_TRACE_CSV);
        let f = std::fs::File::create(&p).map_err(|e| output(e.into()))?;
        formats::write_trace_csv(&grip.report.trace, f).map_err(output)?;
        artifacts.push(p);
    }
    let mut grip_doc = grip.clone();
    grip_doc.report.trace.clear();
    formats::write_json(&grip_doc, &grip_json).map_err(output)?;

    let (config_json, config_sha256) = cfg.fingerprint();
    let mut inputs = Vec::new();
    for p in [&cfg.mesh, &cfg.candidates, &cfg.lexicon].into_iter().flatten() {
        inputs.push(digest(p).map_err(|e| StageError::other(Stage::Output, e))?);
    }
    let manifest = Manifest {
        tool: "gripmap".into(),
        versions: Versions::current(),
        command: text.to_string(),
        task,
        mesh_source,
        candidates_source,
        config_sha256,
        config: serde_json::from_str(&config_json).expect("config JSON"),
        inputs,
        artifacts: artifacts.iter().map(|p| digest(p)).collect::<anyhow::Result<_>>().map_err(output)?,
        selected: selection.selected().id.clone(),
        grip_success: grip.report.success,
    };
    let manifest_path = out.join(MANIFEST_JSON);
    formats::write_json(&manifest, &manifest_path).map_err(output)?;
    artifacts.push(manifest_path);

    Ok(PipelineOutcome { task, selected: selection.selected().id.clone(), grip, artifacts })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIPPED_LEXICON: &str = include_str!("../data/lexicon.json");

    #[test]
    fn shipped_lexicon_is_the_standard_one() {
        let shipped: Lexicon = serde_json::from_str(SHIPPED_LEXICON).unwrap();
        assert_eq!(shipped, Lexicon::standard());
    }

    #[test]
    fn exit_codes() {
        let kinds = [FailureKind::Other, FailureKind::Validation, FailureKind::NoSafeGrasp, FailureKind::GripFailure];
        assert_eq!(kinds.map(FailureKind::exit_code), [1, 2, 3, 4]);
    }
}
