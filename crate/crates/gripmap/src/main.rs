use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gripmap::config::{fixture_candidates, object_for_fixture, PipelineConfig};
use gripmap::formats::{self, CandidateSet};
use gripmap::io;
use gripmap::pipeline::{self, FailureKind, Stage, StageError, StageResult};
use gripmap_core::forcemap::ZoneSpec;
use gripmap_core::grasp::RankParams;
use gripmap_core::{fixtures, GripMode, MaterialId, ObjectId, TriangleMesh};

#[derive(Parser)]
#[command(name = "gripmap", version, about = "Force-aware grasp selection for thin-walled objects")]
struct Cli {
    /// JSON configuration; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// -v info, -vv debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a natural-language command.
    Parse {
        #[arg(long)]
        text: String,
    },
    /// Estimate thickness and write the admissible force map.
    Forcemap {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        material: Option<String>,
        /// Keep the material table's c_base instead of fitting zone targets.
        #[arg(long)]
        no_calibrate: bool,
        #[arg(long)]
        out: PathBuf,
        /// Colored binary PLY of the per-vertex map.
        #[arg(long)]
        ply: Option<PathBuf>,
    },
    /// Score candidates against a force map and report the top grasps.
    Rank {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        forcemap: PathBuf,
        /// Candidate file; the fixture's built-in set when absent.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        tau_f: Option<f64>,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the grip on one candidate.
    Grip {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        forcemap: PathBuf,
        #[arg(long)]
        candidates: Option<PathBuf>,
        /// Candidate id; the first accepted candidate when absent.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Ours)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0.7)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// parse, forcemap, rank and grip in one run.
    Pipeline {
        #[arg(long)]
        text: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Ours)]
        mode: ModeArg,
        /// Also write the per-step grip trace as CSV.
        #[arg(long)]
        trace: bool,
    },
    /// Write a built-in mesh and, for the objects, its candidate set.
    Fixture {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(fixtures::NAMES))]
        name: String,
        /// `.obj` or `.ply`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, conflicts_with = "fixture")]
    mesh: Option<PathBuf>,
    #[arg(long)]
    fixture: Option<String>,
    /// Object profile; inferred from the fixture or force map when absent.
    #[arg(long)]
    object: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Under,
    Over,
    Ours,
    Uniform,
}

impl From<ModeArg> for GripMode {
    fn from(m: ModeArg) -> GripMode {
        match m {
            ModeArg::Under => GripMode::Under,
            ModeArg::Over => GripMode::Over,
            ModeArg::Ours => GripMode::Ours,
            ModeArg::Uniform => GripMode::Uniform,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> StageResult<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).map_err(|e| StageError::validation(Stage::Config, e))?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn parse_object(name: &str) -> StageResult<ObjectId> {
    ObjectId::from_name(name).ok_or_else(|| StageError::validation(Stage::Config, anyhow!("unknown object `{name}`")))
}

fn parse_material(name: &str) -> StageResult<MaterialId> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| StageError::validation(Stage::Config, anyhow!("unknown material `{name}`")))
}

/// Mesh plus the object it stands for, if known.
fn mesh_from(args: &MeshArgs, cfg: &PipelineConfig, fallback: Option<ObjectId>) -> StageResult<(TriangleMesh, Option<ObjectId>)> {
    let named = args.object.as_deref().map(parse_object).transpose()?;
    let from_fixture = args.fixture.as_deref().and_then(object_for_fixture);
    let object = named.or(from_fixture).or(fallback);
    let fixture = match (&args.mesh, &args.fixture, object) {
        (Some(_), _, _) => String::new(),
        (None, Some(f), _) => f.clone(),
        (None, None, Some(o)) => cfg.profile(o).fixture,
        (None, None, None) => {
            return Err(StageError::validation(Stage::Mesh, anyhow!("give --mesh, --fixture or --object")));
        }
    };
    let (mesh, _) = pipeline::resolve_mesh(args.mesh.as_deref(), &fixture, cfg.scale)?;
    Ok((mesh, object))
}

fn candidates_from(path: Option<&Path>, object: Option<ObjectId>, strict: bool) -> StageResult<CandidateSet> {
    match (path, object) {
        (Some(p), _) => formats::read_candidates(p, strict).map_err(|e| StageError::validation(Stage::Rank, e)),
        (None, Some(o)) => Ok(CandidateSet { accepted: fixture_candidates(o), rejected: Vec::new() }),
        (None, None) => Err(StageError::validation(Stage::Rank, anyhow!("give --candidates or --object"))),
    }
}

fn read_map(path: &Path) -> StageResult<gripmap_core::ForceMap> {
    formats::read_force_map(path).map_err(|e| StageError::validation(Stage::ForceMap, e))
}

fn write<T: serde::Serialize>(value: &T, path: &Path) -> StageResult<()> {
    formats::write_json(value, path).map_err(|e| StageError::other(Stage::Output, e))
}

fn run(cli: Cli) -> StageResult<i32> {
    let cfg = load_config(&cli)?;
    match cli.command {
        Command::Parse { text } => {
            let lexicon = pipeline::load_lexicon(cfg.lexicon.as_deref())?;
            let task = pipeline::run_parse(&text, &lexicon)?;
            println!("{}", serde_json::to_string_pretty(&task).expect("task serializes"));
        }
        Command::Forcemap { mesh, material, no_calibrate, out, ply } => {
            let (m, object) = mesh_from(&mesh, &cfg, None)?;
            let profile = object.map(|o| cfg.profile(o));
            let material = match (material.as_deref(), &profile) {
                (Some(name), _) => parse_material(name)?,
                (None, Some(p)) => p.material,
                (None, None) => {
                    return Err(StageError::validation(Stage::ForceMap, anyhow!("give --material or --object")));
                }
            };
            let zones = match (&profile, no_calibrate) {
                (Some(p), false) => p.zones.clone(),
                _ => Vec::new(),
            };
            let fm = pipeline::run_forcemap(&m, object, &cfg.material(material), &zones, &cfg)?;
            pipeline::write_force_map(&fm, &m, &out, ply.as_deref())?;
            println!(
                "force map: {}x{} grid, vertex range [{:.3}, {:.3}] N, c_base {:.1}",
                fm.map.geometry.layers,
                fm.map.geometry.bins,
                fm.map.per_vertex.iter().copied().fold(f64::INFINITY, f64::min),
                fm.map.vertex_max(),
                fm.map.material.c_base
            );
        }
        Command::Rank { mesh, forcemap, candidates, lambda, alpha, tau_f, top, out } => {
            let map = read_map(&forcemap)?;
            let (m, object) = mesh_from(&mesh, &cfg, map.object)?;
            let set = candidates_from(candidates.as_deref(), object, cfg.strict_candidates)?;
            let base = cfg.ranking;
            let params = RankParams {
                lambda: lambda.unwrap_or(base.lambda),
                alpha: alpha.unwrap_or(base.alpha),
                tau_f: tau_f.unwrap_or(base.tau_f),
                top_m: top.unwrap_or(base.top_m),
                ..base
            };
            let zones: Vec<ZoneSpec> =
                object.map(|o| cfg.profile(o).zones.into_iter().map(|z| z.zone).collect()).unwrap_or_default();
            let (selection, report) = pipeline::run_rank(&m, &map, &set, &params, &zones)?;
            write(&report, &out)?;
            println!("selected {} (baseline {})", selection.selected().id, selection.baseline.id);
        }
        Command::Grip { mesh, forcemap, candidates, id, mode, lambda, out, trace } => {
            let map = read_map(&forcemap)?;
            let (m, object) = mesh_from(&mesh, &cfg, map.object)?;
            let object = object
                .ok_or_else(|| StageError::validation(Stage::Grip, anyhow!("object unknown; give --object")))?;
            let set = candidates_from(candidates.as_deref(), Some(object), cfg.strict_candidates)?;
            let grasp = match &id {
                Some(id) => set.accepted.iter().find(|c| &c.id == id),
                None => set.accepted.first(),
            }
            .ok_or_else(|| StageError::validation(Stage::Grip, anyhow!("no candidate {}", id.as_deref().unwrap_or(""))))?;
            let keep = trace.is_some();
            let g = pipeline::run_grip(&m, &map, grasp, mode.into(), lambda, &cfg.profile(object), &cfg, keep)?;
            if let Some(p) = &trace {
                let f = std::fs::File::create(p).map_err(|e| StageError::other(Stage::Output, e))?;
                formats::write_trace_csv(&g.report.trace, f).map_err(|e| StageError::other(Stage::Output, e))?;
            }
            let mut doc = g.clone();
            doc.report.trace.clear();
            write(&doc, &out)?;
            println!(
                "{} grip on {}: {} (critical finger {}: steady {:.3} N, F* {:.3} N; violations {})",
                doc.report.mode.as_str(),
                doc.grasp,
                doc.verdict,
                doc.report.critical_finger,
                doc.report.steady_force[doc.report.critical_finger],
                doc.report.f_star[doc.report.critical_finger],
                doc.report.violations
            );
            if !doc.report.success {
                return Ok(FailureKind::GripFailure.exit_code());
            }
        }
        Command::Pipeline { text, out, mesh, candidates, mode, trace } => {
            let mut cfg = cfg;
            cfg.mesh = mesh.or(cfg.mesh);
            cfg.candidates = candidates.or(cfg.candidates);
            cfg.trace_csv |= trace;
            let outcome = pipeline::run_pipeline(&cfg, &text, &out, mode.into())?;
            println!(
                "{} / {:?} (lambda {}): selected {}, grip {}",
                outcome.task.object_id.as_str(),
                outcome.task.mode,
                outcome.task.lambda,
                outcome.selected,
                outcome.grip.verdict
            );
            return Ok(outcome.exit_code());
        }
        Command::Fixture { name, out, candidates } => {
            let m = fixtures::by_name(&name).expect("validated by clap");
            io::save_mesh(&m, &out).map_err(|e| StageError::other(Stage::Output, e))?;
            if let Some(p) = candidates {
                let object = object_for_fixture(&name).ok_or_else(|| {
                    StageError::validation(Stage::Config, anyhow!("fixture `{name}` has no candidate set"))
                })?;
                write(&fixture_candidates(object), &p)?;
            }
            println!("{name}: {} vertices, {} triangles", m.vertex_count(), m.triangle_count());
        }
    }
    Ok(0)
}
