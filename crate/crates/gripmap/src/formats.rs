//! JSON and CSV artifacts exchanged between stages.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};
use gripmap_core::forcemap::{BonusParams, Calibration, ReinforcedLayer};
use gripmap_core::grasp::FINGERS;
use gripmap_core::grip::TraceRow;
use gripmap_core::thickness::GridGeometry;
use gripmap_core::{ForceMap, GraspCandidate, MaterialModel, ObjectId, PrincipalFrame};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

pub const FORCEMAP_FORMAT: &str = "gripmap.forcemap/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceMapHeader {
    pub object: Option<ObjectId>,
    pub material: MaterialModel,
    pub frame: PrincipalFrame,
    pub layers: usize,
    pub bins: usize,
    pub f_clamp: f64,
    pub h_lo: f64,
    pub h_hi: f64,
    pub r_out: f64,
    pub bonus: BonusParams,
}

/// On-disk force map. `grid` is row-major, layer by layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceMapFile {
    pub format: String,
    pub header: ForceMapHeader,
    pub grid: Vec<f64>,
    pub reinforced_layers: Vec<ReinforcedLayer>,
    pub base_force: Option<f64>,
    pub per_vertex: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

impl ForceMapFile {
    pub fn from_map(map: &ForceMap, calibration: Option<Calibration>) -> Self {
        let g = map.geometry;
        ForceMapFile {
            format: FORCEMAP_FORMAT.to_string(),
            header: ForceMapHeader {
                object: map.object,
                material: map.material,
                frame: map.frame,
                layers: g.layers,
                bins: g.bins,
                f_clamp: map.material.f_clamp,
                h_lo: g.h_lo,
                h_hi: g.h_hi,
                r_out: g.r_out,
                bonus: map.bonus,
            },
            grid: map.grid.clone(),
            reinforced_layers: map.reinforced_layers.clone(),
            base_force: map.base_force,
            per_vertex: map.per_vertex.clone(),
            calibration,
        }
    }

    pub fn into_map(self) -> anyhow::Result<ForceMap> {
        let h = self.header;
        if self.format != FORCEMAP_FORMAT {
            bail!("unsupported force map format `{}`", self.format);
        }
        if self.grid.len() != h.layers * h.bins {
            bail!("grid has {} values, header says {}x{}", self.grid.len(), h.layers, h.bins);
        }
        if self.grid.iter().chain(&self.per_vertex).any(|v| !v.is_finite()) {
            bail!("force map contains non-finite values");
        }
        Ok(ForceMap {
            object: h.object,
            material: h.material,
            bonus: h.bonus,
            frame: h.frame,
            geometry: GridGeometry { layers: h.layers, bins: h.bins, h_lo: h.h_lo, h_hi: h.h_hi, r_out: h.r_out },
            grid: self.grid,
            reinforced_layers: self.reinforced_layers,
            base_force: self.base_force,
            per_vertex: self.per_vertex,
        })
    }
}

pub fn read_force_map(path: &Path) -> anyhow::Result<ForceMap> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ForceMapFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    file.into_map().with_context(|| format!("validating {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// Position in the file's candidate array.
    pub index: usize,
    /// 1-based line where the entry starts.
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub accepted: Vec<GraspCandidate>,
    pub rejected: Vec<Rejection>,
}

#[derive(Deserialize)]
struct Wrapped<'a> {
    #[serde(borrow)]
    candidates: Vec<&'a RawValue>,
}

#[derive(Deserialize)]
struct IdOnly {
    id: Option<String>,
}

/// Parses a candidate file: a JSON array or `{"candidates": [...]}`.
/// Invalid entries are collected as rejections, or fail the whole file
/// when `strict`.
pub fn parse_candidates(text: &str, strict: bool) -> anyhow::Result<CandidateSet> {
    let raws: Vec<&RawValue> = match serde_json::from_str(text) {
        Ok(list) => list,
        Err(_) => serde_json::from_str::<Wrapped>(text)
            .context("candidate file is neither a JSON array nor an object with a `candidates` array")?
            .candidates,
    };
    let base = text.as_ptr() as usize;
    let mut set = CandidateSet::default();
    let mut seen = BTreeSet::new();
    for (index, raw) in raws.into_iter().enumerate() {
        let offset = raw.get().as_ptr() as usize - base;
        let line = text[..offset].matches('\n').count() + 1;
        let id = serde_json::from_str::<IdOnly>(raw.get()).ok().and_then(|i| i.id);
        let verdict = serde_json::from_str::<GraspCandidate>(raw.get())
            .map_err(|e| e.to_string())
            .and_then(|c| c.validate().map(|_| c).map_err(|e| e.to_string()))
            .and_then(|c| if seen.insert(c.id.clone()) { Ok(c) } else { Err(format!("duplicate id `{}`", c.id)) });
        match verdict {
            Ok(c) => set.accepted.push(c),
            Err(reason) => {
                if strict {
                    bail!("candidate {index} (line {line}): {reason}");
                }
                log::warn!("rejecting candidate {index} (line {line}): {reason}");
                set.rejected.push(Rejection { index, line, id, reason });
            }
        }
    }
    Ok(set)
}

pub fn read_candidates(path: &Path, strict: bool) -> anyhow::Result<CandidateSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_candidates(&text, strict).with_context(|| format!("in {}", path.display()))
}

/// One row per simulation step.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for prefix in ["f", "k", "critical"] {
        header.extend((0..FINGERS).map(|k| format!("{prefix}{k}")));
    }
    header.push("retention_margin".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.t.to_string()];
        rec.extend(r.force.iter().map(f64::to_string));
        rec.extend(r.stiffness.iter().map(f64::to_string));
        rec.extend(r.critical.iter().map(usize::to_string));
        rec.push(r.retention_margin.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
