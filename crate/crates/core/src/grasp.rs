//! Grasp candidates, functional filtering, force-map scoring and selection.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::{LocateError, MeshIndex};
use crate::forcemap::{ForceMap, ZoneSpec};
use crate::geometry::Vec3;
use crate::stats::population_variance;

/// Number of fingertip contacts per grasp.
pub const FINGERS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub id: String,
    /// Hand base position in the object frame (m).
    pub t: [f64; 3],
    /// Two stacked rotation-matrix columns.
    pub r6d: [f64; 6],
    /// Joint angles (rad); carried through untouched.
    pub theta: [f64; 24],
    /// Fingertip contacts in the object frame (m).
    pub contacts: [[f64; 3]; FINGERS],
    pub utility: f64,
    pub functional_score: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CandidateError {
    #[error("empty id")]
    EmptyId,
    #[error("non-finite value in `{0}`")]
    NonFinite(&'static str),
    #[error("functional_score {0} outside [0, 1]")]
    FunctionalScore(f64),
    #[error("r6d columns are parallel or zero")]
    DegenerateRotation,
}

impl GraspCandidate {
    pub fn validate(&self) -> Result<(), CandidateError> {
        if self.id.is_empty() {
            return Err(CandidateError::EmptyId);
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.t) {
            return Err(CandidateError::NonFinite("t"));
        }
        if !finite(&self.r6d) {
            return Err(CandidateError::NonFinite("r6d"));
        }
        if !finite(&self.theta) {
            return Err(CandidateError::NonFinite("theta"));
        }
        if !self.contacts.iter().all(|c| finite(c)) {
            return Err(CandidateError::NonFinite("contacts"));
        }
        if !self.utility.is_finite() {
            return Err(CandidateError::NonFinite("utility"));
        }
        if !(0.0..=1.0).contains(&self.functional_score) {
            return Err(CandidateError::FunctionalScore(self.functional_score));
        }
        if rotation_from_6d(&self.r6d).is_none() {
            return Err(CandidateError::DegenerateRotation);
        }
        Ok(())
    }

    pub fn contact(&self, k: usize) -> Vec3 {
        Vec3::from(self.contacts[k])
    }
}

/// Gram–Schmidt on the two 6D columns; returns the three basis columns.
pub fn rotation_from_6d(r: &[f64; 6]) -> Option<[Vec3; 3]> {
    let a1 = Vec3::new(r[0], r[1], r[2]);
    let a2 = Vec3::new(r[3], r[4], r[5]);
    let n1 = a1.norm();
    if !(n1 > 1e-12) {
        return None;
    }
    let b1 = a1 / n1;
    let p = a2 - b1 * b1.dot(&a2);
    let n2 = p.norm();
    if !(n2 > 1e-9 * a2.norm().max(1e-300)) || !(n2 > 1e-12) {
        return None;
    }
    let b2 = p / n2;
    Some([b1, b2, b1.cross(&b2)])
}

/// Keeps candidates with `functional_score ≥ tau_f`.
pub fn functional_filter(candidates: &[GraspCandidate], tau_f: f64) -> Vec<GraspCandidate> {
    candidates.iter().filter(|c| c.functional_score >= tau_f).cloned().collect()
}

/// Barycentric blend of per-vertex forces at the surface point closest to `p`.
pub fn contact_admissible_force(index: &MeshIndex<'_>, per_vertex: &[f64], p: &Vec3) -> Result<f64, LocateError> {
    index.interpolate(per_vertex, p)
}

/// `min_k F − α · Var_k F` with population variance.
pub fn s_f_score(forces: &[f64], alpha: f64) -> f64 {
    let min = forces.iter().copied().fold(f64::INFINITY, f64::min);
    min - alpha * population_variance(forces).unwrap_or(0.0)
}

/// True when no contact falls below `λ · F_max`.
pub fn passes_mode_filter(forces: &[f64], lambda: f64, f_max: f64) -> bool {
    forces.iter().all(|&f| f >= lambda * f_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterReason {
    Functional,
    ModeViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedGrasp {
    pub id: String,
    pub per_contact_f: [f64; FINGERS],
    pub s_f: f64,
    pub min_f: f64,
    /// Finger holding the weakest contact.
    pub critical_contact: usize,
    pub utility: f64,
    pub filtered_out: Option<FilterReason>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankParams {
    pub alpha: f64,
    pub lambda: f64,
    pub tau_f: f64,
    /// The mode filter only applies for λ below this value.
    pub delicate_below: f64,
    pub top_m: usize,
}

impl Default for RankParams {
    fn default() -> Self {
        RankParams { alpha: 0.1, lambda: 0.7, tau_f: 0.5, delicate_below: 0.5, top_m: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("no candidates to rank")]
    NoCandidates,
    #[error("mode filter at lambda {lambda} (threshold {threshold:.4} N) discarded every candidate")]
    NoSurvivors { lambda: f64, threshold: f64 },
    #[error("candidate `{id}` contact {contact}: {source}")]
    Locate { id: String, contact: usize, source: LocateError },
    #[error("force map has no per-vertex values")]
    MissingVertexForces,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Survivors, best first.
    pub ranked: Vec<RankedGrasp>,
    /// Candidates removed by the mode filter.
    pub discarded: Vec<RankedGrasp>,
    /// Argmax of classical utility over all scored candidates.
    pub baseline: RankedGrasp,
    pub f_max: f64,
    /// `λ · F_max` when the mode filter was active.
    pub mode_threshold: Option<f64>,
}

impl Selection {
    pub fn selected(&self) -> &RankedGrasp {
        &self.ranked[0]
    }
}

/// Total order used for selection: higher S_F, then higher minimum force,
/// then higher utility, then lexicographic id.
pub fn compare_ranked(a: &RankedGrasp, b: &RankedGrasp) -> Ordering {
    b.s_f
        .total_cmp(&a.s_f)
        .then(b.min_f.total_cmp(&a.min_f))
        .then(b.utility.total_cmp(&a.utility))
        .then(a.id.cmp(&b.id))
}

fn compare_utility(a: &RankedGrasp, b: &RankedGrasp) -> Ordering {
    b.utility.total_cmp(&a.utility).then(a.id.cmp(&b.id))
}

/// Scores one candidate against per-vertex forces.
pub fn score_candidate(
    candidate: &GraspCandidate,
    index: &MeshIndex<'_>,
    per_vertex: &[f64],
    alpha: f64,
) -> Result<RankedGrasp, RankError> {
    let mut f = [0.0; FINGERS];
    for (k, slot) in f.iter_mut().enumerate() {
        *slot = contact_admissible_force(index, per_vertex, &candidate.contact(k)).map_err(|source| {
            RankError::Locate { id: candidate.id.clone(), contact: k, source }
        })?;
    }
    let (critical_contact, min_f) = f
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    Ok(RankedGrasp {
        id: candidate.id.clone(),
        per_contact_f: f,
        s_f: s_f_score(&f, alpha),
        min_f,
        critical_contact,
        utility: candidate.utility,
        filtered_out: None,
    })
}

/// Mode filter, S_F scoring and argmax selection over the functionally
/// accepted set `g_star`.
pub fn score_and_select(
    g_star: &[GraspCandidate],
    map: &ForceMap,
    index: &MeshIndex<'_>,
    params: &RankParams,
) -> Result<Selection, RankError> {
    if g_star.is_empty() {
        return Err(RankError::NoCandidates);
    }
    if map.per_vertex.len() != index.mesh().vertex_count() {
        return Err(RankError::MissingVertexForces);
    }
    let f_max = map.vertex_max();
    let scored = g_star
        .iter()
        .map(|c| score_candidate(c, index, &map.per_vertex, params.alpha))
        .collect::<Result<Vec<_>, _>>()?;
    let baseline = scored.iter().min_by(|a, b| compare_utility(a, b)).cloned().expect("non-empty");

    let active = params.lambda < params.delicate_below;
    let threshold = active.then_some(params.lambda * f_max);
    let (mut ranked, mut discarded): (Vec<_>, Vec<_>) = scored
        .into_iter()
        .partition(|r| !active || passes_mode_filter(&r.per_contact_f, params.lambda, f_max));
    for d in &mut discarded {
        d.filtered_out = Some(FilterReason::ModeViolation);
    }
    if ranked.is_empty() {
        return Err(RankError::NoSurvivors { lambda: params.lambda, threshold: params.lambda * f_max });
    }
    ranked.sort_by(compare_ranked);
    discarded.sort_by(compare_ranked);
    Ok(Selection { ranked, discarded, baseline, f_max, mode_threshold: threshold })
}

/// Where a grasp's weakest contact sits on the object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneLabel {
    /// Nearest grid layer, `None` below the lateral grid.
    pub layer: Option<usize>,
    /// Named zone if one matches, else `base`, `lower`, `middle` or `upper`.
    pub name: String,
}

pub fn zone_label(map: &ForceMap, p: &Vec3, zones: &[ZoneSpec]) -> ZoneLabel {
    let c = map.frame.to_cylindrical(p);
    let g = &map.geometry;
    let above = c.h - map.frame.height_range.0;
    let layer = if c.h < g.h_lo {
        None
    } else {
        let (lc, _) = g.continuous_index(c.h, c.phi);
        Some(lc.round().clamp(0.0, (g.layers - 1) as f64) as usize)
    };
    let name = zones.iter().find(|z| z.contains(above)).map(|z| z.label.clone()).unwrap_or_else(|| {
        match layer {
            None => String::from("base"),
            Some(l) if 3 * l < g.layers => String::from("lower"),
            Some(l) if 3 * l < 2 * g.layers => String::from("middle"),
            Some(_) => String::from("upper"),
        }
    });
    ZoneLabel { layer, name }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub rank: usize,
    pub id: String,
    pub zone: ZoneLabel,
    pub f_star_min: f64,
    pub per_contact_f: [f64; FINGERS],
    pub s_f: f64,
    pub utility: f64,
    pub is_ours: bool,
    pub is_baseline: bool,
}

/// Pose at one end of the approach motion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandState {
    pub t: [f64; 3],
    pub r6d: [f64; 6],
    pub theta: [f64; 24],
}

/// Start and end of the approach: the start retracts the hand along the
/// palm approach axis with the fingers open.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreGrasp {
    pub start: HandState,
    pub end: HandState,
}

pub fn pre_grasp(candidate: &GraspCandidate, retract: f64) -> PreGrasp {
    let approach = rotation_from_6d(&candidate.r6d).map(|b| b[2]).unwrap_or_else(Vec3::z);
    let t = Vec3::from(candidate.t) - approach * retract;
    PreGrasp {
        start: HandState { t: [t.x, t.y, t.z], r6d: candidate.r6d, theta: [0.0; 24] },
        end: HandState { t: candidate.t, r6d: candidate.r6d, theta: candidate.theta },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub lambda: f64,
    pub alpha: f64,
    pub f_max: f64,
    pub mode_threshold: Option<f64>,
    pub ours: String,
    pub baseline: String,
    pub same_pick: bool,
    pub rows: Vec<ReportRow>,
    /// The baseline pick, which need not be among the top rows.
    pub baseline_row: ReportRow,
    pub discarded: Vec<String>,
    pub pre_grasp: PreGrasp,
}

/// Top-`m` survivors plus the utility baseline.
pub fn report_top_m(
    selection: &Selection,
    candidates: &[GraspCandidate],
    map: &ForceMap,
    zones: &[ZoneSpec],
    params: &RankParams,
    m: usize,
) -> RankingReport {
    let m = m.max(1);
    let by_id = |id: &str| candidates.iter().find(|c| c.id == id).expect("ranked candidate comes from the input");
    let ours = selection.selected().id.clone();
    let baseline = selection.baseline.id.clone();
    let row = |rank: usize, r: &RankedGrasp| {
        let c = by_id(&r.id);
        ReportRow {
            rank,
            id: r.id.clone(),
            zone: zone_label(map, &c.contact(r.critical_contact), zones),
            f_star_min: r.min_f,
            per_contact_f: r.per_contact_f,
            s_f: r.s_f,
            utility: r.utility,
            is_ours: r.id == ours,
            is_baseline: r.id == baseline,
        }
    };
    let rows = selection.ranked.iter().take(m).enumerate().map(|(i, r)| row(i + 1, r)).collect();
    let baseline_rank = selection.ranked.iter().position(|r| r.id == baseline).map_or(0, |i| i + 1);
    RankingReport {
        lambda: params.lambda,
        alpha: params.alpha,
        f_max: selection.f_max,
        mode_threshold: selection.mode_threshold,
        same_pick: ours == baseline,
        baseline_row: row(baseline_rank, &selection.baseline),
        discarded: selection.discarded.iter().map(|d| d.id.clone()).collect(),
        pre_grasp: pre_grasp(by_id(&ours), 0.1),
        ours,
        baseline,
        rows,
    }
}

impl core::fmt::Display for ZoneLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.layer {
            Some(l) => write!(f, "{} (layer {l})", self.name),
            None => write!(f, "{}", self.name),
        }
    }
}

/// Short description used in logs.
pub fn summarize(r: &RankedGrasp) -> String {
    format!("{} S_F={:.3} minF={:.3} U={:.3}", r.id, r.s_f, r.min_f, r.utility)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::ring_candidate;

    #[test]
    fn s_f_examples() {
        assert_eq!(s_f_score(&[5.0; 5], 3.7), 5.0);
        let s = s_f_score(&[2.0, 2.0, 2.0, 4.0, 4.0], 0.5);
        assert!((s - 1.52).abs() < 1e-12);
    }

    #[test]
    fn functional_threshold_examples() {
        let mk = |s: f64| ring_candidate("x", 0.0, 0.03, 0.0, 0.5, s);
        let c = [mk(0.9), mk(0.5), mk(0.2)];
        assert_eq!(functional_filter(&c, 0.6).len(), 1);
        assert_eq!(functional_filter(&c, 0.0).len(), 3);
        let c = [mk(1.0), mk(0.999)];
        assert_eq!(functional_filter(&c, 1.0).len(), 1);
    }

    #[test]
    fn mode_filter_is_monotone_in_lambda() {
        let f = [3.0, 6.0, 9.0, 9.0, 9.0];
        let mut last = true;
        for i in 0..=100 {
            let pass = passes_mode_filter(&f, i as f64 / 100.0, 10.0);
            assert!(last || !pass);
            last = pass;
        }
    }

    #[test]
    fn rotation_6d_gram_schmidt() {
        let b = rotation_from_6d(&[2.0, 0.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((b[0] - Vec3::x()).norm() < 1e-15);
        assert!((b[1] - Vec3::y()).norm() < 1e-15);
        assert!((b[2] - Vec3::z()).norm() < 1e-15);
        assert!(rotation_from_6d(&[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn candidate_validation() {
        let mut c = ring_candidate("a", 0.0, 0.03, 0.0, 0.5, 0.5);
        assert!(c.validate().is_ok());
        c.functional_score = 1.5;
        assert_eq!(c.validate(), Err(CandidateError::FunctionalScore(1.5)));
    }

    #[test]
    fn pre_grasp_retracts_along_approach() {
        let mut c = ring_candidate("a", 0.0, 0.03, 0.0, 0.5, 0.5);
        c.r6d = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let p = pre_grasp(&c, 0.1);
        assert!((p.start.t[2] - (c.t[2] - 0.1)).abs() < 1e-15);
        assert_eq!(p.start.theta, [0.0; 24]);
        assert_eq!(p.end.theta, c.theta);
    }
}
