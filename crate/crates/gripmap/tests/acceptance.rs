//! One line per acceptance criterion. Runs without the libtest harness so
//! the lines land on stdout in order; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gripmap::config::{fixture_candidates, ObjectProfile, PipelineConfig};
use gripmap::formats::CandidateSet;
use gripmap::pipeline::{self, GripOutput};
use gripmap_core::bvh::MeshIndex;
use gripmap_core::forcemap::{compute_force_map, zone_mean, ZoneSpec};
use gripmap_core::frame::{compute_frame, FrameOptions};
use gripmap_core::grasp::{passes_mode_filter, s_f_score, RankParams};
use gripmap_core::grip::FingerDynamics;
use gripmap_core::thickness::{estimate_thickness, ThicknessConfig};
use gripmap_core::{fixtures, ForceMap, GraspCandidate, GripMode, ImpedanceParams, MaterialModel, ObjectId, TriangleMesh, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

struct Prepared {
    cfg: PipelineConfig,
    profile: ObjectProfile,
    mesh: TriangleMesh,
    map: ForceMap,
}

fn prepare(object: ObjectId) -> Prepared {
    let cfg = PipelineConfig::default();
    let profile = cfg.profile(object);
    let mesh = fixtures::by_name(&profile.fixture).unwrap();
    let fm = pipeline::run_forcemap(&mesh, Some(object), &cfg.material(profile.material), &profile.zones, &cfg).unwrap();
    Prepared { cfg, profile, mesh, map: fm.map }
}

impl Prepared {
    fn candidates(&self, object: ObjectId) -> CandidateSet {
        CandidateSet { accepted: fixture_candidates(object), rejected: Vec::new() }
    }

    fn zones(&self) -> Vec<ZoneSpec> {
        self.profile.zones.iter().map(|z| z.zone.clone()).collect()
    }

    fn grip(&self, grasp: &GraspCandidate, mode: GripMode, lambda: f64) -> GripOutput {
        pipeline::run_grip(&self.mesh, &self.map, grasp, mode, lambda, &self.profile, &self.cfg, false).unwrap()
    }
}

fn peak(g: &GripOutput) -> f64 {
    g.report.peak_force.iter().copied().fold(0.0, f64::max)
}

fn secs(d: Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}

fn thickness_oracle() -> Outcome {
    let mesh = fixtures::reference_annulus();
    let start = Instant::now();
    let index = MeshIndex::new(&mesh);
    let frame = compute_frame(&mesh, &FrameOptions::default()).unwrap();
    let cfg = ThicknessConfig::default();
    let grid = estimate_thickness(&index, &frame, &cfg).unwrap();
    let elapsed = start.elapsed();
    let valid: Vec<f64> = grid.tau.iter().zip(&grid.mask).filter(|(_, &m)| m).map(|(&t, _)| t).collect();
    let worst = valid.iter().map(|t| (t - 0.002).abs()).fold(0.0, f64::max);
    let ok = (cfg.layers, cfg.bins, cfg.probes) == (32, 64, 3)
        && !valid.is_empty()
        && worst <= 2e-4
        && elapsed < Duration::from_secs(5);
    (
        ok,
        format!(
            "{} tris, {}/{} valid cells, max |tau - 2 mm| = {:.2e} m, {}",
            mesh.triangle_count(),
            valid.len(),
            grid.tau.len(),
            worst,
            secs(elapsed)
        ),
    )
}

/// Plain Möller–Trumbore over every triangle; nearest hit, lowest index on ties.
fn brute_raycast(mesh: &TriangleMesh, o: &Vec3, d: &Vec3) -> Option<(usize, f64)> {
    let v = mesh.vertices();
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in mesh.triangles().iter().enumerate() {
        let (a, b, c) = (v[t[0] as usize], v[t[1] as usize], v[t[2] as usize]);
        let e1 = b - a;
        let e2 = c - a;
        let p = d.cross(&e2);
        let det = e1.dot(&p);
        if det.abs() <= 1e-14 * e1.norm() * e2.norm() {
            continue;
        }
        let s = o - a;
        let u = s.dot(&p) / det;
        let q = s.cross(&e1);
        let w = d.dot(&q) / det;
        if !(0.0..=1.0).contains(&u) || w < 0.0 || u + w > 1.0 {
            continue;
        }
        let dist = e2.dot(&q) / det;
        if dist > 1e-9 && best.is_none_or(|(_, bd)| dist < bd) {
            best = Some((i, dist));
        }
    }
    best
}

fn raycast_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut notes = Vec::new();
    let mut ok = true;
    for name in fixtures::NAMES {
        let mesh = fixtures::by_name(name).unwrap();
        let index = MeshIndex::new(&mesh);
        let (lo, hi) = mesh.vertices().iter().fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), p| (lo.inf(p), hi.sup(p)),
        );
        let span = hi - lo;
        let mut mismatches = 0;
        let mut hits = 0;
        for k in 0..1000 {
            let o = lo - span * 0.5 + span.component_mul(&Vec3::new(rng.random(), rng.random(), rng.random())) * 2.0;
            // Half the rays aim at a vertex-weighted point on a random triangle.
            let d = if k % 2 == 0 {
                let t = mesh.triangles()[rng.random_range(0..mesh.triangle_count())];
                let (a, b): (f64, f64) = (rng.random(), rng.random());
                let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
                let v = mesh.vertices();
                let target = v[t[0] as usize] * (1.0 - a - b) + v[t[1] as usize] * a + v[t[2] as usize] * b;
                (target - o).normalize()
            } else {
                Vec3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5).normalize()
            };
            let fast = index.raycast(&o, &d, f64::INFINITY).map(|h| (h.triangle, h.distance));
            let slow = brute_raycast(&mesh, &o, &d);
            hits += fast.is_some() as usize;
            let same = match (fast, slow) {
                (None, None) => true,
                (Some((ta, da)), Some((tb, db))) => ta == tb && (da - db).abs() <= 1e-9,
                _ => false,
            };
            mismatches += !same as usize;
        }
        ok &= mismatches == 0;
        notes.push(format!("{name} {hits} hits/{mismatches} diff"));
    }
    (ok, notes.join(", "))
}

fn edge_refinement() -> Outcome {
    let ratio = |spec: fixtures::CupSpec| {
        let mesh = spec.mesh();
        let index = MeshIndex::new(&mesh);
        let frame = compute_frame(&mesh, &FrameOptions::default()).unwrap();
        let grid = estimate_thickness(&index, &frame, &ThicknessConfig::default()).unwrap();
        grid.layer_mean(grid.layers() - 1) / grid.layer_mean(grid.layers() / 2)
    };
    let rolled = ratio(fixtures::rolled_rim_cup_spec());
    let plain = ratio(fixtures::plain_rim_cup_spec());
    (
        rolled >= 2.5 && (plain - 1.0).abs() <= 0.2,
        format!("rolled top/mid {rolled:.2} (>= 2.5), plain top/mid {plain:.2} (1 ± 0.2)"),
    )
}

fn calibration() -> Outcome {
    let cup = prepare(ObjectId::PaperCup);
    let mut ok = true;
    let mut notes = Vec::new();
    for z in &cup.profile.zones {
        let mean = zone_mean(&cup.map, &z.zone).unwrap();
        let rel = (mean - z.target) / z.target;
        ok &= rel.abs() <= 0.15;
        notes.push(format!("{} {:.2} N vs {} ({:+.1}%)", z.zone.label, mean, z.target, 100.0 * rel));
    }
    let goblet = prepare(ObjectId::GlassGoblet);
    let zone = |label: &str| {
        let z = goblet.profile.zones.iter().find(|z| z.zone.label == label).unwrap();
        zone_mean(&goblet.map, &z.zone).unwrap()
    };
    let ratio = zone("stem") / zone("bowl");
    ok &= ratio >= 5.0;
    notes.push(format!("goblet stem/bowl {ratio:.2} (>= 5)"));
    (ok, notes.join(", "))
}

fn reranking_pattern() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (object, weak, strong) in [
        (ObjectId::PaperCup, "wall", "rim"),
        (ObjectId::PlasticCup, "wall", "rim"),
        (ObjectId::GlassGoblet, "bowl", "stem"),
    ] {
        let start = Instant::now();
        let p = prepare(object);
        let set = p.candidates(object);
        let u = |id: &str| set.accepted.iter().find(|c| c.id == id).unwrap().utility;
        let params = RankParams { lambda: 0.7, ..p.cfg.ranking };
        let (sel, out) = pipeline::run_rank(&p.mesh, &p.map, &set, &params, &p.zones()).unwrap();
        let ours_id = sel.selected().id.clone();
        let base_id = sel.baseline.id.clone();
        let ours_zone = out.report.rows[0].zone.name.clone();
        let base_zone = out.report.baseline_row.zone.name.clone();
        let top_u = set.accepted.iter().map(|c| c.utility).fold(0.0, f64::max);
        let gap = (u(&base_id) - u(&ours_id)) / u(&base_id);
        let find = |id: &str| set.accepted.iter().find(|c| c.id == id).unwrap();
        let ours = p.grip(find(&ours_id), GripMode::Ours, 0.7);
        let base = p.grip(find(&base_id), GripMode::Uniform, 0.7);
        let elapsed = start.elapsed();
        let this = u(&base_id) == top_u
            && base_zone == weak
            && ours_zone == strong
            && gap < 0.03
            && ours.report.violations == 0
            && base.report.violations >= 1
            && elapsed < Duration::from_secs(1);
        ok &= this;
        notes.push(format!(
            "{}: baseline {base_id} ({base_zone}) viol {}/5, ours {ours_id} ({ours_zone}) viol {}/5, dU {:.1}%, {}",
            object.as_str(),
            base.report.violations,
            ours.report.violations,
            100.0 * gap,
            secs(elapsed)
        ));
    }
    (ok, notes.join("; "))
}

/// Closest point by projection onto the plane, falling back to the three
/// edges when the projection leaves the triangle.
fn oracle_closest(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> (f64, [f64; 3]) {
    let n = (b - a).cross(&(c - a));
    let area2 = n.norm_squared();
    let q = p - n * ((p - a).dot(&n) / area2);
    let wa = (b - q).cross(&(c - q)).dot(&n) / area2;
    let wb = (c - q).cross(&(a - q)).dot(&n) / area2;
    let wc = 1.0 - wa - wb;
    if wa >= 0.0 && wb >= 0.0 && wc >= 0.0 {
        return ((p - q).norm(), [wa, wb, wc]);
    }
    let seg = |x: &Vec3, y: &Vec3| {
        let e = y - x;
        let s = ((p - x).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        ((p - (x + e * s)).norm(), s)
    };
    let (dab, sab) = seg(a, b);
    let (dbc, sbc) = seg(b, c);
    let (dca, sca) = seg(c, a);
    if dab <= dbc && dab <= dca {
        (dab, [1.0 - sab, sab, 0.0])
    } else if dbc <= dca {
        (dbc, [0.0, 1.0 - sbc, sbc])
    } else {
        (dca, [sca, 0.0, 1.0 - sca])
    }
}

fn oracle_force(mesh: &TriangleMesh, values: &[f64], p: &Vec3) -> f64 {
    let v = mesh.vertices();
    let mut best = (f64::INFINITY, 0.0);
    for t in mesh.triangles() {
        let (d, w) = oracle_closest(p, &v[t[0] as usize], &v[t[1] as usize], &v[t[2] as usize]);
        if d < best.0 - 1e-15 {
            best = (d, w[0] * values[t[0] as usize] + w[1] * values[t[1] as usize] + w[2] * values[t[2] as usize]);
        }
    }
    best.1
}

/// Functional threshold, mode filter below λ = 0.5, then the largest S_F
/// (ties: larger minimum, larger utility, smaller id).
fn oracle_select(mesh: &TriangleMesh, values: &[f64], cands: &[GraspCandidate], p: &RankParams) -> Option<String> {
    let f_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, f64, f64, String)> = None;
    for c in cands.iter().filter(|c| c.functional_score >= p.tau_f) {
        let f: Vec<f64> = (0..5).map(|k| oracle_force(mesh, values, &c.contact(k))).collect();
        let min = f.iter().copied().fold(f64::INFINITY, f64::min);
        if p.lambda < 0.5 && min < p.lambda * f_max {
            continue;
        }
        let mean = f.iter().sum::<f64>() / 5.0;
        let var = f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 5.0;
        let s = min - p.alpha * var;
        let better = match &best {
            None => true,
            Some((bs, bm, bu, bid)) => {
                (s, min, c.utility) > (*bs, *bm, *bu) || ((s, min, c.utility) == (*bs, *bm, *bu) && c.id < *bid)
            }
        };
        if better {
            best = Some((s, min, c.utility, c.id.clone()));
        }
    }
    best.map(|b| b.3)
}

fn s_f_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = PipelineConfig::default();
    let template = {
        let mesh = fixtures::annulus(0.04, 0.036, 0.1, 32, 4);
        pipeline::run_forcemap(&mesh, None, &MaterialModel::defaults(gripmap_core::MaterialId::Paper), &[], &cfg)
            .unwrap()
            .map
    };
    let meshes = [fixtures::annulus(0.04, 0.036, 0.1, 32, 4), fixtures::icosphere(2, 0.05)];
    let (mut trials, mut agree, mut no_survivors) = (0, 0, 0);
    for mesh in &meshes {
        assert!(mesh.triangle_count() <= 1000);
        for trial in 0..60 {
            // Every third trial uses a smooth field, the rest independent vertex values.
            let values: Vec<f64> = if trial % 3 == 0 {
                mesh.vertices().iter().map(|v| 2.0 + 80.0 * v.z.abs() + v.y.atan2(v.x).sin()).collect()
            } else {
                (0..mesh.vertex_count()).map(|_| rng.random_range(0.1..10.0)).collect()
            };
            let map = ForceMap { per_vertex: values.clone(), ..template.clone() };
            let n = rng.random_range(1..=10);
            let cands: Vec<GraspCandidate> = (0..n)
                .map(|i| {
                    let mut contacts = [[0.0; 3]; 5];
                    for c in &mut contacts {
                        let t = mesh.triangles()[rng.random_range(0..mesh.triangle_count())];
                        let (a, b): (f64, f64) = (rng.random(), rng.random());
                        let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
                        let v = mesh.vertices();
                        let jitter = Vec3::new(rng.random(), rng.random(), rng.random()) * 2e-3;
                        let p = v[t[0] as usize] * (1.0 - a - b) + v[t[1] as usize] * a + v[t[2] as usize] * b + jitter;
                        *c = [p.x, p.y, p.z];
                    }
                    let mut g = fixtures::ring_candidate(&format!("g{i}"), 0.05, 0.04, 0.0, rng.random(), rng.random());
                    g.contacts = contacts;
                    g
                })
                .collect();
            let params = RankParams {
                alpha: [0.0, 0.1, 1.0][trial % 3],
                lambda: [0.3, 0.7, 1.0, 0.05][trial % 4],
                tau_f: 0.3,
                ..RankParams::default()
            };
            let set = CandidateSet { accepted: cands.clone(), rejected: Vec::new() };
            let res = pipeline::run_rank(mesh, &map, &set, &params, &[]);
            let got = res.ok().map(|(s, _)| s.selected().id.clone());
            let want = oracle_select(mesh, &values, &cands, &params);
            trials += 1;
            agree += (got == want) as usize;
            no_survivors += want.is_none() as usize;
        }
    }
    (agree == trials, format!("{agree}/{trials} selections agree ({no_survivors} with no survivor)"))
}

fn grip_pattern() -> Outcome {
    let p = prepare(ObjectId::PlasticCup);
    let set = p.candidates(ObjectId::PlasticCup);
    let wall = set.accepted.iter().find(|c| c.id == "wall_mid").unwrap();
    let mut runs = Vec::new();
    for mode in [GripMode::Under, GripMode::Over, GripMode::Ours] {
        let start = Instant::now();
        let g = p.grip(wall, mode, 0.7);
        runs.push((g, start.elapsed()));
    }
    let (under, over, ours) = (&runs[0].0, &runs[1].0, &runs[2].0);
    let f_star_wall = over.report.f_star.iter().copied().fold(f64::INFINITY, f64::min);
    let slow = runs.iter().map(|r| r.1).max().unwrap();
    let ok = under.report.slipped
        && under.report.violations == 0
        && !under.report.success
        && over.report.violations >= 1
        && peak(over) >= 2.0 * f_star_wall
        && !over.report.success
        && ours.report.success
        && ours.report.violations == 0
        && ours.report.margin.is_some_and(|m| m > 1.0)
        && under.k_base_calibrated
        && p.cfg.impedance.dt == 1.0 / 240.0
        && p.cfg.grip.duration == 3.0
        && slow < Duration::from_secs(10);
    (
        ok,
        format!(
            "K_base {:.1}; under {} viol {}; over {} viol {} peak {:.3} N vs 2 F* {:.3} N; ours {} viol {} margin {:.2}; slowest {}",
            under.k_base,
            under.verdict,
            under.report.violations,
            over.verdict,
            over.report.violations,
            peak(over),
            2.0 * f_star_wall,
            ours.verdict,
            ours.report.violations,
            ours.report.margin.unwrap_or(f64::NAN),
            secs(slow)
        ),
    )
}

fn lambda_sweep() -> Outcome {
    let p = prepare(ObjectId::PlasticCup);
    let set = p.candidates(ObjectId::PlasticCup);
    let (sel, _) = pipeline::run_rank(&p.mesh, &p.map, &set, &p.cfg.ranking, &p.zones()).unwrap();
    let grasp = set.accepted.iter().find(|c| c.id == sel.selected().id).unwrap();
    let runs: Vec<GripOutput> = [0.3, 0.7, 1.0].iter().map(|&l| p.grip(grasp, GripMode::Ours, l)).collect();
    let margins: Vec<f64> = runs.iter().map(|g| g.report.margin.unwrap_or(0.0)).collect();
    let peaks: Vec<f64> = runs.iter().map(peak).collect();
    let ok = margins.windows(2).all(|w| w[1] < w[0])
        && margins.iter().all(|&m| m > 1.0)
        && runs.iter().all(|g| g.report.success)
        && peaks.windows(2).all(|w| w[1] >= w[0]);
    (
        ok,
        format!(
            "grasp {}: margins {:.2} / {:.2} / {:.2}, peak f {:.3} / {:.3} / {:.3} N",
            grasp.id, margins[0], margins[1], margins[2], peaks[0], peaks[1], peaks[2]
        ),
    )
}

fn invariants() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for object in ObjectId::ALL {
        let p = prepare(object);
        let m = &p.map;
        let clamp = m.material.f_clamp;
        let bounded = m.grid.iter().chain(&m.per_vertex).all(|&f| (0.0..=clamp).contains(&f));

        let index = MeshIndex::new(&p.mesh);
        let frame = compute_frame(&p.mesh, &FrameOptions::default()).unwrap();
        let grid = estimate_thickness(&index, &frame, &ThicknessConfig { seed: p.cfg.seed, ..p.cfg.thickness }).unwrap();
        let half = MaterialModel { k_m: m.material.k_m * 0.5, ..m.material };
        let scaled = compute_force_map(&grid, &p.mesh, &frame, &half, &m.bonus).unwrap();
        let linear = m
            .grid
            .iter()
            .zip(&scaled.grid)
            .filter(|(&a, _)| a < clamp)
            .all(|(&a, &b)| (b - 0.5 * a).abs() <= 1e-9 * a.max(1.0));

        let set = p.candidates(object);
        let f_max = m.vertex_max();
        let mut monotone = true;
        let mut below_min = true;
        for c in &set.accepted {
            let f: Vec<f64> = (0..5).map(|k| index.interpolate(&m.per_vertex, &c.contact(k)).unwrap()).collect();
            let min = f.iter().copied().fold(f64::INFINITY, f64::min);
            below_min &= s_f_score(&f, 0.1) <= min;
            let passes: Vec<bool> = (0..=20).map(|i| passes_mode_filter(&f, i as f64 / 20.0, f_max)).collect();
            monotone &= passes.windows(2).all(|w| w[0] || !w[1]);
        }

        let g = m.geometry;
        let seam = (0..g.layers)
            .map(|l| {
                let h = g.layer_height(l);
                let eps = 1e-9;
                (m.sample(h, 2.0 * std::f64::consts::PI - eps) - m.sample(h, eps)).abs()
            })
            .fold(0.0, f64::max);
        let seam_ok = seam <= 1e-6 * f_max;
        ok &= bounded && linear && monotone && below_min && seam_ok;
        notes.push(format!(
            "{}: bounds {bounded}, k_m {linear}, mode {monotone}, S_F<=min {below_min}, seam {seam:.1e}",
            object.as_str()
        ));
    }

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let cfg = PipelineConfig { seed: 7, trace_csv: true, ..PipelineConfig::default() };
    let outputs: Vec<Vec<(String, Vec<u8>)>> = dirs
        .iter()
        .map(|d| {
            let out = pipeline::run_pipeline(&cfg, "gently pick up the paper cup", d.path(), GripMode::Ours).unwrap();
            out.artifacts
                .iter()
                .map(|a| (a.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(a).unwrap()))
                .collect()
        })
        .collect();
    let identical = outputs[0] == outputs[1];
    ok &= identical;
    notes.push(format!("rerun of {} artifacts byte-identical {identical}", outputs[0].len()));
    (ok, notes.join("; "))
}

fn step_response() -> Outcome {
    let params = ImpedanceParams::default();
    let (k, k_wall) = (150.0, 1e5);
    let omega = ((k + k_wall) / params.m_n).sqrt();
    let f_ss = k_wall * k * params.delta_max / (k + k_wall);
    let h = 0.02 / omega;
    let steps = (1.0 / h).ceil() as usize;
    let mut finger = FingerDynamics::default();
    let mut sq = 0.0;
    for i in 1..=steps {
        finger.step(k, params.delta_max, k_wall, &params, h);
        let t = i as f64 * h;
        let exact = f_ss * (1.0 - (1.0 + omega * t) * (-omega * t).exp());
        sq += (finger.contact_force(k_wall) - exact).powi(2);
    }
    let rms = (sq / steps as f64).sqrt() / f_ss;
    (rms <= 0.02, format!("RMS error {:.3}% of the steady force over 1 s ({steps} steps)", 100.0 * rms))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("thickness oracle", thickness_oracle),
        ("raycast equivalence", raycast_equivalence),
        ("edge refinement", edge_refinement),
        ("force-map calibration", calibration),
        ("re-ranking pattern", reranking_pattern),
        ("S_F oracle", s_f_oracle),
        ("grip condition pattern", grip_pattern),
        ("lambda sweep", lambda_sweep),
        ("invariants", invariants),
        ("step response", step_response),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        failed += !ok as usize;
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
