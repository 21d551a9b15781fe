//! Per-finger impedance grip simulation along the contact normal.
//!
//! Each finger is a 1-DoF mass pushed toward a unilateral penalty wall.
//! The controller pulls it toward a setpoint `δ_max` past first contact
//! with stiffness `K` and damping tuned to the loaded stiffness, so the
//! normal force follows a critically damped rise to
//! `k_wall·K·δ / (K + k_wall)`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvh::nearest_vertex;
use crate::geometry::Vec3;
use crate::grasp::{GraspCandidate, FINGERS};
use crate::mesh::TriangleMesh;

pub const GRAVITY: f64 = 9.81;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImpedanceParams {
    /// Virtual mass (kg).
    pub m_n: f64,
    pub zeta_n: f64,
    pub gamma_n: f64,
    /// Largest tolerated normal deflection (m).
    pub delta_max: f64,
    /// Baseline normal stiffness (N/m).
    pub k_base: f64,
    /// Simulation step (s).
    pub dt: f64,
}

impl Default for ImpedanceParams {
    fn default() -> Self {
        ImpedanceParams { m_n: 0.05, zeta_n: 1.0, gamma_n: 1.0, delta_max: 0.002, k_base: 100.0, dt: 1.0 / 240.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GripError {
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("finger {0} has no contact")]
    NoContact(usize),
    #[error("finger {finger} deflection {deflection:.4e} m exceeds 10x delta_max at t = {time:.4} s")]
    NumericalDivergence { finger: usize, deflection: f64, time: f64 },
    #[error("no K_base satisfies both over-stiffness violation and under-stiffness slip (needs {lo:.3} < {hi:.3} N/m)")]
    InfeasibleCalibration { lo: f64, hi: f64 },
}

impl ImpedanceParams {
    pub fn validate(&self) -> Result<(), GripError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.m_n) {
            return Err(GripError::InvalidParams("m_n must be positive"));
        }
        if !pos(self.zeta_n) {
            return Err(GripError::InvalidParams("zeta_n must be positive"));
        }
        if !pos(self.gamma_n) {
            return Err(GripError::InvalidParams("gamma_n must be positive"));
        }
        if !pos(self.delta_max) {
            return Err(GripError::InvalidParams("delta_max must be positive"));
        }
        if !pos(self.k_base) {
            return Err(GripError::InvalidParams("k_base must be positive"));
        }
        if !pos(self.dt) || self.dt > 1.0 / 60.0 {
            return Err(GripError::InvalidParams("dt must be in (0, 1/60]"));
        }
        Ok(())
    }
}

/// Gains for a target normal force: `k = γ F / δ_max`, `d = 2ζ √(m k)`.
pub fn adaptive_stiffness(f_tar: f64, params: &ImpedanceParams) -> (f64, f64) {
    let k = params.gamma_n * f_tar.max(0.0) / params.delta_max;
    (k, damping(k, params))
}

pub fn damping(k: f64, params: &ImpedanceParams) -> f64 {
    2.0 * params.zeta_n * (params.m_n * k.max(0.0)).sqrt()
}

/// One contact reported for a finger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSample {
    pub point: [f64; 3],
    /// Unit surface normal.
    pub normal: [f64; 3],
    /// Impulse over the last control period (N·s).
    pub impulse: [f64; 3],
    /// Admissible force at the nearest vertex (N).
    pub f_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FingerContactState {
    pub finger: usize,
    pub contacts: Vec<ContactSample>,
    /// `(J·n)/Δt` per contact, clamped at zero.
    pub f_est: Vec<f64>,
    /// Index of the contact with the highest load ratio.
    pub critical: usize,
}

impl FingerContactState {
    /// Admissible force at the critical contact.
    pub fn f_star(&self) -> f64 {
        self.contacts[self.critical].f_max
    }

    pub fn normal(&self) -> Vec3 {
        Vec3::from(self.contacts[self.critical].normal)
    }

    pub fn force(&self) -> f64 {
        self.f_est[self.critical]
    }
}

/// Highest `F_est / F_max`; ties go to the weaker contact, then the lower index.
pub fn critical_contact(f_est: &[f64], f_max: &[f64]) -> usize {
    let ratio = |i: usize| {
        if f_max[i] > 0.0 {
            f_est[i] / f_max[i]
        } else if f_est[i] > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    };
    (1..f_est.len()).fold(0, |best, i| {
        let (ri, rb) = (ratio(i), ratio(best));
        if ri > rb || (ri == rb && f_max[i] < f_max[best]) {
            i
        } else {
            best
        }
    })
}

pub fn estimate_contacts(fingers: &[Vec<ContactSample>], dt: f64) -> Result<Vec<FingerContactState>, GripError> {
    fingers
        .iter()
        .enumerate()
        .map(|(k, contacts)| {
            if contacts.is_empty() {
                return Err(GripError::NoContact(k));
            }
            let f_est: Vec<f64> = contacts
                .iter()
                .map(|c| (Vec3::from(c.impulse).dot(&Vec3::from(c.normal)) / dt).max(0.0))
                .collect();
            let f_max: Vec<f64> = contacts.iter().map(|c| c.f_max).collect();
            let critical = critical_contact(&f_est, &f_max);
            Ok(FingerContactState { finger: k, contacts: contacts.clone(), f_est, critical })
        })
        .collect()
}

/// Static contacts for a grasp: nearest-vertex force and outward normal.
pub fn grasp_contacts(candidate: &GraspCandidate, mesh: &TriangleMesh, per_vertex: &[f64]) -> Vec<Vec<ContactSample>> {
    let normals = mesh.vertex_normals();
    candidate
        .contacts
        .iter()
        .map(|p| {
            let v = nearest_vertex(mesh, &Vec3::from(*p));
            let n = normals[v];
            alloc::vec![ContactSample { point: *p, normal: [n.x, n.y, n.z], impulse: [0.0; 3], f_max: per_vertex[v] }]
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripMode {
    /// Constant `under_factor · K_base`.
    Under,
    /// Constant `over_factor · K_base`.
    Over,
    /// Per-finger target from the critical contact's admissible force.
    Ours,
    /// Same adaptive law with the object-wide maximum in place of `F*_k`.
    Uniform,
}

impl GripMode {
    pub const ALL: [GripMode; 4] = [GripMode::Under, GripMode::Over, GripMode::Ours, GripMode::Uniform];

    pub fn as_str(self) -> &'static str {
        match self {
            GripMode::Under => "under",
            GripMode::Over => "over",
            GripMode::Ours => "ours",
            GripMode::Uniform => "uniform",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GripScenario {
    /// Object mass (kg).
    pub mass: f64,
    /// Finger-object friction coefficient.
    pub mu: f64,
    /// Contact penalty stiffness (N/m).
    pub k_wall: f64,
    pub duration: f64,
    pub lambda: f64,
    pub c_grip: f64,
    /// Targets never exceed this fraction of `F*_k`.
    pub target_cap: f64,
    pub under_factor: f64,
    pub over_factor: f64,
    pub control_rate: f64,
    pub slip_grace: f64,
    /// Retention must hold over this trailing window.
    pub hold_window: f64,
    /// Largest `ω·h` for a physics substep.
    pub max_omega_h: f64,
}

impl Default for GripScenario {
    fn default() -> Self {
        GripScenario {
            mass: 0.03,
            mu: 0.5,
            k_wall: 5000.0,
            duration: 3.0,
            lambda: 0.7,
            c_grip: 0.7,
            target_cap: 0.7,
            under_factor: 0.3,
            over_factor: 2.0,
            control_rate: 60.0,
            slip_grace: 0.1,
            hold_window: 2.5,
            max_omega_h: 0.02,
        }
    }
}

impl GripScenario {
    pub fn validate(&self) -> Result<(), GripError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.mass) || !pos(self.mu) || !pos(self.k_wall) || !pos(self.duration) {
            return Err(GripError::InvalidParams("mass, mu, k_wall and duration must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(GripError::InvalidParams("lambda must be in (0, 1]"));
        }
        if !pos(self.c_grip) || !pos(self.target_cap) || !pos(self.under_factor) || !pos(self.over_factor) {
            return Err(GripError::InvalidParams("controller factors must be positive"));
        }
        if !pos(self.control_rate) || !pos(self.max_omega_h) || self.slip_grace < 0.0 || self.hold_window < 0.0 {
            return Err(GripError::InvalidParams("timing parameters out of range"));
        }
        Ok(())
    }

    /// Per-finger target force for an admissible force `f_star`.
    pub fn target_force(&self, f_star: f64) -> f64 {
        (self.lambda * self.c_grip * f_star).min(self.target_cap * f_star).max(0.0)
    }

    pub fn weight(&self) -> f64 {
        self.mass * GRAVITY
    }
}

/// Normal state of one finger; `x` is penetration past first contact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FingerDynamics {
    pub x: f64,
    pub v: f64,
}

impl FingerDynamics {
    pub fn contact_force(&self, k_wall: f64) -> f64 {
        k_wall * self.x.max(0.0)
    }

    /// One semi-implicit Euler step of `m a = K (x_d − x) − f_wall − d v`.
    /// Damping uses the wall-loaded stiffness while in contact.
    pub fn step(&mut self, k: f64, x_d: f64, k_wall: f64, params: &ImpedanceParams, h: f64) {
        let loaded = if self.x > 0.0 { k + k_wall } else { k };
        let d = damping(loaded, params);
        let a = (k * (x_d - self.x) - self.contact_force(k_wall) - d * self.v) / params.m_n;
        self.v += a * h;
        self.x += self.v * h;
    }
}

/// Closed-form force for a critically damped finger starting at rest on the wall.
pub fn step_response(t: f64, k: f64, k_wall: f64, params: &ImpedanceParams) -> f64 {
    let w = ((k + k_wall) / params.m_n).sqrt();
    let f_ss = k_wall * k * params.delta_max / (k + k_wall);
    f_ss * (1.0 - (1.0 + w * t) * (-w * t).exp())
}

/// Steady-state contact force under stiffness `k`.
pub fn steady_force(k: f64, k_wall: f64, delta: f64) -> f64 {
    if k <= 0.0 {
        0.0
    } else {
        k_wall * k * delta / (k + k_wall)
    }
}

/// Stiffness that settles at force `f`, if reachable.
pub fn stiffness_for_force(f: f64, k_wall: f64, delta: f64) -> Option<f64> {
    let cap = k_wall * delta;
    (f >= 0.0 && f < cap).then(|| f * k_wall / (cap - f))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub force: [f64; FINGERS],
    pub stiffness: [f64; FINGERS],
    pub critical: [usize; FINGERS],
    /// `μ Σ f − m g`.
    pub retention_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripReport {
    pub mode: GripMode,
    pub lambda: f64,
    /// Force at the end of the window, per finger (N).
    pub steady_force: [f64; FINGERS],
    /// Peak force per finger over the window (N).
    pub peak_force: [f64; FINGERS],
    pub f_max: f64,
    /// Admissible force at each finger's critical contact (N).
    pub f_star: [f64; FINGERS],
    /// `F*_k / f_k` at the finger where it is smallest; `None` after a slip
    /// or with no load.
    pub margin: Option<f64>,
    pub critical_finger: usize,
    pub violated: [bool; FINGERS],
    pub violations: usize,
    pub slipped: bool,
    pub slip_time: Option<f64>,
    pub retention_held: bool,
    /// Held without slipping and without exceeding any admissible force.
    pub success: bool,
    pub stiffness: [f64; FINGERS],
    pub trace: Vec<TraceRow>,
}

impl GripReport {
    pub fn verdict(&self) -> &'static str {
        if self.success {
            "success"
        } else if self.slipped {
            "slip"
        } else if self.violations > 0 {
            "overload"
        } else {
            "dropped"
        }
    }
}

/// Stiffness per finger for the mode, given each finger's critical admissible force.
pub fn mode_stiffness(
    mode: GripMode,
    f_star: &[f64; FINGERS],
    f_map_max: f64,
    params: &ImpedanceParams,
    scenario: &GripScenario,
) -> [f64; FINGERS] {
    let mut k = [0.0; FINGERS];
    for (i, slot) in k.iter_mut().enumerate() {
        *slot = match mode {
            GripMode::Under => scenario.under_factor * params.k_base,
            GripMode::Over => scenario.over_factor * params.k_base,
            GripMode::Ours => adaptive_stiffness(scenario.target_force(f_star[i]), params).0,
            GripMode::Uniform => adaptive_stiffness(scenario.target_force(f_map_max), params).0,
        };
    }
    k
}

/// Runs the grip for `scenario.duration` seconds.
pub fn run_grip(
    contacts: &[Vec<ContactSample>],
    f_map_max: f64,
    mode: GripMode,
    params: &ImpedanceParams,
    scenario: &GripScenario,
    keep_trace: bool,
) -> Result<GripReport, GripError> {
    params.validate()?;
    scenario.validate()?;
    if contacts.len() != FINGERS {
        return Err(GripError::NoContact(contacts.len().min(FINGERS - 1)));
    }
    let mut state = estimate_contacts(contacts, params.dt)?;
    let mut f_star = [0.0; FINGERS];
    for (k, s) in state.iter().enumerate() {
        f_star[k] = s.f_star();
    }
    let mut stiffness = mode_stiffness(mode, &f_star, f_map_max, params, scenario);

    let steps = (scenario.duration / params.dt).round() as usize;
    let control_every = ((1.0 / scenario.control_rate) / params.dt).round().max(1.0) as usize;
    let control_dt = control_every as f64 * params.dt;
    let k_peak = |k: &[f64; FINGERS]| k.iter().copied().fold(0.0, f64::max);
    let substeps_for = |k: f64| {
        let w = ((k + scenario.k_wall) / params.m_n).sqrt();
        ((w * params.dt / scenario.max_omega_h).ceil() as usize).max(1)
    };
    let mut substeps = substeps_for(k_peak(&stiffness));

    let weight = scenario.weight();
    let mut fingers = [FingerDynamics::default(); FINGERS];
    let mut impulse = [0.0; FINGERS];
    let mut peak = [0.0; FINGERS];
    let mut violated = [false; FINGERS];
    let mut trace = Vec::new();
    let mut slip_start: Option<f64> = None;
    let mut slip_time = None;
    let mut held_since = 0.0;
    let mut force = [0.0; FINGERS];

    for step in 1..=steps {
        let t = step as f64 * params.dt;
        let h = params.dt / substeps as f64;
        for (k, f) in fingers.iter_mut().enumerate() {
            let mut j = 0.0;
            for _ in 0..substeps {
                f.step(stiffness[k], params.delta_max, scenario.k_wall, params, h);
                j += f.contact_force(scenario.k_wall) * h;
            }
            if !f.x.is_finite() || f.x.abs() > 10.0 * params.delta_max {
                return Err(GripError::NumericalDivergence { finger: k, deflection: f.x, time: t });
            }
            impulse[k] += j;
            force[k] = f.contact_force(scenario.k_wall);
            peak[k] = f64::max(peak[k], force[k]);
        }

        if step % control_every == 0 {
            for (k, s) in state.iter_mut().enumerate() {
                let n = Vec3::from(s.contacts[0].normal);
                let share = impulse[k] / s.contacts.len() as f64;
                for c in s.contacts.iter_mut() {
                    let v = n * share;
                    c.impulse = [v.x, v.y, v.z];
                }
                impulse[k] = 0.0;
            }
            let raw: Vec<Vec<ContactSample>> = state.iter().map(|s| s.contacts.clone()).collect();
            state = estimate_contacts(&raw, control_dt)?;
            for (k, s) in state.iter().enumerate() {
                f_star[k] = s.f_star();
            }
            stiffness = mode_stiffness(mode, &f_star, f_map_max, params, scenario);
            substeps = substeps_for(k_peak(&stiffness));
        }

        for k in 0..FINGERS {
            if force[k] > f_star[k] {
                violated[k] = true;
            }
        }
        let retention = scenario.mu * force.iter().sum::<f64>() - weight;
        if retention >= 0.0 {
            slip_start = None;
        } else {
            let start = *slip_start.get_or_insert(t - params.dt);
            held_since = t;
            if slip_time.is_none() && t - start > scenario.slip_grace + 1e-12 {
                slip_time = Some(t);
            }
        }
        if keep_trace {
            trace.push(TraceRow {
                t,
                force,
                stiffness,
                critical: core::array::from_fn(|k| state[k].critical),
                retention_margin: retention,
            });
        }
    }

    let f_max = peak.iter().copied().fold(0.0, f64::max);
    let (critical_finger, margin) = (0..FINGERS)
        .filter(|&k| peak[k] > 0.0)
        .map(|k| (k, f_star[k] / peak[k]))
        .fold((0, None::<f64>), |(bk, bm), (k, m)| match bm {
            Some(b) if b <= m => (bk, bm),
            _ => (k, Some(m)),
        });
    let slipped = slip_time.is_some();
    let retention_held = held_since <= scenario.duration - scenario.hold_window + 1e-12;
    let violations = violated.iter().filter(|&&v| v).count();
    let margin = if slipped { None } else { margin };
    Ok(GripReport {
        mode,
        lambda: scenario.lambda,
        steady_force: force,
        peak_force: peak,
        f_max,
        f_star,
        margin,
        critical_finger,
        violations,
        violated,
        slipped,
        slip_time,
        retention_held,
        success: !slipped && retention_held && violations == 0,
        stiffness,
        trace,
    })
}

/// One `Ours` run per λ.
pub fn lambda_sweep(
    contacts: &[Vec<ContactSample>],
    f_map_max: f64,
    params: &ImpedanceParams,
    scenario: &GripScenario,
    lambdas: &[f64],
) -> Result<Vec<GripReport>, GripError> {
    lambdas
        .iter()
        .map(|&lambda| run_grip(contacts, f_map_max, GripMode::Ours, params, &GripScenario { lambda, ..*scenario }, false))
        .collect()
}

/// Picks `K_base` so that over-stiffness exceeds `over_ratio · f_star_min`
/// on some finger while under-stiffness cannot carry the object. Returns the
/// geometric mean of the feasible interval.
pub fn calibrate_k_base(
    f_star_min: f64,
    over_ratio: f64,
    params: &ImpedanceParams,
    scenario: &GripScenario,
) -> Result<f64, GripError> {
    let (kw, d) = (scenario.k_wall, params.delta_max);
    let lo = stiffness_for_force(over_ratio * f_star_min, kw, d).map(|k| k / scenario.over_factor);
    let hi = stiffness_for_force(scenario.weight() / (scenario.mu * FINGERS as f64), kw, d)
        .map(|k| k / scenario.under_factor)
        .unwrap_or(f64::INFINITY);
    match lo {
        Some(lo) if lo < hi && hi.is_finite() => Ok((lo * hi).sqrt()),
        Some(lo) => Err(GripError::InfeasibleCalibration { lo, hi }),
        None => Err(GripError::InfeasibleCalibration { lo: f64::INFINITY, hi }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn contacts(f_star: f64) -> Vec<Vec<ContactSample>> {
        (0..FINGERS)
            .map(|_| vec![ContactSample { point: [0.0; 3], normal: [1.0, 0.0, 0.0], impulse: [0.0; 3], f_max: f_star }])
            .collect()
    }

    #[test]
    fn gains_examples() {
        let p = ImpedanceParams::default();
        assert_eq!(adaptive_stiffness(0.0, &p), (0.0, 0.0));
        let p1 = ImpedanceParams { m_n: 1.0, ..p };
        assert!((damping(4.0, &p1) - 4.0).abs() < 1e-15);
        let (k1, d1) = adaptive_stiffness(1.0, &p);
        let (k2, d2) = adaptive_stiffness(2.0, &p);
        assert!((k2 - 2.0 * k1).abs() < 1e-12);
        assert!((d2 - d1 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn impulse_estimate_and_critical_contact() {
        let c = |imp: f64, fm: f64| ContactSample { point: [0.0; 3], normal: [0.0, 0.0, 1.0], impulse: [0.0, 0.0, imp], f_max: fm };
        let s = estimate_contacts(&[vec![c(0.006, 1.0)]], 1.0 / 60.0).unwrap();
        assert!((s[0].f_est[0] - 0.36).abs() < 1e-12);
        assert_eq!(critical_contact(&[0.5, 0.9], &[1.0, 1.0]), 1);
        assert_eq!(estimate_contacts(&[vec![]], 0.1), Err(GripError::NoContact(0)));
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = ImpedanceParams::default();
        let (k, kw) = (200.0, 5000.0);
        let x = k * p.delta_max / (k + kw);
        let mut f = FingerDynamics { x, v: 0.0 };
        f.step(k, p.delta_max, kw, &p, 1e-4);
        assert!((f.x - x).abs() < 1e-15 && f.v.abs() < 1e-12);
    }

    #[test]
    fn zero_stiffness_releases() {
        let p = ImpedanceParams::default();
        let mut f = FingerDynamics { x: 1e-4, v: 0.0 };
        for _ in 0..20000 {
            f.step(0.0, p.delta_max, 5000.0, &p, 1e-4);
        }
        assert!(f.contact_force(5000.0) < 1e-9);
    }

    #[test]
    fn step_tracks_closed_form_without_overshoot() {
        let p = ImpedanceParams::default();
        let (k, kw) = (150.0, 5000.0);
        let w = ((k + kw) / p.m_n).sqrt();
        let h = 0.02 / w;
        let f_ss = steady_force(k, kw, p.delta_max);
        let mut f = FingerDynamics::default();
        let mut t = 0.0;
        let mut worst: f64 = 0.0;
        while t < 0.5 {
            f.step(k, p.delta_max, kw, &p, h);
            t += h;
            let sim = f.contact_force(kw);
            assert!(sim <= f_ss * 1.01);
            worst = worst.max((sim - step_response(t, k, kw, &p)).abs());
        }
        assert!(worst < 0.02 * f_ss, "{worst}");
    }

    #[test]
    fn ours_respects_admissible_force() {
        let r = run_grip(&contacts(0.3), 3.7, GripMode::Ours, &ImpedanceParams::default(), &GripScenario::default(), true)
            .unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.margin.unwrap() > 1.0);
        assert_eq!(r.trace.len(), 720);
    }

    #[test]
    fn calibration_brackets_the_pattern() {
        let p = ImpedanceParams::default();
        let s = GripScenario { k_wall: 1e5, ..GripScenario::default() };
        let k = calibrate_k_base(0.3, 2.0, &p, &s).unwrap();
        let p = ImpedanceParams { k_base: k, ..p };
        let c = contacts(0.3);
        let under = run_grip(&c, 3.7, GripMode::Under, &p, &s, false).unwrap();
        let over = run_grip(&c, 3.7, GripMode::Over, &p, &s, false).unwrap();
        let ours = run_grip(&c, 3.7, GripMode::Ours, &p, &s, false).unwrap();
        assert!(under.slipped && !under.success && under.violations == 0);
        assert!(!over.success && over.violations >= 1);
        assert!(over.f_max >= 0.6);
        assert!(ours.success && ours.violations == 0);
        assert!(calibrate_k_base(1.0, 2.0, &p, &s).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let p = ImpedanceParams { dt: 0.1, ..ImpedanceParams::default() };
        assert!(p.validate().is_err());
    }
}
