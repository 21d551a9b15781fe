//! Piecewise-linear color ramps for heat-map export.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Color stops at increasing positions in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColorRamp {
    pub stops: Vec<(f64, [u8; 3])>,
}

impl Default for ColorRamp {
    /// Blue → cyan → green → yellow → red.
    fn default() -> Self {
        ColorRamp {
            stops: vec![
                (0.0, [0, 0, 255]),
                (0.25, [0, 255, 255]),
                (0.5, [0, 255, 0]),
                (0.75, [255, 255, 0]),
                (1.0, [255, 0, 0]),
            ],
        }
    }
}

impl ColorRamp {
    /// Color at normalized position `t` (clamped to `[0, 1]`).
    pub fn sample(&self, t: f64) -> [u8; 3] {
        let t = if t.is_nan() { 0.5 } else { t.clamp(0.0, 1.0) };
        let stops = &self.stops;
        match stops.len() {
            0 => return [0, 0, 0],
            1 => return stops[0].1,
            _ => {}
        }
        if t <= stops[0].0 {
            return stops[0].1;
        }
        for w in stops.windows(2) {
            let (t0, c0) = w[0];
            let (t1, c1) = w[1];
            if t <= t1 {
                let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
                let mut out = [0u8; 3];
                for k in 0..3 {
                    let v = c0[k] as f64 + s * (c1[k] as f64 - c0[k] as f64);
                    out[k] = v.round().clamp(0.0, 255.0) as u8;
                }
                return out;
            }
        }
        stops[stops.len() - 1].1
    }

    /// Maps a field onto the ramp between its own min and max. A constant
    /// field gets the mid-ramp color everywhere.
    pub fn colorize(&self, values: &[f64]) -> Vec<[u8; 3]> {
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = hi - lo;
        let flat = !(span > 1e-12 * hi.abs().max(1.0));
        values
            .iter()
            .map(|&v| if flat { self.sample(0.5) } else { self.sample((v - lo) / span) })
            .collect()
    }
}
