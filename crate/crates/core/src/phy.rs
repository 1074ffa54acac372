// SPDX-License-Identifier: Apache-2.0

//! Lossy-RC model of a stripline trace on a silicon interposer: per-length
//! capacitance and resistance (DC plus skin-effect AC), 10–90 % rise time,
//! 3 dB bandwidth and the longest trace that still meets a clock target.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Vacuum permeability, H/m, as used by the reference calculation.
pub const MU0: f64 = 1.2566e-6;
/// Vacuum permittivity, F/m, as used by the reference calculation.
pub const EPS0: f64 = 8.8542e-12;

/// Speed of light derived from [`MU0`] and [`EPS0`].
pub fn light_speed() -> f64 {
    1.0 / (MU0 * EPS0).sqrt()
}

/// Stripline geometry and materials. All lengths in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceGeometry {
    pub trace_width: f64,
    pub trace_thickness: f64,
    pub ground_thickness: f64,
    /// Dielectric (interposer) height.
    pub interposer_height: f64,
    pub relative_permittivity: f64,
    /// S/m
    pub conductivity: f64,
}

impl Default for TraceGeometry {
    fn default() -> Self {
        TraceGeometry {
            trace_width: 50e-6,
            trace_thickness: 20e-6,
            ground_thickness: 50e-6,
            interposer_height: 100e-6,
            relative_permittivity: 11.68,
            conductivity: 5.98e7,
        }
    }
}

impl TraceGeometry {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("phy.trace_width", self.trace_width),
            ("phy.trace_thickness", self.trace_thickness),
            ("phy.ground_thickness", self.ground_thickness),
            ("phy.interposer_height", self.interposer_height),
            ("phy.conductivity", self.conductivity),
        ];
        for (path, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(path, format!("must be > 0 (got {v})")));
            }
        }
        if !(self.relative_permittivity >= 1.0) {
            return Err(Error::validation(
                "phy.relative_permittivity",
                "must be >= 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyTargets {
    /// Hz
    pub clock_frequency: f64,
    pub safety_factor: f64,
}

impl Default for PhyTargets {
    fn default() -> Self {
        PhyTargets {
            clock_frequency: 2e9,
            safety_factor: 1.5,
        }
    }
}

impl PhyTargets {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_frequency > 0.0 && self.clock_frequency.is_finite()) {
            return Err(Error::validation("phy.clock_frequency", "must be > 0"));
        }
        if !(self.safety_factor > 0.0 && self.safety_factor.is_finite()) {
            return Err(Error::validation("phy.safety_factor", "must be > 0"));
        }
        Ok(())
    }

    /// Required 3 dB bandwidth, `SF · f_clk`.
    pub fn target_bandwidth(&self) -> f64 {
        self.safety_factor * self.clock_frequency
    }
}

/// Per-metre line constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParams {
    /// F/m
    pub c_per_length: f64,
    /// Ω/m
    pub r_dc_per_length: f64,
    /// Ω/m
    pub r_ac_per_length: f64,
    /// Ω/m, always `r_dc + r_ac`.
    pub r_total_per_length: f64,
    /// m
    pub skin_depth: f64,
}

pub fn skin_depth(frequency: f64, conductivity: f64) -> f64 {
    (PI * frequency * MU0 * conductivity).powf(-0.5)
}

pub fn line_params(g: &TraceGeometry, frequency: f64) -> Result<LineParams> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "frequency must be > 0 (got {frequency})"
        )));
    }
    let sigma = g.conductivity;
    let w = g.trace_width;
    let t = g.trace_thickness;

    let c_per_length =
        g.relative_permittivity * (w / g.interposer_height + 0.441) / (30.0 * PI * light_speed());

    let delta = skin_depth(frequency, sigma);
    let perimeter = 2.0 * t - 4.0 * delta + 2.0 * w;
    if perimeter <= 0.0 {
        return Err(Error::SkinDepthExceedsGeometry(perimeter));
    }
    let r_dc = (1.0 / sigma) * (1.0 / (w * t) + 1.0 / (2.0 * g.ground_thickness));
    // The trailing 1/(2σ) term is carried over unchanged from the reference
    // calculation; it is ~1e-8 Ω/m.
    let r_ac = (1.0 / sigma) * (1.0 / (delta * perimeter) + 1.0 / (2.0 * sigma));

    Ok(LineParams {
        c_per_length,
        r_dc_per_length: r_dc,
        r_ac_per_length: r_ac,
        r_total_per_length: r_dc + r_ac,
        skin_depth: delta,
    })
}

/// 10–90 % rise time of a trace of `length` m: `R·C·ln 9`, quadratic in length.
pub fn rise_time(length: f64, lp: &LineParams) -> f64 {
    (lp.r_total_per_length * length) * (lp.c_per_length * length) * 9f64.ln()
}

pub fn bandwidth_3db(length: f64, lp: &LineParams) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::InvalidInput(format!(
            "trace length must be > 0 (got {length})"
        )));
    }
    Ok(0.35 / rise_time(length, lp))
}

/// Longest trace (m) whose 3 dB bandwidth still reaches `SF · f_clk`.
/// Line constants are evaluated at the clock frequency.
pub fn max_trace_length(targets: &PhyTargets, g: &TraceGeometry) -> Result<f64> {
    targets.validate()?;
    let lp = line_params(g, targets.clock_frequency)?;
    Ok(length_for_bandwidth(targets.target_bandwidth(), &lp))
}

/// Inverse of [`bandwidth_3db`].
pub fn length_for_bandwidth(bandwidth: f64, lp: &LineParams) -> f64 {
    (0.35 / (bandwidth * lp.r_total_per_length * lp.c_per_length * 9f64.ln())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// m
    pub length: f64,
    pub log10_bandwidth: f64,
    pub log10_target: f64,
}

/// Bandwidth and target (both log10 Hz) over increasing trace `lengths` (m).
pub fn bandwidth_curve(
    lengths: &[f64],
    targets: &PhyTargets,
    g: &TraceGeometry,
) -> Result<Vec<CurvePoint>> {
    if lengths.is_empty() {
        return Err(Error::InvalidInput("empty length range".into()));
    }
    if lengths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "length range must be strictly increasing".into(),
        ));
    }
    targets.validate()?;
    let lp = line_params(g, targets.clock_frequency)?;
    let log10_target = targets.target_bandwidth().log10();
    lengths
        .iter()
        .map(|&length| {
            Ok(CurvePoint {
                length,
                log10_bandwidth: bandwidth_3db(length, &lp)?.log10(),
                log10_target,
            })
        })
        .collect()
}

/// First bracket `(l_i, l_{i+1})` where the bandwidth drops below the target.
pub fn curve_crossing(curve: &[CurvePoint]) -> Option<(f64, f64)> {
    curve
        .windows(2)
        .find(|w| {
            w[0].log10_bandwidth >= w[0].log10_target && w[1].log10_bandwidth < w[1].log10_target
        })
        .map(|w| (w[0].length, w[1].length))
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
