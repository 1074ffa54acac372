// SPDX-License-Identifier: Apache-2.0

//! CMOS power model: switching, short-circuit and leakage terms, summed per
//! DVFS tile.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    /// Switching activity in [0, 1].
    pub activity: f64,
    /// F
    pub load_capacitance: f64,
    /// Hz
    pub frequency: f64,
    /// V
    pub voltage: f64,
    /// Transistor gain factor, A/V².
    pub gain_factor: f64,
    /// Input rise/fall time, s.
    pub transition_time: f64,
    /// Threshold voltage, V.
    pub threshold: f64,
    /// Leakage current per transistor, A.
    pub leakage_current: f64,
    /// Transistors per mm².
    pub transistor_density: f64,
    /// mm²
    pub area: f64,
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("activity", self.activity),
            ("load_capacitance", self.load_capacitance),
            ("frequency", self.frequency),
            ("voltage", self.voltage),
            ("gain_factor", self.gain_factor),
            ("transition_time", self.transition_time),
            ("threshold", self.threshold),
            ("leakage_current", self.leakage_current),
            ("transistor_density", self.transistor_density),
            ("area", self.area),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and >= 0 (got {v})"
                )));
            }
        }
        if self.activity > 1.0 {
            return Err(Error::InvalidInput(format!(
                "activity must lie in [0, 1] (got {})",
                self.activity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerBreakdown {
    pub switching: f64,
    pub short_circuit: f64,
    pub leakage: f64,
    pub total: f64,
}

/// Evaluates the three power terms. The short-circuit term is zero when
/// `V <= 2·Vth`, where the pull-up and pull-down networks never conduct
/// simultaneously.
pub fn power_breakdown(p: &PowerParams) -> PowerBreakdown {
    let switching = p.activity * p.load_capacitance * p.frequency * p.voltage * p.voltage;
    let overdrive = p.voltage - 2.0 * p.threshold;
    let short_circuit = if overdrive > 0.0 {
        p.activity * (p.gain_factor / 12.0) * p.frequency * p.transition_time * overdrive.powi(3)
    } else {
        0.0
    };
    let leakage = p.leakage_current * p.voltage * p.transistor_density * p.area;
    PowerBreakdown {
        switching,
        short_circuit,
        leakage,
        total: switching + short_circuit + leakage,
    }
}

/// A tile running at its own DVFS point. `frequency`/`voltage` override the
/// corresponding fields of `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct TileOperatingPoint {
    pub name: String,
    pub frequency: f64,
    pub voltage: f64,
    pub params: PowerParams,
}

impl TileOperatingPoint {
    pub fn effective_params(&self) -> PowerParams {
        PowerParams {
            frequency: self.frequency,
            voltage: self.voltage,
            ..self.params
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tile `{}`: frequency must be > 0",
                self.name
            )));
        }
        if !(self.voltage >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "tile `{}`: voltage must be >= 0",
                self.name
            )));
        }
        self.effective_params().validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemPower {
    pub tiles: Vec<(String, PowerBreakdown)>,
    pub total: f64,
}

pub fn system_power(tiles: &[TileOperatingPoint]) -> Result<SystemPower> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(tiles.len());
    for t in tiles {
        if !seen.insert(t.name.as_str()) {
            return Err(Error::InvalidInput(format!(
                "duplicate tile name `{}`",
                t.name
            )));
        }
        t.validate()?;
        out.push((t.name.clone(), power_breakdown(&t.effective_params())));
    }
    let total = out.iter().map(|(_, b)| b.total).sum();
    Ok(SystemPower { tiles: out, total })
}
