// SPDX-License-Identifier: Apache-2.0

//! Compact steady-state thermal model of a 2.5D package.
//!
//! The package is discretized into an `nx × ny` grid per layer. Adjacent
//! cells exchange heat through series conduction resistances `d/(k·A)`, the
//! top layer loses heat to ambient through `h·A`, and the sides and bottom
//! are adiabatic. Chiplet power enters the layer with the `chiplet` role.

mod solver;

use serde::{Deserialize, Serialize};

pub use solver::{ConductanceGrid, SolverOptions};

use crate::error::{Error, Result};
use crate::place::{Floorplan, Placement, Rotation};

/// Position of a layer in the 2.5D sandwich; declared bottom to top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerRole {
    Substrate,
    C4,
    Interposer,
    Microbumps,
    Chiplet,
    Tim,
    Spreader,
    Sink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub role: LayerRole,
    /// m
    pub thickness: f64,
    /// W/(m·K)
    pub conductivity: f64,
}

impl Layer {
    pub fn new(name: &str, role: LayerRole, thickness: f64, conductivity: f64) -> Self {
        Layer {
            name: name.to_string(),
            role,
            thickness,
            conductivity,
        }
    }
}

/// Ordered layers (bottom to top) with the top convective boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalStack {
    pub layers: Vec<Layer>,
    /// W/(m²·K)
    pub convection_h: f64,
    /// °C
    pub ambient: f64,
}

impl ThermalStack {
    /// Default sandwich: organic substrate, C4 bumps, silicon interposer,
    /// microbumps, chiplets, TIM, copper spreader and an aluminium sink base
    /// under a liquid-cooled surface.
    pub fn default_2p5d(ambient: f64) -> Self {
        use LayerRole::*;
        ThermalStack {
            layers: vec![
                Layer::new("substrate", Substrate, 1.0e-3, 0.3),
                Layer::new("c4", C4, 0.1e-3, 2.0),
                Layer::new("interposer", Interposer, 0.1e-3, 130.0),
                Layer::new("microbumps", Microbumps, 0.02e-3, 2.0),
                Layer::new("chiplet", Chiplet, 0.15e-3, 130.0),
                Layer::new("tim", Tim, 0.02e-3, 5.0),
                Layer::new("spreader", Spreader, 0.5e-3, 400.0),
                Layer::new("sink", Sink, 2.0e-3, 200.0),
            ],
            convection_h: 1000.0,
            ambient,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() < 2 {
            return Err(Error::validation(
                "stack.layers",
                "at least two layers are required",
            ));
        }
        for (i, l) in self.layers.iter().enumerate() {
            crate::model::check_identifier(&l.name, &format!("stack.layers[{i}].name"))?;
            if !(l.thickness > 0.0 && l.thickness.is_finite()) {
                return Err(Error::validation(
                    format!("stack.layers[{i}].thickness"),
                    "must be > 0",
                ));
            }
            if !(l.conductivity > 0.0 && l.conductivity.is_finite()) {
                return Err(Error::validation(
                    format!("stack.layers[{i}].conductivity"),
                    "must be > 0",
                ));
            }
            if self.layers[..i].iter().any(|p| p.name == l.name) {
                return Err(Error::validation(
                    format!("stack.layers[{i}].name"),
                    "duplicate layer name",
                ));
            }
            if i > 0 && l.role < self.layers[i - 1].role {
                return Err(Error::validation(
                    format!("stack.layers[{i}].role"),
                    format!(
                        "{:?} may not sit above {:?}; order is substrate, c4, interposer, microbumps, chiplet, tim, spreader, sink",
                        l.role,
                        self.layers[i - 1].role
                    ),
                ));
            }
        }
        let active = self
            .layers
            .iter()
            .filter(|l| l.role == LayerRole::Chiplet)
            .count();
        if active != 1 {
            return Err(Error::validation(
                "stack.layers",
                format!("exactly one layer must have the chiplet role (found {active})"),
            ));
        }
        if !(self.convection_h > 0.0 && self.convection_h.is_finite()) {
            return Err(Error::validation("stack.convection_h", "must be > 0"));
        }
        Ok(())
    }

    /// Index of the layer that dissipates chiplet power.
    pub fn active_layer(&self) -> usize {
        self.layers
            .iter()
            .position(|l| l.role == LayerRole::Chiplet)
            .expect("validated stack has a chiplet layer")
    }

    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }
}

/// Power dissipated per cell of the chiplet layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub nx: usize,
    pub ny: usize,
    /// Cell pitch in x, m.
    pub dx: f64,
    /// Cell pitch in y, m.
    pub dy: f64,
    /// W, row-major (`j * nx + i`).
    pub power: Vec<f64>,
}

impl PowerMap {
    pub fn zeros(nx: usize, ny: usize, dx: f64, dy: f64) -> Self {
        PowerMap {
            nx,
            ny,
            dx,
            dy,
            power: vec![0.0; nx * ny],
        }
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.power[j * self.nx + i]
    }
}

/// Grid dimensions used to discretize an interposer at a nominal `resolution`
/// (mm): the cell count is rounded so the cells tile the interposer exactly.
pub fn grid_for(width_mm: f64, height_mm: f64, resolution_mm: f64) -> (usize, usize) {
    let nx = ((width_mm / resolution_mm).round() as usize).max(1);
    let ny = ((height_mm / resolution_mm).round() as usize).max(1);
    (nx, ny)
}

/// Spreads each chiplet's power uniformly over its footprint, weighting
/// partially covered cells by the covered area.
pub fn rasterize(fp: &Floorplan, resolution_mm: f64) -> Result<PowerMap> {
    if !(resolution_mm > 0.0 && resolution_mm.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "resolution must be > 0 (got {resolution_mm})"
        )));
    }
    if let Some(smallest) = fp
        .placements
        .iter()
        .map(|p| p.width.min(p.height))
        .min_by(f64::total_cmp)
    {
        if resolution_mm > smallest {
            return Err(Error::InvalidInput(format!(
                "resolution {resolution_mm} mm exceeds the smallest chiplet dimension {smallest} mm"
            )));
        }
    }
    let (nx, ny) = grid_for(fp.interposer_width, fp.interposer_height, resolution_mm);
    let cw = fp.interposer_width / nx as f64;
    let ch = fp.interposer_height / ny as f64;
    let mut map = PowerMap::zeros(nx, ny, cw * 1e-3, ch * 1e-3);
    for p in &fp.placements {
        let r = p.rect();
        let density = p.power / (r.width() * r.height());
        let i0 = ((r.x0 / cw).floor().max(0.0) as usize).min(nx - 1);
        let i1 = ((r.x1 / cw).ceil() as usize).clamp(1, nx);
        let j0 = ((r.y0 / ch).floor().max(0.0) as usize).min(ny - 1);
        let j1 = ((r.y1 / ch).ceil() as usize).clamp(1, ny);
        for j in j0..j1 {
            let oy = overlap(r.y0, r.y1, j as f64 * ch, (j + 1) as f64 * ch);
            if oy <= 0.0 {
                continue;
            }
            for i in i0..i1 {
                let ox = overlap(r.x0, r.x1, i as f64 * cw, (i + 1) as f64 * cw);
                if ox > 0.0 {
                    map.power[j * nx + i] += density * ox * oy;
                }
            }
        }
    }
    Ok(map)
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// Steady-state temperatures of every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub layer_names: Vec<String>,
    pub ambient: f64,
    /// °C, indexed `(l * ny + j) * nx + i`.
    pub temperature: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual of the linear solve.
    pub residual: f64,
}

impl TemperatureField {
    pub fn layer(&self, l: usize) -> &[f64] {
        let n = self.nx * self.ny;
        &self.temperature[l * n..(l + 1) * n]
    }

    pub fn layer_index(&self, name: &str) -> Result<usize> {
        self.layer_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownLayer(name.to_string()))
    }

    pub fn at(&self, l: usize, i: usize, j: usize) -> f64 {
        self.temperature[(l * self.ny + j) * self.nx + i]
    }

    /// Hottest cell `(i, j, T)` of layer `l`.
    pub fn hottest_cell(&self, l: usize) -> (usize, usize, f64) {
        let (k, t) = self.layer(l).iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (k, t)| if t > acc.1 { (k, t) } else { acc },
        );
        (k % self.nx, k / self.nx, t)
    }

    /// Rise above ambient, per cell.
    pub fn rise(&self) -> Vec<f64> {
        self.temperature.iter().map(|t| t - self.ambient).collect()
    }
}

pub fn solve_steady_state(pm: &PowerMap, stack: &ThermalStack) -> Result<TemperatureField> {
    solve_with(pm, stack, &SolverOptions::default(), None)
}

/// Solves with explicit options and an optional initial guess for the
/// temperature rise above ambient (K, same layout as the field).
pub fn solve_with(
    pm: &PowerMap,
    stack: &ThermalStack,
    opts: &SolverOptions,
    guess: Option<&[f64]>,
) -> Result<TemperatureField> {
    let grid = ConductanceGrid::new(pm.nx, pm.ny, pm.dx, pm.dy, stack)?;
    let active = stack.active_layer();
    let mut rhs = vec![0.0; grid.len()];
    let n2 = pm.nx * pm.ny;
    rhs[active * n2..(active + 1) * n2].copy_from_slice(&pm.power);
    let sol = grid.solve(&rhs, guess, opts)?;
    Ok(TemperatureField {
        nx: pm.nx,
        ny: pm.ny,
        dx: pm.dx,
        dy: pm.dy,
        layer_names: stack.layers.iter().map(|l| l.name.clone()).collect(),
        ambient: stack.ambient,
        temperature: sol.rise.iter().map(|r| r + stack.ambient).collect(),
        iterations: sol.iterations,
        residual: sol.residual,
    })
}

pub fn peak_temperature(tf: &TemperatureField, layer: &str) -> Result<f64> {
    let l = tf.layer_index(layer)?;
    Ok(tf.hottest_cell(l).2)
}

/// Heat leaving through the convective top surface, W.
pub fn top_heat_flow(tf: &TemperatureField, stack: &ThermalStack) -> f64 {
    let top = tf.layer_names.len() - 1;
    let g = stack.convection_h * tf.dx * tf.dy;
    tf.layer(top).iter().map(|t| g * (t - tf.ambient)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocComparison {
    pub peak_soc: f64,
    pub peak_split: f64,
    /// `peak_soc - peak_split`, K.
    pub delta: f64,
}

/// Peak chiplet-layer temperature of a monolithic plan against a split plan
/// dissipating the same total power.
pub fn compare_soc_vs_chiplet(
    soc_plan: &Floorplan,
    split_plan: &Floorplan,
    stack: &ThermalStack,
    resolution_mm: f64,
) -> Result<SocComparison> {
    let (ps, pc) = (soc_plan.total_power(), split_plan.total_power());
    if (ps - pc).abs() > 1e-9 * ps.abs().max(pc.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidInput(format!(
            "comparison must be power-controlled: {ps} W vs {pc} W"
        )));
    }
    let active = &stack.layers[stack.active_layer()].name;
    let peak = |fp: &Floorplan| -> Result<f64> {
        let tf = solve_steady_state(&rasterize(fp, resolution_mm)?, stack)?;
        peak_temperature(&tf, active)
    };
    let peak_soc = peak(soc_plan)?;
    let peak_split = peak(split_plan)?;
    Ok(SocComparison {
        peak_soc,
        peak_split,
        delta: peak_soc - peak_split,
    })
}

/// Power-controlled pair of plans on a square interposer: one centered
/// square die of `soc_area` mm² against four square dies of `chiplet_area`
/// mm² in a centered 2×2 grid separated by `gap` mm. Both dissipate
/// `total_power` W.
pub fn soc_vs_chiplet_plans(
    interposer_side: f64,
    total_power: f64,
    soc_area: f64,
    chiplet_area: f64,
    gap: f64,
) -> Result<(Floorplan, Floorplan)> {
    for (what, v) in [
        ("interposer side", interposer_side),
        ("soc area", soc_area),
        ("chiplet area", chiplet_area),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("{what} must be > 0 (got {v})")));
        }
    }
    if !(gap >= 0.0) || !(total_power >= 0.0) {
        return Err(Error::InvalidInput("gap and power must be >= 0".into()));
    }
    let c = interposer_side / 2.0;
    let a = soc_area.sqrt();
    let soc = Floorplan::unconnected(
        interposer_side,
        interposer_side,
        0.0,
        vec![Placement {
            name: "soc".into(),
            width: a,
            height: a,
            power: total_power,
            x: c - a / 2.0,
            y: c - a / 2.0,
            rotation: Rotation::R0,
        }],
    );
    let b = chiplet_area.sqrt();
    let off = gap / 2.0;
    let corners = [
        (c - off - b, c - off - b),
        (c + off, c - off - b),
        (c - off - b, c + off),
        (c + off, c + off),
    ];
    let split = Floorplan::unconnected(
        interposer_side,
        interposer_side,
        gap,
        corners
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| Placement {
                name: format!("chiplet{k}"),
                width: b,
                height: b,
                power: total_power / 4.0,
                x,
                y,
                rotation: Rotation::R0,
            })
            .collect(),
    );
    soc.validate()?;
    split.validate()?;
    Ok((soc, split))
}
