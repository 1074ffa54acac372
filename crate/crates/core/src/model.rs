// SPDX-License-Identifier: Apache-2.0

//! Domain types shared by every analysis, plus JSON spec ingestion.
//!
//! A spec file is a JSON document with the top-level keys `package`,
//! `chiplets`, `stack`, `process`, `phy` and `anneal` (plus the optional
//! `tiles` and `perf` sections). Lengths are in mm, power in W and
//! temperatures in °C. Loading validates every invariant and resolves every
//! cross-reference; the resulting [`DesignSpec`] is immutable.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perf::{ConfigMetrics, ServiceSpec};
use crate::phy::{PhyTargets, TraceGeometry};
use crate::place::AnnealConfig;
use crate::power::{PowerParams, TileOperatingPoint};
use crate::thermal::{Layer, LayerRole, ThermalStack};

/// Automotive ambient range accepted for a package, °C.
pub const AMBIENT_RANGE: (f64, f64) = (-40.0, 125.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChipletKind {
    Compute,
    Gpu,
    Memory,
    Io,
    Noc,
    Analog,
}

/// One logical link bundle from a chiplet to a peer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub peer: String,
    #[serde(default = "default_weight")]
    pub weight: u32,
}

fn default_weight() -> u32 {
    1
}

/// A single die. Dimensions in mm, power in W.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipletSpec {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub power: f64,
    pub kind: ChipletKind,
    pub ports: Vec<Port>,
}

impl ChipletSpec {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackageSpec {
    pub name: String,
    pub chiplets: Vec<ChipletSpec>,
    pub interposer_width: f64,
    pub interposer_height: f64,
    pub min_spacing: f64,
    pub ambient: f64,
    pub stack: ThermalStack,
}

impl PackageSpec {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.chiplets.iter().position(|c| c.name == name)
    }

    pub fn total_power(&self) -> f64 {
        self.chiplets.iter().map(|c| c.power).sum()
    }

    /// Connectivity of an already-validated spec.
    pub fn connectivity(&self) -> Connectivity {
        validate_connectivity(self).expect("package spec was validated at load")
    }

    /// Copy of this spec on an interposer of a different size. The result is
    /// not re-validated; callers decide whether the packing is feasible.
    pub fn with_interposer(&self, width: f64, height: f64) -> PackageSpec {
        PackageSpec {
            interposer_width: width,
            interposer_height: height,
            ..self.clone()
        }
    }
}

/// Die-cost process parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessCostParams {
    pub wafer_cost: f64,
    /// mm
    pub wafer_diameter: f64,
    /// defects per mm²
    pub d0: f64,
    pub alpha_yield: f64,
    pub assembly_die_survival: f64,
    pub assembly_conn_survival: f64,
    /// Divide the wafer cost by die yield only, without spreading it over the
    /// gross dies of the wafer.
    pub literal_eq3: bool,
}

impl Default for ProcessCostParams {
    fn default() -> Self {
        ProcessCostParams {
            wafer_cost: 10_000.0,
            wafer_diameter: 300.0,
            d0: 0.002,
            alpha_yield: 3.0,
            assembly_die_survival: 0.999,
            assembly_conn_survival: 0.999_999,
            literal_eq3: false,
        }
    }
}

impl ProcessCostParams {
    pub fn validate(&self) -> Result<()> {
        let p = "process";
        finite_positive(self.wafer_cost, &format!("{p}.wafer_cost"))?;
        finite_positive(self.wafer_diameter, &format!("{p}.wafer_diameter"))?;
        if !(self.d0 >= 0.0 && self.d0.is_finite()) {
            return Err(Error::validation(format!("{p}.d0"), "must be >= 0"));
        }
        finite_positive(self.alpha_yield, &format!("{p}.alpha_yield"))?;
        for (v, f) in [
            (self.assembly_die_survival, "assembly_die_survival"),
            (self.assembly_conn_survival, "assembly_conn_survival"),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::validation(format!("{p}.{f}"), "must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

/// Cost scenario read from the `process` section.
#[derive(Debug, Clone, PartialEq)]
pub struct CostScenario {
    pub params: ProcessCostParams,
    /// Inter-die connection count entering the assembly yield.
    pub n_connections: u64,
    /// Optional monolithic reference die (mm²) for the SoC-vs-chiplet ratio.
    pub soc_area: Option<f64>,
}

/// Symmetric n×n link-weight matrix in chiplet declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    n: usize,
    weights: Vec<u32>,
}

impl Connectivity {
    pub fn zeros(n: usize) -> Self {
        Connectivity {
            n,
            weights: vec![0; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self, i: usize, j: usize) -> u32 {
        self.weights[i * self.n + j]
    }

    pub(crate) fn set_symmetric(&mut self, i: usize, j: usize, w: u32) {
        self.weights[i * self.n + j] = w;
        self.weights[j * self.n + i] = w;
    }

    /// Connected pairs `(i, j, w)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i + 1..self.n).filter_map(move |j| {
                let w = self.weight(i, j);
                (w > 0).then_some((i, j, w))
            })
        })
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.weights
            .chunks(self.n.max(1))
            .map(|r| r.to_vec())
            .take(self.n)
            .collect()
    }
}

/// Builds the symmetric connection matrix. A link declared on either endpoint
/// is propagated to both; conflicting weights, self-links and unknown peers
/// are rejected.
pub fn validate_connectivity(spec: &PackageSpec) -> Result<Connectivity> {
    let n = spec.chiplets.len();
    let index: HashMap<&str, usize> = spec
        .chiplets
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    let mut m = Connectivity::zeros(n);
    for (i, c) in spec.chiplets.iter().enumerate() {
        for (k, port) in c.ports.iter().enumerate() {
            let path = format!("chiplets[{i}].ports[{k}]");
            let j = *index
                .get(port.peer.as_str())
                .ok_or_else(|| Error::UnresolvedPeer {
                    chiplet: c.name.clone(),
                    peer: port.peer.clone(),
                })?;
            if i == j {
                return Err(Error::validation(path, "self-connection"));
            }
            if port.weight < 1 {
                return Err(Error::validation(format!("{path}.weight"), "must be >= 1"));
            }
            let existing = m.weight(i, j);
            if existing != 0 && existing != port.weight {
                return Err(Error::validation(
                    format!("{path}.weight"),
                    format!(
                        "conflicting weights for link {}-{}: {} vs {}",
                        c.name, port.peer, existing, port.weight
                    ),
                ));
            }
            m.set_symmetric(i, j, port.weight);
        }
    }
    Ok(m)
}

/// Fully validated spec document.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    pub package: PackageSpec,
    pub cost: CostScenario,
    pub geometry: TraceGeometry,
    pub targets: PhyTargets,
    pub anneal: AnnealConfig,
    pub tiles: Vec<TileOperatingPoint>,
    pub configs: Vec<ConfigMetrics>,
    pub services: Vec<ServiceSpec>,
}

impl DesignSpec {
    /// Serializes the normalized form (explicit dimensions and powers,
    /// symmetrized ports). Loading the output yields an equal spec.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawSpec::from(self)).expect("spec is serializable")
    }
}

pub fn load_spec(document: &str) -> Result<PackageSpec> {
    load_document(document).map(|d| d.package)
}

pub fn load_document(document: &str) -> Result<DesignSpec> {
    let raw: RawSpec = serde_json::from_str(document)?;
    raw.validate()
}

// ---------------------------------------------------------------------------
// Wire format

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    package: RawPackage,
    chiplets: Vec<RawChiplet>,
    #[serde(default)]
    stack: Option<RawStack>,
    #[serde(default)]
    process: RawProcess,
    #[serde(default)]
    phy: RawPhy,
    #[serde(default)]
    anneal: AnnealConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tiles: Vec<RawTile>,
    #[serde(default)]
    perf: RawPerf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPackage {
    name: String,
    interposer_width: f64,
    interposer_height: f64,
    #[serde(default)]
    min_spacing: f64,
    #[serde(default = "default_ambient")]
    ambient: f64,
}

fn default_ambient() -> f64 {
    45.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChiplet {
    name: String,
    kind: ChipletKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height: Option<f64>,
    /// Area in mm²; expands to the squarest rectangle (a square).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power: Option<f64>,
    /// W/mm², used when `power` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power_density: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ports: Vec<Port>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStack {
    /// W/(m²·K) at the top surface.
    convection_h: f64,
    /// Bottom to top.
    layers: Vec<RawLayer>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    name: String,
    role: LayerRole,
    /// mm
    thickness: f64,
    /// W/(m·K)
    conductivity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawProcess {
    wafer_cost: f64,
    wafer_diameter: f64,
    d0: f64,
    alpha_yield: f64,
    assembly_die_survival: f64,
    assembly_conn_survival: f64,
    literal_eq3: bool,
    n_connections: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    soc_area: Option<f64>,
}

impl Default for RawProcess {
    fn default() -> Self {
        let p = ProcessCostParams::default();
        RawProcess {
            wafer_cost: p.wafer_cost,
            wafer_diameter: p.wafer_diameter,
            d0: p.d0,
            alpha_yield: p.alpha_yield,
            assembly_die_survival: p.assembly_die_survival,
            assembly_conn_survival: p.assembly_conn_survival,
            literal_eq3: p.literal_eq3,
            n_connections: 20_000,
            soc_area: None,
        }
    }
}

/// Trace geometry in mm plus clock targets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPhy {
    trace_width: f64,
    trace_thickness: f64,
    ground_thickness: f64,
    interposer_height: f64,
    relative_permittivity: f64,
    conductivity: f64,
    clock_frequency: f64,
    safety_factor: f64,
}

impl Default for RawPhy {
    fn default() -> Self {
        RawPhy::from_parts(&TraceGeometry::default(), &PhyTargets::default())
    }
}

impl RawPhy {
    fn from_parts(g: &TraceGeometry, t: &PhyTargets) -> Self {
        RawPhy {
            trace_width: g.trace_width * 1e3,
            trace_thickness: g.trace_thickness * 1e3,
            ground_thickness: g.ground_thickness * 1e3,
            interposer_height: g.interposer_height * 1e3,
            relative_permittivity: g.relative_permittivity,
            conductivity: g.conductivity,
            clock_frequency: t.clock_frequency,
            safety_factor: t.safety_factor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTile {
    name: String,
    frequency: f64,
    voltage: f64,
    activity: f64,
    load_capacitance: f64,
    #[serde(default)]
    gain_factor: f64,
    #[serde(default)]
    transition_time: f64,
    #[serde(default)]
    threshold: f64,
    #[serde(default)]
    leakage_current: f64,
    #[serde(default)]
    transistor_density: f64,
    #[serde(default)]
    area: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPerf {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    configs: Vec<ConfigMetrics>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    services: Vec<ServiceSpec>,
}

fn finite_positive(v: f64, path: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            path,
            format!("must be finite and > 0 (got {v})"),
        ))
    }
}

fn finite_non_negative(v: f64, path: &str) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            path,
            format!("must be finite and >= 0 (got {v})"),
        ))
    }
}

pub(crate) fn check_identifier(name: &str, path: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::validation(
            path,
            format!("`{name}` is not an identifier ([A-Za-z0-9_.-]+)"),
        ))
    }
}

impl RawSpec {
    fn validate(self) -> Result<DesignSpec> {
        let pkg = &self.package;
        check_identifier(&pkg.name, "package.name")?;
        finite_positive(pkg.interposer_width, "package.interposer_width")?;
        finite_positive(pkg.interposer_height, "package.interposer_height")?;
        finite_non_negative(pkg.min_spacing, "package.min_spacing")?;
        if !(pkg.ambient >= AMBIENT_RANGE.0 && pkg.ambient <= AMBIENT_RANGE.1) {
            return Err(Error::validation(
                "package.ambient",
                format!("must lie in [{}, {}] °C", AMBIENT_RANGE.0, AMBIENT_RANGE.1),
            ));
        }
        if self.chiplets.is_empty() {
            return Err(Error::validation(
                "chiplets",
                "at least one chiplet is required",
            ));
        }

        let mut chiplets = Vec::with_capacity(self.chiplets.len());
        for (i, c) in self.chiplets.iter().enumerate() {
            chiplets.push(c.resolve(i)?);
        }
        let mut seen = HashMap::new();
        for (i, c) in chiplets.iter().enumerate() {
            if let Some(prev) = seen.insert(c.name.as_str(), i) {
                return Err(Error::validation(
                    format!("chiplets[{i}].name"),
                    format!("duplicate of chiplets[{prev}]"),
                ));
            }
        }

        let stack = match &self.stack {
            Some(s) => s.resolve(pkg.ambient)?,
            None => ThermalStack::default_2p5d(pkg.ambient),
        };

        let mut package = PackageSpec {
            name: pkg.name.clone(),
            chiplets,
            interposer_width: pkg.interposer_width,
            interposer_height: pkg.interposer_height,
            min_spacing: pkg.min_spacing,
            ambient: pkg.ambient,
            stack,
        };
        let conn = validate_connectivity(&package)?;
        normalize_ports(&mut package, &conn);
        check_footprints(&package)?;

        let process = ProcessCostParams {
            wafer_cost: self.process.wafer_cost,
            wafer_diameter: self.process.wafer_diameter,
            d0: self.process.d0,
            alpha_yield: self.process.alpha_yield,
            assembly_die_survival: self.process.assembly_die_survival,
            assembly_conn_survival: self.process.assembly_conn_survival,
            literal_eq3: self.process.literal_eq3,
        };
        process.validate()?;
        if let Some(a) = self.process.soc_area {
            finite_positive(a, "process.soc_area")?;
        }

        let geometry = TraceGeometry {
            trace_width: self.phy.trace_width * 1e-3,
            trace_thickness: self.phy.trace_thickness * 1e-3,
            ground_thickness: self.phy.ground_thickness * 1e-3,
            interposer_height: self.phy.interposer_height * 1e-3,
            relative_permittivity: self.phy.relative_permittivity,
            conductivity: self.phy.conductivity,
        };
        geometry.validate()?;
        let targets = PhyTargets {
            clock_frequency: self.phy.clock_frequency,
            safety_factor: self.phy.safety_factor,
        };
        targets.validate()?;

        self.anneal.validate()?;

        let mut tiles = Vec::with_capacity(self.tiles.len());
        for (i, t) in self.tiles.iter().enumerate() {
            let path = format!("tiles[{i}]");
            check_identifier(&t.name, &format!("{path}.name"))?;
            let tile = TileOperatingPoint {
                name: t.name.clone(),
                frequency: t.frequency,
                voltage: t.voltage,
                params: PowerParams {
                    activity: t.activity,
                    load_capacitance: t.load_capacitance,
                    frequency: t.frequency,
                    voltage: t.voltage,
                    gain_factor: t.gain_factor,
                    transition_time: t.transition_time,
                    threshold: t.threshold,
                    leakage_current: t.leakage_current,
                    transistor_density: t.transistor_density,
                    area: t.area,
                },
            };
            tile.validate()
                .map_err(|e| Error::validation(path.clone(), e.to_string()))?;
            tiles.push(tile);
        }

        for (i, c) in self.perf.configs.iter().enumerate() {
            check_identifier(&c.name, &format!("perf.configs[{i}].name"))?;
        }
        for (i, s) in self.perf.services.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::validation(format!("perf.services[{i}]"), e.to_string()))?;
        }

        Ok(DesignSpec {
            package,
            cost: CostScenario {
                params: process,
                n_connections: self.process.n_connections,
                soc_area: self.process.soc_area,
            },
            geometry,
            targets,
            anneal: self.anneal,
            tiles,
            configs: self.perf.configs,
            services: self.perf.services,
        })
    }
}

impl RawChiplet {
    fn resolve(&self, i: usize) -> Result<ChipletSpec> {
        let path = format!("chiplets[{i}]");
        check_identifier(&self.name, &format!("{path}.name"))?;
        let (width, height) = match (self.width, self.height, self.area) {
            (Some(w), Some(h), None) => (w, h),
            (None, None, Some(a)) => {
                finite_positive(a, &format!("{path}.area"))?;
                (a.sqrt(), a.sqrt())
            }
            _ => {
                return Err(Error::validation(
                    path,
                    "give either `width` and `height`, or `area`",
                ))
            }
        };
        finite_positive(width, &format!("{path}.width"))?;
        finite_positive(height, &format!("{path}.height"))?;
        let power = match (self.power, self.power_density) {
            (Some(p), None) => p,
            (None, Some(d)) => {
                finite_non_negative(d, &format!("{path}.power_density"))?;
                d * width * height
            }
            (None, None) => 0.0,
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    path,
                    "`power` and `power_density` are mutually exclusive",
                ))
            }
        };
        finite_non_negative(power, &format!("{path}.power"))?;
        Ok(ChipletSpec {
            name: self.name.clone(),
            width,
            height,
            power,
            kind: self.kind,
            ports: self.ports.clone(),
        })
    }
}

impl RawStack {
    fn resolve(&self, ambient: f64) -> Result<ThermalStack> {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer {
                name: l.name.clone(),
                role: l.role,
                thickness: l.thickness * 1e-3,
                conductivity: l.conductivity,
            })
            .collect();
        let stack = ThermalStack {
            layers,
            convection_h: self.convection_h,
            ambient,
        };
        stack.validate()?;
        Ok(stack)
    }
}

fn normalize_ports(spec: &mut PackageSpec, conn: &Connectivity) {
    let names: Vec<String> = spec.chiplets.iter().map(|c| c.name.clone()).collect();
    for (i, c) in spec.chiplets.iter_mut().enumerate() {
        c.ports = (0..names.len())
            .filter(|&j| conn.weight(i, j) > 0)
            .map(|j| Port {
                peer: names[j].clone(),
                weight: conn.weight(i, j),
            })
            .collect();
    }
}

pub(crate) fn check_footprints(spec: &PackageSpec) -> Result<()> {
    let s = spec.min_spacing;
    let (w, h) = (spec.interposer_width, spec.interposer_height);
    for (i, c) in spec.chiplets.iter().enumerate() {
        let fits =
            (c.width + s <= w && c.height + s <= h) || (c.height + s <= w && c.width + s <= h);
        if !fits {
            return Err(Error::validation(
                format!("chiplets[{i}]"),
                format!(
                    "{}x{} mm footprint (plus {s} mm spacing) does not fit on a {w}x{h} mm interposer",
                    c.width, c.height
                ),
            ));
        }
    }
    let halo_area: f64 = spec
        .chiplets
        .iter()
        .map(|c| (c.width + s) * (c.height + s))
        .sum();
    if halo_area > w * h {
        return Err(Error::validation(
            "chiplets",
            format!(
                "total footprint with spacing halo {halo_area:.3} mm² exceeds interposer area {:.3} mm²",
                w * h
            ),
        ));
    }
    Ok(())
}

impl From<&DesignSpec> for RawSpec {
    fn from(d: &DesignSpec) -> Self {
        let p = &d.package;
        RawSpec {
            package: RawPackage {
                name: p.name.clone(),
                interposer_width: p.interposer_width,
                interposer_height: p.interposer_height,
                min_spacing: p.min_spacing,
                ambient: p.ambient,
            },
            chiplets: p
                .chiplets
                .iter()
                .map(|c| RawChiplet {
                    name: c.name.clone(),
                    kind: c.kind,
                    width: Some(c.width),
                    height: Some(c.height),
                    area: None,
                    power: Some(c.power),
                    power_density: None,
                    ports: c.ports.clone(),
                })
                .collect(),
            stack: Some(RawStack {
                convection_h: p.stack.convection_h,
                layers: p
                    .stack
                    .layers
                    .iter()
                    .map(|l| RawLayer {
                        name: l.name.clone(),
                        role: l.role,
                        thickness: l.thickness * 1e3,
                        conductivity: l.conductivity,
                    })
                    .collect(),
            }),
            process: RawProcess {
                wafer_cost: d.cost.params.wafer_cost,
                wafer_diameter: d.cost.params.wafer_diameter,
                d0: d.cost.params.d0,
                alpha_yield: d.cost.params.alpha_yield,
                assembly_die_survival: d.cost.params.assembly_die_survival,
                assembly_conn_survival: d.cost.params.assembly_conn_survival,
                literal_eq3: d.cost.params.literal_eq3,
                n_connections: d.cost.n_connections,
                soc_area: d.cost.soc_area,
            },
            phy: RawPhy::from_parts(&d.geometry, &d.targets),
            anneal: d.anneal.clone(),
            tiles: d
                .tiles
                .iter()
                .map(|t| RawTile {
                    name: t.name.clone(),
                    frequency: t.frequency,
                    voltage: t.voltage,
                    activity: t.params.activity,
                    load_capacitance: t.params.load_capacitance,
                    gain_factor: t.params.gain_factor,
                    transition_time: t.params.transition_time,
                    threshold: t.params.threshold,
                    leakage_current: t.params.leakage_current,
                    transistor_density: t.params.transistor_density,
                    area: t.params.area,
                })
                .collect(),
            perf: RawPerf {
                configs: d.configs.clone(),
                services: d.services.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(chiplets: &str, w: f64, h: f64) -> String {
        format!(
            r#"{{"package": {{"name": "t", "interposer_width": {w}, "interposer_height": {h}, "min_spacing": 0.0}},
                "chiplets": {chiplets}}}"#
        )
    }

    #[test]
    fn empty_chiplet_list_is_rejected() {
        let err = load_spec(&doc("[]", 10.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::Validation { ref path, .. } if path == "chiplets"));
    }

    #[test]
    fn footprint_twice_the_interposer_is_rejected() {
        // 2 × (10×10) on a 10×10 interposer: total footprint = 2× interposer area.
        let c = r#"[{"name":"a","kind":"compute","width":10,"height":10,"power":1},
                    {"name":"b","kind":"compute","width":10,"height":10,"power":1}]"#;
        let err = load_spec(&doc(c, 10.0, 10.0)).unwrap_err();
        assert!(
            matches!(err, Error::Validation { ref path, .. } if path == "chiplets"),
            "{err}"
        );
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(load_spec("{ not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn unresolved_peer_is_reported() {
        let c = r#"[{"name":"a","kind":"io","width":1,"height":1,"ports":[{"peer":"zz"}]}]"#;
        match load_spec(&doc(c, 10.0, 10.0)) {
            Err(Error::UnresolvedPeer { chiplet, peer }) => {
                assert_eq!((chiplet.as_str(), peer.as_str()), ("a", "zz"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_dimension_names_field_path() {
        let c = r#"[{"name":"a","kind":"io","width":-1,"height":1}]"#;
        match load_spec(&doc(c, 10.0, 10.0)) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "chiplets[0].width"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn two_chiplets_one_link() {
        let c = r#"[{"name":"a","kind":"io","width":1,"height":1,"ports":[{"peer":"b","weight":1}]},
                    {"name":"b","kind":"io","width":1,"height":1}]"#;
        let spec = load_spec(&doc(c, 10.0, 10.0)).unwrap();
        assert_eq!(
            validate_connectivity(&spec).unwrap().rows(),
            vec![vec![0, 1], vec![1, 0]]
        );
    }

    #[test]
    fn portless_chiplet_has_zero_row_and_column() {
        let c = r#"[{"name":"a","kind":"io","width":1,"height":1,"ports":[{"peer":"b"}]},
                    {"name":"b","kind":"io","width":1,"height":1},
                    {"name":"c","kind":"io","width":1,"height":1}]"#;
        let m = load_spec(&doc(c, 10.0, 10.0)).unwrap().connectivity();
        for k in 0..3 {
            assert_eq!(m.weight(2, k), 0);
            assert_eq!(m.weight(k, 2), 0);
        }
    }

    #[test]
    fn one_sided_declaration_is_symmetrized() {
        let c = r#"[{"name":"a","kind":"io","width":1,"height":1,"ports":[{"peer":"b","weight":2}]},
                    {"name":"b","kind":"io","width":1,"height":1}]"#;
        let spec = load_spec(&doc(c, 10.0, 10.0)).unwrap();
        let m = validate_connectivity(&spec).unwrap();
        assert_eq!((m.weight(0, 1), m.weight(1, 0)), (2, 2));
        assert_eq!(
            spec.chiplets[1].ports,
            vec![Port {
                peer: "a".into(),
                weight: 2
            }]
        );
    }

    #[test]
    fn conflicting_weights_are_rejected() {
        let c = r#"[{"name":"a","kind":"io","width":1,"height":1,"ports":[{"peer":"b","weight":2}]},
                    {"name":"b","kind":"io","width":1,"height":1,"ports":[{"peer":"a","weight":3}]}]"#;
        assert!(matches!(
            load_spec(&doc(c, 10.0, 10.0)),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn area_expands_to_square_and_density_to_power() {
        let c = r#"[{"name":"a","kind":"compute","area":16,"power_density":0.25}]"#;
        let spec = load_spec(&doc(c, 10.0, 10.0)).unwrap();
        let a = &spec.chiplets[0];
        assert_eq!((a.width, a.height), (4.0, 4.0));
        assert!((a.power - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ambient_outside_automotive_range_is_rejected() {
        let d = r#"{"package": {"name": "t", "interposer_width": 10, "interposer_height": 10, "ambient": 150},
                    "chiplets": [{"name":"a","kind":"io","width":1,"height":1}]}"#;
        match load_spec(d) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "package.ambient"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
