// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Connectivity, PackageSpec};

/// Slack for floating-point comparisons of positions, mm.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u16", try_from = "u16")]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn quarter_turn(self) -> Rotation {
        match self {
            Rotation::R0 => Rotation::R90,
            Rotation::R90 => Rotation::R180,
            Rotation::R180 => Rotation::R270,
            Rotation::R270 => Rotation::R0,
        }
    }

    pub fn is_transposed(self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

impl From<Rotation> for u16 {
    fn from(r: Rotation) -> u16 {
        r.degrees()
    }
}

impl TryFrom<u16> for Rotation {
    type Error = String;

    fn try_from(d: u16) -> std::result::Result<Self, String> {
        match d {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            _ => Err(format!("rotation must be 0, 90, 180 or 270 (got {d})")),
        }
    }
}

/// Axis-aligned rectangle, mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect {
            x0: self.x0 - by,
            y0: self.y0 - by,
            x1: self.x1 + by,
            y1: self.y1 + by,
        }
    }

    /// Interiors intersect (touching edges do not count).
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x0 < o.x1 - GEOM_EPS
            && o.x0 < self.x1 - GEOM_EPS
            && self.y0 < o.y1 - GEOM_EPS
            && o.y0 < self.y1 - GEOM_EPS
    }
}

/// A chiplet on the interposer. `(x, y)` is the lower-left corner of the
/// rotated footprint; `width`/`height` are the unrotated die dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub name: String,
    pub width: f64,
    pub height: f64,
    pub power: f64,
    pub x: f64,
    pub y: f64,
    pub rotation: Rotation,
}

impl Placement {
    /// Footprint dimensions after rotation.
    pub fn extent(&self) -> (f64, f64) {
        if self.rotation.is_transposed() {
            (self.height, self.width)
        } else {
            (self.width, self.height)
        }
    }

    pub fn rect(&self) -> Rect {
        let (w, h) = self.extent();
        Rect {
            x0: self.x,
            y0: self.y,
            x1: self.x + w,
            y1: self.y + h,
        }
    }

    pub fn center(&self) -> (f64, f64) {
        let (w, h) = self.extent();
        (self.x + w / 2.0, self.y + h / 2.0)
    }

    pub fn set_center(&mut self, cx: f64, cy: f64) {
        let (w, h) = self.extent();
        self.x = cx - w / 2.0;
        self.y = cy - h / 2.0;
    }
}

/// Chiplet placements on an interposer together with their connectivity.
///
/// A legal floorplan keeps every footprint's spacing halo (half of
/// `min_spacing` on each side) inside the interposer and disjoint from every
/// other halo, so neighbouring dies are at least `min_spacing` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    pub interposer_width: f64,
    pub interposer_height: f64,
    pub min_spacing: f64,
    pub placements: Vec<Placement>,
    pub connectivity: Connectivity,
}

impl Floorplan {
    pub fn unconnected(
        interposer_width: f64,
        interposer_height: f64,
        min_spacing: f64,
        placements: Vec<Placement>,
    ) -> Self {
        let n = placements.len();
        Floorplan {
            interposer_width,
            interposer_height,
            min_spacing,
            placements,
            connectivity: Connectivity::zeros(n),
        }
    }

    pub fn total_power(&self) -> f64 {
        self.placements.iter().map(|p| p.power).sum()
    }

    pub fn halo(&self, k: usize) -> Rect {
        self.placements[k].rect().inflate(self.min_spacing / 2.0)
    }

    /// Whether placement `k` is in bounds and clear of every other placement.
    pub fn is_legal_at(&self, k: usize) -> bool {
        let h = self.halo(k);
        let in_bounds = h.x0 >= -GEOM_EPS
            && h.y0 >= -GEOM_EPS
            && h.x1 <= self.interposer_width + GEOM_EPS
            && h.y1 <= self.interposer_height + GEOM_EPS;
        in_bounds
            && (0..self.placements.len())
                .filter(|&o| o != k)
                .all(|o| !h.overlaps(&self.halo(o)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.connectivity.len() != self.placements.len() {
            return Err(Error::Infeasible(
                "connectivity size does not match placements".into(),
            ));
        }
        for k in 0..self.placements.len() {
            let h = self.halo(k);
            let p = &self.placements[k];
            if h.x0 < -GEOM_EPS
                || h.y0 < -GEOM_EPS
                || h.x1 > self.interposer_width + GEOM_EPS
                || h.y1 > self.interposer_height + GEOM_EPS
            {
                return Err(Error::Infeasible(format!(
                    "`{}` lies outside the interposer",
                    p.name
                )));
            }
            for o in k + 1..self.placements.len() {
                if h.overlaps(&self.halo(o)) {
                    return Err(Error::Infeasible(format!(
                        "`{}` and `{}` overlap or violate min spacing",
                        p.name, self.placements[o].name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks that the plan holds every chiplet of `spec` exactly once, in
    /// declaration order, with matching dimensions and power.
    pub fn check_matches(&self, spec: &PackageSpec) -> Result<()> {
        if self.placements.len() != spec.chiplets.len() {
            return Err(Error::Infeasible(format!(
                "floorplan has {} placements, spec has {} chiplets",
                self.placements.len(),
                spec.chiplets.len()
            )));
        }
        for (p, c) in self.placements.iter().zip(&spec.chiplets) {
            if p.name != c.name || p.width != c.width || p.height != c.height || p.power != c.power
            {
                return Err(Error::Infeasible(format!(
                    "placement `{}` does not match chiplet `{}`",
                    p.name, c.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FloorplanDoc::from(self)).expect("floorplan is serializable")
    }

    /// Reads a floorplan document, taking dies, power and connectivity from
    /// `spec`. Placements may be listed in any order but must cover every chiplet.
    pub fn from_json(text: &str, spec: &PackageSpec) -> Result<Floorplan> {
        let doc: FloorplanDoc = serde_json::from_str(text)?;
        let mut placements = Vec::with_capacity(spec.chiplets.len());
        for (i, c) in spec.chiplets.iter().enumerate() {
            let mut found = doc.placements.iter().filter(|p| p.name == c.name);
            let p = found.next().ok_or_else(|| {
                Error::validation(
                    format!("placements[{}]", c.name),
                    "chiplet missing from floorplan",
                )
            })?;
            if found.next().is_some() {
                return Err(Error::validation(
                    format!("placements[{}]", c.name),
                    "listed twice",
                ));
            }
            let _ = i;
            placements.push(Placement {
                name: c.name.clone(),
                width: c.width,
                height: c.height,
                power: c.power,
                x: p.x,
                y: p.y,
                rotation: p.rotation,
            });
        }
        if let Some(extra) = doc
            .placements
            .iter()
            .find(|p| spec.index_of(&p.name).is_none())
        {
            return Err(Error::validation(
                format!("placements[{}]", extra.name),
                "not a chiplet of the package",
            ));
        }
        let fp = Floorplan {
            interposer_width: doc.interposer_width,
            interposer_height: doc.interposer_height,
            min_spacing: spec.min_spacing,
            placements,
            connectivity: spec.connectivity(),
        };
        fp.validate()?;
        Ok(fp)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FloorplanDoc {
    interposer_width: f64,
    interposer_height: f64,
    min_spacing: f64,
    placements: Vec<PlacementDoc>,
    #[serde(default)]
    links: Vec<LinkDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlacementDoc {
    name: String,
    x: f64,
    y: f64,
    rotation: Rotation,
    #[serde(default)]
    width: f64,
    #[serde(default)]
    height: f64,
    #[serde(default)]
    power: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkDoc {
    a: String,
    b: String,
    weight: u32,
}

impl From<&Floorplan> for FloorplanDoc {
    fn from(fp: &Floorplan) -> Self {
        FloorplanDoc {
            interposer_width: fp.interposer_width,
            interposer_height: fp.interposer_height,
            min_spacing: fp.min_spacing,
            placements: fp
                .placements
                .iter()
                .map(|p| PlacementDoc {
                    name: p.name.clone(),
                    x: p.x,
                    y: p.y,
                    rotation: p.rotation,
                    width: p.width,
                    height: p.height,
                    power: p.power,
                })
                .collect(),
            links: fp
                .connectivity
                .pairs()
                .map(|(i, j, w)| LinkDoc {
                    a: fp.placements[i].name.clone(),
                    b: fp.placements[j].name.clone(),
                    weight: w,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str, x: f64, y: f64, w: f64, h: f64) -> Placement {
        Placement {
            name: name.into(),
            width: w,
            height: h,
            power: 1.0,
            x,
            y,
            rotation: Rotation::R0,
        }
    }

    #[test]
    fn rotation_transposes_extent() {
        let mut a = p("a", 0.0, 0.0, 4.0, 2.0);
        a.rotation = Rotation::R90;
        assert_eq!(a.extent(), (2.0, 4.0));
        a.rotation = a.rotation.quarter_turn();
        assert_eq!(a.extent(), (4.0, 2.0));
    }

    #[test]
    fn spacing_halo_enforced() {
        let fp = Floorplan::unconnected(
            20.0,
            10.0,
            1.0,
            vec![p("a", 0.5, 0.5, 4.0, 4.0), p("b", 5.5, 0.5, 4.0, 4.0)],
        );
        assert!(fp.validate().is_ok());
        let tight = Floorplan::unconnected(
            20.0,
            10.0,
            1.0,
            vec![p("a", 0.5, 0.5, 4.0, 4.0), p("b", 5.0, 0.5, 4.0, 4.0)],
        );
        assert!(tight.validate().is_err());
        let edge = Floorplan::unconnected(20.0, 10.0, 1.0, vec![p("a", 0.0, 0.5, 4.0, 4.0)]);
        assert!(edge.validate().is_err());
    }
}
