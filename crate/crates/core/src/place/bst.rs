// SPDX-License-Identifier: Apache-2.0

//! Deterministic binary space-partition packing used as the starting
//! placement for annealing.
//!
//! Chiplets are taken in declaration order. Each goes into the lowest, then
//! leftmost, free region that can hold its spacing halo (trying the unrotated
//! orientation first); the leftover L-shape is split along the shorter
//! leftover axis into two free regions, so the free space forms a binary tree.

use crate::error::{Error, Result};
use crate::model::PackageSpec;

use super::floorplan::{Floorplan, Placement, Rect, Rotation, GEOM_EPS};

pub fn bst_placement(spec: &PackageSpec) -> Result<Floorplan> {
    let s = spec.min_spacing;
    let mut free = vec![Rect {
        x0: 0.0,
        y0: 0.0,
        x1: spec.interposer_width,
        y1: spec.interposer_height,
    }];
    let mut placements = Vec::with_capacity(spec.chiplets.len());
    for c in &spec.chiplets {
        let mut best: Option<(usize, Rotation)> = None;
        for (k, r) in free.iter().enumerate() {
            let rot = [Rotation::R0, Rotation::R90].into_iter().find(|rot| {
                let (w, h) = if rot.is_transposed() {
                    (c.height, c.width)
                } else {
                    (c.width, c.height)
                };
                w + s <= r.width() + GEOM_EPS && h + s <= r.height() + GEOM_EPS
            });
            if let Some(rot) = rot {
                let better = match best {
                    None => true,
                    Some((b, _)) => {
                        let rb = &free[b];
                        (r.y0, r.x0) < (rb.y0, rb.x0)
                    }
                };
                if better {
                    best = Some((k, rot));
                }
            }
        }
        let (k, rotation) = best.ok_or_else(|| {
            Error::Infeasible(format!(
                "`{}` does not fit in the remaining space of a {}x{} mm interposer",
                c.name, spec.interposer_width, spec.interposer_height
            ))
        })?;
        let region = free.swap_remove(k);
        let (w, h) = if rotation.is_transposed() {
            (c.height + s, c.width + s)
        } else {
            (c.width + s, c.height + s)
        };
        placements.push(Placement {
            name: c.name.clone(),
            width: c.width,
            height: c.height,
            power: c.power,
            x: region.x0 + s / 2.0,
            y: region.y0 + s / 2.0,
            rotation,
        });
        let right_w = region.width() - w;
        let top_h = region.height() - h;
        let (right, top) = if right_w < top_h {
            // split horizontally: the top strip spans the full width
            (
                Rect {
                    x0: region.x0 + w,
                    y0: region.y0,
                    x1: region.x1,
                    y1: region.y0 + h,
                },
                Rect {
                    x0: region.x0,
                    y0: region.y0 + h,
                    x1: region.x1,
                    y1: region.y1,
                },
            )
        } else {
            (
                Rect {
                    x0: region.x0 + w,
                    y0: region.y0,
                    x1: region.x1,
                    y1: region.y1,
                },
                Rect {
                    x0: region.x0,
                    y0: region.y0 + h,
                    x1: region.x0 + w,
                    y1: region.y1,
                },
            )
        };
        for r in [right, top] {
            if r.width() > GEOM_EPS && r.height() > GEOM_EPS {
                free.push(r);
            }
        }
        // keep a stable order independent of swap_remove
        free.sort_by(|a, b| {
            (a.y0, a.x0, a.x1, a.y1)
                .partial_cmp(&(b.y0, b.x0, b.x1, b.y1))
                .unwrap()
        });
    }
    let fp = Floorplan {
        interposer_width: spec.interposer_width,
        interposer_height: spec.interposer_height,
        min_spacing: spec.min_spacing,
        placements,
        connectivity: spec.connectivity(),
    };
    fp.validate()?;
    Ok(fp)
}
