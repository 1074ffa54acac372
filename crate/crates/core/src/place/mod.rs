// SPDX-License-Identifier: Apache-2.0

//! Thermally-aware simulated-annealing placement of chiplets on an
//! interposer.

mod anneal;
mod bst;
mod floorplan;

use serde::{Deserialize, Serialize};

pub use anneal::{
    calibrate_k, interposer_sweep, optimize, propose_move, AnnealResult, CalibrationRow,
    HistoryRow, SweepRow,
};
pub use bst::bst_placement;
pub use floorplan::{Floorplan, Placement, Rect, Rotation, GEOM_EPS};

use crate::error::{Error, Result};

/// Weighted Manhattan distance between the footprint centers of every
/// connected pair, mm.
pub fn wirelength(fp: &Floorplan) -> f64 {
    fp.connectivity
        .pairs()
        .map(|(i, j, w)| {
            let (xi, yi) = fp.placements[i].center();
            let (xj, yj) = fp.placements[j].center();
            w as f64 * ((xi - xj).abs() + (yi - yj).abs())
        })
        .sum()
}

/// Temperature weight of the annealing cost.
pub fn alpha_for(t: f64) -> f64 {
    if t <= 60.0 {
        0.0
    } else {
        (0.1 + (t - 45.0) / 100.0).min(0.9)
    }
}

/// Running min/max of peak temperature (°C) and wirelength (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationBounds {
    pub t_min: f64,
    pub t_max: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for NormalizationBounds {
    fn default() -> Self {
        NormalizationBounds {
            t_min: f64::INFINITY,
            t_max: f64::NEG_INFINITY,
            w_min: f64::INFINITY,
            w_max: f64::NEG_INFINITY,
        }
    }
}

impl NormalizationBounds {
    pub fn new(t_min: f64, t_max: f64, w_min: f64, w_max: f64) -> Self {
        NormalizationBounds {
            t_min,
            t_max,
            w_min,
            w_max,
        }
    }

    pub fn observe(&mut self, t: f64, w: f64) {
        self.t_min = self.t_min.min(t);
        self.t_max = self.t_max.max(t);
        self.w_min = self.w_min.min(w);
        self.w_max = self.w_max.max(w);
    }
}

fn scaled(v: f64, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return 0.0;
    }
    (v.clamp(lo, hi) - lo) / (hi - lo)
}

/// `α·T̂ + (1 − α)·Ŵ` with min-max scaled `T̂`, `Ŵ` and `α = alpha_for(T)`.
/// A degenerate bound contributes 0.
pub fn anneal_cost(t: f64, w: f64, nb: &NormalizationBounds) -> f64 {
    let a = alpha_for(t);
    a * scaled(t, nb.t_min, nb.t_max) + (1.0 - a) * scaled(w, nb.w_min, nb.w_max)
}

/// `min(1, exp((current − neighbor) / K))`.
pub fn acceptance_probability(cost_current: f64, cost_neighbor: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "acceptance scale K must be > 0 (got {k})"
        )));
    }
    Ok(((cost_current - cost_neighbor) / k).exp().min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub k0: f64,
    /// Per-iteration multiplier of K.
    pub decay: f64,
    /// °C
    pub tol: f64,
    pub max_iterations: usize,
    pub moves_per_iteration: usize,
    pub seed: u64,
    /// Consecutive iterations within `tol` needed to stop.
    pub persistence: usize,
    pub warmup_samples: usize,
    /// Grid cell size (mm) for per-move evaluation.
    pub coarse_resolution: f64,
    /// Grid cell size (mm) for the initial and returned plans.
    pub fine_resolution: f64,
    /// Largest translation, mm.
    pub max_step: f64,
    /// Floor of the step shrink factor `K / K0`.
    pub min_step_fraction: f64,
    pub move_retries: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            k0: 0.1,
            decay: 0.97,
            tol: 0.1,
            max_iterations: 500,
            moves_per_iteration: 8,
            seed: 0,
            persistence: 5,
            warmup_samples: 20,
            coarse_resolution: 2.0,
            fine_resolution: 1.0,
            max_step: 4.0,
            min_step_fraction: 0.1,
            move_retries: 200,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("anneal.k0", self.k0),
            ("anneal.tol", self.tol),
            ("anneal.coarse_resolution", self.coarse_resolution),
            ("anneal.fine_resolution", self.fine_resolution),
            ("anneal.max_step", self.max_step),
        ];
        for (path, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(path, format!("must be > 0 (got {v})")));
            }
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::validation("anneal.decay", "must lie in (0, 1)"));
        }
        if !(self.min_step_fraction > 0.0 && self.min_step_fraction <= 1.0) {
            return Err(Error::validation(
                "anneal.min_step_fraction",
                "must lie in (0, 1]",
            ));
        }
        for (path, v) in [
            ("anneal.max_iterations", self.max_iterations),
            ("anneal.moves_per_iteration", self.moves_per_iteration),
            ("anneal.persistence", self.persistence),
            ("anneal.move_retries", self.move_retries),
        ] {
            if v < 1 {
                return Err(Error::validation(path, "must be >= 1"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_for(50.0), 0.0);
        assert_eq!(alpha_for(60.0), 0.0);
        assert!((alpha_for(70.0) - 0.35).abs() < 1e-12);
        assert_eq!(alpha_for(200.0), 0.9);
    }

    #[test]
    fn cost_examples() {
        let nb = NormalizationBounds::new(40.0, 80.0, 100.0, 200.0);
        assert_eq!(anneal_cost(40.0, 100.0, &nb), 0.0);
        assert!((anneal_cost(80.0, 200.0, &nb) - 1.0).abs() < 1e-12);
        let nb = NormalizationBounds::new(60.0, 80.0, 100.0, 200.0);
        assert!((anneal_cost(70.0, 150.0, &nb) - 0.5).abs() < 1e-12);
        let flat = NormalizationBounds::new(70.0, 70.0, 5.0, 5.0);
        assert_eq!(anneal_cost(70.0, 5.0, &flat), 0.0);
    }

    #[test]
    fn acceptance_examples() {
        assert_eq!(acceptance_probability(0.4, 0.4, 0.1).unwrap(), 1.0);
        let p = acceptance_probability(0.2, 0.3, 0.1).unwrap();
        assert!((p - (-1f64).exp()).abs() < 1e-12);
        assert_eq!(acceptance_probability(0.5, 0.1, 0.1).unwrap(), 1.0);
        assert!(acceptance_probability(0.5, 0.1, 0.0).is_err());
        assert!(acceptance_probability(0.5, 0.1, -1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(AnnealConfig::default().validate().is_ok());
        let bad = AnnealConfig {
            decay: 1.0,
            ..AnnealConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealConfig {
            max_iterations: 0,
            ..AnnealConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
