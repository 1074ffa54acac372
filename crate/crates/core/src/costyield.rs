// SPDX-License-Identifier: Apache-2.0

//! Die yield, assembly yield and package cost.
//!
//! Die yield follows the negative-binomial model
//! `(1 + d0·A/α)^(-α)`; a package pays for each die's share of a wafer
//! (wafer cost over good dies) and divides the sum by the assembly yield
//! `s_die^n_dies · s_conn^n_connections`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::ProcessCostParams;

/// Fraction of dies of `area` mm² that are defect-free.
pub fn die_yield(area: f64, params: &ProcessCostParams) -> f64 {
    (1.0 + params.d0 * area / params.alpha_yield).powf(-params.alpha_yield)
}

/// Gross (untested) dies on a round wafer, with the usual edge-loss term:
/// `⌊π(D/2)²/A − πD/√(2A)⌋`, clamped at zero.
pub fn gross_dies_per_wafer(area: f64, wafer_diameter: f64) -> Result<u64> {
    if !(area > 0.0) {
        return Err(Error::InvalidInput(format!(
            "die area must be > 0 (got {area})"
        )));
    }
    if !(wafer_diameter > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wafer diameter must be > 0 (got {wafer_diameter})"
        )));
    }
    let r = wafer_diameter / 2.0;
    let n = PI * r * r / area - PI * wafer_diameter / (2.0 * area).sqrt();
    Ok(if n > 0.0 { n.floor() as u64 } else { 0 })
}

pub fn assembly_yield(n_dies: u64, n_connections: u64, params: &ProcessCostParams) -> f64 {
    params.assembly_die_survival.powf(n_dies as f64)
        * params.assembly_conn_survival.powf(n_connections as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DieCost {
    pub area: f64,
    pub count: u64,
    pub gross_dies_per_wafer: u64,
    pub die_yield: f64,
    pub cost_per_die: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub dies: Vec<DieCost>,
    pub assembly_yield: f64,
    /// Σ count × cost_per_die, before assembly losses.
    pub die_cost_sum: f64,
    pub package_cost: f64,
}

pub fn die_cost(area: f64, params: &ProcessCostParams) -> Result<DieCost> {
    let gross = gross_dies_per_wafer(area, params.wafer_diameter)?;
    let y = die_yield(area, params);
    let cost_per_die = if params.literal_eq3 {
        params.wafer_cost / y
    } else {
        if gross == 0 {
            return Err(Error::DieExceedsWafer {
                area,
                diameter: params.wafer_diameter,
            });
        }
        params.wafer_cost / (gross as f64 * y)
    };
    Ok(DieCost {
        area,
        count: 1,
        gross_dies_per_wafer: gross,
        die_yield: y,
        cost_per_die,
    })
}

/// Cost of a package holding `count` dies of each listed `area`.
pub fn package_cost(
    dies: &[(f64, u64)],
    n_connections: u64,
    params: &ProcessCostParams,
) -> Result<CostBreakdown> {
    let mut out = Vec::with_capacity(dies.len());
    let mut n_dies = 0;
    for &(area, count) in dies {
        out.push(DieCost {
            count,
            ..die_cost(area, params)?
        });
        n_dies += count;
    }
    let die_cost_sum: f64 = out.iter().map(|d| d.count as f64 * d.cost_per_die).sum();
    let ay = assembly_yield(n_dies, n_connections, params);
    Ok(CostBreakdown {
        dies: out,
        assembly_yield: ay,
        die_cost_sum,
        package_cost: die_cost_sum / ay,
    })
}

/// Monolithic SoC cost over the cost of the equivalent chiplet system.
/// The SoC is a single die with no inter-die connections.
pub fn cost_ratio(
    soc_area: f64,
    chiplet_areas: &[f64],
    n_connections: u64,
    params: &ProcessCostParams,
) -> Result<f64> {
    if chiplet_areas.is_empty() {
        return Err(Error::InvalidInput("chiplet system has no dies".into()));
    }
    let soc = package_cost(&[(soc_area, 1)], 0, params)?;
    let dies: Vec<(f64, u64)> = chiplet_areas.iter().map(|&a| (a, 1)).collect();
    let split = package_cost(&dies, n_connections, params)?;
    Ok(soc.package_cost / split.package_cost)
}
