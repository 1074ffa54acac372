// SPDX-License-Identifier: Apache-2.0

//! Design-space exploration for chiplet-based automotive packages: die cost
//! and yield, tile power, golden-ratio ranking, interposer PHY limits,
//! compact 2.5D thermal analysis and thermally-aware annealing placement.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;

pub mod costyield;
pub mod model;
pub mod perf;
pub mod phy;
pub mod place;
pub mod power;
pub mod report;
pub mod thermal;

pub use error::{Error, Result};
