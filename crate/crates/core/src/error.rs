// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    /// An invariant violation, tagged with the offending field path
    /// (e.g. `chiplets[3].width`).
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("chiplet `{chiplet}` declares a port to unknown peer `{peer}`")]
    UnresolvedPeer { chiplet: String, peer: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("die exceeds wafer: area {area} mm² yields no gross dies on a {diameter} mm wafer")]
    DieExceedsWafer { area: f64, diameter: f64 },

    #[error("skin depth exceeds geometry: 2t - 4δ + 2w = {0} m")]
    SkinDepthExceedsGeometry(f64),

    #[error("thermal solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("unknown layer `{0}`")]
    UnknownLayer(String),

    #[error("floorplan too congested: no legal move after {0} attempts")]
    Congested(usize),

    #[error("infeasible floorplan: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
