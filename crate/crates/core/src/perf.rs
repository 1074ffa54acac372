// SPDX-License-Identifier: Apache-2.0

//! Analytic latency/throughput model and the throughput-per-latency-per-cost
//! ("golden ratio") ranking of candidate configurations.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSpec {
    #[serde(default)]
    pub name: String,
    /// Word width of the requesting core, bits.
    pub word_bits: f64,
    /// bits/s
    pub service_bandwidth: f64,
    /// s
    pub base_latency: f64,
    /// Hz
    pub clock: f64,
    pub channels: u32,
    #[serde(default = "default_k")]
    pub bits_per_channel_per_cycle: f64,
}

fn default_k() -> f64 {
    1.0
}

impl ServiceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if !(self.word_bits >= 0.0) {
            return bad("word_bits must be >= 0");
        }
        if !(self.service_bandwidth > 0.0) {
            return bad("service_bandwidth must be > 0");
        }
        if !(self.base_latency >= 0.0) {
            return bad("base_latency must be >= 0");
        }
        if !(self.clock > 0.0) {
            return bad("clock must be > 0");
        }
        if self.channels < 1 {
            return bad("channels must be >= 1");
        }
        if !(self.bits_per_channel_per_cycle >= 0.0) {
            return bad("bits_per_channel_per_cycle must be >= 0");
        }
        Ok(())
    }
}

/// `b/R + T_i`, in seconds.
pub fn service_latency(s: &ServiceSpec) -> Result<f64> {
    if !(s.service_bandwidth > 0.0) {
        return Err(Error::InvalidInput(format!(
            "service bandwidth must be > 0 (got {})",
            s.service_bandwidth
        )));
    }
    Ok(s.word_bits / s.service_bandwidth + s.base_latency)
}

/// `k · F · channels`, in bits/s.
pub fn throughput(s: &ServiceSpec) -> f64 {
    s.bits_per_channel_per_cycle * s.clock * s.channels as f64
}

pub fn golden_ratio(throughput: f64, latency: f64, cost: f64) -> Result<f64> {
    if !(latency > 0.0) {
        return Err(Error::InvalidInput(format!(
            "latency must be > 0 (got {latency})"
        )));
    }
    if !(cost > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cost must be > 0 (got {cost})"
        )));
    }
    Ok(throughput / (latency * cost))
}

/// Measured metrics of one candidate configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigMetrics {
    pub name: String,
    pub cost: f64,
    pub throughput: f64,
    pub latency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigResult {
    pub name: String,
    pub cost: f64,
    pub throughput: f64,
    pub latency: f64,
    pub golden_ratio: f64,
    /// golden_ratio over the smallest golden_ratio of the set.
    pub relative: f64,
}

/// Ranks configurations by golden ratio, best first; ties are broken by name.
pub fn rank_configs(results: &[ConfigMetrics]) -> Result<Vec<ConfigResult>> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no configurations to rank".into()));
    }
    let mut ranked = results
        .iter()
        .map(|c| {
            Ok(ConfigResult {
                name: c.name.clone(),
                cost: c.cost,
                throughput: c.throughput,
                latency: c.latency,
                golden_ratio: golden_ratio(c.throughput, c.latency, c.cost)?,
                relative: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min = ranked
        .iter()
        .map(|r| r.golden_ratio)
        .fold(f64::INFINITY, f64::min);
    for r in &mut ranked {
        r.relative = if min > 0.0 {
            r.golden_ratio / min
        } else {
            f64::NAN
        };
    }
    ranked.sort_by(|a, b| {
        b.golden_ratio
            .partial_cmp(&a.golden_ratio)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn svc(word_bits: f64, bw: f64, lat: f64) -> ServiceSpec {
        ServiceSpec {
            name: String::new(),
            word_bits,
            service_bandwidth: bw,
            base_latency: lat,
            clock: 2e9,
            channels: 4,
            bits_per_channel_per_cycle: 1.0,
        }
    }

    #[test]
    fn latency_examples() {
        assert_eq!(service_latency(&svc(0.0, 8e9, 0.0)).unwrap(), 0.0);
        assert!((service_latency(&svc(64.0, 8e9, 2e-9)).unwrap() - 1.0e-8).abs() < 1e-20);
        let one = service_latency(&svc(64.0, 8e9, 0.0)).unwrap();
        let two = service_latency(&svc(64.0, 16e9, 0.0)).unwrap();
        assert_eq!(two, one / 2.0);
        assert!(service_latency(&svc(64.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn throughput_examples() {
        assert_eq!(throughput(&svc(64.0, 1.0, 0.0)), 8e9);
        let none = ServiceSpec {
            channels: 0,
            ..svc(64.0, 1.0, 0.0)
        };
        assert_eq!(throughput(&none), 0.0);
        let soc = ServiceSpec {
            channels: 2,
            ..svc(64.0, 1.0, 0.0)
        };
        let chiplet = ServiceSpec {
            channels: 8,
            ..soc.clone()
        };
        assert_eq!(throughput(&chiplet), 4.0 * throughput(&soc));
    }

    #[test]
    fn golden_ratio_guards() {
        assert_eq!(golden_ratio(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(golden_ratio(1.0, 0.0, 1.0).is_err());
        assert!(golden_ratio(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn single_config_is_relative_one() {
        let r = rank_configs(&[ConfigMetrics {
            name: "x".into(),
            cost: 2.0,
            throughput: 3.0,
            latency: 4.0,
        }])
        .unwrap();
        assert_eq!(r[0].relative, 1.0);
        assert!(rank_configs(&[]).is_err());
    }

    #[test]
    fn ties_are_name_ordered() {
        let m = |n: &str| ConfigMetrics {
            name: n.into(),
            cost: 1.0,
            throughput: 1.0,
            latency: 1.0,
        };
        let r = rank_configs(&[m("b"), m("a")]).unwrap();
        assert_eq!(r[0].golden_ratio, r[1].golden_ratio);
        assert_eq!((r[0].name.as_str(), r[1].name.as_str()), ("a", "b"));
    }
}
