//! Sweep files: a base config plus the axes to vary.
//!
//! ```json
//! {
//!   "base": {"n": 32, "protocol": "adaptive", "rho": 0.5, "rounds": 100000},
//!   "n": [8, 16, 32],
//!   "rho": [0.90, 0.91, 0.92],
//!   "reps": 10,
//!   "delta": 1024
//! }
//! ```
//!
//! Missing axes default to the base value. `seeds` lists seeds explicitly;
//! otherwise `reps` consecutive seeds start at the base seed.

use serde::Deserialize;

use channel_lab::metrics::SweepSpec;
use channel_lab::{ProtocolConfig, SimConfig};

fn default_delta() -> f64 {
    1024.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub base: SimConfig,
    #[serde(default)]
    pub protocols: Vec<ProtocolConfig>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub reps: Option<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl SweepFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// `fallback_seed` is used when the base config has none.
    pub fn spec(&self, fallback_seed: Option<u64>) -> Result<SweepSpec, String> {
        let seeds = if !self.seeds.is_empty() {
            self.seeds.clone()
        } else {
            let first = self.base.seed.or(fallback_seed).ok_or("missing parameter: seed")?;
            (first..first + self.reps.unwrap_or(1)).collect()
        };
        if self.reps == Some(0) {
            return Err("reps out of range: expected >= 1".into());
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err("delta out of range: expected > 0".into());
        }
        Ok(SweepSpec {
            base: self.base.clone(),
            protocols: self.protocols.clone(),
            n_values: if self.n.is_empty() { vec![self.base.n] } else { self.n.clone() },
            rho_grid: if self.rho.is_empty() { vec![self.base.rho] } else { self.rho.clone() },
            seeds,
            delta: self.delta,
        })
    }
}
