//! JSON run configuration and its validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::TargetDistribution;
use crate::selectors::{load_families, SelectorFamily};
use crate::types::Restrain;

pub const DEFAULT_BURST_P: f64 = 0.5;
pub const DEFAULT_STOCK_B: u64 = 256;

fn default_burst_p() -> f64 {
    DEFAULT_BURST_P
}

fn default_stock_b() -> u64 {
    DEFAULT_STOCK_B
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackoffKind {
    Exponential,
    Linear,
    Square,
}

impl BackoffKind {
    pub const ALL: [BackoffKind; 3] = [BackoffKind::Exponential, BackoffKind::Linear, BackoffKind::Square];

    pub fn name(self) -> &'static str {
        match self {
            BackoffKind::Exponential => "exponential",
            BackoffKind::Linear => "linear",
            BackoffKind::Square => "square",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolConfig {
    Adaptive,
    Fullsensing,
    FullsensingMod {
        k: u32,
    },
    RoundRobin,
    Interleaved {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        selector_file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        families: Option<Vec<SelectorFamily>>,
    },
    Backoff {
        #[serde(default)]
        kind: Option<BackoffKind>,
    },
    StateAware,
}

impl ProtocolConfig {
    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            ProtocolConfig::Adaptive => "adaptive".into(),
            ProtocolConfig::Fullsensing => "fullsensing".into(),
            ProtocolConfig::FullsensingMod { k } => format!("fullsensing_mod({k})"),
            ProtocolConfig::RoundRobin => "round_robin".into(),
            ProtocolConfig::Interleaved { .. } => "interleaved".into(),
            ProtocolConfig::Backoff { kind: Some(kind) } => format!("backoff({})", kind.name()),
            ProtocolConfig::Backoff { kind: None } => "backoff".into(),
            ProtocolConfig::StateAware => "state_aware".into(),
        }
    }

    fn allows_unbounded(&self) -> bool {
        matches!(self, ProtocolConfig::Backoff { .. } | ProtocolConfig::StateAware)
    }
}

/// One simulation run as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub protocol: ProtocolConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restrain_limit: Option<Restrain>,
    pub rho: f64,
    #[serde(default = "default_burst_p")]
    pub burst_p: f64,
    #[serde(default = "default_stock_b")]
    pub stock_b: u64,
    #[serde(default)]
    pub distribution: TargetDistribution,
    pub rounds: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_queues: Option<Vec<u64>>,
}

impl SimConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(n: usize, protocol: ProtocolConfig, rho: f64, rounds: u64, seed: u64) -> Self {
        SimConfig {
            n,
            protocol,
            restrain_limit: None,
            rho,
            burst_p: DEFAULT_BURST_P,
            stock_b: DEFAULT_STOCK_B,
            distribution: TargetDistribution::Focused,
            rounds,
            seed: Some(seed),
            initial_queues: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }
}

/// A config that passed [`validate_config`]: every optional field is filled
/// in and interleaved selector families are inlined.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedConfig(SimConfig);

impl ValidatedConfig {
    pub fn raw(&self) -> &SimConfig {
        &self.0
    }

    pub fn into_raw(self) -> SimConfig {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn protocol(&self) -> &ProtocolConfig {
        &self.0.protocol
    }

    pub fn restrain(&self) -> Restrain {
        self.0.restrain_limit.expect("filled by validation")
    }

    pub fn seed(&self) -> u64 {
        self.0.seed.expect("filled by validation")
    }

    pub fn rounds(&self) -> u64 {
        self.0.rounds
    }

    pub fn initial_queues(&self) -> &[u64] {
        self.0.initial_queues.as_deref().expect("filled by validation")
    }

    /// Same run with a different seed.
    pub fn with_seed(&self, seed: u64) -> ValidatedConfig {
        let mut raw = self.0.clone();
        raw.seed = Some(seed);
        ValidatedConfig(raw)
    }

    /// Same run with a different horizon.
    pub fn with_rounds(&self, rounds: u64) -> ValidatedConfig {
        let mut raw = self.0.clone();
        raw.rounds = rounds;
        ValidatedConfig(raw)
    }
}

impl fmt::Display for ValidatedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.0;
        write!(f, "{} n={} k={} rho={} seed={}", c.protocol.label(), c.n, self.restrain(), c.rho, self.seed())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid config JSON: {0}")]
    Parse(String),
    #[error("{field} out of range: expected {bound}")]
    Range { field: &'static str, bound: String },
    #[error("missing parameter: {0}")]
    MissingParameter(String),
    #[error("selector file {path}: {reason}")]
    SelectorFile { path: String, reason: String },
    #[error("selector family: {0}")]
    Selector(String),
}

fn range(field: &'static str, bound: &str) -> ConfigError {
    ConfigError::Range { field, bound: bound.to_owned() }
}

/// Checks every field, fills defaults and returns the normalized config.
/// Relative selector paths resolve against the current directory.
pub fn validate_config(raw: &SimConfig) -> Result<ValidatedConfig, ConfigError> {
    validate_config_in(raw, Path::new("."))
}

/// Like [`validate_config`] with relative selector paths resolved against
/// `base_dir` (typically the config file's directory).
pub fn validate_config_in(raw: &SimConfig, base_dir: &Path) -> Result<ValidatedConfig, ConfigError> {
    let mut c = raw.clone();
    let n = c.n;
    if n < 2 {
        return Err(range("n", ">= 2"));
    }
    if !(c.rho > 0.0 && c.rho <= 1.0) {
        return Err(range("rho", "(0, 1]"));
    }
    if !(c.burst_p > 0.0 && c.burst_p <= 1.0) {
        return Err(range("burst_p", "(0, 1]"));
    }
    if c.stock_b < 1 {
        return Err(range("stock_b", ">= 1"));
    }
    if c.rounds < 1 {
        return Err(range("rounds", ">= 1"));
    }
    if c.seed.is_none() {
        return Err(ConfigError::MissingParameter("seed".into()));
    }
    match &c.initial_queues {
        None => c.initial_queues = Some(vec![0; n]),
        Some(q) if q.len() != n => return Err(range("initial_queues", "one entry per station")),
        Some(_) => {}
    }
    match &c.distribution {
        TargetDistribution::SingleStation { target } if *target < 1 || *target as usize > n => {
            return Err(range("distribution.target", "station id in 1..=n"));
        }
        TargetDistribution::Plan(entries) => {
            for e in entries {
                if e.round < 1 {
                    return Err(range("distribution.plan.round", ">= 1"));
                }
                if e.station < 1 || e.station as usize > n {
                    return Err(range("distribution.plan.station", "station id in 1..=n"));
                }
            }
        }
        _ => {}
    }

    match &mut c.protocol {
        ProtocolConfig::FullsensingMod { k } if *k < 1 => return Err(range("protocol.fullsensing_mod.k", ">= 1")),
        ProtocolConfig::Backoff { kind: None } => {
            return Err(ConfigError::MissingParameter("protocol.backoff.kind".into()));
        }
        ProtocolConfig::Interleaved { selector_file, families } => {
            let mut all = match (selector_file.take(), families.take()) {
                (None, None) => {
                    return Err(ConfigError::MissingParameter("protocol.interleaved selector_file or families".into()))
                }
                (Some(_), Some(_)) => {
                    return Err(ConfigError::Range {
                        field: "protocol.interleaved",
                        bound: "either selector_file or families, not both".into(),
                    })
                }
                (Some(path), None) => {
                    let full = if path.is_absolute() { path.clone() } else { base_dir.join(&path) };
                    load_families(&full).map_err(|e| ConfigError::SelectorFile {
                        path: path.display().to_string(),
                        reason: e.to_string(),
                    })?
                }
                (None, Some(f)) => f,
            };
            // Families built for other system sizes are ignored: a file may
            // carry selectors for several n.
            all.retain(|f| f.n == n);
            for f in &all {
                f.check().map_err(|e| ConfigError::Selector(e.to_string()))?;
            }
            *families = Some(all);
        }
        _ => {}
    }

    match c.restrain_limit {
        None => c.restrain_limit = Some(crate::protocols::declared_restrain(&c.protocol)),
        Some(Restrain::Limited(0)) => return Err(range("restrain_limit", ">= 1 or \"unbounded\"")),
        Some(Restrain::Unbounded) if !c.protocol.allows_unbounded() => {
            return Err(range("restrain_limit", "an integer for this protocol (\"unbounded\" only for backoff and state_aware)"));
        }
        Some(_) => {}
    }
    Ok(ValidatedConfig(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> SimConfig {
        SimConfig::from_json(s).unwrap()
    }

    #[test]
    fn round_robin_defaults() {
        let c = parse(r#"{"n":32,"rho":0.5,"burst_p":0.5,"stock_b":256,"protocol":"round_robin","rounds":1000,"seed":7}"#);
        let v = validate_config(&c).unwrap();
        assert_eq!(v.restrain(), Restrain::Limited(1));
        assert_eq!(v.initial_queues(), &[0; 32][..]);
        assert_eq!(v.raw().distribution, TargetDistribution::Focused);
    }

    #[test]
    fn rho_one_is_valid() {
        let c = parse(r#"{"n":2,"rho":1.0,"protocol":"adaptive","rounds":10,"seed":1}"#);
        assert!(validate_config(&c).is_ok());
    }

    #[test]
    fn rho_out_of_range() {
        let c = parse(r#"{"n":32,"rho":1.5,"protocol":"adaptive","rounds":10,"seed":1}"#);
        assert_eq!(validate_config(&c).unwrap_err(), range("rho", "(0, 1]"));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(SimConfig::from_json(r#"{"n":4,"rho":0.5,"protocol":"adaptive","rounds":1,"seed":1,"colour":3}"#).is_err());
    }

    #[test]
    fn unbounded_only_for_backoff_and_state_aware() {
        let mut c = parse(r#"{"n":4,"rho":0.5,"protocol":"adaptive","rounds":1,"seed":1,"restrain_limit":"unbounded"}"#);
        assert!(matches!(validate_config(&c), Err(ConfigError::Range { field: "restrain_limit", .. })));
        c.protocol = ProtocolConfig::StateAware;
        assert!(validate_config(&c).is_ok());
        c.protocol = ProtocolConfig::Backoff { kind: Some(BackoffKind::Square) };
        assert!(validate_config(&c).is_ok());
    }

    #[test]
    fn protocol_parameters() {
        let c = parse(r#"{"n":4,"rho":0.5,"protocol":{"backoff":{}},"rounds":1,"seed":1}"#);
        assert!(matches!(validate_config(&c), Err(ConfigError::MissingParameter(_))));
        let c = parse(r#"{"n":4,"rho":0.5,"protocol":{"interleaved":{}},"rounds":1,"seed":1}"#);
        assert!(matches!(validate_config(&c), Err(ConfigError::MissingParameter(_))));
        let c = parse(r#"{"n":4,"rho":0.5,"protocol":{"fullsensing_mod":{"k":2}},"rounds":1,"seed":1}"#);
        assert_eq!(validate_config(&c).unwrap().restrain(), Restrain::Limited(3));
        let c = parse(r#"{"n":4,"rho":0.5,"protocol":{"backoff":{"kind":"linear"}},"rounds":1,"seed":1}"#);
        assert_eq!(validate_config(&c).unwrap().restrain(), Restrain::Unbounded);
    }

    #[test]
    fn missing_seed() {
        let c = parse(r#"{"n":4,"rho":0.5,"protocol":"adaptive","rounds":1}"#);
        assert_eq!(validate_config(&c).unwrap_err(), ConfigError::MissingParameter("seed".into()));
    }

    #[test]
    fn validation_is_idempotent() {
        let c = parse(
            r#"{"n":4,"rho":0.5,"protocol":{"interleaved":{"families":[{"n":4,"omega":2,"k":1,"sets":[[1],[2],[3],[4]]}]}},"rounds":1,"seed":1}"#,
        );
        let v = validate_config(&c).unwrap();
        assert_eq!(validate_config(v.raw()).unwrap(), v);
    }
}
