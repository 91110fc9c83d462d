//! Contention resolution on a k-restrained multiple-access channel.
//!
//! A synchronous slotted channel is shared by `n` stations. In every round at
//! most `k` stations may be switched on (transmitting or listening); a round
//! with exactly one transmission delivers one packet, two or more collide.
//! Packets are injected by an adversary and wait in per-station queues.
//!
//! The crate is organised around the pieces needed to reproduce stability and
//! restrain experiments on such a channel:
//!
//! - [`types`], [`config`], [`rng`]: shared domain types, JSON configuration
//!   and labelled, seed-stable random streams.
//! - [`adversary`]: the stochastic stock/burst injector, leaky-bucket
//!   validation and the minimum-schedule attack against acknowledgment-based
//!   protocols.
//! - [`selectors`]: k-light selector families (random generation, dilution,
//!   Kautz-Singleton superimposed codes, random dispersers and the
//!   disperser/code splicing construction) with brute-force verifiers.
//! - [`protocols`]: 12 O'clock adaptive and full-sensing, Round-Robin,
//!   Interleaved-Selectors, Backoff (exponential/linear/square) and the
//!   centralised State-aware comparator.
//! - [`engine`]: the round loop with conservation and restrain checks.
//! - [`metrics`]: max-max / avg-max / max-avg / avg-avg queue measurements,
//!   channel access averages and stability sweeps.

pub mod adversary;
pub mod config;
pub mod engine;
pub mod metrics;
pub mod protocols;
pub mod rng;
pub mod selectors;
pub mod types;

pub use adversary::{AdversaryState, InjectionVector, PlanEntry, TargetDistribution};
pub use config::{validate_config, BackoffKind, ConfigError, ProtocolConfig, SimConfig, ValidatedConfig};
pub use engine::{run_simulation, RoundReport, SimError, SimResult, Simulation};
pub use metrics::{MetricsAccumulator, StabilityTable, Summary};
pub use rng::{derive_stream, RandomStream};
pub use selectors::SelectorFamily;
pub use types::{AdaptiveBits, ChannelObservation, Restrain, Round, StationAction, StationId};
