//! Station behaviour.
//!
//! Distributed protocols implement [`Station`]: each station sees only its
//! own queue length and, when switched on, the channel feedback. The engine
//! drives a whole system through [`Protocol`]; [`Stations`] adapts a vector of
//! stations to it. The State-aware comparator implements [`Protocol`]
//! directly because it reads every queue.

use std::any::Any;
use std::fmt;

use thiserror::Error;

use crate::config::{ProtocolConfig, ValidatedConfig};
use crate::types::{ChannelObservation, Restrain, Round, Schedule, StationAction, StationId};

mod adaptive;
mod backoff;
mod fullsensing;
mod interleaved;
mod round_robin;
mod state_aware;

pub use adaptive::{AdaptiveState, AdaptiveStation};
pub use backoff::{backoff_window, BackoffStation, WINDOW_CAP};
pub use fullsensing::{FullSensingState, FullSensingStation};
pub use interleaved::{interleaved_levels, interleaved_omegas, interleaved_schedule, InterleavedSchedule, InterleavedStation};
pub use round_robin::{round_robin_turn, RoundRobinSchedule, RoundRobinStation};
pub use state_aware::{state_aware_choose, StateAware};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ProtocolError {
    pub round: Round,
    pub station: Option<StationId>,
    pub detail: String,
}

impl ProtocolError {
    pub fn new(round: Round, station: Option<StationId>, detail: impl Into<String>) -> Self {
        ProtocolError { round, station, detail: detail.into() }
    }
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "protocol invariant broken at round {}", self.round)?;
        if let Some(s) = self.station {
            write!(f, " (station {s})")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// One station of a distributed protocol.
pub trait Station: Send {
    fn id(&self) -> StationId;

    /// Action for `round` given the station's own queue length (after this
    /// round's injections).
    fn decide(&mut self, round: Round, queue_len: u64) -> Result<StationAction, ProtocolError>;

    /// Channel feedback for a round in which the station was switched on.
    /// `own_ack` is true iff the station transmitted alone; `queue_len` is
    /// its queue after delivery.
    fn observe(
        &mut self,
        round: Round,
        observation: &ChannelObservation,
        own_ack: bool,
        queue_len: u64,
    ) -> Result<(), ProtocolError>;

    /// Station order the station believes in, as of the end of `round`.
    fn local_list(&self, _round: Round) -> Option<Vec<StationId>> {
        None
    }

    /// System-wide sanity check run after every decide phase.
    fn check_system(_stations: &[Self], _round: Round) -> Result<(), ProtocolError>
    where
        Self: Sized,
    {
        Ok(())
    }
}

/// A whole system of `n` stations as seen by the engine.
pub trait Protocol: Send {
    fn label(&self) -> String;
    fn n(&self) -> usize;
    fn declared_restrain(&self) -> Restrain;

    /// Fills `actions[i]` for station `i + 1`.
    fn decide(&mut self, round: Round, queues: &[u64], actions: &mut [StationAction]) -> Result<(), ProtocolError>;

    /// Feedback to every switched-on station; `queues` are post-delivery.
    fn observe(
        &mut self,
        round: Round,
        observation: &ChannelObservation,
        actions: &[StationAction],
        queues: &[u64],
    ) -> Result<(), ProtocolError>;

    /// Offline on-set oracle; only acknowledgment-based protocols have one.
    fn schedule(&self) -> Option<&dyn Schedule> {
        None
    }

    /// Every station's local list at the end of `round`, if the protocol
    /// keeps one.
    fn local_lists(&self, _round: Round) -> Option<Vec<Vec<StationId>>> {
        None
    }

    /// For inspecting the concrete type, e.g. `Stations<FullSensingStation>`.
    fn as_any(&self) -> &dyn Any;
}

/// Adapter from per-station state machines to [`Protocol`].
pub struct Stations<S> {
    label: String,
    restrain: Restrain,
    stations: Vec<S>,
    schedule: Option<Box<dyn Schedule + Send>>,
}

impl<S: Station> Stations<S> {
    pub fn new(label: impl Into<String>, restrain: Restrain, stations: Vec<S>) -> Self {
        Stations { label: label.into(), restrain, stations, schedule: None }
    }

    pub fn with_schedule(mut self, schedule: Box<dyn Schedule + Send>) -> Self {
        self.schedule = Some(schedule);
        self
    }

    pub fn stations(&self) -> &[S] {
        &self.stations
    }
}

impl<S: Station + 'static> Protocol for Stations<S> {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn n(&self) -> usize {
        self.stations.len()
    }

    fn declared_restrain(&self) -> Restrain {
        self.restrain
    }

    fn decide(&mut self, round: Round, queues: &[u64], actions: &mut [StationAction]) -> Result<(), ProtocolError> {
        for (i, s) in self.stations.iter_mut().enumerate() {
            actions[i] = s.decide(round, queues[i])?;
        }
        S::check_system(&self.stations, round)
    }

    fn observe(
        &mut self,
        round: Round,
        observation: &ChannelObservation,
        actions: &[StationAction],
        queues: &[u64],
    ) -> Result<(), ProtocolError> {
        for (i, s) in self.stations.iter_mut().enumerate() {
            if !actions[i].is_on() {
                continue;
            }
            let ack = actions[i].is_transmit()
                && matches!(observation, ChannelObservation::Single { sender, .. } if *sender == s.id());
            s.observe(round, observation, ack, queues[i])?;
        }
        Ok(())
    }

    fn schedule(&self) -> Option<&dyn Schedule> {
        self.schedule.as_deref().map(|s| s as &dyn Schedule)
    }

    fn local_lists(&self, round: Round) -> Option<Vec<Vec<StationId>>> {
        self.stations.iter().map(|s| s.local_list(round)).collect()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// Restrain a protocol is designed for. Interleaved families must already be
/// inlined (as after validation).
pub fn declared_restrain(protocol: &ProtocolConfig) -> Restrain {
    match protocol {
        ProtocolConfig::Adaptive => Restrain::Limited(2),
        ProtocolConfig::Fullsensing | ProtocolConfig::FullsensingMod { .. } => Restrain::Limited(3),
        ProtocolConfig::RoundRobin | ProtocolConfig::StateAware => Restrain::Limited(1),
        ProtocolConfig::Interleaved { families, .. } => {
            let k = families.iter().flatten().map(|f| f.k.max(f.max_set_size())).max().unwrap_or(1);
            Restrain::Limited(k.max(1) as u32)
        }
        ProtocolConfig::Backoff { .. } => Restrain::Unbounded,
    }
}

/// Instantiates the protocol named by a validated config.
pub fn build_protocol(cfg: &ValidatedConfig) -> Box<dyn Protocol> {
    let n = cfg.n();
    let restrain = declared_restrain(cfg.protocol());
    let label = cfg.protocol().label();
    let ids = (0..n).map(StationId::from_index);
    match cfg.protocol() {
        ProtocolConfig::Adaptive => {
            Box::new(Stations::new(label, restrain, ids.map(|id| AdaptiveStation::new(id, n)).collect()))
        }
        ProtocolConfig::Fullsensing => {
            Box::new(Stations::new(label, restrain, ids.map(|id| FullSensingStation::new(id, n, 0)).collect()))
        }
        ProtocolConfig::FullsensingMod { k } => {
            Box::new(Stations::new(label, restrain, ids.map(|id| FullSensingStation::new(id, n, *k)).collect()))
        }
        ProtocolConfig::RoundRobin => Box::new(
            Stations::new(label, restrain, ids.map(|id| RoundRobinStation::new(id, n)).collect())
                .with_schedule(Box::new(RoundRobinSchedule { n })),
        ),
        ProtocolConfig::Interleaved { families, .. } => {
            let schedule = InterleavedSchedule::new(n, families.as_deref().unwrap_or(&[]));
            let stations = ids.map(|id| InterleavedStation::new(id, schedule.clone())).collect();
            Box::new(Stations::new(label, restrain, stations).with_schedule(Box::new(schedule)))
        }
        ProtocolConfig::Backoff { kind } => {
            let kind = kind.expect("validated");
            let seed = cfg.seed();
            Box::new(Stations::new(label, restrain, ids.map(|id| BackoffStation::new(id, kind, seed)).collect()))
        }
        ProtocolConfig::StateAware => Box::new(StateAware::new(n)),
    }
}
