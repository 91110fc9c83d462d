//! The round loop.
//!
//! Each round: (1) the adversary injects, (2) every station decides,
//! (3) the channel is resolved, (4) a lone transmitter delivers one packet,
//! (5) switched-on stations observe the feedback (the transmitter gets its
//! ack), (6) the on-mode count is checked against the restrain limit and the
//! protocol's declared restrain, (7) metrics are updated. Packet conservation
//! is asserted after every round.

use thiserror::Error;

use crate::adversary::AdversaryState;
use crate::config::ValidatedConfig;
use crate::metrics::{MetricsAccumulator, Summary};
use crate::protocols::{build_protocol, Protocol, ProtocolError};
use crate::rng::{derive_stream, RandomStream};
use crate::types::{AdaptiveBits, ChannelObservation, Restrain, Round, StationAction, StationId};

pub fn resolve_channel(attempts: &[(StationId, Option<AdaptiveBits>)]) -> ChannelObservation {
    match attempts {
        [] => ChannelObservation::Silence,
        [(sender, bits)] => ChannelObservation::Single { sender: *sender, bits: *bits },
        _ => ChannelObservation::Collision,
    }
}

/// Number of switched-on stations, or the violation.
pub fn restrain_check(actions: &[StationAction], limit: Restrain) -> Result<usize, (usize, Restrain)> {
    let on = actions.iter().filter(|a| a.is_on()).count();
    if limit.allows(on) {
        Ok(on)
    } else {
        Err((on, limit))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("restrain violated at round {round}: {count} stations on, limit {limit}")]
    RestrainViolation { round: Round, count: usize, limit: Restrain },
    #[error(transparent)]
    ProtocolInvariantBroken(#[from] ProtocolError),
    #[error("conservation broken at round {round}: injected {injected}, delivered {delivered}, queued {queued}")]
    Conservation { round: Round, injected: u64, delivered: u64, queued: u64 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Includes the initial queues.
    pub injected: u64,
    pub delivered: u64,
    pub collisions: u64,
    pub silent_rounds: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundReport {
    pub round: Round,
    pub observation: ChannelObservation,
    pub on_mode: usize,
    pub attempts: usize,
    pub injected: u64,
    pub delivered: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub summary: Summary,
    pub counters: Counters,
    pub final_queues: Vec<u64>,
}

pub struct Simulation {
    n: usize,
    round: Round,
    queues: Vec<u64>,
    protocol: Box<dyn Protocol>,
    adversary: AdversaryState,
    adversary_rng: RandomStream,
    limit: Restrain,
    metrics: MetricsAccumulator,
    counters: Counters,
    actions: Vec<StationAction>,
    injections: Vec<u64>,
    attempts: Vec<(StationId, Option<AdaptiveBits>)>,
}

impl Simulation {
    pub fn new(cfg: &ValidatedConfig) -> Self {
        Self::with_protocol(cfg, build_protocol(cfg))
    }

    /// Drives an arbitrary protocol with the config's channel and adversary.
    pub fn with_protocol(cfg: &ValidatedConfig, protocol: Box<dyn Protocol>) -> Self {
        let raw = cfg.raw();
        let n = cfg.n();
        let queues = cfg.initial_queues().to_vec();
        let counters = Counters { injected: queues.iter().sum(), ..Counters::default() };
        Simulation {
            n,
            round: 0,
            queues,
            protocol,
            adversary: AdversaryState::new(n, raw.rho, raw.burst_p, raw.stock_b, raw.distribution.clone()),
            adversary_rng: derive_stream(cfg.seed(), "adversary"),
            limit: cfg.restrain(),
            metrics: MetricsAccumulator::new(n),
            counters,
            actions: vec![StationAction::Off; n],
            injections: vec![0; n],
            attempts: Vec::with_capacity(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Last completed round (0 before the first).
    pub fn round(&self) -> Round {
        self.round
    }

    pub fn queues(&self) -> &[u64] {
        &self.queues
    }

    pub fn total_queued(&self) -> u64 {
        self.queues.iter().sum()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    pub fn protocol(&self) -> &dyn Protocol {
        self.protocol.as_ref()
    }

    pub fn adversary(&self) -> &AdversaryState {
        &self.adversary
    }

    /// Actions taken in the last completed round.
    pub fn last_actions(&self) -> &[StationAction] {
        &self.actions
    }

    /// Per-station injections of the last completed round.
    pub fn last_injections(&self) -> &[u64] {
        &self.injections
    }

    pub fn step(&mut self) -> Result<RoundReport, SimError> {
        let round = self.round + 1;

        self.injections.fill(0);
        let injected = self.adversary.step_into(round, &mut self.adversary_rng, &mut self.injections);
        for (q, i) in self.queues.iter_mut().zip(&self.injections) {
            *q += i;
        }
        self.counters.injected += injected;

        self.protocol.decide(round, &self.queues, &mut self.actions)?;

        self.attempts.clear();
        for (i, a) in self.actions.iter().enumerate() {
            if let StationAction::TransmitAttempt(bits) = *a {
                let id = StationId::from_index(i);
                if self.queues[i] == 0 {
                    return Err(ProtocolError::new(round, Some(id), "transmission attempt with an empty queue").into());
                }
                self.attempts.push((id, bits));
            }
        }
        let observation = resolve_channel(&self.attempts);

        let delivered = match observation {
            ChannelObservation::Single { sender, .. } => {
                self.queues[sender.index()] -= 1;
                self.counters.delivered += 1;
                true
            }
            ChannelObservation::Collision => {
                self.counters.collisions += 1;
                false
            }
            ChannelObservation::Silence => {
                self.counters.silent_rounds += 1;
                false
            }
        };

        self.protocol.observe(round, &observation, &self.actions, &self.queues)?;

        let on_mode = restrain_check(&self.actions, self.limit)
            .and_then(|on| restrain_check(&self.actions, self.protocol.declared_restrain()).map(|_| on))
            .map_err(|(count, limit)| SimError::RestrainViolation { round, count, limit })?;

        self.metrics.update(&self.queues, on_mode, matches!(observation, ChannelObservation::Collision));

        let queued = self.total_queued();
        if self.counters.injected != self.counters.delivered + queued {
            return Err(SimError::Conservation {
                round,
                injected: self.counters.injected,
                delivered: self.counters.delivered,
                queued,
            });
        }

        self.round = round;
        Ok(RoundReport { round, observation, on_mode, attempts: self.attempts.len(), injected, delivered })
    }

    pub fn run(&mut self, rounds: u64) -> Result<(), SimError> {
        for _ in 0..rounds {
            self.step()?;
        }
        Ok(())
    }

    pub fn result(&self) -> SimResult {
        SimResult { summary: self.metrics.summary(), counters: self.counters, final_queues: self.queues.clone() }
    }
}

/// Runs `cfg.rounds()` rounds and returns the final measurements.
pub fn run_simulation(cfg: &ValidatedConfig) -> Result<SimResult, SimError> {
    let mut sim = Simulation::new(cfg);
    sim.run(cfg.rounds())?;
    Ok(sim.result())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate_config, BackoffKind, ProtocolConfig, SimConfig};
    use crate::protocols::{BackoffStation, Stations};

    fn id(i: u32) -> StationId {
        StationId::from_index(i as usize - 1)
    }

    #[test]
    fn channel_resolution() {
        assert_eq!(resolve_channel(&[]), ChannelObservation::Silence);
        assert_eq!(
            resolve_channel(&[(id(3), Some(AdaptiveBits::PLAIN))]),
            ChannelObservation::Single { sender: id(3), bits: Some(AdaptiveBits::PLAIN) }
        );
        assert_eq!(resolve_channel(&[(id(1), None), (id(2), None)]), ChannelObservation::Collision);
    }

    #[test]
    fn restrain_examples() {
        let pair = [StationAction::TransmitAttempt(None), StationAction::Listen, StationAction::Off];
        assert_eq!(restrain_check(&pair, Restrain::Limited(2)), Ok(2));
        let three = [StationAction::Listen; 3];
        assert_eq!(restrain_check(&three, Restrain::Limited(2)), Err((3, Restrain::Limited(2))));
        assert_eq!(restrain_check(&[StationAction::Listen; 50], Restrain::Unbounded), Ok(50));
    }

    #[test]
    fn zero_rounds() {
        let cfg = validate_config(&SimConfig::new(4, ProtocolConfig::Adaptive, 0.5, 1, 1)).unwrap();
        let mut sim = Simulation::new(&cfg);
        sim.run(0).unwrap();
        let r = sim.result();
        assert_eq!(r.summary.rounds, 0);
        assert_eq!(r.summary.avg_max, 0.0);
        assert_eq!(r.counters.injected, r.counters.delivered + r.final_queues.iter().sum::<u64>());
    }

    #[test]
    fn idle_round_robin_is_silent() {
        let mut raw = SimConfig::new(4, ProtocolConfig::RoundRobin, 0.5, 1, 1);
        raw.distribution = crate::adversary::TargetDistribution::Plan(vec![]);
        let cfg = validate_config(&raw).unwrap();
        let mut sim = Simulation::new(&cfg);
        for _ in 0..8 {
            let rep = sim.step().unwrap();
            assert_eq!(rep.observation, ChannelObservation::Silence);
            assert!(!rep.delivered);
        }
        assert_eq!(sim.counters().delivered, 0);
    }

    #[test]
    fn backoff_collision_bumps_both_counters() {
        let mut raw = SimConfig::new(2, ProtocolConfig::Backoff { kind: Some(BackoffKind::Exponential) }, 0.5, 1, 1);
        raw.distribution = crate::adversary::TargetDistribution::Plan(vec![]);
        raw.initial_queues = Some(vec![1, 1]);
        let cfg = validate_config(&raw).unwrap();
        let stations: Vec<BackoffStation> =
            (1..=2).map(|i| BackoffStation::new(id(i), BackoffKind::Exponential, 1)).collect();
        let mut sim = Simulation::with_protocol(&cfg, Box::new(Stations::new("backoff", Restrain::Unbounded, stations)));
        // Window 1 for a fresh packet: both transmit in round 1.
        let rep = sim.step().unwrap();
        assert_eq!(rep.observation, ChannelObservation::Collision);
        assert_eq!(rep.on_mode, 2);
        assert_eq!(sim.counters().collisions, 1);
    }

    #[test]
    fn restrain_limit_below_declared_fails() {
        let mut raw = SimConfig::new(4, ProtocolConfig::Adaptive, 0.5, 10, 1);
        raw.restrain_limit = Some(Restrain::Limited(1));
        let cfg = validate_config(&raw).unwrap();
        let err = run_simulation(&cfg).unwrap_err();
        assert!(matches!(err, SimError::RestrainViolation { count: 2, .. }));
    }
}
