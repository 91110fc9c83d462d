//! Packet injection.
//!
//! The stochastic adversary keeps a stock of withheld packets. Each round it
//! first adds one packet to the stock with probability `rho`, then releases the
//! whole stock with probability `burst_p`, or unconditionally once the stock
//! has reached `stock_b`. Released packets pick their target station
//! independently from a [`TargetDistribution`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{Round, Schedule, StationId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanEntry {
    pub round: Round,
    pub station: u32,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetDistribution {
    /// Stations 1 and 2 get `1/3 + 1/(3n)` each, the rest `1/(3n)`.
    #[default]
    Focused,
    Flat,
    SingleStation { target: u32 },
    /// Fixed injections; the stochastic stock is not used.
    Plan(Vec<PlanEntry>),
}

impl TargetDistribution {
    /// Exact target probabilities, for tests and documentation.
    pub fn probabilities(&self, n: usize) -> Vec<f64> {
        match self {
            TargetDistribution::Focused => (1..=n)
                .map(|i| {
                    let tail = 1.0 / (3.0 * n as f64);
                    if i <= 2 {
                        1.0 / 3.0 + tail
                    } else {
                        tail
                    }
                })
                .collect(),
            TargetDistribution::Flat => vec![1.0 / n as f64; n],
            TargetDistribution::SingleStation { target } => {
                (1..=n).map(|i| if i as u32 == *target { 1.0 } else { 0.0 }).collect()
            }
            TargetDistribution::Plan(_) => vec![0.0; n],
        }
    }

    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> usize {
        match self {
            // Integer sampling of the focused law: out of 3n equally likely
            // tickets, stations 1 and 2 hold n+1 each and the others one.
            TargetDistribution::Focused => {
                let j = rng.gen_range(0..3 * n);
                if j < n + 1 {
                    0
                } else if j < 2 * n + 2 {
                    1
                } else {
                    j - (2 * n + 2) + 2
                }
            }
            TargetDistribution::Flat => rng.gen_range(0..n),
            TargetDistribution::SingleStation { target } => *target as usize - 1,
            TargetDistribution::Plan(_) => unreachable!("plans do not draw targets"),
        }
    }
}

/// Per-station packet counts injected in one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionVector {
    pub counts: Vec<u64>,
}

impl InjectionVector {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryState {
    pub n: usize,
    pub rho: f64,
    pub burst_p: f64,
    pub stock_b: u64,
    pub stock: u64,
    pub distribution: TargetDistribution,
    plan_cursor: usize,
}

impl AdversaryState {
    pub fn new(n: usize, rho: f64, burst_p: f64, stock_b: u64, distribution: TargetDistribution) -> Self {
        let distribution = match distribution {
            TargetDistribution::Plan(mut entries) => {
                entries.sort_by_key(|e| (e.round, e.station));
                TargetDistribution::Plan(entries)
            }
            d => d,
        };
        AdversaryState { n, rho, burst_p, stock_b, stock: 0, distribution, plan_cursor: 0 }
    }

    /// Adds this round's injections to `out` (length `n`) and returns how
    /// many packets were released.
    pub fn step_into<R: Rng + ?Sized>(&mut self, round: Round, rng: &mut R, out: &mut [u64]) -> u64 {
        if let TargetDistribution::Plan(entries) = &self.distribution {
            let mut total = 0;
            while let Some(e) = entries.get(self.plan_cursor) {
                if e.round > round {
                    break;
                }
                if e.round == round {
                    out[e.station as usize - 1] += e.count;
                    total += e.count;
                }
                self.plan_cursor += 1;
            }
            return total;
        }

        if rng.gen::<f64>() < self.rho {
            self.stock += 1;
        }
        let burst = rng.gen::<f64>() < self.burst_p;
        if !(burst || self.stock >= self.stock_b) {
            return 0;
        }
        let released = std::mem::take(&mut self.stock);
        for _ in 0..released {
            out[self.distribution.draw(self.n, rng)] += 1;
        }
        released
    }
}

pub fn adversary_step<R: Rng + ?Sized>(state: &mut AdversaryState, round: Round, rng: &mut R) -> InjectionVector {
    let mut counts = vec![0; state.n];
    state.step_into(round, rng, &mut counts);
    InjectionVector { counts }
}

/// First window `[t1, t2]` (1-based, earliest `t2`, then earliest `t1`) whose
/// injections exceed `rho * (t2 - t1 + 1) + b`.
pub fn validate_leaky_bucket(trace: &[u64], rho: f64, b: f64) -> Result<(), (Round, Round)> {
    // excess(t1, t2) = P(t2) - P(t1 - 1) with P(t) = S(t) - rho * t, so the
    // worst window ending at t2 starts right after the minimum of P.
    let mut prefix: u64 = 0;
    let mut min_p = 0.0_f64;
    let mut min_at: u64 = 0;
    for (i, &x) in trace.iter().enumerate() {
        let t = i as u64 + 1;
        prefix += x;
        let p = prefix as f64 - rho * t as f64;
        if p - min_p > b + 1e-9 {
            return Err((min_at + 1, t));
        }
        if p < min_p {
            min_p = p;
            min_at = t;
        }
    }
    Ok(())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AttackError {
    #[error("protocol has no offline schedule (not acknowledgment-based)")]
    ScheduleUnavailable,
}

/// Injects `floor(tau * k / n) + 1` packets at round 1 into the station with
/// the fewest scheduled on-rounds in `[1, tau]` (lowest id on ties).
pub fn min_schedule_attack(
    schedule: Option<&dyn Schedule>,
    tau: u64,
    k: u64,
) -> Result<TargetDistribution, AttackError> {
    let schedule = schedule.ok_or(AttackError::ScheduleUnavailable)?;
    let n = schedule.n();
    let mut slots = vec![0u64; n];
    for r in 1..=tau {
        for s in schedule.on_set(r) {
            slots[s.index()] += 1;
        }
    }
    let (idx, _) = slots.iter().enumerate().min_by_key(|&(i, &c)| (c, i)).expect("n >= 1");
    let count = tau * k / n as u64 + 1;
    Ok(TargetDistribution::Plan(vec![PlanEntry {
        round: 1,
        station: StationId::from_index(idx).get(),
        count,
    }]))
}
