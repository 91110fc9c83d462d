//! Backoff without window reset on failure. The attempt counter belongs to
//! the packet at the head of the queue and resets after a delivery.

use rand::Rng;

use super::{ProtocolError, Station};
use crate::config::BackoffKind;
use crate::rng::{derive_stream, RandomStream};
use crate::types::{ChannelObservation, Round, StationAction, StationId};

pub const WINDOW_CAP: u64 = 2048;

/// `max(1, min(2048, f(i)))` with `f` = `2^i`, `2i` or `2i²`.
pub fn backoff_window(kind: BackoffKind, i: u32) -> u64 {
    let raw = match kind {
        BackoffKind::Exponential => 1u64.checked_shl(i).unwrap_or(u64::MAX),
        BackoffKind::Linear => 2 * i as u64,
        BackoffKind::Square => (i as u64).saturating_mul(i as u64).saturating_mul(2),
    };
    raw.clamp(1, WINDOW_CAP)
}

#[derive(Clone, Debug)]
pub struct BackoffStation {
    id: StationId,
    kind: BackoffKind,
    attempts: u32,
    slot: Option<Round>,
    rng: RandomStream,
}

impl BackoffStation {
    pub fn new(id: StationId, kind: BackoffKind, seed: u64) -> Self {
        BackoffStation { id, kind, attempts: 0, slot: None, rng: derive_stream(seed, &format!("backoff.{}", id.get())) }
    }

    pub fn attempts(&self) -> u32 {
        self.attempts
    }

    pub fn scheduled_slot(&self) -> Option<Round> {
        self.slot
    }

    pub fn window(&self) -> u64 {
        backoff_window(self.kind, self.attempts)
    }

    fn draw(&mut self, first: Round) {
        let w = self.window();
        self.slot = Some(first + self.rng.gen_range(0..w));
    }
}

impl Station for BackoffStation {
    fn id(&self) -> StationId {
        self.id
    }

    fn decide(&mut self, round: Round, queue_len: u64) -> Result<StationAction, ProtocolError> {
        if queue_len == 0 {
            return Ok(StationAction::Off);
        }
        if self.slot.is_none() {
            self.draw(round);
        }
        Ok(if self.slot == Some(round) { StationAction::TransmitAttempt(None) } else { StationAction::Off })
    }

    fn observe(&mut self, round: Round, _: &ChannelObservation, own_ack: bool, _: u64) -> Result<(), ProtocolError> {
        if own_ack {
            self.attempts = 0;
            self.slot = None;
        } else {
            self.attempts = self.attempts.saturating_add(1);
            self.draw(round + 1);
        }
        Ok(())
    }
}
