use super::{ProtocolError, Station};
use crate::types::{ChannelObservation, Round, Schedule, StationAction, StationId};

/// Station owning `round`: `((round - 1) mod n) + 1`.
pub fn round_robin_turn(round: Round, n: usize) -> StationId {
    StationId::from_index(((round - 1) % n as u64) as usize)
}

#[derive(Clone, Copy, Debug)]
pub struct RoundRobinSchedule {
    pub n: usize,
}

impl Schedule for RoundRobinSchedule {
    fn n(&self) -> usize {
        self.n
    }

    fn on_set(&self, round: Round) -> Vec<StationId> {
        vec![round_robin_turn(round, self.n)]
    }
}

#[derive(Clone, Debug)]
pub struct RoundRobinStation {
    id: StationId,
    n: usize,
}

impl RoundRobinStation {
    pub fn new(id: StationId, n: usize) -> Self {
        RoundRobinStation { id, n }
    }
}

impl Station for RoundRobinStation {
    fn id(&self) -> StationId {
        self.id
    }

    fn decide(&mut self, round: Round, queue_len: u64) -> Result<StationAction, ProtocolError> {
        Ok(if round_robin_turn(round, self.n) != self.id {
            StationAction::Off
        } else if queue_len > 0 {
            StationAction::TransmitAttempt(None)
        } else {
            StationAction::Listen
        })
    }

    fn observe(&mut self, _: Round, _: &ChannelObservation, _: bool, _: u64) -> Result<(), ProtocolError> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turns() {
        assert_eq!(round_robin_turn(1, 4).get(), 1);
        assert_eq!(round_robin_turn(4, 4).get(), 4);
        assert_eq!(round_robin_turn(5, 4).get(), 1);
        let rounds: Vec<Round> = (1..=12).filter(|&r| round_robin_turn(r, 4).get() == 3).collect();
        assert_eq!(rounds, vec![3, 7, 11]);
    }
}
