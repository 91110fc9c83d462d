//! Centralised comparator: every round the station with the longest queue
//! transmits.

use super::{Protocol, ProtocolError};
use crate::types::{ChannelObservation, Restrain, Round, StationAction, StationId};

/// Lowest-id station among those with the maximum queue; `None` if all are
/// empty.
pub fn state_aware_choose(queues: &[u64]) -> Option<StationId> {
    let (idx, &max) = queues.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
    (max > 0).then(|| StationId::from_index(idx))
}

#[derive(Clone, Debug)]
pub struct StateAware {
    n: usize,
}

impl StateAware {
    pub fn new(n: usize) -> Self {
        StateAware { n }
    }
}

impl Protocol for StateAware {
    fn label(&self) -> String {
        "state_aware".into()
    }

    fn n(&self) -> usize {
        self.n
    }

    fn declared_restrain(&self) -> Restrain {
        Restrain::Limited(1)
    }

    fn decide(&mut self, _round: Round, queues: &[u64], actions: &mut [StationAction]) -> Result<(), ProtocolError> {
        actions.fill(StationAction::Off);
        if let Some(s) = state_aware_choose(queues) {
            actions[s.index()] = StationAction::TransmitAttempt(None);
        }
        Ok(())
    }

    fn observe(&mut self, _: Round, _: &ChannelObservation, _: &[StationAction], _: &[u64]) -> Result<(), ProtocolError> {
        Ok(())
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}
