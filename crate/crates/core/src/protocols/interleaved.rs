//! Interleaved-Selectors: levels `i = 1..=L` (`L = ⌈log2 n⌉`) use a k-light
//! (n, 2^i)-selector. Round `t = j·L + i` activates set `(j mod m_i) + 1` of
//! level `i`; its members switch on and those with packets transmit.

use std::sync::Arc;

use super::{ProtocolError, Station};
use crate::selectors::SelectorFamily;
use crate::types::{ChannelObservation, Round, Schedule, StationAction, StationId};

pub fn interleaved_levels(n: usize) -> usize {
    (usize::BITS - (n - 1).leading_zeros()).max(1) as usize
}

/// The `omega = 2^i` of every level that fits in `n`; larger levels always
/// use singletons.
pub fn interleaved_omegas(n: usize) -> Vec<usize> {
    (1..=interleaved_levels(n)).map(|i| 1 << i).filter(|&w| w <= n).collect()
}

/// `(level i, set index)` for round `t`, both 1-based.
pub fn interleaved_schedule(t: Round, lengths: &[usize]) -> (usize, usize) {
    let l = lengths.len() as u64;
    let i = ((t - 1) % l) as usize + 1;
    let j = (t - 1) / l;
    (i, (j % lengths[i - 1] as u64) as usize + 1)
}

#[derive(Clone, Debug)]
pub struct InterleavedSchedule {
    n: usize,
    levels: Arc<Vec<Vec<Vec<u32>>>>,
    lengths: Vec<usize>,
}

impl InterleavedSchedule {
    /// Picks, for every level, the first family with `omega = 2^i` and this
    /// `n`; levels without one fall back to singletons.
    pub fn new(n: usize, families: &[SelectorFamily]) -> Self {
        let levels: Vec<Vec<Vec<u32>>> = (1..=interleaved_levels(n))
            .map(|i| {
                let family = families.iter().find(|f| f.n == n && f.omega == 1 << i);
                let mut sets = match family {
                    Some(f) => f.sets.clone(),
                    None => SelectorFamily::singletons(n, 1 << i).sets,
                };
                sets.iter_mut().for_each(|s| s.sort_unstable());
                sets
            })
            .collect();
        let lengths = levels.iter().map(Vec::len).collect();
        InterleavedSchedule { n, levels: Arc::new(levels), lengths }
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn active_set(&self, round: Round) -> &[u32] {
        let (i, idx) = interleaved_schedule(round, &self.lengths);
        &self.levels[i - 1][idx - 1]
    }
}

impl Schedule for InterleavedSchedule {
    fn n(&self) -> usize {
        self.n
    }

    fn on_set(&self, round: Round) -> Vec<StationId> {
        self.active_set(round).iter().map(|&s| StationId::from_index(s as usize - 1)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct InterleavedStation {
    id: StationId,
    schedule: InterleavedSchedule,
}

impl InterleavedStation {
    pub fn new(id: StationId, schedule: InterleavedSchedule) -> Self {
        InterleavedStation { id, schedule }
    }
}

impl Station for InterleavedStation {
    fn id(&self) -> StationId {
        self.id
    }

    fn decide(&mut self, round: Round, queue_len: u64) -> Result<StationAction, ProtocolError> {
        let member = self.schedule.active_set(round).binary_search(&self.id.get()).is_ok();
        Ok(match (member, queue_len > 0) {
            (false, _) => StationAction::Off,
            (true, true) => StationAction::TransmitAttempt(None),
            (true, false) => StationAction::Listen,
        })
    }

    fn observe(&mut self, _: Round, _: &ChannelObservation, _: bool, _: u64) -> Result<(), ProtocolError> {
        Ok(())
    }
}
