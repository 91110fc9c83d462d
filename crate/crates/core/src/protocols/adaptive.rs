//! 12 O'clock adaptive protocol.
//!
//! A token circulates along a list of stations shared by everybody; in each
//! round one station holds it (Transmitting, Big or LastBig) and at most one
//! more listens for the hand-over. A holder with more than 3n packets keeps the
//! token as Big, announced by a control bit. At an end-of-cycle round with at
//! most 3n packets it switches to LastBig, transmits one more full cycle with
//! the last-big bit and then moves itself to the front of the list.

use super::{ProtocolError, Station};
use crate::types::{is_end_of_cycle, AdaptiveBits, ChannelObservation, Round, StationAction, StationId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdaptiveState {
    /// Off for the next `t` rounds, then listening.
    Idle(u64),
    Listening,
    Transmitting,
    Big,
    LastBig { entered: Round },
}

#[derive(Clone, Debug)]
pub struct AdaptiveStation {
    id: StationId,
    n: usize,
    state: AdaptiveState,
    list: Vec<StationId>,
    /// Move-to-front heard from a LastBig station, applied once the given
    /// end-of-cycle round has passed. Deferring keeps every list identical at
    /// cycle boundaries.
    pending_front: Option<(StationId, Round)>,
}

impl AdaptiveStation {
    pub fn new(id: StationId, n: usize) -> Self {
        let state = match id.get() {
            1 => AdaptiveState::Transmitting,
            2 => AdaptiveState::Listening,
            j => AdaptiveState::Idle(j as u64 - 2),
        };
        AdaptiveStation {
            id,
            n,
            state,
            list: (0..n).map(StationId::from_index).collect(),
            pending_front: None,
        }
    }

    pub fn state(&self) -> AdaptiveState {
        self.state
    }

    pub fn holds_token(&self) -> bool {
        matches!(self.state, AdaptiveState::Transmitting | AdaptiveState::Big | AdaptiveState::LastBig { .. })
    }

    fn nn(&self) -> u64 {
        self.n as u64
    }

    fn catch_up(&mut self, round: Round) {
        if let Some((b, due)) = self.pending_front {
            if due < round {
                move_to_front(&mut self.list, b);
                self.pending_front = None;
            }
        }
    }

    fn position(&self, s: StationId) -> usize {
        self.list.iter().position(|&x| x == s).expect("list is a permutation")
    }

    fn broken(&self, round: Round, detail: impl Into<String>) -> ProtocolError {
        ProtocolError::new(round, Some(self.id), detail)
    }
}

pub(crate) fn move_to_front(list: &mut [StationId], s: StationId) {
    let p = list.iter().position(|&x| x == s).expect("list is a permutation");
    list[..=p].rotate_right(1);
}

impl Station for AdaptiveStation {
    fn id(&self) -> StationId {
        self.id
    }

    fn decide(&mut self, round: Round, q: u64) -> Result<StationAction, ProtocolError> {
        self.catch_up(round);
        let big_threshold = 3 * self.nn();
        Ok(match self.state {
            AdaptiveState::Idle(0) => {
                self.state = AdaptiveState::Listening;
                StationAction::Listen
            }
            AdaptiveState::Idle(t) => {
                self.state = AdaptiveState::Idle(t - 1);
                StationAction::Off
            }
            AdaptiveState::Listening => StationAction::Listen,
            AdaptiveState::Transmitting if q > big_threshold => {
                self.state = AdaptiveState::Big;
                StationAction::TransmitAttempt(Some(AdaptiveBits::BIG))
            }
            AdaptiveState::Transmitting if q > 0 => StationAction::TransmitAttempt(Some(AdaptiveBits::PLAIN)),
            // Token without packets: stay on so the round is a clean silence.
            AdaptiveState::Transmitting => StationAction::Listen,
            AdaptiveState::Big if is_end_of_cycle(round, self.n) && q <= big_threshold => {
                self.state = AdaptiveState::LastBig { entered: round };
                StationAction::TransmitAttempt(Some(AdaptiveBits::LAST_BIG))
            }
            AdaptiveState::Big => StationAction::TransmitAttempt(Some(AdaptiveBits::BIG)),
            AdaptiveState::LastBig { .. } => StationAction::TransmitAttempt(Some(AdaptiveBits::LAST_BIG)),
        })
    }

    fn observe(
        &mut self,
        round: Round,
        observation: &ChannelObservation,
        _own_ack: bool,
        _queue_len: u64,
    ) -> Result<(), ProtocolError> {
        let n = self.nn();
        match self.state {
            AdaptiveState::Listening => match *observation {
                ChannelObservation::Silence => self.state = AdaptiveState::Transmitting,
                ChannelObservation::Single { bits: Some(bits), sender } => {
                    if bits.big {
                        self.state = AdaptiveState::Idle(n - 1);
                    } else if bits.last_big {
                        // Stations ahead of the LastBig one shift back one slot.
                        let before = self.position(self.id) < self.position(sender);
                        self.state = AdaptiveState::Idle(if before { n } else { n - 1 });
                        let due = (round / n + 1) * n;
                        match self.pending_front {
                            Some((b, d)) if b != sender || d != due => {
                                return Err(self.broken(round, "two pending list moves"));
                            }
                            _ => self.pending_front = Some((sender, due)),
                        }
                    } else {
                        self.state = AdaptiveState::Transmitting;
                    }
                }
                ChannelObservation::Single { bits: None, .. } => {
                    return Err(self.broken(round, "adaptive packet without control bits"));
                }
                ChannelObservation::Collision => return Err(self.broken(round, "collision heard")),
            },
            AdaptiveState::Transmitting => {
                if matches!(observation, ChannelObservation::Collision) {
                    return Err(self.broken(round, "token holder collided"));
                }
                self.state = AdaptiveState::Idle(n - 2);
            }
            AdaptiveState::Big => {}
            AdaptiveState::LastBig { entered } => {
                if is_end_of_cycle(round, self.n) && round != entered {
                    self.state = AdaptiveState::Transmitting;
                    move_to_front(&mut self.list, self.id);
                }
            }
            AdaptiveState::Idle(_) => return Err(self.broken(round, "idle station observed the channel")),
        }
        Ok(())
    }

    fn local_list(&self, round: Round) -> Option<Vec<StationId>> {
        let mut list = self.list.clone();
        if let Some((b, due)) = self.pending_front {
            if due <= round {
                move_to_front(&mut list, b);
            }
        }
        Some(list)
    }

    fn check_system(stations: &[Self], round: Round) -> Result<(), ProtocolError> {
        let holders = stations.iter().filter(|s| s.holds_token()).count();
        let listeners = stations.iter().filter(|s| s.state == AdaptiveState::Listening).count();
        if holders != 1 || listeners > 1 {
            return Err(ProtocolError::new(
                round,
                None,
                format!("{holders} token holders and {listeners} listeners"),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(id: u32, n: usize) -> AdaptiveStation {
        AdaptiveStation::new(StationId::new(id, n).unwrap(), n)
    }

    #[test]
    fn initial_states() {
        assert_eq!(st(1, 5).state(), AdaptiveState::Transmitting);
        assert_eq!(st(2, 5).state(), AdaptiveState::Listening);
        assert_eq!(st(3, 5).state(), AdaptiveState::Idle(1));
        assert_eq!(st(5, 5).state(), AdaptiveState::Idle(3));
    }

    #[test]
    fn big_threshold() {
        let n = 4;
        let mut s = st(1, n);
        let a = s.decide(1, 3 * n as u64 + 1).unwrap();
        assert_eq!(a, StationAction::TransmitAttempt(Some(AdaptiveBits::BIG)));
        assert_eq!(s.state(), AdaptiveState::Big);

        let mut s = st(1, n);
        let a = s.decide(1, 3 * n as u64).unwrap();
        assert_eq!(a, StationAction::TransmitAttempt(Some(AdaptiveBits::PLAIN)));
        s.observe(1, &ChannelObservation::Single { sender: s.id, bits: Some(AdaptiveBits::PLAIN) }, true, 11)
            .unwrap();
        assert_eq!(s.state(), AdaptiveState::Idle(2));
    }

    #[test]
    fn listener_hearing_big_goes_idle() {
        let mut s = st(2, 4);
        assert_eq!(s.decide(1, 0).unwrap(), StationAction::Listen);
        let big = ChannelObservation::Single { sender: StationId::new(1, 4).unwrap(), bits: Some(AdaptiveBits::BIG) };
        s.observe(1, &big, false, 0).unwrap();
        assert_eq!(s.state(), AdaptiveState::Idle(3));
        assert_eq!(s.decide(2, 0).unwrap(), StationAction::Off);
    }

    #[test]
    fn empty_token_holder_is_silent() {
        let mut s = st(1, 4);
        assert_eq!(s.decide(1, 0).unwrap(), StationAction::Listen);
        s.observe(1, &ChannelObservation::Silence, false, 0).unwrap();
        assert_eq!(s.state(), AdaptiveState::Idle(2));
    }

    #[test]
    fn last_big_lifecycle() {
        let n = 4;
        let mut s = st(1, n);
        s.decide(1, 100).unwrap();
        assert_eq!(s.state(), AdaptiveState::Big);
        // End of cycle with a small queue: announce.
        assert_eq!(s.decide(4, 12).unwrap(), StationAction::TransmitAttempt(Some(AdaptiveBits::LAST_BIG)));
        s.observe(4, &ChannelObservation::Silence, true, 11).unwrap();
        for r in 5..=8 {
            assert_eq!(s.decide(r, 10).unwrap(), StationAction::TransmitAttempt(Some(AdaptiveBits::LAST_BIG)));
            s.observe(r, &ChannelObservation::Silence, true, 9).unwrap();
        }
        assert_eq!(s.state(), AdaptiveState::Transmitting);
    }

    #[test]
    fn move_to_front_rotates() {
        let mut l: Vec<StationId> = (0..4).map(StationId::from_index).collect();
        move_to_front(&mut l, StationId::from_index(2));
        assert_eq!(l.iter().map(|s| s.get()).collect::<Vec<_>>(), vec![3, 1, 2, 4]);
    }
}
