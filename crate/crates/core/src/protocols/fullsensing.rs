//! 12 O'clock full-sensing protocol.
//!
//! No control bits: a listener learns that a station is Big when the sender
//! heard is not its predecessor on the list. A Big station's successor cannot
//! tell and collides with it once; everyone involved then moves the Big station
//! to the front of their lists.
//!
//! Wake-up rounds are derived from the list: a station at position `p` listens
//! in round `(c-1)·n + p - 1` and holds the token in round `(c-1)·n + p` of
//! cycle `c`. After a turn in cycle `c` the station sleeps until its listening
//! round in cycle `c + 1` (or `c + k` in the modified variant when it was
//! interrupted by a Big predecessor), at its possibly shifted position.

use super::adaptive::move_to_front;
use super::{ProtocolError, Station};
use crate::types::{cycle_of, is_end_of_cycle, ChannelObservation, Round, StationAction, StationId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FullSensingState {
    Idle(u64),
    Listening,
    Transmitting { transmitted: bool },
    Big,
}

#[derive(Clone, Debug)]
pub struct FullSensingStation {
    id: StationId,
    n: usize,
    /// 0 for the original protocol, k >= 1 for the modified variant.
    variant_k: u32,
    state: FullSensingState,
    list: Vec<StationId>,
    /// Cycle of the token turn the station is currently working towards.
    turn_cycle: u64,
}

impl FullSensingStation {
    pub fn new(id: StationId, n: usize, variant_k: u32) -> Self {
        let state = match id.get() {
            1 => FullSensingState::Transmitting { transmitted: false },
            2 => FullSensingState::Listening,
            j => FullSensingState::Idle(j as u64 - 2),
        };
        FullSensingStation { id, n, variant_k, state, list: (0..n).map(StationId::from_index).collect(), turn_cycle: 1 }
    }

    pub fn state(&self) -> FullSensingState {
        self.state
    }

    pub fn big_entry_threshold(&self) -> u64 {
        let n = self.n as u64;
        if self.variant_k == 0 {
            3 * n
        } else {
            2 * n + self.variant_k as u64 * n
        }
    }

    pub fn big_exit_threshold(&self) -> u64 {
        2 * self.n as u64
    }

    fn interrupted_sleep(&self) -> u64 {
        self.variant_k.max(1) as u64
    }

    fn position(&self, s: StationId) -> usize {
        self.list.iter().position(|&x| x == s).expect("list is a permutation")
    }

    fn predecessor(&self) -> StationId {
        let p = self.position(self.id);
        self.list[(p + self.n - 1) % self.n]
    }

    fn broken(&self, round: Round, detail: impl Into<String>) -> ProtocolError {
        ProtocolError::new(round, Some(self.id), detail)
    }

    /// Sleep until the listening round of the turn `cycles` after the
    /// current one.
    fn go_idle(&mut self, round: Round, cycles: u64) -> Result<(), ProtocolError> {
        let n = self.n as u64;
        let pos = self.position(self.id) as u64 + 1;
        let wake = (self.turn_cycle + cycles - 1) * n + pos - 1;
        if wake <= round {
            return Err(self.broken(round, format!("wake-up round {wake} is not in the future")));
        }
        self.state = FullSensingState::Idle(wake - round - 1);
        Ok(())
    }
}

impl Station for FullSensingStation {
    fn id(&self) -> StationId {
        self.id
    }

    fn decide(&mut self, round: Round, q: u64) -> Result<StationAction, ProtocolError> {
        Ok(match self.state {
            FullSensingState::Idle(0) => {
                self.state = FullSensingState::Listening;
                self.turn_cycle = cycle_of(round + 1, self.n);
                StationAction::Listen
            }
            FullSensingState::Idle(t) => {
                self.state = FullSensingState::Idle(t - 1);
                StationAction::Off
            }
            FullSensingState::Listening => StationAction::Listen,
            FullSensingState::Transmitting { .. } => {
                let transmitted = q > 0;
                self.state = FullSensingState::Transmitting { transmitted };
                if transmitted {
                    StationAction::TransmitAttempt(None)
                } else {
                    StationAction::Listen
                }
            }
            FullSensingState::Big => StationAction::TransmitAttempt(None),
        })
    }

    fn observe(
        &mut self,
        round: Round,
        observation: &ChannelObservation,
        own_ack: bool,
        q: u64,
    ) -> Result<(), ProtocolError> {
        match self.state {
            FullSensingState::Listening => match *observation {
                // A Big station interrupted its successor; hear its id next round.
                ChannelObservation::Collision => {}
                ChannelObservation::Silence => self.state = FullSensingState::Transmitting { transmitted: false },
                ChannelObservation::Single { sender, .. } => {
                    if sender == self.predecessor() {
                        self.state = FullSensingState::Transmitting { transmitted: false };
                    } else {
                        move_to_front(&mut self.list, sender);
                        self.go_idle(round, 1)?;
                    }
                }
            },
            FullSensingState::Transmitting { transmitted } => match *observation {
                ChannelObservation::Collision => {
                    let pred = self.predecessor();
                    move_to_front(&mut self.list, pred);
                    self.go_idle(round, self.interrupted_sleep())?;
                }
                ChannelObservation::Single { sender, .. } => {
                    if transmitted && own_ack {
                        if q > self.big_entry_threshold() {
                            self.state = FullSensingState::Big;
                        } else {
                            self.go_idle(round, 1)?;
                        }
                    } else if transmitted {
                        return Err(self.broken(round, "transmitted but another station was heard"));
                    } else {
                        move_to_front(&mut self.list, sender);
                        self.go_idle(round, self.interrupted_sleep())?;
                    }
                }
                ChannelObservation::Silence => {
                    if transmitted {
                        return Err(self.broken(round, "transmission went unheard"));
                    }
                    self.go_idle(round, 1)?;
                }
            },
            FullSensingState::Big => {
                if is_end_of_cycle(round, self.n) && q <= self.big_exit_threshold() {
                    move_to_front(&mut self.list, self.id);
                    self.state = FullSensingState::Transmitting { transmitted: false };
                    self.turn_cycle = cycle_of(round + 1, self.n);
                }
            }
            FullSensingState::Idle(_) => return Err(self.broken(round, "idle station observed the channel")),
        }
        Ok(())
    }

    fn local_list(&self, _round: Round) -> Option<Vec<StationId>> {
        Some(self.list.clone())
    }

    fn check_system(stations: &[Self], round: Round) -> Result<(), ProtocolError> {
        let bigs = stations.iter().filter(|s| s.state == FullSensingState::Big).count();
        if bigs > 1 {
            return Err(ProtocolError::new(round, None, format!("{bigs} Big stations")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(i: u32) -> StationId {
        StationId::from_index(i as usize - 1)
    }

    #[test]
    fn collision_keeps_listening() {
        let mut s = FullSensingStation::new(id(2), 4, 0);
        assert_eq!(s.decide(1, 0).unwrap(), StationAction::Listen);
        s.observe(1, &ChannelObservation::Collision, false, 0).unwrap();
        assert_eq!(s.state(), FullSensingState::Listening);
        assert_eq!(s.decide(2, 0).unwrap(), StationAction::Listen);
    }

    #[test]
    fn successful_heavy_transmitter_becomes_big() {
        let n = 4;
        let mut s = FullSensingStation::new(id(1), n, 0);
        let q = 3 * n as u64 + 5;
        assert_eq!(s.decide(1, q).unwrap(), StationAction::TransmitAttempt(None));
        s.observe(1, &ChannelObservation::Single { sender: id(1), bits: None }, true, q - 1).unwrap();
        assert_eq!(s.state(), FullSensingState::Big);
    }

    #[test]
    fn big_exits_at_end_of_cycle() {
        let n = 4;
        let mut s = FullSensingStation::new(id(3), n, 0);
        s.state = FullSensingState::Big;
        s.observe(8, &ChannelObservation::Single { sender: id(3), bits: None }, true, 2 * n as u64).unwrap();
        assert_eq!(s.state(), FullSensingState::Transmitting { transmitted: false });
        assert_eq!(s.local_list(8).unwrap()[0], id(3));
    }

    #[test]
    fn big_stays_before_end_of_cycle() {
        let mut s = FullSensingStation::new(id(3), 4, 0);
        s.state = FullSensingState::Big;
        s.observe(7, &ChannelObservation::Single { sender: id(3), bits: None }, true, 1).unwrap();
        assert_eq!(s.state(), FullSensingState::Big);
    }

    #[test]
    fn idle_timers() {
        let n = 6u64;
        // Plain transmission in its own slot: n - 2.
        let mut s = FullSensingStation::new(id(1), n as usize, 0);
        s.decide(1, 1).unwrap();
        s.observe(1, &ChannelObservation::Single { sender: id(1), bits: None }, true, 0).unwrap();
        assert_eq!(s.state(), FullSensingState::Idle(n - 2));

        // Listener hears a Big station listed after it and shifts back a slot: n.
        let mut s = FullSensingStation::new(id(2), n as usize, 0);
        s.decide(1, 0).unwrap();
        s.observe(1, &ChannelObservation::Single { sender: id(5), bits: None }, false, 0).unwrap();
        assert_eq!(s.state(), FullSensingState::Idle(n));
        assert_eq!(s.local_list(1).unwrap()[0], id(5));
    }

    #[test]
    fn modified_variant_sleeps_k_cycles() {
        let n = 4u64;
        let mut s = FullSensingStation::new(id(1), n as usize, 3);
        assert_eq!(s.big_entry_threshold(), 2 * n + 3 * n);
        s.decide(1, 1).unwrap();
        s.observe(1, &ChannelObservation::Collision, false, 1).unwrap();
        // Predecessor (station n) moved ahead: listen at position 2 of cycle 4,
        // round 13.
        assert_eq!(s.state(), FullSensingState::Idle(11));
    }
}
