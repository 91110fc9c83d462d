//! Domain types shared by every module.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Global round number. The first round is 1.
pub type Round = u64;

/// Station name in `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(u32);

impl StationId {
    /// Returns `None` unless `1 <= id <= n`.
    pub fn new(id: u32, n: usize) -> Option<Self> {
        (id >= 1 && (id as usize) <= n).then_some(StationId(id))
    }

    /// Station for a zero-based queue index.
    pub fn from_index(index: usize) -> Self {
        StationId(index as u32 + 1)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based position in per-station vectors.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Control bits an adaptive protocol may attach to a packet.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AdaptiveBits {
    pub big: bool,
    pub last_big: bool,
}

impl AdaptiveBits {
    pub const PLAIN: AdaptiveBits = AdaptiveBits { big: false, last_big: false };
    pub const BIG: AdaptiveBits = AdaptiveBits { big: true, last_big: false };
    pub const LAST_BIG: AdaptiveBits = AdaptiveBits { big: false, last_big: true };

    pub fn is_valid(self) -> bool {
        !(self.big && self.last_big)
    }
}

/// What a station does in one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationAction {
    /// Switched on, transmitting one packet. Only the adaptive protocol sets
    /// the control bits.
    TransmitAttempt(Option<AdaptiveBits>),
    /// Switched on, listening.
    Listen,
    /// Switched off: neither transmits nor hears the channel.
    Off,
}

impl StationAction {
    pub fn is_on(self) -> bool {
        !matches!(self, StationAction::Off)
    }

    pub fn is_transmit(self) -> bool {
        matches!(self, StationAction::TransmitAttempt(_))
    }
}

/// Channel feedback at the end of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelObservation {
    Silence,
    Single { sender: StationId, bits: Option<AdaptiveBits> },
    Collision,
}

/// Channel restrain: the number of stations allowed in on-mode per round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Restrain {
    Limited(u32),
    Unbounded,
}

impl Restrain {
    pub fn allows(self, on_mode: usize) -> bool {
        match self {
            Restrain::Limited(k) => on_mode <= k as usize,
            Restrain::Unbounded => true,
        }
    }
}

impl fmt::Display for Restrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Restrain::Limited(k) => write!(f, "{k}"),
            Restrain::Unbounded => f.write_str("unbounded"),
        }
    }
}

// JSON form: a positive integer or the string "unbounded".
impl Serialize for Restrain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Restrain::Limited(k) => s.serialize_u32(*k),
            Restrain::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Restrain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Limited(u32),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Limited(k) => Ok(Restrain::Limited(k)),
            Repr::Word(w) if w == "unbounded" => Ok(Restrain::Unbounded),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "restrain_limit must be a positive integer or \"unbounded\", got {w:?}"
            ))),
        }
    }
}

/// Offline schedule of an acknowledgment-based protocol: the set of stations
/// switched on in a given round, independent of queue contents.
pub trait Schedule {
    fn n(&self) -> usize;
    fn on_set(&self, round: Round) -> Vec<StationId>;
}

/// Index of the cycle containing `round`; cycles are `n` rounds long and end
/// at rounds divisible by `n`.
pub fn cycle_of(round: Round, n: usize) -> u64 {
    (round - 1) / n as u64 + 1
}

/// True for end-of-cycle ("12 O'clock") rounds.
pub fn is_end_of_cycle(round: Round, n: usize) -> bool {
    round % n as u64 == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn station_id_range() {
        assert!(StationId::new(0, 4).is_none());
        assert!(StationId::new(5, 4).is_none());
        assert_eq!(StationId::new(4, 4).unwrap().index(), 3);
        assert_eq!(StationId::from_index(0).get(), 1);
    }

    #[test]
    fn restrain_json() {
        let r: Restrain = serde_json::from_str("3").unwrap();
        assert_eq!(r, Restrain::Limited(3));
        let r: Restrain = serde_json::from_str("\"unbounded\"").unwrap();
        assert_eq!(r, Restrain::Unbounded);
        assert!(serde_json::from_str::<Restrain>("\"lots\"").is_err());
        assert_eq!(serde_json::to_string(&Restrain::Unbounded).unwrap(), "\"unbounded\"");
    }

    #[test]
    fn cycles() {
        assert_eq!(cycle_of(1, 4), 1);
        assert_eq!(cycle_of(4, 4), 1);
        assert_eq!(cycle_of(5, 4), 2);
        assert!(is_end_of_cycle(8, 4));
        assert!(!is_end_of_cycle(7, 4));
    }
}
