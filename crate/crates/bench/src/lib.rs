//! Fixtures shared by the criterion benches.

use channel_lab::protocols::interleaved_omegas;
use channel_lab::rng::derive_stream;
use channel_lab::selectors::{generate_selector_random, RandomSelectorParams};
use channel_lab::{validate_config, BackoffKind, ProtocolConfig, SelectorFamily, SimConfig, ValidatedConfig};

pub const ROUNDS: u64 = 10_000;

/// One representative config per protocol, all at the same load.
pub fn protocol_fixtures(n: usize, rho: f64) -> Vec<(&'static str, ValidatedConfig)> {
    let protocols = [
        ("adaptive", ProtocolConfig::Adaptive),
        ("fullsensing", ProtocolConfig::Fullsensing),
        ("fullsensing_mod", ProtocolConfig::FullsensingMod { k: 2 }),
        ("round_robin", ProtocolConfig::RoundRobin),
        ("interleaved", ProtocolConfig::Interleaved { selector_file: None, families: Some(interleaved_fixture(n, 2)) }),
        ("backoff_exp", ProtocolConfig::Backoff { kind: Some(BackoffKind::Exponential) }),
        ("state_aware", ProtocolConfig::StateAware),
    ];
    protocols
        .into_iter()
        .map(|(name, p)| (name, validate_config(&SimConfig::new(n, p, rho, ROUNDS, 1)).expect("fixture config")))
        .collect()
}

pub fn interleaved_fixture(n: usize, k: usize) -> Vec<SelectorFamily> {
    interleaved_omegas(n)
        .into_iter()
        .map(|w| {
            generate_selector_random(n, w, k, RandomSelectorParams::default(), &mut derive_stream(7, "bench"))
                .expect("fixture family")
        })
        .collect()
}
