use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use super::{
    exact_enumeration_count, verify_selector_exact, verify_selector_sampled, Provenance, SelectorFamily,
    ENUMERATION_LIMIT,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSelectorParams {
    /// Length constant: `m = ⌈c (ω + n/k) log2 n⌉`.
    pub c: f64,
    pub trials: usize,
    /// Samples for the Monte Carlo check when exact verification is too big.
    pub samples: usize,
}

impl Default for RandomSelectorParams {
    fn default() -> Self {
        RandomSelectorParams { c: 4.0, trials: 20, samples: 10_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("no family passed verification in {trials} trials (best failure fraction {best_failure_fraction})")]
pub struct GenerationFailure {
    pub trials: usize,
    pub best_failure_fraction: f64,
}

/// Draws families of `m` random sets of size `min(⌈n/ω⌉, k)` until one
/// passes verification: exact when the enumeration fits the budget,
/// otherwise sampled with zero observed failures.
pub fn generate_selector_random<R: Rng + ?Sized>(
    n: usize,
    omega: usize,
    k: usize,
    params: RandomSelectorParams,
    rng: &mut R,
) -> Result<SelectorFamily, GenerationFailure> {
    assert!(2 <= omega && omega <= n, "2 <= omega <= n");
    assert!(k >= 1, "k >= 1");
    let m = (params.c * (omega as f64 + n as f64 / k as f64) * (n as f64).log2()).ceil().max(1.0) as usize;
    let size = n.div_ceil(omega).min(k);
    let exact = n <= 64 && exact_enumeration_count(n, omega) <= ENUMERATION_LIMIT;
    let mut best = 1.0f64;
    for _ in 0..params.trials {
        let sets: Vec<Vec<u32>> = (0..m)
            .map(|_| {
                let mut s: Vec<u32> = index::sample(rng, n, size).iter().map(|i| i as u32 + 1).collect();
                s.sort_unstable();
                s
            })
            .collect();
        let family = SelectorFamily { n, omega, k, sets, provenance: Provenance::Random };
        let fraction = if exact {
            match verify_selector_exact(&family, n, omega) {
                Ok(v) if v.is_ok() => return Ok(family),
                _ => verify_selector_sampled(&family, n, omega, 1000, rng),
            }
        } else {
            let f = verify_selector_sampled(&family, n, omega, params.samples, rng);
            if f == 0.0 {
                return Ok(family);
            }
            f
        };
        best = best.min(fraction);
    }
    Err(GenerationFailure { trials: params.trials, best_failure_fraction: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use crate::selectors::Verification;

    #[test]
    fn small_family_is_exactly_verified() {
        let mut rng = derive_stream(1, "selector");
        let f = generate_selector_random(4, 2, 4, RandomSelectorParams::default(), &mut rng).unwrap();
        assert_eq!(verify_selector_exact(&f, 4, 2).unwrap(), Verification::Ok);
        assert_eq!(f.len(), 24);
        assert!(f.sets.iter().all(|s| s.len() == 2));
    }

    #[test]
    fn one_light_means_singletons() {
        let mut rng = derive_stream(2, "selector");
        let f = generate_selector_random(8, 8, 1, RandomSelectorParams::default(), &mut rng).unwrap();
        assert!(f.sets.iter().all(|s| s.len() == 1));
        assert!(verify_selector_exact(&SelectorFamily::singletons(8, 8), 8, 8).unwrap().is_ok());
    }

    #[test]
    fn lightness_n32() {
        let mut rng = derive_stream(3, "selector");
        let f = generate_selector_random(32, 8, 8, RandomSelectorParams::default(), &mut rng).unwrap();
        assert!(f.max_set_size() <= 8);
        f.check().unwrap();
    }

    #[test]
    fn failure_reports_fraction() {
        let mut rng = derive_stream(4, "selector");
        let params = RandomSelectorParams { c: 0.01, trials: 3, samples: 100 };
        let err = generate_selector_random(16, 8, 2, params, &mut rng).unwrap_err();
        assert_eq!(err.trials, 3);
        assert!(err.best_failure_fraction > 0.0);
    }
}
