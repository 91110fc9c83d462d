//! k-light (n, ω)-selectors and the combinatorial objects used to build them.
//!
//! A set `S` *hits* `X` when `|S ∩ X| = 1`. A family is an (n, ω)-selector when
//! every `X ⊆ {1..n}` with `⌈ω/2⌉ ≤ |X| ≤ ω` has at least `⌈ω/4⌉` elements
//! `x` such that some set of the family meets `X` exactly in `{x}`. It is
//! k-light when every set has at most `k` elements.

use std::ops::ControlFlow;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

mod code;
mod disperser;
mod poly;
mod random;

pub use code::{kautz_singleton, verify_disjunct, CodeError, DisjunctCounterexample, GaloisField, SuperimposedCode};
pub use disperser::{random_disperser, verify_disperser, Disperser, DisperserError};
pub use poly::{construct_selector_poly, AlphaRule, PolyError, PolyParams};
pub use random::{generate_selector_random, GenerationFailure, RandomSelectorParams};

/// Enumeration budget shared by every exhaustive verifier.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    #[default]
    Random,
    Diluted,
    Poly,
    Singletons,
}

/// Ordered family of subsets of `{1..n}`. JSON form: `{n, omega, k, sets}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectorFamily {
    pub n: usize,
    pub omega: usize,
    pub k: usize,
    pub sets: Vec<Vec<u32>>,
    #[serde(default, skip_serializing)]
    pub provenance: Provenance,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectorError {
    #[error("family has no sets")]
    Empty,
    #[error("set {0} is empty")]
    EmptySet(usize),
    #[error("set {set} has {size} elements, more than k = {k}")]
    TooHeavy { set: usize, size: usize, k: usize },
    #[error("set {set} contains {element}, outside 1..={n}")]
    OutOfRange { set: usize, element: u32, n: usize },
    #[error("set {set} repeats element {element}")]
    Duplicate { set: usize, element: u32 },
    #[error("enumeration of {count} cases exceeds the limit of {ENUMERATION_LIMIT}")]
    TooLarge { count: u128 },
    #[error("bitmask verification supports n <= 64, got {0}")]
    GroundSetTooLarge(usize),
}

impl SelectorFamily {
    /// `{{1}, …, {n}}`: hits every element of every `X`.
    pub fn singletons(n: usize, omega: usize) -> Self {
        SelectorFamily {
            n,
            omega,
            k: 1,
            sets: (1..=n as u32).map(|i| vec![i]).collect(),
            provenance: Provenance::Singletons,
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Structural invariants: at least one set, every set nonempty, at most
    /// `k` distinct elements, all in `1..=n`.
    pub fn check(&self) -> Result<(), SelectorError> {
        if self.sets.is_empty() {
            return Err(SelectorError::Empty);
        }
        let mut seen = vec![usize::MAX; self.n + 1];
        for (i, s) in self.sets.iter().enumerate() {
            if s.is_empty() {
                return Err(SelectorError::EmptySet(i));
            }
            if s.len() > self.k {
                return Err(SelectorError::TooHeavy { set: i, size: s.len(), k: self.k });
            }
            for &e in s {
                if e < 1 || e as usize > self.n {
                    return Err(SelectorError::OutOfRange { set: i, element: e, n: self.n });
                }
                if seen[e as usize] == i {
                    return Err(SelectorError::Duplicate { set: i, element: e });
                }
                seen[e as usize] = i;
            }
        }
        Ok(())
    }

    fn masks(&self) -> Result<Vec<u64>, SelectorError> {
        if self.n > 64 {
            return Err(SelectorError::GroundSetTooLarge(self.n));
        }
        Ok(self.sets.iter().map(|s| s.iter().fold(0u64, |m, &e| m | 1 << (e - 1))).collect())
    }
}

/// Reads a file holding one family or a JSON array of families.
pub fn load_families(path: &Path) -> Result<Vec<SelectorFamily>, Box<dyn std::error::Error + Send + Sync>> {
    let text = std::fs::read_to_string(path)?;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(SelectorFamily),
        Many(Vec<SelectorFamily>),
    }
    let families = match serde_json::from_str(&text)? {
        OneOrMany::One(f) => vec![f],
        OneOrMany::Many(v) => v,
    };
    for f in &families {
        f.check()?;
    }
    Ok(families)
}

/// Hit threshold `⌈ω/4⌉`.
pub fn hit_threshold(omega: usize) -> usize {
    omega.div_ceil(4)
}

/// Number of elements of `x` isolated by some set: `|{x ∈ X : ∃S, S ∩ X = {x}}|`.
pub fn hit_count(family: &SelectorFamily, x: &[u32]) -> usize {
    let mut in_x = vec![false; family.n + 1];
    for &e in x {
        in_x[e as usize] = true;
    }
    let mut hit = vec![false; family.n + 1];
    for s in &family.sets {
        let mut only = None;
        let mut count = 0;
        for &e in s {
            if in_x[e as usize] {
                count += 1;
                only = Some(e);
            }
        }
        if count == 1 {
            hit[only.unwrap() as usize] = true;
        }
    }
    hit.iter().filter(|&&h| h).count()
}

/// Hit-and-remove: repeatedly pick the first set that hits the remaining part
/// of `X` while avoiding the elements already picked. Counts the same elements
/// as [`hit_count`]; kept as an independent cross-check.
pub fn hit_count_iterative(family: &SelectorFamily, x: &[u32]) -> usize {
    let mut remaining: Vec<u32> = x.to_vec();
    let mut picked: Vec<u32> = Vec::new();
    'outer: loop {
        for s in &family.sets {
            if s.iter().any(|e| picked.contains(e)) {
                continue;
            }
            let inside: Vec<u32> = s.iter().copied().filter(|e| remaining.contains(e)).collect();
            if inside.len() == 1 {
                remaining.retain(|&e| e != inside[0]);
                picked.push(inside[0]);
                continue 'outer;
            }
        }
        return picked.len();
    }
}

#[inline]
fn mask_hits(masks: &[u64], x: u64, threshold: u32) -> bool {
    let mut hit = 0u64;
    for &s in masks {
        let i = s & x;
        if i != 0 && i & (i - 1) == 0 && hit & i == 0 {
            hit |= i;
            if hit.count_ones() >= threshold {
                return true;
            }
        }
    }
    hit.count_ones() >= threshold
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Visits every `k`-subset of `0..n` as an ascending index slice, in
/// lexicographic order.
pub fn for_each_combination<F>(n: usize, k: usize, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if k > n {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx)?;
        let mut i = k;
        loop {
            if i == 0 {
                return ControlFlow::Continue(());
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn exact_sizes(n: usize, omega: usize) -> std::ops::RangeInclusive<usize> {
    omega.div_ceil(2).max(1)..=omega.min(n)
}

/// Number of sets `X` the exact verifier enumerates.
pub fn exact_enumeration_count(n: usize, omega: usize) -> u128 {
    exact_sizes(n, omega).map(|s| binomial(n as u64, s as u64)).fold(0u128, u128::saturating_add)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Ok,
    /// First failing `X`, ordered by size and then lexicographically.
    Counterexample(Vec<u32>),
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verification::Ok)
    }
}

/// Checks every `X` with `⌈ω/2⌉ ≤ |X| ≤ ω`.
pub fn verify_selector_exact(family: &SelectorFamily, n: usize, omega: usize) -> Result<Verification, SelectorError> {
    let count = exact_enumeration_count(n, omega);
    if count > ENUMERATION_LIMIT {
        return Err(SelectorError::TooLarge { count });
    }
    if n > 64 {
        return Err(SelectorError::GroundSetTooLarge(n));
    }
    let masks = family.masks()?;
    let threshold = hit_threshold(omega) as u32;
    let mut failing = None;
    for size in exact_sizes(n, omega) {
        let flow = for_each_combination(n, size, |idx| {
            let x = idx.iter().fold(0u64, |m, &i| m | 1 << i);
            if mask_hits(&masks, x, threshold) {
                ControlFlow::Continue(())
            } else {
                failing = Some(idx.iter().map(|&i| i as u32 + 1).collect());
                ControlFlow::Break(())
            }
        });
        if flow.is_break() {
            return Ok(Verification::Counterexample(failing.unwrap()));
        }
    }
    Ok(Verification::Ok)
}

/// Monte Carlo estimate of the fraction of `X` (size uniform in
/// `[⌈ω/2⌉, ω]`, members uniform) that fail the hit threshold.
pub fn verify_selector_sampled<R: Rng + ?Sized>(
    family: &SelectorFamily,
    n: usize,
    omega: usize,
    samples: usize,
    rng: &mut R,
) -> f64 {
    assert!(samples >= 1, "at least one sample");
    let sizes = exact_sizes(n, omega);
    let threshold = hit_threshold(omega);
    let masks = family.masks().ok();
    let mut failures = 0usize;
    for _ in 0..samples {
        let size = rng.gen_range(sizes.clone());
        let picked = index::sample(rng, n, size);
        let ok = match &masks {
            Some(m) => {
                let x = picked.iter().fold(0u64, |acc, i| acc | 1 << i);
                mask_hits(m, x, threshold as u32)
            }
            None => {
                let x: Vec<u32> = picked.iter().map(|i| i as u32 + 1).collect();
                hit_count(family, &x) >= threshold
            }
        };
        if !ok {
            failures += 1;
        }
    }
    failures as f64 / samples as f64
}

/// Splits every set into chunks of at most `k` consecutive elements in
/// ascending order. Returns the input unchanged when no set exceeds `k`.
pub fn dilute(family: &SelectorFamily, k: usize) -> SelectorFamily {
    assert!(k >= 1, "k >= 1");
    if family.max_set_size() <= k {
        return family.clone();
    }
    let mut sets = Vec::new();
    for s in &family.sets {
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sets.extend(sorted.chunks(k).map(<[u32]>::to_vec));
    }
    SelectorFamily { n: family.n, omega: family.omega, k, sets, provenance: Provenance::Diluted }
}
