//! Random bipartite dispersers with an exhaustive verifier.

use std::ops::ControlFlow;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use super::{binomial, for_each_combination, ENUMERATION_LIMIT};

/// Bipartite graph `V = {1..n}`, `W = {0..w}`; every `v` has exactly `d`
/// neighbours. Dispersion: every `A ⊆ V` with `|A| ≥ ell` sees at least
/// `(1 - eps)|W|` vertices of `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct Disperser {
    pub n: usize,
    pub ell: usize,
    pub d: usize,
    pub delta: f64,
    pub eps: f64,
    pub w: usize,
    /// `adjacency[v - 1]`: sorted neighbours of `v` in `0..w`.
    pub adjacency: Vec<Vec<u32>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisperserError {
    #[error("degree {d} exceeds |W| = {w}")]
    DegreeTooLarge { d: usize, w: usize },
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("enumeration of {count} sets exceeds the limit of {ENUMERATION_LIMIT}")]
    TooLarge { count: u128 },
}

/// `|W| = ⌈ell·d/delta⌉`.
pub fn right_side_size(ell: usize, d: usize, delta: f64) -> usize {
    ((ell * d) as f64 / delta - 1e-9).ceil().max(1.0) as usize
}

pub fn random_disperser<R: Rng + ?Sized>(
    n: usize,
    ell: usize,
    d: usize,
    delta: f64,
    eps: f64,
    rng: &mut R,
) -> Result<Disperser, DisperserError> {
    if n == 0 || ell == 0 || d == 0 {
        return Err(DisperserError::Parameter("n, ell and d must be positive"));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(DisperserError::Parameter("delta must be positive"));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(DisperserError::Parameter("eps must lie in [0, 1)"));
    }
    let w = right_side_size(ell, d, delta);
    if d > w {
        return Err(DisperserError::DegreeTooLarge { d, w });
    }
    let adjacency = (0..n)
        .map(|_| {
            let mut nb: Vec<u32> = index::sample(rng, w, d).iter().map(|x| x as u32).collect();
            nb.sort_unstable();
            nb
        })
        .collect();
    Ok(Disperser { n, ell, d, delta, eps, w, adjacency })
}

impl Disperser {
    /// Minimum neighbourhood size demanded of every `ell`-set.
    pub fn required_neighbourhood(&self) -> usize {
        ((1.0 - self.eps) * self.w as f64 - 1e-9).ceil().max(0.0) as usize
    }

    /// Vertices of `V` adjacent to `x ∈ W`, ascending.
    pub fn left_neighbours(&self, x: u32) -> Vec<u32> {
        (0..self.n).filter(|&v| self.adjacency[v].binary_search(&x).is_ok()).map(|v| v as u32 + 1).collect()
    }
}

/// Checks every `A` with `|A| = ell` (larger sets only grow the
/// neighbourhood). Returns the first failing `A` in lexicographic order.
pub fn verify_disperser(g: &Disperser) -> Result<Result<(), Vec<u32>>, DisperserError> {
    if g.ell > g.n {
        return Ok(Ok(()));
    }
    let count = binomial(g.n as u64, g.ell as u64);
    if count > ENUMERATION_LIMIT {
        return Err(DisperserError::TooLarge { count });
    }
    let words = g.w.div_ceil(64);
    let bits: Vec<Vec<u64>> = g
        .adjacency
        .iter()
        .map(|nb| {
            let mut b = vec![0u64; words];
            for &x in nb {
                b[x as usize / 64] |= 1 << (x % 64);
            }
            b
        })
        .collect();
    let need = g.required_neighbourhood();
    let mut union = vec![0u64; words];
    let mut failing = None;
    let _ = for_each_combination(g.n, g.ell, |a| {
        union.iter_mut().for_each(|u| *u = 0);
        for &v in a {
            for (u, x) in union.iter_mut().zip(&bits[v]) {
                *u |= x;
            }
        }
        let seen: usize = union.iter().map(|u| u.count_ones() as usize).sum();
        if seen >= need {
            ControlFlow::Continue(())
        } else {
            failing = Some(a.iter().map(|&v| v as u32 + 1).collect());
            ControlFlow::Break(())
        }
    });
    Ok(match failing {
        Some(a) => Err(a),
        None => Ok(()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn complete_graph_disperses() {
        let mut rng = derive_stream(1, "disperser");
        // ell = 1, delta = 1: |W| = d, so every v sees all of W.
        let g = random_disperser(10, 1, 5, 1.0, 0.0, &mut rng).unwrap();
        assert!(g.adjacency.iter().all(|nb| nb.len() == 5));
        assert_eq!(verify_disperser(&g).unwrap(), Ok(()));
    }

    #[test]
    fn small_neighbourhood_fails_with_zero_eps() {
        let g = Disperser {
            n: 3,
            ell: 1,
            d: 1,
            delta: 0.5,
            eps: 0.0,
            w: 2,
            adjacency: vec![vec![0], vec![1], vec![0]],
        };
        assert_eq!(verify_disperser(&g).unwrap(), Err(vec![1]));
    }

    #[test]
    fn degree_invariant_and_size() {
        let mut rng = derive_stream(2, "disperser");
        let g = random_disperser(12, 3, 4, 2.0, 0.5, &mut rng).unwrap();
        assert_eq!(g.w, 6);
        assert!(g.adjacency.iter().all(|nb| nb.len() == 4 && nb.windows(2).all(|p| p[0] < p[1])));
        // Exhaustive verdict either way; just make sure it runs.
        let _ = verify_disperser(&g).unwrap();
        assert!(random_disperser(4, 1, 5, 2.0, 0.5, &mut rng).is_err());
    }
}
