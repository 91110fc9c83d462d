//! Selector by splicing a disperser with a superimposed code: for every right
//! vertex `x` and code row `y`, `F_{x·a+y} = M_y ∩ N_G(x)`, each split into
//! chunks of at most `k`.

use thiserror::Error;

use super::code::{verify_disjunct, CodeError, SuperimposedCode};
use super::disperser::{verify_disperser, Disperser, DisperserError};
use super::{binomial, hit_threshold, Provenance, SelectorFamily, ENUMERATION_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaRule {
    /// `α = n·d·(cδ)²·log2²(n) / (k·a·|W|) + 1`.
    Formula,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolyParams {
    pub c: f64,
    pub alpha: AlphaRule,
}

impl Default for PolyParams {
    fn default() -> Self {
        PolyParams { c: 2.0, alpha: AlphaRule::Formula }
    }
}

impl PolyParams {
    pub fn alpha(&self, n: usize, k: usize, g: &Disperser, code: &SuperimposedCode) -> f64 {
        match self.alpha {
            AlphaRule::Fixed(a) => a,
            AlphaRule::Formula => {
                let log = (n as f64).log2();
                let cd = self.c * g.delta;
                n as f64 * g.d as f64 * cd * cd * log * log / (k as f64 * code.a as f64 * g.w as f64) + 1.0
            }
        }
    }

    /// Disjunctness the code must have: `⌈cδ⌉`.
    pub fn required_disjunctness(&self, g: &Disperser) -> usize {
        (self.c * g.delta - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("precondition not met: {0}")]
    PreconditionUnverified(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Builds the family; when `n ≤ a·|W|·α` the singleton family is returned.
/// The disperser and code are re-verified whenever exhaustive checks fit the
/// enumeration budget.
pub fn construct_selector_poly(
    n: usize,
    omega: usize,
    k: usize,
    params: PolyParams,
    g: &Disperser,
    code: &SuperimposedCode,
) -> Result<SelectorFamily, PolyError> {
    if params.c < 1.0 {
        return Err(PolyError::Parameter(format!("c = {} must be >= 1", params.c)));
    }
    if k < 1 {
        return Err(PolyError::Parameter("k must be >= 1".into()));
    }
    if g.n != n || code.b != n {
        return Err(PolyError::Parameter(format!("disperser has {} and code {} columns, expected n = {n}", g.n, code.b)));
    }
    let unverified = |s: String| PolyError::PreconditionUnverified(s);
    if g.ell > hit_threshold(omega) {
        return Err(unverified(format!("disperser ell = {} exceeds ⌈ω/4⌉ = {}", g.ell, hit_threshold(omega))));
    }
    if binomial(n as u64, g.ell as u64) <= ENUMERATION_LIMIT {
        match verify_disperser(g) {
            Ok(Ok(())) => {}
            Ok(Err(a)) => return Err(unverified(format!("disperser fails on A = {a:?}"))),
            Err(DisperserError::TooLarge { .. }) => {}
            Err(e) => return Err(unverified(e.to_string())),
        }
    }
    let need = params.required_disjunctness(g);
    if code.d < need {
        return Err(unverified(format!("code is {}-disjunct, need {need}", code.d)));
    }
    match verify_disjunct(code, need) {
        Ok(Ok(())) | Err(CodeError::TooLarge { .. }) => {}
        Ok(Err(c)) => return Err(unverified(format!("code is not {need}-disjunct: {c:?}"))),
        Err(e) => return Err(unverified(e.to_string())),
    }

    let alpha = params.alpha(n, k, g, code);
    if n as f64 <= code.a as f64 * g.w as f64 * alpha {
        let mut f = SelectorFamily::singletons(n, omega);
        f.k = k;
        return Ok(f);
    }

    let right: Vec<Vec<u32>> = (0..g.w as u32).map(|x| g.left_neighbours(x)).collect();
    let mut sets = Vec::new();
    for nx in &right {
        for row in &code.rows {
            let mut f: Vec<u32> = row.iter().copied().filter(|v| nx.binary_search(v).is_ok()).collect();
            f.sort_unstable();
            sets.extend(f.chunks(k).map(<[u32]>::to_vec));
        }
    }
    if sets.is_empty() {
        return Err(PolyError::Parameter("every spliced set is empty".into()));
    }
    Ok(SelectorFamily { n, omega, k, sets, provenance: Provenance::Poly })
}
