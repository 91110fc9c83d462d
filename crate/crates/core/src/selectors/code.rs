//! Kautz-Singleton superimposed codes: a Reed-Solomon outer code over GF(q)
//! concatenated with the identity inner code of length q.

use std::ops::ControlFlow;

use thiserror::Error;

use super::{binomial, for_each_combination, ENUMERATION_LIMIT};

/// GF(p^m) with elements encoded as integers `0..q` whose base-p digits are
/// polynomial coefficients (digit i = coefficient of x^i).
#[derive(Clone, Debug)]
pub struct GaloisField {
    p: u32,
    m: u32,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// `Some((p, m))` when `q = p^m` for a prime `p`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut rest, mut m) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

impl GaloisField {
    pub fn new(q: u32) -> Option<Self> {
        let (p, m) = prime_power(q)?;
        // Search monic f = x^m + c(x) for one where x generates the
        // multiplicative group.
        for tail in 0..q {
            if tail % p == 0 {
                continue; // zero constant term: x divides f
            }
            let mut exp = Vec::with_capacity(q as usize - 1);
            let mut log = vec![u32::MAX; q as usize];
            let mut e = 1u32;
            let mut primitive = true;
            for i in 0..q - 1 {
                if log[e as usize] != u32::MAX {
                    primitive = false;
                    break;
                }
                log[e as usize] = i;
                exp.push(e);
                e = times_x(e, tail, p, m);
            }
            if primitive && e == 1 {
                return Some(GaloisField { p, m, q, exp, log });
            }
        }
        None
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        for _ in 0..self.m {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = (self.log[a as usize] + self.log[b as usize]) % (self.q - 1);
        self.exp[s as usize]
    }

    /// Horner evaluation of `sum coeffs[i] * x^i`.
    pub fn eval(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

// Multiply the element `e` by x modulo x^m + tail(x).
fn times_x(e: u32, tail: u32, p: u32, m: u32) -> u32 {
    let mut digits = vec![0u32; m as usize + 1];
    let mut v = e;
    for d in digits.iter_mut().skip(1) {
        *d = v % p;
        v /= p;
    }
    let top = digits[m as usize];
    let mut out = 0;
    let mut place = 1;
    let mut t = tail;
    for d in digits.iter().take(m as usize) {
        // x^m = -tail(x)
        let reduced = (d + (p - t % p) * top) % p;
        out += reduced * place;
        place *= p;
        t /= p;
    }
    out
}

/// Binary `a × b` matrix stored by rows; row `y` lists the codewords (columns,
/// `1..=b`) with a one in that row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperimposedCode {
    pub a: usize,
    pub b: usize,
    pub d: usize,
    pub rows: Vec<Vec<u32>>,
}

impl SuperimposedCode {
    /// The `b × b` identity: disjoint columns, `(b-1)`-disjunct.
    pub fn identity(b: usize) -> Self {
        SuperimposedCode { a: b, b, d: b.saturating_sub(1), rows: (1..=b as u32).map(|c| vec![c]).collect() }
    }

    /// Builds a code from column supports (row indices `0..a`).
    pub fn from_columns(a: usize, d: usize, columns: &[Vec<usize>]) -> Self {
        let mut rows = vec![Vec::new(); a];
        for (c, col) in columns.iter().enumerate() {
            for &r in col {
                rows[r].push(c as u32 + 1);
            }
        }
        SuperimposedCode { a, b: columns.len(), d, rows }
    }

    /// Column supports as row-index bitsets.
    pub fn column_bits(&self) -> Vec<Vec<u64>> {
        let words = self.a.div_ceil(64);
        let mut cols = vec![vec![0u64; words]; self.b];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                cols[c as usize - 1][r / 64] |= 1 << (r % 64);
            }
        }
        cols
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("no prime power q <= 65536 fits d = {d}, b = {b}")]
    ParameterSearchFailed { d: usize, b: usize },
    #[error("enumeration of {count} column sets exceeds the limit of {ENUMERATION_LIMIT}")]
    TooLarge { count: u128 },
    #[error("constructed code is not {d}-disjunct: {counterexample:?}")]
    NotDisjunct { d: usize, counterexample: DisjunctCounterexample },
}

/// Columns `cover` (1-based) whose union contains column `covered`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjunctCounterexample {
    pub cover: Vec<u32>,
    pub covered: u32,
}

/// Smallest `K` with `q^K >= b`.
fn digits_needed(q: u64, b: u64) -> u64 {
    let (mut k, mut reach) = (0, 1u64);
    while reach < b {
        reach = reach.saturating_mul(q);
        k += 1;
    }
    k.max(1)
}

/// d-disjunct code with `b` codewords and `q²` rows.
pub fn kautz_singleton(d: usize, b: usize) -> Result<SuperimposedCode, CodeError> {
    assert!(d >= 1 && b >= 2, "d >= 1 and b >= 2");
    let q = (2..=65_536u32)
        .filter(|&q| prime_power(q).is_some())
        .find(|&q| {
            let k = digits_needed(q as u64, b as u64);
            q as u64 > d as u64 * (k - 1)
        })
        .ok_or(CodeError::ParameterSearchFailed { d, b })?;
    let field = GaloisField::new(q).expect("q is a prime power");
    let k = digits_needed(q as u64, b as u64) as usize;
    let qs = q as usize;
    let mut rows = vec![Vec::new(); qs * qs];
    for c in 0..b {
        let mut coeffs = Vec::with_capacity(k);
        let mut v = c as u32;
        for _ in 0..k {
            coeffs.push(v % q);
            v /= q;
        }
        for alpha in 0..q {
            let beta = field.eval(&coeffs, alpha);
            rows[alpha as usize * qs + beta as usize].push(c as u32 + 1);
        }
    }
    let code = SuperimposedCode { a: qs * qs, b, d, rows };
    if binomial(b as u64, d as u64 + 1).saturating_mul(code.a as u128) <= ENUMERATION_LIMIT {
        if let Err(counterexample) = verify_disjunct(&code, d)? {
            return Err(CodeError::NotDisjunct { d, counterexample });
        }
    }
    Ok(code)
}

/// Exhaustive check that no `d` columns cover another column. Returns the
/// first failing `(d+1)`-set in lexicographic order, naming the lowest
/// covered column within it.
pub fn verify_disjunct(
    code: &SuperimposedCode,
    d: usize,
) -> Result<Result<(), DisjunctCounterexample>, CodeError> {
    let d = d.min(code.b.saturating_sub(1));
    let count = binomial(code.b as u64, d as u64 + 1);
    if count > ENUMERATION_LIMIT {
        return Err(CodeError::TooLarge { count });
    }
    let cols = code.column_bits();
    let words = code.a.div_ceil(64);
    let mut found = None;
    let mut union = vec![0u64; words];
    let _ = for_each_combination(code.b, d + 1, |t| {
        for (j, &target) in t.iter().enumerate() {
            union.iter_mut().for_each(|w| *w = 0);
            for (i, &c) in t.iter().enumerate() {
                if i != j {
                    for (u, x) in union.iter_mut().zip(&cols[c]) {
                        *u |= x;
                    }
                }
            }
            if cols[target].iter().zip(&union).all(|(x, u)| x & !u == 0) {
                found = Some(DisjunctCounterexample {
                    cover: t.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &c)| c as u32 + 1).collect(),
                    covered: target as u32 + 1,
                });
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    Ok(match found {
        Some(c) => Err(c),
        None => Ok(()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    // Field axioms checked by brute force against the tables.
    #[test]
    fn field_axioms() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = GaloisField::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                let neg = (0..q).filter(|&b| f.add(a, b) == 0).count();
                assert_eq!(neg, 1, "additive inverse q={q} a={a}");
                if a != 0 {
                    let inv = (0..q).filter(|&b| f.mul(a, b) == 1).count();
                    assert_eq!(inv, 1, "multiplicative inverse q={q} a={a}");
                }
                for b in 0..q {
                    for c in [0, 1, q - 1] {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn field_size_choice() {
        assert_eq!(kautz_singleton(2, 16).unwrap().a, 16);
        assert_eq!(kautz_singleton(2, 20).unwrap().a, 25);
    }

    #[test]
    fn degree_zero_code_is_antichain() {
        // b = q: constant polynomials, columns pairwise incomparable.
        let code = kautz_singleton(1, 2).unwrap();
        assert_eq!(code.a, 4);
        assert_eq!(verify_disjunct(&code, 1).unwrap(), Ok(()));
        let code = kautz_singleton(1, 3).unwrap();
        assert_eq!(verify_disjunct(&code, 1).unwrap(), Ok(()));
    }

    #[test]
    fn ks_2_20() {
        let code = kautz_singleton(2, 20).unwrap();
        assert_eq!(verify_disjunct(&code, 2).unwrap(), Ok(()));
        assert!(code.rows.iter().all(|r| r.iter().all(|&c| (1..=20).contains(&c))));
    }

    #[test]
    fn identity_and_duplicates() {
        assert_eq!(verify_disjunct(&SuperimposedCode::identity(4), 3).unwrap(), Ok(()));
        let dup = SuperimposedCode::from_columns(3, 1, &[vec![0, 1], vec![0, 1], vec![2]]);
        assert_eq!(verify_disjunct(&dup, 1).unwrap(), Err(DisjunctCounterexample { cover: vec![2], covered: 1 }));
    }
}
