// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Prime table widths and counter-space accounting.
//!
//! A sketch of height `k` and width `t` uses the `t` smallest consecutive
//! primes `k <= q_1 < ... < q_t`. Two distinct items below `N` can share a
//! residue modulo at most `ceil(log_k N) - 1` of them, which is what every
//! estimator in this crate relies on.

use crate::error::{Error, Result};

/// Least `r` with `base^r >= n`, computed in integer arithmetic.
pub fn ceil_log(base: u64, n: u64) -> u64 {
    assert!(base >= 2, "ceil_log base must be >= 2");
    let mut r = 0;
    let mut power: u128 = 1;
    while power < n as u128 {
        power *= base as u128;
        r += 1;
    }
    r
}

/// Height, width and domain size of a sketch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SketchParams {
    k: u64,
    t: usize,
    n: u64,
}

impl SketchParams {
    /// Rejects `k < 2`, `t < 1`, `n < 2`, and widths below `ceil(log_k n)`.
    pub fn new(k: u64, t: usize, n: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!("height k must be >= 2, got {k}")));
        }
        if t < 1 {
            return Err(Error::InvalidParams("width t must be >= 1".into()));
        }
        if n < 2 {
            return Err(Error::InvalidParams(format!("domain size must be >= 2, got {n}")));
        }
        let r = ceil_log(k, n);
        if (t as u64) < r {
            return Err(Error::InvalidParams(format!(
                "width t = {t} is below ceil(log_{k} {n}) = {r}"
            )));
        }
        Ok(Self { k, t, n })
    }

    /// Height `s`, width `s * ceil(log_s n)`: a point estimator whose
    /// strict-model excess stays below `m / s`.
    pub fn for_accuracy(s: u64, n: u64) -> Result<Self> {
        let s = s.max(2);
        let t = s.saturating_mul(ceil_log(s, n.max(2)));
        Self::new(s, t as usize, n)
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `ceil(log_k N)`, the collision-count ceiling plus one.
    pub fn log_k_n(&self) -> u64 {
        ceil_log(self.k, self.n)
    }
}

/// Ascending list of the table moduli.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeSet(Vec<u64>);

impl PrimeSet {
    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    /// Total number of counters across all tables.
    pub fn total_counters(&self) -> u64 {
        self.0.iter().sum()
    }
}

impl std::ops::Index<usize> for PrimeSet {
    type Output = u64;

    fn index(&self, j: usize) -> &u64 {
        &self.0[j]
    }
}

/// Upper estimate of the `n`-th prime, `n (ln n + ln ln n)` for `n >= 6`.
fn nth_prime_upper(n: u64) -> u64 {
    if n < 6 {
        return 13;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64
}

fn sieve(limit: u64) -> Vec<bool> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    composite[0] = true;
    if limit >= 1 {
        composite[1] = true;
    }
    let mut p = 2;
    while p * p <= limit {
        if !composite[p] {
            let mut m = p * p;
            while m <= limit {
                composite[m] = true;
                m += p;
            }
        }
        p += 1;
    }
    composite
}

/// The `t` smallest consecutive primes `>= k`.
pub fn select_primes(k: u64, t: usize) -> Result<PrimeSet> {
    if k < 2 {
        return Err(Error::InvalidParams(format!("height k must be >= 2, got {k}")));
    }
    if t < 1 {
        return Err(Error::InvalidParams("width t must be >= 1".into()));
    }
    // pi(k) < 1.26 k / ln k, so the t-th prime past k has index below this.
    let kf = k as f64;
    let index = (1.26 * kf / kf.ln().max(1.0)).ceil() as u64 + t as u64 + 1;
    let mut limit = nth_prime_upper(index).max(k + 2);
    loop {
        let composite = sieve(limit);
        let primes: Vec<u64> = (k..=limit)
            .filter(|&x| !composite[x as usize])
            .take(t)
            .collect();
        if primes.len() == t {
            return Ok(PrimeSet(primes));
        }
        limit = limit.checked_mul(2).ok_or(Error::Overflow)?;
    }
}

/// Explicit upper bound on `total_counters(select_primes(k, t))`.
///
/// Sums `n (ln n + log2 n)` over `n = a ..= a + t` with
/// `a = ceil(k / ln k) + t`; each term dominates the `n`-th prime.
/// Only defined for `k >= 12`.
pub fn space_bound(k: u64, t: usize) -> Result<u64> {
    if k < 12 {
        return Err(Error::InvalidParams(format!(
            "space bound requires height k >= 12, got {k}"
        )));
    }
    if t < 1 {
        return Err(Error::InvalidParams("width t must be >= 1".into()));
    }
    let kf = k as f64;
    let a = (kf / kf.ln()).ceil() as u64 + t as u64;
    let total: f64 = (a..=a + t as u64)
        .map(|n| {
            let x = n as f64;
            x * (x.ln() + x.log2())
        })
        .sum();
    Ok(total.ceil() as u64)
}
