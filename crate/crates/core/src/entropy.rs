// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Multiplicative-factor entropy estimation from one strict sketch.
//!
//! Items estimated at `m / c` or more are treated individually through a
//! corrected lower estimate `f'`; those estimates are then removed from
//! the tables and the entropy of what remains is read off the counters.
//! Logarithms are base 2.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::primes::{ceil_log, SketchParams};
use crate::sketch::{wide, Counter, CrPrecis};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyParams<F> {
    alpha: F,
    eps: F,
    c: u64,
}

impl<F: Float> EntropyParams<F> {
    /// `alpha > 1`, `0 < eps < 1/4`, frequent-threshold divisor 4.
    pub fn new(alpha: F, eps: F) -> Result<Self> {
        Self::with_divisor(alpha, eps, 4)
    }

    pub fn with_divisor(alpha: F, eps: F, c: u64) -> Result<Self> {
        let quarter = F::from(0.25).unwrap();
        if !(alpha > F::one()) {
            return Err(Error::InvalidParams("alpha must exceed 1".into()));
        }
        if !(eps > F::zero() && eps < quarter) {
            return Err(Error::InvalidParams("eps must lie in (0, 1/4)".into()));
        }
        if c == 0 {
            return Err(Error::InvalidParams("divisor c must be positive".into()));
        }
        Ok(Self { alpha, eps, c })
    }

    pub fn alpha(&self) -> F {
        self.alpha
    }

    pub fn eps(&self) -> F {
        self.eps
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    /// `alpha / (1 - eps)`.
    pub fn effective_factor(&self) -> F {
        self.alpha / (F::one() - self.eps)
    }

    /// `ceil(2 m^(1/alpha) / (eps c))`.
    pub fn required_width(&self, m: i128) -> usize {
        let m = F::from(m.max(1)).unwrap();
        let two = F::one() + F::one();
        (two * m.powf(self.alpha.recip()) / (self.eps * F::from(self.c).unwrap()))
            .ceil()
            .to_usize()
            .expect("width fits in usize")
    }

    /// Height `k`, width `max(required_width(m), ceil(log_k n))`.
    pub fn sketch_params(&self, n: u64, m: i128, k: u64) -> Result<SketchParams> {
        let t = self
            .required_width(m)
            .max(ceil_log(k.max(2), n.max(2)) as usize);
        SketchParams::new(k, t, n)
    }
}

/// How candidate frequent items are found.
#[derive(Debug, Clone, Copy)]
pub enum Discovery<'a> {
    /// Point-query every item of the domain.
    Scan,
    /// Point-query only these items, e.g. survivors of a dyadic search or
    /// of a Misra-Gries summary on an insert-only stream.
    Candidates(&'a [u64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate<F> {
    pub h_dense: F,
    pub h_sparse: F,
    pub total: F,
    /// Discovered items with their corrected frequency `f'`, rounded up
    /// and capped at the point estimate.
    pub discovered: Vec<(u64, i128)>,
}

/// Estimates the entropy of a strict stream of mass `m` scanning the whole
/// domain for frequent items.
pub fn estimate_entropy<C: Counter, F: Float>(
    sk: &CrPrecis<C>,
    p: &EntropyParams<F>,
    m: i128,
) -> Result<EntropyEstimate<F>> {
    estimate_entropy_with(sk, p, m, Discovery::Scan)
}

/// The input sketch is left untouched; deductions happen on a copy.
pub fn estimate_entropy_with<C: Counter, F: Float>(
    sk: &CrPrecis<C>,
    p: &EntropyParams<F>,
    m: i128,
    discovery: Discovery<'_>,
) -> Result<EntropyEstimate<F>> {
    if m <= 0 {
        return Err(Error::NonPositiveMass(m));
    }
    let t = sk.params().t();
    let required = p.required_width(m);
    if t < required {
        return Err(Error::UnderProvisioned(format!(
            "entropy needs width {required}, sketch has {t}"
        )));
    }
    let c = p.c as i128;
    let mf = F::from(m).unwrap();
    let tf = F::from(t).unwrap();

    let frequent: Vec<(u64, i128)> = match discovery {
        Discovery::Scan => sk
            .strict_estimates()
            .into_iter()
            .enumerate()
            .map(|(x, est)| (x as u64, wide(est)))
            .filter(|&(_, est)| est * c >= m)
            .collect(),
        Discovery::Candidates(items) => {
            let mut items = items.to_vec();
            items.sort_unstable();
            items.dedup();
            let mut out = Vec::new();
            for x in items {
                let est = wide(sk.point_estimate_strict(x)?);
                if est * c >= m {
                    out.push((x, est));
                }
            }
            out
        }
    };

    let mut work = sk.clone();
    let mut h_dense = F::zero();
    let mut discovered = Vec::with_capacity(frequent.len());
    for (x, est) in frequent {
        // f' = (est - eps m / t) / (1 - eps / t); frequencies are integers so
        // the bound is rounded up, and it never exceeds the estimate itself
        let raw = (F::from(est).unwrap() - p.eps * mf / tf) / (F::one() - p.eps / tf);
        let corrected = raw.ceil().to_i128().ok_or(Error::Overflow)?.min(est);
        if corrected <= 0 {
            continue;
        }
        let share = F::from(corrected).unwrap() / mf;
        h_dense = h_dense + share * share.recip().log2();
        discovered.push((x, corrected));
        work.deduct(x, i64::try_from(corrected).map_err(|_| Error::Overflow)?)?;
    }

    let cap = mf / (p.eps * F::from(p.c).unwrap());
    let mut h_sparse = F::zero();
    for table in work.tables() {
        for &counter in table {
            // counters pushed below zero by the deduction count as empty
            let v = F::from(wide(counter).max(0)).unwrap();
            if v > F::zero() && v <= cap {
                let share = v / mf;
                h_sparse = h_sparse + share * share.recip().log2();
            }
        }
    }
    h_sparse = h_sparse / tf;

    Ok(EntropyEstimate {
        h_dense,
        h_sparse,
        total: h_dense + h_sparse,
        discovered,
    })
}
