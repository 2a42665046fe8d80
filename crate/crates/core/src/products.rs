// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Inner-product (join size) estimates from two sketches that share
//! their parameters and primes.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::sketch::{wide, Counter, CrPrecis};

/// Sketches of streams `R` (frequencies `f`) and `S` (frequencies `g`).
#[derive(Debug, Clone, Copy)]
pub struct SketchPair<'a, C: Counter = i64> {
    r: &'a CrPrecis<C>,
    s: &'a CrPrecis<C>,
}

impl<'a, C: Counter> SketchPair<'a, C> {
    pub fn new(r: &'a CrPrecis<C>, s: &'a CrPrecis<C>) -> Result<Self> {
        if !r.compatible(s) {
            return Err(Error::ParamMismatch);
        }
        Ok(Self { r, s })
    }

    /// `sum_b T_j[b] U_j[b]` for every table `j`, in 128-bit arithmetic.
    pub fn table_products(&self) -> Result<Vec<i128>> {
        self.r
            .tables()
            .iter()
            .zip(self.s.tables())
            .map(|(t, u)| {
                t.iter().zip(u).try_fold(0i128, |acc, (&a, &b)| {
                    acc.checked_add(wide(a) * wide(b)).ok_or(Error::Overflow)
                })
            })
            .collect()
    }

    /// Minimum per-table product. On strict streams
    /// `f.g <= est <= f.g + ceil(log_k N) m_R m_S / t`.
    pub fn inner_product_strict(&self) -> Result<i128> {
        Ok(self
            .table_products()?
            .into_iter()
            .min()
            .expect("at least one table"))
    }

    /// Mean per-table product. On any streams
    /// `|est - f.g| <= (ceil(log_k N) - 1) L_1(R) L_1(S) / t`.
    pub fn inner_product_general(&self) -> Result<Ratio<i128>> {
        let products = self.table_products()?;
        let t = products.len() as i128;
        let sum = products
            .into_iter()
            .try_fold(0i128, |acc, p| acc.checked_add(p))
            .ok_or(Error::Overflow)?;
        Ok(Ratio::new(sum, t))
    }

    /// `ceil(log_k N) m_R m_S / t`.
    pub fn strict_bound(&self, m_r: i128, m_s: i128) -> Ratio<i128> {
        let params = self.r.params();
        Ratio::new(params.log_k_n() as i128 * m_r * m_s, params.t() as i128)
    }

    /// `(ceil(log_k N) - 1) L_1(R) L_1(S) / t`.
    pub fn general_bound(&self, l1_r: i128, l1_s: i128) -> Ratio<i128> {
        let params = self.r.params();
        Ratio::new(
            (params.log_k_n() as i128 - 1) * l1_r * l1_s,
            params.t() as i128,
        )
    }
}
