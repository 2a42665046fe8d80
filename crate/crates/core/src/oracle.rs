// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Exact ground truth: the dense frequency vector and brute-force versions
//! of every quantity the sketches estimate.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::sketch::{ModelTag, StreamUpdate};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyOracle {
    model: ModelTag,
    freq: Vec<i64>,
}

impl FrequencyOracle {
    pub fn new(n: u64, model: ModelTag) -> Self {
        Self {
            model,
            freq: vec![0; n as usize],
        }
    }

    pub fn replay<'a, I>(n: u64, model: ModelTag, updates: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a StreamUpdate>,
    {
        let mut oracle = Self::new(n, model);
        for u in updates {
            oracle.apply(*u)?;
        }
        Ok(oracle)
    }

    pub fn n(&self) -> u64 {
        self.freq.len() as u64
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    pub fn frequencies(&self) -> &[i64] {
        &self.freq
    }

    /// Applies an update. In strict mode an update that would drive the
    /// exact frequency negative is rejected and not applied.
    pub fn apply(&mut self, u: StreamUpdate) -> Result<()> {
        let n = self.n();
        let slot = self
            .freq
            .get_mut(u.item() as usize)
            .ok_or(Error::ItemOutOfRange { item: u.item(), n })?;
        let next = slot.checked_add(u.delta()).ok_or(Error::Overflow)?;
        if self.model == ModelTag::Strict && next < 0 {
            return Err(Error::StrictViolation {
                item: u.item(),
                freq: next as i128,
            });
        }
        *slot = next;
        Ok(())
    }

    pub fn exact_point(&self, x: u64) -> Result<i64> {
        self.freq
            .get(x as usize)
            .copied()
            .ok_or(Error::ItemOutOfRange { item: x, n: self.n() })
    }

    pub fn exact_range(&self, l: u64, r: u64) -> Result<i128> {
        if l > r || r >= self.n() {
            return Err(Error::InvalidRange { l, r, n: self.n() });
        }
        Ok(self.freq[l as usize..=r as usize].iter().map(|&f| f as i128).sum())
    }

    /// `sum_{i >= a} f_i`; zero for `a >= N`.
    pub fn suffix_sum(&self, a: u64) -> i128 {
        self.freq
            .iter()
            .skip(a as usize)
            .map(|&f| f as i128)
            .sum()
    }

    /// Net mass `sum f_i` (`m` for strict streams).
    pub fn mass(&self) -> i128 {
        self.freq.iter().map(|&f| f as i128).sum()
    }

    pub fn l1(&self) -> i128 {
        self.freq.iter().map(|&f| (f as i128).abs()).sum()
    }

    /// Items with nonzero frequency, ascending.
    pub fn support(&self) -> Vec<u64> {
        (0..self.n()).filter(|&i| self.freq[i as usize] != 0).collect()
    }

    /// Exact suffix-sum quantiles: for `j = 1 ..= ceil(1/phi)`, the largest
    /// `a` whose suffix mass reaches `min(j phi, 1) m`.
    pub fn exact_quantiles<F: Float>(&self, phi: F) -> Result<Vec<u64>> {
        let m = self.mass();
        if m <= 0 {
            return Err(Error::NonPositiveMass(m));
        }
        if !(phi > F::zero() && phi <= F::one()) {
            return Err(Error::InvalidParams("phi must lie in (0, 1]".into()));
        }
        let count = quantile_count(phi);
        let mf = F::from(m).expect("mass fits in float");
        // suffix[a] = sum_{i >= a} f_i
        let mut suffix = vec![0i128; self.freq.len() + 1];
        for a in (0..self.freq.len()).rev() {
            suffix[a] = suffix[a + 1] + self.freq[a] as i128;
        }
        Ok((1..=count)
            .map(|j| {
                let target = (F::from(j).unwrap() * phi).min(F::one()) * mf;
                (0..self.freq.len())
                    .rev()
                    .find(|&a| F::from(suffix[a]).unwrap() >= target)
                    .unwrap_or(0) as u64
            })
            .collect())
    }

    /// `f . g`.
    pub fn exact_inner(&self, other: &Self) -> i128 {
        self.freq
            .iter()
            .zip(&other.freq)
            .map(|(&f, &g)| f as i128 * g as i128)
            .sum()
    }

    /// `sum |f_i| / L_1 * log2(L_1 / |f_i|)`, skipping zero frequencies.
    pub fn exact_entropy<F: Float>(&self) -> F {
        let l1 = self.l1();
        if l1 == 0 {
            return F::zero();
        }
        let l1f = F::from(l1).unwrap();
        self.freq
            .iter()
            .filter(|&&f| f != 0)
            .map(|&f| {
                let p = F::from((f as i128).abs()).unwrap() / l1f;
                p * (F::one() / p).log2()
            })
            .fold(F::zero(), |a, b| a + b)
    }

    /// Total `|f|` outside the `s` largest-magnitude items; ties go to the
    /// smaller index.
    pub fn residual_mass(&self, s: usize) -> i128 {
        let mut order: Vec<usize> = (0..self.freq.len()).collect();
        order.sort_by(|&a, &b| {
            self.freq[b]
                .unsigned_abs()
                .cmp(&self.freq[a].unsigned_abs())
                .then(a.cmp(&b))
        });
        order
            .iter()
            .skip(s)
            .map(|&i| (self.freq[i] as i128).abs())
            .sum()
    }

    /// Exact subtree frequency of every hierarchy node.
    pub fn node_frequencies(&self, hier: &Hierarchy) -> Vec<i128> {
        let mut total = vec![0i128; hier.len()];
        for (item, &f) in self.freq.iter().enumerate() {
            let leaf = hier.leaf(item as u64).expect("hierarchy covers domain");
            for node in hier.path_to_root(leaf) {
                total[node] += f as i128;
            }
        }
        total
    }

    /// Exact bottom-up hierarchical heavy hitters: a node is reported when
    /// its frequency minus that of its nearest reported descendants is at
    /// least `m / s`. Returns `(node, discounted frequency)` in traversal
    /// order (deepest level first, then node order).
    pub fn exact_hhh(&self, hier: &Hierarchy, s: u64) -> Vec<(usize, i128)> {
        let m = self.mass();
        let freq = self.node_frequencies(hier);
        let mut declared = vec![false; hier.len()];
        let mut covered = vec![0i128; hier.len()];
        let mut out = Vec::new();
        for depth in (0..=hier.height()).rev() {
            for &node in hier.nodes_at_depth(depth) {
                let below: i128 = hier
                    .children(node)
                    .iter()
                    .map(|&c| if declared[c] { freq[c] } else { covered[c] })
                    .sum();
                covered[node] = below;
                let discounted = freq[node] - below;
                if discounted * s as i128 >= m && m > 0 {
                    declared[node] = true;
                    out.push((node, discounted));
                }
            }
        }
        out
    }
}

pub(crate) fn quantile_count<F: Float>(phi: F) -> usize {
    (F::one() / phi).ceil().to_usize().expect("quantile count fits")
}
