// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Dyadic intervals and a per-level stack of sketches for range sums and
//! suffix-sum quantiles over strict streams.

use num_rational::Ratio;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::oracle::quantile_count;
use crate::primes::SketchParams;
use crate::sketch::{wide, Counter, CrPrecis, StreamUpdate};

/// `[index * 2^level, (index + 1) * 2^level - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, index: u64) -> Self {
        Self { level, index }
    }

    pub fn start(&self) -> u64 {
        self.index << self.level
    }

    pub fn end(&self) -> u64 {
        ((self.index + 1) << self.level) - 1
    }

    pub fn len(&self) -> u64 {
        1 << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Left and right halves one level down; `None` at level 0.
    pub fn children(&self) -> Option<(Self, Self)> {
        (self.level > 0).then(|| {
            (
                Self::new(self.level - 1, 2 * self.index),
                Self::new(self.level - 1, 2 * self.index + 1),
            )
        })
    }

    pub fn contains(&self, x: u64) -> bool {
        self.start() <= x && x <= self.end()
    }
}

/// Smallest power of two `>= n` and its exponent.
pub fn padded_domain(n: u64) -> (u64, u32) {
    let padded = n.max(1).next_power_of_two();
    (padded, padded.trailing_zeros())
}

/// Splits `[l, r]` into its maximal dyadic intervals, left to right.
pub fn decompose(l: u64, r: u64, n: u64) -> Result<Vec<DyadicInterval>> {
    if l > r || r >= n {
        return Err(Error::InvalidRange { l, r, n });
    }
    let (_, depth) = padded_domain(n);
    let mut out = Vec::new();
    let mut pos = l;
    while pos <= r {
        let mut level = pos.trailing_zeros().min(depth);
        while (pos + (1u64 << level) - 1) > r {
            level -= 1;
        }
        out.push(DyadicInterval::new(level, pos >> level));
        pos += 1u64 << level;
    }
    Ok(out)
}

/// One sketch per dyadic level `0 ..= log2(N)`; level `l` sees item
/// `i >> l` for every update of item `i`. Non-power-of-two domains are
/// padded with never-updated items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicLevels<C: Counter = i64> {
    n: u64,
    depth: u32,
    levels: Vec<CrPrecis<C>>,
}

impl<C: Counter> DyadicLevels<C> {
    /// `params_for(level, level_domain)` chooses each level's parameters.
    pub fn new<P>(n: u64, mut params_for: P) -> Result<Self>
    where
        P: FnMut(u32, u64) -> Result<SketchParams>,
    {
        if n < 2 {
            return Err(Error::InvalidParams(format!("domain size must be >= 2, got {n}")));
        }
        let (padded, depth) = padded_domain(n);
        let levels = (0..=depth)
            .map(|l| {
                let domain = (padded >> l).max(2);
                let params = params_for(l, domain)?;
                if params.n() != domain {
                    return Err(Error::InvalidParams(format!(
                        "level {l} needs domain {domain}, got {}",
                        params.n()
                    )));
                }
                CrPrecis::new(params)
            })
            .collect::<Result<_>>()?;
        Ok(Self { n, depth, levels })
    }

    /// The same height and width at every level (width is raised to
    /// `ceil(log_k N')` where a level needs it).
    pub fn with_raw(n: u64, k: u64, t: usize) -> Result<Self> {
        Self::new(n, |_, domain| {
            let t = t.max(crate::primes::ceil_log(k.max(2), domain) as usize);
            SketchParams::new(k, t, domain)
        })
    }

    /// Every level uses a point estimator with parameter `s_level`.
    pub fn with_accuracy(n: u64, s_level: u64) -> Result<Self> {
        Self::new(n, |_, domain| SketchParams::for_accuracy(s_level, domain))
    }

    /// Range sums within `m / s`: each of the up to `2 log2 N` intervals
    /// gets a `1 / (2 s log2 N)` share.
    pub fn for_range_sum(n: u64, s: u64) -> Result<Self> {
        let (_, depth) = padded_domain(n);
        let per_level = 2 * s.max(1) * u64::from(depth.max(1));
        Self::with_accuracy(n, per_level)
    }

    /// Suffix sums within `epsilon * m`. A suffix touches at most one
    /// interval per level, so one height `k = ceil(1 / epsilon)` is used
    /// throughout with width `ceil(sum_l (ceil(log_k N_l) - 1) / epsilon)`,
    /// which keeps the summed level coefficients at or below `epsilon`.
    pub fn for_quantiles<F: Float>(n: u64, epsilon: F) -> Result<Self> {
        if !(epsilon > F::zero() && epsilon < F::one()) {
            return Err(Error::InvalidParams("epsilon must lie in (0, 1)".into()));
        }
        let (padded, depth) = padded_domain(n);
        let k = epsilon.recip().ceil().to_u64().ok_or(Error::Overflow)?.max(2);
        let excess: u64 = (0..=depth)
            .map(|l| crate::primes::ceil_log(k, (padded >> l).max(2)) - 1)
            .sum();
        let t = (F::from(excess).unwrap() / epsilon)
            .ceil()
            .to_usize()
            .ok_or(Error::Overflow)?
            .max(1);
        Self::with_raw(n, k, t)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `log2` of the padded domain; levels run `0 ..= depth`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn level(&self, l: u32) -> &CrPrecis<C> {
        &self.levels[l as usize]
    }

    pub fn levels(&self) -> &[CrPrecis<C>] {
        &self.levels
    }

    pub fn net_mass(&self) -> C {
        self.levels[0].net_mass()
    }

    /// Feeds `(item >> l, delta)` to every level `l`. A counter overflow
    /// part way through leaves lower levels updated.
    pub fn update(&mut self, u: StreamUpdate) -> Result<()> {
        self.extend(std::iter::once(u))
    }

    pub fn extend<I: IntoIterator<Item = StreamUpdate>>(&mut self, updates: I) -> Result<()> {
        for u in updates {
            if u.item() >= self.n {
                return Err(Error::ItemOutOfRange { item: u.item(), n: self.n });
            }
            for (l, sketch) in self.levels.iter_mut().enumerate() {
                sketch.update(StreamUpdate::new(u.item() >> l, u.delta())?)?;
            }
        }
        Ok(())
    }

    /// Level count and `N` as little-endian `u64`s, then each level's
    /// sketch encoding prefixed by its byte length.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.levels.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        for level in &self.levels {
            let bytes = level.to_bytes()?;
            out.extend_from_slice(&(bytes.len() as u64).to_le_bytes());
            out.extend_from_slice(&bytes);
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let word = |pos: &mut usize| -> Result<u64> {
            let chunk = bytes
                .get(*pos..*pos + 8)
                .ok_or_else(|| Error::Decode("truncated level header".into()))?;
            *pos += 8;
            Ok(u64::from_le_bytes(chunk.try_into().unwrap()))
        };
        let count = word(&mut pos)?;
        let n = word(&mut pos)?;
        if n < 2 {
            return Err(Error::Decode(format!("domain size {n}")));
        }
        let (padded, depth) = padded_domain(n);
        if count != u64::from(depth) + 1 {
            return Err(Error::Decode(format!(
                "{count} levels for domain {n}, expected {}",
                depth + 1
            )));
        }
        let mut levels = Vec::with_capacity(count as usize);
        for l in 0..=depth {
            let len = usize::try_from(word(&mut pos)?).map_err(|_| Error::Overflow)?;
            let end = pos
                .checked_add(len)
                .filter(|&end| end <= bytes.len())
                .ok_or_else(|| Error::Decode(format!("level {l} truncated")))?;
            let sketch = CrPrecis::<C>::from_bytes(&bytes[pos..end])?;
            pos = end;
            if sketch.params().n() != (padded >> l).max(2) {
                return Err(Error::Decode(format!("level {l} has domain {}", sketch.params().n())));
            }
            levels.push(sketch);
        }
        if pos != bytes.len() {
            return Err(Error::Decode(format!("{} trailing bytes", bytes.len() - pos)));
        }
        if levels.windows(2).any(|w| w[0].net_mass() != w[1].net_mass()) {
            return Err(Error::Decode("levels disagree on total mass".into()));
        }
        Ok(Self { n, depth, levels })
    }

    /// Strict point estimate of a dyadic interval's frequency.
    pub fn interval_estimate(&self, iv: DyadicInterval) -> Result<C> {
        let sketch = self
            .levels
            .get(iv.level as usize)
            .ok_or_else(|| Error::InvalidParams(format!("no level {}", iv.level)))?;
        sketch.point_estimate_strict(iv.index)
    }

    /// Strict estimate of `f_[l, r]`; never below the true value.
    pub fn range_sum(&self, l: u64, r: u64) -> Result<i128> {
        decompose(l, r, self.n)?
            .into_iter()
            .map(|iv| self.interval_estimate(iv).map(wide))
            .sum()
    }

    /// Per-level excess coefficient `(ceil(log_k N') - 1) / t`.
    pub fn level_coefficient(&self, l: u32) -> Ratio<i128> {
        self.levels[l as usize].strict_excess_bound(1, 0)
    }

    /// Guaranteed excess of `range_sum(l, r)` for a stream of mass `m`:
    /// the level coefficients of its decomposition, summed, times `m`.
    pub fn range_error_bound(&self, l: u64, r: u64, m: i128) -> Result<Ratio<i128>> {
        Ok(decompose(l, r, self.n)?
            .into_iter()
            .map(|iv| self.level_coefficient(iv.level))
            .sum::<Ratio<i128>>()
            * m)
    }

    /// Sum of all level coefficients; bounds the relative excess of any
    /// suffix sum.
    pub fn suffix_error_fraction(&self) -> Ratio<i128> {
        (0..=self.depth).map(|l| self.level_coefficient(l)).sum()
    }

    /// Estimated `sum_{i >= a} f_i`.
    pub fn suffix_sum(&self, a: u64) -> Result<i128> {
        if a >= self.n {
            return Ok(0);
        }
        self.range_sum(a, self.n - 1)
    }

    /// Suffix-sum quantiles `a_1 .. a_ceil(1/phi)`.
    ///
    /// For each `j` the search bisects on "estimated suffix mass of `a` is at
    /// least `min(j phi, 1) m`", keeping a position where the predicate holds
    /// and one where it fails. Any such boundary has true suffix mass in
    /// `[(j phi - eps) m, (j phi) m + f_a)`.
    pub fn quantiles<F: Float>(&self, q: &QuantileQuery<F>) -> Result<Vec<u64>> {
        let m = wide(self.net_mass());
        if m <= 0 {
            return Err(Error::NonPositiveMass(m));
        }
        let slack = self.suffix_error_fraction();
        let slack_f = F::from(*slack.numer()).unwrap() / F::from(*slack.denom()).unwrap();
        if slack_f > q.epsilon {
            return Err(Error::UnderProvisioned(format!(
                "suffix sums may err by {slack} of the mass, more than epsilon"
            )));
        }
        let mf = F::from(m).unwrap();
        (1..=quantile_count(q.phi))
            .map(|j| {
                let target = (F::from(j).unwrap() * q.phi).min(F::one()) * mf;
                let mut lo = 0u64;
                let mut hi = self.n;
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if F::from(self.suffix_sum(mid)?).unwrap() >= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(lo)
            })
            .collect()
    }
}

/// A request for `epsilon`-approximate `phi`-quantiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileQuery<F> {
    phi: F,
    epsilon: F,
}

impl<F: Float> QuantileQuery<F> {
    /// Requires `0 < phi <= 1` and `0 < epsilon < phi`.
    pub fn new(phi: F, epsilon: F) -> Result<Self> {
        if !(phi > F::zero() && phi <= F::one()) {
            return Err(Error::InvalidParams("phi must lie in (0, 1]".into()));
        }
        if !(epsilon > F::zero() && epsilon < phi) {
            return Err(Error::InvalidParams("epsilon must lie in (0, phi)".into()));
        }
        Ok(Self { phi, epsilon })
    }

    pub fn phi(&self) -> F {
        self.phi
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    /// `ceil(1 / phi)`.
    pub fn count(&self) -> usize {
        quantile_count(self.phi)
    }
}
