// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Frequent items by leveled dyadic search, and hierarchical heavy hitters
//! by bottom-up traversal of an explicit hierarchy.

use std::collections::BTreeMap;

use num_traits::Float;

use crate::dyadic::{padded_domain, DyadicInterval, DyadicLevels};
use crate::error::{Error, Result};
use crate::hierarchy::Hierarchy;
use crate::primes::SketchParams;
use crate::sketch::{wide, Counter, CrPrecis, StreamUpdate};

/// Threshold parameter `s` (frequent means `f >= m / s`) and slack
/// `epsilon` (nothing below `(1 - epsilon) m / s` is reported).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequentQuery<F> {
    s: u64,
    epsilon: F,
}

impl<F: Float> FrequentQuery<F> {
    pub fn new(s: u64, epsilon: F) -> Result<Self> {
        if s < 1 {
            return Err(Error::InvalidParams("s must be >= 1".into()));
        }
        if !(epsilon > F::zero() && epsilon < F::one()) {
            return Err(Error::InvalidParams("epsilon must lie in (0, 1)".into()));
        }
        Ok(Self { s, epsilon })
    }

    pub fn s(&self) -> u64 {
        self.s
    }

    pub fn epsilon(&self) -> F {
        self.epsilon
    }

    /// Point-estimator parameter `ceil(s / epsilon)`.
    pub fn estimator_parameter(&self) -> u64 {
        (F::from(self.s).unwrap() / self.epsilon)
            .ceil()
            .to_u64()
            .expect("estimator parameter fits in u64")
    }
}

impl<C: Counter> DyadicLevels<C> {
    /// Levels provisioned for `frequent_items` under `q`.
    pub fn for_frequent<F: Float>(n: u64, q: &FrequentQuery<F>) -> Result<Self> {
        Self::with_accuracy(n, q.estimator_parameter())
    }
}

/// Per-level bookkeeping from one frequent-items search.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequentTrace {
    pub items: Vec<u64>,
    /// `(level, intervals examined, intervals kept)`, top level first.
    pub levels: Vec<(u32, usize, usize)>,
}

/// Items whose strict estimate is at least `m / s`.
pub fn frequent_items<C: Counter, F: Float>(
    dl: &DyadicLevels<C>,
    q: &FrequentQuery<F>,
) -> Result<Vec<u64>> {
    frequent_items_traced(dl, q).map(|t| t.items)
}

/// `frequent_items`, also reporting how many intervals each level examined.
///
/// Starts from every interval at level `floor(log2(N / s))` and descends
/// only into intervals whose estimate reaches `m / s`. Estimates never fall
/// below the true interval frequency, so no frequent item is pruned.
pub fn frequent_items_traced<C: Counter, F: Float>(
    dl: &DyadicLevels<C>,
    q: &FrequentQuery<F>,
) -> Result<FrequentTrace> {
    let m = wide(dl.net_mass());
    if m < 0 {
        return Err(Error::NonPositiveMass(m));
    }
    if m == 0 {
        return Ok(FrequentTrace::default());
    }
    let s = q.s() as i128;
    let (padded, _) = padded_domain(dl.n());
    let start = if q.s() >= padded {
        0
    } else {
        (padded / q.s()).ilog2()
    };
    let n = dl.n();
    let mut candidates: Vec<DyadicInterval> = (0..(padded >> start))
        .map(|i| DyadicInterval::new(start, i))
        .filter(|iv| iv.start() < n)
        .collect();
    let mut trace = FrequentTrace::default();
    let mut level = start;
    loop {
        let examined = candidates.len();
        let mut kept = Vec::new();
        for iv in candidates {
            if wide(dl.interval_estimate(iv)?) * s >= m {
                kept.push(iv);
            }
        }
        trace.levels.push((level, examined, kept.len()));
        if level == 0 {
            trace.items = kept.iter().map(|iv| iv.index).collect();
            return Ok(trace);
        }
        candidates = kept
            .iter()
            .filter_map(DyadicInterval::children)
            .flat_map(|(a, b)| [a, b])
            .filter(|iv| iv.start() < n)
            .collect();
        level -= 1;
    }
}

/// Misra-Gries summary for insert-only streams: with `capacity` counters
/// every item of frequency above `m / (capacity + 1)` survives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisraGries {
    capacity: usize,
    counts: BTreeMap<u64, u64>,
}

impl MisraGries {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParams("capacity must be >= 1".into()));
        }
        Ok(Self {
            capacity,
            counts: BTreeMap::new(),
        })
    }

    /// Records `count` insertions of `item`.
    pub fn insert(&mut self, item: u64, mut count: u64) {
        if let Some(c) = self.counts.get_mut(&item) {
            *c += count;
            return;
        }
        while count > 0 {
            if self.counts.len() < self.capacity {
                self.counts.insert(item, count);
                return;
            }
            // decrement everyone (the new item included) by the smallest stored count
            let min = *self.counts.values().min().expect("non-empty at capacity");
            let step = min.min(count);
            count -= step;
            self.counts.retain(|_, c| {
                *c -= step;
                *c > 0
            });
        }
    }

    /// Accepts an update; deletions are rejected since the summary is
    /// insert-only.
    pub fn update(&mut self, u: StreamUpdate) -> Result<()> {
        if u.delta() < 0 {
            return Err(Error::InvalidParams(
                "Misra-Gries discovery needs an insert-only stream".into(),
            ));
        }
        self.insert(u.item(), u.delta() as u64);
        Ok(())
    }

    /// Surviving items, ascending.
    pub fn candidates(&self) -> Vec<u64> {
        self.counts.keys().copied().collect()
    }
}

/// One declared hierarchical heavy hitter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HhhEntry {
    pub node: usize,
    pub name: String,
    /// Estimated frequency minus the estimates of its nearest declared
    /// descendants.
    pub discounted: i128,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HhhReport {
    pub entries: Vec<HhhEntry>,
}

impl HhhReport {
    pub fn nodes(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.node).collect()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.entries.iter().any(|e| e.node == node)
    }
}

/// One sketch per hierarchy depth; depth `d` counts the depth-`d`
/// ancestor of each updated leaf.
#[derive(Debug, Clone)]
pub struct HhhSketch<C: Counter = i64> {
    hierarchy: Hierarchy,
    levels: Vec<CrPrecis<C>>,
}

impl<C: Counter> HhhSketch<C> {
    pub fn new<P>(hierarchy: Hierarchy, mut params_for: P) -> Result<Self>
    where
        P: FnMut(usize, u64) -> Result<SketchParams>,
    {
        let levels = (0..=hierarchy.height())
            .map(|d| {
                let domain = (hierarchy.nodes_at_depth(d).len() as u64).max(2);
                CrPrecis::new(params_for(d, domain)?)
            })
            .collect::<Result<_>>()?;
        Ok(Self { hierarchy, levels })
    }

    /// Each depth uses parameter `ceil(s^2 h / epsilon)` with `h` the
    /// hierarchy height.
    pub fn for_query<F: Float>(hierarchy: Hierarchy, q: &FrequentQuery<F>) -> Result<Self> {
        let s = F::from(q.s()).unwrap();
        let h = F::from(hierarchy.height().max(1)).unwrap();
        let param = (s * s * h / q.epsilon())
            .ceil()
            .to_u64()
            .ok_or(Error::Overflow)?;
        Self::new(hierarchy, |_, domain| SketchParams::for_accuracy(param, domain))
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    pub fn level(&self, depth: usize) -> &CrPrecis<C> {
        &self.levels[depth]
    }

    pub fn net_mass(&self) -> C {
        self.levels[0].net_mass()
    }

    pub fn update(&mut self, u: StreamUpdate) -> Result<()> {
        let leaf = self.hierarchy.leaf(u.item()).ok_or(Error::ItemOutOfRange {
            item: u.item(),
            n: self.hierarchy.domain(),
        })?;
        for node in self.hierarchy.path_to_root(leaf) {
            let d = self.hierarchy.depth(node);
            let index = self.hierarchy.depth_index(node) as u64;
            self.levels[d].update(StreamUpdate::new(index, u.delta())?)?;
        }
        Ok(())
    }

    pub fn estimate(&self, node: usize) -> Result<C> {
        let d = self.hierarchy.depth(node);
        self.levels[d].point_estimate_strict(self.hierarchy.depth_index(node) as u64)
    }

    /// Bottom-up traversal: each node's estimate is discounted by the
    /// estimates of its nearest declared descendants and declared when the
    /// remainder reaches `m / s`.
    pub fn hhh<F: Float>(&self, q: &FrequentQuery<F>) -> Result<HhhReport> {
        let m = wide(self.net_mass());
        if m < 0 {
            return Err(Error::NonPositiveMass(m));
        }
        let mut report = HhhReport::default();
        if m == 0 {
            return Ok(report);
        }
        let h = &self.hierarchy;
        let mut est = vec![0i128; h.len()];
        let mut declared = vec![false; h.len()];
        let mut covered = vec![0i128; h.len()];
        for depth in (0..=h.height()).rev() {
            for &node in h.nodes_at_depth(depth) {
                est[node] = wide(self.estimate(node)?);
                let below: i128 = h
                    .children(node)
                    .iter()
                    .map(|&c| if declared[c] { est[c] } else { covered[c] })
                    .sum();
                covered[node] = below;
                let discounted = est[node] - below;
                if discounted * q.s() as i128 >= m {
                    declared[node] = true;
                    report.entries.push(HhhEntry {
                        node,
                        name: h.name(node).to_string(),
                        discounted,
                    });
                }
            }
        }
        Ok(report)
    }
}
