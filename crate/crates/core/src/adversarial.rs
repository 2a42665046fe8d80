// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Leveled hard instances for point estimators, and the level-by-level
//! reconstruction that any estimator with error below `m / (8 s)` must
//! support.
//!
//! An instance places `s` distinct items on each of `s` levels; an item on
//! level `l` has frequency `floor(2^l / s)`. Peeling the top level off with
//! exact deletions and querying again recovers every level in turn.

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::primes::SketchParams;
use crate::sketch::{wide, CrPrecis, StreamUpdate};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeveledInstance {
    s: usize,
    n: u64,
    /// `levels[l - 1]` holds the items of level `l`, ascending.
    levels: Vec<Vec<u64>>,
    updates: Vec<StreamUpdate>,
}

/// `floor(2^l / s)`.
pub fn level_frequency(l: usize, s: usize) -> i64 {
    ((1u128 << l) / s as u128) as i64
}

impl LeveledInstance {
    /// Seeded instance with `s` levels over `[0, n)`; requires `64 s^2 <= n`.
    pub fn generate(s: usize, n: u64, seed: u64) -> Result<Self> {
        if s < 1 {
            return Err(Error::InvalidParams("need at least one level".into()));
        }
        if s >= 62 {
            return Err(Error::InvalidParams(format!("s = {s} overflows level frequencies")));
        }
        let squared = (s * s) as u64;
        if 64 * squared > n {
            return Err(Error::InvalidParams(format!(
                "s = {s} needs a domain of at least {} items, got {n}",
                64 * squared
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut items: Vec<u64> = sample(&mut rng, n as usize, s * s)
            .into_iter()
            .map(|i| i as u64)
            .collect();
        items.shuffle(&mut rng);
        let levels: Vec<Vec<u64>> = items
            .chunks(s)
            .map(|chunk| {
                let mut level = chunk.to_vec();
                level.sort_unstable();
                level
            })
            .collect();
        let mut updates = Vec::new();
        for (idx, level) in levels.iter().enumerate() {
            let f = level_frequency(idx + 1, s);
            if f == 0 {
                continue;
            }
            for &item in level {
                updates.push(StreamUpdate::new(item, f)?);
            }
        }
        updates.shuffle(&mut rng);
        Ok(Self { s, n, levels, updates })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn levels(&self) -> &[Vec<u64>] {
        &self.levels
    }

    pub fn updates(&self) -> &[StreamUpdate] {
        &self.updates
    }

    /// Items of level `l` (1-based).
    pub fn level(&self, l: usize) -> &[u64] {
        &self.levels[l - 1]
    }

    pub fn frequency(&self, l: usize) -> i64 {
        level_frequency(l, self.s)
    }

    /// Mass of levels `1 ..= l`.
    pub fn mass_through(&self, l: usize) -> i64 {
        (1..=l).map(|j| self.s as i64 * self.frequency(j)).sum()
    }

    /// The assignment as observable from the stream: levels whose
    /// frequency floors to zero are empty.
    pub fn observable(&self) -> Vec<Vec<u64>> {
        self.levels
            .iter()
            .enumerate()
            .map(|(idx, level)| {
                if self.frequency(idx + 1) == 0 {
                    Vec::new()
                } else {
                    level.clone()
                }
            })
            .collect()
    }

    /// Levels `l` carrying mass where `t_l - t_{l-1} > 2 m_l / s'` fails.
    pub fn separation_failures(&self, s_prime: u64) -> Vec<usize> {
        (2..=self.s)
            .filter(|&l| self.frequency(l) > 0)
            .filter(|&l| {
                let gap = (self.frequency(l) - self.frequency(l - 1)) as i128;
                gap * s_prime as i128 <= 2 * self.mass_through(l) as i128
            })
            .collect()
    }

    /// Lowest level from which separation holds at every higher level.
    pub fn separated_from(&self, s_prime: u64) -> usize {
        self.separation_failures(s_prime)
            .last()
            .map_or(1, |&l| l + 1)
    }
}

/// Parameters of the estimator the reconstruction uses: `s' = 8 s`,
/// height `s'`, width `s' ceil(log_s' N)`.
pub fn reconstruction_params(s: usize, n: u64) -> Result<SketchParams> {
    SketchParams::for_accuracy(8 * s as u64, n)
}

/// Recovers the level assignment from a sketch of the instance.
///
/// Iteration `r` handles level `l = s - r + 1`: every item whose estimate
/// reaches `t_l - m_l / s'` is taken as a level-`l` item and its exact
/// frequency is deleted. Zero-frequency levels come back empty.
pub fn reconstruct(
    instance: &LeveledInstance,
    sketch: &CrPrecis,
) -> Result<Vec<Vec<u64>>> {
    let s = instance.s();
    let s_prime = 8 * s as i128;
    let mut work = sketch.clone();
    let mut out = vec![Vec::new(); s];
    for l in (1..=s).rev() {
        let t_l = instance.frequency(l) as i128;
        if t_l == 0 {
            continue;
        }
        let m_l = instance.mass_through(l) as i128;
        if wide(work.net_mass()) != m_l {
            return Err(Error::Reconstruction {
                level: l,
                detail: format!("remaining mass {} differs from m_l = {m_l}", wide(work.net_mass())),
            });
        }
        // est >= t_l - m_l / s'  <=>  est * s' >= t_l * s' - m_l
        let found: Vec<(u64, i128)> = work
            .strict_estimates()
            .into_iter()
            .enumerate()
            .map(|(x, est)| (x as u64, wide(est)))
            .filter(|&(_, est)| est * s_prime >= t_l * s_prime - m_l)
            .collect();
        let items: Vec<u64> = found.iter().map(|&(x, _)| x).collect();
        if items != instance.level(l) {
            return Err(Error::Reconstruction {
                level: l,
                detail: format!(
                    "expected {:?}, recovered (item, estimate) {:?}",
                    instance.level(l),
                    found
                ),
            });
        }
        for &x in &items {
            work.deduct(x, t_l as i64)?;
        }
        out[l - 1] = items;
    }
    Ok(out)
}
