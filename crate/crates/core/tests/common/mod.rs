// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Seeded stream generators shared by the integration tests.

#![allow(dead_code)]

use crprecis::{ModelTag, StreamUpdate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn up(item: u64, delta: i64) -> StreamUpdate {
    StreamUpdate::new(item, delta).unwrap()
}

/// Random turnstile stream that never drives a frequency negative.
pub fn strict_stream(rng: &mut TestRng, n: u64, len: usize, support: u64) -> Vec<StreamUpdate> {
    let support = support.clamp(1, n);
    let pool: Vec<u64> = rand::seq::index::sample(rng, n as usize, support as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    let mut freq = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        let item = *pool.choose(rng).unwrap();
        let f: &mut i64 = freq.entry(item).or_insert(0);
        if *f > 0 && rng.gen_bool(0.3) {
            let d = rng.gen_range(1..=*f);
            *f -= d;
            out.push(up(item, -d));
        } else {
            let d = rng.gen_range(1..=20);
            *f += d;
            out.push(up(item, d));
        }
    }
    out
}

/// Random stream with mixed signs and many cancellations.
pub fn general_stream(rng: &mut TestRng, n: u64, len: usize, support: u64) -> Vec<StreamUpdate> {
    let support = support.clamp(1, n);
    let pool: Vec<u64> = rand::seq::index::sample(rng, n as usize, support as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    let mut out: Vec<StreamUpdate> = Vec::with_capacity(len);
    while out.len() < len {
        let item = *pool.choose(rng).unwrap();
        let mut d = rng.gen_range(1..=30);
        if rng.gen_bool(0.5) {
            d = -d;
        }
        out.push(up(item, d));
        if rng.gen_bool(0.2) && out.len() < len {
            out.push(up(item, -d));
        }
    }
    out
}

/// `mass` unit insertions drawn from a Zipf law over a random item order.
pub fn zipf_stream(rng: &mut TestRng, n: u64, mass: u64, exponent: f64) -> Vec<StreamUpdate> {
    let mut order: Vec<u64> = (0..n).collect();
    order.shuffle(rng);
    let zipf = Zipf::new(n, exponent).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..mass {
        let rank = zipf.sample(rng) as usize - 1;
        *counts.entry(order[rank]).or_insert(0i64) += 1;
    }
    let mut out: Vec<StreamUpdate> = counts.into_iter().map(|(i, f)| up(i, f)).collect();
    out.shuffle(rng);
    out
}

/// A handful of heavy items plus light noise, with some deletions.
pub fn skewed_stream(rng: &mut TestRng, n: u64, heavy: usize, noise: usize) -> Vec<StreamUpdate> {
    let mut out = Vec::new();
    let mut deletions = Vec::new();
    let items: Vec<u64> = rand::seq::index::sample(rng, n as usize, heavy + noise)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    for &item in &items[..heavy] {
        let f = rng.gen_range(20..200);
        out.push(up(item, f + 5));
        deletions.push(up(item, -5));
    }
    for &item in &items[heavy..] {
        out.push(up(item, rng.gen_range(1..4)));
    }
    out.shuffle(rng);
    out.extend(deletions);
    out
}

pub fn model_of(general: bool) -> ModelTag {
    if general {
        ModelTag::General
    } else {
        ModelTag::Strict
    }
}
