// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Deterministic summaries for update streams built on CR-precis tables:
//! `t` counter tables whose sizes are consecutive primes `>= k`.
//!
//! Two distinct items below `N` share a counter in at most
//! `ceil(log_k N) - 1` tables, which gives one-sided point estimates on
//! strict streams and two-sided ones on general streams. On top of that
//! this crate builds range sums, suffix-sum quantiles, frequent items,
//! hierarchical heavy hitters, inner products and an entropy estimator,
//! plus an exact oracle to check them against.
//!
//! ```
//! use crprecis::{CrPrecis, SketchParams, StreamUpdate};
//!
//! let mut sketch: CrPrecis = CrPrecis::new(SketchParams::new(5, 2, 16)?)?;
//! for (item, delta) in [(3, 5), (8, 2), (13, 1)] {
//!     sketch.update(StreamUpdate::new(item, delta)?)?;
//! }
//! assert_eq!(sketch.point_estimate_strict(3)?, 5);
//! # Ok::<(), crprecis::Error>(())
//! ```
//!
//! Counter tables are generic over the signed integer type and float-valued
//! parameters over [`num_traits::Float`]; the aliases below fix the common
//! choices.

pub mod adversarial;
pub mod dyadic;
pub mod entropy;
mod error;
pub mod heavy;
pub mod hierarchy;
pub mod oracle;
pub mod primes;
pub mod products;
pub mod sketch;

pub use adversarial::{reconstruct, reconstruction_params, LeveledInstance};
pub use dyadic::{decompose, DyadicInterval, DyadicLevels, QuantileQuery};
pub use entropy::{estimate_entropy, estimate_entropy_with, Discovery, EntropyEstimate, EntropyParams};
pub use error::{Error, Result};
pub use heavy::{frequent_items, frequent_items_traced, FrequentQuery, HhhReport, HhhSketch, MisraGries};
pub use hierarchy::Hierarchy;
pub use oracle::FrequencyOracle;
pub use primes::{ceil_log, select_primes, space_bound, PrimeSet, SketchParams};
pub use products::SketchPair;
pub use sketch::{collision_tables, Counter, CrPrecis, ModelTag, StreamUpdate};

pub use num_rational::Ratio;

/// Sketch with 64-bit counters, the serialized width.
pub type CrPrecis64 = CrPrecis<i64>;
/// Sketch with 32-bit counters for small streams.
pub type CrPrecis32 = CrPrecis<i32>;
pub type DyadicLevels64 = DyadicLevels<i64>;
pub type HhhSketch64 = HhhSketch<i64>;
pub type QuantileQueryF64 = QuantileQuery<f64>;
pub type QuantileQueryF32 = QuantileQuery<f32>;
pub type FrequentQueryF64 = FrequentQuery<f64>;
pub type FrequentQueryF32 = FrequentQuery<f32>;
pub type EntropyParamsF64 = EntropyParams<f64>;
pub type EntropyParamsF32 = EntropyParams<f32>;
pub type EntropyEstimateF64 = EntropyEstimate<f64>;
/// Exact rational used for general-model estimates and error bounds.
pub type Rational = Ratio<i128>;
