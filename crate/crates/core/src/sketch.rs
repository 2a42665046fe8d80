// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! The CR-precis counter tables.
//!
//! Table `j` holds `q_j` counters and item `i` lands in counter `i mod q_j`.
//! Every update touches exactly one counter per table, so each table sums
//! to the net stream mass. Queries read the `t` counters an item maps to:
//! the minimum for strict streams, the mean for general ones.

use num_rational::Ratio;
use num_traits::{NumCast, PrimInt, Signed, Zero};

use crate::error::{Error, Result};
use crate::primes::{select_primes, PrimeSet, SketchParams};

/// Signed integer counter type usable in the tables.
pub trait Counter: PrimInt + Signed + NumCast + Default + std::fmt::Debug + Send + Sync + 'static {}

impl<T> Counter for T where T: PrimInt + Signed + NumCast + Default + std::fmt::Debug + Send + Sync + 'static {}

/// Update model of a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    /// Every exact frequency stays `>= 0`.
    Strict,
    /// Frequencies may take any sign.
    General,
}

/// One arrival `(item, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamUpdate {
    item: u64,
    delta: i64,
}

impl StreamUpdate {
    pub fn new(item: u64, delta: i64) -> Result<Self> {
        if delta == 0 {
            return Err(Error::ZeroDelta);
        }
        Ok(Self { item, delta })
    }

    pub fn item(&self) -> u64 {
        self.item
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }
}

/// A CR-precis summary over the domain `[0, N)`.
///
/// Single writer; concurrent readers only while no update is in flight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrPrecis<C: Counter = i64> {
    params: SketchParams,
    primes: PrimeSet,
    tables: Vec<Vec<C>>,
    net_mass: C,
}

impl<C: Counter> CrPrecis<C> {
    pub fn new(params: SketchParams) -> Result<Self> {
        let primes = select_primes(params.k(), params.t())?;
        let tables = primes.iter().map(|q| vec![C::zero(); q as usize]).collect();
        Ok(Self {
            params,
            primes,
            tables,
            net_mass: C::zero(),
        })
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn primes(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn tables(&self) -> &[Vec<C>] {
        &self.tables
    }

    /// Whether every counter is zero.
    pub fn is_empty(&self) -> bool {
        self.tables.iter().all(|t| t.iter().all(Zero::is_zero))
    }

    /// Exact sum of every delta applied so far (`m` for strict streams).
    pub fn net_mass(&self) -> C {
        self.net_mass
    }

    fn check_item(&self, item: u64) -> Result<()> {
        if item >= self.params.n() {
            return Err(Error::ItemOutOfRange {
                item,
                n: self.params.n(),
            });
        }
        Ok(())
    }

    fn apply(&mut self, item: u64, delta: i64) -> Result<()> {
        self.check_item(item)?;
        let delta: C = NumCast::from(delta).ok_or(Error::Overflow)?;
        let mass = self.net_mass.checked_add(&delta).ok_or(Error::Overflow)?;
        // compute every new value first so an overflow leaves the sketch untouched
        let mut next = Vec::with_capacity(self.tables.len());
        for (q, table) in self.primes.iter().zip(&self.tables) {
            let b = (item % q) as usize;
            next.push(table[b].checked_add(&delta).ok_or(Error::Overflow)?);
        }
        for ((q, table), v) in self.primes.iter().zip(self.tables.iter_mut()).zip(next) {
            table[(item % q) as usize] = v;
        }
        self.net_mass = mass;
        Ok(())
    }

    /// Adds `u.delta` to counter `u.item mod q_j` of every table.
    ///
    /// In the strict model a negative exact frequency cannot be detected
    /// here; keeping frequencies non-negative is the caller's contract.
    pub fn update(&mut self, u: StreamUpdate) -> Result<()> {
        self.apply(u.item, u.delta)
    }

    pub fn extend<I: IntoIterator<Item = StreamUpdate>>(&mut self, updates: I) -> Result<()> {
        updates.into_iter().try_for_each(|u| self.update(u))
    }

    /// Subtracts `amount` from every counter `x` maps to.
    pub fn deduct(&mut self, x: u64, amount: i64) -> Result<()> {
        if amount == 0 {
            return self.check_item(x);
        }
        self.apply(x, amount.checked_neg().ok_or(Error::Overflow)?)
    }

    fn residues(&self, x: u64) -> impl Iterator<Item = C> + '_ {
        self.primes
            .iter()
            .zip(&self.tables)
            .map(move |(q, table)| table[(x % q) as usize])
    }

    /// `min_j T_j[x mod q_j]`, clamped below at zero.
    ///
    /// On a strict stream `f_x <= est <= f_x + (ceil(log_k N) - 1)(m - f_x) / t`.
    pub fn point_estimate_strict(&self, x: u64) -> Result<C> {
        self.check_item(x)?;
        let min = self.residues(x).min().unwrap_or_else(C::zero);
        Ok(min.max(C::zero()))
    }

    /// Mean of the `t` counters `x` maps to, as an exact rational.
    ///
    /// On any stream `|est - f_x| <= (ceil(log_k N) - 1)(L_1 - |f_x|) / t`.
    pub fn point_estimate_general(&self, x: u64) -> Result<Ratio<i128>> {
        self.check_item(x)?;
        let sum: i128 = self.residues(x).map(wide).sum();
        Ok(Ratio::new(sum, self.tables.len() as i128))
    }

    /// Strict estimates for every item in `[0, N)`, walking residues
    /// incrementally instead of dividing per item.
    pub fn strict_estimates(&self) -> Vec<C> {
        let n = self.params.n() as usize;
        let mut best = vec![C::max_value(); n];
        for (q, table) in self.primes.iter().zip(&self.tables) {
            let q = q as usize;
            let mut b = 0;
            for slot in best.iter_mut() {
                let v = table[b];
                if v < *slot {
                    *slot = v;
                }
                b += 1;
                if b == q {
                    b = 0;
                }
            }
        }
        for slot in best.iter_mut() {
            *slot = (*slot).max(C::zero());
        }
        best
    }

    /// Upper bound on the strict excess for an item of frequency `f` in a
    /// stream of mass `m`: `(ceil(log_k N) - 1)(m - f) / t`.
    pub fn strict_excess_bound(&self, m: i128, f: i128) -> Ratio<i128> {
        let r = self.params.log_k_n() as i128;
        Ratio::new((r - 1) * (m - f), self.params.t() as i128)
    }

    /// Bound on `|est - f|` for the general estimator:
    /// `(ceil(log_k N) - 1)(L_1 - |f|) / t`.
    pub fn general_error_bound(&self, l1: i128, f: i128) -> Ratio<i128> {
        let r = self.params.log_k_n() as i128;
        Ratio::new((r - 1) * (l1 - f.abs()), self.params.t() as i128)
    }

    /// True when both sketches share parameters and primes.
    pub fn compatible(&self, other: &Self) -> bool {
        self.params == other.params && self.primes == other.primes
    }

    /// Counter-wise sum; equals the sketch of the concatenated streams.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if !self.compatible(other) {
            return Err(Error::ParamMismatch);
        }
        let mass = self.net_mass.checked_add(&other.net_mass).ok_or(Error::Overflow)?;
        let mut merged = self.tables.clone();
        for (mine, theirs) in merged.iter_mut().zip(&other.tables) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a = a.checked_add(b).ok_or(Error::Overflow)?;
            }
        }
        self.tables = merged;
        self.net_mass = mass;
        Ok(())
    }

    /// Little-endian layout: `k`, `t`, `N` as u64, the `t` primes as u64,
    /// then every table's counters in order as i64.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(8 * (3 + self.primes.len() + self.primes.total_counters() as usize));
        out.extend_from_slice(&self.params.k().to_le_bytes());
        out.extend_from_slice(&(self.params.t() as u64).to_le_bytes());
        out.extend_from_slice(&self.params.n().to_le_bytes());
        for q in self.primes.iter() {
            out.extend_from_slice(&q.to_le_bytes());
        }
        for table in &self.tables {
            for c in table {
                let v = c.to_i64().ok_or(Error::Overflow)?;
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut words = Words { bytes, pos: 0 };
        let k = words.next()?;
        let t = words.next()? as usize;
        let n = words.next()?;
        let params = SketchParams::new(k, t, n)?;
        let mut sketch = Self::new(params)?;
        for j in 0..t {
            let q = words.next()?;
            if q != sketch.primes[j] {
                return Err(Error::Decode(format!(
                    "prime {j} is {q}, expected {}",
                    sketch.primes[j]
                )));
            }
        }
        for table in sketch.tables.iter_mut() {
            for c in table.iter_mut() {
                let v = words.next()? as i64;
                *c = NumCast::from(v).ok_or(Error::Overflow)?;
            }
        }
        if words.pos != bytes.len() {
            return Err(Error::Decode(format!(
                "{} trailing bytes",
                bytes.len() - words.pos
            )));
        }
        let sums: Vec<i128> = sketch
            .tables
            .iter()
            .map(|table| table.iter().copied().map(wide).sum())
            .collect();
        if sums.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Decode("tables disagree on total mass".into()));
        }
        sketch.net_mass = NumCast::from(sums[0]).ok_or(Error::Overflow)?;
        Ok(sketch)
    }
}

pub(crate) fn wide<C: Counter>(c: C) -> i128 {
    c.to_i128().expect("counter fits in i128")
}

struct Words<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Words<'_> {
    fn next(&mut self) -> Result<u64> {
        let end = self.pos + 8;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Decode(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(u64::from_le_bytes(chunk.try_into().expect("8-byte chunk")))
    }
}

/// Tables `j` in which `x` and `y` share a counter.
///
/// For distinct items below `N` there are at most `ceil(log_k N) - 1`.
pub fn collision_tables(x: u64, y: u64, primes: &PrimeSet) -> Result<Vec<usize>> {
    if x == y {
        return Err(Error::SameItem(x));
    }
    let diff = x.abs_diff(y);
    Ok(primes
        .iter()
        .enumerate()
        .filter(|&(_, q)| diff % q == 0)
        .map(|(j, _)| j)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sketch_16() -> CrPrecis {
        CrPrecis::new(SketchParams::new(5, 2, 16).unwrap()).unwrap()
    }

    fn up(i: u64, v: i64) -> StreamUpdate {
        StreamUpdate::new(i, v).unwrap()
    }

    #[test]
    fn update_touches_one_counter_per_table() {
        let mut sk = sketch_16();
        assert_eq!(sk.primes().as_slice(), &[5, 7]);
        sk.update(up(13, 3)).unwrap();
        assert_eq!(sk.tables()[0][3], 3);
        assert_eq!(sk.tables()[1][6], 3);
        assert_eq!(sk.net_mass(), 3);
    }

    #[test]
    fn hand_simulated_tables() {
        let mut sk = sketch_16();
        sk.extend([up(3, 5), up(8, 2), up(13, 1)]).unwrap();
        assert_eq!(sk.tables()[0], vec![0, 0, 0, 8, 0]);
        assert_eq!(sk.tables()[1], vec![0, 2, 0, 5, 0, 0, 1]);
        assert_eq!(sk.point_estimate_strict(3).unwrap(), 5);
        assert_eq!(sk.point_estimate_strict(8).unwrap(), 2);
        assert_eq!(sk.point_estimate_strict(13).unwrap(), 1);
        assert_eq!(sk.strict_estimates()[3], 5);
    }

    #[test]
    fn cancellation_empties() {
        let mut sk = sketch_16();
        sk.extend([up(0, 1), up(0, -1)]).unwrap();
        assert!(sk.is_empty());
        assert_eq!(sk.net_mass(), 0);
        assert_eq!(sk.point_estimate_strict(9).unwrap(), 0);
        assert_eq!(sk.point_estimate_general(9).unwrap(), Ratio::from_integer(0));
    }

    #[test]
    fn general_mean_matches_bound() {
        let mut sk = sketch_16();
        sk.extend([up(3, 5), up(8, -2)]).unwrap();
        let est = sk.point_estimate_general(3).unwrap();
        assert_eq!(est, Ratio::from_integer(4));
        let err = (est - Ratio::from_integer(5)).abs();
        assert!(err <= sk.general_error_bound(7, 5));
        assert_eq!(sk.general_error_bound(7, 5), Ratio::from_integer(1));
    }

    #[test]
    fn lone_item_is_exact_in_general_mode() {
        let mut sk: CrPrecis = CrPrecis::new(SketchParams::new(3, 6, 100).unwrap()).unwrap();
        sk.update(up(42, 7)).unwrap();
        assert_eq!(sk.point_estimate_general(42).unwrap(), Ratio::from_integer(7));
    }

    #[test]
    fn rejects_out_of_domain() {
        let mut sk = sketch_16();
        assert_eq!(
            sk.update(up(16, 1)),
            Err(Error::ItemOutOfRange { item: 16, n: 16 })
        );
        assert!(sk.point_estimate_strict(16).is_err());
        assert!(sk.point_estimate_general(99).is_err());
        assert!(sk.deduct(16, 0).is_err());
        assert_eq!(StreamUpdate::new(1, 0), Err(Error::ZeroDelta));
    }

    #[test]
    fn collisions() {
        let ps = select_primes(5, 2).unwrap();
        assert_eq!(collision_tables(3, 8, &ps).unwrap(), vec![0]);
        let ps = select_primes(5, 3).unwrap();
        assert_eq!(ps.as_slice(), &[5, 7, 11]);
        assert_eq!(collision_tables(0, 35, &ps).unwrap(), vec![0, 1]);
        assert!(collision_tables(0, 1, &ps).unwrap().is_empty());
        assert_eq!(collision_tables(4, 4, &ps), Err(Error::SameItem(4)));
    }

    #[test]
    fn merge_and_mismatch() {
        let mut a = sketch_16();
        a.update(up(3, 5)).unwrap();
        let mut b = sketch_16();
        b.update(up(3, 2)).unwrap();
        let snapshot = a.clone();
        a.merge(&sketch_16()).unwrap();
        assert_eq!(a, snapshot);
        a.merge(&b).unwrap();
        assert_eq!(a.point_estimate_strict(3).unwrap(), 7);
        let other: CrPrecis = CrPrecis::new(SketchParams::new(5, 3, 16).unwrap()).unwrap();
        assert_eq!(a.merge(&other), Err(Error::ParamMismatch));
    }

    #[test]
    fn deduct_inverts_update() {
        let mut sk = sketch_16();
        sk.update(up(6, 5)).unwrap();
        sk.deduct(6, 5).unwrap();
        assert!(sk.is_empty());
        let mut empty = sketch_16();
        empty.deduct(2, 0).unwrap();
        assert_eq!(empty, sketch_16());
    }

    #[test]
    fn deduct_leaves_collision_mass() {
        // items 1 and 6 share the modulus-5 counter
        let mut sk = sketch_16();
        sk.extend([up(1, 4), up(6, 3)]).unwrap();
        sk.deduct(1, 4).unwrap();
        assert_eq!(sk.tables()[0][1], 3);
        assert_eq!(sk.tables()[1][1], 0);
    }

    #[test]
    fn overflow_is_checked() {
        let mut sk: CrPrecis<i32> = CrPrecis::new(SketchParams::new(5, 2, 16).unwrap()).unwrap();
        sk.update(up(1, i32::MAX as i64)).unwrap();
        let before = sk.clone();
        assert_eq!(sk.update(up(1, 1)), Err(Error::Overflow));
        assert_eq!(sk, before);
        assert_eq!(sk.update(up(1, i64::MAX)), Err(Error::Overflow));
    }

    #[test]
    fn decode_rejects_corruption() {
        let mut sk = sketch_16();
        sk.update(up(3, 5)).unwrap();
        let bytes = sk.to_bytes().unwrap();
        assert_eq!(bytes.len(), 8 * (3 + 2 + 12));
        assert_eq!(CrPrecis::<i64>::from_bytes(&bytes).unwrap(), sk);
        assert!(CrPrecis::<i64>::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[24] = 4; // first prime
        assert!(CrPrecis::<i64>::from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[40] = 1; // counter 0 of table 0
        assert!(CrPrecis::<i64>::from_bytes(&bad).is_err());
    }
}
