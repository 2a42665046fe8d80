// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

mod common;

use common::*;
use crprecis::heavy::frequent_items_traced;
use crprecis::{
    ceil_log, collision_tables, decompose, estimate_entropy, frequent_items, select_primes,
    space_bound, CrPrecis, DyadicLevels, EntropyParams, FrequencyOracle, FrequentQuery, Hierarchy,
    HhhSketch, ModelTag, QuantileQuery, Ratio, SketchPair, SketchParams, StreamUpdate,
};
use num_traits::Signed;
use proptest::prelude::*;

fn is_prime(x: u64) -> bool {
    x >= 2 && (2..).take_while(|d| d * d <= x).all(|d| x % d != 0)
}

fn sketch_of(params: SketchParams, updates: &[StreamUpdate]) -> CrPrecis {
    let mut sk = CrPrecis::new(params).unwrap();
    sk.extend(updates.iter().copied()).unwrap();
    sk
}

fn updates_strategy(n: u64) -> impl Strategy<Value = Vec<(u64, i64)>> {
    prop::collection::vec((0..n, prop_oneof![-50i64..=-1, 1i64..=50]), 0..200)
}

fn to_updates(raw: &[(u64, i64)]) -> Vec<StreamUpdate> {
    raw.iter().map(|&(i, d)| up(i, d)).collect()
}

proptest! {
    #[test]
    fn selected_primes_are_consecutive(k in 2u64..5000, t in 1usize..60) {
        let ps = select_primes(k, t).unwrap();
        prop_assert_eq!(ps.len(), t);
        prop_assert!(ps.iter().all(is_prime));
        prop_assert!(ps.as_slice().windows(2).all(|w| w[0] < w[1]));
        prop_assert!((k..ps[0]).all(|x| !is_prime(x)));
        for w in ps.as_slice().windows(2) {
            prop_assert!((w[0] + 1..w[1]).all(|x| !is_prime(x)));
        }
    }

    #[test]
    fn space_bound_dominates(k in 12u64..2000, t in 1usize..200) {
        prop_assert!(select_primes(k, t).unwrap().total_counters() <= space_bound(k, t).unwrap());
    }

    #[test]
    fn tables_conserve_mass(raw in updates_strategy(300), k in 2u64..20) {
        let params = SketchParams::for_accuracy(k, 300).unwrap();
        let sk = sketch_of(params, &to_updates(&raw));
        let mass: i64 = raw.iter().map(|&(_, d)| d).sum();
        prop_assert_eq!(sk.net_mass(), mass);
        for table in sk.tables() {
            prop_assert_eq!(table.iter().sum::<i64>(), mass);
        }
    }

    #[test]
    fn merge_equals_concatenation(a in updates_strategy(500), b in updates_strategy(500)) {
        let params = SketchParams::new(7, 6, 500).unwrap();
        let (ua, ub) = (to_updates(&a), to_updates(&b));
        let mut merged = sketch_of(params, &ua);
        merged.merge(&sketch_of(params, &ub)).unwrap();
        let joined: Vec<_> = ua.iter().chain(&ub).copied().collect();
        prop_assert_eq!(merged, sketch_of(params, &joined));
    }

    #[test]
    fn bytes_round_trip(raw in updates_strategy(1000), k in 2u64..40) {
        let params = SketchParams::for_accuracy(k, 1000).unwrap();
        let sk = sketch_of(params, &to_updates(&raw));
        let bytes = sk.to_bytes().unwrap();
        prop_assert_eq!(CrPrecis::<i64>::from_bytes(&bytes).unwrap(), sk.clone());
        let narrow = CrPrecis::<i32>::from_bytes(&bytes).unwrap();
        prop_assert_eq!(narrow.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn dyadic_levels_conserve_mass(raw in prop::collection::vec((0u64..200, 1i64..30), 0..150)) {
        let mut dl: DyadicLevels = DyadicLevels::with_raw(200, 3, 6).unwrap();
        dl.extend(to_updates(&raw)).unwrap();
        let mass: i64 = raw.iter().map(|&(_, d)| d).sum();
        for level in dl.levels() {
            prop_assert_eq!(level.net_mass(), mass);
        }
    }

    #[test]
    fn inner_product_symmetric_and_bilinear(
        r1 in updates_strategy(256),
        r2 in updates_strategy(256),
        s in updates_strategy(256),
    ) {
        let params = SketchParams::new(4, 5, 256).unwrap();
        let (sk1, sk2, sks) = (
            sketch_of(params, &to_updates(&r1)),
            sketch_of(params, &to_updates(&r2)),
            sketch_of(params, &to_updates(&s)),
        );
        let fwd = SketchPair::new(&sk1, &sks).unwrap();
        let back = SketchPair::new(&sks, &sk1).unwrap();
        prop_assert_eq!(fwd.table_products().unwrap(), back.table_products().unwrap());
        prop_assert_eq!(fwd.inner_product_general().unwrap(), back.inner_product_general().unwrap());
        let mut joined = sk1.clone();
        joined.merge(&sk2).unwrap();
        let lhs = SketchPair::new(&joined, &sks).unwrap().table_products().unwrap();
        let p2 = SketchPair::new(&sk2, &sks).unwrap().table_products().unwrap();
        let rhs: Vec<i128> = fwd.table_products().unwrap().iter().zip(&p2).map(|(a, b)| a + b).collect();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn few_primes_already_exceed_domain() {
    // the r = ceil(log_k N) smallest primes >= k bound the product of any r
    // table moduli; it must reach N for every N <= 2^20 with that r
    for k in 2u64..=64 {
        let r_max = ceil_log(k, 1 << 20);
        let ps = select_primes(k, r_max as usize).unwrap();
        for r in 1..=r_max {
            let largest_n = (k as u128).pow(r as u32).min(1 << 20);
            let product: u128 = ps.iter().take(r as usize).map(u128::from).product();
            assert!(product >= largest_n, "k={k} r={r}: {product} < {largest_n}");
            if r >= 2 {
                assert!(product > largest_n, "k={k} r={r}");
            }
        }
    }
}

#[test]
fn decomposition_is_canonical() {
    for n in [2u64, 3, 5, 16, 37, 64, 100, 256] {
        let depth = n.next_power_of_two().trailing_zeros() as usize;
        for l in 0..n {
            for r in l..n {
                let ivs = decompose(l, r, n).unwrap();
                assert!(ivs.len() <= 2 * depth.max(1), "[{l},{r}] in {n}");
                let mut pos = l;
                for iv in &ivs {
                    assert_eq!(iv.start(), pos);
                    assert_eq!(iv.start() % iv.len(), 0);
                    pos = iv.end() + 1;
                }
                assert_eq!(pos, r + 1);
                for w in ivs.windows(2) {
                    // siblings would merge into their parent
                    let siblings = w[0].level == w[1].level && w[0].index / 2 == w[1].index / 2;
                    assert!(!siblings, "[{l},{r}] not maximal");
                }
            }
        }
    }
}

#[test]
fn strict_point_bound_small_battery() {
    let mut rng = rng(1);
    for round in 0..100 {
        let n = 1 << (6 + round % 8);
        let k = 2 + round as u64 % 9;
        let r = ceil_log(k, n) as usize;
        let params = SketchParams::new(k, r + round % 5, n).unwrap();
        let ups = strict_stream(&mut rng, n, 400, 60);
        let oracle = FrequencyOracle::replay(n, ModelTag::Strict, &ups).unwrap();
        let sk = sketch_of(params, &ups);
        let all = sk.strict_estimates();
        for x in 0..n {
            let f = oracle.exact_point(x).unwrap() as i128;
            let est = sk.point_estimate_strict(x).unwrap() as i128;
            assert_eq!(est, all[x as usize] as i128);
            assert!(est >= f);
            assert!(Ratio::from_integer(est - f) <= sk.strict_excess_bound(oracle.mass(), f));
        }
    }
}

#[test]
fn general_point_bound_small_battery() {
    let mut rng = rng(2);
    for round in 0..100 {
        let n = 1 << (5 + round % 7);
        let params = SketchParams::for_accuracy(3 + round as u64 % 6, n).unwrap();
        let ups = general_stream(&mut rng, n, 300, 40);
        let oracle = FrequencyOracle::replay(n, ModelTag::General, &ups).unwrap();
        let sk = sketch_of(params, &ups);
        for x in 0..n {
            let f = oracle.exact_point(x).unwrap() as i128;
            let err = (sk.point_estimate_general(x).unwrap() - Ratio::from_integer(f)).abs();
            assert!(err <= sk.general_error_bound(oracle.l1(), f));
        }
    }
}

#[test]
fn suffix_estimates_track_monotone_truth() {
    let mut rng = rng(3);
    let q = QuantileQuery::new(0.25, 0.0625).unwrap();
    for _ in 0..20 {
        let n = 512;
        let ups = strict_stream(&mut rng, n, 600, 300);
        let oracle = FrequencyOracle::replay(n, ModelTag::Strict, &ups).unwrap();
        let mut dl: DyadicLevels = DyadicLevels::for_quantiles(n, q.epsilon()).unwrap();
        dl.extend(ups.iter().copied()).unwrap();
        let m = oracle.mass() as f64;
        let mut prev = i128::MAX;
        for a in 0..n {
            let exact = oracle.suffix_sum(a);
            assert!(exact <= prev);
            prev = exact;
            let est = dl.suffix_sum(a).unwrap();
            assert!(est >= exact);
            assert!((est - exact) as f64 <= q.epsilon() * m);
        }
    }
}

#[test]
fn frequent_candidates_stay_bounded() {
    let mut rng = rng(4);
    for &(s, eps) in &[(8u64, 0.5f64), (16, 0.25)] {
        let q = FrequentQuery::new(s, eps).unwrap();
        for _ in 0..30 {
            let n = 1 << 10;
            let ups = skewed_stream(&mut rng, n, 6, 300);
            let mut dl: DyadicLevels = DyadicLevels::for_frequent(n, &q).unwrap();
            dl.extend(ups.iter().copied()).unwrap();
            let trace = frequent_items_traced(&dl, &q).unwrap();
            let per_level = (s as f64 / (1.0 - eps)).floor() as usize;
            let start_width = trace.levels[0].1;
            assert!(start_width <= 2 * s as usize);
            let mut examined = 0;
            for &(_, seen, kept) in &trace.levels {
                assert!(kept <= per_level, "kept {kept} > {per_level}");
                examined += seen;
            }
            let levels = trace.levels.len() - 1;
            assert!(examined <= start_width + 2 * per_level * levels);
        }
    }
}

#[test]
fn hhh_matches_oracle_on_clear_streams() {
    let mut rng = rng(5);
    let q = FrequentQuery::new(4, 0.5).unwrap();
    let hier = Hierarchy::balanced(256, 4).unwrap();
    for _ in 0..40 {
        let ups = skewed_stream(&mut rng, 256, 3, 120);
        let oracle = FrequencyOracle::replay(256, ModelTag::Strict, &ups).unwrap();
        let mut sk: HhhSketch = HhhSketch::for_query(hier.clone(), &q).unwrap();
        for &u in &ups {
            sk.update(u).unwrap();
        }
        let report = sk.hhh(&q).unwrap();
        let m = oracle.mass();
        for (node, _) in oracle.exact_hhh(&hier, q.s()) {
            assert!(report.contains(node), "missed {}", hier.name(node));
        }
        // true discount relative to the reported set
        let freq = oracle.node_frequencies(&hier);
        let reported = report.nodes();
        for e in &report.entries {
            let nearest: i128 = reported
                .iter()
                .filter(|&&d| hier.is_ancestor(e.node, d))
                .filter(|&&d| {
                    !reported
                        .iter()
                        .any(|&mid| hier.is_ancestor(e.node, mid) && hier.is_ancestor(mid, d))
                })
                .map(|&d| freq[d])
                .sum();
            let discounted = (freq[e.node] - nearest) as f64;
            assert!(discounted >= (1.0 - q.epsilon()) * m as f64 / q.s() as f64);
            assert!(e.discounted >= discounted as i128);
        }
    }
}

#[test]
fn entropy_discovers_every_frequent_item() {
    let mut rng = rng(6);
    let p = EntropyParams::<f64>::new(2.0, 0.1).unwrap();
    for _ in 0..20 {
        let n = 1024;
        let ups = zipf_stream(&mut rng, n, 3000, 1.1);
        let oracle = FrequencyOracle::replay(n, ModelTag::Strict, &ups).unwrap();
        let m = oracle.mass();
        let sk = sketch_of(p.sketch_params(n, m, 8).unwrap(), &ups);
        let est = estimate_entropy(&sk, &p, m).unwrap();
        let found: Vec<u64> = est.discovered.iter().map(|&(x, _)| x).collect();
        for x in oracle.support() {
            if oracle.exact_point(x).unwrap() as i128 * p.c() as i128 >= m {
                assert!(found.contains(&x));
            }
        }
        assert!(est.h_dense >= 0.0 && est.h_sparse >= 0.0);
        assert!((est.total - est.h_dense - est.h_sparse).abs() < 1e-12);
    }
}

#[test]
fn oracle_replay_agrees_with_streaming() {
    let mut rng = rng(7);
    for _ in 0..20 {
        let ups = general_stream(&mut rng, 300, 500, 80);
        let replayed = FrequencyOracle::replay(300, ModelTag::General, &ups).unwrap();
        let mut streamed = FrequencyOracle::new(300, ModelTag::General);
        for (i, &u) in ups.iter().enumerate() {
            streamed.apply(u).unwrap();
            if i % 97 == 0 {
                let partial = FrequencyOracle::replay(300, ModelTag::General, &ups[..=i]).unwrap();
                assert_eq!(partial, streamed);
            }
        }
        assert_eq!(streamed, replayed);
        // independent recomputation of the derived quantities
        let mut dense = vec![0i128; 300];
        for u in &ups {
            dense[u.item() as usize] += u.delta() as i128;
        }
        assert_eq!(replayed.l1(), dense.iter().map(|f| f.abs()).sum::<i128>());
        assert_eq!(replayed.exact_inner(&replayed), dense.iter().map(|f| f * f).sum::<i128>());
        assert_eq!(replayed.exact_range(0, 299).unwrap(), replayed.mass());
        let mut prefix = vec![0i128; 301];
        for i in 0..300 {
            prefix[i + 1] = prefix[i] + dense[i];
        }
        for (l, r) in [(0u64, 5u64), (17, 200), (299, 299), (40, 41)] {
            assert_eq!(replayed.exact_range(l, r).unwrap(), prefix[r as usize + 1] - prefix[l as usize]);
        }
        let mut mags: Vec<i128> = dense.iter().map(|f| f.abs()).collect();
        mags.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(replayed.residual_mass(5), mags[5..].iter().sum::<i128>());
    }
}

#[test]
fn frequent_items_on_strict_turnstile() {
    let mut rng = rng(8);
    let q = FrequentQuery::new(8, 0.5).unwrap();
    for _ in 0..20 {
        let ups = strict_stream(&mut rng, 2048, 800, 30);
        let oracle = FrequencyOracle::replay(2048, ModelTag::Strict, &ups).unwrap();
        let mut dl: DyadicLevels = DyadicLevels::for_frequent(2048, &q).unwrap();
        dl.extend(ups.iter().copied()).unwrap();
        let got = frequent_items(&dl, &q).unwrap();
        let m = oracle.mass();
        for x in 0..2048 {
            let f = oracle.exact_point(x).unwrap() as i128;
            if f * 8 >= m {
                assert!(got.contains(&x));
            }
        }
        for &x in &got {
            assert!(oracle.exact_point(x).unwrap() as f64 >= 0.5 * m as f64 / 8.0);
        }
    }
}

#[test]
fn collisions_exhaustive_small() {
    for n in [64u64, 500, 1 << 12] {
        for k in [2u64, 3, 5, 11] {
            let r = ceil_log(k, n);
            let ps = select_primes(k, 3 * r as usize).unwrap();
            for x in 0..n {
                for y in (x + 1)..n {
                    assert!(collision_tables(x, y, &ps).unwrap().len() as u64 <= r - 1);
                }
            }
        }
    }
}
