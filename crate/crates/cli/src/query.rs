// Copyright 2026 The crprecis Authors. Licensed under Apache-2.0.

//! Query dispatch. Every row pairs a sketch answer with the oracle answer
//! and the guarantee that applies to the sketch actually built.

use std::collections::BTreeSet;

use crprecis::{
    ceil_log, estimate_entropy, frequent_items, reconstruct, reconstruction_params, CrPrecis,
    DyadicLevels, EntropyParams, FrequencyOracle, FrequentQuery, Hierarchy, HhhSketch,
    LeveledInstance, ModelTag, QuantileQuery, Rational, SketchPair, SketchParams,
};
use num_rational::Ratio;

use crate::report::{ErrorReport, Row};
use crate::stream::StreamFile;
use crate::CliError;

/// Parameter flags. Raw `k`/`t` take precedence over derived ones.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub k: Option<u64>,
    pub t: Option<usize>,
    pub s: Option<u64>,
    pub epsilon: Option<f64>,
    pub phi: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Command {
    Build,
    /// Items to query; empty means the stream's support.
    Point(Vec<u64>),
    /// Inclusive ranges; empty means the whole domain.
    Range(Vec<(u64, u64)>),
    Quantiles,
    Frequent,
    Hhh,
    Inner,
    Entropy,
    VerifyAll,
}

pub struct Inputs {
    pub file: StreamFile,
    pub oracle: FrequencyOracle,
    pub second: Option<(StreamFile, FrequencyOracle)>,
    /// Defaults to a binary hierarchy over the domain.
    pub hierarchy: Option<Hierarchy>,
}

const DEFAULT_ENTROPY_HEIGHT: u64 = 64;

fn fmt_ratio(r: Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn abs(r: Rational) -> Rational {
    if r < Ratio::from_integer(0) {
        -r
    } else {
        r
    }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.6}")
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require_strict(inputs: &Inputs, what: &str) -> Result<(), CliError> {
    match inputs.file.model {
        ModelTag::Strict => Ok(()),
        ModelTag::General => Err(usage(format!("{what} needs a strict stream"))),
    }
}

fn raw(opts: &Options) -> Result<Option<(u64, usize)>, CliError> {
    match (opts.k, opts.t) {
        (Some(k), Some(t)) => Ok(Some((k, t))),
        (None, None) => Ok(None),
        _ => Err(usage("--k and --t must be given together")),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("missing {flag}")))
}

fn point_params(opts: &Options, n: u64, notes: &mut Vec<String>) -> Result<SketchParams, CliError> {
    let params = match raw(opts)? {
        Some((k, t)) => SketchParams::new(k, t, n)?,
        None => {
            let s = opts.s.ok_or_else(|| usage("give --k and --t, or --s"))?;
            let p = SketchParams::for_accuracy(s, n)?;
            notes.push(format!("derived from s={s}"));
            p
        }
    };
    notes.push(format!("k={} t={} N={}", params.k(), params.t(), n));
    Ok(params)
}

fn level_notes(dl: &DyadicLevels, notes: &mut Vec<String>) {
    for (l, sk) in dl.levels().iter().enumerate() {
        let p = sk.params();
        notes.push(format!("level {l}: k={} t={} N={}", p.k(), p.t(), p.n()));
    }
}

fn build_sketch(params: SketchParams, file: &StreamFile) -> Result<CrPrecis, CliError> {
    let mut sk = CrPrecis::new(params)?;
    sk.extend(file.updates.iter().copied())?;
    Ok(sk)
}

fn build_levels(mut dl: DyadicLevels, file: &StreamFile) -> Result<DyadicLevels, CliError> {
    dl.extend(file.updates.iter().copied())?;
    Ok(dl)
}

pub fn run_query(cmd: &Command, inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    match cmd {
        Command::Build => build(inputs, opts),
        Command::Point(items) => point(inputs, opts, items),
        Command::Range(ranges) => range(inputs, opts, ranges),
        Command::Quantiles => quantiles(inputs, opts),
        Command::Frequent => frequent(inputs, opts),
        Command::Hhh => hhh(inputs, opts),
        Command::Inner => inner(inputs, opts),
        Command::Entropy => entropy(inputs, opts),
        Command::VerifyAll => verify_all(inputs, opts),
    }
}

fn build(inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    let mut report = ErrorReport::default();
    let sk = build_sketch(point_params(opts, inputs.file.n, &mut report.notes)?, &inputs.file)?;
    report.notes.push(format!(
        "{} counters, {} bytes serialized",
        sk.primes().total_counters(),
        sk.to_bytes()?.len()
    ));
    let m = inputs.oracle.mass();
    for (j, table) in sk.tables().iter().enumerate() {
        let sum: i128 = table.iter().map(|&c| c as i128).sum();
        report.rows.push(Row {
            query: format!("table {j} q={} mass", sk.primes()[j]),
            exact: m.to_string(),
            estimate: sum.to_string(),
            abs_error: (sum - m).abs().to_string(),
            bound: "0".into(),
            ok: sum == m,
        });
    }
    Ok(report)
}

fn point(inputs: &Inputs, opts: &Options, items: &[u64]) -> Result<ErrorReport, CliError> {
    let mut report = ErrorReport::default();
    let sk = build_sketch(point_params(opts, inputs.file.n, &mut report.notes)?, &inputs.file)?;
    let items = if items.is_empty() { inputs.oracle.support() } else { items.to_vec() };
    let (m, l1) = (inputs.oracle.mass(), inputs.oracle.l1());
    for x in items {
        let f = inputs.oracle.exact_point(x)? as i128;
        let row = match inputs.file.model {
            ModelTag::Strict => {
                let est = sk.point_estimate_strict(x)? as i128;
                let bound = sk.strict_excess_bound(m, f);
                Row {
                    query: format!("point {x}"),
                    exact: f.to_string(),
                    estimate: est.to_string(),
                    abs_error: (est - f).abs().to_string(),
                    bound: fmt_ratio(bound),
                    ok: est >= f && Ratio::from_integer(est - f) <= bound,
                }
            }
            ModelTag::General => {
                let est = sk.point_estimate_general(x)?;
                let err = abs(est - Ratio::from_integer(f));
                let bound = sk.general_error_bound(l1, f);
                Row {
                    query: format!("point {x}"),
                    exact: f.to_string(),
                    estimate: fmt_ratio(est),
                    abs_error: fmt_ratio(err),
                    bound: fmt_ratio(bound),
                    ok: err <= bound,
                }
            }
        };
        report.rows.push(row);
    }
    Ok(report)
}

fn range(inputs: &Inputs, opts: &Options, ranges: &[(u64, u64)]) -> Result<ErrorReport, CliError> {
    require_strict(inputs, "range")?;
    let n = inputs.file.n;
    let mut report = ErrorReport::default();
    let dl = match raw(opts)? {
        Some((k, t)) => DyadicLevels::with_raw(n, k, t)?,
        None => {
            let s = need(opts.s, "--s")?;
            report.notes.push(format!("derived from s={s}"));
            DyadicLevels::for_range_sum(n, s)?
        }
    };
    level_notes(&dl, &mut report.notes);
    let dl = build_levels(dl, &inputs.file)?;
    let ranges = if ranges.is_empty() { vec![(0, n - 1)] } else { ranges.to_vec() };
    let m = inputs.oracle.mass();
    for (l, r) in ranges {
        let exact = inputs.oracle.exact_range(l, r)?;
        let est = dl.range_sum(l, r)?;
        let bound = dl.range_error_bound(l, r, m)?;
        report.rows.push(Row {
            query: format!("range {l} {r}"),
            exact: exact.to_string(),
            estimate: est.to_string(),
            abs_error: (est - exact).abs().to_string(),
            bound: fmt_ratio(bound),
            ok: est >= exact && Ratio::from_integer(est - exact) <= bound,
        });
    }
    Ok(report)
}

/// Rows compare the target rank `min(j phi, 1) m` with the exact suffix
/// mass at the returned position; the allowed gap is `epsilon m`.
fn quantiles(inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    require_strict(inputs, "quantiles")?;
    let phi = need(opts.phi, "--phi")?;
    let eps = opts.epsilon.unwrap_or(phi / 4.0);
    let q = QuantileQuery::new(phi, eps)?;
    let n = inputs.file.n;
    let mut report = ErrorReport::default();
    let dl = match raw(opts)? {
        Some((k, t)) => DyadicLevels::with_raw(n, k, t)?,
        None => {
            report.notes.push(format!("derived from epsilon={eps}"));
            DyadicLevels::for_quantiles(n, eps)?
        }
    };
    level_notes(&dl, &mut report.notes);
    let dl = build_levels(dl, &inputs.file)?;
    let m = inputs.oracle.mass() as f64;
    if !smooth(&inputs.oracle, eps) {
        report.notes.push("an item carries more than epsilon m; no position may fit the window".into());
    }
    for (j, a) in dl.quantiles(&q)?.into_iter().enumerate() {
        let target = ((j + 1) as f64 * phi).min(1.0) * m;
        let suffix = inputs.oracle.suffix_sum(a) as f64;
        let gap = (suffix - target).abs();
        report.rows.push(Row {
            query: format!("quantile {} at {a}", j + 1),
            exact: fmt_f64(target),
            estimate: suffix.to_string(),
            abs_error: fmt_f64(gap),
            bound: fmt_f64(eps * m),
            ok: gap <= eps * m,
        });
    }
    Ok(report)
}

/// No single item holds more than `eps m`.
fn smooth(oracle: &FrequencyOracle, eps: f64) -> bool {
    let m = oracle.mass() as f64;
    oracle.frequencies().iter().all(|&f| f as f64 <= eps * m)
}

fn frequent_query(opts: &Options) -> Result<FrequentQuery<f64>, CliError> {
    Ok(FrequentQuery::new(need(opts.s, "--s")?, need(opts.epsilon, "--epsilon")?)?)
}

/// One row per item that is reported or truly frequent. The estimate
/// columns show the finest level's point estimate; `ok` also requires the
/// report decision to be correct.
fn frequent(inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    require_strict(inputs, "frequent")?;
    let q = frequent_query(opts)?;
    let n = inputs.file.n;
    let mut report = ErrorReport::default();
    let dl = match raw(opts)? {
        Some((k, t)) => DyadicLevels::with_raw(n, k, t)?,
        None => {
            report.notes.push(format!("derived s'={}", q.estimator_parameter()));
            DyadicLevels::for_frequent(n, &q)?
        }
    };
    level_notes(&dl, &mut report.notes);
    let dl = build_levels(dl, &inputs.file)?;
    let got: BTreeSet<u64> = frequent_items(&dl, &q)?.into_iter().collect();
    let oracle = &inputs.oracle;
    let m = oracle.mass();
    let s = q.s() as i128;
    let mut rows: BTreeSet<u64> = got.clone();
    rows.extend(oracle.support().into_iter().filter(|&x| oracle.exact_point(x).unwrap() as i128 * s >= m));
    let floor = (1.0 - q.epsilon()) * m as f64 / s as f64;
    for x in rows {
        let f = oracle.exact_point(x)? as i128;
        let est = dl.level(0).point_estimate_strict(x)? as i128;
        let bound = dl.level(0).strict_excess_bound(m, f);
        let reported = got.contains(&x);
        let decision_ok = (f * s < m || reported) && (!reported || f as f64 >= floor);
        report.rows.push(Row {
            query: format!("frequent {x} {}", if reported { "reported" } else { "missed" }),
            exact: f.to_string(),
            estimate: est.to_string(),
            abs_error: (est - f).abs().to_string(),
            bound: fmt_ratio(bound),
            ok: decision_ok && est >= f && Ratio::from_integer(est - f) <= bound,
        });
    }
    Ok(report)
}

/// True frequency of `node` minus that of its nearest descendants in `set`.
fn discounted(hier: &Hierarchy, freq: &[i128], set: &BTreeSet<usize>, node: usize) -> i128 {
    let nearest = set.iter().filter(|&&d| {
        d != node
            && hier.is_ancestor(node, d)
            && !set.iter().any(|&mid| mid != node && mid != d && hier.is_ancestor(node, mid) && hier.is_ancestor(mid, d))
    });
    freq[node] - nearest.map(|&d| freq[d]).sum::<i128>()
}

/// One row per node that is reported or a true heavy hitter. `exact` is
/// the node's true frequency discounted by its nearest reported
/// descendants; the bound column is the least discounted mass a reported
/// node may carry.
fn hhh(inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    require_strict(inputs, "hhh")?;
    let q = frequent_query(opts)?;
    let n = inputs.file.n;
    let hier = match &inputs.hierarchy {
        Some(h) => h.clone(),
        None => Hierarchy::balanced(n, 2)?,
    };
    if hier.domain() != n {
        return Err(usage(format!("hierarchy covers {} items, stream has {n}", hier.domain())));
    }
    let mut report = ErrorReport::default();
    let mut sk: HhhSketch = match raw(opts)? {
        Some((k, t)) => HhhSketch::new(hier.clone(), |_, dom| {
            SketchParams::new(k, t.max(ceil_log(k.max(2), dom.max(2)) as usize), dom)
        })?,
        None => HhhSketch::for_query(hier.clone(), &q)?,
    };
    for d in 0..=hier.height() {
        let p = sk.level(d).params();
        report.notes.push(format!("depth {d}: k={} t={} N={}", p.k(), p.t(), p.n()));
    }
    for &u in &inputs.file.updates {
        sk.update(u)?;
    }
    let got = sk.hhh(&q)?;
    let reported: BTreeSet<usize> = got.nodes().into_iter().collect();
    let truth: BTreeSet<usize> = inputs.oracle.exact_hhh(&hier, q.s()).into_iter().map(|(v, _)| v).collect();
    let freq = inputs.oracle.node_frequencies(&hier);
    let m = inputs.oracle.mass() as f64;
    let floor = (1.0 - q.epsilon()) * m / q.s() as f64;
    for node in reported.union(&truth).copied().collect::<BTreeSet<_>>() {
        let exact = discounted(&hier, &freq, &reported, node);
        let entry = got.entries.iter().find(|e| e.node == node);
        let ok = (!truth.contains(&node) || entry.is_some()) && (entry.is_none() || exact as f64 >= floor);
        report.rows.push(Row {
            query: format!("hhh {}", hier.name(node)),
            exact: exact.to_string(),
            estimate: entry.map_or("unreported".into(), |e| e.discounted.to_string()),
            abs_error: entry.map_or("-".into(), |e| (e.discounted - exact).abs().to_string()),
            bound: fmt_f64(floor),
            ok,
        });
    }
    Ok(report)
}

fn inner(inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    let (file2, oracle2) = inputs
        .second
        .as_ref()
        .ok_or_else(|| usage("inner needs --input2"))?;
    let n = inputs.file.n;
    if file2.n != n {
        return Err(usage(format!("domain sizes differ: {n} and {}", file2.n)));
    }
    let mut report = ErrorReport::default();
    let params = point_params(opts, n, &mut report.notes)?;
    let (a, b) = (build_sketch(params, &inputs.file)?, build_sketch(params, file2)?);
    let pair = SketchPair::new(&a, &b)?;
    let exact = inputs.oracle.exact_inner(oracle2);
    let strict = inputs.file.model == ModelTag::Strict && file2.model == ModelTag::Strict;
    let row = if strict {
        let est = pair.inner_product_strict()?;
        let bound = pair.strict_bound(inputs.oracle.mass(), oracle2.mass());
        Row {
            query: "inner strict".into(),
            exact: exact.to_string(),
            estimate: est.to_string(),
            abs_error: (est - exact).abs().to_string(),
            bound: fmt_ratio(bound),
            ok: est >= exact && Ratio::from_integer(est - exact) <= bound,
        }
    } else {
        let est = pair.inner_product_general()?;
        let err = abs(est - Ratio::from_integer(exact));
        let bound = pair.general_bound(inputs.oracle.l1(), oracle2.l1());
        Row {
            query: "inner general".into(),
            exact: exact.to_string(),
            estimate: fmt_ratio(est),
            abs_error: fmt_ratio(err),
            bound: fmt_ratio(bound),
            ok: err <= bound,
        }
    };
    report.rows.push(row);
    Ok(report)
}

/// The bound column is `(alpha' - 1) H`; `ok` checks the two-sided factor
/// `H / alpha' <= estimate <= alpha' H`.
fn entropy(inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    require_strict(inputs, "entropy")?;
    let p = EntropyParams::new(need(opts.alpha, "--alpha")?, need(opts.epsilon, "--epsilon")?)?;
    let n = inputs.file.n;
    let m = inputs.oracle.mass();
    let mut report = ErrorReport::default();
    let params = match (opts.k, opts.t) {
        (k, Some(t)) => SketchParams::new(k.unwrap_or(DEFAULT_ENTROPY_HEIGHT), t, n)?,
        (k, None) => p.sketch_params(n, m, k.unwrap_or(DEFAULT_ENTROPY_HEIGHT))?,
    };
    report.notes.push(format!("k={} t={} N={n}", params.k(), params.t()));
    let sk = build_sketch(params, &inputs.file)?;
    let h = inputs.oracle.exact_entropy::<f64>();
    let est = estimate_entropy(&sk, &p, m)?.total;
    let factor = p.effective_factor();
    let ok = if h == 0.0 { est == 0.0 } else { est * factor >= h && est <= factor * h };
    report.rows.push(Row {
        query: format!("entropy alpha={}", p.alpha()),
        exact: fmt_f64(h),
        estimate: fmt_f64(est),
        abs_error: fmt_f64((est - h).abs()),
        bound: fmt_f64((factor - 1.0) * h),
        ok,
    });
    Ok(report)
}

/// Runs every query family that applies to the input with defaults
/// `s = 8`, `epsilon = 0.1`, `phi = 1/4`, `alpha = 2` for unset flags.
/// Quantiles are skipped when a single item outweighs `epsilon m`, and
/// hierarchical heavy hitters run only with an explicit hierarchy since
/// their sketches grow with `s^4 h^2`.
fn verify_all(inputs: &Inputs, opts: &Options) -> Result<ErrorReport, CliError> {
    let opts = Options {
        s: opts.s.or(Some(8)),
        epsilon: opts.epsilon.or(Some(0.1)),
        phi: opts.phi.or(Some(0.25)),
        alpha: opts.alpha.or(Some(2.0)),
        ..opts.clone()
    };
    let n = inputs.file.n;
    let strict = inputs.file.model == ModelTag::Strict;
    let m = inputs.oracle.mass();
    let mut report = point(inputs, &opts, &[])?;
    if strict {
        let ranges = [(0, n - 1), (0, n / 2), (n / 4, (3 * n) / 4), (n / 2, n - 1)];
        report.extend(range(inputs, &opts, &ranges)?);
        if m > 0 {
            if smooth(&inputs.oracle, opts.epsilon.unwrap()) {
                report.extend(quantiles(inputs, &opts)?);
            } else {
                report.notes.push("quantiles skipped: an item carries more than epsilon m".into());
            }
            report.extend(entropy(inputs, &opts)?);
        }
        report.extend(frequent(inputs, &opts)?);
        if inputs.hierarchy.is_some() {
            report.extend(hhh(inputs, &opts)?);
        } else {
            report.notes.push("hhh skipped: no --hierarchy".into());
        }
    }
    let self_pair;
    let pair_inputs = if inputs.second.is_some() {
        inputs
    } else {
        self_pair = Inputs {
            file: inputs.file.clone(),
            oracle: inputs.oracle.clone(),
            second: Some((inputs.file.clone(), inputs.oracle.clone())),
            hierarchy: None,
        };
        &self_pair
    };
    report.extend(inner(pair_inputs, &opts)?);
    Ok(report)
}

/// The leveled instance for `(s, n, seed)` as a strict stream file.
pub fn adversarial_stream(s: usize, n: u64, seed: u64) -> Result<(StreamFile, Vec<String>), CliError> {
    let inst = LeveledInstance::generate(s, n, seed)?;
    let comments = (1..=s)
        .map(|l| format!("level {l}: frequency {} items {:?}", inst.frequency(l), inst.level(l)))
        .collect();
    let file = StreamFile { n, model: ModelTag::Strict, updates: inst.updates().to_vec() };
    Ok((file, comments))
}

/// Reconstructs the level sets from an `8 s` sketch, one row per level.
pub fn reconstruction_report(s: usize, n: u64, seed: u64) -> Result<ErrorReport, CliError> {
    let inst = LeveledInstance::generate(s, n, seed)?;
    let params = reconstruction_params(s, n)?;
    let mut report = ErrorReport::default();
    report.notes.push(format!("k={} t={} N={n} seed={seed}", params.k(), params.t()));
    let mut sk = CrPrecis::new(params)?;
    sk.extend(inst.updates().iter().copied())?;
    let want = inst.observable();
    let (got, failure) = match reconstruct(&inst, &sk) {
        Ok(levels) => (levels, None),
        Err(e) => (vec![Vec::new(); s], Some(e.to_string())),
    };
    if let Some(f) = failure {
        report.notes.push(f);
    }
    for l in 1..=s {
        let (w, g) = (&want[l - 1], &got[l - 1]);
        let wrong = w.iter().filter(|x| !g.contains(x)).count() + g.iter().filter(|x| !w.contains(x)).count();
        report.rows.push(Row {
            query: format!("level {l} frequency {}", inst.frequency(l)),
            exact: w.len().to_string(),
            estimate: g.len().to_string(),
            abs_error: wrong.to_string(),
            bound: "0".into(),
            ok: wrong == 0,
        });
    }
    Ok(report)
}
