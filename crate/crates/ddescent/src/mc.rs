//! Monte Carlo sampling of the statistic and normality diagnostics:
//! standardized moments and the Kolmogorov-Smirnov distance to N(0, 1).
//!
//! Trials are partitioned into fixed-size chunks; chunk `k` draws from an
//! independent stream seeded by `chunk_seed(seed, k)`, and chunk summaries
//! merge in chunk order. Reports are therefore bit-identical for every
//! worker count.

use num::{BigInt, ToPrimitive};
use rayon::prelude::*;

use crate::dist::{exact_distribution, moments_from_table, DEFAULT_ENUMERATION_LIMIT};
use crate::error::{Error, Result};
use crate::normal::standard_normal_cdf;
use crate::perm::{DescentSpec, MomentSource, Permutation, Rational};
use crate::rng::{chunk_seed, SplitMix64};
use crate::stats::{self, StatEvaluator};

/// Trials per derived rng stream. Fixed so the stream layout, and with it
/// every report, depends only on (seed, trials).
pub const CHUNK_TRIALS: u64 = 1024;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n: u32,
    pub spec: DescentSpec,
    pub trials: u64,
    pub seed: u64,
    /// 0 = use the current thread pool.
    pub workers: usize,
    /// Cap for the exact-table fallback used to standardize configurations
    /// without a closed-form variance.
    pub enumeration_limit: u32,
}

impl SimulationConfig {
    pub fn new(n: u32, spec: DescentSpec, trials: u64, seed: u64) -> Self {
        SimulationConfig {
            n,
            spec,
            trials,
            seed,
            workers: 0,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Centering and scaling used to map the raw statistic to (X - mu) / sigma.
#[derive(Debug, Clone)]
pub struct Standardization {
    pub mu: Rational,
    pub sigma: f64,
    pub source: MomentSource,
}

/// Moment and distance diagnostics for one simulated configuration.
/// `empirical_mean` / `empirical_variance` describe the raw statistic;
/// skewness and excess kurtosis are scale-free, and `ks_statistic` is
/// measured on the standardized samples against N(0, 1).
#[derive(Debug, Clone)]
pub struct NormalityReport {
    pub n: u32,
    pub spec: DescentSpec,
    pub trials: u64,
    pub seed: u64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub ks_statistic: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub standardization: Standardization,
    /// KS against a continuous CDF cannot resolve below the largest atom of
    /// the lattice distribution; this is that atom's sampled mass.
    pub ks_resolution_floor: f64,
}

pub(crate) fn shuffle_in_place(values: &mut [u32], rng: &mut SplitMix64) {
    for i in (1..values.len()).rev() {
        let j = rng.next_below(i as u64 + 1) as usize;
        values.swap(i, j);
    }
}

/// Uniform random permutation via the decreasing-index swap shuffle.
/// Consumes exactly `n - 1` rng draws.
pub fn sample_permutation(n: u32, rng: &mut SplitMix64) -> Result<Permutation> {
    if n < 1 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    let mut values: Vec<u32> = (1..=n).collect();
    shuffle_in_place(&mut values, rng);
    Ok(Permutation::from_values_unchecked(values))
}

/// Resolves (mu, sigma) for a configuration: the closed forms when they
/// apply (`Uniform(d)` with `n >= 2d`), an exact enumeration table when `n`
/// is within the limit, and a refusal otherwise. Out-of-domain closed forms
/// are never used silently.
pub fn standardization_for(
    n: u32,
    spec: &DescentSpec,
    enumeration_limit: u32,
) -> Result<Standardization> {
    if n < 1 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    spec.validate_for(n)?;
    let (mu, variance, source) = match spec {
        DescentSpec::Uniform { d } if n >= 2 * d => (
            stats::mean_closed_form(n, *d)?,
            stats::variance_closed_form(n, *d)?,
            MomentSource::ClosedForm,
        ),
        _ => {
            if n > enumeration_limit {
                return Err(Error::UnsupportedRegime(format!(
                    "no closed-form variance for n = {n}, spec {} and n exceeds the \
                     enumeration limit {enumeration_limit}; refusing to standardize",
                    spec.label()
                )));
            }
            let table = exact_distribution(n, spec, enumeration_limit)?;
            let moments = moments_from_table(&table);
            (moments.mean, moments.variance, MomentSource::FromTable)
        }
    };
    let sigma_sq = variance
        .to_f64()
        .ok_or_else(|| Error::Input("variance does not fit in f64".into()))?;
    let sigma = sigma_sq.sqrt();
    if sigma <= 0.0 {
        return Err(Error::Input(format!(
            "degenerate statistic: sigma = 0 for n = {n}, spec {}",
            spec.label()
        )));
    }
    Ok(Standardization { mu, sigma, source })
}

struct ChunkSummary {
    sum_x: u128,
    sum_x2: u128,
    // power sums of (x - mu) in f64, for the shape diagnostics
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
    xs: Vec<u64>,
}

fn run_chunk(
    n: u32,
    spec: &DescentSpec,
    seed: u64,
    chunk_index: u64,
    len: u64,
    mu: f64,
) -> ChunkSummary {
    let mut rng = SplitMix64::new(chunk_seed(seed, chunk_index));
    let mut evaluator = StatEvaluator::new(n, spec);
    let mut buffer: Vec<u32> = (1..=n).collect();
    let mut summary = ChunkSummary {
        sum_x: 0,
        sum_x2: 0,
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
        c4: 0.0,
        xs: Vec::with_capacity(len as usize),
    };
    for _ in 0..len {
        for (slot, v) in buffer.iter_mut().zip(1..=n) {
            *slot = v;
        }
        shuffle_in_place(&mut buffer, &mut rng);
        let x = evaluator.eval(&buffer);
        summary.sum_x += x as u128;
        summary.sum_x2 += (x as u128) * (x as u128);
        let dx = x as f64 - mu;
        summary.c1 += dx;
        summary.c2 += dx * dx;
        summary.c3 += dx * dx * dx;
        summary.c4 += dx * dx * dx * dx;
        summary.xs.push(x);
    }
    summary
}

/// Draws `trials` independent permutations, evaluates the statistic, and
/// reports moment and KS diagnostics for the standardized values.
pub fn simulate(cfg: &SimulationConfig) -> Result<NormalityReport> {
    simulate_core(cfg).map(|(report, _)| report)
}

/// Like [`simulate`], also returning the sorted standardized samples.
pub fn simulate_with_samples(cfg: &SimulationConfig) -> Result<(NormalityReport, Vec<f64>)> {
    let (report, xs) = simulate_core(cfg)?;
    let mu = report
        .standardization
        .mu
        .to_f64()
        .ok_or_else(|| Error::Input("mu does not fit in f64".into()))?;
    let sigma = report.standardization.sigma;
    let samples = xs.iter().map(|&x| (x as f64 - mu) / sigma).collect();
    Ok((report, samples))
}

fn simulate_core(cfg: &SimulationConfig) -> Result<(NormalityReport, Vec<u64>)> {
    if cfg.trials < 1 {
        return Err(Error::Input("trials must be >= 1".into()));
    }
    let standardization = standardization_for(cfg.n, &cfg.spec, cfg.enumeration_limit)?;
    let mu = standardization
        .mu
        .to_f64()
        .ok_or_else(|| Error::Input("mu does not fit in f64".into()))?;
    let sigma = standardization.sigma;

    let chunk_count = cfg.trials.div_ceil(CHUNK_TRIALS);
    let chunk_len = |k: u64| {
        if k + 1 == chunk_count {
            cfg.trials - k * CHUNK_TRIALS
        } else {
            CHUNK_TRIALS
        }
    };
    let worker = |k: u64| run_chunk(cfg.n, &cfg.spec, cfg.seed, k, chunk_len(k), mu);

    let summaries: Vec<ChunkSummary> = if cfg.workers == 1 {
        (0..chunk_count).map(worker).collect()
    } else if cfg.workers == 0 {
        (0..chunk_count).into_par_iter().map(worker).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Input(format!("cannot build worker pool: {e}")))?;
        pool.install(|| (0..chunk_count).into_par_iter().map(worker).collect())
    };

    // merge in chunk order
    let mut sum_x = 0u128;
    let mut sum_x2 = 0u128;
    let mut c = [0.0f64; 4];
    let mut xs: Vec<u64> = Vec::with_capacity(cfg.trials as usize);
    for s in summaries {
        sum_x += s.sum_x;
        sum_x2 += s.sum_x2;
        c[0] += s.c1;
        c[1] += s.c2;
        c[2] += s.c3;
        c[3] += s.c4;
        xs.extend(s.xs);
    }
    xs.sort_unstable();

    let trials = cfg.trials;
    let trials_big = BigInt::from(trials);
    let empirical_mean = Rational::new(BigInt::from(sum_x), trials_big.clone())
        .to_f64()
        .unwrap_or(f64::NAN);
    // var = (T * sum(x^2) - sum(x)^2) / T^2, exact before the final cast
    let var_numerator =
        BigInt::from(sum_x2) * &trials_big - BigInt::from(sum_x) * BigInt::from(sum_x);
    let empirical_variance = Rational::new(var_numerator, &trials_big * &trials_big)
        .to_f64()
        .unwrap_or(f64::NAN);

    let t = trials as f64;
    let (m1, m2, m3, m4) = (c[0] / t, c[1] / t, c[2] / t, c[3] / t);
    let central2 = m2 - m1 * m1;
    let central3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
    let central4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    let (skewness, excess_kurtosis) = if central2 > 0.0 {
        (
            central3 / central2.powf(1.5),
            central4 / (central2 * central2) - 3.0,
        )
    } else {
        (0.0, 0.0)
    };

    let (ks, floor) = ks_over_sorted_counts(&xs, mu, sigma);

    let report = NormalityReport {
        n: cfg.n,
        spec: cfg.spec.clone(),
        trials,
        seed: cfg.seed,
        empirical_mean,
        empirical_variance,
        ks_statistic: ks,
        skewness,
        excess_kurtosis,
        standardization,
        ks_resolution_floor: floor,
    };
    Ok((report, xs))
}

/// Two-sided KS of sorted integer samples (standardized on the fly) against
/// N(0, 1); ties are handled by walking distinct values with cumulative
/// multiplicities. Also returns the largest atom mass (the resolution
/// floor).
fn ks_over_sorted_counts(xs: &[u64], mu: f64, sigma: f64) -> (f64, f64) {
    let total = xs.len() as f64;
    let mut sup = 0.0f64;
    let mut max_count = 0u64;
    let mut seen = 0u64;
    let mut idx = 0;
    while idx < xs.len() {
        let value = xs[idx];
        let mut run = 0u64;
        while idx < xs.len() && xs[idx] == value {
            run += 1;
            idx += 1;
        }
        let phi = standard_normal_cdf((value as f64 - mu) / sigma);
        let lo = seen as f64 / total;
        seen += run;
        let hi = seen as f64 / total;
        sup = sup.max((hi - phi).abs()).max((phi - lo).abs());
        max_count = max_count.max(run);
    }
    (sup, max_count as f64 / total)
}

/// Two-sided KS distance of already-sorted samples against N(0, 1):
/// `sup_x max(|F_hi(x) - Phi(x)|, |Phi(x) - F_lo(x)|)` over distinct sample
/// values, where F_lo/F_hi are the empirical CDF just before and at x.
pub fn ks_statistic(sorted_samples: &[f64]) -> Result<f64> {
    if sorted_samples.is_empty() {
        return Err(Error::Input(
            "ks_statistic needs at least one sample".into(),
        ));
    }
    if sorted_samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Input("samples must not contain NaN".into()));
    }
    for window in sorted_samples.windows(2) {
        if window[0] > window[1] {
            return Err(Error::Input("samples must be sorted ascending".into()));
        }
    }
    let total = sorted_samples.len() as f64;
    let mut sup = 0.0f64;
    let mut seen = 0usize;
    let mut idx = 0;
    while idx < sorted_samples.len() {
        let value = sorted_samples[idx];
        let mut run = 0usize;
        while idx < sorted_samples.len() && sorted_samples[idx] == value {
            run += 1;
            idx += 1;
        }
        let phi = standard_normal_cdf(value);
        let lo = seen as f64 / total;
        seen += run;
        let hi = seen as f64 / total;
        sup = sup.max((hi - phi).abs()).max((phi - lo).abs());
    }
    Ok(sup)
}

/// KS distance of a discrete distribution given as sorted `(value, weight)`
/// atoms (weights summing to 1) against N(0, 1). This is the exact
/// population form of [`ks_statistic`].
pub fn ks_statistic_weighted(atoms: &[(f64, f64)]) -> Result<f64> {
    if atoms.is_empty() {
        return Err(Error::Input("ks_statistic_weighted needs atoms".into()));
    }
    let mut mass = 0.0f64;
    for (idx, &(value, weight)) in atoms.iter().enumerate() {
        if !value.is_finite() || weight.is_nan() || weight < 0.0 {
            return Err(Error::Input(
                "atoms must have finite values and weights >= 0".into(),
            ));
        }
        if idx > 0 && atoms[idx - 1].0 >= value {
            return Err(Error::Input(
                "atom values must be strictly increasing".into(),
            ));
        }
        mass += weight;
    }
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Input(format!(
            "atom weights sum to {mass}, expected 1"
        )));
    }
    let mut sup = 0.0f64;
    let mut cum = 0.0f64;
    for &(value, weight) in atoms {
        let phi = standard_normal_cdf(value);
        let lo = cum;
        cum += weight;
        sup = sup.max((cum - phi).abs()).max((phi - lo).abs());
    }
    Ok(sup)
}

/// The window-growth rule `d(n) = max(1, floor(n^(1 - epsilon)))`. The
/// tiny nudge keeps exact powers (e.g. `10000^0.5`) from rounding down.
pub fn power_law_d(n: u32, epsilon: f64) -> u32 {
    let raw = (n as f64).powf(1.0 - epsilon);
    ((raw + 1e-9).floor() as u32).max(1)
}

#[derive(Debug, Clone)]
pub enum GrowthOutcome {
    Report(NormalityReport),
    Skipped { reason: String },
}

#[derive(Debug, Clone)]
pub struct GrowthEntry {
    pub n: u32,
    pub d: u32,
    pub outcome: GrowthOutcome,
}

/// Runs `simulate` along an `n` schedule with `d = max(1, floor(n^(1 -
/// epsilon)))`. Entries with `n < 2d` (no closed-form standardization) are
/// skipped with a warning record. All entries share the experiment seed.
pub fn growth_regime_experiment(
    epsilon: f64,
    n_schedule: &[u32],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<GrowthEntry>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Input(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    let mut entries = Vec::with_capacity(n_schedule.len());
    for &n in n_schedule {
        let d = power_law_d(n, epsilon);
        if n < 2 * d {
            entries.push(GrowthEntry {
                n,
                d,
                outcome: GrowthOutcome::Skipped {
                    reason: format!("n = {n} < 2d = {} for epsilon = {epsilon}", 2 * d),
                },
            });
            continue;
        }
        let cfg = SimulationConfig {
            n,
            spec: DescentSpec::uniform(d)?,
            trials,
            seed,
            workers,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
        };
        entries.push(GrowthEntry {
            n,
            d,
            outcome: GrowthOutcome::Report(simulate(&cfg)?),
        });
    }
    Ok(entries)
}
