//! Exact distribution tables by exhaustive enumeration, with independent
//! oracles (inversion product polynomial, Eulerian recurrence) and
//! structural checks (unimodality, log-concavity).

use num::{BigInt, BigUint, One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::perm::{DescentSpec, MomentReport, MomentSource, Rational};
use crate::stats;

/// Guardrail for exhaustive enumeration; overridable per call.
pub const DEFAULT_ENUMERATION_LIMIT: u32 = 12;

/// Exact counts `c_0..c_K` of permutations of length `n` by statistic value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionTable {
    n: u32,
    spec: DescentSpec,
    counts: Vec<BigUint>,
}

impl DistributionTable {
    pub(crate) fn new(n: u32, spec: DescentSpec, counts: Vec<BigUint>) -> Self {
        DistributionTable { n, spec, counts }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn spec(&self) -> &DescentSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// Maximum achievable statistic value (the table covers `0..=max`).
    pub fn max_value(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

/// Lexicographic successor, in place. Returns false once `items` is the
/// final (descending) arrangement.
pub(crate) fn next_permutation(items: &mut [u32]) -> bool {
    let n = items.len();
    if n < 2 {
        return false;
    }
    let mut pivot = n - 1;
    while pivot > 0 && items[pivot - 1] >= items[pivot] {
        pivot -= 1;
    }
    if pivot == 0 {
        return false;
    }
    let mut swap = n - 1;
    while items[swap] <= items[pivot - 1] {
        swap -= 1;
    }
    items.swap(pivot - 1, swap);
    items[pivot..].reverse();
    true
}

/// Statistic tallies over every permutation starting with `first`, walking
/// the remaining values in lexicographic order.
fn branch_counts(n: u32, first: u32, windows: &[u32], table_len: usize) -> Vec<u64> {
    let mut tally = vec![0u64; table_len];
    let mut buffer = Vec::with_capacity(n as usize);
    buffer.push(first);
    buffer.extend((1..=n).filter(|&v| v != first));
    loop {
        let k = stats::rescan(&buffer, windows) as usize;
        tally[k] += 1;
        if !next_permutation(&mut buffer[1..]) {
            break;
        }
    }
    tally
}

/// Exact distribution of the statistic over all of `S_n`, computed with the
/// current rayon pool.
///
/// `enumeration_limit` is an explicit capacity guard; `n` beyond it is
/// refused rather than attempted.
pub fn exact_distribution(
    n: u32,
    spec: &DescentSpec,
    enumeration_limit: u32,
) -> Result<DistributionTable> {
    exact_distribution_with_workers(n, spec, enumeration_limit, 0)
}

/// Same as [`exact_distribution`] with an explicit worker count
/// (`0` = current pool). The split by first element makes the work
/// embarrassingly parallel; branch tallies merge elementwise in branch
/// order, so the result is identical for every worker count.
pub fn exact_distribution_with_workers(
    n: u32,
    spec: &DescentSpec,
    enumeration_limit: u32,
    workers: usize,
) -> Result<DistributionTable> {
    if n < 1 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    if n > enumeration_limit {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the enumeration limit {enumeration_limit}"
        )));
    }
    spec.validate_for(n)?;
    let windows = spec.windows(n);
    let table_len = spec.max_statistic(n) as usize + 1;

    let branches: Vec<Vec<u64>> = if workers == 1 {
        (1..=n)
            .map(|first| branch_counts(n, first, &windows, table_len))
            .collect()
    } else if workers == 0 {
        (1..=n)
            .into_par_iter()
            .map(|first| branch_counts(n, first, &windows, table_len))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Input(format!("cannot build worker pool: {e}")))?;
        pool.install(|| {
            (1..=n)
                .into_par_iter()
                .map(|first| branch_counts(n, first, &windows, table_len))
                .collect()
        })
    };

    let mut counts = vec![BigUint::zero(); table_len];
    for branch in branches {
        for (slot, add) in counts.iter_mut().zip(branch) {
            *slot += add;
        }
    }
    Ok(DistributionTable::new(n, spec.clone(), counts))
}

/// Inversion-count distribution via the product polynomial
/// `(1+x)(1+x+x^2)...(1+x+...+x^{n-1})`, multiplied out exactly.
///
/// Multiplying a polynomial by `1+x+...+x^k` replaces each coefficient with
/// a sliding-window sum of width `k+1`, done here with running prefix sums.
pub fn oracle_inversions(n: u32) -> Result<DistributionTable> {
    if n < 1 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    let mut coefficients = vec![BigUint::one()];
    for factor in 2..=n as usize {
        let width = factor; // 1 + x + ... + x^{factor-1}
        let old_len = coefficients.len();
        let new_len = old_len + width - 1;
        let mut next = Vec::with_capacity(new_len);
        let mut window = BigUint::zero();
        for t in 0..new_len {
            if t < old_len {
                window += &coefficients[t];
            }
            if t >= width {
                window -= &coefficients[t - width];
            }
            next.push(window.clone());
        }
        coefficients = next;
    }
    let spec = DescentSpec::uniform(n.saturating_sub(1).max(1))?;
    Ok(DistributionTable::new(n, spec, coefficients))
}

/// Eulerian numbers `A(n, k)` via the standard recurrence
/// `A(n, k) = (k+1) A(n-1, k) + (n-k) A(n-1, k-1)`, `A(1, 0) = 1`.
pub fn oracle_eulerian(n: u32) -> Result<DistributionTable> {
    if n < 1 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    let mut row = vec![BigUint::one()];
    for m in 2..=n as u64 {
        let mut next = vec![BigUint::zero(); m as usize];
        for k in 0..m as usize {
            let k_u = k as u64;
            if k < row.len() {
                next[k] += &row[k] * BigUint::from(k_u + 1);
            }
            if k >= 1 && k - 1 < row.len() {
                next[k] += &row[k - 1] * BigUint::from(m - k_u);
            }
        }
        row = next;
    }
    Ok(DistributionTable::new(n, DescentSpec::uniform(1)?, row))
}

/// Exact mean and variance read off a distribution table:
/// `mean = sum(k c_k) / n!`, `variance = sum(k^2 c_k) / n! - mean^2`.
pub fn moments_from_table(table: &DistributionTable) -> MomentReport {
    let mut total = BigUint::zero();
    let mut weighted = BigUint::zero();
    let mut weighted_sq = BigUint::zero();
    for (k, count) in table.counts().iter().enumerate() {
        let k = BigUint::from(k);
        total += count;
        weighted += count * &k;
        weighted_sq += count * &k * &k;
    }
    let total = BigInt::from(total);
    let mean = Rational::new(BigInt::from(weighted), total.clone());
    let second_moment = Rational::new(BigInt::from(weighted_sq), total);
    let variance = second_moment - mean.clone() * mean.clone();
    MomentReport {
        mean,
        variance,
        source: MomentSource::FromTable,
    }
}

/// True iff the sequence rises (weakly) to a peak and then falls (weakly).
pub fn is_unimodal(counts: &[BigUint]) -> bool {
    let mut k = 0;
    while k + 1 < counts.len() && counts[k] <= counts[k + 1] {
        k += 1;
    }
    while k + 1 < counts.len() && counts[k] >= counts[k + 1] {
        k += 1;
    }
    k + 1 == counts.len()
}

pub fn unimodality_check(table: &DistributionTable) -> bool {
    is_unimodal(table.counts())
}

/// Indices `k` violating `c_{k-1} c_{k+1} <= c_k^2`, in exact integer
/// arithmetic. Empty means log-concave. Reported, not asserted: whether
/// these tables are always log-concave is an open question.
pub fn log_concavity_violations(counts: &[BigUint]) -> Vec<usize> {
    let mut violations = Vec::new();
    for k in 1..counts.len().saturating_sub(1) {
        if &counts[k - 1] * &counts[k + 1] > &counts[k] * &counts[k] {
            violations.push(k);
        }
    }
    violations
}

pub fn log_concavity_report(table: &DistributionTable) -> Vec<usize> {
    log_concavity_violations(table.counts())
}
