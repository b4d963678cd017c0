//! The descent statistic and its closed-form combinatorics: eligible-pair
//! counts, joint-expectation classes, exact mean and variance.

use num::BigInt;

use crate::error::{Error, Result};
use crate::perm::{DescentSpec, PairClass, PairIndex, Permutation, Rational};

/// Raw comparison indicator for a position pair: true iff `p_i > p_j`.
/// Eligibility under a spec is the caller's concern.
pub fn is_descent_pair(p: &Permutation, pair: PairIndex) -> Result<bool> {
    let n = p.len() as u32;
    if pair.j() > n {
        return Err(Error::Input(format!(
            "pair ({}, {}) out of range for permutation of length {n}",
            pair.i(),
            pair.j()
        )));
    }
    Ok(p.value_at(pair.i()) > p.value_at(pair.j()))
}

/// Number of eligible pairs `(i, j)` with `p_i > p_j` under `spec`.
///
/// Uses the direct window rescan for small workloads and a sliding-window
/// order-statistic counter for large ones; the two are differentially
/// tested against each other.
pub fn count_statistic(p: &Permutation, spec: &DescentSpec) -> Result<u64> {
    let n = p.len() as u32;
    spec.validate_for(n)?;
    Ok(StatEvaluator::new(n, spec).eval(p.values()))
}

/// Reusable statistic evaluator: picks the rescan or the tree counter once
/// per `(n, spec)` and amortizes the setup over many permutations.
pub(crate) enum StatEvaluator {
    Rescan { windows: Vec<u32> },
    Tree(WindowedCounter),
}

impl StatEvaluator {
    pub(crate) fn new(n: u32, spec: &DescentSpec) -> Self {
        let windows = spec.windows(n);
        let rescan_cost: u64 = windows.iter().map(|&w| w as u64).sum();
        // the tree counter costs ~2 log2(n) tree updates per position
        let tree_cost = 4 * (n as u64) * (64 - u64::from(n).leading_zeros()) as u64;
        if rescan_cost > tree_cost && rescan_cost > 65_536 {
            StatEvaluator::Tree(WindowedCounter::new(n, &windows))
        } else {
            StatEvaluator::Rescan { windows }
        }
    }

    pub(crate) fn eval(&mut self, values: &[u32]) -> u64 {
        match self {
            StatEvaluator::Rescan { windows } => rescan(values, windows),
            StatEvaluator::Tree(counter) => counter.count(values),
        }
    }
}

/// Reference implementation: direct scan of every eligible pair.
pub fn count_statistic_rescan(p: &Permutation, spec: &DescentSpec) -> Result<u64> {
    let n = p.len() as u32;
    spec.validate_for(n)?;
    Ok(rescan(p.values(), &spec.windows(n)))
}

pub(crate) fn rescan(values: &[u32], windows: &[u32]) -> u64 {
    let mut count = 0u64;
    for (i0, &w) in windows.iter().enumerate() {
        let v = values[i0];
        for &u in &values[i0 + 1..i0 + 1 + w as usize] {
            if v > u {
                count += 1;
            }
        }
    }
    count
}

/// Sliding-window counter: processes positions left to right, keeping the
/// still-eligible left endpoints in a Fenwick tree over values, so each
/// position costs O(log n) instead of O(window).
///
/// Position `i` (1-based) stays eligible for right endpoints `j <= i + w_i`,
/// so it is inserted after being processed and dropped after step `i + w_i`.
/// A full pass drains everything it inserts, leaving the tree zeroed for the
/// next call.
pub(crate) struct WindowedCounter {
    n: usize,
    windows: Vec<u32>,
    // positions (0-based) to drop after processing step e (1-based)
    drop_after: Vec<Vec<u32>>,
    tree: Vec<u32>,
    active: u64,
}

impl WindowedCounter {
    pub(crate) fn new(n: u32, windows: &[u32]) -> Self {
        let n = n as usize;
        let mut drop_after = vec![Vec::new(); n + 1];
        for (i0, &w) in windows.iter().enumerate() {
            if w >= 1 {
                // last eligible right endpoint of position i0+1
                let deadline = i0 + 1 + w as usize;
                drop_after[deadline].push(i0 as u32);
            }
        }
        WindowedCounter {
            n,
            windows: windows.to_vec(),
            drop_after,
            tree: vec![0; n + 1],
            active: 0,
        }
    }

    fn add(&mut self, value: u32, delta: i32) {
        let mut idx = value as usize;
        while idx <= self.n {
            self.tree[idx] = (self.tree[idx] as i64 + delta as i64) as u32;
            idx += idx & idx.wrapping_neg();
        }
    }

    fn count_leq(&self, value: u32) -> u64 {
        let mut idx = value as usize;
        let mut total = 0u64;
        while idx > 0 {
            total += self.tree[idx] as u64;
            idx &= idx - 1;
        }
        total
    }

    pub(crate) fn count(&mut self, values: &[u32]) -> u64 {
        debug_assert_eq!(values.len(), self.n);
        let mut count = 0u64;
        for j0 in 0..self.n {
            let v = values[j0];
            // left endpoints still in range with a larger value
            count += self.active - self.count_leq(v);
            if self.windows[j0] >= 1 {
                self.add(v, 1);
                self.active += 1;
            }
            for k in 0..self.drop_after[j0 + 1].len() {
                let i0 = self.drop_after[j0 + 1][k] as usize;
                let dropped = values[i0];
                self.add(dropped, -1);
                self.active -= 1;
            }
        }
        debug_assert_eq!(self.active, 0);
        count
    }
}

/// Number of eligible pairs under `Uniform(d)`: `(n-d)d + C(d,2)` for
/// `d <= n - 1`, and `C(n, 2)` once every pair is in range.
pub fn eligible_pair_count(n: u32, d: u32) -> Result<u64> {
    if n < 1 {
        return Err(Error::Input("n must be >= 1".into()));
    }
    if d < 1 {
        return Err(Error::Input("d must be >= 1".into()));
    }
    let n = n as u64;
    let d = d as u64;
    if d >= n.saturating_sub(1) {
        Ok(n * (n - 1) / 2)
    } else {
        Ok((n - d) * d + d * (d - 1) / 2)
    }
}

/// Classifies an ordered pair of eligible position pairs by which endpoint
/// relation holds. For pairs with `i < j` the relations are mutually
/// exclusive, so the match order below is exhaustive.
pub fn classify_pair(a: PairIndex, b: PairIndex) -> PairClass {
    if a == b {
        return PairClass::Equal;
    }
    if a.i() == b.i() || a.j() == b.j() {
        // sharing the left endpoints (or the right endpoints) cannot also
        // cross, because i < j within each pair
        debug_assert!(!(a.i() == b.j() || a.j() == b.i()));
        return PairClass::Aligned;
    }
    if a.i() == b.j() || a.j() == b.i() {
        return PairClass::Crossed;
    }
    debug_assert!(!a.shares_index(&b));
    PairClass::Independent
}

/// Counts of ordered indicator pairs per joint-expectation class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairClassCounts {
    pub equal: u128,
    pub aligned: u128,
    pub crossed: u128,
    pub independent: u128,
}

impl PairClassCounts {
    pub fn total(&self) -> u128 {
        self.equal + self.aligned + self.crossed + self.independent
    }
}

/// Closed-form class counts over all ordered pairs of eligible pairs:
/// `equal = N`, `aligned = 2(n-d)d(d-1) + 4 C(d,3)`,
/// `crossed = 2(n-2d)d^2 + 2 d^2(d-1) = 2 d^2 (n-d-1)`, remainder
/// independent. The counting is only valid for `n >= 2d`.
///
/// Crossed pairs share a middle index t (the right endpoint of one pair is
/// the left endpoint of the other): summing over t gives
/// `sum_t min(d, t-1) * min(d, n-t)` per orientation, i.e. `(n-2d)d^2`
/// interior plus `d^2(d-1)/2` at each end of the word.
pub fn pair_class_counts(n: u32, d: u32) -> Result<PairClassCounts> {
    let pairs = eligible_pair_count(n, d)? as u128;
    if n < 2 * d {
        return Err(Error::UnsupportedRegime(format!(
            "pair-class counting requires n >= 2d (n = {n}, d = {d})"
        )));
    }
    let n = n as u128;
    let d = d as u128;
    let choose3 = if d >= 3 { d * (d - 1) * (d - 2) / 6 } else { 0 };
    let aligned = 2 * (n - d) * d * (d - 1) + 4 * choose3;
    let crossed = 2 * d * d * (n - d - 1);
    let total = pairs * pairs;
    let independent = total - pairs - aligned - crossed;
    Ok(PairClassCounts {
        equal: pairs,
        aligned,
        crossed,
        independent,
    })
}

/// Exact mean of the statistic under `Uniform(d)`: half the eligible pairs.
pub fn mean_closed_form(n: u32, d: u32) -> Result<Rational> {
    let pairs = eligible_pair_count(n, d)?;
    Ok(Rational::new(BigInt::from(pairs), BigInt::from(2)))
}

/// Exact variance of the statistic under `Uniform(d)`:
/// `(6dn + 4d^3 + 3d^2 - d) / 72`, valid for `n >= 2d`. Linear in n, and
/// `(n + 1) / 12` at `d = 1`.
///
/// This follows from the pair-class counts:
/// `Var = N/4 + aligned/12 - crossed/12` after cancelling the independent
/// terms, which expands to the numerator above. The enumeration suite
/// checks the equality against full tables for every n <= 9.
pub fn variance_closed_form(n: u32, d: u32) -> Result<Rational> {
    if n < 1 || d < 1 {
        return Err(Error::Input("n and d must be >= 1".into()));
    }
    if n < 2 * d {
        return Err(Error::UnsupportedRegime(format!(
            "closed-form variance requires n >= 2d (n = {n}, d = {d})"
        )));
    }
    let n = i128::from(n);
    let d = i128::from(d);
    let numerator = 6 * d * n + 4 * d * d * d + 3 * d * d - d;
    Ok(Rational::new(BigInt::from(numerator), BigInt::from(72)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::DescentSpec;
    use proptest::prelude::*;

    fn perm(values: &[u32]) -> Permutation {
        Permutation::from_values(values.to_vec()).unwrap()
    }

    fn pair(i: u32, j: u32) -> PairIndex {
        PairIndex::new(i, j).unwrap()
    }

    #[test]
    fn descent_pair_indicator() {
        let id = Permutation::identity(5).unwrap();
        assert!(!is_descent_pair(&id, pair(1, 2)).unwrap());
        let p = perm(&[3, 1, 4, 2]);
        assert!(is_descent_pair(&p, pair(1, 2)).unwrap());
        assert!(!is_descent_pair(&p, pair(2, 4)).unwrap());
        assert!(is_descent_pair(&p, pair(1, 5)).is_err());
    }

    #[test]
    fn statistic_examples() {
        let rev = Permutation::reversal(4).unwrap();
        assert_eq!(
            count_statistic(&rev, &DescentSpec::uniform(3).unwrap()).unwrap(),
            6
        );
        let p = perm(&[3, 1, 4, 2]);
        // adjacent descents at positions (1,2) and (3,4)
        assert_eq!(
            count_statistic(&p, &DescentSpec::uniform(1).unwrap()).unwrap(),
            2
        );
        // full-reach vector counts all inversions: (1,2), (1,4), (3,4)
        assert_eq!(
            count_statistic(&p, &DescentSpec::vector(vec![3, 2, 1]).unwrap()).unwrap(),
            3
        );
    }

    #[test]
    fn spec_length_mismatch_is_an_input_error() {
        let p = perm(&[2, 1, 3]);
        let spec = DescentSpec::vector(vec![1]).unwrap();
        assert!(matches!(count_statistic(&p, &spec), Err(Error::Input(_))));
    }

    #[test]
    fn eligible_pair_count_examples() {
        assert_eq!(eligible_pair_count(10, 1).unwrap(), 9);
        // direct enumeration: (1,2),(1,3),(2,3),(2,4),(3,4),(3,5),(4,5)
        assert_eq!(eligible_pair_count(5, 2).unwrap(), 7);
        assert_eq!(eligible_pair_count(10, 9).unwrap(), 45);
        assert_eq!(eligible_pair_count(10, 50).unwrap(), 45);
        assert_eq!(eligible_pair_count(1, 1).unwrap(), 0);
        assert!(eligible_pair_count(0, 1).is_err());
    }

    /// Oracle: count `{(i, j) : i < j <= min(i + d, n)}` by double loop.
    fn eligible_pairs_brute(n: u32, d: u32) -> u64 {
        let mut count = 0;
        for i in 1..=n {
            for j in (i + 1)..=n.min(i + d) {
                let _ = j;
                count += 1;
            }
        }
        count
    }

    #[test]
    fn eligible_pair_count_matches_enumeration_up_to_50() {
        for n in 1..=50 {
            for d in 1..n.max(2) {
                assert_eq!(
                    eligible_pair_count(n, d).unwrap(),
                    eligible_pairs_brute(n, d),
                    "n={n} d={d}"
                );
            }
        }
    }

    #[test]
    fn classify_pair_examples() {
        assert_eq!(classify_pair(pair(1, 2), pair(1, 3)), PairClass::Aligned);
        assert_eq!(classify_pair(pair(1, 2), pair(2, 3)), PairClass::Crossed);
        assert_eq!(
            classify_pair(pair(1, 2), pair(3, 4)),
            PairClass::Independent
        );
        assert_eq!(classify_pair(pair(2, 5), pair(2, 5)), PairClass::Equal);
        assert_eq!(classify_pair(pair(2, 5), pair(3, 5)), PairClass::Aligned);
        assert_eq!(classify_pair(pair(2, 5), pair(5, 6)), PairClass::Crossed);
    }

    /// Oracle: tally classes by exhaustively classifying every ordered pair
    /// of eligible pairs.
    fn class_counts_brute(n: u32, d: u32) -> PairClassCounts {
        let mut eligible = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n.min(i + d) {
                eligible.push(pair(i, j));
            }
        }
        let mut counts = PairClassCounts {
            equal: 0,
            aligned: 0,
            crossed: 0,
            independent: 0,
        };
        for &a in &eligible {
            for &b in &eligible {
                match classify_pair(a, b) {
                    PairClass::Equal => counts.equal += 1,
                    PairClass::Aligned => counts.aligned += 1,
                    PairClass::Crossed => counts.crossed += 1,
                    PairClass::Independent => counts.independent += 1,
                }
            }
        }
        counts
    }

    #[test]
    fn pair_class_count_examples() {
        assert_eq!(
            pair_class_counts(4, 1).unwrap(),
            PairClassCounts {
                equal: 3,
                aligned: 0,
                crossed: 4,
                independent: 2
            }
        );
        assert_eq!(
            pair_class_counts(2, 1).unwrap(),
            PairClassCounts {
                equal: 1,
                aligned: 0,
                crossed: 0,
                independent: 0
            }
        );
        assert_eq!(pair_class_counts(20, 3).unwrap(), class_counts_brute(20, 3));
        assert!(matches!(
            pair_class_counts(5, 3),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn mean_closed_form_examples() {
        assert_eq!(
            mean_closed_form(4, 1).unwrap(),
            Rational::new(3.into(), 2.into())
        );
        assert_eq!(
            mean_closed_form(5, 2).unwrap(),
            Rational::new(7.into(), 2.into())
        );
        assert_eq!(
            mean_closed_form(10, 9).unwrap(),
            Rational::new(45.into(), 2.into())
        );
    }

    #[test]
    fn variance_closed_form_examples() {
        assert_eq!(
            variance_closed_form(10, 1).unwrap(),
            Rational::new(11.into(), 12.into())
        );
        // brute force over S_4 with d = 2 (see the oracle test below)
        assert_eq!(
            variance_closed_form(4, 2).unwrap(),
            Rational::new(5.into(), 4.into())
        );
        assert_eq!(
            variance_closed_form(2, 1).unwrap(),
            Rational::new(1.into(), 4.into())
        );
        assert!(matches!(
            variance_closed_form(3, 2),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    /// Oracle: brute-force variance of the statistic over all of S_4 with
    /// d = 2, checked against the closed form.
    #[test]
    fn variance_matches_brute_force_on_s4() {
        let spec = DescentSpec::uniform(2).unwrap();
        let mut values = Vec::new();
        let mut items = vec![1u32, 2, 3, 4];
        loop {
            let p = Permutation::from_values(items.clone()).unwrap();
            values.push(count_statistic(&p, &spec).unwrap() as i64);
            if !crate::dist::next_permutation(&mut items) {
                break;
            }
        }
        assert_eq!(values.len(), 24);
        let total: i64 = values.iter().sum();
        let total_sq: i64 = values.iter().map(|v| v * v).sum();
        let mean = Rational::new(total.into(), 24.into());
        let variance = Rational::new(total_sq.into(), 24.into()) - mean.clone() * mean;
        assert_eq!(variance, variance_closed_form(4, 2).unwrap());
    }

    #[test]
    fn variance_d1_is_the_eulerian_variance() {
        for n in 2..=60u32 {
            assert_eq!(
                variance_closed_form(n, 1).unwrap(),
                Rational::new(BigInt::from(n + 1), 12.into())
            );
        }
    }

    /// Lemma route: reconstruct the variance from the class counts,
    /// `sum(class count * joint expectation) - (N/2)^2`.
    #[test]
    fn variance_reconstruction_from_pair_classes() {
        for n in 2..=60u32 {
            for d in 1..=6u32.min(n / 2) {
                let counts = pair_class_counts(n, d).unwrap();
                let pairs = eligible_pair_count(n, d).unwrap();
                assert_eq!(counts.total(), (pairs as u128) * (pairs as u128));
                let term = |count: u128, class: PairClass| {
                    Rational::new(BigInt::from(count), 1.into()) * class.expectation()
                };
                let second_moment = term(counts.equal, PairClass::Equal)
                    + term(counts.aligned, PairClass::Aligned)
                    + term(counts.crossed, PairClass::Crossed)
                    + term(counts.independent, PairClass::Independent);
                let mean = mean_closed_form(n, d).unwrap();
                let variance = second_moment - mean.clone() * mean;
                assert_eq!(variance, variance_closed_form(n, d).unwrap(), "n={n} d={d}");
            }
        }
    }

    proptest! {
        /// The windowed counter and the rescan agree on random inputs.
        #[test]
        fn windowed_counter_matches_rescan(
            seed in 0u64..1_000_000,
            n in 1u32..60,
            uniform in proptest::bool::ANY,
        ) {
            let mut rng = crate::rng::SplitMix64::new(seed);
            let p = crate::mc::sample_permutation(n, &mut rng).unwrap();
            let spec = if uniform {
                DescentSpec::uniform(1 + (rng.next_u64() % (n as u64 + 4)) as u32).unwrap()
            } else {
                let ds = (1..n).map(|_| 1 + (rng.next_u64() % n as u64) as u32).collect();
                DescentSpec::vector(ds).unwrap()
            };
            let windows = spec.windows(n);
            let by_rescan = rescan(p.values(), &windows);
            let by_tree = WindowedCounter::new(n, &windows).count(p.values());
            prop_assert_eq!(by_rescan, by_tree);
        }

        /// Statistic bounds and extremes: 0 <= count <= eligible pairs, the
        /// reversal attains the maximum, and the identity attains 0.
        #[test]
        fn statistic_respects_bounds(n in 1u32..40, d in 1u32..45) {
            let spec = DescentSpec::uniform(d).unwrap();
            let rev = Permutation::reversal(n).unwrap();
            let max = count_statistic(&rev, &spec).unwrap();
            prop_assert_eq!(max, eligible_pair_count(n, d).unwrap());
            prop_assert_eq!(max, spec.max_statistic(n));
            let id = Permutation::identity(n).unwrap();
            prop_assert_eq!(count_statistic(&id, &spec).unwrap(), 0);
        }

        /// Complement symmetry: the statistic of the complement is the
        /// maximum minus the statistic.
        #[test]
        fn complement_flips_the_statistic(seed in 0u64..1_000_000, n in 1u32..30, d in 1u32..30) {
            let spec = DescentSpec::uniform(d).unwrap();
            let mut rng = crate::rng::SplitMix64::new(seed);
            let p = crate::mc::sample_permutation(n, &mut rng).unwrap();
            let k = count_statistic(&p, &spec).unwrap();
            let k_complement = count_statistic(&p.complement(), &spec).unwrap();
            prop_assert_eq!(k + k_complement, spec.max_statistic(n));
        }
    }
}
