//! Domain types: permutations, descent window specifications, index pairs.
//!
//! Everything here is 1-based at the public boundary: a permutation of
//! length `n` holds each value `1..=n` exactly once, and a pair `(i, j)`
//! refers to positions with `1 <= i < j <= n`.

use num::BigRational;

use crate::error::{Error, Result};

/// Exact rational used for all closed-form quantities.
pub type Rational = BigRational;

/// A permutation `p_1 p_2 ... p_n` of the values `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    /// Builds a permutation from its one-line notation, validating that the
    /// values form a bijection onto `1..=n`.
    pub fn from_values(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Input("permutation must have length >= 1".into()));
        }
        let mut seen = vec![false; n];
        for &v in &values {
            if v < 1 || v as usize > n {
                return Err(Error::Input(format!(
                    "value {v} out of range 1..={n} in permutation"
                )));
            }
            if seen[(v - 1) as usize] {
                return Err(Error::Input(format!("value {v} repeated in permutation")));
            }
            seen[(v - 1) as usize] = true;
        }
        Ok(Permutation { values })
    }

    /// Wraps values already known to be a valid permutation (sampler and
    /// enumerator internals).
    pub(crate) fn from_values_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Permutation::from_values(values.clone()).is_ok());
        Permutation { values }
    }

    /// The identity permutation `1 2 ... n`.
    pub fn identity(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("permutation must have length >= 1".into()));
        }
        Ok(Permutation {
            values: (1..=n).collect(),
        })
    }

    /// The reversal `n n-1 ... 1`, which attains the maximum of every
    /// descent statistic.
    pub fn reversal(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("permutation must have length >= 1".into()));
        }
        Ok(Permutation {
            values: (1..=n).rev().collect(),
        })
    }

    /// The complement `p_i -> n + 1 - p_i`, which maps a statistic value `k`
    /// to `K - k` where `K` is the maximum achievable value.
    pub fn complement(&self) -> Self {
        let n = self.values.len() as u32;
        Permutation {
            values: self.values.iter().map(|&v| n + 1 - v).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Value at 1-based position `i`. Callers validate the range.
    pub(crate) fn value_at(&self, i: u32) -> u32 {
        self.values[(i - 1) as usize]
    }
}

/// Which pairs `(i, j)` are eligible for the descent statistic.
///
/// `Uniform(d)` makes `(i, j)` eligible when `i < j <= i + d`; values of
/// `d >= n - 1` behave identically to `d = n - 1` (all pairs, i.e.
/// inversions). `Vector(ds)` gives each left position its own reach `d_i`;
/// entries larger than `n - i` are clamped, so `Vector(1,1,...,1)` counts
/// classical descents and `Vector(n-1, n-2, ..., 1)` counts inversions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DescentSpec {
    Uniform { d: u32 },
    Vector { ds: Vec<u32> },
}

impl DescentSpec {
    pub fn uniform(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::Input("uniform window d must be >= 1".into()));
        }
        Ok(DescentSpec::Uniform { d })
    }

    /// A per-position window vector; must have length `n - 1` when paired
    /// with a permutation of length `n` (empty is valid for `n = 1`).
    pub fn vector(ds: Vec<u32>) -> Result<Self> {
        if ds.contains(&0) {
            return Err(Error::Input("vector windows must all be >= 1".into()));
        }
        Ok(DescentSpec::Vector { ds })
    }

    /// Checks compatibility with a permutation of length `n`.
    pub fn validate_for(&self, n: u32) -> Result<()> {
        match self {
            DescentSpec::Uniform { .. } => Ok(()),
            DescentSpec::Vector { ds } => {
                if ds.len() == (n - 1) as usize {
                    Ok(())
                } else {
                    Err(Error::Input(format!(
                        "window vector has length {}, expected n - 1 = {}",
                        ds.len(),
                        n - 1
                    )))
                }
            }
        }
    }

    /// Effective window at 1-based position `i`: how many positions to the
    /// right of `i` are eligible, after clamping at the end of the word.
    pub fn window_at(&self, i: u32, n: u32) -> u32 {
        debug_assert!(i >= 1 && i <= n);
        let reach = match self {
            DescentSpec::Uniform { d } => *d,
            DescentSpec::Vector { ds } => {
                if i == n {
                    0
                } else {
                    ds[(i - 1) as usize]
                }
            }
        };
        reach.min(n - i)
    }

    /// All effective windows, indexed by 0-based position.
    pub fn windows(&self, n: u32) -> Vec<u32> {
        (1..=n).map(|i| self.window_at(i, n)).collect()
    }

    /// Maximum achievable statistic value: the number of eligible pairs.
    pub fn max_statistic(&self, n: u32) -> u64 {
        (1..=n).map(|i| self.window_at(i, n) as u64).sum()
    }

    /// Short printable form, also used as the cache key component:
    /// `uniform:3` or `vector:3,2,1`.
    pub fn label(&self) -> String {
        match self {
            DescentSpec::Uniform { d } => format!("uniform:{d}"),
            DescentSpec::Vector { ds } => {
                let parts: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
                format!("vector:{}", parts.join(","))
            }
        }
    }
}

/// An ordered position pair `(i, j)` with `1 <= i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairIndex {
    i: u32,
    j: u32,
}

impl PairIndex {
    pub fn new(i: u32, j: u32) -> Result<Self> {
        if i < 1 || i >= j {
            return Err(Error::Input(format!(
                "pair ({i}, {j}) must satisfy 1 <= i < j"
            )));
        }
        Ok(PairIndex { i, j })
    }

    pub fn i(&self) -> u32 {
        self.i
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    /// Whether the index sets `{i, j}` intersect.
    pub fn shares_index(&self, other: &PairIndex) -> bool {
        self.i == other.i || self.i == other.j || self.j == other.i || self.j == other.j
    }
}

/// Joint-expectation class of an ordered pair of descent indicators.
///
/// Two indicators attached to position pairs `(i, j)` and `(r, s)` have
/// joint expectation 1/2 when the pairs coincide, 1/3 when exactly `i = r`
/// or `j = s` holds, 1/6 when `i = s` or `j = r` holds, and 1/4 when the
/// index sets are disjoint (independence).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Equal,
    Aligned,
    Crossed,
    Independent,
}

impl PairClass {
    /// Exact joint expectation for the class.
    pub fn expectation(&self) -> Rational {
        let (num, den) = match self {
            PairClass::Equal => (1, 2),
            PairClass::Aligned => (1, 3),
            PairClass::Crossed => (1, 6),
            PairClass::Independent => (1, 4),
        };
        Rational::new(num.into(), den.into())
    }

    pub fn name(&self) -> &'static str {
        match self {
            PairClass::Equal => "equal",
            PairClass::Aligned => "aligned",
            PairClass::Crossed => "crossed",
            PairClass::Independent => "independent",
        }
    }
}

/// Provenance of a moment pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentSource {
    ClosedForm,
    FromTable,
    /// Sample estimate; carries the trial count used to produce it.
    Empirical(f64),
}

impl MomentSource {
    pub fn name(&self) -> &'static str {
        match self {
            MomentSource::ClosedForm => "closed_form",
            MomentSource::FromTable => "from_table",
            MomentSource::Empirical(_) => "empirical",
        }
    }
}

/// Exact mean and variance of a descent statistic, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub mean: Rational,
    pub variance: Rational,
    pub source: MomentSource,
}
