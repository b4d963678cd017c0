//! Dependency graph of the descent indicators and the normality-criterion
//! bound `N * Delta^(m-1) * (A / sigma)^m` evaluated as a function of
//! (n, d, m).
//!
//! Two indicators are dependent exactly when their position pairs share an
//! index, so the graph joins `(i, j)` and `(r, s)` when one of `i = r`,
//! `i = s`, `j = r`, `j = s` holds. Each relation can hold at most `d`
//! times for a fixed `(i, j)`, so the maximum degree is at most `4d`; the
//! bound only needs that degree, which is why certificates can be issued
//! without materializing the graph.

use num::ToPrimitive;

use crate::dist::next_permutation;
use crate::error::{Error, Result};
use crate::mc::power_law_d;
use crate::perm::{PairIndex, Rational};
use crate::stats::{classify_pair, eligible_pair_count, variance_closed_form};

/// Default cap on the number of vertices a materialized graph may have.
pub const DEFAULT_GRAPH_GUARD: u64 = 1_000_000;

/// The dependency graph on the eligible pairs, in lexicographic vertex
/// order, with sorted adjacency lists.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    n: u32,
    d: u32,
    vertices: Vec<PairIndex>,
    adjacency: Vec<Vec<u32>>,
}

impl DependencyGraph {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn vertices(&self) -> &[PairIndex] {
        &self.vertices
    }

    pub fn neighbors(&self, vertex: usize) -> &[u32] {
        &self.adjacency[vertex]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.adjacency.iter().map(|a| a.len() as u64).sum::<u64>() / 2
    }

    pub fn max_degree(&self) -> u64 {
        self.adjacency
            .iter()
            .map(|a| a.len() as u64)
            .max()
            .unwrap_or(0)
    }
}

fn eligible_pairs(n: u32, d: u32) -> Vec<PairIndex> {
    let mut pairs = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n.min(i.saturating_add(d)) {
            pairs.push(PairIndex::new(i, j).expect("i < j by construction"));
        }
    }
    pairs
}

/// Builds the dependency graph under the default vertex guard.
pub fn build_dependency_graph(n: u32, d: u32) -> Result<DependencyGraph> {
    build_dependency_graph_with_guard(n, d, DEFAULT_GRAPH_GUARD)
}

/// Builds the dependency graph, refusing if the vertex count exceeds
/// `guard`.
pub fn build_dependency_graph_with_guard(n: u32, d: u32, guard: u64) -> Result<DependencyGraph> {
    if n < 1 || d < 1 {
        return Err(Error::Input("n and d must be >= 1".into()));
    }
    let pair_count = eligible_pair_count(n, d)?;
    if pair_count > guard {
        return Err(Error::Capacity(format!(
            "dependency graph would have {pair_count} vertices, over the guard {guard}"
        )));
    }
    let vertices = eligible_pairs(n, d);
    debug_assert_eq!(vertices.len() as u64, pair_count);

    let index_of = |pair: PairIndex| -> u32 {
        vertices
            .binary_search(&pair)
            .expect("neighbor is an eligible pair") as u32
    };
    // all eligible pairs containing position t
    let pairs_through = |t: u32, out: &mut Vec<PairIndex>| {
        for r in t.saturating_sub(d).max(1)..t {
            out.push(PairIndex::new(r, t).expect("r < t"));
        }
        for s in (t + 1)..=n.min(t.saturating_add(d)) {
            out.push(PairIndex::new(t, s).expect("t < s"));
        }
    };

    let mut adjacency = Vec::with_capacity(vertices.len());
    let mut scratch = Vec::new();
    for &vertex in &vertices {
        scratch.clear();
        pairs_through(vertex.i(), &mut scratch);
        pairs_through(vertex.j(), &mut scratch);
        let mut neighbors: Vec<u32> = scratch
            .iter()
            .filter(|&&p| p != vertex)
            .map(|&p| index_of(p))
            .collect();
        neighbors.sort_unstable();
        adjacency.push(neighbors);
    }
    Ok(DependencyGraph {
        n,
        d,
        vertices,
        adjacency,
    })
}

/// Exact maximum vertex degree; always at most `4d`.
pub fn max_degree(graph: &DependencyGraph) -> u64 {
    graph.max_degree()
}

/// Everything needed to evaluate the normality criterion at one (n, d, m).
#[derive(Debug, Clone)]
pub struct JansonCertificate {
    pub n: u32,
    pub d: u32,
    pub m: u32,
    /// Number of indicator variables (eligible pairs).
    pub pair_count: u64,
    /// Analytic degree bound `4d`.
    pub degree_bound: u64,
    /// Measured maximum degree, when the graph was materialized.
    pub degree_exact: Option<u64>,
    /// The degree that entered `bound_value`.
    pub degree_used: u64,
    /// Uniform bound on each indicator; 1 for 0/1 variables.
    pub indicator_bound: u64,
    /// Exact variance of the sum.
    pub sigma_sq: Rational,
    /// `pair_count * degree_used^(m-1) * (indicator_bound^2 / sigma_sq)^(m/2)`.
    pub bound_value: f64,
    /// The simplified surrogate `(dn) * (4d)^(m-1) * (12 / (dn))^(m/2)`.
    pub simplified_bound: f64,
}

/// Evaluates the criterion quantity at (n, d, m). With `use_exact_degree`
/// the graph is materialized (subject to the vertex guard) and its true
/// maximum degree is used; otherwise the analytic `4d` stands in.
pub fn janson_bound(n: u32, d: u32, m: u32, use_exact_degree: bool) -> Result<JansonCertificate> {
    if m < 1 {
        return Err(Error::Input("m must be >= 1".into()));
    }
    let sigma_sq = variance_closed_form(n, d)?;
    let pair_count = eligible_pair_count(n, d)?;
    let degree_bound = 4 * d as u64;
    let degree_exact = if use_exact_degree {
        Some(build_dependency_graph(n, d)?.max_degree())
    } else {
        None
    };
    let degree_used = degree_exact.unwrap_or(degree_bound);

    let sigma_sq_f = sigma_sq
        .to_f64()
        .ok_or_else(|| Error::Input("sigma_sq does not fit in f64".into()))?;
    let bound_value = pair_count as f64
        * (degree_used as f64).powi(m as i32 - 1)
        * sigma_sq_f.powf(-(m as f64) / 2.0);
    let dn = d as f64 * n as f64;
    let simplified_bound =
        dn * (4.0 * d as f64).powi(m as i32 - 1) * (12.0 / dn).powf(m as f64 / 2.0);

    Ok(JansonCertificate {
        n,
        d,
        m,
        pair_count,
        degree_bound,
        degree_exact,
        degree_used,
        indicator_bound: 1,
        sigma_sq,
        bound_value,
        simplified_bound,
    })
}

/// How `d` evolves along an `n` schedule.
#[derive(Debug, Clone, Copy)]
pub enum WindowRule {
    Fixed(u32),
    /// `d = max(1, floor(n^(1 - epsilon)))`.
    Power(f64),
}

/// Smallest integer `m` with `(m / 2) * epsilon > 1`, the order that makes
/// the criterion vanish under `d <= n^(1 - epsilon)`.
pub fn auto_order_for_epsilon(epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Input(format!(
            "epsilon must lie strictly between 0 and 1, got {epsilon}"
        )));
    }
    let mut m = (2.0 / epsilon).floor() as u32;
    while (m as f64 / 2.0) * epsilon <= 1.0 {
        m += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub enum ConvergenceOutcome {
    Certificate(JansonCertificate),
    Skipped { n: u32, d: u32, reason: String },
}

/// Certificates along a schedule of `n`, in schedule order. For
/// `Power(epsilon)` the order `m` defaults to [`auto_order_for_epsilon`];
/// for `Fixed` it defaults to 3 (the smallest order that vanishes).
/// Entries with `n < 2d` are skipped with a warning record.
pub fn convergence_table(
    rule: WindowRule,
    m_override: Option<u32>,
    n_schedule: &[u32],
) -> Result<Vec<ConvergenceOutcome>> {
    let m = match (m_override, rule) {
        (Some(m), _) => m,
        (None, WindowRule::Fixed(_)) => 3,
        (None, WindowRule::Power(epsilon)) => auto_order_for_epsilon(epsilon)?,
    };
    if let WindowRule::Power(epsilon) = rule {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Input(format!(
                "epsilon must lie strictly between 0 and 1, got {epsilon}"
            )));
        }
    }
    let mut rows = Vec::with_capacity(n_schedule.len());
    for &n in n_schedule {
        let d = match rule {
            WindowRule::Fixed(d) => d,
            WindowRule::Power(epsilon) => power_law_d(n, epsilon),
        };
        if d < 1 || n < 2 * d {
            rows.push(ConvergenceOutcome::Skipped {
                n,
                d,
                reason: format!("entry needs n >= 2d, got n = {n}, d = {d}"),
            });
            continue;
        }
        rows.push(ConvergenceOutcome::Certificate(janson_bound(
            n, d, m, false,
        )?));
    }
    Ok(rows)
}

/// Exhaustively verifies the dependency structure over `S_n`: for every
/// ordered pair of indicators the joint expectation, computed by counting
/// permutations, must equal the class value (1/2, 1/3, 1/6, or 1/4), and
/// every single indicator must have expectation 1/2. In particular
/// indicators on disjoint index sets satisfy the product law exactly.
pub fn independence_audit(n: u32, d: u32, enumeration_limit: u32) -> Result<bool> {
    if n < 1 || d < 1 {
        return Err(Error::Input("n and d must be >= 1".into()));
    }
    if n > enumeration_limit {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the enumeration limit {enumeration_limit}"
        )));
    }
    let vertices = eligible_pairs(n, d);
    let count = vertices.len();
    if count == 0 {
        return Ok(true);
    }

    let mut joint = vec![0u64; count * count];
    let mut singles = vec![0u64; count];
    let mut factorial = 1u64;
    let mut items: Vec<u32> = (1..=n).collect();
    let mut hits: Vec<usize> = Vec::with_capacity(count);
    let mut total = 0u64;
    loop {
        total += 1;
        hits.clear();
        for (idx, pair) in vertices.iter().enumerate() {
            if items[(pair.i() - 1) as usize] > items[(pair.j() - 1) as usize] {
                hits.push(idx);
            }
        }
        for &a in &hits {
            singles[a] += 1;
            for &b in &hits {
                joint[a * count + b] += 1;
            }
        }
        if !next_permutation(&mut items) {
            break;
        }
    }
    for k in 2..=n as u64 {
        factorial *= k;
    }
    debug_assert_eq!(total, factorial);

    for &single in &singles {
        if single * 2 != factorial {
            return Ok(false);
        }
    }
    for (a, &va) in vertices.iter().enumerate() {
        for (b, &vb) in vertices.iter().enumerate() {
            let expectation = classify_pair(va, vb).expectation();
            let numerator = expectation.numer().to_u64().expect("small numerator");
            let denominator = expectation.denom().to_u64().expect("small denominator");
            // joint / n! == numerator / denominator, cross-multiplied
            if joint[a * count + b] as u128 * denominator as u128
                != numerator as u128 * factorial as u128
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
