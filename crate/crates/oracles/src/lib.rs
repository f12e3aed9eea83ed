//! Brute-force reference computations for the test suites.
//!
//! Nothing here shares code with `krc-core`. Each routine takes raw slices and
//! answers the same question by a different route: exact rational vertex
//! enumeration instead of flow augmentation, path enumeration instead of
//! Floyd-Warshall, layer-cake integrals instead of quantile step sums, and
//! closed forms instead of matrix powers.

use num_rational::Rational64;

pub type Q = Rational64;

/// Enumerates every vertex of the transportation polytope `D(mu, nu)`.
///
/// A vertex is a basic feasible solution: a set of `n + m - 1` cells forming a
/// spanning tree of the bipartite row/column graph, with the (unique) values
/// forced by the margins all nonnegative. Degenerate vertices show up once per
/// basis, duplicates are removed.
pub fn transport_vertices(mu: &[Q], nu: &[Q]) -> Vec<Vec<Vec<Q>>> {
    let n = mu.len();
    let m = nu.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let k = n + m - 1;
    let mut out: Vec<Vec<Vec<Q>>> = Vec::new();
    let mut chosen = Vec::with_capacity(k);
    combinations(cells.len(), k, 0, &mut chosen, &mut |subset| {
        let basis: Vec<(usize, usize)> = subset.iter().map(|&c| cells[c]).collect();
        if let Some(plan) = solve_tree(mu, nu, &basis) {
            if !out.contains(&plan) {
                out.push(plan);
            }
        }
    });
    out
}

fn combinations(
    total: usize,
    k: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == k {
        visit(chosen);
        return;
    }
    let need = k - chosen.len();
    for c in start..=total.saturating_sub(need) {
        if c >= total {
            break;
        }
        chosen.push(c);
        combinations(total, k, c + 1, chosen, visit);
        chosen.pop();
    }
}

// Leaf peeling: a row or column touched by exactly one unassigned basic cell
// fixes that cell. Gets stuck iff the cells contain a cycle.
fn solve_tree(mu: &[Q], nu: &[Q], basis: &[(usize, usize)]) -> Option<Vec<Vec<Q>>> {
    let n = mu.len();
    let m = nu.len();
    let mut row_left: Vec<Q> = mu.to_vec();
    let mut col_left: Vec<Q> = nu.to_vec();
    let mut assigned = vec![false; basis.len()];
    let mut plan = vec![vec![Q::from_integer(0); m]; n];
    let mut remaining = basis.len();
    while remaining > 0 {
        let mut progressed = false;
        for i in 0..n {
            let open: Vec<usize> = (0..basis.len())
                .filter(|&b| !assigned[b] && basis[b].0 == i)
                .collect();
            if open.len() == 1 {
                let b = open[0];
                let (_, j) = basis[b];
                let v = row_left[i];
                plan[i][j] = v;
                row_left[i] -= v;
                col_left[j] -= v;
                assigned[b] = true;
                remaining -= 1;
                progressed = true;
            }
        }
        for j in 0..m {
            let open: Vec<usize> = (0..basis.len())
                .filter(|&b| !assigned[b] && basis[b].1 == j)
                .collect();
            if open.len() == 1 {
                let b = open[0];
                let (i, _) = basis[b];
                let v = col_left[j];
                plan[i][j] = v;
                row_left[i] -= v;
                col_left[j] -= v;
                assigned[b] = true;
                remaining -= 1;
                progressed = true;
            }
        }
        if !progressed {
            return None;
        }
    }
    let zero = Q::from_integer(0);
    if row_left.iter().chain(col_left.iter()).any(|r| *r != zero) {
        return None;
    }
    if plan.iter().flatten().any(|v| *v < zero) {
        return None;
    }
    Some(plan)
}

/// Exact minimum of `sum c * pi` over all vertices of `D(mu, nu)`, with the
/// minimizing vertex.
pub fn brute_min_transport(mu: &[Q], nu: &[Q], cost: &[Vec<i64>]) -> (Q, Vec<Vec<Q>>) {
    transport_vertices(mu, nu)
        .into_iter()
        .map(|plan| {
            let mut value = Q::from_integer(0);
            for (i, row) in plan.iter().enumerate() {
                for (j, p) in row.iter().enumerate() {
                    value += *p * Q::from_integer(cost[i][j]);
                }
            }
            (value, plan)
        })
        .min_by(|a, b| a.0.cmp(&b.0))
        .expect("transportation polytope is never empty")
}

pub fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Shortest-path closure by exhaustive enumeration of simple paths.
/// Exponential; meant for `n <= 7`.
pub fn closure_by_paths(c: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = c.len();
    let mut out = vec![vec![f64::INFINITY; n]; n];
    for s in 0..n {
        let mut visited = vec![false; n];
        visited[s] = true;
        walk(c, s, 0.0, &mut visited, &mut out[s]);
        out[s][s] = 0.0;
    }
    out
}

fn walk(c: &[Vec<f64>], at: usize, len: f64, visited: &mut [bool], best: &mut [f64]) {
    if len < best[at] {
        best[at] = len;
    }
    for next in 0..c.len() {
        if !visited[next] {
            visited[next] = true;
            walk(c, next, len + c[at][next], visited, best);
            visited[next] = false;
        }
    }
}

/// `tau_k` for the symmetric two-state chain with flip probability `a`,
/// started from the uniform law, under the discrete metric.
///
/// Eigenvalues of the transition matrix are 1 and `1 - 2a`, so
/// `P^k(0, 0) = (1 + (1 - 2a)^k) / 2` and each row sits at total variation
/// `|1 - 2a|^k / 2` from the uniform marginal.
pub fn two_state_tau(flip: f64, k: u32) -> f64 {
    0.5 * (1.0 - 2.0 * flip).abs().powi(k as i32)
}

/// `int_0^beta Q(u) du` for the tail quantile of a discrete nonnegative
/// variable, computed through the layer-cake identity
/// `int_0^beta Q(u) du = int_0^inf min(P(V > t), beta) dt`.
pub fn quantile_integral_layer_cake(values: &[f64], masses: &[f64], beta: f64) -> f64 {
    let mut cuts: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    cuts.push(0.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // P(V > t) is constant on [lo, hi)
        let tail: f64 = values
            .iter()
            .zip(masses)
            .filter(|(v, _)| **v > lo)
            .map(|(_, m)| *m)
            .sum();
        total += (hi - lo) * tail.min(beta);
    }
    total
}

/// Pearson chi-square statistic for independence of a contingency table,
/// with its degrees of freedom. Empty rows and columns are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> (f64, usize) {
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
    let ncols = table.first().map_or(0, |r| r.len());
    let col_tot: Vec<u64> = (0..ncols).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let live: Vec<usize> = (0..ncols).filter(|&j| col_tot[j] > 0).collect();
    let total: u64 = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let rt: u64 = r.iter().sum();
        for &j in &live {
            let expected = rt as f64 * col_tot[j] as f64 / total as f64;
            let d = r[j] as f64 - expected;
            stat += d * d / expected;
        }
    }
    let df = (rows.len().saturating_sub(1)) * (live.len().saturating_sub(1));
    (stat, df)
}

/// Pearson goodness-of-fit statistic of observed counts against `probs`.
/// Returns `None` when a count lands on a zero-probability category.
pub fn chi_square_fit(counts: &[u64], probs: &[f64]) -> Option<(f64, usize)> {
    let total: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cats: usize = 0;
    for (c, p) in counts.iter().zip(probs) {
        if *p <= 0.0 {
            if *c > 0 {
                return None;
            }
            continue;
        }
        cats += 1;
        let expected = p * total as f64;
        let d = *c as f64 - expected;
        stat += d * d / expected;
    }
    Some((stat, cats.saturating_sub(1)))
}
