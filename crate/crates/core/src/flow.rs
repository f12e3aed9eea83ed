//! Successive shortest augmenting paths on the complete bipartite
//! transportation network.
//!
//! Rows are supply nodes, columns are demand nodes, every row-to-column arc is
//! uncapacitated with cost `c(i, j)`, and a column-to-row residual arc exists
//! wherever the current plan is positive. Node potentials keep every residual
//! reduced cost nonnegative, so each round is a dense Dijkstra started from all
//! rows that still hold excess. Ties are broken by lowest node index, which
//! makes the whole run deterministic.
//!
//! On exit the potentials certify optimality: `u_i + v_j <= c(i, j)` for every
//! pair, with equality on the support of the plan.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Leftover excess or deficit at or below this is treated as routed.
const MASS_EPS: f64 = 1e-15;

pub(crate) struct FlowSolution {
    pub plan: Array2<f64>,
    /// `u_i`, one per row. Only the slackness tests read it.
    #[allow(dead_code)]
    pub row_potential: Vec<f64>,
    /// `v_j`, one per column.
    pub col_potential: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Parent {
    Source,
    Row(usize),
    Col(usize),
}

pub(crate) fn min_cost_transport(
    supply: &[f64],
    demand: &[f64],
    cost: &Array2<f64>,
) -> Result<FlowSolution> {
    let n = supply.len();
    let m = demand.len();
    let nodes = n + m;
    let mut plan = Array2::<f64>::zeros((n, m));
    let mut excess = supply.to_vec();
    let mut deficit = demand.to_vec();
    // phi[0..n] rows, phi[n..] columns
    let mut phi = vec![0.0f64; nodes];

    let mut dist = vec![f64::INFINITY; nodes];
    let mut parent = vec![Parent::Source; nodes];
    let mut done = vec![false; nodes];

    // Every augmentation empties a source, a sink or a backward arc; this cap
    // only guards against a floating-point stall.
    let max_rounds = 64 * (nodes * nodes + n * m) + 1024;
    let mut rounds = 0;

    loop {
        let has_excess = excess.iter().any(|e| *e > MASS_EPS);
        let has_deficit = deficit.iter().any(|d| *d > MASS_EPS);
        if !has_excess || !has_deficit {
            break;
        }
        rounds += 1;
        if rounds > max_rounds {
            return Err(Error::NumericalFailure(format!(
                "no convergence after {max_rounds} augmentations"
            )));
        }

        dist.fill(f64::INFINITY);
        done.fill(false);
        for i in 0..n {
            if excess[i] > MASS_EPS {
                dist[i] = 0.0;
                parent[i] = Parent::Source;
            }
        }

        let mut target = None;
        loop {
            let mut best = None;
            let mut best_d = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best_d {
                    best_d = dist[v];
                    best = Some(v);
                }
            }
            let Some(v) = best else { break };
            done[v] = true;
            if v >= n && deficit[v - n] > MASS_EPS {
                target = Some(v);
                break;
            }
            if v < n {
                let i = v;
                for j in 0..m {
                    let w = n + j;
                    if done[w] {
                        continue;
                    }
                    let rc = (cost[(i, j)] + phi[i] - phi[w]).max(0.0);
                    let nd = best_d + rc;
                    if nd < dist[w] {
                        dist[w] = nd;
                        parent[w] = Parent::Row(i);
                    }
                }
            } else {
                let j = v - n;
                for i in 0..n {
                    if done[i] || plan[(i, j)] <= 0.0 {
                        continue;
                    }
                    let rc = (phi[v] - phi[i] - cost[(i, j)]).max(0.0);
                    let nd = best_d + rc;
                    if nd < dist[i] {
                        dist[i] = nd;
                        parent[i] = Parent::Col(j);
                    }
                }
            }
        }

        let Some(t) = target else {
            return Err(Error::NumericalFailure(
                "no augmenting path although excess and deficit remain".into(),
            ));
        };
        let dt = dist[t];

        // bottleneck along the path
        let mut delta = deficit[t - n];
        let mut v = t;
        let source_row = loop {
            match parent[v] {
                Parent::Source => break v,
                Parent::Row(i) => v = i,
                Parent::Col(j) => {
                    delta = delta.min(plan[(v, j)]);
                    v = n + j;
                }
            }
        };
        delta = delta.min(excess[source_row]);

        let mut v = t;
        loop {
            match parent[v] {
                Parent::Source => break,
                Parent::Row(i) => {
                    plan[(i, v - n)] += delta;
                    v = i;
                }
                Parent::Col(j) => {
                    let p = &mut plan[(v, j)];
                    *p = if *p == delta { 0.0 } else { *p - delta };
                    v = n + j;
                }
            }
        }
        excess[source_row] = if excess[source_row] == delta {
            0.0
        } else {
            excess[source_row] - delta
        };
        let d = &mut deficit[t - n];
        *d = if *d == delta { 0.0 } else { *d - delta };

        for v in 0..nodes {
            phi[v] += if done[v] { dist[v].min(dt) } else { dt };
        }
    }

    Ok(FlowSolution {
        plan,
        row_potential: phi[..n].iter().map(|p| -p).collect(),
        col_potential: phi[n..].to_vec(),
    })
}
