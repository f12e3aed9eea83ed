//! Decay of `tau_c` along a finite Markov chain.
//!
//! For a chain started from `init`, `tau_k` is `tau_c(sigma(X_0), X_k)`: the
//! joint law of `(X_0, X_k)` is `init(i) P^k(i, j)` and the atoms of `M` are
//! the states of `X_0`. This is a finite analogue of the geometric decay
//! enjoyed by uniformly expanding interval maps, not a reproduction of it.

use ndarray::Array2;

use crate::dependence::{beta, tau_c, JointLaw};
use crate::error::{Error, Result};
use crate::measures::{CostMatrix, ProbVec};
use crate::tol;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainDecay {
    /// `tau_1, ..., tau_K`.
    pub tau: Vec<f64>,
    /// `beta_1, ..., beta_K`.
    pub beta: Vec<f64>,
    /// `beta` between `X_0` and itself.
    pub beta0: f64,
    /// Dobrushin contraction coefficient of the transition matrix.
    pub contraction: f64,
    /// `exp(slope)` of a least-squares fit of `ln tau_k` against `k`, over the
    /// `k` with `tau_k > 1e-12`. Diagnostic only.
    pub rate: Option<f64>,
}

fn check_stochastic(p: &Array2<f64>) -> Result<()> {
    for (row, r) in p.rows().into_iter().enumerate() {
        let sum: f64 = r.sum();
        if r.iter().any(|v| !v.is_finite() || *v < 0.0) || (sum - 1.0).abs() > tol::NORMALIZATION {
            return Err(Error::NotStochastic { row, sum });
        }
    }
    Ok(())
}

/// `1/2 max_{i,k} ||P(i, .) - P(k, .)||_v`.
pub fn dobrushin_contraction(p: &Array2<f64>) -> f64 {
    let n = p.nrows();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for k in i + 1..n {
            let d: f64 = p
                .row(i)
                .iter()
                .zip(p.row(k).iter())
                .map(|(a, b)| (a - b).abs())
                .sum();
            best = best.max(0.5 * d);
        }
    }
    best
}

pub fn markov_tau_decay(
    transition: &Array2<f64>,
    init: &ProbVec,
    cost: &CostMatrix,
    steps: usize,
) -> Result<ChainDecay> {
    let s = init.space();
    let n = s.len();
    if transition.dim() != (n, n) {
        return Err(Error::ShapeMismatch(format!(
            "transition is {:?}, space has {n} points",
            transition.dim()
        )));
    }
    check_stochastic(transition)?;
    cost.check_space(s)?;

    let joint_at = |power: &Array2<f64>| -> Result<JointLaw> {
        let table = Array2::from_shape_fn((n, n), |(i, j)| init.mass()[i] * power[(i, j)]);
        JointLaw::new(s, s, table)
    };

    let beta0 = beta(&joint_at(&Array2::eye(n))?);
    let mut power = transition.clone();
    let mut tau = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);
    for k in 1..=steps {
        if k > 1 {
            power = power.dot(transition);
        }
        let joint = joint_at(&power)?;
        tau.push(tau_c(&joint, cost)?);
        betas.push(beta(&joint));
    }

    Ok(ChainDecay {
        rate: fit_rate(&tau),
        tau,
        beta: betas,
        beta0,
        contraction: dobrushin_contraction(transition),
    })
}

fn fit_rate(tau: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = tau
        .iter()
        .enumerate()
        .filter(|(_, t)| **t > 1e-12)
        .map(|(k, t)| ((k + 1) as f64, t.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    Some((sxy / sxx).exp())
}
