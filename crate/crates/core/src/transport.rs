//! Exact Kantorovich-Rubinstein transport between two measures on one finite
//! space.
//!
//! The primal `KR(mu, nu) = min_{pi in D(mu,nu)} sum c(i,j) pi(i,j)` is solved
//! as a min-cost flow. The dual `sup_{f in Lip_c} mu(f) - nu(f)` is read off
//! the flow's final node potentials: the column potentials `v` are turned into
//! a c-Lipschitz function by the c-transform `f(i) = min_k c*(i,k) - v_k`
//! (with `c*` the path closure), which can only raise the dual objective and
//! therefore closes the gap whenever the cost is tight.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::flow::min_cost_transport;
use crate::measures::{hahn_decompose, CostMatrix, DualPotential, FiniteSpace, ProbVec};
use crate::tol;

/// A joint measure on `rows x cols` with prescribed margins.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingPlan {
    row_space: FiniteSpace,
    col_space: FiniteSpace,
    pi: Array2<f64>,
    value: Option<f64>,
}

impl CouplingPlan {
    pub(crate) fn new(
        row_space: FiniteSpace,
        col_space: FiniteSpace,
        pi: Array2<f64>,
        value: Option<f64>,
    ) -> Self {
        Self {
            row_space,
            col_space,
            pi,
            value,
        }
    }

    pub fn row_space(&self) -> &FiniteSpace {
        &self.row_space
    }

    pub fn col_space(&self) -> &FiniteSpace {
        &self.col_space
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.pi
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pi[(i, j)]
    }

    /// Cost under the `CostMatrix` the plan was solved with, when known.
    pub fn value(&self) -> Option<f64> {
        self.value
    }

    /// `sum c(i,j) pi(i,j)`.
    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        self.pi
            .indexed_iter()
            .map(|((i, j), p)| p * cost.get(i, j))
            .sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.pi.rows().into_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.pi.columns().into_iter().map(|c| c.sum()).collect()
    }

    /// Largest absolute deviation of either margin from `mu` / `nu`.
    pub fn margin_residual(&self, mu: &ProbVec, nu: &ProbVec) -> f64 {
        let rows = self.row_sums().into_iter().zip(mu.mass()).map(|(a, b)| (a - b).abs());
        let cols = self.col_sums().into_iter().zip(nu.mass()).map(|(a, b)| (a - b).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// Mass off the diagonal, `pi({x != y})`.
    pub fn off_diagonal_mass(&self) -> f64 {
        self.pi
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, p)| *p)
            .sum()
    }
}

/// Primal plan, dual potential and the gap between them.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportResult {
    pub plan: CouplingPlan,
    pub primal_value: f64,
    pub potential: DualPotential,
    pub dual_value: f64,
    pub gap: f64,
}

/// Solver configuration.
///
/// By default an untight cost is refused with [`Error::UntightCost`]. With
/// `allow_untight` the primal still returns the optimal plan for the raw
/// cost, but the dual can then fall strictly below it.
#[derive(Clone, Copy, Debug, Default)]
pub struct KrSolver {
    allow_untight: bool,
}

impl KrSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn allow_untight(mut self, allow: bool) -> Self {
        self.allow_untight = allow;
        self
    }

    fn check(&self, mu: &ProbVec, nu: &ProbVec, cost: &CostMatrix) -> Result<()> {
        if mu.space() != nu.space() {
            return Err(Error::SpaceMismatch);
        }
        cost.check_space(mu.space())?;
        let t = cost.tightness();
        if !t.tight && !self.allow_untight {
            let (i, j) = t.worst_pair;
            return Err(Error::UntightCost { i, j, gap: t.gap });
        }
        Ok(())
    }

    pub fn primal(&self, mu: &ProbVec, nu: &ProbVec, cost: &CostMatrix) -> Result<CouplingPlan> {
        self.check(mu, nu, cost)?;
        let sol = min_cost_transport(mu.mass(), nu.mass(), cost.matrix())?;
        Ok(finish_plan(mu, sol.plan, cost))
    }

    pub fn dual(
        &self,
        mu: &ProbVec,
        nu: &ProbVec,
        cost: &CostMatrix,
    ) -> Result<(DualPotential, f64)> {
        self.check(mu, nu, cost)?;
        let sol = min_cost_transport(mu.mass(), nu.mass(), cost.matrix())?;
        let f = c_transform(&sol.col_potential, cost);
        let value = f.evaluate(mu, nu);
        Ok((f, value))
    }

    /// Primal and dual from a single flow run. Fails with
    /// [`Error::DualityGapExceeded`] if they disagree by more than `1e-9`.
    pub fn solve(&self, mu: &ProbVec, nu: &ProbVec, cost: &CostMatrix) -> Result<TransportResult> {
        self.check(mu, nu, cost)?;
        let sol = min_cost_transport(mu.mass(), nu.mass(), cost.matrix())?;
        let potential = c_transform(&sol.col_potential, cost);
        let plan = finish_plan(mu, sol.plan, cost);
        let primal_value = plan.value.expect("finish_plan sets the value");
        let dual_value = potential.evaluate(mu, nu);
        let gap = primal_value - dual_value;
        if gap.abs() > tol::DUALITY_GAP {
            return Err(Error::DualityGapExceeded { gap });
        }
        Ok(TransportResult {
            plan,
            primal_value,
            potential,
            dual_value,
            gap,
        })
    }
}

fn finish_plan(mu: &ProbVec, mut pi: Array2<f64>, cost: &CostMatrix) -> CouplingPlan {
    pi.mapv_inplace(|p| p.max(0.0));
    let mut plan = CouplingPlan::new(mu.space().clone(), mu.space().clone(), pi, None);
    plan.value = Some(plan.cost(cost));
    plan
}

// f(i) = min_k c*(i,k) - v_k, shifted so that min f = 0.
fn c_transform(v: &[f64], cost: &CostMatrix) -> DualPotential {
    let cl = cost.closure_matrix();
    let n = v.len();
    let mut f: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| cl[(i, k)] - v[k])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    f.iter_mut().for_each(|x| *x -= lo);
    DualPotential::new(cost.space(), f).expect("length matches the space")
}

/// An optimal plan for `KR(mu, nu)`, deterministic across calls.
pub fn solve_primal(mu: &ProbVec, nu: &ProbVec, cost: &CostMatrix) -> Result<CouplingPlan> {
    KrSolver::new().primal(mu, nu, cost)
}

/// An optimal c-Lipschitz potential (normalized to `min f = 0`) and the value
/// `mu(f) - nu(f)`.
pub fn solve_dual(
    mu: &ProbVec,
    nu: &ProbVec,
    cost: &CostMatrix,
) -> Result<(DualPotential, f64)> {
    KrSolver::new().dual(mu, nu, cost)
}

pub fn solve(mu: &ProbVec, nu: &ProbVec, cost: &CostMatrix) -> Result<TransportResult> {
    KrSolver::new().solve(mu, nu, cost)
}

/// The explicit maximal coupling for the discrete metric.
///
/// Keeps `min(mu(i), nu(i))` on the diagonal and spreads the rest as
/// `pi_plus(i) * pi_minus(j) / total_plus`, where `mu - nu = pi_plus - pi_minus`.
/// The off-diagonal mass is `||mu - nu||_v / 2`, which is the discrete-metric
/// transport cost, so the plan is optimal.
pub fn dobrushin_plan(mu: &ProbVec, nu: &ProbVec) -> Result<CouplingPlan> {
    let h = hahn_decompose(mu, nu)?;
    let n = mu.len();
    let mut pi = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        pi[(i, i)] = mu.mass()[i].min(nu.mass()[i]);
    }
    if h.total_plus > 0.0 {
        for i in 0..n {
            if h.pi_plus[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                // pi_plus and pi_minus have disjoint supports, so i != j here
                pi[(i, j)] += h.pi_plus[i] * h.pi_minus[j] / h.total_plus;
            }
        }
    }
    let mut plan = CouplingPlan::new(mu.space().clone(), mu.space().clone(), pi, None);
    plan.value = Some(plan.off_diagonal_mass());
    Ok(plan)
}
