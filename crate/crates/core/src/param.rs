//! Transport between random measures on a finite parameter space.
//!
//! A [`RandomMeasureFamily`] is a law `p` on parameter atoms `Omega` plus one
//! probability vector on `S` per atom. Given two families sharing `p`, the
//! parametrized transport value is `sum_w p(w) KR(mu_w, nu_w)`. It is attained
//! by solving each atom separately and gluing the plans into
//! `lambda(w, i, j) = p(w) pi_w(i, j)`, and it equals the parametrized
//! Lipschitz dual `sum_w p(w) (mu_w(f_w) - nu_w(f_w))` with `f_w` the per-atom
//! optimal potentials.
//!
//! On a finite `Omega` the measurable-selection question is empty. What is
//! left of it is that the selection `w -> pi_w` must be a fixed function of
//! the inputs, which the solver guarantees through its tie-breaking order.

use ndarray::{Array2, Array3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{CostMatrix, DualPotential, FiniteSpace, ProbVec};
use crate::tol;
use crate::transport::{CouplingPlan, KrSolver, TransportResult};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomMeasureFamily {
    omega: FiniteSpace,
    weights: ProbVec,
    margins: Vec<ProbVec>,
}

impl RandomMeasureFamily {
    pub fn new(weights: ProbVec, margins: Vec<ProbVec>) -> Result<Self> {
        let omega = weights.space().clone();
        if margins.len() != omega.len() {
            return Err(Error::LengthMismatch {
                expected: omega.len(),
                got: margins.len(),
            });
        }
        if let Some(first) = margins.first() {
            if margins.iter().any(|m| m.space() != first.space()) {
                return Err(Error::SpaceMismatch);
            }
        }
        Ok(Self {
            omega,
            weights,
            margins,
        })
    }

    /// Validates raw weights and margins.
    pub fn from_raw(
        omega: &FiniteSpace,
        weights: &[f64],
        space: &FiniteSpace,
        margins: &[Vec<f64>],
    ) -> Result<Self> {
        let weights = ProbVec::new(omega, weights)?;
        let margins = margins
            .iter()
            .map(|m| ProbVec::new(space, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights, margins)
    }

    /// The same margin at every atom.
    pub fn constant(weights: ProbVec, margin: ProbVec) -> Self {
        let margins = vec![margin; weights.len()];
        Self::new(weights, margins).expect("constant family is consistent")
    }

    pub fn omega(&self) -> &FiniteSpace {
        &self.omega
    }

    pub fn weights(&self) -> &ProbVec {
        &self.weights
    }

    pub fn margins(&self) -> &[ProbVec] {
        &self.margins
    }

    pub fn margin(&self, atom: usize) -> &ProbVec {
        &self.margins[atom]
    }

    /// The space `S` the margins live on.
    pub fn space(&self) -> &FiniteSpace {
        self.margins[0].space()
    }

    /// `sum_w p(w) mu_w`.
    pub fn mixture(&self) -> Vec<f64> {
        let n = self.space().len();
        let mut out = vec![0.0; n];
        for (w, m) in self.weights.mass().iter().zip(&self.margins) {
            for (o, v) in out.iter_mut().zip(m.mass()) {
                *o += w * v;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilySummary {
    pub atoms: usize,
    pub points: usize,
    /// `sum_w p(w) sum_x mu_w(x) c(x, x0)` with `x0` the first point.
    pub cost_moment: f64,
}

/// Checks that `family` lives on the cost's space and records its finite
/// first cost moment.
pub fn validate_family(family: &RandomMeasureFamily, cost: &CostMatrix) -> Result<FamilySummary> {
    cost.check_space(family.space())?;
    let mixture = family.mixture();
    let cost_moment = mixture
        .iter()
        .enumerate()
        .map(|(x, m)| m * cost.get(x, 0))
        .sum();
    Ok(FamilySummary {
        atoms: family.omega.len(),
        points: family.space().len(),
        cost_moment,
    })
}

/// Per-atom optimal plans, their values `G(w)` and `sum_w p(w) G(w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPlan {
    pub plans: Vec<CouplingPlan>,
    pub per_atom: Vec<f64>,
    pub total: f64,
}

/// One c-Lipschitz function per atom, stored row-wise as `f(w, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamIntegrand {
    pub slices: Vec<DualPotential>,
}

impl ParamIntegrand {
    pub fn as_matrix(&self) -> Array2<f64> {
        let rows = self.slices.len();
        let cols = self.slices.first().map_or(0, |s| s.values().len());
        Array2::from_shape_fn((rows, cols), |(w, x)| self.slices[w].values()[x])
    }

    pub fn is_lipschitz(&self, cost: &CostMatrix) -> bool {
        self.slices.iter().all(|s| s.is_lipschitz(cost))
    }
}

pub(crate) fn check_pair(
    mu_fam: &RandomMeasureFamily,
    nu_fam: &RandomMeasureFamily,
    cost: &CostMatrix,
) -> Result<()> {
    if mu_fam.omega != nu_fam.omega || mu_fam.space() != nu_fam.space() {
        return Err(Error::SpaceMismatch);
    }
    cost.check_space(mu_fam.space())?;
    let max_diff = mu_fam
        .weights
        .mass()
        .iter()
        .zip(nu_fam.weights.mass())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if max_diff > tol::WEIGHT_MATCH {
        return Err(Error::WeightMismatch { max_diff });
    }
    Ok(())
}

/// Solves every atom. Zero-weight atoms are solved too, so shapes stay
/// regular; they carry no weight in any total.
pub(crate) fn solve_atoms(
    mu_fam: &RandomMeasureFamily,
    nu_fam: &RandomMeasureFamily,
    cost: &CostMatrix,
    solver: KrSolver,
) -> Result<Vec<TransportResult>> {
    check_pair(mu_fam, nu_fam, cost)?;
    // collect() keeps atom order whatever the scheduling
    (0..mu_fam.omega.len())
        .into_par_iter()
        .map(|w| solver.solve(&mu_fam.margins[w], &nu_fam.margins[w], cost))
        .collect()
}

fn weighted_sum(weights: &ProbVec, values: &[f64]) -> f64 {
    weights.integrate(values)
}

pub fn param_primal(
    mu_fam: &RandomMeasureFamily,
    nu_fam: &RandomMeasureFamily,
    cost: &CostMatrix,
) -> Result<ParamPlan> {
    let results = solve_atoms(mu_fam, nu_fam, cost, KrSolver::new())?;
    let per_atom: Vec<f64> = results.iter().map(|r| r.primal_value).collect();
    let total = weighted_sum(&mu_fam.weights, &per_atom);
    Ok(ParamPlan {
        plans: results.into_iter().map(|r| r.plan).collect(),
        per_atom,
        total,
    })
}

/// The per-atom optimal integrand and `sum_w p(w) (mu_w(f_w) - nu_w(f_w))`.
pub fn param_dual(
    mu_fam: &RandomMeasureFamily,
    nu_fam: &RandomMeasureFamily,
    cost: &CostMatrix,
) -> Result<(ParamIntegrand, f64)> {
    let results = solve_atoms(mu_fam, nu_fam, cost, KrSolver::new())?;
    let slices: Vec<DualPotential> = results.into_iter().map(|r| r.potential).collect();
    let per_atom: Vec<f64> = slices
        .iter()
        .enumerate()
        .map(|(w, f)| f.evaluate(&mu_fam.margins[w], &nu_fam.margins[w]))
        .collect();
    let value = weighted_sum(&mu_fam.weights, &per_atom);
    Ok((ParamIntegrand { slices }, value))
}

/// `lambda(w, i, j) = p(w) plans[w](i, j)`.
pub fn glue(pp: &ParamPlan, weights: &ProbVec) -> Result<Array3<f64>> {
    let atoms = weights.len();
    if pp.plans.len() != atoms {
        return Err(Error::ShapeMismatch(format!(
            "{} plans for {atoms} atoms",
            pp.plans.len()
        )));
    }
    let (n, m) = pp.plans.first().map_or((0, 0), |p| p.matrix().dim());
    if pp.plans.iter().any(|p| p.matrix().dim() != (n, m)) {
        return Err(Error::ShapeMismatch("plans differ in shape".into()));
    }
    Ok(Array3::from_shape_fn((atoms, n, m), |(w, i, j)| {
        weights.mass()[w] * pp.plans[w].get(i, j)
    }))
}

/// Cost of the conditionally independent coupling,
/// `sum_w p(w) sum_{i,j} mu_w(i) nu_w(j) c(i,j)`. An upper bound on the
/// parametrized transport value.
pub fn independent_coupling_cost(
    mu_fam: &RandomMeasureFamily,
    nu_fam: &RandomMeasureFamily,
    cost: &CostMatrix,
) -> Result<f64> {
    check_pair(mu_fam, nu_fam, cost)?;
    let mut total = 0.0;
    for (w, p) in mu_fam.weights.mass().iter().enumerate() {
        let a = mu_fam.margins[w].mass();
        let b = nu_fam.margins[w].mass();
        let mut atom = 0.0;
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                atom += ai * bj * cost.get(i, j);
            }
        }
        total += p * atom;
    }
    Ok(total)
}
