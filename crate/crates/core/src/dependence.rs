//! Dependence between a finite sigma-algebra `M` (its atoms `Omega`) and a
//! random variable `X` on `S`, given their joint table.
//!
//! - `tau_c = sum_w p(w) KR_c(P_{X|M=w}, P_X)`
//! - `beta = 1/2 sum_w p(w) ||P_{X|M=w} - P_X||_v`, which is `tau_c` for the
//!   discrete metric
//! - the comparison `tau_c <= 2 int_0^beta Q(u) du`, with `Q` the generalized
//!   inverse of `t -> P(c(X, x0) > t)`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::measures::{variation_norm, CostMatrix, FiniteSpace, ProbVec};
use crate::param::{param_dual, param_primal, RandomMeasureFamily};
use crate::tol;

/// Joint law of `(M, X)` as an `|Omega| x |S|` table.
#[derive(Clone, Debug, PartialEq)]
pub struct JointLaw {
    omega: FiniteSpace,
    s: FiniteSpace,
    table: Array2<f64>,
}

impl JointLaw {
    pub fn new(omega: &FiniteSpace, s: &FiniteSpace, mut table: Array2<f64>) -> Result<Self> {
        if table.dim() != (omega.len(), s.len()) {
            return Err(Error::ShapeMismatch(format!(
                "table is {:?}, expected ({}, {})",
                table.dim(),
                omega.len(),
                s.len()
            )));
        }
        let cols = s.len();
        for ((w, x), v) in table.indexed_iter_mut() {
            let index = w * cols + x;
            if !v.is_finite() {
                return Err(Error::NonFinite(index));
            }
            if *v < -tol::NEGATIVE_MASS {
                return Err(Error::NegativeMass { index, value: *v });
            }
            *v = v.max(0.0);
        }
        let sum = table.sum();
        if (sum - 1.0).abs() > tol::NORMALIZATION {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            omega: omega.clone(),
            s: s.clone(),
            table,
        })
    }

    pub fn from_rows(omega: &FiniteSpace, s: &FiniteSpace, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != omega.len() || rows.iter().any(|r| r.len() != s.len()) {
            return Err(Error::ShapeMismatch(format!(
                "rows do not form a {}x{} table",
                omega.len(),
                s.len()
            )));
        }
        let table = Array2::from_shape_fn((omega.len(), s.len()), |(w, x)| rows[w][x]);
        Self::new(omega, s, table)
    }

    /// `p (x) q`: `X` independent of `M`.
    pub fn product(p: &ProbVec, q: &ProbVec) -> Self {
        let table = Array2::from_shape_fn((p.len(), q.len()), |(w, x)| p.mass()[w] * q.mass()[x]);
        Self {
            omega: p.space().clone(),
            s: q.space().clone(),
            table,
        }
    }

    pub fn omega(&self) -> &FiniteSpace {
        &self.omega
    }

    pub fn s(&self) -> &FiniteSpace {
        &self.s
    }

    pub fn table(&self) -> &Array2<f64> {
        &self.table
    }

    pub fn get(&self, w: usize, x: usize) -> f64 {
        self.table[(w, x)]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.table.rows().into_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.table.columns().into_iter().map(|c| c.sum()).collect()
    }
}

/// `p(w)`, `P_{X|M=w}` and `P_X` derived from a joint table.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalSystem {
    pub weights: ProbVec,
    pub conditionals: RandomMeasureFamily,
    pub marginal: ProbVec,
}

impl ConditionalSystem {
    /// The family `w -> P_X`.
    pub fn marginal_family(&self) -> RandomMeasureFamily {
        RandomMeasureFamily::constant(self.weights.clone(), self.marginal.clone())
    }
}

/// Row-normalizes the joint table. A zero-probability atom gets `P_X` as its
/// conditional; it contributes nothing to any coefficient.
pub fn conditionals(joint: &JointLaw) -> ConditionalSystem {
    let p = joint.row_sums();
    let marginal = ProbVec::from_parts(joint.s.clone(), joint.col_sums());
    let margins = joint
        .table
        .rows()
        .into_iter()
        .zip(&p)
        .map(|(row, &pw)| {
            if pw > 0.0 {
                ProbVec::from_parts(joint.s.clone(), row.iter().map(|v| v / pw).collect())
            } else {
                marginal.clone()
            }
        })
        .collect();
    let weights = ProbVec::from_parts(joint.omega.clone(), p);
    let conditionals =
        RandomMeasureFamily::new(weights.clone(), margins).expect("rows share one space");
    ConditionalSystem {
        weights,
        conditionals,
        marginal,
    }
}

/// `tau_c(M, X) = sum_w p(w) KR_c(P_{X|M=w}, P_X)`. The cost must be tight.
pub fn tau_c(joint: &JointLaw, cost: &CostMatrix) -> Result<f64> {
    let sys = conditionals(joint);
    Ok(param_primal(&sys.conditionals, &sys.marginal_family(), cost)?.total)
}

/// `tau_c` through its integrand form,
/// `sup_f E f(w, X) - E int f(w, x) dP_X(x)` over `f` with every `f(w, .)`
/// c-Lipschitz, evaluated at the optimal integrand built from per-atom duals.
pub fn tau_c_dual(joint: &JointLaw, cost: &CostMatrix) -> Result<f64> {
    let sys = conditionals(joint);
    let (f, _) = param_dual(&sys.conditionals, &sys.marginal_family(), cost)?;
    let mut joint_term = 0.0;
    let mut product_term = 0.0;
    for (w, slice) in f.slices.iter().enumerate() {
        let fw = slice.values();
        joint_term += joint
            .table
            .row(w)
            .iter()
            .zip(fw)
            .map(|(t, v)| t * v)
            .sum::<f64>();
        product_term += sys.weights.mass()[w] * sys.marginal.integrate(fw);
    }
    Ok(joint_term - product_term)
}

/// The beta-mixing coefficient between `M` and `sigma(X)`.
pub fn beta(joint: &JointLaw) -> f64 {
    let sys = conditionals(joint);
    0.5 * sys
        .conditionals
        .margins()
        .iter()
        .zip(sys.weights.mass())
        .map(|(m, p)| p * variation_norm(m, &sys.marginal).expect("same space"))
        .sum::<f64>()
}

/// Generalized inverse `Q(u) = inf{t >= 0 : P(V > t) <= u}` of the tail of a
/// discrete nonnegative variable `V`, stored as its steps.
///
/// `values` are the distinct positive atoms `t_1 < ... < t_k` of `V`; `tails[l]`
/// is `P(V >= t_l)`. Then `Q(u) = t_l` on `[tails[l+1], tails[l])` and `Q = 0`
/// from `tails[0] = P(V > 0)` on.
#[derive(Clone, Debug, PartialEq)]
pub struct TailQuantile {
    pub values: Vec<f64>,
    pub tails: Vec<f64>,
}

impl TailQuantile {
    /// Builds the quantile of `V` with `P(V = values[i]) = masses[i]`.
    pub fn from_atoms(values: &[f64], masses: &[f64]) -> Self {
        let mut atoms: Vec<(f64, f64)> = values
            .iter()
            .zip(masses)
            .filter(|(v, m)| **v > 0.0 && **m > 0.0)
            .map(|(v, m)| (*v, *m))
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut grouped: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, m) in atoms {
            match grouped.last_mut() {
                Some(last) if last.0 == v => last.1 += m,
                _ => grouped.push((v, m)),
            }
        }
        let mut tails = vec![0.0; grouped.len()];
        let mut acc = 0.0;
        for l in (0..grouped.len()).rev() {
            acc += grouped[l].1;
            tails[l] = acc;
        }
        Self {
            values: grouped.into_iter().map(|(v, _)| v).collect(),
            tails,
        }
    }

    /// `P(V > t)`.
    pub fn tail(&self, t: f64) -> f64 {
        self.values
            .iter()
            .position(|v| *v > t)
            .map_or(0.0, |l| self.tails[l])
    }

    pub fn eval(&self, u: f64) -> f64 {
        // largest l with tails[l] > u; tails is decreasing
        match self.tails.iter().rposition(|t| *t > u) {
            Some(l) => self.values[l],
            None => 0.0,
        }
    }

    /// `int_0^b Q(u) du`, summed exactly over the steps.
    pub fn integral(&self, b: f64) -> f64 {
        let k = self.values.len();
        (0..k)
            .map(|l| {
                let hi = self.tails[l].min(b);
                let lo = if l + 1 < k { self.tails[l + 1] } else { 0.0 }.min(b);
                self.values[l] * (hi - lo)
            })
            .sum()
    }

    pub fn sup(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Quantile of `c(X, x0)` under the marginal `P_X`.
pub fn tail_quantile(joint: &JointLaw, cost: &CostMatrix, x0: usize) -> Result<TailQuantile> {
    cost.check_space(&joint.s)?;
    joint.s.check_index(x0)?;
    let values: Vec<f64> = (0..joint.s.len()).map(|x| cost.get(x, x0)).collect();
    Ok(TailQuantile::from_atoms(&values, &joint.col_sums()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpBound {
    pub x0: usize,
    pub tau: f64,
    pub beta: f64,
    /// `int_0^beta Q(u) du`.
    pub quantile_integral: f64,
    /// `2 int_0^beta Q(u) du`.
    pub bound: f64,
    /// `tau <= bound + 1e-9`.
    pub holds: bool,
    pub max_cost: f64,
    /// `2 max(c) beta`.
    pub bounded_form: f64,
    pub bounded_holds: bool,
}

/// Checks `tau_c <= 2 int_0^beta Q_{c(X,x0)}(u) du` and its bounded-cost form.
pub fn mp_bound(joint: &JointLaw, cost: &CostMatrix, x0: usize) -> Result<MpBound> {
    let q = tail_quantile(joint, cost, x0)?;
    let tau = tau_c(joint, cost)?;
    Ok(assemble_bound(x0, tau, beta(joint), &q, cost.max_entry()))
}

fn assemble_bound(x0: usize, tau: f64, beta: f64, q: &TailQuantile, max_cost: f64) -> MpBound {
    let quantile_integral = q.integral(beta);
    let bound = 2.0 * quantile_integral;
    let bounded_form = 2.0 * max_cost * beta;
    MpBound {
        x0,
        tau,
        beta,
        quantile_integral,
        bound,
        holds: tau <= bound + tol::DUALITY_GAP,
        max_cost,
        bounded_form,
        bounded_holds: tau <= bounded_form + tol::DUALITY_GAP,
    }
}

/// [`mp_bound`] at the `x0` giving the smallest bound (lowest index on ties).
pub fn mp_bound_best(joint: &JointLaw, cost: &CostMatrix) -> Result<MpBound> {
    cost.check_space(&joint.s)?;
    let tau = tau_c(joint, cost)?;
    let b = beta(joint);
    let max_cost = cost.max_entry();
    let mut best: Option<MpBound> = None;
    for x0 in 0..joint.s.len() {
        let q = tail_quantile(joint, cost, x0)?;
        let cand = assemble_bound(x0, tau, b, &q, max_cost);
        if best.is_none_or(|cur| cand.bound < cur.bound) {
            best = Some(cand);
        }
    }
    Ok(best.expect("space is nonempty"))
}
