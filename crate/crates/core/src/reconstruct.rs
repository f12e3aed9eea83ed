//! Couplings of `(M, X)` with a second variable `Y` whose conditional law given
//! `M` is prescribed, and the sampler that realizes them.
//!
//! For every atom `w` an optimal plan `lambda_w` between `P_{X|M=w}` and the
//! target `Q_w` is glued into a law `t(w, i, j) = p(w) lambda_w(i, j)` of
//! `(M, X, Y)`. With `Q_w = P_X` for every `w` this is the reconstruction
//! coupling: `Y` is independent of `M`, distributed as `X`, and
//! `E c(X, Y) = tau_c(M, X)`.
//!
//! To draw `Y` given `(M, X) = (w, x)` the sampler uses one auxiliary uniform
//! `U` and the generalized inverse of the CDF of `lambda_{w,x}`, with `S`
//! ordered by label index. That label order plays the part of the Borel
//! isomorphism of `S` into `[0, 1]`.

use std::io::Write;

use ndarray::{Array2, Array3, Axis};
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::dependence::{conditionals, JointLaw};
use crate::error::{Error, Result};
use crate::measures::{CostMatrix, FiniteSpace};
use crate::param::{param_primal, RandomMeasureFamily};

/// Law of `(M, X, Y)` on `Omega x S x S`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleLaw {
    omega: FiniteSpace,
    s: FiniteSpace,
    tensor: Array3<f64>,
    weights: Vec<f64>,
}

impl TripleLaw {
    /// Wraps a tensor; `weights` are recomputed as `sum_{i,j} t(w, i, j)`.
    pub fn new(omega: &FiniteSpace, s: &FiniteSpace, tensor: Array3<f64>) -> Result<Self> {
        let (a, n, m) = tensor.dim();
        if a != omega.len() || n != s.len() || m != s.len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor is {:?}, expected ({}, {}, {})",
                tensor.dim(),
                omega.len(),
                s.len(),
                s.len()
            )));
        }
        let weights = tensor
            .outer_iter()
            .map(|slice| slice.sum())
            .collect();
        Ok(Self {
            omega: omega.clone(),
            s: s.clone(),
            tensor,
            weights,
        })
    }

    pub fn omega(&self) -> &FiniteSpace {
        &self.omega
    }

    pub fn s(&self) -> &FiniteSpace {
        &self.s
    }

    pub fn tensor(&self) -> &Array3<f64> {
        &self.tensor
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Law of `(M, X)`: `sum_j t(w, i, j)`.
    pub fn first_projection(&self) -> Array2<f64> {
        self.tensor.sum_axis(Axis(2))
    }

    /// Law of `(M, Y)`: `sum_i t(w, i, j)`.
    pub fn second_projection(&self) -> Array2<f64> {
        self.tensor.sum_axis(Axis(1))
    }

    /// Law of `X`.
    pub fn x_marginal(&self) -> Vec<f64> {
        self.first_projection().sum_axis(Axis(0)).to_vec()
    }

    /// `E c(X, Y)`.
    pub fn expected_cost(&self, cost: &CostMatrix) -> f64 {
        self.tensor
            .indexed_iter()
            .map(|((_, i, j), t)| t * cost.get(i, j))
            .sum()
    }

    /// `max |first_projection - joint|`.
    pub fn joint_residual(&self, joint: &JointLaw) -> f64 {
        self.first_projection()
            .iter()
            .zip(joint.table().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Glues per-atom optimal plans between `P_{X|M=w}` and `target_w`.
///
/// For each atom with `p(w) > 0` the plan's cost is exactly
/// `KR_c(P_{X|M=w}, target_w)`, so `E[c(X, Y) | M]` equals the per-atom
/// transport value.
pub fn couple_against(
    joint: &JointLaw,
    target: &RandomMeasureFamily,
    cost: &CostMatrix,
) -> Result<TripleLaw> {
    let sys = conditionals(joint);
    if target.omega() != joint.omega() {
        return Err(Error::SpaceMismatch);
    }
    let pp = param_primal(&sys.conditionals, target, cost)?;
    let p = sys.weights.mass();
    let (a, n) = (joint.omega().len(), joint.s().len());
    let tensor = Array3::from_shape_fn((a, n, n), |(w, i, j)| p[w] * pp.plans[w].get(i, j));
    TripleLaw::new(joint.omega(), joint.s(), tensor)
}

/// The reconstruction coupling: [`couple_against`] with target `P_X` at
/// every atom.
pub fn reconstruct_law(joint: &JointLaw, cost: &CostMatrix) -> Result<TripleLaw> {
    let sys = conditionals(joint);
    couple_against(joint, &sys.marginal_family(), cost)
}

/// `max_{w,j} |P(M = w, Y = j) - P(M = w) P(X = j)|`.
///
/// Zero exactly when `Y` is independent of `M` and distributed as `X`.
pub fn verify_independence(t: &TripleLaw) -> f64 {
    let second = t.second_projection();
    let px = t.x_marginal();
    second
        .indexed_iter()
        .map(|((w, j), v)| (v - t.weights[w] * px[j]).abs())
        .fold(0.0, f64::max)
}

/// The conditional laws `lambda_{w,x}` of `Y` given `(M, X) = (w, x)`, with
/// their CDFs in label order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalKernel {
    omega: FiniteSpace,
    s: FiniteSpace,
    row_mass: Array2<f64>,
    kernel: Array3<f64>,
    cdf: Array3<f64>,
}

impl ConditionalKernel {
    pub fn omega(&self) -> &FiniteSpace {
        &self.omega
    }

    pub fn s(&self) -> &FiniteSpace {
        &self.s
    }

    /// `P(M = w, X = x)`.
    pub fn row_mass(&self) -> &Array2<f64> {
        &self.row_mass
    }

    /// `lambda_{w,x}(y)`.
    pub fn kernel(&self) -> &Array3<f64> {
        &self.kernel
    }

    pub fn law(&self, w: usize, x: usize) -> Vec<f64> {
        self.kernel.slice(ndarray::s![w, x, ..]).to_vec()
    }

    /// `P(M = w, X = x) lambda_{w,x}(y)`; reproduces the tensor it came from.
    pub fn reassemble(&self) -> Array3<f64> {
        Array3::from_shape_fn(self.kernel.dim(), |(w, i, j)| {
            self.row_mass[(w, i)] * self.kernel[(w, i, j)]
        })
    }

    /// `F^{-1}(u) = inf{y : F_{w,x}(y) >= u}` for `u` in `(0, 1)`.
    pub fn inverse_cdf(&self, w: usize, x: usize, u: f64) -> usize {
        let cdf = self.cdf.slice(ndarray::s![w, x, ..]);
        generalized_inverse(cdf.iter().copied(), u).unwrap_or_else(|| {
            last_positive(self.kernel.slice(ndarray::s![w, x, ..]).iter().copied())
        })
    }
}

fn generalized_inverse(cdf: impl Iterator<Item = f64>, u: f64) -> Option<usize> {
    cdf.enumerate().find(|(_, f)| *f >= u).map(|(i, _)| i)
}

// Accumulated rounding can leave F(last) a hair below u.
fn last_positive(mass: impl DoubleEndedIterator<Item = f64> + ExactSizeIterator) -> usize {
    let len = mass.len();
    mass.rev()
        .position(|m| m > 0.0)
        .map_or(len - 1, |k| len - 1 - k)
}

/// `lambda_{w,x}(j) = t(w, x, j) / sum_j t(w, x, j)`.
///
/// A cell `(w, x)` with no mass gets the atom's `Y`-law as its kernel, or the
/// overall `Y`-law if the whole atom is null. Either way it is multiplied by
/// zero on reassembly.
pub fn disintegrate_kernel(t: &TripleLaw) -> ConditionalKernel {
    let (a, n, m) = t.tensor.dim();
    let row_mass = t.first_projection();
    let second = t.second_projection();
    let total_y = second.sum_axis(Axis(0));
    let mut kernel = Array3::<f64>::zeros((a, n, m));
    for w in 0..a {
        let fallback: Vec<f64> = if t.weights[w] > 0.0 {
            second.row(w).iter().map(|v| v / t.weights[w]).collect()
        } else {
            let z = total_y.sum();
            total_y.iter().map(|v| v / z).collect()
        };
        for i in 0..n {
            let r = row_mass[(w, i)];
            for j in 0..m {
                kernel[(w, i, j)] = if r > 0.0 {
                    t.tensor[(w, i, j)] / r
                } else {
                    fallback[j]
                };
            }
        }
    }
    let mut cdf = kernel.clone();
    for mut lane in cdf.lanes_mut(Axis(2)) {
        let mut acc = 0.0;
        for v in lane.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    ConditionalKernel {
        omega: t.omega.clone(),
        s: t.s.clone(),
        row_mass,
        kernel,
        cdf,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    pub omega: usize,
    pub x: usize,
    pub y: usize,
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    pub records: Vec<SampleRecord>,
}

impl SampleBatch {
    /// Mean of `c(x, y)` over the batch.
    pub fn mean_cost(&self, cost: &CostMatrix) -> f64 {
        let total: f64 = self.records.iter().map(|r| cost.get(r.x, r.y)).sum();
        total / self.records.len() as f64
    }

    /// CSV with header `omega_label,x_label,y_label,u`. `u` is written in
    /// shortest round-trip form.
    pub fn write_csv<W: Write>(
        &self,
        out: W,
        omega: &FiniteSpace,
        s: &FiniteSpace,
    ) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega_label", "x_label", "y_label", "u"])?;
        for r in &self.records {
            w.write_record([
                omega.label(r.omega),
                s.label(r.x),
                s.label(r.y),
                &format!("{:?}", r.u),
            ])?;
        }
        w.flush()
    }
}

/// Stream of the ChaCha20 generator used for `(M, X)` draws.
pub const STREAM_CELL: u64 = 0;
/// Stream used for the auxiliary uniform `U`.
pub const STREAM_AUX: u64 = 1;

/// Draws `n` independent triples `(w, x, y)`.
///
/// `(w, x)` comes from the joint table (generalized inverse of its row-major
/// CDF) using ChaCha20 seeded with `seed` on stream [`STREAM_CELL`]. `u` is
/// drawn from `(0, 1)` on stream [`STREAM_AUX`] of the same seed, so it is
/// independent of `(w, x)` by construction, and `y = F^{-1}_{w,x}(u)`.
pub fn inverse_cdf_sample(
    kernel: &ConditionalKernel,
    joint: &JointLaw,
    seed: u64,
    n: usize,
) -> Result<SampleBatch> {
    if kernel.omega != *joint.omega() || kernel.s != *joint.s() {
        return Err(Error::SpaceMismatch);
    }
    let cols = joint.s().len();
    let flat: Vec<f64> = joint.table().iter().copied().collect();
    let flat_cdf: Vec<f64> = flat
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();

    let mut cell_rng = ChaCha20Rng::seed_from_u64(seed);
    cell_rng.set_stream(STREAM_CELL);
    let mut aux_rng = ChaCha20Rng::seed_from_u64(seed);
    aux_rng.set_stream(STREAM_AUX);

    let records = (0..n)
        .map(|_| {
            let v: f64 = cell_rng.sample(Open01);
            let cell = generalized_inverse(flat_cdf.iter().copied(), v)
                .unwrap_or_else(|| last_positive(flat.iter().copied()));
            let (w, x) = (cell / cols, cell % cols);
            let u: f64 = aux_rng.sample(Open01);
            let y = kernel.inverse_cdf(w, x, u);
            SampleRecord { omega: w, x, y, u }
        })
        .collect();
    Ok(SampleBatch { seed, records })
}
