#![allow(dead_code)]

use krc::{path_closure, CostMatrix, FiniteSpace, JointLaw, ProbVec, RandomMeasureFamily};
use ndarray::Array2;
use proptest::prelude::*;

pub fn normalize(raw: &[u32]) -> Vec<f64> {
    let total: u32 = raw.iter().sum();
    raw.iter().map(|v| *v as f64 / total as f64).collect()
}

/// Integer weights with at least one positive entry; zeros are common.
pub fn weights(n: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(prop_oneof![1 => Just(0u32), 3 => 1u32..100], n)
        .prop_filter("needs positive mass", |w| w.iter().any(|v| *v > 0))
}

pub fn prob(space: &FiniteSpace, raw: &[u32]) -> ProbVec {
    ProbVec::new(space, &normalize(raw)).unwrap()
}

/// Random symmetric costs in `[0.01, 10]`, made tight by path closure.
pub fn tight_cost(n: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(1u32..1000, n * n).prop_map(move |raw| {
        let space = FiniteSpace::indexed(n).unwrap();
        let c = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                0.0
            } else {
                raw[i.min(j) * n + i.max(j)] as f64 / 100.0
            }
        });
        path_closure(&CostMatrix::new(&space, c).unwrap()).matrix().clone()
    })
}

pub fn cost(space: &FiniteSpace, c: Array2<f64>) -> CostMatrix {
    CostMatrix::new(space, c).unwrap()
}

pub fn joint_table(atoms: usize, n: usize) -> impl Strategy<Value = Vec<u32>> {
    weights(atoms * n)
}

pub fn joint(omega: &FiniteSpace, s: &FiniteSpace, raw: &[u32]) -> JointLaw {
    let v = normalize(raw);
    let t = Array2::from_shape_vec((omega.len(), s.len()), v).unwrap();
    JointLaw::new(omega, s, t).unwrap()
}

pub fn family(omega: &FiniteSpace, s: &FiniteSpace, w: &[u32], margins: &[Vec<u32>]) -> RandomMeasureFamily {
    let m: Vec<Vec<f64>> = margins.iter().map(|r| normalize(r)).collect();
    RandomMeasureFamily::from_raw(omega, &normalize(w), s, &m).unwrap()
}
