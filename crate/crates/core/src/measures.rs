//! Finite spaces, probability vectors and cost matrices.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::tol;

/// An ordered set of labeled points. Index order is canonical.
///
/// Cloning is cheap (the labels are shared). Two spaces are equal when their
/// label lists are equal.
#[derive(Clone)]
pub struct FiniteSpace {
    labels: Arc<[String]>,
}

impl FiniteSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut seen = std::collections::HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            labels: labels.into(),
        })
    }

    /// Space with labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        }
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.labels, &other.labels) || self.labels == other.labels
    }
}

impl Eq for FiniteSpace {}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

/// A probability measure on a [`FiniteSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVec {
    space: FiniteSpace,
    mass: Vec<f64>,
}

impl ProbVec {
    /// Same as [`validate_prob`].
    pub fn new(space: &FiniteSpace, raw: &[f64]) -> Result<Self> {
        validate_prob(raw, space)
    }

    pub fn dirac(space: &FiniteSpace, at: usize) -> Result<Self> {
        space.check_index(at)?;
        let mut mass = vec![0.0; space.len()];
        mass[at] = 1.0;
        Ok(Self {
            space: space.clone(),
            mass,
        })
    }

    pub fn uniform(space: &FiniteSpace) -> Self {
        let n = space.len();
        Self {
            space: space.clone(),
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `sum_i mass(i) * f(i)`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.mass.iter().zip(f).map(|(m, v)| m * v).sum()
    }

    pub(crate) fn same_space(&self, other: &ProbVec) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Builds without validation. Callers guarantee the invariants.
    pub(crate) fn from_parts(space: FiniteSpace, mass: Vec<f64>) -> Self {
        Self { space, mass }
    }
}

/// Checks `raw` and wraps it as a [`ProbVec`] on `space`.
///
/// Masses are not renormalized. Entries in `[-1e-15, 0)` are read as zero;
/// anything more negative is an error.
pub fn validate_prob(raw: &[f64], space: &FiniteSpace) -> Result<ProbVec> {
    if raw.len() != space.len() {
        return Err(Error::LengthMismatch {
            expected: space.len(),
            got: raw.len(),
        });
    }
    let mut mass = Vec::with_capacity(raw.len());
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if value < -tol::NEGATIVE_MASS {
            return Err(Error::NegativeMass { index, value });
        }
        mass.push(value.max(0.0));
    }
    let sum: f64 = mass.iter().sum();
    if (sum - 1.0).abs() > tol::NORMALIZATION {
        return Err(Error::NotNormalized { sum });
    }
    Ok(ProbVec {
        space: space.clone(),
        mass,
    })
}

/// Positive and negative parts of `mu - nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedDecomposition {
    pub pi_plus: Vec<f64>,
    pub pi_minus: Vec<f64>,
    pub total_plus: f64,
}

pub fn hahn_decompose(mu: &ProbVec, nu: &ProbVec) -> Result<SignedDecomposition> {
    mu.same_space(nu)?;
    let (pi_plus, pi_minus): (Vec<f64>, Vec<f64>) = mu
        .mass
        .iter()
        .zip(&nu.mass)
        .map(|(a, b)| ((a - b).max(0.0), (b - a).max(0.0)))
        .unzip();
    let total_plus = pi_plus.iter().sum();
    Ok(SignedDecomposition {
        pi_plus,
        pi_minus,
        total_plus,
    })
}

/// `||mu - nu||_v = sum_i |mu(i) - nu(i)|`, twice the total variation distance.
pub fn variation_norm(mu: &ProbVec, nu: &ProbVec) -> Result<f64> {
    mu.same_space(nu)?;
    Ok(mu
        .mass
        .iter()
        .zip(&nu.mass)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// Outcome of the tightness test on a cost matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tightness {
    pub tight: bool,
    /// Pair where `c - closure(c)` is largest.
    pub worst_pair: (usize, usize),
    pub gap: f64,
}

/// A finite, symmetric, nonnegative cost with zero diagonal.
///
/// The shortest-path closure is computed once at construction. The cost is
/// *tight* when it equals its closure to [`tol::TIGHTNESS`]; on a finite
/// space that is exactly the condition `c(x,y) = sup_{u in Lip_c} |u(x) - u(y)|`
/// under which transport and Lipschitz duals coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    space: FiniteSpace,
    c: Array2<f64>,
    closure: Array2<f64>,
    tightness: Tightness,
}

impl CostMatrix {
    pub fn new(space: &FiniteSpace, c: Array2<f64>) -> Result<Self> {
        let n = space.len();
        if c.dim() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "cost is {:?}, space has {n} points",
                c.dim()
            )));
        }
        for ((i, j), &v) in c.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::InvalidCost(format!("c({i},{j}) is not finite")));
            }
            if v < 0.0 {
                return Err(Error::InvalidCost(format!("c({i},{j}) = {v} is negative")));
            }
            if i == j && v != 0.0 {
                return Err(Error::InvalidCost(format!("c({i},{i}) = {v}, expected 0")));
            }
            let w = c[(j, i)];
            if (v - w).abs() > tol::SYMMETRY * v.abs().max(w.abs()).max(1.0) {
                return Err(Error::InvalidCost(format!(
                    "c({i},{j}) = {v} but c({j},{i}) = {w}"
                )));
            }
        }
        let closure = floyd_warshall(&c);
        let tightness = tightness_of(&c, &closure);
        Ok(Self {
            space: space.clone(),
            c,
            closure,
            tightness,
        })
    }

    pub fn from_rows(space: &FiniteSpace, rows: &[Vec<f64>]) -> Result<Self> {
        let n = space.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!(
                "cost rows do not form a {n}x{n} matrix"
            )));
        }
        let c = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
        Self::new(space, c)
    }

    /// `c(x, y) = 1{x != y}`.
    pub fn discrete(space: &FiniteSpace) -> Self {
        let n = space.len();
        let c = Array2::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { 1.0 });
        Self::new(space, c).expect("discrete metric is a valid cost")
    }

    /// `c(x, y) = |pos(x) - pos(y)|`.
    pub fn line(space: &FiniteSpace, positions: &[f64]) -> Result<Self> {
        let n = space.len();
        if positions.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: positions.len(),
            });
        }
        let c = Array2::from_shape_fn((n, n), |(i, j)| (positions[i] - positions[j]).abs());
        Self::new(space, c)
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.c
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[(i, j)]
    }

    /// Shortest-path closure of the cost.
    pub fn closure_matrix(&self) -> &Array2<f64> {
        &self.closure
    }

    pub fn is_tight(&self) -> bool {
        self.tightness.tight
    }

    pub fn tightness(&self) -> Tightness {
        self.tightness
    }

    pub fn max_entry(&self) -> f64 {
        self.c.iter().copied().fold(0.0, f64::max)
    }

    /// `alpha * c`. Panics if `alpha` is negative or not finite.
    pub fn scaled(&self, alpha: f64) -> Self {
        assert!(alpha.is_finite() && alpha >= 0.0, "scale must be finite and >= 0");
        Self::new(&self.space, self.c.mapv(|v| v * alpha)).expect("scaling keeps a valid cost")
    }

    pub(crate) fn check_space(&self, space: &FiniteSpace) -> Result<()> {
        if &self.space == space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

fn floyd_warshall(c: &Array2<f64>) -> Array2<f64> {
    let n = c.nrows();
    let mut d = c.clone();
    for k in 0..n {
        for i in 0..n {
            let dik = d[(i, k)];
            for j in 0..n {
                let via = dik + d[(k, j)];
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    d
}

fn tightness_of(c: &Array2<f64>, closure: &Array2<f64>) -> Tightness {
    let mut worst_pair = (0, 0);
    let mut gap = 0.0;
    for ((i, j), &v) in c.indexed_iter() {
        let g = (v - closure[(i, j)]).abs();
        if g > gap {
            gap = g;
            worst_pair = (i, j);
        }
    }
    Tightness {
        tight: gap <= tol::TIGHTNESS,
        worst_pair,
        gap,
    }
}

/// The min-plus closure `C*(i,j) = min over paths i -> j of summed costs`.
///
/// On a finite space this is `sup_{u in Lip_c} |u(i) - u(j)|`, so the output
/// is the largest pseudo-metric below `C` and has the same Lipschitz class.
pub fn path_closure(cost: &CostMatrix) -> CostMatrix {
    // Symmetrize: Floyd-Warshall keeps symmetry in exact arithmetic only.
    let cl = &cost.closure;
    let sym = Array2::from_shape_fn(cl.dim(), |(i, j)| cl[(i, j)].min(cl[(j, i)]));
    CostMatrix::new(&cost.space, sym).expect("closure of a valid cost is a valid cost")
}

/// Whether `cost` equals its path closure, and where it differs most.
pub fn check_cost_tight(cost: &CostMatrix) -> Tightness {
    cost.tightness
}

/// `|f(i) - f(j)| <= C(i,j) + 1e-9` for all pairs.
pub fn lipschitz_check(f: &[f64], cost: &CostMatrix) -> bool {
    let n = cost.space.len();
    if f.len() != n {
        return false;
    }
    (0..n).all(|i| (0..n).all(|j| (f[i] - f[j]).abs() <= cost.c[(i, j)] + tol::LIPSCHITZ_SLACK))
}

/// A function on the space, meant to be c-Lipschitz.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPotential {
    space: FiniteSpace,
    f: Vec<f64>,
}

impl DualPotential {
    pub fn new(space: &FiniteSpace, f: Vec<f64>) -> Result<Self> {
        if f.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: f.len(),
            });
        }
        Ok(Self {
            space: space.clone(),
            f,
        })
    }

    pub fn zero(space: &FiniteSpace) -> Self {
        Self {
            space: space.clone(),
            f: vec![0.0; space.len()],
        }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn is_lipschitz(&self, cost: &CostMatrix) -> bool {
        lipschitz_check(&self.f, cost)
    }

    /// `mu(f) - nu(f)`.
    pub fn evaluate(&self, mu: &ProbVec, nu: &ProbVec) -> f64 {
        mu.integrate(&self.f) - nu.integrate(&self.f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(n: usize) -> FiniteSpace {
        FiniteSpace::indexed(n).unwrap()
    }

    fn triangle_violator() -> CostMatrix {
        CostMatrix::from_rows(
            &space(3),
            &[vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
        )
        .unwrap()
    }

    #[test]
    fn validate_prob_examples() {
        let s = space(2);
        assert!(validate_prob(&[0.5, 0.5], &s).is_ok());
        assert_eq!(validate_prob(&[0.7, 0.3], &s).unwrap().mass(), &[0.7, 0.3]);
        assert!(matches!(
            validate_prob(&[0.7, 0.2], &s),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn validate_prob_rejects_bad_input() {
        let s = space(2);
        assert!(matches!(
            validate_prob(&[1.1, -0.1], &s),
            Err(Error::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(
            validate_prob(&[0.5, 0.25, 0.25], &s),
            Err(Error::LengthMismatch { expected: 2, got: 3 })
        ));
        assert!(matches!(
            validate_prob(&[f64::NAN, 1.0], &s),
            Err(Error::NonFinite(0))
        ));
        // a rounding-level negative is read as zero
        let p = validate_prob(&[1.0, -1e-16], &s).unwrap();
        assert_eq!(p.mass(), &[1.0, 0.0]);
    }

    #[test]
    fn duplicate_and_empty_labels() {
        assert_eq!(
            FiniteSpace::new(["a", "b", "a"]).unwrap_err(),
            Error::DuplicateLabel("a".into())
        );
        assert_eq!(
            FiniteSpace::new(Vec::<String>::new()).unwrap_err(),
            Error::EmptySpace
        );
    }

    #[test]
    fn hahn_examples() {
        let s = space(2);
        let mu = ProbVec::new(&s, &[0.7, 0.3]).unwrap();
        let nu = ProbVec::new(&s, &[0.4, 0.6]).unwrap();
        let d = hahn_decompose(&mu, &nu).unwrap();
        assert_abs_diff_eq!(d.pi_plus[0], 0.3, epsilon = 1e-15);
        assert_eq!(d.pi_plus[1], 0.0);
        assert_eq!(d.pi_minus[0], 0.0);
        assert_abs_diff_eq!(d.pi_minus[1], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d.total_plus, 0.3, epsilon = 1e-15);

        let same = hahn_decompose(&mu, &mu).unwrap();
        assert_eq!(same.total_plus, 0.0);
        assert!(same.pi_minus.iter().all(|v| *v == 0.0));

        let a = ProbVec::dirac(&s, 0).unwrap();
        let b = ProbVec::dirac(&s, 1).unwrap();
        let d = hahn_decompose(&a, &b).unwrap();
        assert_eq!(d.pi_plus, vec![1.0, 0.0]);
        assert_eq!(d.pi_minus, vec![0.0, 1.0]);
        assert_eq!(d.total_plus, 1.0);
    }

    #[test]
    fn space_mismatch() {
        let a = ProbVec::uniform(&space(2));
        let b = ProbVec::uniform(&FiniteSpace::new(["x", "y"]).unwrap());
        assert_eq!(hahn_decompose(&a, &b).unwrap_err(), Error::SpaceMismatch);
        assert_eq!(variation_norm(&a, &b).unwrap_err(), Error::SpaceMismatch);
    }

    #[test]
    fn variation_norm_examples() {
        let s = space(2);
        let mu = ProbVec::new(&s, &[0.7, 0.3]).unwrap();
        let nu = ProbVec::new(&s, &[0.4, 0.6]).unwrap();
        assert_abs_diff_eq!(variation_norm(&mu, &nu).unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(variation_norm(&mu, &mu).unwrap(), 0.0);
        let a = ProbVec::dirac(&s, 0).unwrap();
        let b = ProbVec::dirac(&s, 1).unwrap();
        assert_eq!(variation_norm(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn closure_shortcuts_long_edge() {
        let c = triangle_violator();
        let cl = path_closure(&c);
        assert_eq!(cl.get(0, 2), 2.0);
        assert_eq!(cl.get(2, 0), 2.0);
        assert!(cl.is_tight());
        assert_eq!(path_closure(&cl), cl);
    }

    #[test]
    fn metrics_are_fixed_points() {
        let d = CostMatrix::discrete(&space(4));
        assert_eq!(path_closure(&d), d);
        let line = CostMatrix::line(&space(3), &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(path_closure(&line), line);
    }

    #[test]
    fn tightness_examples() {
        assert!(check_cost_tight(&CostMatrix::discrete(&space(4))).tight);
        let t = check_cost_tight(&triangle_violator());
        assert!(!t.tight);
        assert_eq!(t.worst_pair, (0, 2));
        assert_eq!(t.gap, 3.0);
        let line = CostMatrix::line(&space(3), &[0.0, 0.5, 1.0]).unwrap();
        assert!(check_cost_tight(&line).tight);
    }

    #[test]
    fn invalid_costs() {
        let s = space(2);
        assert!(CostMatrix::from_rows(&s, &[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(CostMatrix::from_rows(&s, &[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(CostMatrix::from_rows(&s, &[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(CostMatrix::from_rows(&s, &[vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]])
            .is_err());
        assert!(matches!(
            CostMatrix::from_rows(&s, &[vec![0.0, 1.0]]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn lipschitz_examples() {
        let d = CostMatrix::discrete(&space(2));
        assert!(lipschitz_check(&[1.0, 0.0], &d));
        assert!(!lipschitz_check(&[2.0, 0.0], &d));
        let c = triangle_violator();
        assert!(lipschitz_check(&[3.5, 3.5, 3.5], &c));
    }
}
