//! Certificates recomputed from raw report data, independently of the values
//! the solvers carry.

pub fn plan_cost(plan: &[Vec<f64>], c: &[Vec<f64>]) -> f64 {
    plan.iter()
        .zip(c)
        .flat_map(|(p, c)| p.iter().zip(c).map(|(p, c)| p * c))
        .sum()
}

/// `max` over rows and columns of `|plan margin - target|`.
pub fn margin_residual(plan: &[Vec<f64>], mu: &[f64], nu: &[f64]) -> f64 {
    let rows = plan
        .iter()
        .zip(mu)
        .map(|(r, m)| (r.iter().sum::<f64>() - m).abs());
    let cols = nu
        .iter()
        .enumerate()
        .map(|(j, n)| (plan.iter().map(|r| r[j]).sum::<f64>() - n).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

pub fn dual_objective(f: &[f64], mu: &[f64], nu: &[f64]) -> f64 {
    f.iter().zip(mu.iter().zip(nu)).map(|(f, (m, n))| f * (m - n)).sum()
}

/// `|f(i) - f(j)| <= c(i, j) + 1e-9` for all pairs.
pub fn is_lipschitz(f: &[f64], c: &[Vec<f64>]) -> bool {
    f.iter().enumerate().all(|(i, fi)| {
        f.iter()
            .enumerate()
            .all(|(j, fj)| (fi - fj).abs() <= c[i][j] + krc::tol::LIPSCHITZ_SLACK)
    })
}

/// `max_{w,y} |sum_x t(w,x,y) - p(w) q(y)|` with `p`, `q` the laws of `w` and
/// `x` under `t`.
pub fn independence_deviation(t: &[Vec<Vec<f64>>]) -> f64 {
    let n = t.first().map_or(0, |s| s.len());
    let p: Vec<f64> = t.iter().map(|s| s.iter().flatten().sum()).collect();
    let q: Vec<f64> = (0..n)
        .map(|x| t.iter().map(|s| s[x].iter().sum::<f64>()).sum())
        .collect();
    let mut worst: f64 = 0.0;
    for (w, slice) in t.iter().enumerate() {
        for y in 0..n {
            let v: f64 = slice.iter().map(|row| row[y]).sum();
            worst = worst.max((v - p[w] * q[y]).abs());
        }
    }
    worst
}

/// `max_{w,x} |sum_y t(w,x,y) - joint(w,x)|`.
pub fn joint_residual(t: &[Vec<Vec<f64>>], joint: &[Vec<f64>]) -> f64 {
    t.iter()
        .zip(joint)
        .flat_map(|(slice, row)| slice.iter().zip(row).map(|(r, j)| (r.iter().sum::<f64>() - j).abs()))
        .fold(0.0, f64::max)
}

pub fn tensor_cost(t: &[Vec<Vec<f64>>], c: &[Vec<f64>]) -> f64 {
    t.iter().map(|slice| plan_cost(slice, c)).sum()
}
