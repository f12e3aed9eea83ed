use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct Report {
    /// Arguments after the program name.
    pub command: Vec<String>,
    /// SHA-256 of the problem file bytes, hex.
    pub inputs_digest: String,
    pub warnings: Vec<String>,
    pub results: Results,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Validate(ValidateResults),
    Ot(OtResults),
    ParamOt(ParamOtResults),
    Tau(TauResults),
    Reconstruct(ReconstructResults),
    Chain(ChainResults),
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct ValidateResults {
    pub tight: bool,
    pub worst_pair: [String; 2],
    /// `c - closure` at the worst pair.
    pub gap: f64,
    pub closure_applied: bool,
    pub objects: Vec<ObjectCheck>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct ObjectCheck {
    pub kind: String,
    pub name: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct OtResults {
    pub mu: String,
    pub nu: String,
    pub labels: Vec<String>,
    pub value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub margin_residual: f64,
    pub potential_lipschitz: bool,
    /// `1/2 ||mu - nu||_v`, the value under the discrete metric.
    pub half_variation: f64,
    pub plan: Vec<Vec<f64>>,
    pub potential: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct ParamOtResults {
    pub mu: String,
    pub nu: String,
    pub omega: Vec<String>,
    pub labels: Vec<String>,
    pub per_atom: Vec<f64>,
    /// `sum_w p(w) KR(mu_w, nu_w)`.
    pub total: f64,
    /// `sum lambda c` over the glued law.
    pub glued_cost: f64,
    pub dual_value: f64,
    pub gap: f64,
    /// Worst per-atom margin residual of `lambda(w, ., .) / p(w)`.
    pub margin_residual: f64,
    pub potential_lipschitz: bool,
    pub lambda: Vec<Vec<Vec<f64>>>,
    pub integrand: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct TauResults {
    pub joint: String,
    pub tau: f64,
    pub beta: Option<f64>,
    pub bound: Option<BoundResults>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct BoundResults {
    pub x0: String,
    pub beta: f64,
    pub quantile_integral: f64,
    /// `2 int_0^beta Q(u) du`.
    pub bound: f64,
    pub holds: bool,
    pub max_cost: f64,
    /// `2 max(c) beta`.
    pub bounded_form: f64,
    pub bounded_holds: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct ReconstructResults {
    pub joint: String,
    pub omega: Vec<String>,
    pub labels: Vec<String>,
    pub tau: f64,
    pub expected_cost: f64,
    pub independence_deviation: f64,
    pub marginal_residual: f64,
    /// `t(w, x, y)`.
    pub tensor: Vec<Vec<Vec<f64>>>,
    pub sample: Option<SampleSummary>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct SampleSummary {
    pub n: usize,
    pub seed: u64,
    pub mean_cost: f64,
    pub csv: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct ChainResults {
    pub chain: String,
    pub tau: Vec<f64>,
    pub beta: Vec<f64>,
    pub beta0: f64,
    pub contraction: f64,
    pub rate: Option<f64>,
}

fn row(out: &mut String, label: &str, v: &[f64]) {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    let _ = writeln!(out, "  {label:>8}  {}", cells.join("  "));
}

pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    match &r.results {
        Results::Validate(v) => {
            let _ = writeln!(out, "cost tight: {}", v.tight);
            if !v.tight {
                let _ = writeln!(
                    out,
                    "worst pair: ({}, {}), exceeds its shortest path by {}",
                    v.worst_pair[0], v.worst_pair[1], v.gap
                );
            }
            for o in &v.objects {
                match &o.error {
                    None => {
                        let _ = writeln!(out, "{} {}: ok", o.kind, o.name);
                    }
                    Some(e) => {
                        let _ = writeln!(out, "{} {}: {e}", o.kind, o.name);
                    }
                }
            }
        }
        Results::Ot(o) => {
            let _ = writeln!(out, "KR({}, {}) = {}", o.mu, o.nu, o.value);
            let _ = writeln!(out, "dual value = {}", o.dual_value);
            let _ = writeln!(out, "gap = {:e}, margin residual = {:e}", o.gap, o.margin_residual);
            let _ = writeln!(out, "1/2 variation = {}", o.half_variation);
            let _ = writeln!(out, "plan:");
            for (l, p) in o.labels.iter().zip(&o.plan) {
                row(&mut out, l, p);
            }
            if let Some(f) = &o.potential {
                let _ = writeln!(out, "potential (lipschitz: {}):", o.potential_lipschitz);
                row(&mut out, "f", f);
            }
        }
        Results::ParamOt(p) => {
            let _ = writeln!(out, "parametrized KR({}, {}) = {}", p.mu, p.nu, p.total);
            let _ = writeln!(out, "glued cost = {}, dual value = {}", p.glued_cost, p.dual_value);
            let _ = writeln!(out, "gap = {:e}, margin residual = {:e}", p.gap, p.margin_residual);
            for (w, v) in p.omega.iter().zip(&p.per_atom) {
                let _ = writeln!(out, "  atom {w}: {v}");
            }
        }
        Results::Tau(t) => {
            let _ = writeln!(out, "tau_c({}) = {}", t.joint, t.tau);
            if let Some(b) = t.beta {
                let _ = writeln!(out, "beta = {b}");
            }
            if let Some(b) = &t.bound {
                let _ = writeln!(
                    out,
                    "bound at {}: 2 int_0^beta Q = {} (holds: {}), 2 max(c) beta = {} (holds: {})",
                    b.x0, b.bound, b.holds, b.bounded_form, b.bounded_holds
                );
            }
        }
        Results::Reconstruct(c) => {
            let _ = writeln!(out, "tau_c({}) = {}", c.joint, c.tau);
            let _ = writeln!(out, "E c(X, X*) = {}", c.expected_cost);
            let _ = writeln!(out, "independence deviation = {:e}", c.independence_deviation);
            let _ = writeln!(out, "marginal residual = {:e}", c.marginal_residual);
            if let Some(s) = &c.sample {
                let _ = writeln!(out, "{} draws, seed {}: mean cost {}", s.n, s.seed, s.mean_cost);
                if let Some(path) = &s.csv {
                    let _ = writeln!(out, "draws written to {path}");
                }
            }
        }
        Results::Chain(c) => {
            let _ = writeln!(out, "chain {}: contraction {}, beta0 {}", c.chain, c.contraction, c.beta0);
            for (k, (t, b)) in c.tau.iter().zip(&c.beta).enumerate() {
                let _ = writeln!(out, "  k={:<3} tau={t:e} beta={b:e}", k + 1);
            }
            match c.rate {
                Some(r) => {
                    let _ = writeln!(out, "fitted rate: {r}");
                }
                None => {
                    let _ = writeln!(out, "fitted rate: none");
                }
            }
        }
    }
    let _ = writeln!(out, "inputs sha256 {} ({:.3}s)", r.inputs_digest, r.wall_time_s);
    out
}
