use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use krc::{CostMatrix, JointLaw};
use ndarray::{Array2, Array3};
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::certify;
use crate::problem::Problem;
use crate::report::*;
use crate::CliError;

pub struct Outcome {
    pub report: Report,
    /// 0 or 1; input errors never produce a report.
    pub exit_code: u8,
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn slices(a: &Array3<f64>) -> Vec<Vec<Vec<f64>>> {
    a.outer_iter().map(|s| rows(&s.to_owned())).collect()
}

fn cost_rows(c: &CostMatrix) -> Vec<Vec<f64>> {
    rows(c.matrix())
}

/// Reads the problem file named by `cmd` and runs it. `argv` is echoed into
/// the report.
pub fn run(cmd: &Command, argv: Vec<String>) -> Result<Outcome, CliError> {
    let path = &cmd.common().file;
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    execute(cmd, argv, &bytes)
}

pub fn execute(cmd: &Command, argv: Vec<String>, bytes: &[u8]) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::Input(format!("problem file is not UTF-8: {e}")))?;
    let problem = Problem::parse(text, cmd.common().closure)?;
    let mut warnings = Vec::new();
    if problem.closure_applied {
        warnings.push("cost is not tight; using its shortest-path closure".to_string());
    }
    let (results, ok) = match cmd {
        Command::Validate { .. } => validate(&problem),
        Command::Ot { mu, nu, dual, .. } => ot(&problem, mu, nu, *dual)?,
        Command::Tau {
            joint, beta, bound, ..
        } => tau(&problem, joint.as_deref(), *beta, bound.as_deref())?,
        Command::Reconstruct {
            joint,
            sample,
            seed,
            csv,
            ..
        } => reconstruct(&problem, joint.as_deref(), *sample, *seed, csv.as_deref())?,
        Command::Chain { chain, steps, .. } => chain_decay(&problem, chain.as_deref(), *steps)?,
    };
    let report = Report {
        command: argv,
        inputs_digest: hex::encode(Sha256::digest(bytes)),
        warnings,
        results,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(Outcome {
        report,
        exit_code: if ok { 0 } else { 1 },
    })
}

fn validate(p: &Problem) -> (Results, bool) {
    let t = krc::check_cost_tight(&p.cost);
    let mut objects = Vec::new();
    let mut check = |kind: &str, name: &str, r: Result<(), CliError>| {
        objects.push(ObjectCheck {
            kind: kind.into(),
            name: name.into(),
            error: r.err().map(|e| e.to_string()),
        });
    };
    for name in p.file.measures.keys() {
        check("measure", name, p.measure(name).map(drop));
    }
    for name in p.file.families.keys() {
        check("family", name, p.family(name).map(drop));
    }
    for name in p.file.joints.keys() {
        check("joint", name, p.joint(Some(name)).map(drop));
    }
    for name in p.file.chains.keys() {
        let r = p.chain(Some(name)).and_then(|(_, m, init)| {
            // zero steps: only the stochasticity checks run
            krc::markov_tau_decay(&m, &init, &CostMatrix::discrete(&p.space), 0)
                .map(drop)
                .map_err(|e| CliError::Input(e.to_string()))
        });
        check("chain", name, r);
    }
    let ok = t.tight && objects.iter().all(|o| o.error.is_none());
    let (i, j) = t.worst_pair;
    let results = Results::Validate(ValidateResults {
        tight: t.tight,
        worst_pair: [p.space.label(i).into(), p.space.label(j).into()],
        gap: t.gap,
        closure_applied: p.closure_applied,
        objects,
    });
    (results, ok)
}

fn ot(p: &Problem, mu: &str, nu: &str, dual: bool) -> Result<(Results, bool), CliError> {
    let is_family = |n: &str| p.file.families.contains_key(n);
    let is_measure = |n: &str| p.file.measures.contains_key(n);
    for n in [mu, nu] {
        if is_family(n) && is_measure(n) {
            return Err(CliError::Input(format!(
                "`{n}` names both a measure and a family"
            )));
        }
    }
    if is_family(mu) || is_family(nu) {
        return param_ot(p, mu, nu, dual);
    }
    let (m, n) = (p.measure(mu)?, p.measure(nu)?);
    let r = krc::solve(&m, &n, &p.cost)?;
    let c = cost_rows(&p.cost);
    let plan = rows(r.plan.matrix());
    let f = r.potential.values().to_vec();
    let value = certify::plan_cost(&plan, &c);
    let dual_value = certify::dual_objective(&f, m.mass(), n.mass());
    let gap = value - dual_value;
    let margin_residual = certify::margin_residual(&plan, m.mass(), n.mass());
    let potential_lipschitz = certify::is_lipschitz(&f, &c);
    let ok = gap.abs() <= krc::tol::DUALITY_GAP
        && margin_residual <= krc::tol::MARGIN
        && potential_lipschitz;
    let results = Results::Ot(OtResults {
        mu: mu.into(),
        nu: nu.into(),
        labels: p.space.labels().to_vec(),
        value,
        dual_value,
        gap,
        margin_residual,
        potential_lipschitz,
        half_variation: 0.5 * krc::variation_norm(&m, &n)?,
        plan,
        potential: dual.then_some(f),
    });
    Ok((results, ok))
}

fn param_ot(p: &Problem, mu: &str, nu: &str, dual: bool) -> Result<(Results, bool), CliError> {
    let (mf, nf) = (p.family(mu)?, p.family(nu)?);
    let pp = krc::param_primal(&mf, &nf, &p.cost)?;
    let (integrand, _) = krc::param_dual(&mf, &nf, &p.cost)?;
    let lambda = slices(&krc::glue(&pp, mf.weights())?);
    let c = cost_rows(&p.cost);
    let weights = mf.weights().mass();

    let glued_cost = certify::tensor_cost(&lambda, &c);
    let mut dual_value = 0.0;
    let mut margin_residual: f64 = 0.0;
    let mut potential_lipschitz = true;
    for (w, slice) in lambda.iter().enumerate() {
        let f = integrand.slices[w].values();
        let (a, b) = (mf.margin(w).mass(), nf.margin(w).mass());
        dual_value += weights[w] * certify::dual_objective(f, a, b);
        potential_lipschitz &= certify::is_lipschitz(f, &c);
        if weights[w] > 0.0 {
            let scaled: Vec<Vec<f64>> = slice
                .iter()
                .map(|r| r.iter().map(|v| v / weights[w]).collect())
                .collect();
            margin_residual = margin_residual.max(certify::margin_residual(&scaled, a, b));
        }
    }
    let gap = glued_cost - dual_value;
    let ok = gap.abs() <= krc::tol::DUALITY_GAP
        && (pp.total - glued_cost).abs() <= krc::tol::DUALITY_GAP
        && margin_residual <= krc::tol::MARGIN
        && potential_lipschitz;
    let results = Results::ParamOt(ParamOtResults {
        mu: mu.into(),
        nu: nu.into(),
        omega: mf.omega().labels().to_vec(),
        labels: p.space.labels().to_vec(),
        per_atom: pp.per_atom,
        total: pp.total,
        glued_cost,
        dual_value,
        gap,
        margin_residual,
        potential_lipschitz,
        lambda,
        integrand: dual.then(|| rows(&integrand.as_matrix())),
    });
    Ok((results, ok))
}

fn tau(
    p: &Problem,
    joint: Option<&str>,
    with_beta: bool,
    bound: Option<&str>,
) -> Result<(Results, bool), CliError> {
    let (name, j) = p.joint(joint)?;
    let tau = krc::tau_c(&j, &p.cost)?;
    let bound = match bound {
        None => None,
        Some(label) => {
            let b = if label == "min" {
                krc::mp_bound_best(&j, &p.cost)?
            } else {
                let x0 = p
                    .space
                    .index_of(label)
                    .ok_or_else(|| CliError::Input(format!("--bound: unknown label `{label}`")))?;
                krc::mp_bound(&j, &p.cost, x0)?
            };
            let slack = krc::tol::DUALITY_GAP;
            Some(BoundResults {
                x0: p.space.label(b.x0).into(),
                beta: b.beta,
                quantile_integral: b.quantile_integral,
                bound: 2.0 * b.quantile_integral,
                holds: tau <= 2.0 * b.quantile_integral + slack,
                max_cost: b.max_cost,
                bounded_form: 2.0 * b.max_cost * b.beta,
                bounded_holds: tau <= 2.0 * b.max_cost * b.beta + slack,
            })
        }
    };
    let ok = bound.as_ref().is_none_or(|b| b.holds && b.bounded_holds);
    let results = Results::Tau(TauResults {
        joint: name,
        tau,
        beta: with_beta.then(|| krc::beta(&j)),
        bound,
    });
    Ok((results, ok))
}

fn reconstruct(
    p: &Problem,
    joint: Option<&str>,
    sample: Option<usize>,
    seed: u64,
    csv: Option<&std::path::Path>,
) -> Result<(Results, bool), CliError> {
    let (name, j): (String, JointLaw) = p.joint(joint)?;
    let tau = krc::tau_c(&j, &p.cost)?;
    let t = krc::reconstruct_law(&j, &p.cost)?;
    let tensor = slices(t.tensor());
    let c = cost_rows(&p.cost);
    let expected_cost = certify::tensor_cost(&tensor, &c);
    let independence_deviation = certify::independence_deviation(&tensor);
    let marginal_residual = certify::joint_residual(&tensor, &rows(j.table()));

    let sample = match sample {
        None => None,
        Some(n) => {
            let kernel = krc::disintegrate_kernel(&t);
            let batch = krc::inverse_cdf_sample(&kernel, &j, seed, n)?;
            if let Some(path) = csv {
                let file = File::create(path)
                    .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
                batch
                    .write_csv(BufWriter::new(file), j.omega(), j.s())
                    .map_err(|e| CliError::Input(format!("writing {}: {e}", path.display())))?;
            }
            Some(SampleSummary {
                n,
                seed,
                mean_cost: batch.mean_cost(&p.cost),
                csv: csv.map(|p| p.display().to_string()),
            })
        }
    };
    let tol = krc::tol::DUALITY_GAP;
    let ok = independence_deviation <= tol
        && marginal_residual <= tol
        && (expected_cost - tau).abs() <= tol;
    let results = Results::Reconstruct(ReconstructResults {
        joint: name,
        omega: j.omega().labels().to_vec(),
        labels: p.space.labels().to_vec(),
        tau,
        expected_cost,
        independence_deviation,
        marginal_residual,
        tensor,
        sample,
    });
    Ok((results, ok))
}

fn chain_decay(p: &Problem, chain: Option<&str>, steps: usize) -> Result<(Results, bool), CliError> {
    let (name, m, init) = p.chain(chain)?;
    let d = krc::markov_tau_decay(&m, &init, &p.cost, steps)
        .map_err(|e| CliError::from(e).context(&format!("chains.{name}")))?;
    let results = Results::Chain(ChainResults {
        chain: name,
        tau: d.tau,
        beta: d.beta,
        beta0: d.beta0,
        contraction: d.contraction,
        rate: d.rate,
    });
    Ok((results, true))
}
