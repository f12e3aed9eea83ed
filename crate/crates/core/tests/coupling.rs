mod common;

use common::*;
use krc::param::independent_coupling_cost;
use krc::{
    beta, conditionals, disintegrate_kernel, glue, inverse_cdf_sample, markov_tau_decay, mp_bound,
    param_dual, param_primal, reconstruct_law, solve, tail_quantile, tau_c, tau_c_dual,
    verify_independence, CostMatrix, FiniteSpace, JointLaw, ProbVec,
};
use krc_oracles::{chi_square_fit, quantile_integral_layer_cake, two_state_tau};
use ndarray::{Array2, Axis};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type FamilyInputs = (usize, usize, Vec<u32>, Vec<Vec<u32>>, Vec<Vec<u32>>, Array2<f64>);

fn family_inputs(max_atoms: usize, max_n: usize) -> impl Strategy<Value = FamilyInputs> {
    (1usize..=max_atoms, 1usize..=max_n).prop_flat_map(|(a, n)| {
        (
            Just(a),
            Just(n),
            weights(a),
            prop::collection::vec(weights(n), a),
            prop::collection::vec(weights(n), a),
            tight_cost(n),
        )
    })
}

fn joint_inputs(max_atoms: usize, max_n: usize) -> impl Strategy<Value = (usize, usize, Vec<u32>, Array2<f64>)> {
    (1usize..=max_atoms, 1usize..=max_n)
        .prop_flat_map(|(a, n)| (Just(a), Just(n), joint_table(a, n), tight_cost(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parametrized_equality_chain((a, n, w, mus, nus, c) in family_inputs(8, 8)) {
        let omega = FiniteSpace::indexed(a).unwrap();
        let s = FiniteSpace::indexed(n).unwrap();
        let c = cost(&s, c);
        let mu = family(&omega, &s, &w, &mus);
        let nu = family(&omega, &s, &w, &nus);
        let pp = param_primal(&mu, &nu, &c).unwrap();
        let (f, dual) = param_dual(&mu, &nu, &c).unwrap();
        let lambda = glue(&pp, mu.weights()).unwrap();
        let glued: f64 = lambda.indexed_iter().map(|((_, i, j), l)| l * c.get(i, j)).sum();
        prop_assert!((pp.total - glued).abs() <= 1e-9);
        prop_assert!((pp.total - dual).abs() <= 1e-9);
        prop_assert!(f.is_lipschitz(&c));
        prop_assert!(dual <= independent_coupling_cost(&mu, &nu, &c).unwrap() + 1e-9);

        // both projections of lambda reproduce the families
        let xs = lambda.sum_axis(Axis(2));
        let ys = lambda.sum_axis(Axis(1));
        for wi in 0..a {
            let p = mu.weights().mass()[wi];
            for i in 0..n {
                prop_assert!((xs[(wi, i)] - p * mu.margin(wi).mass()[i]).abs() <= 1e-9);
                prop_assert!((ys[(wi, i)] - p * nu.margin(wi).mass()[i]).abs() <= 1e-9);
            }
            // per-atom optimality against a fresh solve
            let fresh = solve(mu.margin(wi), nu.margin(wi), &c).unwrap();
            prop_assert!((pp.per_atom[wi] - fresh.primal_value).abs() <= 1e-12);
        }
        prop_assert_eq!(param_primal(&mu, &nu, &c).unwrap(), pp);
    }

    #[test]
    fn tau_identities((a, n, raw, c) in joint_inputs(6, 6)) {
        let omega = FiniteSpace::indexed(a).unwrap();
        let s = FiniteSpace::indexed(n).unwrap();
        let c = cost(&s, c);
        let j = joint(&omega, &s, &raw);
        let t = tau_c(&j, &c).unwrap();
        prop_assert!((t - tau_c_dual(&j, &c).unwrap()).abs() <= 1e-9);
        let b = beta(&j);
        prop_assert!((tau_c(&j, &CostMatrix::discrete(&s)).unwrap() - b).abs() <= 1e-12);
        prop_assert!(t <= 2.0 * c.max_entry() * b + 1e-9);
        // scaling
        let t3 = tau_c(&j, &c.scaled(3.0)).unwrap();
        prop_assert!((t3 - 3.0 * t).abs() <= 1e-9);

        // the conditionals average back to the marginal
        let sys = conditionals(&j);
        let mix = sys.conditionals.mixture();
        for (m, v) in mix.iter().zip(sys.marginal.mass()) {
            prop_assert!((m - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn tau_vanishes_exactly_on_products((a, n, p, q, c) in (1usize..=5, 2usize..=5).prop_flat_map(|(a, n)| (Just(a), Just(n), weights(a), weights(n), tight_cost(n)))) {
        let omega = FiniteSpace::indexed(a).unwrap();
        let s = FiniteSpace::indexed(n).unwrap();
        let c = cost(&s, c);
        let prod = JointLaw::product(&prob(&omega, &p), &prob(&s, &q));
        prop_assert!(tau_c(&prod, &c).unwrap().abs() <= 1e-12);
        prop_assert!(beta(&prod).abs() <= 1e-12);
    }

    #[test]
    fn mp_bound_holds((a, n, raw, c) in joint_inputs(6, 6), x0 in 0usize..6) {
        let omega = FiniteSpace::indexed(a).unwrap();
        let s = FiniteSpace::indexed(n).unwrap();
        let c = cost(&s, c);
        let j = joint(&omega, &s, &raw);
        let x0 = x0 % n;
        let b = mp_bound(&j, &c, x0).unwrap();
        prop_assert!(b.holds);
        prop_assert!(b.bounded_holds);
        // the step-sum integral agrees with the layer-cake route
        let values: Vec<f64> = (0..n).map(|x| c.get(x, x0)).collect();
        let lc = quantile_integral_layer_cake(&values, &j.col_sums(), b.beta);
        prop_assert!((b.quantile_integral - lc).abs() <= 1e-12);
        let q = tail_quantile(&j, &c, x0).unwrap();
        prop_assert!(q.sup() <= c.max_entry());
    }

    #[test]
    fn reconstruction_certificates((a, n, raw, c) in joint_inputs(8, 8)) {
        let omega = FiniteSpace::indexed(a).unwrap();
        let s = FiniteSpace::indexed(n).unwrap();
        let c = cost(&s, c);
        let j = joint(&omega, &s, &raw);
        let t = reconstruct_law(&j, &c).unwrap();
        prop_assert!(verify_independence(&t) <= 1e-9);
        prop_assert!(t.joint_residual(&j) <= 1e-9);
        prop_assert!((t.expected_cost(&c) - tau_c(&j, &c).unwrap()).abs() <= 1e-9);
        let k = disintegrate_kernel(&t);
        for (x, y) in k.reassemble().iter().zip(t.tensor().iter()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let d = reconstruct_law(&j, &CostMatrix::discrete(&s)).unwrap();
        prop_assert!((d.expected_cost(&CostMatrix::discrete(&s)) - beta(&j)).abs() <= 1e-12);
    }
}

#[test]
fn sampler_matches_kernel_laws() {
    let omega = FiniteSpace::new(["a", "b"]).unwrap();
    let s = FiniteSpace::indexed(3).unwrap();
    let j = JointLaw::from_rows(&omega, &s, &[vec![0.25, 0.1, 0.05], vec![0.05, 0.15, 0.4]]).unwrap();
    let c = CostMatrix::line(&s, &[0.0, 1.0, 2.5]).unwrap();
    let t = reconstruct_law(&j, &c).unwrap();
    let k = disintegrate_kernel(&t);
    let n = 100_000;
    let batch = inverse_cdf_sample(&k, &j, 2024, n).unwrap();

    let mut counts = vec![vec![vec![0u64; 3]; 3]; 2];
    for r in &batch.records {
        counts[r.omega][r.x][r.y] += 1;
    }
    for w in 0..2 {
        for x in 0..3 {
            let cell = &counts[w][x];
            if cell.iter().sum::<u64>() < 30 {
                continue;
            }
            let (stat, df) = chi_square_fit(cell, &k.law(w, x)).expect("no draw on a null label");
            if df == 0 {
                continue;
            }
            let crit = ChiSquared::new(df as f64).unwrap().inverse_cdf(0.999);
            assert!(stat <= crit, "cell ({w},{x}): chi2 {stat} > {crit}");
        }
    }
    let tau = tau_c(&j, &c).unwrap();
    // the cost of a draw lies in [0, max c]
    let sd = c.max_entry() / (n as f64).sqrt();
    assert!((batch.mean_cost(&c) - tau).abs() <= 4.0 * sd);
}

#[test]
fn two_state_chain_closed_form() {
    let s = FiniteSpace::indexed(2).unwrap();
    let p = Array2::from_shape_vec((2, 2), vec![0.75, 0.25, 0.25, 0.75]).unwrap();
    let d = markov_tau_decay(&p, &ProbVec::uniform(&s), &CostMatrix::discrete(&s), 12).unwrap();
    for (k, t) in d.tau.iter().enumerate() {
        assert!((t - two_state_tau(0.25, k as u32 + 1)).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chain_envelopes((n, rows, init, c) in (2usize..=5).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::vec(1u32..50, n), n), weights(n), tight_cost(n)))) {
        let s = FiniteSpace::indexed(n).unwrap();
        let c = cost(&s, c);
        let p = Array2::from_shape_fn((n, n), |(i, j)| normalize(&rows[i])[j]);
        let init = prob(&s, &init);
        let d = markov_tau_decay(&p, &init, &c, 8).unwrap();
        for (k, (t, b)) in d.tau.iter().zip(&d.beta).enumerate() {
            prop_assert!(*t <= 2.0 * c.max_entry() * b + 1e-9);
            prop_assert!(*b <= d.contraction.powi(k as i32 + 1) * d.beta0 + 1e-12);
        }
    }
}
