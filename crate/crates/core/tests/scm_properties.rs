use cfcheck_core::mdp::{build_gridworld, GridConfig, Start};
use cfcheck_core::rng::substream;
use cfcheck_core::scm::{abduct_step, gumbel_argmax, AbductionMethod, CounterfactualModel, ScmConfig};
use cfcheck_core::{ActionId, Mdp, StateId};
use proptest::prelude::*;
use rand::Rng;

fn single_row(p: &[f64]) -> Mdp {
    let n = p.len();
    let mut mdp = Mdp::new((0..n).map(|i| format!("s{i}")).collect(), vec!["a".into()]).unwrap();
    for s in 0..n {
        mdp.set_transition(StateId(s), ActionId(0), p.to_vec()).unwrap();
    }
    mdp
}

fn normalise(w: &[f64]) -> Vec<f64> {
    let t: f64 = w.iter().sum();
    w.iter().map(|x| x / t).collect()
}

/// Distribution of the counterfactual outcome under `p_new` after observing
/// `obs` under `p`.
fn cf_outcomes(method: AbductionMethod, p: &[f64], obs: usize, p_new: &[f64], n: u64, seed: u64) -> Vec<f64> {
    let mdp = single_row(p);
    let mut counts = vec![0.0; p.len()];
    let mut rng = substream(seed, 0);
    for _ in 0..n {
        let g = abduct_step(method, &mdp, StateId(0), ActionId(0), StateId(obs), &mut rng).unwrap();
        counts[gumbel_argmax(p_new, &g).unwrap()] += 1.0;
    }
    counts.iter().map(|c| c / n as f64).collect()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

#[test]
fn exact_and_rejection_agree_on_the_two_state_swap() {
    let p = [0.3, 0.7];
    let q = [0.7, 0.3];
    let a = cf_outcomes(AbductionMethod::Exact, &p, 1, &q, 10_000, 1);
    let b = cf_outcomes(AbductionMethod::Rejection, &p, 1, &q, 10_000, 2);
    assert!(tv(&a, &b) < 0.02, "{a:?} vs {b:?}");
}

#[test]
fn exact_and_rejection_agree_on_random_triples() {
    let mut rng = substream(99, 0);
    for trial in 0..25u64 {
        let n = rng.random_range(2..=4);
        let p = normalise(&(0..n).map(|_| rng.random_range(0.05..1.0)).collect::<Vec<f64>>());
        let q = normalise(&(0..n).map(|_| rng.random_range(0.05..1.0)).collect::<Vec<f64>>());
        let obs = rng.random_range(0..n);
        let a = cf_outcomes(AbductionMethod::Exact, &p, obs, &q, 10_000, 2 * trial + 10);
        let b = cf_outcomes(AbductionMethod::Rejection, &p, obs, &q, 10_000, 2 * trial + 11);
        assert!(tv(&a, &b) < 0.02, "trial {trial}: p={p:?} obs={obs} q={q:?}: {a:?} vs {b:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stability_corollary(
        w in proptest::collection::vec(0.05f64..1.0, 2..5),
        v in proptest::collection::vec(0.05f64..1.0, 2..5),
        obs_raw in 0usize..4,
        seed in any::<u64>(),
    ) {
        let n = w.len().min(v.len());
        let p = normalise(&w[..n]);
        let mut q = normalise(&v[..n]);
        let obs = obs_raw % n;
        // make obs's ratio the largest: q_obs / p_obs >= q_j / p_j
        let best = (0..n).map(|j| q[j] / p[j]).fold(0.0, f64::max);
        q[obs] = best * p[obs] * 1.000_001;
        let q = normalise(&q);
        let out = cf_outcomes(AbductionMethod::Exact, &p, obs, &q, 2_000, seed);
        prop_assert_eq!(out[obs], 1.0);
    }
}

#[test]
fn stability_example() {
    let out = cf_outcomes(AbductionMethod::Exact, &[0.5, 0.5], 0, &[0.9, 0.1], 10_000, 5);
    assert_eq!(out, vec![1.0, 0.0]);
}

#[test]
fn self_replacement_equals_empty_intervention() {
    let g = build_gridworld(&GridConfig::benchmark()).unwrap();
    let pi = g.random_policy().unwrap();
    let same = pi.clone();
    let cfg = ScmConfig::new(&g.mdp, &pi, 10).unwrap();
    for seed in 0..10 {
        let tau = cfg.sample_path(Start::Init, &mut substream(seed, 0)).unwrap();
        let a = CounterfactualModel::build(&cfg, &tau, -3, &pi, 12).unwrap();
        let b = CounterfactualModel::build(&cfg, &tau, -3, &same, 12).unwrap();
        for i in 0..20 {
            assert_eq!(
                a.sample_counterfactual_path(&mut substream(seed, i + 1)).unwrap(),
                b.sample_counterfactual_path(&mut substream(seed, i + 1)).unwrap()
            );
        }
    }
}
