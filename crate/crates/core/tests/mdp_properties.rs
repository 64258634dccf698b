use cfcheck_core::mdp::{
    build_gridworld, compose_segment_policy, path_probability, simulate_path, Cell, GridConfig,
    Move, Path, Segment, Start, Step,
};
use cfcheck_core::rng::substream;
use cfcheck_core::{ActionId, Mdp, Policy, StateId};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn random_mdp(n: usize, m: usize, weights: &[u32]) -> Mdp {
    let states = (0..n).map(|i| format!("s{i}")).collect();
    let actions = (0..m).map(|i| format!("a{i}")).collect();
    let mut mdp = Mdp::new(states, actions).unwrap();
    let mut w = weights.iter().cycle();
    for s in 0..n {
        for a in 0..m {
            let raw: Vec<f64> = (0..n).map(|_| f64::from(*w.next().unwrap())).collect();
            let total: f64 = raw.iter().sum::<f64>().max(1.0);
            let mut row: Vec<f64> = raw.iter().map(|x| x / total).collect();
            if raw.iter().all(|&x| x == 0.0) {
                row[s] = 1.0;
            }
            // absorb rounding into the largest entry
            let fix = 1.0 - row.iter().sum::<f64>();
            let (imax, _) = row
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |b, (i, &x)| if x > b.1 { (i, x) } else { b });
            row[imax] += fix;
            mdp.set_transition(StateId(s), ActionId(a), row).unwrap();
        }
    }
    mdp
}

fn all_paths(mdp: &Mdp, pi: &Policy, len: usize) -> Vec<Path> {
    let mut out = vec![vec![Step::new(StateId(0), pi.action(StateId(0)))]];
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..mdp.num_states()).map(move |s| {
                    let mut q = p.clone();
                    q.push(Step::new(StateId(s), pi.action(StateId(s))));
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(|s| Path::new(s).unwrap()).collect()
}

proptest! {
    #[test]
    fn path_probabilities_sum_to_one(
        n in 1usize..=4,
        len in 1usize..=5,
        weights in proptest::collection::vec(0u32..5, 16..64),
        table in proptest::collection::vec(0usize..2, 4),
    ) {
        let mdp = random_mdp(n, 2, &weights);
        let pi = Policy::new(table[..n].iter().map(|&a| ActionId(a)).collect());
        let total: f64 = all_paths(&mdp, &pi, len).iter().map(|p| path_probability(&mdp, p)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
    }

    #[test]
    fn sampled_paths_have_positive_probability(seed in any::<u64>(), slip in 0.0f64..=1.0) {
        let g = build_gridworld(&GridConfig { slip, ..GridConfig::benchmark() }).unwrap();
        let pi = g.random_policy().unwrap();
        let p = simulate_path(&g.mdp, &pi, Start::Init, 12, &mut substream(seed, 0)).unwrap();
        prop_assert!(path_probability(&g.mdp, &p) > 0.0);
        for step in p.steps() {
            prop_assert_eq!(step.action, pi.action(step.state));
        }
    }

    #[test]
    fn composing_with_base_only_is_identity(seed in any::<u64>(), lo in 1usize..=6, extra in 0usize..6) {
        let g = build_gridworld(&GridConfig::benchmark()).unwrap();
        let base = g.optimal_policy().unwrap();
        let observed = simulate_path(&g.mdp, &base, Start::Init, 12, &mut substream(seed, 1)).unwrap();
        let segs = [
            Segment { policy: &base, lo, hi: lo + extra },
            Segment { policy: &base, lo: 1, hi: 12 },
        ];
        prop_assert_eq!(compose_segment_policy(&base, &observed, &segs).unwrap(), base);
    }
}

#[test]
fn slip_free_benchmark_follows_the_arrows() {
    let g = build_gridworld(&GridConfig { slip: 0.0, ..GridConfig::benchmark() }).unwrap();
    let pi = g.optimal_policy().unwrap();
    let p = simulate_path(&g.mdp, &pi, Start::Init, 7, &mut substream(3, 0)).unwrap();
    let cells = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (3, 3)];
    let moves = [Move::Down, Move::Down, Move::Down, Move::Right, Move::Right, Move::Right, Move::Down];
    let expected: Vec<Step> = cells
        .iter()
        .zip(moves)
        .map(|(&(r, c), m)| Step::new(g.state_of(Cell(r, c)), m.action()))
        .collect();
    assert_eq!(p.steps(), expected.as_slice());
}

#[test]
fn next_state_frequencies_pass_chi_square() {
    let g = build_gridworld(&GridConfig::benchmark()).unwrap();
    let s = g.state_of(Cell(1, 1));
    let pi = Policy::constant(g.mdp.num_states(), Move::Right.action());
    let row = g.mdp.row(s, Move::Right.action()).unwrap().to_vec();
    let draws = 100_000;
    let mut counts = vec![0u64; row.len()];
    for i in 0..draws {
        let p = simulate_path(&g.mdp, &pi, Start::State(s), 2, &mut substream(11, i)).unwrap();
        counts[p.last().state.0] += 1;
    }
    let mut stat = 0.0;
    let mut cats = 0;
    for (c, p) in counts.iter().zip(&row) {
        if *p > 0.0 {
            let e = p * draws as f64;
            stat += (*c as f64 - e).powi(2) / e;
            cats += 1;
        } else {
            assert_eq!(*c, 0);
        }
    }
    let crit = ChiSquared::new((cats - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < crit, "chi-square {stat} >= {crit}");
}
