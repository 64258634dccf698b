use super::model::{ActionId, Mdp, MdpError, StateId};
use super::policy::Policy;

/// Q-values closer than this are treated as ties.
const TIE_TOLERANCE: f64 = 1e-12;

struct Labels {
    target: Vec<bool>,
    unsafe_: Vec<bool>,
}

fn labels(mdp: &Mdp, target: &str, unsafe_label: &str) -> Result<Labels, MdpError> {
    for name in [target, unsafe_label] {
        if !mdp.is_declared(name) {
            return Err(MdpError::UnknownName {
                kind: "proposition",
                name: name.to_string(),
            });
        }
    }
    Ok(Labels {
        target: mdp.states().map(|s| mdp.has_label(s, target)).collect(),
        unsafe_: mdp.states().map(|s| mdp.has_label(s, unsafe_label)).collect(),
    })
}

fn expected(mdp: &Mdp, s: StateId, a: ActionId, values: &[f64]) -> Option<f64> {
    mdp.row(s, a)
        .map(|row| row.iter().zip(values).map(|(p, v)| p * v).sum())
}

/// Fixed value of a labelled state, `None` for states that are still free.
fn pinned(labels: &Labels, s: StateId) -> Option<f64> {
    if labels.target[s.0] {
        Some(1.0)
    } else if labels.unsafe_[s.0] {
        Some(0.0)
    } else {
        None
    }
}

/// Best action value for `s` against `values`.
fn best_value(mdp: &Mdp, s: StateId, values: &[f64]) -> f64 {
    mdp.actions()
        .filter_map(|a| expected(mdp, s, a, values))
        .fold(None, |m: Option<f64>, q| Some(m.map_or(q, |m| m.max(q))))
        .unwrap_or(0.0)
}

/// Greedy action for `s`. `stages` lists value vectors from the longest
/// remaining horizon to the shortest; an action is compared on the first
/// stage and later stages only break ties, so the stationary policy still
/// makes progress when many actions are equally good in the long run.
/// Remaining ties go to the fixed action order.
fn greedy(mdp: &Mdp, s: StateId, stages: &[Vec<f64>]) -> ActionId {
    let mut best: Option<(ActionId, Vec<f64>)> = None;
    for a in mdp.actions() {
        if mdp.row(s, a).is_none() {
            continue;
        }
        let qs: Vec<f64> = stages
            .iter()
            .map(|v| expected(mdp, s, a, v).unwrap_or(0.0))
            .collect();
        let better = match &best {
            None => true,
            Some((_, b)) => qs
                .iter()
                .zip(b)
                .find(|(q, b)| (*q - *b).abs() > TIE_TOLERANCE)
                .is_some_and(|(q, b)| q > b),
        };
        if better {
            best = Some((a, qs));
        }
    }
    best.map_or(ActionId(0), |(a, _)| a)
}

fn stages(
    mdp: &Mdp,
    labels: &Labels,
    horizon: usize,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(labels.target.iter().map(|&t| f64::from(u8::from(t))).collect::<Vec<_>>());
    for _ in 0..horizon {
        let v = out.last().expect("nonempty");
        let next = mdp
            .states()
            .map(|s| pinned(labels, s).unwrap_or_else(|| best_value(mdp, s, v)))
            .collect();
        out.push(next);
    }
    out
}

/// Optimal probabilities of `¬unsafe U[0,horizon] target` from every state.
pub fn reach_avoid_values(
    mdp: &Mdp,
    target: &str,
    unsafe_label: &str,
    horizon: usize,
) -> Result<Vec<f64>, MdpError> {
    let labels = labels(mdp, target, unsafe_label)?;
    Ok(stages(mdp, &labels, horizon).pop().expect("nonempty"))
}

/// Finite-horizon value iteration for the bounded reach-avoid objective.
///
/// Target states have value 1, unsafe states value 0, and every other state
/// maximises the probability of reaching a target within `horizon` steps.
/// The returned policy is greedy with respect to the values one step short
/// of the horizon. Ties are broken by the values for shorter horizons and
/// then by action order.
pub fn value_iteration_reach_avoid(
    mdp: &Mdp,
    target: &str,
    unsafe_label: &str,
    horizon: usize,
) -> Result<Policy, MdpError> {
    if horizon == 0 {
        return Err(MdpError::ZeroHorizon);
    }
    let labels = labels(mdp, target, unsafe_label)?;
    let mut stages = stages(mdp, &labels, horizon - 1);
    stages.reverse();
    Ok(Policy::from_fn(mdp.num_states(), |s| greedy(mdp, s, &stages)))
}

/// Probability of `¬unsafe U[0,horizon] target` under a fixed policy, for
/// every start state.
pub fn reach_avoid_probability(
    mdp: &Mdp,
    policy: &Policy,
    target: &str,
    unsafe_label: &str,
    horizon: usize,
) -> Result<Vec<f64>, MdpError> {
    policy.check_against(mdp)?;
    let labels = labels(mdp, target, unsafe_label)?;
    let mut v: Vec<f64> = labels.target.iter().map(|&t| f64::from(u8::from(t))).collect();
    for _ in 0..horizon {
        let mut next = Vec::with_capacity(v.len());
        for s in mdp.states() {
            let val = match pinned(&labels, s) {
                Some(x) => x,
                None => {
                    let a = policy.action(s);
                    expected(mdp, s, a, &v).ok_or(MdpError::UndefinedTransition { state: s, action: a })?
                }
            };
            next.push(val);
        }
        v = next;
    }
    Ok(v)
}
