use super::ast::{PathFormula, Query, StateFormula};

/// Number of steps after the evaluation point a path formula can inspect.
/// State leaves cost nothing: nested operators roll out their own paths.
pub fn path_horizon(f: &PathFormula) -> usize {
    match f {
        PathFormula::State(_) => 0,
        PathFormula::Not(a) => path_horizon(a),
        PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Implies(a, b) => {
            path_horizon(a).max(path_horizon(b))
        }
        PathFormula::Until(a, iv, b) => iv.hi() as usize + path_horizon(a).max(path_horizon(b)),
        PathFormula::Eventually(iv, a) | PathFormula::Globally(iv, a) => iv.hi() as usize + path_horizon(a),
        PathFormula::Next(a) => 1 + path_horizon(a),
    }
}

/// Number of steps a rollout must take beyond its first state to decide
/// the operator.
pub fn query_horizon(q: &Query) -> usize {
    match q {
        Query::Prob { path, .. } => path_horizon(path),
        Query::Reward { interval, .. } => interval.hi() as usize,
    }
}

/// Horizon of a state formula: the largest rollout horizon among its
/// operators, plus the forward shift `max(t, 0)` of counterfactual and
/// difference operators.
pub fn formula_horizon(f: &StateFormula) -> usize {
    match f {
        StateFormula::True | StateFormula::Atom(_) => 0,
        StateFormula::Not(a) => formula_horizon(a),
        StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
            formula_horizon(a).max(formula_horizon(b))
        }
        StateFormula::Query(q) => query_horizon(q),
        StateFormula::Cf { offset, query, .. } | StateFormula::Delta { offset, query, .. } => {
            (*offset).max(0) as usize + query_horizon(query)
        }
    }
}
