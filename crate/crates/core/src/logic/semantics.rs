use thiserror::Error;

use super::ast::{PathFormula, StateFormula};
use super::horizon::path_horizon;
use crate::mdp::{Mdp, Path};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("path of length {len} is too short: position {pos} plus horizon {horizon}")]
    PathTooShort { len: usize, pos: usize, horizon: usize },
    #[error("position 0 is not a valid evaluation point")]
    ZeroPosition,
    #[error("operator {0} needs a statistical checker")]
    NotPropositional(String),
}

/// Decides state subformulas met while evaluating a path formula.
///
/// `holds(f, path, pos)` must only look at the prefix `path[1:pos]`.
pub trait StateOracle {
    type Error: From<EvalError>;

    fn holds(&mut self, f: &StateFormula, path: &Path, pos: usize) -> Result<bool, Self::Error>;
}

/// Decides propositional formulas from the labels of the state at `pos`.
#[derive(Debug, Clone, Copy)]
pub struct LabelOracle<'a> {
    pub mdp: &'a Mdp,
}

impl StateOracle for LabelOracle<'_> {
    type Error = EvalError;

    fn holds(&mut self, f: &StateFormula, path: &Path, pos: usize) -> Result<bool, EvalError> {
        let s = path.steps()[pos - 1].state;
        eval_labels(self.mdp, f, s).ok_or_else(|| EvalError::NotPropositional(f.to_string()))
    }
}

/// Truth value of a propositional formula at `s`, `None` if it contains a
/// statistical operator.
pub fn eval_labels(mdp: &Mdp, f: &StateFormula, s: crate::mdp::StateId) -> Option<bool> {
    Some(match f {
        StateFormula::True => true,
        StateFormula::Atom(a) => mdp.has_label(s, a),
        StateFormula::Not(a) => !eval_labels(mdp, a, s)?,
        StateFormula::And(a, b) => eval_labels(mdp, a, s)? && eval_labels(mdp, b, s)?,
        StateFormula::Or(a, b) => eval_labels(mdp, a, s)? || eval_labels(mdp, b, s)?,
        StateFormula::Implies(a, b) => !eval_labels(mdp, a, s)? || eval_labels(mdp, b, s)?,
        StateFormula::Query(_) | StateFormula::Cf { .. } | StateFormula::Delta { .. } => return None,
    })
}

/// `(path, pos) ⊨ f` for a 1-based position. The path must extend at
/// least `path_horizon(f)` steps past `pos`.
pub fn eval_path_formula<O: StateOracle>(
    oracle: &mut O,
    path: &Path,
    pos: usize,
    f: &PathFormula,
) -> Result<bool, O::Error> {
    if pos == 0 {
        return Err(EvalError::ZeroPosition.into());
    }
    let horizon = path_horizon(f);
    if pos + horizon > path.len() {
        return Err(EvalError::PathTooShort { len: path.len(), pos, horizon }.into());
    }
    eval(oracle, path, pos, f)
}

fn eval<O: StateOracle>(oracle: &mut O, path: &Path, pos: usize, f: &PathFormula) -> Result<bool, O::Error> {
    Ok(match f {
        PathFormula::State(s) => oracle.holds(s, path, pos)?,
        PathFormula::Not(a) => !eval(oracle, path, pos, a)?,
        PathFormula::And(a, b) => eval(oracle, path, pos, a)? && eval(oracle, path, pos, b)?,
        PathFormula::Or(a, b) => eval(oracle, path, pos, a)? || eval(oracle, path, pos, b)?,
        PathFormula::Implies(a, b) => !eval(oracle, path, pos, a)? || eval(oracle, path, pos, b)?,
        PathFormula::Until(a, iv, b) => {
            for t in 0..=iv.hi() as usize {
                if t >= iv.lo() as usize && eval(oracle, path, pos + t, b)? {
                    return Ok(true);
                }
                if !eval(oracle, path, pos + t, a)? {
                    return Ok(false);
                }
            }
            false
        }
        PathFormula::Eventually(iv, a) => {
            for t in iv.lo()..=iv.hi() {
                if eval(oracle, path, pos + t as usize, a)? {
                    return Ok(true);
                }
            }
            false
        }
        PathFormula::Globally(iv, a) => {
            for t in iv.lo()..=iv.hi() {
                if !eval(oracle, path, pos + t as usize, a)? {
                    return Ok(false);
                }
            }
            true
        }
        PathFormula::Next(a) => eval(oracle, path, pos + 1, a)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_path_formula;
    use crate::mdp::{ActionId, StateId, Step};

    /// States 0..n where state `i` carries the labels listed in `labels[i]`.
    fn labelled(labels: &[&[&str]]) -> (Mdp, Path) {
        let n = labels.len();
        let mut mdp = Mdp::new((0..n).map(|i| format!("s{i}")).collect(), vec!["a".into()]).unwrap();
        for p in ["a", "b"] {
            mdp.declare_proposition(p);
        }
        for (i, ls) in labels.iter().enumerate() {
            for l in *ls {
                mdp.add_label(StateId(i), l).unwrap();
            }
        }
        let path = Path::new((0..n).map(|i| Step::new(StateId(i), ActionId(0))).collect()).unwrap();
        (mdp, path)
    }

    fn check(labels: &[&[&str]], pos: usize, src: &str) -> bool {
        let (mdp, path) = labelled(labels);
        let f = parse_path_formula(src).unwrap();
        eval_path_formula(&mut LabelOracle { mdp: &mdp }, &path, pos, &f).unwrap()
    }

    #[test]
    fn globally_over_a_window() {
        assert!(check(&[&["a"], &["a"], &["a"]], 1, r#"G[0,2] "a""#));
        assert!(!check(&[&["a"], &[], &["a"]], 1, r#"G[0,2] "a""#));
    }

    #[test]
    fn until_with_a_delayed_window() {
        let labels: &[&[&str]] = &[&["a"], &["a"], &["a"], &["b"]];
        assert!(check(labels, 1, r#""a" U[1,3] "b""#));
        let broken: &[&[&str]] = &[&["a"], &[], &["a"], &["b"]];
        assert!(!check(broken, 1, r#""a" U[1,3] "b""#));
        // b at the evaluation point is outside [1,3]
        let early: &[&[&str]] = &[&["b"], &[], &[], &[]];
        assert!(!check(early, 1, r#""a" U[1,3] "b""#));
    }

    #[test]
    fn next_is_eventually_one_one() {
        for bits in 0..4u8 {
            let l0: &[&str] = if bits & 1 != 0 { &["a"] } else { &[] };
            let l1: &[&str] = if bits & 2 != 0 { &["a"] } else { &[] };
            assert_eq!(check(&[l0, l1], 1, r#"X "a""#), check(&[l0, l1], 1, r#"F[1,1] "a""#));
        }
    }

    #[test]
    fn short_path_is_an_error() {
        let (mdp, path) = labelled(&[&["a"], &["a"]]);
        let f = parse_path_formula(r#"F[0,3] "a""#).unwrap();
        let err = eval_path_formula(&mut LabelOracle { mdp: &mdp }, &path, 1, &f).unwrap_err();
        assert_eq!(err, EvalError::PathTooShort { len: 2, pos: 1, horizon: 3 });
    }

    #[test]
    fn statistical_leaves_need_a_checker() {
        let (mdp, path) = labelled(&[&["a"]]);
        let f = parse_path_formula(r#"P>0.5 ["a"]"#).unwrap();
        assert!(matches!(
            eval_path_formula(&mut LabelOracle { mdp: &mdp }, &path, 1, &f),
            Err(EvalError::NotPropositional(_))
        ));
    }
}
