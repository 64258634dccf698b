use std::fmt;

use serde::Serialize;

use crate::scm::Intervention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Comparison {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::Lt => value < threshold,
            Comparison::Le => value <= threshold,
            Comparison::Gt => value > threshold,
            Comparison::Ge => value >= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }

    /// True for `>` and `>=`, where larger values satisfy the bound.
    pub fn is_lower_bound(self) -> bool {
        matches!(self, Comparison::Gt | Comparison::Ge)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `⋈ p` or `=?`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    Cmp(Comparison, f64),
    Query,
}

/// A closed discrete interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    lo: u32,
    hi: u32,
}

impl Interval {
    pub fn new(lo: u32, hi: u32) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn lo(self) -> u32 {
        self.lo
    }

    pub fn hi(self) -> u32 {
        self.hi
    }

    pub fn contains(self, t: u32) -> bool {
        self.lo <= t && t <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// A probabilistic or reward operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Query {
    Prob { bound: Bound, path: Box<PathFormula> },
    Reward { bound: Bound, interval: Interval },
}

impl Query {
    pub fn bound(&self) -> Bound {
        match self {
            Query::Prob { bound, .. } | Query::Reward { bound, .. } => *bound,
        }
    }

    pub fn with_bound(&self, bound: Bound) -> Query {
        match self {
            Query::Prob { path, .. } => Query::Prob { bound, path: path.clone() },
            Query::Reward { interval, .. } => Query::Reward { bound, interval: *interval },
        }
    }

    pub fn is_quantitative(&self) -> bool {
        self.bound() == Bound::Query
    }
}

/// State formulas. Disjunction and implication are kept as written so the
/// printer can reproduce them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StateFormula {
    True,
    Atom(String),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    Implies(Box<StateFormula>, Box<StateFormula>),
    Query(Query),
    /// `I@t.Q`
    Cf { intervention: Intervention, offset: i64, query: Query },
    /// `D[I1, I0]@t.Q`, the difference of the two counterfactual values.
    Delta { treated: Intervention, control: Intervention, offset: i64, query: Query },
}

impl StateFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        StateFormula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn prob(bound: Bound, path: PathFormula) -> Self {
        StateFormula::Query(Query::Prob { bound, path: Box::new(path) })
    }

    pub fn reward(bound: Bound, interval: Interval) -> Self {
        StateFormula::Query(Query::Reward { bound, interval })
    }

    /// True when no probabilistic, reward, counterfactual or difference
    /// operator occurs, so the formula is decided by labels alone.
    pub fn is_propositional(&self) -> bool {
        match self {
            StateFormula::True | StateFormula::Atom(_) => true,
            StateFormula::Not(a) => a.is_propositional(),
            StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            StateFormula::Query(_) | StateFormula::Cf { .. } | StateFormula::Delta { .. } => false,
        }
    }

    /// True when a `=?` bound appears anywhere below the root operator.
    pub fn has_nested_query_bound(&self) -> bool {
        fn path(p: &PathFormula) -> bool {
            match p {
                PathFormula::State(s) => state(s, true),
                PathFormula::Not(a)
                | PathFormula::Eventually(_, a)
                | PathFormula::Globally(_, a)
                | PathFormula::Next(a) => path(a),
                PathFormula::And(a, b)
                | PathFormula::Or(a, b)
                | PathFormula::Implies(a, b)
                | PathFormula::Until(a, _, b) => path(a) || path(b),
            }
        }
        fn query(q: &Query, nested: bool) -> bool {
            (nested && q.is_quantitative())
                || matches!(q, Query::Prob { path: p, .. } if path(p))
        }
        fn state(s: &StateFormula, nested: bool) -> bool {
            match s {
                StateFormula::True | StateFormula::Atom(_) => false,
                StateFormula::Not(a) => state(a, true),
                StateFormula::And(a, b) | StateFormula::Or(a, b) | StateFormula::Implies(a, b) => {
                    state(a, true) || state(b, true)
                }
                StateFormula::Query(q)
                | StateFormula::Cf { query: q, .. }
                | StateFormula::Delta { query: q, .. } => query(q, nested),
            }
        }
        state(self, false)
    }
}

/// Path formulas in canonical form: every maximal subformula without a
/// temporal operator is a single [`PathFormula::State`] leaf. The smart
/// constructors maintain this, and the parser only builds through them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PathFormula {
    State(Box<StateFormula>),
    Not(Box<PathFormula>),
    And(Box<PathFormula>, Box<PathFormula>),
    Or(Box<PathFormula>, Box<PathFormula>),
    Implies(Box<PathFormula>, Box<PathFormula>),
    Until(Box<PathFormula>, Interval, Box<PathFormula>),
    /// `F[a,b] φ`, i.e. `true U[a,b] φ`.
    Eventually(Interval, Box<PathFormula>),
    /// `G[a,b] φ`, i.e. `!F[a,b] !φ`.
    Globally(Interval, Box<PathFormula>),
    /// `X φ`, i.e. `F[1,1] φ`.
    Next(Box<PathFormula>),
}

impl PathFormula {
    pub fn state(f: StateFormula) -> Self {
        PathFormula::State(Box::new(f))
    }

    pub fn as_state(&self) -> Option<&StateFormula> {
        match self {
            PathFormula::State(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_state(self) -> Result<StateFormula, PathFormula> {
        match self {
            PathFormula::State(s) => Ok(*s),
            other => Err(other),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: PathFormula) -> Self {
        match f {
            PathFormula::State(s) => PathFormula::state(StateFormula::Not(s)),
            f => PathFormula::Not(Box::new(f)),
        }
    }

    pub fn and(a: PathFormula, b: PathFormula) -> Self {
        match (a, b) {
            (PathFormula::State(x), PathFormula::State(y)) => PathFormula::state(StateFormula::And(x, y)),
            (a, b) => PathFormula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: PathFormula, b: PathFormula) -> Self {
        match (a, b) {
            (PathFormula::State(x), PathFormula::State(y)) => PathFormula::state(StateFormula::Or(x, y)),
            (a, b) => PathFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn implies(a: PathFormula, b: PathFormula) -> Self {
        match (a, b) {
            (PathFormula::State(x), PathFormula::State(y)) => {
                PathFormula::state(StateFormula::Implies(x, y))
            }
            (a, b) => PathFormula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn until(a: PathFormula, iv: Interval, b: PathFormula) -> Self {
        PathFormula::Until(Box::new(a), iv, Box::new(b))
    }

    pub fn eventually(iv: Interval, f: PathFormula) -> Self {
        PathFormula::Eventually(iv, Box::new(f))
    }

    pub fn globally(iv: Interval, f: PathFormula) -> Self {
        PathFormula::Globally(iv, Box::new(f))
    }

    pub fn next(f: PathFormula) -> Self {
        PathFormula::Next(Box::new(f))
    }

    /// Rewrites the sugar into the core `!`, `&`, `U` connectives.
    pub fn desugar(&self) -> PathFormula {
        let t = || PathFormula::state(StateFormula::True);
        match self {
            PathFormula::State(s) => PathFormula::State(s.clone()),
            PathFormula::Not(a) => PathFormula::not(a.desugar()),
            PathFormula::And(a, b) => PathFormula::and(a.desugar(), b.desugar()),
            PathFormula::Or(a, b) => PathFormula::not(PathFormula::and(
                PathFormula::not(a.desugar()),
                PathFormula::not(b.desugar()),
            )),
            PathFormula::Implies(a, b) => PathFormula::not(PathFormula::and(
                a.desugar(),
                PathFormula::not(b.desugar()),
            )),
            PathFormula::Until(a, iv, b) => PathFormula::until(a.desugar(), *iv, b.desugar()),
            PathFormula::Eventually(iv, a) => PathFormula::until(t(), *iv, a.desugar()),
            PathFormula::Globally(iv, a) => PathFormula::not(PathFormula::until(
                t(),
                *iv,
                PathFormula::not(a.desugar()),
            )),
            PathFormula::Next(a) => {
                PathFormula::until(t(), Interval::new(1, 1).expect("1 <= 1"), a.desugar())
            }
        }
    }
}
