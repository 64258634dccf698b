use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on row sums of categorical distributions.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Index of a state in an [`Mdp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

/// Index of an action in an [`Mdp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl ActionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MdpError {
    #[error("model has no {0}")]
    Empty(&'static str),
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("{what} has length {found}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0} out of range")]
    OutOfRange(String),
    #[error("no transition row for state {state} under action {action}")]
    UndefinedTransition { state: StateId, action: ActionId },
    #[error("path length must be at least 1")]
    ZeroLength,
    #[error("path must contain at least one step")]
    EmptyPath,
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("policy covers {found} states, model has {expected}")]
    PolicySize { expected: usize, found: usize },
    #[error("policy assigns unknown action {action} to state {state}")]
    PolicyAction { state: StateId, action: ActionId },
    #[error("invalid grid configuration: {0}")]
    InvalidGrid(String),
    #[error("model is not well formed: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A well-formedness problem found by [`validate_mdp`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RowSum {
        state: StateId,
        action: ActionId,
        sum: f64,
    },
    ProbabilityRange {
        state: StateId,
        action: ActionId,
        target: StateId,
        value: f64,
    },
    InitSum {
        sum: f64,
    },
    InitRange {
        state: StateId,
        value: f64,
    },
    UndeclaredProposition {
        state: StateId,
        proposition: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { state, action, sum } => {
                write!(f, "row ({state}, {action}) sums to {sum}")
            }
            Violation::ProbabilityRange {
                state,
                action,
                target,
                value,
            } => write!(f, "P({target} | {state}, {action}) = {value} is not in [0,1]"),
            Violation::InitSum { sum } => write!(f, "initial distribution sums to {sum}"),
            Violation::InitRange { state, value } => {
                write!(f, "initial probability of {state} = {value} is not in [0,1]")
            }
            Violation::UndeclaredProposition { state, proposition } => {
                write!(f, "state {state} carries undeclared proposition `{proposition}`")
            }
        }
    }
}

/// A finite MDP with dense transition rows.
///
/// Rows may be left undefined for (state, action) pairs the model never
/// uses. The builder methods only check dimensions; probabilistic
/// well-formedness is reported by [`validate_mdp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    states: Vec<String>,
    actions: Vec<String>,
    state_index: HashMap<String, StateId>,
    action_index: HashMap<String, ActionId>,
    propositions: Vec<String>,
    trans: Vec<Option<Vec<f64>>>,
    init: Vec<f64>,
    reward: Vec<f64>,
    labels: Vec<BTreeSet<String>>,
}

impl Mdp {
    /// Creates a model with no transitions, zero rewards, empty labels and
    /// a point-mass initial distribution on the first state.
    pub fn new(states: Vec<String>, actions: Vec<String>) -> Result<Self, MdpError> {
        if states.is_empty() {
            return Err(MdpError::Empty("states"));
        }
        if actions.is_empty() {
            return Err(MdpError::Empty("actions"));
        }
        let state_index = index_names("state", &states, StateId)?;
        let action_index = index_names("action", &actions, ActionId)?;
        let n = states.len();
        let m = actions.len();
        let mut init = vec![0.0; n];
        init[0] = 1.0;
        Ok(Self {
            states,
            actions,
            state_index,
            action_index,
            propositions: Vec::new(),
            trans: vec![None; n * m],
            init,
            reward: vec![0.0; n * m],
            labels: vec![BTreeSet::new(); n],
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).map(StateId)
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        (0..self.actions.len()).map(ActionId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, MdpError> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| MdpError::UnknownName {
                kind: "state",
                name: name.to_string(),
            })
    }

    pub fn action_id(&self, name: &str) -> Result<ActionId, MdpError> {
        self.action_index
            .get(name)
            .copied()
            .ok_or_else(|| MdpError::UnknownName {
                kind: "action",
                name: name.to_string(),
            })
    }

    fn slot(&self, s: StateId, a: ActionId) -> usize {
        s.0 * self.actions.len() + a.0
    }

    fn check_state(&self, s: StateId) -> Result<(), MdpError> {
        if s.0 < self.states.len() {
            Ok(())
        } else {
            Err(MdpError::OutOfRange(format!("state {s}")))
        }
    }

    fn check_action(&self, a: ActionId) -> Result<(), MdpError> {
        if a.0 < self.actions.len() {
            Ok(())
        } else {
            Err(MdpError::OutOfRange(format!("action {a}")))
        }
    }

    /// Sets the dense transition row of `(s, a)`.
    pub fn set_transition(&mut self, s: StateId, a: ActionId, row: Vec<f64>) -> Result<(), MdpError> {
        self.check_state(s)?;
        self.check_action(a)?;
        if row.len() != self.states.len() {
            return Err(MdpError::Dimension {
                what: "transition row",
                expected: self.states.len(),
                found: row.len(),
            });
        }
        let slot = self.slot(s, a);
        self.trans[slot] = Some(row);
        Ok(())
    }

    /// Sets the row of `(s, a)` from `(target, probability)` pairs; repeated
    /// targets accumulate.
    pub fn set_transition_sparse(
        &mut self,
        s: StateId,
        a: ActionId,
        entries: &[(StateId, f64)],
    ) -> Result<(), MdpError> {
        let mut row = vec![0.0; self.states.len()];
        for &(t, p) in entries {
            self.check_state(t)?;
            row[t.0] += p;
        }
        self.set_transition(s, a, row)
    }

    pub fn set_init(&mut self, init: Vec<f64>) -> Result<(), MdpError> {
        if init.len() != self.states.len() {
            return Err(MdpError::Dimension {
                what: "initial distribution",
                expected: self.states.len(),
                found: init.len(),
            });
        }
        self.init = init;
        Ok(())
    }

    pub fn set_init_point(&mut self, s: StateId) -> Result<(), MdpError> {
        self.check_state(s)?;
        self.init.iter_mut().for_each(|p| *p = 0.0);
        self.init[s.0] = 1.0;
        Ok(())
    }

    pub fn set_reward(&mut self, s: StateId, a: ActionId, reward: f64) -> Result<(), MdpError> {
        self.check_state(s)?;
        self.check_action(a)?;
        let slot = self.slot(s, a);
        self.reward[slot] = reward;
        Ok(())
    }

    pub fn declare_proposition(&mut self, name: &str) {
        if !self.propositions.iter().any(|p| p == name) {
            self.propositions.push(name.to_string());
        }
    }

    /// Attaches a label to a state. The proposition is not declared
    /// implicitly; see [`Mdp::declare_proposition`].
    pub fn add_label(&mut self, s: StateId, proposition: &str) -> Result<(), MdpError> {
        self.check_state(s)?;
        self.labels[s.0].insert(proposition.to_string());
        Ok(())
    }

    pub fn row(&self, s: StateId, a: ActionId) -> Option<&[f64]> {
        self.trans[self.slot(s, a)].as_deref()
    }

    /// `P(next | s, a)`, zero for undefined rows.
    pub fn prob(&self, s: StateId, a: ActionId, next: StateId) -> f64 {
        self.row(s, a).map_or(0.0, |row| row[next.0])
    }

    pub fn init(&self) -> &[f64] {
        &self.init
    }

    pub fn reward(&self, s: StateId, a: ActionId) -> f64 {
        self.reward[self.slot(s, a)]
    }

    pub fn propositions(&self) -> &[String] {
        &self.propositions
    }

    pub fn is_declared(&self, proposition: &str) -> bool {
        self.propositions.iter().any(|p| p == proposition)
    }

    pub fn labels(&self, s: StateId) -> &BTreeSet<String> {
        &self.labels[s.0]
    }

    pub fn has_label(&self, s: StateId, proposition: &str) -> bool {
        self.labels[s.0].contains(proposition)
    }

    /// States carrying `proposition`.
    pub fn labelled(&self, proposition: &str) -> Vec<StateId> {
        self.states().filter(|&s| self.has_label(s, proposition)).collect()
    }

    /// Returns the model unchanged if [`validate_mdp`] finds nothing.
    pub fn validated(self) -> Result<Self, MdpError> {
        let violations = validate_mdp(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(MdpError::Invalid(violations))
        }
    }
}

fn index_names<T: Copy>(
    kind: &'static str,
    names: &[String],
    wrap: fn(usize) -> T,
) -> Result<HashMap<String, T>, MdpError> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if index.insert(name.clone(), wrap(i)).is_some() {
            return Err(MdpError::DuplicateName {
                kind,
                name: name.clone(),
            });
        }
    }
    Ok(index)
}

fn in_unit_interval(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

/// Lists every row-sum, probability-range and labelling problem of `mdp`.
/// An empty result means the model is well formed.
pub fn validate_mdp(mdp: &Mdp) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in mdp.states() {
        for a in mdp.actions() {
            let Some(row) = mdp.row(s, a) else { continue };
            for (t, &p) in row.iter().enumerate() {
                if !in_unit_interval(p) {
                    out.push(Violation::ProbabilityRange {
                        state: s,
                        action: a,
                        target: StateId(t),
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if !((sum - 1.0).abs() <= SUM_TOLERANCE) {
                out.push(Violation::RowSum {
                    state: s,
                    action: a,
                    sum,
                });
            }
        }
    }
    for (i, &p) in mdp.init().iter().enumerate() {
        if !in_unit_interval(p) {
            out.push(Violation::InitRange {
                state: StateId(i),
                value: p,
            });
        }
    }
    let sum: f64 = mdp.init().iter().sum();
    if !((sum - 1.0).abs() <= SUM_TOLERANCE) {
        out.push(Violation::InitSum { sum });
    }
    for s in mdp.states() {
        for label in mdp.labels(s) {
            if !mdp.is_declared(label) {
                out.push(Violation::UndeclaredProposition {
                    state: s,
                    proposition: label.clone(),
                });
            }
        }
    }
    out
}
