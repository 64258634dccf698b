use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{ActionId, Mdp, MdpError, StateId};
use super::policy::Policy;

/// One `(state, action)` pair of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub state: StateId,
    pub action: ActionId,
}

impl Step {
    pub fn new(state: StateId, action: ActionId) -> Self {
        Self { state, action }
    }
}

/// A finite, nonempty sequence of state-action pairs.
///
/// Positions are 1-based: `get(1)` is the first pair and `get(len)` the
/// last. Position `0` is an alias of the last pair and negative positions
/// count back from the end, so `get(-i)` is `get(len - i)` for
/// `0 < i < len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    steps: Vec<Step>,
}

impl Path {
    pub fn new(steps: Vec<Step>) -> Result<Self, MdpError> {
        if steps.is_empty() {
            return Err(MdpError::EmptyPath);
        }
        Ok(Self { steps })
    }

    pub fn singleton(state: StateId, action: ActionId) -> Self {
        Self {
            steps: vec![Step::new(state, action)],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<Step> {
        self.steps
    }

    pub fn first(&self) -> Step {
        self.steps[0]
    }

    pub fn last(&self) -> Step {
        self.steps[self.steps.len() - 1]
    }

    /// Maps a signed position to a 0-based index into `steps`.
    pub fn resolve(&self, pos: i64) -> Option<usize> {
        let len = self.steps.len() as i64;
        let one_based = match pos {
            0 => len,
            p if p > 0 && p <= len => p,
            p if p < 0 && -p < len => len + p,
            _ => return None,
        };
        Some((one_based - 1) as usize)
    }

    /// The pair at a signed position, see the type-level docs.
    pub fn get(&self, pos: i64) -> Option<Step> {
        self.resolve(pos).map(|i| self.steps[i])
    }

    pub fn state_at(&self, pos: i64) -> Option<StateId> {
        self.get(pos).map(|s| s.state)
    }

    /// `τ[lo:hi]`, 1-based and inclusive.
    pub fn slice(&self, lo: usize, hi: usize) -> Option<&[Step]> {
        if lo == 0 || lo > hi || hi > self.steps.len() {
            return None;
        }
        Some(&self.steps[lo - 1..hi])
    }

    /// The suffix `τ[pos:]`.
    pub fn suffix(&self, pos: usize) -> Option<&[Step]> {
        self.slice(pos, self.steps.len())
    }

    /// The first `len` pairs as a new path.
    pub fn prefix(&self, len: usize) -> Option<Path> {
        if len == 0 || len > self.steps.len() {
            return None;
        }
        Some(Path {
            steps: self.steps[..len].to_vec(),
        })
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.steps.iter().map(|s| s.state)
    }
}

impl TryFrom<Vec<Step>> for Path {
    type Error = MdpError;

    fn try_from(steps: Vec<Step>) -> Result<Self, Self::Error> {
        Path::new(steps)
    }
}

/// Where a simulation starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    State(StateId),
    /// Draw the first state from the model's initial distribution.
    Init,
}

/// `P_I(s₁) · ∏ P(s_{i+1} | s_i, a_i)`. Undefined rows count as zero.
pub fn path_probability(mdp: &Mdp, path: &Path) -> f64 {
    let steps = path.steps();
    let mut p = mdp.init()[steps[0].state.0];
    for w in steps.windows(2) {
        p *= mdp.prob(w[0].state, w[0].action, w[1].state);
        if p == 0.0 {
            break;
        }
    }
    p
}

/// Draws an index from a categorical distribution by inverting its CDF.
/// Mass lost to rounding goes to the last index with positive probability.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Simulates `length` steps of `mdp` under `policy`.
pub fn simulate_path<R: Rng + ?Sized>(
    mdp: &Mdp,
    policy: &Policy,
    start: Start,
    length: usize,
    rng: &mut R,
) -> Result<Path, MdpError> {
    if length == 0 {
        return Err(MdpError::ZeroLength);
    }
    let mut state = match start {
        Start::State(s) => s,
        Start::Init => StateId(sample_categorical(mdp.init(), rng)),
    };
    let mut steps = Vec::with_capacity(length);
    for i in 0..length {
        let action = policy.action(state);
        steps.push(Step::new(state, action));
        if i + 1 == length {
            break;
        }
        let row = mdp
            .row(state, action)
            .ok_or(MdpError::UndefinedTransition { state, action })?;
        state = StateId(sample_categorical(row, rng));
    }
    Ok(Path { steps })
}
