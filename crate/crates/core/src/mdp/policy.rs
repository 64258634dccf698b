use std::collections::{BTreeMap, HashSet};

use super::model::{ActionId, Mdp, MdpError, StateId};
use super::path::Path;

/// A deterministic, stationary policy: one action per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    table: Vec<ActionId>,
}

impl Policy {
    pub fn new(table: Vec<ActionId>) -> Self {
        Self { table }
    }

    pub fn constant(num_states: usize, action: ActionId) -> Self {
        Self {
            table: vec![action; num_states],
        }
    }

    pub fn from_fn(num_states: usize, f: impl FnMut(StateId) -> ActionId) -> Self {
        Self {
            table: (0..num_states).map(StateId).map(f).collect(),
        }
    }

    pub fn action(&self, s: StateId) -> ActionId {
        self.table[s.0]
    }

    pub fn table(&self) -> &[ActionId] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Checks the policy is total over the states of `mdp` and only uses
    /// declared actions.
    pub fn check_against(&self, mdp: &Mdp) -> Result<(), MdpError> {
        if self.table.len() != mdp.num_states() {
            return Err(MdpError::PolicySize {
                expected: mdp.num_states(),
                found: self.table.len(),
            });
        }
        for (i, a) in self.table.iter().enumerate() {
            if a.0 >= mdp.num_actions() {
                return Err(MdpError::PolicyAction {
                    state: StateId(i),
                    action: *a,
                });
            }
        }
        Ok(())
    }
}

/// Named policies a model file or formula can refer to.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolicyRegistry {
    policies: BTreeMap<String, Policy>,
}

impl PolicyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, policy: Policy) -> Option<Policy> {
        self.policies.insert(name.into(), policy)
    }

    pub fn get(&self, name: &str) -> Option<&Policy> {
        self.policies.get(name)
    }

    pub fn names(&self) -> Vec<String> {
        self.policies.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Policy)> {
        self.policies.iter()
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }
}

/// A policy applied on the states visited by `observed[lo:hi]`
/// (1-based, inclusive).
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub policy: &'a Policy,
    pub lo: usize,
    pub hi: usize,
}

/// Builds the stationary policy that follows `segments[k].policy` on the
/// states of the k-th segment of `observed` and `base` elsewhere. When a
/// state lies in several segments the last one listed wins.
pub fn compose_segment_policy(
    base: &Policy,
    observed: &Path,
    segments: &[Segment<'_>],
) -> Result<Policy, MdpError> {
    let mut table = base.table.clone();
    for seg in segments {
        let slice = observed.slice(seg.lo, seg.hi).ok_or_else(|| {
            MdpError::OutOfRange(format!(
                "segment [{}:{}] of a path of length {}",
                seg.lo,
                seg.hi,
                observed.len()
            ))
        })?;
        let states: HashSet<StateId> = slice.iter().map(|s| s.state).collect();
        for s in states {
            table[s.0] = seg.policy.action(s);
        }
    }
    Ok(Policy { table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Step;

    fn path(states: &[usize]) -> Path {
        Path::new(states.iter().map(|&s| Step::new(StateId(s), ActionId(0))).collect()).unwrap()
    }

    #[test]
    fn no_segments_returns_base() {
        let base = Policy::constant(4, ActionId(0));
        let out = compose_segment_policy(&base, &path(&[0, 1]), &[]).unwrap();
        assert_eq!(out, base);
    }

    #[test]
    fn single_segment_overrides_its_states() {
        let base = Policy::constant(4, ActionId(0));
        let alt = Policy::constant(4, ActionId(2));
        let seg = Segment { policy: &alt, lo: 2, hi: 2 };
        let out = compose_segment_policy(&base, &path(&[0, 3, 1]), &[seg]).unwrap();
        assert_eq!(out.table(), &[ActionId(0), ActionId(0), ActionId(0), ActionId(2)]);
    }

    #[test]
    fn later_segment_takes_precedence() {
        let base = Policy::constant(3, ActionId(0));
        let p1 = Policy::constant(3, ActionId(1));
        let p2 = Policy::constant(3, ActionId(2));
        let observed = path(&[0, 1, 2]);
        let segs = [
            Segment { policy: &p1, lo: 1, hi: 2 },
            Segment { policy: &p2, lo: 2, hi: 3 },
        ];
        let out = compose_segment_policy(&base, &observed, &segs).unwrap();
        assert_eq!(out.table(), &[ActionId(1), ActionId(2), ActionId(2)]);
    }

    #[test]
    fn out_of_range_segment_is_an_error() {
        let base = Policy::constant(3, ActionId(0));
        let seg = Segment { policy: &base, lo: 1, hi: 9 };
        assert!(compose_segment_policy(&base, &path(&[0]), &[seg]).is_err());
    }

    #[test]
    fn registry_lists_names_sorted() {
        let mut reg = PolicyRegistry::new();
        reg.insert("rand", Policy::constant(1, ActionId(0)));
        reg.insert("opt", Policy::constant(1, ActionId(0)));
        assert_eq!(reg.names(), vec!["opt".to_string(), "rand".to_string()]);
    }
}
