//! MDP data model, paths, policies, the grid-world benchmark and
//! reach-avoid policy synthesis.

mod gridworld;
mod model;
mod path;
mod policy;
mod value_iteration;

pub use gridworld::{build_gridworld, Cell, GridConfig, GridWorld, Move, TARGET_LABEL, UNSAFE_LABEL};
pub use model::{validate_mdp, ActionId, Mdp, MdpError, StateId, Violation};
pub use path::{path_probability, sample_categorical, simulate_path, Path, Start, Step};
pub use policy::{compose_segment_policy, Policy, PolicyRegistry, Segment};
pub use value_iteration::{reach_avoid_probability, reach_avoid_values, value_iteration_reach_avoid};
