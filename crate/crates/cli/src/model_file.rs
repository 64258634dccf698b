//! JSON model files.
//!
//! Two layouts are accepted. The explicit one lists states, actions and
//! sparse transition rows by name:
//!
//! ```json
//! {
//!   "states": ["s0", "s1"],
//!   "actions": ["go"],
//!   "transitions": { "s0": { "go": { "s0": 0.5, "s1": 0.5 } }, "s1": { "go": { "s1": 1.0 } } },
//!   "init": { "s0": 1.0 },
//!   "rewards": { "s1": { "go": 1.0 } },
//!   "labels": { "s1": ["goal"] },
//!   "policies": { "pi": { "s0": "go", "s1": "go" } }
//! }
//! ```
//!
//! The grid layout names a grid world instead, either `"benchmark"` or a
//! full configuration, and may give policies as rows of arrows:
//!
//! ```json
//! { "gridworld": "benchmark", "policies": { "mine": ["RRRD", "RD*D", "RRDD", "RRR*"] } }
//! ```
//!
//! On the benchmark layout the fixture policies `opt` and `rand` are
//! registered unless the file defines those names itself.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use cfcheck_core::mdp::{build_gridworld, GridConfig, GridWorld};
use cfcheck_core::{ActionId, Mdp, Policy, PolicyRegistry};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicySpec {
    /// One string per grid row, see `GridWorld::policy_from_arrows`.
    Arrows(Vec<String>),
    /// State name to action name, total over the states.
    Table(BTreeMap<String, String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Named(String),
    Config(GridConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub gridworld: GridSpec,
    #[serde(default)]
    pub policies: BTreeMap<String, PolicySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitFile {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub transitions: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
    #[serde(default)]
    pub init: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub rewards: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
    /// Extra propositions that label no state.
    #[serde(default)]
    pub propositions: Vec<String>,
    #[serde(default)]
    pub policies: BTreeMap<String, PolicySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelFile {
    Grid(GridFile),
    Explicit(ExplicitFile),
}

/// A validated model with its named policies.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub mdp: Mdp,
    pub registry: PolicyRegistry,
    /// Present for grid-world files.
    pub grid: Option<GridWorld>,
}

impl LoadedModel {
    pub fn policy(&self, name: &str) -> Result<&Policy, CliError> {
        self.registry.get(name).ok_or_else(|| {
            CliError::Usage(format!("unknown policy '{name}' (known: {})", self.registry.names().join(", ")))
        })
    }

    pub fn from_grid(world: GridWorld) -> Result<Self, CliError> {
        GridFile { gridworld: GridSpec::Config(world.config.clone()), policies: BTreeMap::new() }.load()
    }
}

impl GridFile {
    fn load(&self) -> Result<LoadedModel, CliError> {
        let cfg = match &self.gridworld {
            GridSpec::Named(n) if n == "benchmark" => GridConfig::benchmark(),
            GridSpec::Named(n) => return Err(CliError::Model(format!("unknown grid world '{n}'"))),
            GridSpec::Config(c) => c.clone(),
        };
        let world = build_gridworld(&cfg)?;
        let mut registry = PolicyRegistry::new();
        if cfg.is_benchmark_layout() {
            registry.insert("opt", world.optimal_policy()?);
            registry.insert("rand", world.random_policy()?);
        }
        for (name, spec) in &self.policies {
            let p = match spec {
                PolicySpec::Arrows(rows) => {
                    world.policy_from_arrows(&rows.iter().map(String::as_str).collect::<Vec<_>>())?
                }
                PolicySpec::Table(t) => table_policy(&world.mdp, name, t)?,
            };
            registry.insert(name.clone(), p);
        }
        Ok(LoadedModel { mdp: world.mdp.clone().validated()?, registry, grid: Some(world) })
    }
}

fn table_policy(mdp: &Mdp, name: &str, table: &BTreeMap<String, String>) -> Result<Policy, CliError> {
    let mut actions: Vec<Option<ActionId>> = vec![None; mdp.num_states()];
    for (s, a) in table {
        actions[mdp.state_id(s)?.0] = Some(mdp.action_id(a)?);
    }
    let missing: Vec<&str> =
        mdp.states().filter(|s| actions[s.0].is_none()).map(|s| mdp.state_name(s)).collect();
    if !missing.is_empty() {
        return Err(CliError::Model(format!("policy '{name}' has no action for {}", missing.join(", "))));
    }
    Ok(Policy::new(actions.into_iter().flatten().collect()))
}

impl ExplicitFile {
    fn load(&self) -> Result<LoadedModel, CliError> {
        let mut mdp = Mdp::new(self.states.clone(), self.actions.clone())?;
        for (s, by_action) in &self.transitions {
            let s = mdp.state_id(s)?;
            for (a, row) in by_action {
                let a = mdp.action_id(a)?;
                let entries = row
                    .iter()
                    .map(|(t, p)| Ok((mdp.state_id(t)?, *p)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                mdp.set_transition_sparse(s, a, &entries)?;
            }
        }
        if let Some(init) = &self.init {
            let mut dense = vec![0.0; mdp.num_states()];
            for (s, p) in init {
                dense[mdp.state_id(s)?.0] += p;
            }
            mdp.set_init(dense)?;
        }
        for (s, by_action) in &self.rewards {
            let s = mdp.state_id(s)?;
            for (a, r) in by_action {
                let a = mdp.action_id(a)?;
                mdp.set_reward(s, a, *r)?;
            }
        }
        for p in &self.propositions {
            mdp.declare_proposition(p);
        }
        for (s, props) in &self.labels {
            let s = mdp.state_id(s)?;
            for p in props {
                mdp.declare_proposition(p);
                mdp.add_label(s, p)?;
            }
        }
        let mdp = mdp.validated()?;
        let mut registry = PolicyRegistry::new();
        for (name, spec) in &self.policies {
            let p = match spec {
                PolicySpec::Table(t) => table_policy(&mdp, name, t)?,
                PolicySpec::Arrows(_) => {
                    return Err(CliError::Model(format!("policy '{name}': arrow maps need a grid world")))
                }
            };
            registry.insert(name.clone(), p);
        }
        Ok(LoadedModel { mdp, registry, grid: None })
    }
}

impl ModelFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Format {
            path: origin.to_string(),
            message: format!("not a model file: {e}"),
        })
    }

    pub fn load(&self) -> Result<LoadedModel, CliError> {
        let loaded = match self {
            ModelFile::Grid(g) => g.load()?,
            ModelFile::Explicit(e) => e.load()?,
        };
        for (name, p) in loaded.registry.iter() {
            p.check_against(&loaded.mdp).map_err(|e| CliError::Model(format!("policy '{name}': {e}")))?;
        }
        Ok(loaded)
    }
}

pub fn load_model(path: &FsPath) -> Result<LoadedModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ModelFile::parse(&text, &path.display().to_string())?.load()
}
