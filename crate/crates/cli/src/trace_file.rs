//! JSON trace files: a generating policy name plus named state-action steps.
//! A file holds either one trace object or an array of them.

use std::path::Path as FsPath;

use cfcheck_core::mdp::Step;
use cfcheck_core::{Mdp, Path};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub state: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFile {
    pub policy: String,
    pub steps: Vec<TraceStep>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(TraceFile),
    Many(Vec<TraceFile>),
}

impl TraceFile {
    pub fn from_path(policy: &str, path: &Path, mdp: &Mdp) -> Self {
        Self {
            policy: policy.to_string(),
            steps: path
                .steps()
                .iter()
                .map(|s| TraceStep {
                    state: mdp.state_name(s.state).to_string(),
                    action: mdp.action_name(s.action).to_string(),
                })
                .collect(),
        }
    }

    pub fn to_path(&self, mdp: &Mdp) -> Result<Path, CliError> {
        let steps = self
            .steps
            .iter()
            .map(|s| Ok(Step::new(mdp.state_id(&s.state)?, mdp.action_id(&s.action)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Path::new(steps)?)
    }
}

pub fn parse_traces(text: &str, origin: &str) -> Result<Vec<TraceFile>, CliError> {
    match serde_json::from_str(text) {
        Ok(OneOrMany::One(t)) => Ok(vec![t]),
        Ok(OneOrMany::Many(v)) => Ok(v),
        Err(e) => Err(CliError::Format { path: origin.to_string(), message: format!("not a trace file: {e}") }),
    }
}

pub fn load_traces(path: &FsPath) -> Result<Vec<TraceFile>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_traces(&text, &path.display().to_string())
}
