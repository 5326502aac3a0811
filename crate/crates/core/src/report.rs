//! JSON shapes shared by the command-line tool and the browser demo.

use serde::{Deserialize, Serialize};

use crate::semantics::{EvalReport, Mode, Snapshot};
use crate::state::{RegisterLayout, StateEntry};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub schema_version: String,
    pub mode: Mode,
    pub iterations: usize,
    pub converged: bool,
    pub terminated_mass: f64,
    pub running_mass: f64,
    pub ancillas_used: usize,
    pub increments: Vec<f64>,
    pub notes: Vec<String>,
    pub state: Vec<StateEntry>,
}

impl RunOutput {
    pub fn new(report: &EvalReport, mode: Mode, layout: &RegisterLayout) -> Self {
        RunOutput {
            schema_version: SCHEMA_VERSION.into(),
            mode,
            iterations: report.iterations_run,
            converged: report.converged,
            terminated_mass: report.terminated_mass,
            running_mass: report.running_mass,
            ancillas_used: report.ancillas_used,
            increments: report.increments.clone(),
            notes: report.notes.clone(),
            state: report.final_state.dump(layout),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub label: String,
    pub loop_index: usize,
    pub iteration: usize,
    pub norm_sqr: f64,
    pub state: Vec<StateEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOutput {
    pub schema_version: String,
    pub mode: Mode,
    pub steps: Vec<TraceStep>,
}

impl TraceOutput {
    pub fn new(mode: Mode, snapshots: &[Snapshot], layout: &RegisterLayout) -> Self {
        TraceOutput {
            schema_version: SCHEMA_VERSION.into(),
            mode,
            steps: snapshots
                .iter()
                .map(|s| TraceStep {
                    label: s.label.clone(),
                    loop_index: s.loop_index,
                    iteration: s.iteration,
                    norm_sqr: s.state.norm_sqr(),
                    state: s.state.dump(layout),
                })
                .collect(),
        }
    }
}
