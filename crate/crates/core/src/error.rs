use thiserror::Error;

/// Every failure the solvers, loaders and harness can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A task that cannot be hosted alone by any node-type the solver may use.
    #[error("task {task} is infeasible: {reason}")]
    InfeasibleTask { task: String, reason: String },

    /// A solution that references tasks or node-types absent from the instance.
    #[error("malformed solution: {0}")]
    Structural(String),

    #[error("timeslot {slot} outside horizon [1, {horizon}]")]
    SlotOutOfHorizon { slot: u32, horizon: u32 },

    #[error("LP solver failure: {0}")]
    Solver(String),

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error in {source_name} at line {line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
