use thiserror::Error;

use crate::time::TimeUnits;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid time literal {0:?}")]
    Time(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("invalid trip: {0}")]
    Trip(String),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("invalid failure scenario: {0}")]
    Scenario(String),

    #[error("vehicle already idle at t = {t} (route completes at {completion})")]
    VehicleIdle { t: TimeUnits, completion: TimeUnits },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("cannot create failure scenario: {0}")]
    CannotCreateScenario(String),

    #[error("unassignable failed trip {trip}: no feasible bid at maximum radius {radius}")]
    UnassignableTrip { trip: String, radius: TimeUnits },

    #[error("all vehicles failed; no vehicle left to absorb failed trips")]
    AllVehiclesFailed,

    #[error("oracle out of budget: {0}")]
    OracleBudget(String),

    #[error("subtour enumeration bound exceeded: {non_depots} non-depot nodes (limit {limit})")]
    SubtourBound { non_depots: usize, limit: usize },

    #[error("undefined ratio: {0}")]
    ZeroDenominator(&'static str),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
