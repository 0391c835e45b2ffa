//! Ground truth for desk-scale instances: an exhaustive optimum and a writer
//! for the mixed-integer model.

pub mod milp;
pub mod oracle;

pub use milp::{emit_milp, MilpModel, SUBTOUR_NODE_LIMIT};
pub use oracle::{exact_optimum, OracleLimits, OracleResult, OracleStats};
