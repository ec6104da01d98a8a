//! Cold-start rightsizing of a cluster for time-limited tasks.
//!
//! Given tasks with multi-dimensional demands and active time spans, and a
//! catalogue of node-types with capacities and prices, pick a multiset of
//! nodes of minimum total cost and place every task so that no node exceeds
//! its capacity in any dimension at any time slot.

pub mod bench;
pub mod costs;
pub mod error;
pub mod ingest;
pub mod lp;
pub mod model;
pub mod oracle;
pub mod penmap;
pub mod placement;

pub use error::{Error, Result};
pub use model::{Instance, Node, NodeType, Solution, Task};
