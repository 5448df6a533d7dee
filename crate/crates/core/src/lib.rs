//! Design-space exploration for in-memory-computing accelerators.
//!
//! A [`problem::Problem`] couples a [`space::SearchSpace`], a set of
//! [`workload::Workload`]s and an [`objective::ObjectiveSpec`]. The
//! [`engine`] searches it; [`oracle`] enumerates small spaces exhaustively
//! and [`pareto`] extracts EDAP-versus-cost fronts.

pub mod config;
pub mod diversity;
pub mod engine;
pub mod error;
pub mod evaluator;
pub mod experiments;
pub mod objective;
pub mod operators;
pub mod oracle;
pub mod pareto;
pub mod problem;
pub mod report;
pub mod space;
pub mod tech;
pub mod workload;

pub use engine::{Experiment, RunResult, Strategy};
pub use error::{DseError, Result};
pub use objective::{Aggregation, ObjectiveSpec};
pub use problem::Problem;
pub use space::{DesignPoint, SearchSpace, SystemMode};
pub use workload::Workload;
