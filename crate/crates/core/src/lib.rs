//! Mobile charger scheduling for rechargeable sensor fields with per-node
//! charging deadlines.
//!
//! The planner discretizes the field into cells with a bounded power error
//! ([`discretize`]), picks one stop cell per time slot with a greedy that is a
//! ½-approximation for the travel-free problem ([`greedy`]), then turns the
//! stop sequence into a short closed tour and cuts it to the deadline budget
//! ([`path`]). [`baselines`] holds the comparison schedulers, [`oracle`] the
//! brute-force references used in tests, and [`harness`] the scenario
//! generator and experiment sweeps behind the `more-sched` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod checks;
pub mod discretize;
pub mod error;
pub mod geometry;
pub mod greedy;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod path;

pub use crate::discretize::{GridCell, GridMap, SlotPlan};
pub use crate::error::{Result, SchedError};
pub use crate::geometry::{Point, Rect};
pub use crate::greedy::{Assignment, Edge, ScheduleResult};
pub use crate::harness::{ExperimentConfig, ExperimentRecord, ScenarioParams, Scheme, Sweep};
pub use crate::model::{ChargerSpec, Scenario, SensorNode, StopRecord};
pub use crate::path::{BudgetAccounting, TourPlan};
