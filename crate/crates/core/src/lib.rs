//! Simulation and analysis toolkit for a scalable E-band phased-array
//! transceiver built around a shared-IF Weaver image-selection converter.
//!
//! The crate covers frequency planning, the two-stage Weaver chain with I/Q
//! impairments, the LO-steered array, power/link budgets, and an end-to-end
//! QAM link simulation measured by EVM.

pub mod array;
pub mod budget;
pub mod error;
pub mod link;
pub mod plan;
pub mod rng;
pub mod sigproc;
pub mod weaver;

pub use array::{ArrayGeometry, BeamReport, Pattern, PhaseShifterModel};
pub use budget::{BudgetScenario, LinkBudgetInput, PowerBudget, Table1Figures};
pub use error::{BindingConstraint, Error, Result, Stage};
pub use link::{LinkReport, Scenario};
pub use plan::{Architecture, BandPlan, LoPlan, PlanConstraints};
pub use sigproc::{ComplexSignal, EvmResult, PulseShape, QamConstellation};
pub use weaver::{Direction, IqImpairment, MixerStage, Sideband, WeaverConfig};
