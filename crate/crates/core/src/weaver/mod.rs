//! Two-stage Weaver image-selection converter.
//!
//! Signals are complex envelopes. The RF side of the chain is an envelope
//! centered on LO1 holding both mirror bands at `±lo2`; the IF side is the
//! complex baseband. Each mixer stage carries a static I/Q imbalance
//! expressed as a widely-linear map.

mod chain;
mod impairment;
mod irr;
mod topology;

pub use chain::{select_sideband, weaver_downconvert, weaver_upconvert, WeaverConfig};
pub use impairment::{Direction, IqImpairment, MixerStage, Sideband, WidelyLinear};
pub use irr::{analytic_irr, simulate_irr, IrrProbe, IRR_CAP_DB};
pub use topology::{
    combine_shared_if, count_components, split_shared_if, ComponentCount, SharedIfTopology, Topology,
};
