//! The report document and its per-command result sections.

use serde::{Deserialize, Serialize};
use weaversim_core::array::BeamReport;
use weaversim_core::budget::Table1Figures;
use weaversim_core::link::{FlatnessFit, LinkReport};
use weaversim_core::plan::{Architecture, LoPlan};
use weaversim_core::weaver::{MixerStage, Sideband};

use crate::scenario_file::ScenarioFile;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "weaversim";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self {
            name: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub seed: u64,
    /// The scenario as run, with the effective seed.
    pub scenario: ScenarioFile,
    #[serde(flatten)]
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "results", rename_all = "snake_case")]
pub enum Body {
    Plan(PlanResults),
    Irr(IrrResults),
    Beam(BeamResults),
    Link(LinkResults),
    Budget(BudgetResults),
}

impl Body {
    pub fn command(&self) -> &'static str {
        match self {
            Body::Plan(_) => "plan",
            Body::Irr(_) => "irr",
            Body::Beam(_) => "beam",
            Body::Link(_) => "link",
            Body::Budget(_) => "budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureRow {
    pub architecture: Architecture,
    pub tuning_range: f64,
    pub fbw: f64,
    pub lo1_range: (f64, f64),
    pub lo2_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResults {
    pub architectures: Vec<ArchitectureRow>,
    /// Weaver plan at the mirror IF.
    pub weaver: Option<LoPlan>,
    /// Least-FBW Weaver plan under the scenario's constraints.
    pub optimized: Option<LoPlan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrPoint {
    pub gain_imbalance_db: f64,
    pub phase_imbalance_deg: f64,
    pub analytic_db: f64,
    pub simulated_db: f64,
    pub delta_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrResults {
    pub sideband: Sideband,
    pub stage: MixerStage,
    pub grid: bool,
    pub points: Vec<IrrPoint>,
    pub max_abs_delta_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPointing {
    pub report: BeamReport,
    pub pointing_error_deg: f64,
    /// Coherent gain at the achieved peak, 20·log10 |AF|, dB.
    pub array_gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamResults {
    pub n_elements: usize,
    pub phase_states: u32,
    pub beams: Vec<BeamPointing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResults {
    /// Set when the IF droop knob was fitted for this run.
    pub calibration: Option<FlatnessFit>,
    pub gain_flatness_db: f64,
    pub link: LinkReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_elements: usize,
    pub eirp_dbm: f64,
    pub eirp_over_pdc_percent: f64,
    pub element_efficiency_percent: f64,
    /// EIRP change from the previous row, dB.
    pub eirp_step_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetResults {
    pub table1: Table1Figures,
    pub fspl_db: f64,
    pub noise_floor_dbm: f64,
    pub rx_snr_db: f64,
    pub scaling: Vec<ScalingRow>,
}

impl Report {
    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}
