//! Versioned JSON scenario files.
//!
//! Units are fixed: Hz, dBm, mW, dB and degrees. Every section is optional
//! except `schema_version`; unknown keys are rejected at every level.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use weaversim_core::array::{ArrayGeometry, PhaseShifterModel, DEFAULT_GRID_STEP_DEG};
use weaversim_core::budget::{BudgetScenario, LinkBudgetInput};
use weaversim_core::link::{
    CalibrationConfig, ChainConfig, Channel, ImpairmentSet, Modulation, PulseConfig, Scenario, PPF_GAIN_DB, PPF_PHASE_DEG,
};
use weaversim_core::plan::{BandPlan, PlanConstraints};
use weaversim_core::weaver::{IrrProbe, MixerStage};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemaVersionError {
    pub found: u32,
}

impl std::fmt::Display for SchemaVersionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unsupported schema_version {} (this tool reads {SCHEMA_VERSION})", self.found)
    }
}

impl std::error::Error for SchemaVersionError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrrSettings {
    /// Mixer stage the probed imbalance is placed on.
    #[serde(default = "default_irr_stage")]
    pub stage: MixerStage,
    /// Single operating point evaluated without `--grid`: (dB, degrees).
    #[serde(default = "default_irr_point")]
    pub point: (f64, f64),
    #[serde(default = "default_grid_gain")]
    pub grid_gain_db: Vec<f64>,
    #[serde(default = "default_grid_phase")]
    pub grid_phase_deg: Vec<f64>,
    #[serde(default)]
    pub probe: IrrProbe,
}

fn default_irr_stage() -> MixerStage {
    MixerStage::If
}

fn default_irr_point() -> (f64, f64) {
    (PPF_GAIN_DB, PPF_PHASE_DEG)
}

fn default_grid_gain() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}

fn default_grid_phase() -> Vec<f64> {
    vec![0.5, 1.0, 2.5, 5.0]
}

impl Default for IrrSettings {
    fn default() -> Self {
        Self {
            stage: default_irr_stage(),
            point: default_irr_point(),
            grid_gain_db: default_grid_gain(),
            grid_phase_deg: default_grid_phase(),
            probe: IrrProbe::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSettings {
    /// Pattern sampling step, degrees.
    #[serde(default = "default_beam_step")]
    pub grid_step_deg: f64,
}

fn default_beam_step() -> f64 {
    2.0 * DEFAULT_GRID_STEP_DEG
}

impl Default for BeamSettings {
    fn default() -> Self {
        Self {
            grid_step_deg: default_beam_step(),
        }
    }
}

/// Target of `link --calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSettings {
    /// QAM order of the modulation whose EVM is pinned.
    pub modulation_order: usize,
    pub target_evm_db: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self {
            modulation_order: 64,
            target_evm_db: -24.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub band_plan: BandPlan,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub impairments: ImpairmentSet,
    #[serde(default)]
    pub array: ArrayGeometry,
    #[serde(default)]
    pub phase_shifter: PhaseShifterModel,
    #[serde(default)]
    pub steer_deg: f64,
    #[serde(default)]
    pub budget: BudgetScenario,
    #[serde(default)]
    pub link_budget: LinkBudgetInput,
    #[serde(default)]
    pub channel: Channel,
    #[serde(default = "default_modulations")]
    pub modulations: Vec<Modulation>,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub plan: PlanConstraints,
    #[serde(default)]
    pub irr: IrrSettings,
    #[serde(default)]
    pub beam: BeamSettings,
    #[serde(default)]
    pub fit: FitSettings,
}

fn default_modulations() -> Vec<Modulation> {
    Scenario::default().modulations
}

impl Default for ScenarioFile {
    fn default() -> Self {
        Self::from_scenario(Scenario::default())
    }
}

impl ScenarioFile {
    pub fn from_scenario(s: Scenario) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: s.seed,
            band_plan: s.band_plan,
            chain: s.chain,
            impairments: s.impairments,
            array: s.array,
            phase_shifter: s.phase_shifter,
            steer_deg: s.steer_deg,
            budget: s.budget,
            link_budget: s.link_budget,
            channel: s.channel,
            modulations: s.modulations,
            pulse: s.pulse,
            calibration: s.calibration,
            plan: PlanConstraints::default(),
            irr: IrrSettings::default(),
            beam: BeamSettings::default(),
            fit: FitSettings::default(),
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            seed: self.seed,
            band_plan: self.band_plan,
            chain: self.chain,
            impairments: self.impairments.clone(),
            array: self.array,
            phase_shifter: self.phase_shifter.clone(),
            steer_deg: self.steer_deg,
            budget: self.budget,
            link_budget: self.link_budget,
            channel: self.channel,
            modulations: self.modulations.clone(),
            pulse: self.pulse,
            calibration: self.calibration,
        }
    }

    /// Parses and schema-checks a scenario document. Syntax and schema
    /// errors carry the line and column of the offending token.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(SchemaVersionError {
                found: file.schema_version,
            }
            .into());
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }
}
