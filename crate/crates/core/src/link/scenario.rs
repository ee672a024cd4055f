use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, PhaseShifterModel};
use crate::budget::{BudgetScenario, LinkBudgetInput};
use crate::error::{Error, Result};
use crate::plan::BandPlan;
use crate::sigproc::QamConstellation;
use crate::weaver::{Direction, IqImpairment, MixerStage, Sideband, WeaverConfig};

/// Weaver chain settings shared by the TX and RX paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub lo1: f64,
    pub lo2: f64,
    pub if1_band: (f64, f64),
    /// Band the link is calibrated in.
    pub sideband: Sideband,
    #[serde(default)]
    pub conversion_gain_db: f64,
    /// IF conversion-gain droop at the band edges, dB.
    #[serde(default)]
    pub gain_flatness_db: f64,
    #[serde(default = "default_if1_guard")]
    pub max_if1_bandwidth: f64,
}

fn default_if1_guard() -> f64 {
    3e9
}

impl Default for ChainConfig {
    fn default() -> Self {
        let w = WeaverConfig::e_band(Direction::Tx);
        Self {
            lo1: w.lo1,
            lo2: w.lo2,
            if1_band: w.if1_band,
            sideband: w.sideband,
            conversion_gain_db: 0.0,
            gain_flatness_db: 0.0,
            max_if1_bandwidth: w.max_if1_bandwidth,
        }
    }
}

impl ChainConfig {
    pub fn weaver(&self, direction: Direction, sideband: Sideband) -> WeaverConfig {
        WeaverConfig {
            lo1: self.lo1,
            lo2: self.lo2,
            sideband,
            direction,
            if1_band: self.if1_band,
            conversion_gain_db: self.conversion_gain_db,
            gain_flatness_db: self.gain_flatness_db,
            max_if1_bandwidth: self.max_if1_bandwidth,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpairmentSet {
    #[serde(default)]
    pub tx: Vec<IqImpairment>,
    #[serde(default)]
    pub rx: Vec<IqImpairment>,
}

impl ImpairmentSet {
    pub fn is_empty(&self) -> bool {
        self.tx.is_empty() && self.rx.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum Channel {
    /// SNR from the link budget at the band carrier, including the array's
    /// pointing loss.
    Fspl {},
    /// Fixed symbol SNR, dB.
    Snr { snr_db: f64 },
    Noiseless {},
}

impl Default for Channel {
    fn default() -> Self {
        Channel::Fspl {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modulation {
    pub order: usize,
    /// Symbols per second.
    pub symbol_rate: f64,
    #[serde(default = "default_symbols")]
    pub n_symbols: usize,
}

fn default_symbols() -> usize {
    20_000
}

impl Modulation {
    pub fn new(order: usize, symbol_rate: f64) -> Self {
        Self {
            order,
            symbol_rate,
            n_symbols: default_symbols(),
        }
    }

    pub fn bit_rate(&self) -> f64 {
        self.symbol_rate * (self.order as f64).log2()
    }

    pub fn label(&self) -> String {
        format!("{}-QAM", self.order)
    }
}

fn default_modulations() -> Vec<Modulation> {
    vec![Modulation::new(16, 2e9), Modulation::new(64, 1.5e9)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub rolloff: f64,
    pub span_symbols: usize,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            rolloff: 0.35,
            span_symbols: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Length of the training burst used to estimate the complex gain.
    pub training_symbols: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self { training_symbols: 4096 }
    }
}

/// Complete description of one link experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
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
    /// Commanded beam angle, degrees.
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
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: 0,
            band_plan: BandPlan::default(),
            chain: ChainConfig::default(),
            impairments: ImpairmentSet::default(),
            array: ArrayGeometry::default(),
            phase_shifter: PhaseShifterModel::default(),
            steer_deg: 0.0,
            budget: BudgetScenario::default(),
            link_budget: LinkBudgetInput::default(),
            channel: Channel::default(),
            modulations: default_modulations(),
            pulse: PulseConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

/// Worst-case quadrature mismatch quoted for the polyphase filters.
pub const PPF_GAIN_DB: f64 = 1.0;
pub const PPF_PHASE_DEG: f64 = 2.5;

impl Scenario {
    /// Bench scenario with the worst-case mismatch budget: every mixer stage
    /// of both chains at ±1 dB / ±2.5°, and the LO feed-network differential
    /// mismatch on the upper-band path only. The IF droop knob is left at 0
    /// for [`fit_flatness`](super::fit_flatness) to set.
    pub fn worst_case_budget() -> Self {
        let stage = |s| IqImpairment::new(PPF_GAIN_DB, PPF_PHASE_DEG, s).expect("within guard");
        let feed = IqImpairment::new(0.02, 0.5, MixerStage::If)
            .expect("within guard")
            .only_on(Sideband::Usb);
        let chain = vec![stage(MixerStage::Rf), stage(MixerStage::If), feed];
        Self {
            impairments: ImpairmentSet {
                tx: chain.clone(),
                rx: chain,
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.band_plan.validate()?;
        for sb in [Sideband::Lsb, Sideband::Usb] {
            let w = self.chain.weaver(Direction::Tx, sb);
            w.validate()?;
            let rf = w.rf_center();
            let band = match sb {
                Sideband::Lsb => self.band_plan.lower_band,
                Sideband::Usb => self.band_plan.upper_band,
            };
            if !(rf >= band.0 && rf <= band.1) {
                return Err(Error::param(
                    "chain",
                    format!("{sb:?} center {rf:e} Hz lies outside its band of the plan"),
                ));
            }
        }
        for imp in self.impairments.tx.iter().chain(&self.impairments.rx) {
            imp.validate()?;
        }
        self.array.validate()?;
        self.phase_shifter.validate()?;
        if !(self.steer_deg.abs() < 90.0) {
            return Err(Error::param("steer_deg", "must lie inside ±90°"));
        }
        self.link_budget.validate()?;
        if let Channel::Snr { snr_db } = self.channel {
            if snr_db.is_nan() {
                return Err(Error::param("channel.snr_db", "is NaN"));
            }
        }
        if self.modulations.is_empty() {
            return Err(Error::param("modulations", "list is empty"));
        }
        let if_width = self.chain.if1_band.1 - self.chain.if1_band.0;
        for m in &self.modulations {
            QamConstellation::new(m.order)?;
            if !(m.symbol_rate > 0.0) || m.n_symbols == 0 {
                return Err(Error::param("modulation", "needs a positive symbol rate and symbol count"));
            }
            let occupied = m.symbol_rate * (1.0 + self.pulse.rolloff);
            if occupied > if_width {
                return Err(Error::param(
                    "modulation",
                    format!("{} at {:e} Bd occupies {occupied:e} Hz, beyond the {if_width:e} Hz IF", m.label(), m.symbol_rate),
                ));
            }
        }
        if self.calibration.training_symbols < 64 {
            return Err(Error::param("calibration.training_symbols", "need at least 64"));
        }
        Ok(())
    }
}
