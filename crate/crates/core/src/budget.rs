//! DC power, efficiency and link-budget arithmetic.

use serde::{Deserialize, Serialize};

use crate::array::eirp;
use crate::error::{Error, Result};
use crate::weaver::{count_components, ComponentCount, Topology};

/// Thermal noise density at 290 K, dBm/Hz.
pub const NOISE_DENSITY_DBM_HZ: f64 = -174.0;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerBudget {
    /// mW per element.
    pub pdc_tx_per_element: f64,
    /// mW per element.
    pub pdc_rx_per_element: f64,
    pub n_elements: usize,
    /// LO distribution and other shared consumption, mW.
    #[serde(default)]
    pub shared_overhead: f64,
}

impl Default for PowerBudget {
    fn default() -> Self {
        Self {
            pdc_tx_per_element: 250.0,
            pdc_rx_per_element: 160.0,
            n_elements: 16,
            shared_overhead: 0.0,
        }
    }
}

impl PowerBudget {
    pub fn validate(&self) -> Result<()> {
        if self.n_elements == 0 {
            return Err(Error::param("n_elements", "need at least one element"));
        }
        let all = [self.pdc_tx_per_element, self.pdc_rx_per_element, self.shared_overhead];
        if !all.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            return Err(Error::param("power budget", "consumption figures must be finite and non-negative"));
        }
        Ok(())
    }

    /// Total TX-mode consumption, W.
    pub fn pdc_tx_total_w(&self) -> f64 {
        (self.n_elements as f64 * self.pdc_tx_per_element + self.shared_overhead) / 1000.0
    }

    /// Total RX-mode consumption, W.
    pub fn pdc_rx_total_w(&self) -> f64 {
        (self.n_elements as f64 * self.pdc_rx_per_element + self.shared_overhead) / 1000.0
    }
}

/// Radiated power over TX DC power, percent.
pub fn eirp_over_pdc(eirp_dbm: f64, budget: &PowerBudget) -> Result<f64> {
    budget.validate()?;
    let pdc = budget.pdc_tx_total_w();
    if pdc <= 0.0 {
        return Err(Error::param("power budget", "total TX consumption is zero"));
    }
    if eirp_dbm == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok(100.0 * 10f64.powf((eirp_dbm - 30.0) / 10.0) / pdc)
}

/// Free-space path loss, dB.
pub fn fspl(carrier: f64, distance: f64) -> Result<f64> {
    if !(carrier > 0.0 && distance > 0.0) {
        return Err(Error::param("fspl", "carrier and distance must be positive"));
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance * carrier / SPEED_OF_LIGHT).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudgetInput {
    /// dBm.
    pub eirp: f64,
    /// Hz.
    pub carrier: f64,
    /// m.
    pub distance: f64,
    /// dBi.
    pub rx_antenna_gain: f64,
    /// dB. Scales signal and noise alike, so it does not enter the SNR.
    #[serde(default)]
    pub rx_conversion_gain: f64,
    /// dB.
    pub noise_figure: f64,
    /// Hz.
    pub bandwidth: f64,
}

impl Default for LinkBudgetInput {
    fn default() -> Self {
        Self {
            eirp: 30.0,
            carrier: 73.5e9,
            distance: 0.25,
            rx_antenna_gain: 12.0,
            rx_conversion_gain: 32.0,
            noise_figure: 9.0,
            bandwidth: 2e9,
        }
    }
}

impl LinkBudgetInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) {
            return Err(Error::param("distance", "must be positive"));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::param("bandwidth", "must be positive"));
        }
        Ok(())
    }
}

/// Noise power in `bandwidth` referred to the receiver input, dBm.
pub fn noise_floor_dbm(bandwidth: f64, noise_figure: f64) -> f64 {
    NOISE_DENSITY_DBM_HZ + 10.0 * bandwidth.log10() + noise_figure
}

/// Received SNR, dB.
pub fn rx_snr(link: &LinkBudgetInput) -> Result<f64> {
    link.validate()?;
    let received = link.eirp - fspl(link.carrier, link.distance)? + link.rx_antenna_gain;
    Ok(received - noise_floor_dbm(link.bandwidth, link.noise_figure))
}

/// Inputs to the performance summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetScenario {
    #[serde(default)]
    pub power: PowerBudget,
    /// Per-element output power, dBm.
    pub pout_per_element_dbm: f64,
    pub antenna_gain_dbi: f64,
    #[serde(default)]
    pub implementation_loss_db: f64,
    /// Measured EIRP, dBm. When absent the computed EIRP is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eirp_dbm: Option<f64>,
    /// Total RF coverage, Hz.
    pub rf_bandwidth: f64,
}

impl Default for BudgetScenario {
    fn default() -> Self {
        Self {
            power: PowerBudget::default(),
            pout_per_element_dbm: -6.0,
            antenna_gain_dbi: 12.0,
            implementation_loss_db: 0.0,
            eirp_dbm: Some(30.0),
            rf_bandwidth: 10e9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Figures {
    pub n_elements: usize,
    pub eirp_dbm: f64,
    pub eirp_computed_dbm: f64,
    pub eirp_over_pdc_percent: f64,
    pub pdc_tx_per_element_mw: f64,
    pub pdc_rx_per_element_mw: f64,
    pub pdc_tx_total_w: f64,
    pub pdc_rx_total_w: f64,
    /// Per-element output power over per-element TX consumption, percent.
    pub element_efficiency_percent: f64,
    pub rf_bandwidth_hz: f64,
    pub shared_if: ComponentCount,
    pub per_element_weaver: ComponentCount,
}

/// Performance summary in the layout of the comparison table.
pub fn table1_figures(s: &BudgetScenario) -> Result<Table1Figures> {
    s.power.validate()?;
    if !(s.rf_bandwidth > 0.0) {
        return Err(Error::param("rf_bandwidth", "must be positive"));
    }
    let n = s.power.n_elements;
    let computed = eirp(s.pout_per_element_dbm, n, s.antenna_gain_dbi, s.implementation_loss_db)?;
    let radiated = s.eirp_dbm.unwrap_or(computed);
    let pout_mw = 10f64.powf(s.pout_per_element_dbm / 10.0);
    Ok(Table1Figures {
        n_elements: n,
        eirp_dbm: radiated,
        eirp_computed_dbm: computed,
        eirp_over_pdc_percent: eirp_over_pdc(radiated, &s.power)?,
        pdc_tx_per_element_mw: s.power.pdc_tx_per_element,
        pdc_rx_per_element_mw: s.power.pdc_rx_per_element,
        pdc_tx_total_w: s.power.pdc_tx_total_w(),
        pdc_rx_total_w: s.power.pdc_rx_total_w(),
        element_efficiency_percent: if s.power.pdc_tx_per_element > 0.0 {
            100.0 * pout_mw / s.power.pdc_tx_per_element
        } else {
            0.0
        },
        rf_bandwidth_hz: s.rf_bandwidth,
        shared_if: count_components(n, Topology::SharedIf)?,
        per_element_weaver: count_components(n, Topology::PerElementWeaver)?,
    })
}

/// The same scenario with `n` elements at unchanged per-element figures.
/// A measured EIRP is scaled by the coherent-combining law.
pub fn scaled_to(s: &BudgetScenario, n: usize) -> Result<BudgetScenario> {
    if n == 0 || s.power.n_elements == 0 {
        return Err(Error::param("n_elements", "need at least one element"));
    }
    let gain = 20.0 * (n as f64 / s.power.n_elements as f64).log10();
    Ok(BudgetScenario {
        power: PowerBudget {
            n_elements: n,
            ..s.power
        },
        eirp_dbm: s.eirp_dbm.map(|e| e + gain),
        ..*s
    })
}
