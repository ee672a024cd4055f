use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::impairment::{stage_map, Direction, IqImpairment, MixerStage, Sideband};
use crate::error::{Error, Result};
use crate::sigproc::{amplitude_from_db, apply_frequency_response, containment_interval, power_spectrum, ComplexSignal};

/// Conversion plan of one Weaver chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeaverConfig {
    /// RF-stage LO, Hz.
    pub lo1: f64,
    /// IF-stage LO (the IF1 center), Hz.
    pub lo2: f64,
    pub sideband: Sideband,
    pub direction: Direction,
    /// IF1 band edges, Hz.
    pub if1_band: (f64, f64),
    /// Conversion gain of each of the two stages, dB.
    #[serde(default)]
    pub conversion_gain_db: f64,
    /// Conversion-gain droop at the IF1 band edges relative to its center, dB
    /// (parabolic across the band).
    #[serde(default)]
    pub gain_flatness_db: f64,
    /// Upper bound on the IF1 band width, Hz.
    #[serde(default = "default_if1_guard")]
    pub max_if1_bandwidth: f64,
}

fn default_if1_guard() -> f64 {
    3e9
}

impl WeaverConfig {
    /// Reference plan: LO1 at 78.5 GHz between the 71-76 and 81-86 GHz
    /// bands, 5 GHz IF1 with a 3 GHz band, lower band selected.
    pub fn e_band(direction: Direction) -> Self {
        Self {
            lo1: 78.5e9,
            lo2: 5e9,
            sideband: Sideband::Lsb,
            direction,
            if1_band: (3.5e9, 6.5e9),
            conversion_gain_db: 0.0,
            gain_flatness_db: 0.0,
            max_if1_bandwidth: default_if1_guard(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo2 > 0.0 && self.lo1 > self.lo2) {
            return Err(Error::param(
                "lo plan",
                format!("need lo1 > lo2 > 0, got lo1={:e} lo2={:e}", self.lo1, self.lo2),
            ));
        }
        let (lo, hi) = self.if1_band;
        if !(hi > lo) {
            return Err(Error::param("if1_band", "upper edge must exceed lower edge"));
        }
        if hi - lo > self.max_if1_bandwidth {
            return Err(Error::param(
                "if1_band",
                format!("width {:e} Hz exceeds guard {:e} Hz", hi - lo, self.max_if1_bandwidth),
            ));
        }
        if !(lo < self.lo2 && self.lo2 < hi) {
            return Err(Error::param("if1_band", "must contain lo2"));
        }
        if !self.gain_flatness_db.is_finite() || !self.conversion_gain_db.is_finite() {
            return Err(Error::param("gain", "must be finite"));
        }
        Ok(())
    }

    pub fn with_direction(&self, direction: Direction) -> Self {
        Self {
            direction,
            ..self.clone()
        }
    }

    /// Center of the selected RF band.
    pub fn rf_center(&self) -> f64 {
        self.lo1 + self.sideband.sign() * self.lo2
    }

    /// Center of the rejected (image) RF band.
    pub fn image_center(&self) -> f64 {
        self.lo1 - self.sideband.sign() * self.lo2
    }

    /// Baseband passband edges, accounting for the spectral inversion of the
    /// lower sideband.
    pub fn passband(&self) -> (f64, f64) {
        let lo = self.if1_band.0 - self.lo2;
        let hi = self.if1_band.1 - self.lo2;
        match self.sideband {
            Sideband::Usb => (lo, hi),
            Sideband::Lsb => (-hi, -lo),
        }
    }

    fn droop(&self, f: f64) -> f64 {
        if self.gain_flatness_db == 0.0 {
            return 1.0;
        }
        let (lo, hi) = self.passband();
        let center = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let x = (f - center) / half;
        amplitude_from_db(-self.gain_flatness_db * x * x)
    }

    fn stage_gain(&self) -> f64 {
        amplitude_from_db(self.conversion_gain_db)
    }

    fn check_sample_rate(&self, sample_rate: f64) -> Result<()> {
        let (lo, hi) = self.passband();
        let reach = self.lo2 + lo.abs().max(hi.abs());
        if sample_rate / 2.0 <= reach {
            return Err(Error::param(
                "sample_rate",
                format!("{sample_rate:e} Hz cannot hold content out to ±{reach:e} Hz about lo1"),
            ));
        }
        Ok(())
    }
}

/// Switches the selected sideband. Only the sign of the IF-stage quadrature
/// rail changes; both LOs stay where they are.
pub fn select_sideband(cfg: &WeaverConfig, sideband: Sideband) -> WeaverConfig {
    WeaverConfig {
        sideband,
        ..cfg.clone()
    }
}

impl WeaverConfig {
    /// Inverts the IF-stage quadrature sign. Involution.
    pub fn flip_sideband(&self) -> WeaverConfig {
        select_sideband(self, self.sideband.flipped())
    }
}

fn if_lo(n: usize, ratio: f64) -> Complex64 {
    let cycles = (n as f64 * ratio).fract();
    Complex64::from_polar(1.0, TAU * cycles)
}

fn check_baseband_fits(bb: &ComplexSignal, cfg: &WeaverConfig) -> Result<()> {
    if bb.len() < 64 {
        return Ok(());
    }
    let fft = (bb.len().ilog2() as usize).min(10);
    let psd = power_spectrum(bb, 1 << fft)?;
    let Some((lo, hi)) = containment_interval(&psd, 0.999) else {
        return Ok(());
    };
    let (pass_lo, pass_hi) = cfg.passband();
    let tol = psd.bin_width;
    let lo = lo - bb.center_freq;
    let hi = hi - bb.center_freq;
    if lo < pass_lo - tol || hi > pass_hi + tol {
        return Err(Error::BandwidthExceeded {
            occupied_hz: hi - lo,
            allowed_hz: pass_hi - pass_lo,
        });
    }
    Ok(())
}

/// Baseband to RF envelope about LO1.
pub fn weaver_upconvert(baseband: &ComplexSignal, cfg: &WeaverConfig, imp: &[IqImpairment]) -> Result<ComplexSignal> {
    cfg.validate()?;
    if cfg.direction != Direction::Tx {
        return Err(Error::param("direction", "upconversion needs a TX config"));
    }
    baseband.ensure_nonempty()?;
    cfg.check_sample_rate(baseband.sample_rate)?;
    check_baseband_fits(baseband, cfg)?;
    imp.iter().try_for_each(IqImpairment::validate)?;

    let fs = baseband.sample_rate;
    let mut samples = baseband.samples.clone();
    if cfg.gain_flatness_db != 0.0 {
        apply_frequency_response(&mut samples, fs, |f| cfg.droop(f));
    }

    let if_map = stage_map(imp, MixerStage::If, cfg.sideband);
    let rf_map = stage_map(imp, MixerStage::Rf, cfg.sideband);
    let ratio = cfg.lo2 / fs;
    let gain = cfg.stage_gain() * cfg.stage_gain();
    let invert = cfg.sideband == Sideband::Lsb;
    for (n, s) in samples.iter_mut().enumerate() {
        let mut u = *s * if_map.apply(if_lo(n, ratio));
        if invert {
            u = u.conj();
        }
        *s = rf_map.apply(u) * gain;
    }
    ComplexSignal::new(samples, fs, cfg.lo1)
}

/// RF envelope about LO1 to baseband, with the IF channel filter applied.
pub fn weaver_downconvert(rf: &ComplexSignal, cfg: &WeaverConfig, imp: &[IqImpairment]) -> Result<ComplexSignal> {
    cfg.validate()?;
    if cfg.direction != Direction::Rx {
        return Err(Error::param("direction", "downconversion needs an RX config"));
    }
    rf.ensure_nonempty()?;
    if (rf.center_freq - cfg.lo1).abs() > 1e-6 * cfg.lo1 {
        return Err(Error::SignalMismatch);
    }
    cfg.check_sample_rate(rf.sample_rate)?;
    imp.iter().try_for_each(IqImpairment::validate)?;

    let fs = rf.sample_rate;
    let if_map = stage_map(imp, MixerStage::If, cfg.sideband);
    let rf_map = stage_map(imp, MixerStage::Rf, cfg.sideband);
    let ratio = cfg.lo2 / fs;
    let gain = cfg.stage_gain() * cfg.stage_gain();
    let invert = cfg.sideband == Sideband::Lsb;
    let mut samples: Vec<Complex64> = rf
        .samples
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let mut v = rf_map.apply(x);
            if invert {
                v = v.conj();
            }
            v * if_map.apply(if_lo(n, ratio)).conj() * gain
        })
        .collect();

    let (pass_lo, pass_hi) = cfg.passband();
    apply_frequency_response(&mut samples, fs, |f| {
        if f >= pass_lo && f <= pass_hi {
            cfg.droop(f)
        } else {
            0.0
        }
    });
    ComplexSignal::new(samples, fs, 0.0)
}
