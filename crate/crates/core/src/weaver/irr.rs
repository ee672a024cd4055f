use serde::{Deserialize, Serialize};

use super::chain::{weaver_downconvert, WeaverConfig};
use super::impairment::{Direction, IqImpairment};
use crate::error::{Error, Result};
use crate::sigproc::{db, power_spectrum, ComplexSignal};

/// Upper limit reported for image rejection, dB.
pub const IRR_CAP_DB: f64 = 120.0;

/// Closed-form image rejection of a quadrature stage with gain imbalance
/// `a` (dB) and phase imbalance `phi` (degrees), capped at [`IRR_CAP_DB`].
pub fn analytic_irr(gain_imbalance_db: f64, phase_imbalance_deg: f64) -> Result<f64> {
    IqImpairment::new(gain_imbalance_db, phase_imbalance_deg, super::MixerStage::Rf)?;
    let a = 10f64.powf(gain_imbalance_db / 20.0);
    let c = 2.0 * a * phase_imbalance_deg.to_radians().cos();
    let den = 1.0 - c + a * a;
    if den <= 0.0 {
        return Ok(IRR_CAP_DB);
    }
    Ok(db((1.0 + c + a * a) / den).min(IRR_CAP_DB))
}

/// Two-tone measurement setup for [`simulate_irr`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrrProbe {
    pub fft_size: usize,
    /// Baseband bin of the wanted tone.
    pub desired_bin: usize,
    /// Baseband bin at which the image tone would land if it leaked straight through.
    pub image_bin: usize,
    /// Welch segments averaged.
    pub segments: usize,
}

impl Default for IrrProbe {
    fn default() -> Self {
        Self {
            fft_size: 4096,
            desired_bin: 8,
            image_bin: 24,
            segments: 4,
        }
    }
}

const MIN_SEPARATION_BINS: f64 = 4.0;

impl IrrProbe {
    fn check_resolution(&self) -> Result<()> {
        if self.fft_size < 16 || !self.fft_size.is_power_of_two() || self.segments == 0 {
            return Err(Error::param("fft_size", "must be a power of two ≥ 16"));
        }
        let d = self.desired_bin as f64;
        let m = self.image_bin as f64;
        // Leakage lands at ±m, the wanted tone at d; all must stay clear of
        // each other and of DC.
        let separation = [d, m, (d - m).abs(), d + m].into_iter().fold(f64::INFINITY, f64::min);
        if separation < MIN_SEPARATION_BINS {
            return Err(Error::TonesUnresolved { separation_bins: separation });
        }
        Ok(())
    }
}

/// Measures image rejection by injecting equal-power tones in the wanted
/// and image RF bands, downconverting through the impaired chain and
/// comparing spectral powers.
pub fn simulate_irr(cfg: &WeaverConfig, imp: &[IqImpairment], probe: &IrrProbe) -> Result<f64> {
    probe.check_resolution()?;
    let cfg = cfg.with_direction(Direction::Rx);
    cfg.validate()?;
    let (pass_lo, pass_hi) = cfg.passband();
    let reach = cfg.lo2 + pass_lo.abs().max(pass_hi.abs());
    let mut fs = 4.0 * cfg.lo2;
    while fs / 2.0 <= reach {
        fs *= 2.0;
    }
    let bin = fs / probe.fft_size as f64;
    let d = probe.desired_bin as f64 * bin;
    let m = probe.image_bin as f64 * bin;
    let half = 0.5 * (pass_hi - pass_lo);
    if d.max(m) >= half {
        return Err(Error::param("probe", "tones fall outside the IF passband"));
    }

    let s = cfg.sideband.sign();
    let len = probe.fft_size * (probe.segments + 1) / 2;
    let desired = ComplexSignal::tone(s * (cfg.lo2 + d), 1.0, len, fs, cfg.lo1);
    let image = ComplexSignal::tone(s * (m - cfg.lo2), 1.0, len, fs, cfg.lo1);
    let samples = desired.samples.iter().zip(&image.samples).map(|(a, b)| a + b).collect();
    let rf = ComplexSignal::new(samples, fs, cfg.lo1)?;

    let bb = weaver_downconvert(&rf, &cfg, imp)?;
    let psd = power_spectrum(&bb, probe.fft_size)?;
    let wanted = psd.power_near(d, 2);
    let leaked = psd.power_near(m, 2) + psd.power_near(-m, 2);
    if wanted <= 0.0 {
        return Err(Error::ZeroPower);
    }
    if leaked <= 0.0 {
        return Ok(IRR_CAP_DB);
    }
    Ok(db(wanted / leaked).min(IRR_CAP_DB))
}
