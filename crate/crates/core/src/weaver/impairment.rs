use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixerStage {
    Rf,
    If,
}

/// Which mirror band the chain selects. LSB is the band below LO1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    Lsb,
    Usb,
}

impl Sideband {
    pub fn flipped(self) -> Self {
        match self {
            Sideband::Lsb => Sideband::Usb,
            Sideband::Usb => Sideband::Lsb,
        }
    }

    /// Sign of the IF-stage quadrature rail.
    pub fn sign(self) -> f64 {
        match self {
            Sideband::Lsb => -1.0,
            Sideband::Usb => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Tx,
    Rx,
}

/// Static gain/phase imbalance of one quadrature mixer stage.
///
/// `sideband` restricts the impairment to one sideband path (e.g. the
/// inverted rail); `None` applies it in both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IqImpairment {
    pub gain_imbalance_db: f64,
    pub phase_imbalance_deg: f64,
    pub stage: MixerStage,
    #[serde(default)]
    pub sideband: Option<Sideband>,
}

impl IqImpairment {
    pub const MAX_GAIN_DB: f64 = 6.0;
    pub const MAX_PHASE_DEG: f64 = 30.0;

    pub fn new(gain_imbalance_db: f64, phase_imbalance_deg: f64, stage: MixerStage) -> Result<Self> {
        let imp = Self {
            gain_imbalance_db,
            phase_imbalance_deg,
            stage,
            sideband: None,
        };
        imp.validate()?;
        Ok(imp)
    }

    pub fn only_on(mut self, sideband: Sideband) -> Self {
        self.sideband = Some(sideband);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain_imbalance_db.abs() <= Self::MAX_GAIN_DB) {
            return Err(Error::param(
                "gain_imbalance_db",
                format!("|{}| exceeds {} dB", self.gain_imbalance_db, Self::MAX_GAIN_DB),
            ));
        }
        if !(self.phase_imbalance_deg.abs() <= Self::MAX_PHASE_DEG) {
            return Err(Error::param(
                "phase_imbalance_deg",
                format!("|{}| exceeds {} deg", self.phase_imbalance_deg, Self::MAX_PHASE_DEG),
            ));
        }
        Ok(())
    }

    /// Widely-linear map of the impaired quadrature pair.
    ///
    /// The imbalance is split symmetrically: the I rail carries amplitude
    /// `sqrt(a)` at phase `-phi/2`, the Q rail `1/sqrt(a)` at `+phi/2`.
    /// This keeps the direct term nearly real, so a flat imbalance leaves
    /// no net phase rotation on the wanted signal.
    pub fn coefficients(&self) -> WidelyLinear {
        let a = 10f64.powf(self.gain_imbalance_db / 20.0);
        let half = self.phase_imbalance_deg.to_radians() / 2.0;
        let ai = Complex64::from_polar(a.sqrt(), -half);
        let aq = Complex64::from_polar(a.sqrt().recip(), half);
        WidelyLinear {
            direct: (ai + aq) / 2.0,
            conjugate: (ai - aq) / 2.0,
        }
    }

    fn applies(&self, stage: MixerStage, sideband: Sideband) -> bool {
        self.stage == stage && self.sideband.is_none_or(|s| s == sideband)
    }
}

/// `z -> direct * z + conjugate * conj(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidelyLinear {
    pub direct: Complex64,
    pub conjugate: Complex64,
}

impl WidelyLinear {
    pub const IDENTITY: WidelyLinear = WidelyLinear {
        direct: Complex64::new(1.0, 0.0),
        conjugate: Complex64::new(0.0, 0.0),
    };

    #[inline]
    pub fn apply(&self, z: Complex64) -> Complex64 {
        self.direct * z + self.conjugate * z.conj()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &WidelyLinear) -> WidelyLinear {
        WidelyLinear {
            direct: self.direct * inner.direct + self.conjugate * inner.conjugate.conj(),
            conjugate: self.direct * inner.conjugate + self.conjugate * inner.direct.conj(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// Image-to-wanted power ratio.
    pub fn image_ratio(&self) -> f64 {
        self.conjugate.norm_sqr() / self.direct.norm_sqr()
    }
}

/// Composite map of every impairment active at `stage` for `sideband`,
/// applied in list order.
pub(crate) fn stage_map(imps: &[IqImpairment], stage: MixerStage, sideband: Sideband) -> WidelyLinear {
    imps.iter()
        .filter(|imp| imp.applies(stage, sideband))
        .fold(WidelyLinear::IDENTITY, |acc, imp| imp.coefficients().after(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_rejects_out_of_range() {
        assert!(IqImpairment::new(6.5, 0.0, MixerStage::Rf).is_err());
        assert!(IqImpairment::new(0.0, -31.0, MixerStage::If).is_err());
        assert!(IqImpairment::new(-6.0, 30.0, MixerStage::If).is_ok());
    }

    #[test]
    fn zero_imbalance_is_identity() {
        let w = IqImpairment::new(0.0, 0.0, MixerStage::Rf).unwrap().coefficients();
        assert!((w.direct - 1.0).norm() < 1e-15);
        assert!(w.conjugate.norm() < 1e-15);
    }

    #[test]
    fn matches_rail_construction() {
        // Build the map explicitly from the I/Q rails and compare.
        let imp = IqImpairment::new(1.0, 2.5, MixerStage::Rf).unwrap();
        let w = imp.coefficients();
        let a = 10f64.powf(1.0 / 20.0);
        let phi = 2.5f64.to_radians();
        for z in [Complex64::new(0.3, -0.7), Complex64::new(-1.1, 0.2)] {
            let i = z.re;
            let q = z.im;
            let rail = a.sqrt() * i * Complex64::from_polar(1.0, -phi / 2.0)
                + Complex64::i() * q * Complex64::from_polar(a.sqrt().recip(), phi / 2.0);
            assert!((w.apply(z) - rail).norm() < 1e-12);
        }
    }

    #[test]
    fn composition_matches_sequential_application() {
        let w1 = IqImpairment::new(0.7, -3.0, MixerStage::If).unwrap().coefficients();
        let w2 = IqImpairment::new(-1.3, 4.0, MixerStage::If).unwrap().coefficients();
        let z = Complex64::new(0.4, 0.9);
        assert!((w2.after(&w1).apply(z) - w2.apply(w1.apply(z))).norm() < 1e-14);
    }

    #[test]
    fn stage_map_respects_sideband_filter() {
        let imps = [IqImpairment::new(1.0, 0.0, MixerStage::If).unwrap().only_on(Sideband::Lsb)];
        assert!(stage_map(&imps, MixerStage::If, Sideband::Usb).is_identity());
        assert!(!stage_map(&imps, MixerStage::If, Sideband::Lsb).is_identity());
        assert!(stage_map(&imps, MixerStage::Rf, Sideband::Lsb).is_identity());
    }
}
