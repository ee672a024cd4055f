use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{from_db, ComplexSignal};
use crate::error::{Error, Result};
use crate::rng::{stream, StreamId};

/// Circular complex Gaussian sample with total variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sigma, im * sigma)
}

/// Adds circular complex Gaussian noise of the given per-sample variance.
pub fn add_noise_variance<R: Rng + ?Sized>(mut sig: ComplexSignal, variance: f64, rng: &mut R) -> ComplexSignal {
    if variance > 0.0 {
        sig.samples
            .iter_mut()
            .for_each(|s| *s += complex_gaussian(rng, variance));
    }
    sig
}

/// Adds AWGN so that measured signal power over noise power equals `snr_db`.
/// `f64::INFINITY` disables noise.
pub fn add_awgn(sig: ComplexSignal, snr_db: f64, seed: u64) -> Result<ComplexSignal> {
    sig.ensure_nonempty()?;
    if snr_db == f64::INFINITY {
        return Ok(sig);
    }
    if snr_db.is_nan() {
        return Err(Error::param("snr_db", "is NaN"));
    }
    let power = sig.power();
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    let mut rng = stream(seed, StreamId::Noise);
    Ok(add_noise_variance(sig, power / from_db(snr_db), &mut rng))
}
