//! Waveform, modulation, filtering, noise and metric primitives.

mod evm;
mod noise;
mod pulse;
mod qam;
mod signal;
mod spectrum;

pub use evm::{measure_evm, EvmResult, EVM_FLOOR_DB};
pub use noise::{add_awgn, add_noise_variance, complex_gaussian};
pub use pulse::{matched_filter, rrc_shape, rrc_taps, PulseShape};
pub use qam::{qam_demodulate, qam_modulate, QamConstellation};
pub use signal::ComplexSignal;
pub use spectrum::{occupied_bandwidth, power_spectrum, power_spectrum_with, Psd, Window};
pub(crate) use spectrum::containment_interval;

pub use num_complex::Complex64;

/// Converts a linear power ratio to dB.
pub fn db(power_ratio: f64) -> f64 {
    10.0 * power_ratio.log10()
}

/// Converts dB to a linear power ratio.
pub fn from_db(value_db: f64) -> f64 {
    10f64.powf(value_db / 10.0)
}

/// Converts dB to a linear amplitude ratio.
pub fn amplitude_from_db(value_db: f64) -> f64 {
    10f64.powf(value_db / 20.0)
}

/// Filters `samples` in the frequency domain with a real gain per frequency
/// (Hz, signed, relative to the envelope center). The block is zero-padded
/// to a power of two and the filtered result truncated back to its length.
pub(crate) fn apply_frequency_response(samples: &mut [Complex64], sample_rate: f64, response: impl Fn(f64) -> f64) {
    let n = samples.len();
    if n == 0 {
        return;
    }
    let size = n.next_power_of_two();
    let mut buf = samples.to_vec();
    buf.resize(size, Complex64::new(0.0, 0.0));
    let mut planner = rustfft::FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    let scale = 1.0 / size as f64;
    for (k, s) in buf.iter_mut().enumerate() {
        let signed = if k <= size / 2 { k as f64 } else { k as f64 - size as f64 };
        *s *= response(signed * sample_rate / size as f64) * scale;
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    samples.copy_from_slice(&buf[..n]);
}
