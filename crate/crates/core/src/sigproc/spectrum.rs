use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::ComplexSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            // Periodic form: on-bin tones stay confined to three bins.
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            Window::Rectangular => vec![1.0; n],
        }
    }
}

/// Two-sided power spectral density, ascending in absolute frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    pub freqs: Vec<f64>,
    /// Linear power per Hz.
    pub density: Vec<f64>,
    pub bin_width: f64,
    pub segments: usize,
}

impl Psd {
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }

    /// Power integrated over bins whose center lies in `[lo, hi]`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, d)| d)
            .sum::<f64>()
            * self.bin_width
    }

    /// Power in the `half_width` bins either side of the bin nearest `freq`.
    pub fn power_near(&self, freq: f64, half_width: usize) -> f64 {
        let k = self.bin_of(freq);
        let lo = k.saturating_sub(half_width);
        let hi = (k + half_width).min(self.density.len() - 1);
        self.density[lo..=hi].iter().sum::<f64>() * self.bin_width
    }

    pub fn bin_of(&self, freq: f64) -> usize {
        let k = ((freq - self.freqs[0]) / self.bin_width).round();
        k.clamp(0.0, (self.freqs.len() - 1) as f64) as usize
    }

    pub fn peak_bin(&self) -> usize {
        self.density
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best })
            .0
    }

    pub fn density_db(&self) -> Vec<f64> {
        self.density
            .iter()
            .map(|d| if *d > 0.0 { 10.0 * d.log10() } else { -400.0 })
            .collect()
    }
}

/// Welch PSD with a Hann window and 50% overlap.
pub fn power_spectrum(sig: &ComplexSignal, fft_size: usize) -> Result<Psd> {
    power_spectrum_with(sig, fft_size, Window::Hann)
}

pub fn power_spectrum_with(sig: &ComplexSignal, fft_size: usize, window: Window) -> Result<Psd> {
    if fft_size < 64 || !fft_size.is_power_of_two() {
        return Err(Error::param("fft_size", format!("{fft_size} is not a power of two >= 64")));
    }
    if sig.len() < fft_size {
        return Err(Error::SignalTooShort {
            len: sig.len(),
            fft_size,
        });
    }
    let w = window.coefficients(fft_size);
    let w_energy: f64 = w.iter().map(|x| x * x).sum();
    let hop = fft_size / 2;
    let fft = FftPlanner::new().plan_fft_forward(fft_size);

    let mut acc = vec![0.0; fft_size];
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    let mut segments = 0;
    let mut start = 0;
    while start + fft_size <= sig.len() {
        for (b, (x, wi)) in buf.iter_mut().zip(sig.samples[start..start + fft_size].iter().zip(&w)) {
            *b = x * wi;
        }
        fft.process(&mut buf);
        acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b.norm_sqr());
        segments += 1;
        start += hop;
    }

    let fs = sig.sample_rate;
    let scale = 1.0 / (segments as f64 * fs * w_energy);
    let half = fft_size / 2;
    let bin_width = fs / fft_size as f64;
    // fftshift: negative frequencies first.
    let order = (half..fft_size).chain(0..half);
    let (freqs, density) = order
        .enumerate()
        .map(|(i, k)| {
            let f = sig.center_freq + (i as f64 - half as f64) * bin_width;
            (f, acc[k] * scale)
        })
        .unzip();
    Ok(Psd {
        freqs,
        density,
        bin_width,
        segments,
    })
}

/// Width spanned by bins within `level_db` (negative) of the PSD peak.
pub fn occupied_bandwidth(psd: &Psd, level_db: f64) -> f64 {
    let peak = psd.density[psd.peak_bin()];
    let threshold = peak * 10f64.powf(level_db / 10.0);
    let above: Vec<usize> = psd
        .density
        .iter()
        .enumerate()
        .filter(|(_, d)| **d >= threshold)
        .map(|(i, _)| i)
        .collect();
    match (above.first(), above.last()) {
        (Some(lo), Some(hi)) => (hi - lo + 1) as f64 * psd.bin_width,
        _ => 0.0,
    }
}

/// Frequency interval holding `fraction` of the total power, trimmed
/// equally from both spectral tails. `None` for an all-zero spectrum.
pub(crate) fn containment_interval(psd: &Psd, fraction: f64) -> Option<(f64, f64)> {
    let total: f64 = psd.density.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let tail = total * (1.0 - fraction) / 2.0;
    let crossing = |iter: &mut dyn Iterator<Item = (usize, &f64)>| {
        let mut acc = 0.0;
        for (i, d) in iter {
            acc += d;
            if acc > tail {
                return i;
            }
        }
        0
    };
    let lo = crossing(&mut psd.density.iter().enumerate());
    let hi = crossing(&mut psd.density.iter().enumerate().rev());
    let (lo, hi) = if hi < lo { (hi, lo) } else { (lo, hi) };
    Some((psd.freqs[lo] - psd.bin_width / 2.0, psd.freqs[hi] + psd.bin_width / 2.0))
}
