use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexSignal;
use crate::error::{Error, Result};

/// Root-raised-cosine shaping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseShape {
    pub rolloff: f64,
    pub span_symbols: usize,
    pub samples_per_symbol: usize,
}

impl Default for PulseShape {
    fn default() -> Self {
        Self {
            rolloff: 0.35,
            span_symbols: 16,
            samples_per_symbol: 8,
        }
    }
}

impl PulseShape {
    pub fn validate(&self) -> Result<()> {
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(Error::param("rolloff", format!("{} not in (0, 1]", self.rolloff)));
        }
        if self.samples_per_symbol < 2 {
            return Err(Error::param(
                "samples_per_symbol",
                format!("{} < 2", self.samples_per_symbol),
            ));
        }
        if self.span_symbols == 0 {
            return Err(Error::param("span_symbols", "must be at least 1"));
        }
        Ok(())
    }

    pub fn num_taps(&self) -> usize {
        self.span_symbols * self.samples_per_symbol + 1
    }

    /// Two-sided bandwidth of the shaped spectrum, `(1 + rolloff) * symbol_rate`.
    pub fn bandwidth(&self, symbol_rate: f64) -> f64 {
        (1.0 + self.rolloff) * symbol_rate
    }
}

/// Kaiser shape applied to the truncated RRC before refinement.
const KAISER_BETA: f64 = 3.0;

/// Root-raised-cosine response truncated to `span_symbols`, Kaiser-windowed
/// and then refined so the matched cascade has zero ISI at every symbol lag.
/// Normalized to unit energy, so the cascade has a unit peak at zero lag.
pub fn rrc_taps(shape: &PulseShape) -> Result<Vec<f64>> {
    shape.validate()?;
    let beta = shape.rolloff;
    let sps = shape.samples_per_symbol as f64;
    let n = shape.num_taps();
    let half = (n / 2) as f64;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| {
            let t = (i as f64 - half) / sps;
            rrc_point(t, beta) * kaiser(i, n, KAISER_BETA)
        })
        .collect();
    normalize(&mut taps);
    nyquist_refine(&mut taps, shape.samples_per_symbol, shape.span_symbols);
    Ok(taps)
}

/// Continuous RRC response at `t` symbol periods.
fn rrc_point(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        1.0 - beta + 4.0 * beta / PI
    } else if ((4.0 * beta * t).abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos())
    } else {
        let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
        let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
        num / den
    }
}

fn normalize(taps: &mut [f64]) {
    let norm = taps.iter().map(|h| h * h).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|h| *h /= norm);
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn kaiser(i: usize, n: usize, beta: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let r = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
    bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / bessel_i0(beta)
}

fn autocorr(h: &[f64], lag: usize) -> f64 {
    h.iter().zip(&h[lag.min(h.len())..]).map(|(a, b)| a * b).sum()
}

/// Minimum-norm Gauss-Newton steps driving the autocorrelation at lags
/// `k * sps` (k = 1..=span) to zero while keeping the taps symmetric.
fn nyquist_refine(h: &mut [f64], sps: usize, span: usize) {
    let l = h.len();
    let lags: Vec<usize> = (1..=span).map(|k| k * sps).filter(|&s| s < l).collect();
    for _ in 0..30 {
        let g: Vec<f64> = lags.iter().map(|&s| autocorr(h, s)).collect();
        if g.iter().all(|v| v.abs() < 1e-15) {
            break;
        }
        let jac: Vec<Vec<f64>> = lags
            .iter()
            .map(|&s| {
                (0..l)
                    .map(|n| {
                        let fwd = if n + s < l { h[n + s] } else { 0.0 };
                        let back = if n >= s { h[n - s] } else { 0.0 };
                        fwd + back
                    })
                    .collect()
            })
            .collect();
        let gram: Vec<Vec<f64>> = jac
            .iter()
            .map(|a| jac.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
            .collect();
        let Some(y) = solve(gram, g) else { break };
        for (n, tap) in h.iter_mut().enumerate() {
            *tap -= jac.iter().zip(&y).map(|(row, yk)| row[n] * yk).sum::<f64>();
        }
        for n in 0..l / 2 {
            let avg = 0.5 * (h[n] + h[l - 1 - n]);
            h[n] = avg;
            h[l - 1 - n] = avg;
        }
        normalize(h);
    }
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Upsamples `symbols` and convolves with the RRC response (full convolution).
pub fn rrc_shape(symbols: &[Complex64], shape: &PulseShape, symbol_rate: f64) -> Result<ComplexSignal> {
    if symbols.is_empty() {
        return Err(Error::EmptySignal);
    }
    if !(symbol_rate > 0.0) {
        return Err(Error::param("symbol_rate", "must be positive"));
    }
    let taps = rrc_taps(shape)?;
    let sps = shape.samples_per_symbol;
    let len = (symbols.len() - 1) * sps + taps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (k, &s) in symbols.iter().enumerate() {
        let base = k * sps;
        for (j, &h) in taps.iter().enumerate() {
            out[base + j] += s * h;
        }
    }
    ComplexSignal::new(out, symbol_rate * sps as f64, 0.0)
}

/// Matched-filters `sig` and samples `n_symbols` symbol centers, aligned to
/// a waveform produced by [`rrc_shape`].
pub fn matched_filter(sig: &ComplexSignal, shape: &PulseShape, n_symbols: usize) -> Result<Vec<Complex64>> {
    sig.ensure_nonempty()?;
    let taps = rrc_taps(shape)?;
    let sps = shape.samples_per_symbol;
    let l = taps.len();
    let x = &sig.samples;
    let needed = (n_symbols.saturating_sub(1)) * sps + l;
    if x.len() < needed {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: needed,
        });
    }
    Ok((0..n_symbols)
        .map(|k| {
            // Output index (l - 1) + k*sps of the full convolution.
            let end = k * sps + l - 1;
            taps.iter()
                .enumerate()
                .map(|(j, &h)| x[end - j] * h)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use crate::sigproc::{occupied_bandwidth, power_spectrum, qam_modulate, QamConstellation};
    use rand::Rng;

    #[test]
    fn rejects_bad_parameters() {
        let s = [Complex64::new(1.0, 0.0)];
        let bad = [
            PulseShape { rolloff: 0.0, ..Default::default() },
            PulseShape { rolloff: 1.2, ..Default::default() },
            PulseShape { samples_per_symbol: 1, ..Default::default() },
        ];
        for shape in bad {
            assert!(rrc_shape(&s, &shape, 1e9).is_err());
        }
    }

    #[test]
    fn single_symbol_is_impulse_response() {
        let shape = PulseShape::default();
        let sig = rrc_shape(&[Complex64::new(1.0, 0.0)], &shape, 1e9).unwrap();
        let taps = rrc_taps(&shape).unwrap();
        assert_eq!(sig.len(), taps.len());
        for (a, b) in sig.samples.iter().zip(&taps) {
            assert_eq!(a.re, *b);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn singular_points_are_continuous() {
        for beta in [0.25, 0.35, 0.5, 1.0] {
            let t0 = 1.0 / (4.0 * beta);
            let exact = rrc_point(t0, beta);
            for eps in [1e-6, -1e-6] {
                assert!((rrc_point(t0 + eps, beta) - exact).abs() < 1e-5, "beta {beta}");
            }
            assert!((rrc_point(1e-9, beta) - rrc_point(0.0, beta)).abs() < 1e-6);
        }
    }

    #[test]
    fn cascade_is_nyquist() {
        let shape = PulseShape::default();
        let c = QamConstellation::new(4).unwrap();
        let mut rng = stream(11, StreamId::Oracle);
        let bits: Vec<u8> = (0..4000).map(|_| rng.random_range(0..2)).collect();
        let symbols = qam_modulate(&bits, &c).unwrap();
        let sig = rrc_shape(&symbols, &shape, 1e9).unwrap();
        let rx = matched_filter(&sig, &shape, symbols.len()).unwrap();
        let worst = rx
            .iter()
            .zip(&symbols)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "worst ISI error {worst}");
    }

    #[test]
    fn cascade_autocorrelation_is_nyquist() {
        for sps in [4, 8, 16] {
            let shape = PulseShape { samples_per_symbol: sps, ..Default::default() };
            let h = rrc_taps(&shape).unwrap();
            assert!((autocorr(&h, 0) - 1.0).abs() < 1e-12);
            for k in 1..=16 {
                assert!(autocorr(&h, k * sps).abs() < 1e-12, "sps {sps} lag {k}");
            }
        }
    }

    #[test]
    fn occupied_bandwidth_at_minus_40_db() {
        let shape = PulseShape::default();
        let fs = 16e9;
        // Oracle: direct DTFT of the taps on a fine grid; the shaped PSD is |H(f)|^2.
        let taps = rrc_taps(&shape).unwrap();
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * (fs / 2.0) / 4000.0).collect();
        let mag: Vec<f64> = grid
            .iter()
            .map(|f| {
                let w = 2.0 * PI * f / fs;
                let (re, im) = taps.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, h)| {
                    (re + h * (w * n as f64).cos(), im - h * (w * n as f64).sin())
                });
                re * re + im * im
            })
            .collect();
        let peak = mag.iter().cloned().fold(0.0, f64::max);
        let edge = grid
            .iter()
            .zip(&mag)
            .filter(|(_, m)| **m >= peak * 1e-4)
            .map(|(f, _)| *f)
            .fold(0.0, f64::max);
        let oracle_bw = 2.0 * edge;

        let c = QamConstellation::new(4).unwrap();
        let mut rng = stream(12, StreamId::Oracle);
        let bits: Vec<u8> = (0..2 * 20_000).map(|_| rng.random_range(0..2)).collect();
        let symbols = qam_modulate(&bits, &c).unwrap();
        let sig = rrc_shape(&symbols, &shape, 2e9).unwrap();
        let psd = power_spectrum(&sig, 1024).unwrap();
        let bw = occupied_bandwidth(&psd, -40.0);
        assert!((bw - oracle_bw).abs() <= 4.0 * psd.bin_width, "measured {bw:e} oracle {oracle_bw:e}");
        // Nominal (1 + rolloff) * Rs = 2.7 GHz, widened by the 16-symbol truncation.
        assert!(bw > 2.7e9 && bw < 2.95e9, "occupied bandwidth {bw:e}");
    }
}
