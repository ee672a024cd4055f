//! End-to-end link: QAM burst through the TX Weaver chain, the array, an
//! AWGN channel and the RX Weaver chain, scored by EVM.
//!
//! The receiver corrects a single complex gain, estimated once from a
//! training burst in the calibrated band. Switching bands flips only the
//! sideband bit and keeps that estimate.

mod scenario;

pub use scenario::{
    CalibrationConfig, Channel, ChainConfig, ImpairmentSet, Modulation, PulseConfig, Scenario, PPF_GAIN_DB, PPF_PHASE_DEG,
};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::array::{angle_grid, steer_beam, BeamReport, DEFAULT_GRID_STEP_DEG};
use crate::budget::{rx_snr, table1_figures, LinkBudgetInput, Table1Figures};
use crate::error::{Error, Result, Stage};
use crate::rng::{indexed_stream, StreamId};
use crate::sigproc::{
    add_noise_variance, db, from_db, matched_filter, measure_evm, power_spectrum, qam_demodulate, qam_modulate,
    rrc_shape, ComplexSignal, PulseShape, QamConstellation, EVM_FLOOR_DB,
};
use crate::weaver::{weaver_downconvert, weaver_upconvert, Direction, Sideband};

/// Symbols kept per constellation in a report.
pub const CONSTELLATION_POINTS: usize = 512;
const SPECTRUM_FFT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvmFigure {
    pub evm_rms: f64,
    pub evm_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandResult {
    pub sideband: Sideband,
    /// Symbol SNR at the receiver, dB; `None` when noiseless.
    pub snr_db: Option<f64>,
    pub evm: EvmFigure,
    pub bit_errors: usize,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationResult {
    pub modulation: Modulation,
    pub bit_rate: f64,
    pub samples_per_symbol: usize,
    pub calibrated_band: Sideband,
    /// Complex gain estimated in the calibrated band, (re, im).
    pub calibration_gain: (f64, f64),
    pub lower: BandResult,
    pub upper: BandResult,
    /// |EVM(LB) - EVM(UB)|, dB.
    pub variation_db: f64,
    /// Calibrated-band received symbols after gain correction, (re, im).
    pub constellation: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub seed: u64,
    /// Array gain at the achieved peak relative to an ideal N-element sum, dB.
    pub array_gain_db: f64,
    pub results: Vec<ModulationResult>,
    /// TX RF spectrum of the first modulation in the calibrated band.
    pub tx_spectrum: Spectrum,
    /// RX baseband spectrum of the same burst.
    pub rx_spectrum: Spectrum,
    pub beam: BeamReport,
    pub budget: Table1Figures,
}

/// Smallest power-of-two oversampling (8 or 16) whose sample rate holds the
/// whole Weaver envelope.
pub fn samples_per_symbol(s: &Scenario, m: &Modulation) -> Result<usize> {
    let w = s.chain.weaver(Direction::Tx, s.chain.sideband);
    let (lo, hi) = w.passband();
    let reach = w.lo2 + lo.abs().max(hi.abs());
    [8usize, 16]
        .into_iter()
        .find(|&sps| sps as f64 * m.symbol_rate / 2.0 > reach)
        .ok_or_else(|| {
            Error::param(
                "symbol_rate",
                format!("{:e} Bd cannot span ±{reach:e} Hz at 16 samples per symbol", m.symbol_rate),
            )
        })
}

fn pulse(s: &Scenario, m: &Modulation) -> Result<PulseShape> {
    let shape = PulseShape {
        rolloff: s.pulse.rolloff,
        span_symbols: s.pulse.span_symbols,
        samples_per_symbol: samples_per_symbol(s, m)?,
    };
    shape.validate()?;
    Ok(shape)
}

struct Burst {
    bits: Vec<u8>,
    symbols: Vec<Complex64>,
    waveform: ComplexSignal,
}

fn burst<R: Rng>(rng: &mut R, m: &Modulation, n: usize, shape: &PulseShape) -> Result<Burst> {
    let c = QamConstellation::new(m.order).map_err(Error::at(Stage::Modulation))?;
    let bits: Vec<u8> = (0..n * c.bits_per_symbol()).map(|_| rng.random_range(0..2u8)).collect();
    let symbols = qam_modulate(&bits, &c).map_err(Error::at(Stage::Modulation))?;
    let waveform = rrc_shape(&symbols, shape, m.symbol_rate).map_err(Error::at(Stage::PulseShaping))?;
    Ok(Burst { bits, symbols, waveform })
}

/// Symbol SNR for `band`, or `None` without noise.
fn band_snr(s: &Scenario, m: &Modulation, band: Sideband, array_gain_db: f64) -> Result<Option<f64>> {
    match s.channel {
        Channel::Noiseless {} => Ok(None),
        Channel::Snr { snr_db } => Ok(Some(snr_db)),
        Channel::Fspl {} => {
            let carrier = s.chain.weaver(Direction::Tx, band).rf_center();
            let link = LinkBudgetInput {
                carrier,
                bandwidth: m.symbol_rate,
                ..s.link_budget
            };
            let snr = rx_snr(&link).map_err(Error::at(Stage::Channel))?;
            Ok(Some(snr + array_gain_db))
        }
    }
}

/// Sends a waveform through TX chain, channel and RX chain, returning the
/// matched-filter output.
fn through_link<R: Rng>(
    s: &Scenario,
    b: &Burst,
    shape: &PulseShape,
    band: Sideband,
    snr_db: Option<f64>,
    noise: &mut R,
) -> Result<(ComplexSignal, ComplexSignal, Vec<Complex64>)> {
    let tx_cfg = s.chain.weaver(Direction::Tx, band);
    let rf = weaver_upconvert(&b.waveform, &tx_cfg, &s.impairments.tx).map_err(Error::at(Stage::TxChain))?;
    let received = match snr_db {
        None => rf.clone(),
        Some(snr) => {
            let es = rf.energy() / b.symbols.len() as f64;
            if es == 0.0 {
                return Err(Error::at(Stage::Channel)(Error::ZeroPower));
            }
            add_noise_variance(rf.clone(), es / from_db(snr), noise)
        }
    };
    let rx_cfg = s.chain.weaver(Direction::Rx, band);
    let bb = weaver_downconvert(&received, &rx_cfg, &s.impairments.rx).map_err(Error::at(Stage::RxChain))?;
    let y = matched_filter(&bb, shape, b.symbols.len()).map_err(Error::at(Stage::Demodulation))?;
    Ok((rf, bb, y))
}

/// Least-squares complex gain of `y` against `x`.
fn ls_gain(y: &[Complex64], x: &[Complex64]) -> Result<Complex64> {
    let num: Complex64 = y.iter().zip(x).map(|(a, b)| a * b.conj()).sum();
    let den: f64 = x.iter().map(|b| b.norm_sqr()).sum();
    if den == 0.0 || num.norm() == 0.0 {
        return Err(Error::at(Stage::Calibration)(Error::ZeroPower));
    }
    Ok(num / den)
}

/// Everything measured for one modulation in both bands.
struct Measured {
    result: ModulationResult,
    tx_rf: ComplexSignal,
    rx_bb: ComplexSignal,
}

fn measure_modulation(s: &Scenario, index: usize, array_gain_db: f64) -> Result<Measured> {
    let m = s.modulations[index];
    let shape = pulse(s, &m)?;
    let idx = index as u64;
    let cal_band = s.chain.sideband;

    let training = burst(
        &mut indexed_stream(s.seed, StreamId::CalibrationBits, idx),
        &m,
        s.calibration.training_symbols,
        &shape,
    )?;
    let cal_snr = band_snr(s, &m, cal_band, array_gain_db)?;
    let (_, _, y) = through_link(
        s,
        &training,
        &shape,
        cal_band,
        cal_snr,
        &mut indexed_stream(s.seed, StreamId::CalibrationNoise, idx),
    )?;
    let gain = ls_gain(&y, &training.symbols)?;

    let data = burst(&mut indexed_stream(s.seed, StreamId::Bits, idx), &m, m.n_symbols, &shape)?;
    let c = QamConstellation::new(m.order)?;
    let mut bands = Vec::with_capacity(2);
    let mut kept = None;
    for band in [Sideband::Lsb, Sideband::Usb] {
        let snr = band_snr(s, &m, band, array_gain_db)?;
        // Same noise realization in both bands.
        let mut noise = indexed_stream(s.seed, StreamId::Noise, idx);
        let (rf, bb, y) = through_link(s, &data, &shape, band, snr, &mut noise)?;
        let corrected: Vec<Complex64> = y.iter().map(|v| v / gain).collect();
        let evm = measure_evm(&corrected, &data.symbols).map_err(Error::at(Stage::Demodulation))?;
        let bits = qam_demodulate(&corrected, &c);
        let bit_errors = bits.iter().zip(&data.bits).filter(|(a, b)| a != b).count();
        bands.push(BandResult {
            sideband: band,
            snr_db: snr,
            evm: EvmFigure {
                evm_rms: evm.evm_rms,
                evm_db: evm.evm_db,
            },
            bit_errors,
            ber: bit_errors as f64 / bits.len() as f64,
        });
        if band == cal_band {
            let constellation = corrected.iter().take(CONSTELLATION_POINTS).map(|v| (v.re, v.im)).collect();
            kept = Some((rf, bb, constellation));
        }
    }
    let upper = bands.pop().expect("two bands");
    let lower = bands.pop().expect("two bands");
    let (tx_rf, rx_bb, constellation) = kept.expect("calibrated band measured");
    Ok(Measured {
        result: ModulationResult {
            modulation: m,
            bit_rate: m.bit_rate(),
            samples_per_symbol: shape.samples_per_symbol,
            calibrated_band: cal_band,
            calibration_gain: (gain.re, gain.im),
            variation_db: (lower.evm.evm_db - upper.evm.evm_db).abs(),
            lower,
            upper,
            constellation,
        },
        tx_rf,
        rx_bb,
    })
}

fn spectrum(sig: &ComplexSignal) -> Result<Spectrum> {
    let psd = power_spectrum(sig, SPECTRUM_FFT.min(sig.len().next_power_of_two() / 2).max(64))?;
    Ok(Spectrum {
        db: psd.density_db(),
        freqs: psd.freqs,
    })
}

/// Beam toward `theta` with the scenario's phase shifter, and its gain at
/// the achieved peak relative to a perfect coherent sum, dB.
fn beam_at(s: &Scenario, theta: f64) -> Result<(BeamReport, f64)> {
    let grid = angle_grid(DEFAULT_GRID_STEP_DEG)?;
    let beam = steer_beam(&s.array, &s.phase_shifter, theta, &grid, s.seed).map_err(Error::at(Stage::Array))?;
    let gain = db((beam.pattern.peak_amplitude / s.array.n_elements() as f64).powi(2)).max(EVM_FLOOR_DB);
    Ok((beam, gain))
}

/// Runs every modulation of the scenario in both bands.
pub fn run_link(s: &Scenario) -> Result<LinkReport> {
    s.validate()?;
    let (beam, array_gain_db) = beam_at(s, s.steer_deg)?;
    let mut results = Vec::with_capacity(s.modulations.len());
    let mut spectra = None;
    for index in 0..s.modulations.len() {
        let measured = measure_modulation(s, index, array_gain_db)?;
        if spectra.is_none() {
            spectra = Some((spectrum(&measured.tx_rf)?, spectrum(&measured.rx_bb)?));
        }
        results.push(measured.result);
    }
    let (tx_spectrum, rx_spectrum) = spectra.expect("at least one modulation");
    Ok(LinkReport {
        seed: s.seed,
        array_gain_db,
        results,
        tx_spectrum,
        rx_spectrum,
        beam,
        budget: table1_figures(&s.budget)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSwitch {
    pub modulation: Modulation,
    pub calibrated_band: Sideband,
    pub evm_lb_db: f64,
    pub evm_ub_db: f64,
    pub variation_db: f64,
}

/// Calibrates in the scenario's band, then flips the sideband bit and
/// measures the other band with the calibration held.
pub fn band_switch_experiment(s: &Scenario) -> Result<Vec<BandSwitch>> {
    s.validate()?;
    let (_, array_gain_db) = beam_at(s, s.steer_deg)?;
    (0..s.modulations.len())
        .map(|i| {
            let r = measure_modulation(s, i, array_gain_db)?.result;
            Ok(BandSwitch {
                modulation: r.modulation,
                calibrated_band: r.calibrated_band,
                evm_lb_db: r.lower.evm.evm_db,
                evm_ub_db: r.upper.evm.evm_db,
                variation_db: r.variation_db,
            })
        })
        .collect()
}

/// EVM of one modulation in the calibrated band, dB.
pub fn evm_db(s: &Scenario, index: usize) -> Result<f64> {
    if index >= s.modulations.len() {
        return Err(Error::param("modulation index", "out of range"));
    }
    s.validate()?;
    let (_, array_gain_db) = beam_at(s, s.steer_deg)?;
    let r = measure_modulation(s, index, array_gain_db)?.result;
    Ok(match r.calibrated_band {
        Sideband::Lsb => r.lower.evm.evm_db,
        Sideband::Usb => r.upper.evm.evm_db,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamPoint {
    pub beam: BeamReport,
    pub array_gain_db: f64,
    pub eirp_dbm: f64,
    pub evm_db: f64,
}

/// Steers to each angle and measures the first modulation's EVM at the
/// achieved peak. The phase-shifter error draws are shared by all angles.
pub fn beam_sweep_experiment(s: &Scenario, angles: &[f64]) -> Result<Vec<BeamPoint>> {
    s.validate()?;
    if let Some(bad) = angles.iter().find(|a| !(a.abs() < 90.0)) {
        return Err(Error::param("angles", format!("{bad}° lies outside ±90°")));
    }
    angles
        .iter()
        .map(|&theta| {
            let (beam, gain) = beam_at(s, theta)?;
            let r = measure_modulation(s, 0, gain)?.result;
            let evm = match r.calibrated_band {
                Sideband::Lsb => r.lower.evm.evm_db,
                Sideband::Usb => r.upper.evm.evm_db,
            };
            Ok(BeamPoint {
                beam,
                array_gain_db: gain,
                eirp_dbm: s.link_budget.eirp + gain,
                evm_db: evm,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessFit {
    pub gain_flatness_db: f64,
    pub evm_db: f64,
    pub target_evm_db: f64,
    pub iterations: usize,
}

const FIT_TOL_DB: f64 = 0.01;
const FIT_MAX_KNOB_DB: f64 = 12.0;

/// Bisects the IF gain-flatness knob until modulation `index` reaches
/// `target_evm_db` in the calibrated band.
pub fn fit_flatness(s: &Scenario, index: usize, target_evm_db: f64) -> Result<FlatnessFit> {
    let eval = |k: f64| {
        let mut t = s.clone();
        t.chain.gain_flatness_db = k;
        evm_db(&t, index)
    };
    let floor = eval(0.0)?;
    if floor > target_evm_db {
        return Err(Error::param(
            "target_evm_db",
            format!("unreachable: EVM is {floor:.2} dB with a flat IF"),
        ));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut iterations = 1;
    while eval(hi)? < target_evm_db {
        iterations += 1;
        lo = hi;
        hi *= 2.0;
        if hi > FIT_MAX_KNOB_DB {
            return Err(Error::param("target_evm_db", "needs more droop than the knob allows"));
        }
    }
    let mut best = (hi, eval(hi)?);
    for _ in 0..60 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let e = eval(mid)?;
        if (e - target_evm_db).abs() < (best.1 - target_evm_db).abs() {
            best = (mid, e);
        }
        if (e - target_evm_db).abs() <= FIT_TOL_DB {
            break;
        }
        if e < target_evm_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FlatnessFit {
        gain_flatness_db: best.0,
        evm_db: best.1,
        target_evm_db,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weaver::{IqImpairment, MixerStage};

    fn short(mut s: Scenario) -> Scenario {
        for m in &mut s.modulations {
            m.n_symbols = 4000;
        }
        s
    }

    fn evm_in(r: &ModulationResult, band: Sideband) -> f64 {
        match band {
            Sideband::Lsb => r.lower.evm.evm_db,
            Sideband::Usb => r.upper.evm.evm_db,
        }
    }

    #[test]
    fn oversampling_choice() {
        let s = Scenario::default();
        assert_eq!(samples_per_symbol(&s, &Modulation::new(16, 2e9)).unwrap(), 8);
        assert_eq!(samples_per_symbol(&s, &Modulation::new(64, 1.5e9)).unwrap(), 16);
        assert!(samples_per_symbol(&s, &Modulation::new(4, 0.5e9)).is_err());
    }

    #[test]
    fn noiseless_ideal_link() {
        let s = short(Scenario {
            channel: Channel::Noiseless {},
            phase_shifter: crate::array::PhaseShifterModel::ideal(32),
            ..Default::default()
        });
        let r = run_link(&s).unwrap();
        for m in &r.results {
            assert!(m.lower.evm.evm_db <= -60.0, "{}", m.lower.evm.evm_db);
            assert!(m.upper.evm.evm_db <= -60.0);
            assert_eq!(m.lower.bit_errors, 0);
        }
    }

    #[test]
    fn awgn_only_matches_snr() {
        for snr in [15.0, 24.0] {
            let s = Scenario {
                channel: Channel::Snr { snr_db: snr },
                ..Default::default()
            };
            let r = run_link(&s).unwrap();
            for m in &r.results {
                assert!((m.lower.evm.evm_db + snr).abs() <= 0.3, "{snr}: {}", m.lower.evm.evm_db);
            }
        }
    }

    #[test]
    fn stage_errors_are_tagged() {
        let s = Scenario::default();
        let m = Modulation::new(16, 2e9);
        // Four samples per symbol cannot hold the envelope about LO1.
        let shape = PulseShape {
            samples_per_symbol: 4,
            ..Default::default()
        };
        let b = burst(&mut indexed_stream(0, StreamId::Bits, 0), &m, 256, &shape).unwrap();
        let mut rng = indexed_stream(0, StreamId::Noise, 0);
        let err = through_link(&s, &b, &shape, Sideband::Lsb, None, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: Stage::TxChain, .. }), "{err}");
        assert!(err.to_string().starts_with("tx-chain stage failed"));
    }

    #[test]
    fn symmetric_impairments_give_equal_bands() {
        let mut s = short(Scenario::default());
        let imp = IqImpairment::new(1.0, 2.5, MixerStage::If).unwrap();
        s.impairments.tx = vec![imp, IqImpairment::new(1.0, 2.5, MixerStage::Rf).unwrap()];
        s.impairments.rx = s.impairments.tx.clone();
        s.chain.gain_flatness_db = 1.0;
        for r in band_switch_experiment(&s).unwrap() {
            assert!(r.variation_db <= 0.2, "{r:?}");
        }
    }

    #[test]
    fn one_sided_mismatch_opens_a_gap() {
        let mut prev = -1.0;
        for (g, p) in [(0.0, 0.0), (1.0, 5.0), (3.0, 15.0), (6.0, 30.0)] {
            let mut s = short(Scenario::default());
            s.modulations.truncate(1);
            s.impairments.tx = vec![IqImpairment::new(g, p, MixerStage::If).unwrap().only_on(Sideband::Lsb)];
            let v = band_switch_experiment(&s).unwrap()[0].variation_db;
            assert!(v >= prev, "{v} after {prev}");
            prev = v;
        }
        assert!(prev > 1.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let s = short(Scenario {
            seed: 42,
            ..Default::default()
        });
        let a = serde_json::to_string(&run_link(&s).unwrap()).unwrap();
        let b = serde_json::to_string(&run_link(&s).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = short(Scenario {
            seed: 43,
            ..Default::default()
        });
        assert_ne!(a, serde_json::to_string(&run_link(&other).unwrap()).unwrap());
    }

    #[test]
    fn droop_degrades_monotonically() {
        let mut prev = f64::NEG_INFINITY;
        for k in [0.0, 0.5, 1.0] {
            let mut s = short(Scenario::default());
            s.chain.gain_flatness_db = k;
            let e = evm_db(&s, 1).unwrap();
            assert!(e >= prev);
            prev = e;
        }
    }

    #[test]
    fn imbalance_degrades_monotonically() {
        let mut prev = f64::NEG_INFINITY;
        for (g, p) in [(0.0, 0.0), (2.0, 10.0), (4.0, 20.0)] {
            let mut s = short(Scenario {
                channel: Channel::Snr { snr_db: 40.0 },
                ..Default::default()
            });
            let stages = [MixerStage::Rf, MixerStage::If].map(|st| IqImpairment::new(g, p, st).unwrap());
            s.impairments.tx = stages.to_vec();
            let e = evm_in(&run_link(&s).unwrap().results[0], Sideband::Lsb);
            assert!(e >= prev - 0.01, "{e} vs {prev}");
            prev = e;
        }
    }

    #[test]
    fn sweep_peaks_at_broadside() {
        let mut s = short(Scenario::default());
        s.modulations.truncate(1);
        let pts = beam_sweep_experiment(&s, &[-30.0, 0.0, 30.0]).unwrap();
        let best = pts.iter().map(|p| p.eirp_dbm).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(pts[1].eirp_dbm, best);
        for p in &pts {
            assert!((p.beam.achieved_peak_angle - p.beam.steer_angle).abs() <= 1.0);
            assert!(p.beam.peak_to_null_db >= 15.0);
        }
        assert!(beam_sweep_experiment(&s, &[95.0]).is_err());
    }
}
