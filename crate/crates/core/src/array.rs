//! Planar array with LO-path phase shifting: geometry, discrete phase
//! states, feed mismatch, array factor and beam metrics.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, StreamId};
use crate::sigproc::{amplitude_from_db, db};

/// Pattern values are clipped here, dB.
pub const PATTERN_FLOOR_DB: f64 = -120.0;
pub const DEFAULT_GRID_STEP_DEG: f64 = 0.05;
const HALF_POWER_DB: f64 = 3.010_299_956_639_812;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    /// Element pitch in wavelengths.
    pub spacing: f64,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self {
            rows: 4,
            cols: 4,
            spacing: 0.5,
        }
    }
}

impl ArrayGeometry {
    pub fn linear(n: usize, spacing: f64) -> Self {
        Self { rows: 1, cols: n, spacing }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::param("array", "rows and cols must be at least 1"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::param("array.spacing", "must be positive"));
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Element (x, y) in wavelengths, row-major, with element 0 (the phase
    /// reference) at the origin.
    pub fn element_positions(&self) -> Vec<(f64, f64)> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (c as f64 * self.spacing, r as f64 * self.spacing)))
            .collect()
    }
}

fn direction(theta_deg: f64, phi_deg: f64) -> (f64, f64) {
    let (st, (sp, cp)) = (theta_deg.to_radians().sin(), phi_deg.to_radians().sin_cos());
    (st * cp, st * sp)
}

/// Continuous per-element phases (radians) that point the beam at
/// (`theta_deg`, `phi_deg`).
pub fn steering_phases(geom: &ArrayGeometry, theta_deg: f64, phi_deg: f64) -> Result<Vec<f64>> {
    geom.validate()?;
    if !(theta_deg.abs() < 90.0) {
        return Err(Error::param("theta", "steering angle must lie inside ±90°"));
    }
    let (ux, uy) = direction(theta_deg, phi_deg);
    Ok(geom
        .element_positions()
        .into_iter()
        .map(|(x, y)| -TAU * (x * ux + y * uy))
        .collect())
}

/// Static amplitude/phase offset of one element's feed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedError {
    pub amplitude_db: f64,
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseShifterModel {
    pub n_states: u32,
    /// Random phase error added after quantization, degrees RMS.
    #[serde(default)]
    pub rms_phase_error_deg: f64,
    /// Feed mismatch magnitude; each element draws a random sign per term.
    #[serde(default = "default_feed_mismatch")]
    pub feed_mismatch: FeedError,
    /// Explicit per-element feed errors, overriding `feed_mismatch`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feed_errors: Option<Vec<FeedError>>,
}

fn default_feed_mismatch() -> FeedError {
    FeedError {
        amplitude_db: 0.02,
        phase_deg: 0.5,
    }
}

impl Default for PhaseShifterModel {
    fn default() -> Self {
        Self {
            n_states: 32,
            rms_phase_error_deg: 0.0,
            feed_mismatch: default_feed_mismatch(),
            feed_errors: None,
        }
    }
}

impl PhaseShifterModel {
    /// Quantizer only: no random or static errors.
    pub fn ideal(n_states: u32) -> Self {
        Self {
            n_states,
            rms_phase_error_deg: 0.0,
            feed_mismatch: FeedError {
                amplitude_db: 0.0,
                phase_deg: 0.0,
            },
            feed_errors: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_states < 2 {
            return Err(Error::param("n_states", "need at least two phase states"));
        }
        if !(self.rms_phase_error_deg >= 0.0) {
            return Err(Error::param("rms_phase_error_deg", "must be non-negative"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        TAU / self.n_states as f64
    }

    /// Nearest state index for a phase.
    pub fn state_of(&self, phase: f64) -> u32 {
        let k = (phase.rem_euclid(TAU) / self.step()).round() as u32;
        k % self.n_states
    }

    /// Per-element static feed errors for an `n`-element array.
    pub fn feed_errors_for(&self, n: usize, seed: u64) -> Result<Vec<FeedError>> {
        if let Some(list) = &self.feed_errors {
            if list.len() != n {
                return Err(Error::LengthMismatch { left: list.len(), right: n });
            }
            return Ok(list.clone());
        }
        let mut rng = stream(seed, StreamId::FeedError);
        let m = self.feed_mismatch;
        Ok((0..n)
            .map(|_| {
                let sa = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let sp = if rng.random::<bool>() { 1.0 } else { -1.0 };
                FeedError {
                    amplitude_db: sa * m.amplitude_db,
                    phase_deg: sp * m.phase_deg,
                }
            })
            .collect())
    }
}

fn wrap(phase: f64) -> f64 {
    (phase + PI).rem_euclid(TAU) - PI
}

/// Rounds each phase to the nearest state, then adds random and static
/// feed phase errors. Output phases are wrapped to (-π, π].
pub fn quantize_phases(phases: &[f64], ps: &PhaseShifterModel, seed: u64) -> Result<Vec<f64>> {
    ps.validate()?;
    let feed = ps.feed_errors_for(phases.len(), seed)?;
    let mut rng = stream(seed, StreamId::PhaseError);
    let jitter = Normal::new(0.0, ps.rms_phase_error_deg.to_radians()).map_err(|e| Error::param("rms_phase_error_deg", e.to_string()))?;
    Ok(phases
        .iter()
        .zip(&feed)
        .map(|(&p, f)| {
            let q = ps.state_of(p) as f64 * ps.step();
            let noise = if ps.rms_phase_error_deg > 0.0 { jitter.sample(&mut rng) } else { 0.0 };
            wrap(q + noise + f.phase_deg.to_radians())
        })
        .collect())
}

/// Complex element weights steering toward (`theta_deg`, `phi_deg`) through
/// the phase shifter, including feed amplitude errors.
pub fn steered_weights(
    geom: &ArrayGeometry,
    ps: &PhaseShifterModel,
    theta_deg: f64,
    phi_deg: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let phases = steering_phases(geom, theta_deg, phi_deg)?;
    let quantized = quantize_phases(&phases, ps, seed)?;
    let feed = ps.feed_errors_for(phases.len(), seed)?;
    Ok(quantized
        .iter()
        .zip(&feed)
        .map(|(&p, f)| Complex64::from_polar(amplitude_from_db(f.amplitude_db), p))
        .collect())
}

/// Angles from -90° to +90° inclusive at `step_deg`.
pub fn angle_grid(step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0 && step_deg <= 90.0) {
        return Err(Error::param("grid step", "must lie in (0, 90] degrees"));
    }
    let n = (180.0 / step_deg).round() as usize;
    Ok((0..=n).map(|k| -90.0 + 180.0 * k as f64 / n as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub angles_deg: Vec<f64>,
    /// Normalized to the pattern peak, dB.
    pub db: Vec<f64>,
    /// Unnormalized peak of |AF|.
    pub peak_amplitude: f64,
}

/// `|Σ w_n exp(j 2π p_n·û)|` over the `theta` grid in the `phi_deg` plane,
/// normalized to its own peak.
pub fn array_factor(geom: &ArrayGeometry, weights: &[Complex64], grid: &[f64], phi_deg: f64) -> Result<Pattern> {
    geom.validate()?;
    if grid.is_empty() {
        return Err(Error::param("angle grid", "is empty"));
    }
    if weights.len() != geom.n_elements() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: geom.n_elements(),
        });
    }
    let pos = geom.element_positions();
    let amps: Vec<f64> = grid
        .iter()
        .map(|&theta| {
            let (ux, uy) = direction(theta, phi_deg);
            pos.iter()
                .zip(weights)
                .map(|(&(x, y), w)| w * Complex64::from_polar(1.0, TAU * (x * ux + y * uy)))
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    let peak = amps.iter().cloned().fold(0.0, f64::max);
    let db = amps
        .iter()
        .map(|&a| if peak > 0.0 { db((a / peak).powi(2)).max(PATTERN_FLOOR_DB) } else { PATTERN_FLOOR_DB })
        .collect();
    Ok(Pattern {
        angles_deg: grid.to_vec(),
        db,
        peak_amplitude: peak,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamReport {
    pub steer_angle: f64,
    pub achieved_peak_angle: f64,
    pub hpbw: f64,
    pub peak_to_null_db: f64,
    pub sidelobe_level_db: f64,
    pub pattern: Pattern,
}

fn crossing(angles: &[f64], db: &[f64], inner: usize, outer: usize, level: f64) -> f64 {
    let (a0, a1) = (angles[inner], angles[outer]);
    let (d0, d1) = (db[inner], db[outer]);
    a0 + (level - d0) / (d1 - d0) * (a1 - a0)
}

/// Index of the first local minimum walking away from `peak`, and the index
/// where the walk stopped (the next rise, or the grid edge).
fn first_null(db: &[f64], peak: usize, forward: bool) -> Option<usize> {
    let step = |i: usize| if forward { i.checked_add(1).filter(|&j| j < db.len()) } else { i.checked_sub(1) };
    let mut i = step(peak)?;
    while let Some(j) = step(i) {
        if db[j] > db[i] {
            return Some(i);
        }
        i = j;
    }
    Some(i)
}

pub fn beam_metrics(pattern: &Pattern, steer_angle: f64) -> Result<BeamReport> {
    let angles = &pattern.angles_deg;
    let db = &pattern.db;
    if angles.len() < 3 || angles.len() != db.len() {
        return Err(Error::param("pattern", "needs at least three matching samples"));
    }
    let peak = (0..db.len()).fold(0, |best, i| if db[i] > db[best] { i } else { best });
    let level = db[peak] - HALF_POWER_DB;

    let left = (0..peak).rev().find(|&i| db[i] < level).ok_or(Error::NoHalfPowerCrossing)?;
    let right = (peak + 1..db.len()).find(|&i| db[i] < level).ok_or(Error::NoHalfPowerCrossing)?;
    let hpbw = crossing(angles, db, right - 1, right, level) - crossing(angles, db, left + 1, left, level);

    let nulls: Vec<usize> = [false, true].into_iter().filter_map(|fwd| first_null(db, peak, fwd)).collect();
    let shallowest = nulls.iter().map(|&i| db[i]).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = match nulls.as_slice() {
        [a, b] => (*a.min(b), *a.max(b)),
        [a] if *a < peak => (*a, db.len() - 1),
        [a] => (0, *a),
        _ => (0, db.len() - 1),
    };
    let sidelobe = (0..db.len())
        .filter(|&i| i < lo || i > hi)
        .map(|i| db[i])
        .fold(PATTERN_FLOOR_DB, f64::max);

    Ok(BeamReport {
        steer_angle,
        achieved_peak_angle: angles[peak],
        hpbw,
        peak_to_null_db: db[peak] - shallowest,
        sidelobe_level_db: sidelobe - db[peak],
        pattern: pattern.clone(),
    })
}

/// Quantized beam toward `theta_deg` in the `phi = 0` plane, with metrics.
pub fn steer_beam(
    geom: &ArrayGeometry,
    ps: &PhaseShifterModel,
    theta_deg: f64,
    grid: &[f64],
    seed: u64,
) -> Result<BeamReport> {
    let w = steered_weights(geom, ps, theta_deg, 0.0, seed)?;
    beam_metrics(&array_factor(geom, &w, grid, 0.0)?, theta_deg)
}

/// Radiated EIRP of `n` coherently combined elements, dBm.
pub fn eirp(pout_per_element_dbm: f64, n: usize, antenna_gain_dbi: f64, implementation_loss_db: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n_elements", "need at least one element"));
    }
    Ok(pout_per_element_dbm + 20.0 * (n as f64).log10() + antenna_gain_dbi - implementation_loss_db)
}
