use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reported EVM for an error-free measurement.
pub const EVM_FLOOR_DB: f64 = -120.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvmResult {
    pub evm_rms: f64,
    pub evm_db: f64,
    #[serde(skip)]
    pub per_symbol_errors: Vec<Complex64>,
}

/// RMS error vector normalized to the RMS of the reference symbols.
pub fn measure_evm(rx: &[Complex64], reference: &[Complex64]) -> Result<EvmResult> {
    if rx.is_empty() || reference.is_empty() {
        return Err(Error::EmptySignal);
    }
    if rx.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: rx.len(),
            right: reference.len(),
        });
    }
    let ref_power: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    if ref_power == 0.0 {
        return Err(Error::ZeroPower);
    }
    let per_symbol_errors: Vec<Complex64> = rx.iter().zip(reference).map(|(a, b)| a - b).collect();
    let err_power: f64 = per_symbol_errors.iter().map(|e| e.norm_sqr()).sum();
    let evm_rms = (err_power / ref_power).sqrt();
    let evm_db = if evm_rms > 0.0 {
        (20.0 * evm_rms.log10()).max(EVM_FLOOR_DB)
    } else {
        EVM_FLOOR_DB
    };
    Ok(EvmResult {
        evm_rms,
        evm_db,
        per_symbol_errors,
    })
}
