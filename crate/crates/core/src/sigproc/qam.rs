use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square Gray-coded QAM constellation normalized to unit average power.
///
/// Labels split into an in-phase half (high bits) and a quadrature half
/// (low bits); each half is Gray-decoded to a level index on its axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QamConstellation {
    order: usize,
    points: Vec<Complex64>,
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl QamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::param("qam order", format!("{order} is not one of 4, 16, 64")));
        }
        let side = (order as f64).sqrt() as usize;
        let axis_bits = side.trailing_zeros();
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt().recip();
        let level = |g: usize| (2.0 * gray_to_binary(g) as f64 - (side as f64 - 1.0)) * scale;
        let mask = side - 1;
        let points = (0..order)
            .map(|label| Complex64::new(level(label >> axis_bits), level(label & mask)))
            .collect();
        Ok(Self { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Points indexed by bit label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Label of the nearest point; exact ties resolve to the lowest label.
    pub fn decide(&self, symbol: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (symbol - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

/// Maps each `bits_per_symbol` group (MSB first) to a constellation point.
pub fn qam_modulate(bits: &[u8], c: &QamConstellation) -> Result<Vec<Complex64>> {
    let k = c.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::param(
            "bits",
            format!("{} bits is not a multiple of {k} bits per symbol", bits.len()),
        ));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::param("bits", "values must be 0 or 1"));
    }
    Ok(bits
        .chunks_exact(k)
        .map(|group| {
            let label = group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            c.point(label)
        })
        .collect())
}

/// Hard-decision demodulation to bits.
pub fn qam_demodulate(symbols: &[Complex64], c: &QamConstellation) -> Vec<u8> {
    let k = c.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * k);
    for &s in symbols {
        let label = c.decide(s);
        bits.extend((0..k).rev().map(|i| ((label >> i) & 1) as u8));
    }
    bits
}
