//! Shared inputs for the criterion benches.

use rand::Rng;
use weaversim_core::link::{samples_per_symbol, Modulation};
use weaversim_core::rng::substream;
use weaversim_core::sigproc::{qam_modulate, rrc_shape, Complex64};
use weaversim_core::{ComplexSignal, PulseShape, QamConstellation, Scenario};

/// Random QAM symbols from a fixed seed.
pub fn symbols(order: usize, n: usize) -> Vec<Complex64> {
    let c = QamConstellation::new(order).expect("valid order");
    let mut rng = substream(1, 0);
    let bits: Vec<u8> = (0..n * c.bits_per_symbol()).map(|_| rng.random_range(0..2)).collect();
    qam_modulate(&bits, &c).expect("whole symbols")
}

/// Pulse shape at the rate the link simulation would pick for `m`.
pub fn link_pulse(m: &Modulation) -> PulseShape {
    let s = Scenario::default();
    PulseShape {
        rolloff: s.pulse.rolloff,
        span_symbols: s.pulse.span_symbols,
        samples_per_symbol: samples_per_symbol(&s, m).expect("default scenario"),
    }
}

/// Shaped baseband burst of `n` symbols, ready for the Weaver chain.
pub fn baseband(order: usize, symbol_rate: f64, n: usize) -> ComplexSignal {
    let m = Modulation::new(order, symbol_rate);
    rrc_shape(&symbols(order, n), &link_pulse(&m), symbol_rate).expect("valid pulse")
}

/// Default link scenario with shortened bursts.
pub fn short_link(n_symbols: usize) -> Scenario {
    let mut s = Scenario::worst_case_budget();
    for m in &mut s.modulations {
        m.n_symbols = n_symbols;
    }
    s.calibration.training_symbols = n_symbols.min(s.calibration.training_symbols);
    s
}
