use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigproc::{amplitude_from_db, ComplexSignal, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Full two-stage Weaver converter behind every element.
    PerElementWeaver,
    /// RF quadrature mixer per element, one image-selection IF stage shared by all.
    SharedIf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCount {
    pub iq_mixers: usize,
    pub iq_filters: usize,
}

pub fn count_components(n_elements: usize, topology: Topology) -> Result<ComponentCount> {
    if n_elements == 0 {
        return Err(Error::param("n_elements", "need at least one element"));
    }
    Ok(match topology {
        Topology::PerElementWeaver => ComponentCount {
            iq_mixers: 2 * n_elements,
            iq_filters: 2 * n_elements,
        },
        Topology::SharedIf => ComponentCount {
            iq_mixers: n_elements + 2,
            iq_filters: 2,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedIfTopology {
    pub n_elements: usize,
    #[serde(default)]
    pub combiner_gain_db: f64,
}

impl SharedIfTopology {
    pub const RF_MIXERS_PER_ELEMENT: usize = 1;
    pub const SHARED_IF_MIXERS: usize = 2;
    pub const SHARED_FILTERS: usize = 2;

    pub fn components(&self) -> Result<ComponentCount> {
        count_components(self.n_elements, Topology::SharedIf)
    }

    pub fn combine(&self, signals: &[ComplexSignal]) -> Result<ComplexSignal> {
        if signals.len() != self.n_elements {
            return Err(Error::LengthMismatch {
                left: signals.len(),
                right: self.n_elements,
            });
        }
        combine_shared_if(signals, self.combiner_gain_db)
    }

    pub fn split(&self, signal: &ComplexSignal) -> Result<Vec<ComplexSignal>> {
        split_shared_if(signal, self.n_elements, self.combiner_gain_db)
    }
}

/// Coherent sum of the element signals, scaled by the combiner gain.
pub fn combine_shared_if(signals: &[ComplexSignal], gain_db: f64) -> Result<ComplexSignal> {
    let first = signals.first().ok_or(Error::EmptySignal)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); first.len()];
    for s in signals {
        if !s.same_grid(first) {
            return Err(Error::SignalMismatch);
        }
        if s.len() != first.len() {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: first.len(),
            });
        }
        for (a, x) in acc.iter_mut().zip(&s.samples) {
            *a += x;
        }
    }
    let g = amplitude_from_db(gain_db);
    acc.iter_mut().for_each(|a| *a *= g);
    ComplexSignal::new(acc, first.sample_rate, first.center_freq)
}

/// `n` identical copies of `signal`, scaled by the splitter gain.
pub fn split_shared_if(signal: &ComplexSignal, n: usize, gain_db: f64) -> Result<Vec<ComplexSignal>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one output"));
    }
    let copy = signal.clone().scaled(Complex64::new(amplitude_from_db(gain_db), 0.0));
    Ok(vec![copy; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigproc::db;
    use proptest::prelude::*;

    #[test]
    fn sixteen_element_counts() {
        let shared = count_components(16, Topology::SharedIf).unwrap();
        assert_eq!((shared.iq_mixers, shared.iq_filters), (18, 2));
        let each = count_components(16, Topology::PerElementWeaver).unwrap();
        assert_eq!((each.iq_mixers, each.iq_filters), (32, 32));
        assert!(count_components(0, Topology::SharedIf).is_err());
    }

    #[test]
    fn crossover_at_two_elements() {
        // Enumerate a per-element build: each element has an RF and an IF
        // quadrature mixer and a filter after each.
        for n in 1..=1024usize {
            let shared = count_components(n, Topology::SharedIf).unwrap();
            let each = count_components(n, Topology::PerElementWeaver).unwrap();
            let enumerated: usize = (0..n).map(|_| 2).sum();
            assert_eq!(each.iq_mixers, enumerated);
            assert_eq!(each.iq_filters, enumerated);
            assert_eq!(shared.iq_mixers, (0..n).map(|_| 1).sum::<usize>() + 2);
            assert_eq!(shared.iq_filters, 2);
            assert_eq!(shared.iq_mixers <= each.iq_mixers, n >= 2);
        }
    }

    #[test]
    fn coherent_gain_of_sixteen() {
        let s = ComplexSignal::tone(1e6, 1.0, 256, 1e8, 0.0);
        let sum = combine_shared_if(&vec![s.clone(); 16], 0.0).unwrap();
        assert!((db(sum.power() / s.power()) - 24.0824).abs() < 1e-3);
    }

    #[test]
    fn anti_phase_cancels() {
        let s = ComplexSignal::tone(1e6, 1.0, 256, 1e8, 0.0);
        let neg = s.clone().scaled(Complex64::new(-1.0, 0.0));
        let sum = combine_shared_if(&[s.clone(), neg], 0.0).unwrap();
        assert!(sum.power() <= s.power() * 1e-8);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = ComplexSignal::tone(1e6, 1.0, 64, 1e8, 0.0);
        let b = ComplexSignal::tone(1e6, 1.0, 64, 2e8, 0.0);
        assert!(matches!(combine_shared_if(&[a, b], 0.0), Err(Error::SignalMismatch)));
    }

    #[test]
    fn topology_checks_element_count() {
        let t = SharedIfTopology { n_elements: 4, combiner_gain_db: 0.0 };
        let s = ComplexSignal::tone(1e6, 1.0, 64, 1e8, 0.0);
        assert!(t.combine(&[s.clone(), s.clone()]).is_err());
        assert_eq!(t.split(&s).unwrap().len(), 4);
        assert_eq!(t.components().unwrap().iq_mixers, 6);
    }

    proptest! {
        #[test]
        fn split_then_combine_scales_by_n(n in 1usize..64, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let s = ComplexSignal::new(vec![Complex64::new(re, im), Complex64::new(im, -re)], 1e6, 0.0).unwrap();
            let back = combine_shared_if(&split_shared_if(&s, n, 0.0).unwrap(), 0.0).unwrap();
            for (y, x) in back.samples.iter().zip(&s.samples) {
                prop_assert!((y - x * n as f64).norm() <= 1e-12 * (1.0 + x.norm()) * n as f64);
            }
        }
    }
}
