use weaversim_bench::{baseband, link_pulse, short_link, symbols};
use weaversim_core::link::Modulation;

#[test]
fn fixtures_are_valid_inputs() {
    assert_eq!(symbols(16, 100), symbols(16, 100));
    let m = Modulation::new(16, 2e9);
    let bb = baseband(16, 2e9, 100);
    assert!(bb.samples.len() >= 100 * link_pulse(&m).samples_per_symbol);
    let s = short_link(500);
    s.validate().unwrap();
    assert!(s.modulations.iter().all(|m| m.n_symbols == 500));
}
