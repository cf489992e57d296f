//! Rejection-rate properties of the residual independence tests.

use parcelingam::evaluation::calibration::{
    exogenous_rates, hsic_false_positive_rate, hsic_vs_permutation, sink_rates,
};

const ALPHA: f64 = 0.05;

#[test]
fn exogenous_variable_passes_and_others_fail() {
    let r = exogenous_rates(4, 2000, 50, 101, ALPHA).unwrap();
    assert!(r.accept_true >= 0.9, "{r:?}");
    assert!(r.reject_others >= 0.9, "{r:?}");
}

#[test]
fn sink_variable_passes_and_others_fail() {
    let r = sink_rates(4, 2000, 50, 202, ALPHA).unwrap();
    assert!(r.accept_true >= 0.9, "{r:?}");
    assert!(r.reject_others >= 0.9, "{r:?}");
}

#[test]
fn gamma_null_rate_at_small_n() {
    let fp = hsic_false_positive_rate(200, 500, 303, ALPHA);
    assert!((0.02..=0.09).contains(&fp), "false-positive rate {fp}");
}

#[test]
fn gamma_tracks_permutation_at_small_n() {
    let (g, p) = hsic_vs_permutation(100, 50, 500, 404, ALPHA);
    assert!((g - p).abs() <= 0.04 + 1e-12, "gamma {g}, permutation {p}");
}
