#![allow(dead_code)]

use sme_core::estimator::CriterionSpec;
use sme_core::experiments::{simulate_observations, NoiseSpec};
use sme_core::ode::{builtin_lotka_volterra, builtin_van_der_pol};
use sme_core::smoothing::{kernel_gegenbauer_order4, ObservationSet, WeightFunction};

pub const LV_THETA: [f64; 4] = [0.5; 4];
pub const LV_XI: [f64; 2] = [1.0, 0.5];
pub const VDP_THETA: [f64; 1] = [0.8];
pub const VDP_XI: [f64; 2] = [1.0, 1.0];
/// sigma^2 = 0.01
pub const PAPER_SIGMA: f64 = 0.1;

/// `t_i = 0.5 i`, `i = 1..=50`.
pub fn paper_times() -> Vec<f64> {
    (1..=50).map(|i| 0.5 * i as f64).collect()
}

pub fn lv_obs(seed: u64, sigma: f64) -> ObservationSet {
    simulate_observations(
        &builtin_lotka_volterra(),
        &LV_THETA,
        &LV_XI,
        0.0,
        &paper_times(),
        &NoiseSpec::gaussian(sigma, seed),
    )
    .unwrap()
}

pub fn vdp_obs(seed: u64, sigma: f64) -> ObservationSet {
    simulate_observations(
        &builtin_van_der_pol(),
        &VDP_THETA,
        &VDP_XI,
        0.0,
        &paper_times(),
        &NoiseSpec::gaussian(sigma, seed),
    )
    .unwrap()
}

/// Order-4 kernel, standard weight on `[0, 25]`, grid step 0.1.
pub fn paper_spec(bandwidth: f64) -> CriterionSpec {
    CriterionSpec::new(
        WeightFunction::standard(0.0, 25.0).unwrap(),
        0.1,
        kernel_gegenbauer_order4(),
        bandwidth,
    )
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
