//! Kernel smoothing of fixed-design data: kernels, the boundary weight
//! function, and the Priestley-Chao estimator with its derivative.

mod kernel;
mod observations;
mod priestley;
mod weight;

pub use kernel::{kernel_gegenbauer_order4, kernel_of_order, kernel_order2, Kernel, KernelMoments};
pub use observations::ObservationSet;
pub use priestley::{
    evaluate_on_grid, evaluate_on_grid_naive, priestley_chao, priestley_chao_deriv, sup_error,
    SmootherOutput,
};
pub use weight::{
    plateau, plateau_deriv, weight_from_paper, WeightFunction, DEFAULT_BETA, DEFAULT_C,
    DEFAULT_MARGIN_SCALE,
};

/// `t_lo + k * step` for every `k` with `k * step < t_hi - t_lo`.
pub fn equidistant_grid(t_lo: f64, t_hi: f64, step: f64) -> Vec<f64> {
    let count = ((t_hi - t_lo) / step - 1e-9).ceil().max(1.0) as usize;
    (0..count).map(|k| t_lo + k as f64 * step).collect()
}
