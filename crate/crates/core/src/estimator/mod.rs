//! The matching step: criterion, solvers, OLS baseline, bandwidth sweep.

mod bandwidth;
mod criterion;
mod linear;
mod minimize;
mod ols;
pub mod optim;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use bandwidth::{select_bandwidth_rss, BandwidthRow, BandwidthSelection, SmePipeline};
pub use criterion::{condition_number, criterion_value, j_theta};
pub use linear::{solve_linear, SINGULAR_CONDITION};
pub use minimize::{minimize_criterion, CROSS_CHECK_TOL};
pub use ols::{ols_estimate, ols_rss, OlsOptions};
pub use optim::MinimizeOptions;

use crate::error::{Error, Result};
use crate::ode::{rk4_at_times, OdeSystem};
use crate::smoothing::{equidistant_grid, Kernel, SmootherOutput, WeightFunction};

/// Default Riemann-sum step for the criterion grid, in time units.
pub const DEFAULT_GRID_STEP: f64 = 0.1;

/// Discretization of `int ||x_hat' - F(x_hat, eta)||^2 w(t) dt` as a Riemann
/// sum over an equidistant grid.
#[derive(Debug, Clone)]
pub struct CriterionSpec {
    weight: WeightFunction,
    grid: Vec<f64>,
    step: f64,
    weights: Vec<f64>,
    kernel: Kernel,
    bandwidth: f64,
}

impl CriterionSpec {
    /// Grid `t_lo + k * step` over the weight's window.
    pub fn new(weight: WeightFunction, step: f64, kernel: Kernel, bandwidth: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::param(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let grid = equidistant_grid(weight.t_lo(), weight.t_hi(), step);
        Self::with_grid(weight, grid, kernel, bandwidth)
    }

    /// Uses an explicit equidistant grid, which must cover the weight's support.
    pub fn with_grid(
        weight: WeightFunction,
        grid: Vec<f64>,
        kernel: Kernel,
        bandwidth: f64,
    ) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::param(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        if grid.len() < 2 {
            return Err(Error::param("criterion grid needs at least two points"));
        }
        let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
        let uniform = step > 0.0
            && grid.iter().enumerate().all(|(k, &s)| {
                (s - (grid[0] + k as f64 * step)).abs() <= 1e-9 * step * (k + 1) as f64
            });
        if !uniform {
            return Err(Error::param(
                "criterion grid must be equidistant and increasing",
            ));
        }
        let (a, b) = weight.support();
        if grid[0] > a || grid[grid.len() - 1] + step < b {
            return Err(Error::param(format!(
                "grid [{}, {}] does not cover the weight support ({a}, {b})",
                grid[0],
                grid[grid.len() - 1]
            )));
        }
        let weights = grid.iter().map(|&s| weight.eval(s)).collect();
        Ok(Self {
            weight,
            grid,
            step,
            weights,
            kernel,
            bandwidth,
        })
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    /// `w(s_k)` for every grid point.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        Self::with_grid(
            self.weight.clone(),
            self.grid.clone(),
            self.kernel.clone(),
            bandwidth,
        )
    }

    pub fn with_weight(&self, weight: WeightFunction) -> Result<Self> {
        Self::with_grid(
            weight,
            self.grid.clone(),
            self.kernel.clone(),
            self.bandwidth,
        )
    }

    pub(crate) fn has_positive_weight(&self) -> bool {
        self.weights.iter().any(|&w| w > 0.0)
    }

    pub(crate) fn check_output(&self, sm: &SmootherOutput) -> Result<()> {
        if sm.grid.len() != self.grid.len()
            || sm
                .grid
                .iter()
                .zip(&self.grid)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()))
        {
            return Err(Error::param(
                "smoother grid differs from the criterion grid",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LinearLs,
    NelderMead,
    GoldenSection,
    Ols,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::LinearLs => "linear-ls",
            Method::NelderMead => "nelder-mead",
            Method::GoldenSection => "golden-section",
            Method::Ols => "ols",
        }
    }
}

/// Outcome of one estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub theta_hat: Vec<f64>,
    #[serde(rename = "criterion")]
    pub criterion_at_min: f64,
    pub method: Method,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
    /// Smoothing bandwidth; 0 for the OLS baseline, which does not smooth.
    #[serde(rename = "bandwidth")]
    pub bandwidth_used: f64,
    pub iterations: usize,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_theta_condition: Option<f64>,
    #[serde(default = "default_true")]
    pub converged: bool,
    /// Largest componentwise gap to the closed-form linear solution, when checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check_gap: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl EstimateReport {
    /// JSON value with the wall-time field removed, for reproducibility checks.
    pub fn to_json_without_timing(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_time_s");
        }
        v
    }
}

pub(crate) struct Stopwatch(Instant);

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self(Instant::now())
    }
    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// The true solution and its derivative `F(x, theta)` on the criterion grid,
/// packaged as if they came out of the smoother.
pub fn exact_plugin(
    system: &dyn OdeSystem,
    theta: &[f64],
    xi: &[f64],
    t0: f64,
    spec: &CriterionSpec,
    step: f64,
) -> Result<SmootherOutput> {
    let tr = rk4_at_times(system, theta, xi, t0, spec.grid(), step)?;
    let d = system.dim_state();
    let mut prime = tr.states.clone();
    let mut f = vec![0.0; d];
    for k in 0..tr.len() {
        system.rhs(&tr.state(k), theta, &mut f)?;
        for j in 0..d {
            prime[(k, j)] = f[j];
        }
    }
    SmootherOutput::from_parts(
        spec.grid().to_vec(),
        tr.states,
        prime,
        spec.bandwidth(),
        spec.kernel().order(),
    )
}
