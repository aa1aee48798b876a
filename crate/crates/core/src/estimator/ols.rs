use super::optim::minimize_in_box;
use super::{EstimateReport, Method, MinimizeOptions, Stopwatch};
use crate::error::{Error, Result};
use crate::ode::{rk4_at_times, OdeSystem};
use crate::smoothing::ObservationSet;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsOptions {
    pub minimize: MinimizeOptions,
    /// Largest RK4 substep used for every trial integration.
    pub step: f64,
    /// Explicit starting points; replaces the lattice when given.
    pub starts: Option<Vec<Vec<f64>>>,
}

impl Default for OlsOptions {
    fn default() -> Self {
        Self {
            minimize: MinimizeOptions {
                tol: 1e-6,
                ..MinimizeOptions::default()
            },
            step: 2e-2,
            starts: None,
        }
    }
}

/// Residual sum of squares `sum_ij (Y_ij - x_eta_j(t_i))^2` with the
/// trajectory integrated from `xi` at `obs.t_origin()`.
pub fn ols_rss(
    obs: &ObservationSet,
    system: &dyn OdeSystem,
    xi: &[f64],
    eta: &[f64],
    step: f64,
) -> Result<f64> {
    if obs.dim() != system.dim_state() {
        return Err(Error::param(
            "observation columns do not match the system dimension",
        ));
    }
    let tr = rk4_at_times(system, eta, xi, obs.t_origin(), obs.times(), step)?;
    Ok((&tr.states - obs.y()).iter().map(|r| r * r).sum())
}

/// Ordinary least squares fit of the integrated trajectory to the data,
/// with the initial state treated as known. Diverging trial integrations
/// score `+inf`.
pub fn ols_estimate(
    obs: &ObservationSet,
    system: &dyn OdeSystem,
    xi: &[f64],
    opts: &OlsOptions,
) -> Result<EstimateReport> {
    let clock = Stopwatch::start();
    if !(opts.step > 0.0) {
        return Err(Error::param("integration step must be positive"));
    }
    if xi.len() != system.dim_state() || obs.dim() != system.dim_state() {
        return Err(Error::param(
            "initial state or data do not match the system dimension",
        ));
    }
    let objective = |eta: &[f64]| ols_rss(obs, system, xi, eta, opts.step).unwrap_or(f64::INFINITY);
    let best = minimize_in_box(
        objective,
        system.param_box(),
        &opts.minimize,
        opts.starts.as_deref(),
    );
    if !best.value.is_finite() {
        return Err(Error::EstimationFailed(
            "every OLS start diverged or left the parameter box".into(),
        ));
    }
    let mut warnings = Vec::new();
    if !best.converged {
        warnings.push("ols optimizer did not converge within the iteration budget".into());
    }
    Ok(EstimateReport {
        theta_hat: best.x,
        criterion_at_min: best.value,
        method: Method::Ols,
        wall_time: clock.seconds(),
        bandwidth_used: 0.0,
        iterations: best.iterations,
        warnings,
        j_theta_condition: None,
        converged: best.converged,
        cross_check_gap: None,
    })
}
