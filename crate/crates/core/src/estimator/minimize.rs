use super::optim::minimize_in_box;
use super::{
    condition_number, criterion_value, j_theta, solve_linear, CriterionSpec, EstimateReport,
    Method, MinimizeOptions, Stopwatch,
};
use crate::error::{Error, Result};
use crate::ode::OdeSystem;
use crate::smoothing::SmootherOutput;

/// Allowed gap between the derivative-free and closed-form solutions.
pub const CROSS_CHECK_TOL: f64 = 1e-5;

/// Minimizes the criterion over the parameter box without derivatives:
/// golden-section search for one parameter, multistart Nelder-Mead otherwise.
///
/// For linear-in-parameter systems the result is compared with
/// [`solve_linear`]; the gap is stored in the report and a warning is
/// added when it exceeds [`CROSS_CHECK_TOL`].
pub fn minimize_criterion(
    sm: &SmootherOutput,
    system: &dyn OdeSystem,
    spec: &CriterionSpec,
    opts: &MinimizeOptions,
) -> Result<EstimateReport> {
    let clock = Stopwatch::start();
    if !spec.has_positive_weight() {
        return Err(Error::param(
            "weight vanishes on every grid point; the criterion carries no information",
        ));
    }
    spec.check_output(sm)?;
    let param_box = system.param_box();
    let objective = |eta: &[f64]| criterion_value(sm, system, eta, spec).unwrap_or(f64::INFINITY);
    let best = minimize_in_box(objective, param_box, opts, None);
    if !best.value.is_finite() {
        return Err(Error::EstimationFailed(
            "no start produced a finite criterion value".into(),
        ));
    }
    let method = if system.dim_param() == 1 {
        Method::GoldenSection
    } else {
        Method::NelderMead
    };
    let mut warnings = Vec::new();
    if !best.converged {
        warnings.push(format!(
            "{} did not converge within the iteration budget",
            method.as_str()
        ));
    }
    let mut cross_check_gap = None;
    if system.linear_form().is_some() {
        match solve_linear(sm, system, spec) {
            Ok(lin) => {
                let gap = lin
                    .theta_hat
                    .iter()
                    .zip(&best.x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if gap > CROSS_CHECK_TOL {
                    warnings.push(format!(
                        "derivative-free solution differs from the linear least-squares solution by {gap:e}"
                    ));
                }
                cross_check_gap = Some(gap);
            }
            Err(e) => warnings.push(format!("linear cross-check unavailable: {e}")),
        }
    }
    let j_cond = j_theta(system, &sm.xhat, &best.x, spec)
        .map(|j| condition_number(&j))
        .ok()
        .filter(|c| c.is_finite());
    Ok(EstimateReport {
        theta_hat: best.x,
        criterion_at_min: best.value,
        method,
        wall_time: clock.seconds(),
        bandwidth_used: sm.bandwidth,
        iterations: best.iterations,
        warnings,
        j_theta_condition: j_cond,
        converged: best.converged,
        cross_check_gap,
    })
}
