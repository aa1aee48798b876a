use nalgebra::{DMatrix, DVector};

use super::{
    condition_number, criterion_value, j_theta, CriterionSpec, EstimateReport, Method, Stopwatch,
};
use crate::error::{Error, Result};
use crate::ode::OdeSystem;
use crate::smoothing::SmootherOutput;

/// Normal matrices with a larger condition number are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Weighted normal equations `A theta = r` of the discretized criterion for
/// a system with `F(x, theta) = G(x) theta + g0(x)`.
pub(crate) fn normal_equations(
    sm: &SmootherOutput,
    system: &dyn OdeSystem,
    spec: &CriterionSpec,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let lf = system.linear_form().ok_or_else(|| {
        Error::param(format!(
            "system `{}` has no linear-in-parameter form",
            system.name()
        ))
    })?;
    spec.check_output(sm)?;
    let d = system.dim_state();
    let p = system.dim_param();
    if sm.dim() != d {
        return Err(Error::param("smoother and system dimensions differ"));
    }
    let mut x = vec![0.0; d];
    let mut g = vec![0.0; d * p];
    let mut g0 = vec![0.0; d];
    let mut a = DMatrix::zeros(p, p);
    let mut r = DVector::zeros(p);
    for (k, &w) in spec.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for j in 0..d {
            x[j] = sm.xhat[(k, j)];
        }
        lf.g_matrix(&x, &mut g);
        lf.g0(&x, &mut g0);
        for c1 in 0..p {
            for c2 in c1..p {
                let s: f64 = (0..d).map(|i| g[i * p + c1] * g[i * p + c2]).sum();
                a[(c1, c2)] += s * w;
            }
            let s: f64 = (0..d)
                .map(|i| g[i * p + c1] * (sm.xhat_prime[(k, i)] - g0[i]))
                .sum();
            r[c1] += s * w;
        }
    }
    for c1 in 0..p {
        for c2 in 0..c1 {
            a[(c1, c2)] = a[(c2, c1)];
        }
    }
    Ok((a * spec.step(), r * spec.step()))
}

/// Closed-form minimizer of the criterion for linear-in-parameter systems.
///
/// The solution is projected onto the parameter box; a warning records
/// when that moved it.
pub fn solve_linear(
    sm: &SmootherOutput,
    system: &dyn OdeSystem,
    spec: &CriterionSpec,
) -> Result<EstimateReport> {
    let clock = Stopwatch::start();
    if !spec.has_positive_weight() {
        return Err(Error::param("weight vanishes on every grid point"));
    }
    let (a, r) = normal_equations(sm, system, spec)?;
    let condition = condition_number(&a);
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::Identifiability { condition });
    }
    let theta = a
        .clone()
        .cholesky()
        .map(|c| c.solve(&r))
        .ok_or(Error::Identifiability { condition })?;
    let (theta_hat, clipped) = system.param_box().clip(theta.as_slice());
    let mut warnings = Vec::new();
    if clipped {
        warnings.push(format!(
            "unconstrained solution {:?} clipped to the parameter box",
            theta.as_slice()
        ));
    }
    let criterion_at_min = criterion_value(sm, system, &theta_hat, spec)?;
    let j_cond = condition_number(&j_theta(system, &sm.xhat, &theta_hat, spec)?);
    Ok(EstimateReport {
        theta_hat,
        criterion_at_min,
        method: Method::LinearLs,
        wall_time: clock.seconds(),
        bandwidth_used: sm.bandwidth,
        iterations: 0,
        warnings,
        j_theta_condition: j_cond.is_finite().then_some(j_cond),
        converged: true,
        cross_check_gap: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{simulate_observations, NoiseSpec};
    use crate::ode::builtin_lotka_volterra;
    use crate::smoothing::{evaluate_on_grid, kernel_gegenbauer_order4, WeightFunction};

    fn lv_setup(seed: u64) -> (SmootherOutput, CriterionSpec) {
        let sys = builtin_lotka_volterra();
        let times: Vec<f64> = (1..=50).map(|i| 0.5 * i as f64).collect();
        let obs = simulate_observations(
            &sys,
            &[0.5; 4],
            &[1.0, 0.5],
            0.0,
            &times,
            &NoiseSpec::gaussian(0.1, seed),
        )
        .unwrap();
        let spec = CriterionSpec::new(
            WeightFunction::standard(0.0, 25.0).unwrap(),
            0.1,
            kernel_gegenbauer_order4(),
            1.2,
        )
        .unwrap();
        let sm = evaluate_on_grid(&obs, spec.kernel(), 1.2, spec.grid()).unwrap();
        (sm, spec)
    }

    #[test]
    fn solution_is_stationary() {
        let sys = builtin_lotka_volterra();
        for seed in 0..5 {
            let (sm, spec) = lv_setup(seed);
            let rep = solve_linear(&sm, &sys, &spec).unwrap();
            assert!(rep.warnings.is_empty());
            let (a, r) = normal_equations(&sm, &sys, &spec).unwrap();
            let theta = DVector::from_column_slice(&rep.theta_hat);
            let grad = (&a * theta - r) * 2.0;
            assert!(grad.norm() <= 1e-8, "gradient norm {}", grad.norm());
        }
    }

    #[test]
    fn requires_linear_form() {
        let (sm, spec) = lv_setup(1);
        let vdp = crate::ode::builtin_van_der_pol();
        assert!(matches!(
            normal_equations(&sm, &vdp, &spec),
            Err(Error::Parameter(_))
        ));
    }
}
