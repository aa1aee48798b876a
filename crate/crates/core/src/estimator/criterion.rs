use nalgebra::{DMatrix, SymmetricEigen};

use super::CriterionSpec;
use crate::error::{Error, Result};
use crate::ode::OdeSystem;
use crate::smoothing::SmootherOutput;

/// `sum_k ||x_hat'(s_k) - F(x_hat(s_k), eta)||^2 w(s_k) step`.
///
/// Grid points with zero weight are skipped.
pub fn criterion_value(
    sm: &SmootherOutput,
    system: &dyn OdeSystem,
    eta: &[f64],
    spec: &CriterionSpec,
) -> Result<f64> {
    system.param_box().check(eta)?;
    spec.check_output(sm)?;
    let d = system.dim_state();
    if sm.dim() != d {
        return Err(Error::param(format!(
            "smoother has {} components, system has {d}",
            sm.dim()
        )));
    }
    let mut x = vec![0.0; d];
    let mut f = vec![0.0; d];
    let mut total = 0.0;
    for (k, &w) in spec.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for j in 0..d {
            x[j] = sm.xhat[(k, j)];
        }
        system
            .rhs(&x, eta, &mut f)
            .map_err(|e| Error::Criterion(Box::new(e)))?;
        let sq: f64 = (0..d).map(|j| (sm.xhat_prime[(k, j)] - f[j]).powi(2)).sum();
        total += sq * w;
    }
    Ok(total * spec.step())
}

/// `J = sum_k F_theta(x_k, theta)^T F_theta(x_k, theta) w(s_k) step`, with
/// `x_on_grid` holding one state per grid point.
pub fn j_theta(
    system: &dyn OdeSystem,
    x_on_grid: &DMatrix<f64>,
    theta: &[f64],
    spec: &CriterionSpec,
) -> Result<DMatrix<f64>> {
    system.param_box().check(theta)?;
    let d = system.dim_state();
    let p = system.dim_param();
    if x_on_grid.nrows() != spec.grid().len() || x_on_grid.ncols() != d {
        return Err(Error::param(
            "state matrix does not match the criterion grid",
        ));
    }
    let mut x = vec![0.0; d];
    let mut jp = vec![0.0; d * p];
    let mut acc = DMatrix::zeros(p, p);
    for (k, &w) in spec.weights().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for j in 0..d {
            x[j] = x_on_grid[(k, j)];
        }
        system.jac_param(&x, theta, &mut jp)?;
        for a in 0..p {
            for b in a..p {
                let s: f64 = (0..d).map(|i| jp[i * p + a] * jp[i * p + b]).sum();
                acc[(a, b)] += s * w;
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            acc[(a, b)] = acc[(b, a)];
        }
    }
    Ok(acc * spec.step())
}

/// Ratio of extreme eigenvalues of a symmetric matrix; infinite when the
/// smallest is not positive.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 && max.is_finite() {
        max / min
    } else {
        f64::INFINITY
    }
}
