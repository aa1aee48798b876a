//! ODE systems `x' = F(x, theta)` and a fixed-step reference integrator.
//!
//! Matrices handed across the [`OdeSystem`] boundary are flat row-major
//! slices so the hot loops of the criterion and the integrator do not
//! allocate.

mod builtin;
mod integrate;
mod polynomial;

pub use builtin::{
    builtin_by_name, builtin_exponential, builtin_lotka_volterra, builtin_van_der_pol, Exponential,
    LotkaVolterra, VanDerPol, BUILTIN_NAMES,
};
pub use integrate::{rk4_at_times, rk4_integrate, Trajectory, DEFAULT_STEP};
pub use polynomial::{Monomial, PolynomialLinearSystem, PolynomialSpec};

use crate::error::{Error, Result};

/// Compact parameter set: a product of closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    bounds: Vec<(f64, f64)>,
}

impl ParamBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::param(
                "parameter box must have at least one dimension",
            ));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::param(format!(
                    "parameter box axis {i}: need finite lo <= hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.bounds.len()
            && theta
                .iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.bounds.len() {
            return Err(Error::param(format!(
                "parameter vector has length {}, expected {}",
                theta.len(),
                self.bounds.len()
            )));
        }
        for (index, (&value, &(lo, hi))) in theta.iter().zip(&self.bounds).enumerate() {
            if !(value >= lo && value <= hi) {
                return Err(Error::OutOfBox {
                    index,
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// Projects onto the box; the flag reports whether any coordinate moved.
    pub fn clip(&self, theta: &[f64]) -> (Vec<f64>, bool) {
        let mut clipped = false;
        let out = theta
            .iter()
            .zip(&self.bounds)
            .map(|(&v, &(lo, hi))| {
                let c = v.clamp(lo, hi);
                clipped |= c != v;
                c
            })
            .collect();
        (out, clipped)
    }
}

/// Decomposition `F(x, theta) = G(x) theta + g0(x)`.
pub trait LinearForm: Send + Sync {
    /// Writes `G(x)` as a row-major `d x p` matrix.
    fn g_matrix(&self, x: &[f64], out: &mut [f64]);
    fn g0(&self, x: &[f64], out: &mut [f64]);
}

/// An autonomous system `x' = F(x, theta)` with analytic Jacobians.
pub trait OdeSystem: Send + Sync {
    fn name(&self) -> &str;
    fn dim_state(&self) -> usize;
    fn dim_param(&self) -> usize;
    fn param_box(&self) -> &ParamBox;

    fn rhs(&self, x: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()>;

    /// `dF_i / dtheta_j`, row-major `d x p`.
    fn jac_param(&self, x: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()>;

    /// `dF_i / dx_j`, row-major `d x d`.
    fn jac_state(&self, x: &[f64], theta: &[f64], out: &mut [f64]) -> Result<()>;

    fn linear_form(&self) -> Option<&dyn LinearForm> {
        None
    }
}

/// Largest absolute deviation between the analytic Jacobians and central
/// differences of `rhs` with step `h`, as `(err_param, err_state)`.
pub fn jacobian_selfcheck(
    system: &dyn OdeSystem,
    x: &[f64],
    theta: &[f64],
    h: f64,
) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::param("finite-difference step must be positive"));
    }
    let d = system.dim_state();
    let p = system.dim_param();
    let mut jp = vec![0.0; d * p];
    let mut jx = vec![0.0; d * d];
    system.jac_param(x, theta, &mut jp)?;
    system.jac_state(x, theta, &mut jx)?;

    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];

    let mut err_param = 0.0_f64;
    let mut th = theta.to_vec();
    for j in 0..p {
        th[j] = theta[j] + h;
        system.rhs(x, &th, &mut plus)?;
        th[j] = theta[j] - h;
        system.rhs(x, &th, &mut minus)?;
        th[j] = theta[j];
        for i in 0..d {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            err_param = err_param.max((fd - jp[i * p + j]).abs());
        }
    }

    let mut err_state = 0.0_f64;
    let mut xs = x.to_vec();
    for j in 0..d {
        xs[j] = x[j] + h;
        system.rhs(&xs, theta, &mut plus)?;
        xs[j] = x[j] - h;
        system.rhs(&xs, theta, &mut minus)?;
        xs[j] = x[j];
        for i in 0..d {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            err_state = err_state.max((fd - jx[i * d + j]).abs());
        }
    }
    Ok((err_param, err_state))
}
