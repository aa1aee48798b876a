use nalgebra::DMatrix;

use super::OdeSystem;
use crate::error::{Error, Result};

/// Default integrator step in time units of the system.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Sampled solution: one row of `states` per entry of `times`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: DMatrix<f64>,
}

impl Trajectory {
    fn from_rows(times: Vec<f64>, rows: Vec<f64>, d: usize) -> Self {
        let states = DMatrix::from_row_slice(times.len(), d, &rows);
        Self { times, states }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> Vec<f64> {
        self.states.row(i).iter().copied().collect()
    }

    pub fn last_state(&self) -> Vec<f64> {
        self.state(self.len() - 1)
    }
}

struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Workspace {
    fn new(d: usize) -> Self {
        Self {
            k1: vec![0.0; d],
            k2: vec![0.0; d],
            k3: vec![0.0; d],
            k4: vec![0.0; d],
            tmp: vec![0.0; d],
        }
    }

    /// Advances `x` in place by one classical RK4 step of size `h`.
    fn step(&mut self, system: &dyn OdeSystem, theta: &[f64], x: &mut [f64], h: f64) -> Result<()> {
        let d = x.len();
        system.rhs(x, theta, &mut self.k1)?;
        for i in 0..d {
            self.tmp[i] = x[i] + 0.5 * h * self.k1[i];
        }
        system.rhs(&self.tmp, theta, &mut self.k2)?;
        for i in 0..d {
            self.tmp[i] = x[i] + 0.5 * h * self.k2[i];
        }
        system.rhs(&self.tmp, theta, &mut self.k3)?;
        for i in 0..d {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        system.rhs(&self.tmp, theta, &mut self.k4)?;
        for i in 0..d {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

fn check_inputs(system: &dyn OdeSystem, theta: &[f64], xi: &[f64]) -> Result<()> {
    system.param_box().check(theta)?;
    if xi.len() != system.dim_state() {
        return Err(Error::param(format!(
            "initial state has length {}, system `{}` has dimension {}",
            xi.len(),
            system.name(),
            system.dim_state()
        )));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("initial state must be finite"));
    }
    Ok(())
}

/// Fixed-step RK4 from `t0` to `t1`, sampled at `t0, t0 + step, ...` with a
/// shortened last step landing exactly on `t1`.
pub fn rk4_integrate(
    system: &dyn OdeSystem,
    theta: &[f64],
    xi: &[f64],
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Trajectory> {
    check_inputs(system, theta, xi)?;
    if !(t1 > t0) {
        return Err(Error::param(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    if !(step > 0.0) || step > t1 - t0 {
        return Err(Error::param(format!(
            "step {step} must lie in (0, t1 - t0 = {}]",
            t1 - t0
        )));
    }
    let d = xi.len();
    let span = t1 - t0;
    // Full steps that fit, ignoring a remainder below rounding noise.
    let ratio = span / step;
    let full = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round() as usize
    } else {
        ratio.floor() as usize
    };
    let needs_partial = t0 + full as f64 * step < t1 - 1e-12 * span;

    let count = full + 1 + usize::from(needs_partial);
    let mut times = Vec::with_capacity(count);
    let mut rows = Vec::with_capacity(count * d);
    let mut ws = Rk4Workspace::new(d);
    let mut x = xi.to_vec();
    times.push(t0);
    rows.extend_from_slice(&x);

    for k in 1..=full {
        let t_prev = t0 + (k - 1) as f64 * step;
        ws.step(system, theta, &mut x, step)?;
        let t = if k == full && !needs_partial {
            t1
        } else {
            t0 + k as f64 * step
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { time: t_prev });
        }
        times.push(t);
        rows.extend_from_slice(&x);
    }
    if needs_partial {
        let t_prev = *times.last().expect("nonempty");
        ws.step(system, theta, &mut x, t1 - t_prev)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged { time: t_prev });
        }
        times.push(t1);
        rows.extend_from_slice(&x);
    }
    Ok(Trajectory::from_rows(times, rows, d))
}

/// RK4 solution sampled exactly at `times` (sorted, all `>= t0`).
///
/// Each gap between consecutive output times is split into the smallest
/// number of equal substeps not exceeding `max_step`, so no interpolation
/// is needed.
pub fn rk4_at_times(
    system: &dyn OdeSystem,
    theta: &[f64],
    xi: &[f64],
    t0: f64,
    times: &[f64],
    max_step: f64,
) -> Result<Trajectory> {
    check_inputs(system, theta, xi)?;
    if !(max_step > 0.0) {
        return Err(Error::param("max_step must be positive"));
    }
    if times.is_empty() {
        return Err(Error::param("no output times requested"));
    }
    if times[0] < t0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(
            "output times must be strictly increasing and not precede t0",
        ));
    }
    let d = xi.len();
    let mut ws = Rk4Workspace::new(d);
    let mut x = xi.to_vec();
    let mut rows = Vec::with_capacity(times.len() * d);
    let mut t_prev = t0;
    for &t in times {
        let gap = t - t_prev;
        if gap > 0.0 {
            let substeps = (gap / max_step - 1e-9).ceil().max(1.0) as usize;
            let h = gap / substeps as f64;
            for s in 0..substeps {
                ws.step(system, theta, &mut x, h)?;
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::IntegrationDiverged {
                        time: t_prev + s as f64 * h,
                    });
                }
            }
        }
        rows.extend_from_slice(&x);
        t_prev = t;
    }
    Ok(Trajectory::from_rows(times.to_vec(), rows, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{
        builtin_exponential, builtin_lotka_volterra, builtin_van_der_pol, LotkaVolterra, ParamBox,
    };

    #[test]
    fn exponential_matches_closed_form() {
        let sys = builtin_exponential();
        let tr = rk4_integrate(&sys, &[1.0], &[1.0], 0.0, 1.0, 1e-3).unwrap();
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert_eq!(tr.len(), 1001);
        assert!((tr.last_state()[0] - std::f64::consts::E).abs() < 1e-8);
        for (i, &t) in tr.times.iter().enumerate().step_by(97) {
            assert!((tr.states[(i, 0)] - t.exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn fixed_point_is_constant() {
        let sys = builtin_exponential();
        let tr = rk4_integrate(&sys, &[1.3], &[0.0], 0.0, 2.0, 0.01).unwrap();
        assert!(tr.states.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn partial_last_step_lands_on_endpoint() {
        let sys = builtin_exponential();
        let tr = rk4_integrate(&sys, &[0.3], &[1.0], 0.0, 1.0, 0.3).unwrap();
        assert_eq!(tr.times.len(), 5);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert!((tr.times[3] - 0.9).abs() < 1e-15);
        assert!((tr.last_state()[0] - 0.3_f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn fourth_order_convergence() {
        let sys = builtin_exponential();
        let err = |h: f64| {
            let tr = rk4_integrate(&sys, &[1.0], &[1.0], 0.0, 1.0, h).unwrap();
            (tr.last_state()[0] - std::f64::consts::E).abs()
        };
        for h in [0.2, 0.1, 0.05] {
            let ratio = err(h) / err(h / 2.0);
            assert!((12.0..=20.0).contains(&ratio), "h={h} ratio={ratio}");
        }
    }

    #[test]
    fn lotka_volterra_first_integral_is_conserved() {
        let sys = builtin_lotka_volterra();
        let th = [0.5; 4];
        let tr = rk4_integrate(&sys, &th, &[1.0, 0.5], 0.0, 25.0, 1e-3).unwrap();
        let v0 = LotkaVolterra::first_integral(&[1.0, 0.5], &th);
        let drift = (0..tr.len())
            .map(|i| (LotkaVolterra::first_integral(&tr.state(i), &th) - v0).abs())
            .fold(0.0, f64::max);
        assert!(drift <= 1e-6, "drift {drift}");
    }

    #[test]
    fn blow_up_is_reported() {
        let sys =
            crate::ode::Exponential::with_box(ParamBox::uniform(1, 0.0, 1e6).unwrap()).unwrap();
        let err = rk4_integrate(&sys, &[1e5], &[1.0], 0.0, 1.0, 1e-2).unwrap_err();
        match err {
            Error::IntegrationDiverged { time } => assert!((0.0..1.0).contains(&time)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let sys = builtin_van_der_pol();
        assert!(rk4_integrate(&sys, &[0.8], &[1.0, 1.0], 1.0, 0.0, 0.1).is_err());
        assert!(rk4_integrate(&sys, &[0.8], &[1.0, 1.0], 0.0, 1.0, 2.0).is_err());
        assert!(matches!(
            rk4_integrate(&sys, &[9.0], &[1.0, 1.0], 0.0, 1.0, 0.1),
            Err(Error::OutOfBox { .. })
        ));
        assert!(rk4_integrate(&sys, &[0.8], &[1.0], 0.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn sampled_integration_agrees_with_lattice() {
        let sys = builtin_lotka_volterra();
        let th = [0.5; 4];
        let times: Vec<f64> = (1..=50).map(|i| 0.5 * i as f64).collect();
        let sampled = rk4_at_times(&sys, &th, &[1.0, 0.5], 0.0, &times, 1e-3).unwrap();
        let full = rk4_integrate(&sys, &th, &[1.0, 0.5], 0.0, 25.0, 1e-3).unwrap();
        for (i, _) in times.iter().enumerate() {
            let k = 500 * (i + 1);
            for j in 0..2 {
                assert!((sampled.states[(i, j)] - full.states[(k, j)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sampled_integration_includes_initial_time() {
        let sys = builtin_exponential();
        let tr = rk4_at_times(&sys, &[1.0], &[2.0], 0.0, &[0.0, 1.0], 1e-3).unwrap();
        assert_eq!(tr.states[(0, 0)], 2.0);
        assert!((tr.states[(1, 0)] - 2.0 * std::f64::consts::E).abs() < 1e-8);
        assert!(rk4_at_times(&sys, &[1.0], &[2.0], 0.5, &[0.0], 1e-3).is_err());
    }
}
