use std::collections::HashMap;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use nalgebra::DMatrix;

use super::{Kernel, ObservationSet};
use crate::error::{Error, Result};

/// Smoothed states `x_hat` and derivatives `x_hat'` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherOutput {
    pub grid: Vec<f64>,
    /// `m x d`, row `k` is `x_hat(grid[k])`.
    pub xhat: DMatrix<f64>,
    pub xhat_prime: DMatrix<f64>,
    pub bandwidth: f64,
    pub kernel_order: u32,
}

impl SmootherOutput {
    pub fn from_parts(
        grid: Vec<f64>,
        xhat: DMatrix<f64>,
        xhat_prime: DMatrix<f64>,
        bandwidth: f64,
        kernel_order: u32,
    ) -> Result<Self> {
        let m = grid.len();
        if m == 0 {
            return Err(Error::param("empty grid"));
        }
        if xhat.nrows() != m || xhat_prime.shape() != xhat.shape() {
            return Err(Error::param("grid and state matrices disagree in shape"));
        }
        if xhat.iter().chain(xhat_prime.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("smoother output must be finite"));
        }
        Ok(Self {
            grid,
            xhat,
            xhat_prime,
            bandwidth,
            kernel_order,
        })
    }

    pub fn dim(&self) -> usize {
        self.xhat.ncols()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Writes `s,xhat1..xhatd,xhatp1..xhatpd`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.dim();
        let mut header = vec!["s".to_string()];
        header.extend((1..=d).map(|j| format!("xhat{j}")));
        header.extend((1..=d).map(|j| format!("xhatp{j}")));
        writeln!(w, "{}", header.join(","))?;
        for (k, s) in self.grid.iter().enumerate() {
            let mut row = vec![s.to_string()];
            row.extend(self.xhat.row(k).iter().map(f64::to_string));
            row.extend(self.xhat_prime.row(k).iter().map(f64::to_string));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// Indices `i` with `|t - t_i| < b`; all other terms have a zero kernel weight.
fn window(times: &[f64], t: f64, b: f64) -> Range<usize> {
    let lo = times.partition_point(|&ti| ti <= t - b);
    let hi = times.partition_point(|&ti| ti < t + b);
    lo..hi.max(lo)
}

fn check_bandwidth(b: f64) -> Result<()> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("bandwidth must be positive, got {b}")))
    }
}

fn check_component(obs: &ObservationSet, j: usize) -> Result<()> {
    if j < obs.dim() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "component {j} out of range for {} columns",
            obs.dim()
        )))
    }
}

/// Priestley-Chao estimate of component `j` (0-based) at `t`:
/// `sum_i (t_i - t_{i-1}) K((t - t_i)/b) Y_ij / b`.
pub fn priestley_chao(
    obs: &ObservationSet,
    j: usize,
    kernel: &Kernel,
    b: f64,
    t: f64,
) -> Result<f64> {
    check_bandwidth(b)?;
    check_component(obs, j)?;
    let spacings = obs.spacings();
    let times = obs.times();
    let y = obs.y();
    let mut acc = 0.0;
    for i in window(times, t, b) {
        acc += spacings[i] * kernel.eval((t - times[i]) / b) * y[(i, j)];
    }
    Ok(acc / b)
}

/// Exact `t`-derivative of [`priestley_chao`]:
/// `sum_i (t_i - t_{i-1}) K'((t - t_i)/b) Y_ij / b^2`.
pub fn priestley_chao_deriv(
    obs: &ObservationSet,
    j: usize,
    kernel: &Kernel,
    b: f64,
    t: f64,
) -> Result<f64> {
    check_bandwidth(b)?;
    check_component(obs, j)?;
    let spacings = obs.spacings();
    let times = obs.times();
    let y = obs.y();
    let mut acc = 0.0;
    for i in window(times, t, b) {
        acc += spacings[i] * kernel.deriv((t - times[i]) / b) * y[(i, j)];
    }
    Ok(acc / (b * b))
}

/// Common step of an equidistant sequence, if it is one.
fn uniform_step(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let tol = 1e-9 * h.abs().max(f64::MIN_POSITIVE);
    let uniform = xs
        .iter()
        .enumerate()
        .all(|(k, &x)| (x - (xs[0] + k as f64 * h)).abs() <= tol * (k as f64 + 1.0));
    (uniform && h > 0.0).then_some(h)
}

/// Integers `(a, c)` with `grid_step / a == time_step / c`, i.e. both steps
/// are multiples of a common lattice spacing.
fn common_lattice(grid_step: f64, time_step: f64) -> Option<(i64, i64)> {
    let ratio = time_step / grid_step;
    (1..=64_i64).find_map(|a| {
        let c = (ratio * a as f64).round();
        (c >= 1.0 && (ratio * a as f64 - c).abs() < 1e-9 * c).then_some((a, c as i64))
    })
}

/// Evaluates `x_hat` and `x_hat'` for every component on `grid`.
///
/// For each grid point the kernel weights are computed once and shared by
/// all components. When both the grid and the sample times are equidistant
/// on a common lattice, `(s_k - t_i)/b` takes few distinct values and each
/// `K`, `K'` evaluation is cached and reused.
pub fn evaluate_on_grid(
    obs: &ObservationSet,
    kernel: &Kernel,
    b: f64,
    grid: &[f64],
) -> Result<SmootherOutput> {
    check_bandwidth(b)?;
    if grid.is_empty() {
        return Err(Error::param("empty evaluation grid"));
    }
    if grid.iter().any(|s| !s.is_finite()) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("evaluation grid must be finite and sorted"));
    }
    let lattice = match (uniform_step(grid), uniform_step(obs.times())) {
        (Some(gs), Some(ts)) => common_lattice(gs, ts),
        _ => None,
    };
    let (xhat, xhat_prime) = match lattice {
        Some((a, c)) => grid_pass(obs, kernel, b, grid, |k, i| a * k as i64 - c * i as i64),
        None => grid_pass_naive(obs, kernel, b, grid),
    };
    SmootherOutput::from_parts(grid.to_vec(), xhat, xhat_prime, b, kernel.order())
}

/// Same as [`evaluate_on_grid`] but never uses the offset cache.
pub fn evaluate_on_grid_naive(
    obs: &ObservationSet,
    kernel: &Kernel,
    b: f64,
    grid: &[f64],
) -> Result<SmootherOutput> {
    check_bandwidth(b)?;
    if grid.is_empty() {
        return Err(Error::param("empty evaluation grid"));
    }
    let (xhat, xhat_prime) = grid_pass_naive(obs, kernel, b, grid);
    SmootherOutput::from_parts(grid.to_vec(), xhat, xhat_prime, b, kernel.order())
}

fn grid_pass_naive(
    obs: &ObservationSet,
    kernel: &Kernel,
    b: f64,
    grid: &[f64],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let times = obs.times();
    accumulate(obs, b, grid, |_, s, i| {
        let u = (s - times[i]) / b;
        (kernel.eval(u), kernel.deriv(u))
    })
}

fn grid_pass(
    obs: &ObservationSet,
    kernel: &Kernel,
    b: f64,
    grid: &[f64],
    offset: impl Fn(usize, usize) -> i64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let times = obs.times();
    let mut cache: HashMap<i64, (f64, f64)> = HashMap::new();
    accumulate(obs, b, grid, |k, s, i| {
        *cache.entry(offset(k, i)).or_insert_with(|| {
            let u = (s - times[i]) / b;
            (kernel.eval(u), kernel.deriv(u))
        })
    })
}

fn accumulate(
    obs: &ObservationSet,
    b: f64,
    grid: &[f64],
    mut weights: impl FnMut(usize, f64, usize) -> (f64, f64),
) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = obs.dim();
    let m = grid.len();
    let spacings = obs.spacings();
    let times = obs.times();
    let y = obs.y();
    let mut xhat = DMatrix::zeros(m, d);
    let mut xhat_prime = DMatrix::zeros(m, d);
    let mut acc = vec![0.0; d];
    let mut acc_p = vec![0.0; d];
    for (k, &s) in grid.iter().enumerate() {
        acc.fill(0.0);
        acc_p.fill(0.0);
        for i in window(times, s, b) {
            let (kv, kd) = weights(k, s, i);
            for j in 0..d {
                acc[j] += spacings[i] * kv * y[(i, j)];
                acc_p[j] += spacings[i] * kd * y[(i, j)];
            }
        }
        for j in 0..d {
            xhat[(k, j)] = acc[j] / b;
            xhat_prime[(k, j)] = acc_p[j] / (b * b);
        }
    }
    (xhat, xhat_prime)
}

/// Sup-norm errors over grid points in `[a, b]`.
///
/// Returns `(err_x, err_xprime)`; the second is `None` without a
/// derivative truth.
pub fn sup_error(
    output: &SmootherOutput,
    truth: impl Fn(f64) -> Vec<f64>,
    truth_prime: Option<&dyn Fn(f64) -> Vec<f64>>,
    interval: (f64, f64),
) -> Result<(f64, Option<f64>)> {
    let (a, b) = interval;
    let d = output.dim();
    let mut err_x = 0.0_f64;
    let mut err_p = 0.0_f64;
    let mut hits = 0usize;
    for (k, &s) in output.grid.iter().enumerate() {
        if s < a || s > b {
            continue;
        }
        hits += 1;
        let tx = truth(s);
        for j in 0..d {
            err_x = err_x.max((output.xhat[(k, j)] - tx[j]).abs());
        }
        if let Some(tp) = truth_prime {
            let tp = tp(s);
            for j in 0..d {
                err_p = err_p.max((output.xhat_prime[(k, j)] - tp[j]).abs());
            }
        }
    }
    if hits == 0 {
        return Err(Error::param(format!("no grid point in [{a}, {b}]")));
    }
    Ok((err_x, truth_prime.map(|_| err_p)))
}
