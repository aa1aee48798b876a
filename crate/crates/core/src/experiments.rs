//! Seeded data simulation and Monte Carlo studies of the estimator's
//! convergence rates.
//!
//! Randomness comes from ChaCha8 streams: a study seed selects the key and
//! every `(sample size, replication)` pair gets its own stream number, so
//! parallel and serial runs draw identical numbers. Gaussian noise uses
//! `rand_distr::StandardNormal` (ziggurat); bounded noise is uniform on
//! `[-sqrt(3) sigma, sqrt(3) sigma]`, which has standard deviation `sigma`.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::SmePipeline;
use crate::ode::{rk4_at_times, OdeSystem, DEFAULT_STEP};
use crate::smoothing::{
    evaluate_on_grid, kernel_gegenbauer_order4, sup_error, Kernel, ObservationSet, WeightFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    Gaussian,
    BoundedUniform,
}

/// Independent additive measurement noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation per component; a single entry applies to all.
    pub sigma: Vec<f64>,
    pub family: NoiseFamily,
    pub seed: u64,
    /// ChaCha stream within the seed.
    #[serde(default)]
    pub stream: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self {
            sigma: vec![sigma],
            family: NoiseFamily::Gaussian,
            seed,
            stream: 0,
        }
    }

    pub fn bounded(sigma: f64, seed: u64) -> Self {
        Self {
            family: NoiseFamily::BoundedUniform,
            ..Self::gaussian(sigma, seed)
        }
    }

    pub fn with_stream(&self, stream: u64) -> Self {
        Self {
            stream,
            ..self.clone()
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.sigma.len() != 1 && self.sigma.len() != d {
            return Err(Error::param(format!(
                "sigma has {} entries, expected 1 or {d}",
                self.sigma.len()
            )));
        }
        if self.sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::param(
                "noise standard deviations must be finite and >= 0",
            ));
        }
        Ok(())
    }

    fn sigma_for(&self, j: usize) -> f64 {
        if self.sigma.len() == 1 {
            self.sigma[0]
        } else {
            self.sigma[j]
        }
    }

    /// Half-width of the bounded family for component `j`.
    pub fn bound(&self, j: usize) -> f64 {
        3f64.sqrt() * self.sigma_for(j)
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// `n x d` noise matrix drawn row by row.
    pub fn draw(&self, n: usize, d: usize) -> Result<DMatrix<f64>> {
        self.validate(d)?;
        let mut rng = self.rng();
        let mut out = DMatrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                let unit: f64 = match self.family {
                    NoiseFamily::Gaussian => rng.sample(StandardNormal),
                    NoiseFamily::BoundedUniform => 3f64.sqrt() * (2.0 * rng.random::<f64>() - 1.0),
                };
                out[(i, j)] = unit * self.sigma_for(j);
            }
        }
        Ok(out)
    }
}

fn stream_id(n_index: usize, rep: usize) -> u64 {
    ((n_index as u64) << 32) | rep as u64
}

/// `Y_ij = x_theta_j(t_i) + eps_ij` with `x(t0) = xi`.
///
/// States at the sample times come straight from RK4 with substeps no
/// longer than `min(1e-3, 1e-3 * (t_n - t0))`.
pub fn simulate_observations(
    system: &dyn OdeSystem,
    theta: &[f64],
    xi: &[f64],
    t0: f64,
    times: &[f64],
    noise: &NoiseSpec,
) -> Result<ObservationSet> {
    let truth = true_states(system, theta, xi, t0, times)?;
    let noise = noise.draw(times.len(), system.dim_state())?;
    ObservationSet::new(times.to_vec(), truth + noise, t0)
}

fn true_states(
    system: &dyn OdeSystem,
    theta: &[f64],
    xi: &[f64],
    t0: f64,
    times: &[f64],
) -> Result<DMatrix<f64>> {
    let range = times.last().map_or(0.0, |t| t - t0);
    let step = DEFAULT_STEP.min(1e-3 * range).max(f64::MIN_POSITIVE);
    Ok(rk4_at_times(system, theta, xi, t0, times, step)?.states)
}

/// `t_lo + i (t_hi - t_lo) / n` for `i = 1..=n`.
pub fn equidistant_design(t_lo: f64, t_hi: f64, n: usize) -> Vec<f64> {
    let h = (t_hi - t_lo) / n as f64;
    (1..=n).map(|i| t_lo + i as f64 * h).collect()
}

/// Bandwidth `b(n) = b_ref (n / n_ref)^(-gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthAnchor {
    pub n_ref: f64,
    pub b_ref: f64,
}

impl BandwidthAnchor {
    pub fn at(&self, n: usize, gamma: f64) -> f64 {
        self.b_ref * (n as f64 / self.n_ref).powf(-gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootNConfig {
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
    pub window: (f64, f64),
    pub n_values: Vec<usize>,
    pub gamma: f64,
    pub sigma: f64,
    #[serde(default = "default_family")]
    pub family: NoiseFamily,
    pub replications: usize,
    pub seed: u64,
    pub anchor: BandwidthAnchor,
    pub kernel_order: u32,
    /// Weight plateau `(c, beta, margin_scale)`.
    pub weight: (f64, f64, f64),
    pub grid_step: f64,
}

fn default_family() -> NoiseFamily {
    NoiseFamily::Gaussian
}

impl RootNConfig {
    /// Exponential-growth study on `[0, 1]` with `theta = 0.5`.
    ///
    /// Weight support `[0.1, 0.9]` keeps the criterion clear of the
    /// smoother's boundary region at the anchor bandwidth `b(100) = 0.1`.
    pub fn exponential_default() -> Self {
        Self {
            theta: vec![0.5],
            xi: vec![1.0],
            window: (0.0, 1.0),
            n_values: vec![100, 400, 1600],
            gamma: 0.15,
            sigma: 0.05,
            family: NoiseFamily::Gaussian,
            replications: 200,
            seed: 20_240_601,
            anchor: BandwidthAnchor {
                n_ref: 100.0,
                b_ref: 0.1,
            },
            kernel_order: 4,
            weight: (0.7, 0.5, 1.25),
            grid_step: 0.001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawEstimate {
    pub n: usize,
    pub rep: usize,
    pub theta_hat: Vec<f64>,
}

/// Per-sample-size accuracy of the smooth-and-match estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub n_values: Vec<usize>,
    pub bandwidths: Vec<f64>,
    /// `rmse[k][c]`: root mean squared error of component `c` at `n_values[k]`.
    pub rmse: Vec<Vec<f64>>,
    /// Root mean squared Euclidean error.
    pub rmse_norm: Vec<f64>,
    /// `sqrt(n) * rmse`.
    pub scaled: Vec<Vec<f64>>,
    pub scaled_norm: Vec<f64>,
    pub replications: usize,
    pub failures: usize,
    pub gamma: f64,
    pub anchor: BandwidthAnchor,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub raw: Vec<RawEstimate>,
}

impl MonteCarloReport {
    /// Ratios `scaled_norm[k+1] / scaled_norm[k]`.
    pub fn scaled_ratios(&self) -> Vec<f64> {
        self.scaled_norm.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Writes `n,rep,component,theta_hat` rows (component is 1-based).
    pub fn write_raw_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,rep,component,theta_hat")?;
        for r in &self.raw {
            for (c, v) in r.theta_hat.iter().enumerate() {
                writeln!(w, "{},{},{},{}", r.n, r.rep, c + 1, v)?;
            }
        }
        Ok(())
    }

    pub fn write_raw_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_raw_csv(&mut f)?;
        f.flush()?;
        Ok(())
    }
}

/// Monte Carlo check of root-n consistency: for each `n` the estimator runs
/// on `replications` noisy equidistant designs with `b = b_ref (n/n_ref)^-gamma`.
///
/// Failed replications are counted and left out of the RMSE.
pub fn root_n_consistency_study(
    system: &dyn OdeSystem,
    cfg: &RootNConfig,
) -> Result<MonteCarloReport> {
    if cfg.replications == 0 {
        return Err(Error::param("replications must be at least 1"));
    }
    if cfg.n_values.is_empty() || cfg.n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "n_values must be nonempty and strictly increasing",
        ));
    }
    let kernel = crate::smoothing::kernel_of_order(cfg.kernel_order)
        .ok_or_else(|| Error::param(format!("no kernel of order {}", cfg.kernel_order)))?;
    let lo = 1.0 / (2.0 * kernel.order() as f64);
    if !(cfg.gamma > lo && cfg.gamma < 1.0 / 6.0) {
        return Err(Error::param(format!(
            "gamma = {} outside the admissible window ({lo}, 1/6)",
            cfg.gamma
        )));
    }
    system.param_box().check(&cfg.theta)?;
    let (t_lo, t_hi) = cfg.window;
    let (c, beta, margin) = cfg.weight;
    let pipeline = SmePipeline {
        kernel,
        weight: WeightFunction::new(t_lo, t_hi, c, beta, margin)?,
        grid_step: cfg.grid_step,
        minimize: Default::default(),
        integration_step: DEFAULT_STEP,
    };
    let p = system.dim_param();
    let base_noise = NoiseSpec {
        sigma: vec![cfg.sigma],
        family: cfg.family,
        seed: cfg.seed,
        stream: 0,
    };

    let mut report = MonteCarloReport {
        n_values: cfg.n_values.clone(),
        bandwidths: Vec::new(),
        rmse: Vec::new(),
        rmse_norm: Vec::new(),
        scaled: Vec::new(),
        scaled_norm: Vec::new(),
        replications: cfg.replications,
        failures: 0,
        gamma: cfg.gamma,
        anchor: cfg.anchor,
        notes: vec![format!(
            "bandwidth anchor n_ref = {}, b_ref = {} is an arbitrary constant; only the exponent is prescribed",
            cfg.anchor.n_ref, cfg.anchor.b_ref
        )],
        raw: Vec::new(),
    };

    for (ni, &n) in cfg.n_values.iter().enumerate() {
        let times = equidistant_design(t_lo, t_hi, n);
        let truth = true_states(system, &cfg.theta, &cfg.xi, t_lo, &times)?;
        let b = cfg.anchor.at(n, cfg.gamma);
        let estimates: Vec<Option<Vec<f64>>> = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let noise = base_noise.with_stream(stream_id(ni, rep));
                let y = &truth + noise.draw(n, system.dim_state()).ok()?;
                let obs = ObservationSet::new(times.clone(), y, t_lo).ok()?;
                pipeline
                    .estimate(&obs, system, b)
                    .ok()
                    .map(|(rep, _)| rep.theta_hat)
            })
            .collect();

        let mut sq = vec![0.0; p];
        let mut ok = 0usize;
        for (rep, est) in estimates.into_iter().enumerate() {
            match est {
                Some(th) => {
                    for k in 0..p {
                        sq[k] += (th[k] - cfg.theta[k]).powi(2);
                    }
                    ok += 1;
                    report.raw.push(RawEstimate {
                        n,
                        rep,
                        theta_hat: th,
                    });
                }
                None => report.failures += 1,
            }
        }
        let denom = ok.max(1) as f64;
        let rmse: Vec<f64> = sq.iter().map(|s| (s / denom).sqrt()).collect();
        let norm = (sq.iter().sum::<f64>() / denom).sqrt();
        let root_n = (n as f64).sqrt();
        report.bandwidths.push(b);
        report
            .scaled
            .push(rmse.iter().map(|r| r * root_n).collect());
        report.rmse.push(rmse);
        report.rmse_norm.push(norm);
        report.scaled_norm.push(norm * root_n);
    }
    Ok(report)
}

/// `b(n) = coef * n^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRule {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerRule {
    pub fn at(&self, n: usize) -> f64 {
        self.coef * (n as f64).powf(-self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormConfig {
    pub n_values: Vec<usize>,
    pub bandwidth: PowerRule,
    pub sigma: f64,
    pub family: NoiseFamily,
    pub seed: u64,
    pub replications: usize,
    /// Evaluation interval `[delta, 1 - delta]`.
    pub interval: (f64, f64),
    pub grid_points: usize,
}

impl SupNormConfig {
    pub fn sine_default(family: NoiseFamily) -> Self {
        Self {
            n_values: vec![200, 800, 3200],
            bandwidth: PowerRule {
                coef: 0.5,
                exponent: 1.0 / 9.0,
            },
            sigma: 0.1,
            family,
            seed: 7_771_009,
            replications: 100,
            interval: (0.2, 0.8),
            grid_points: 301,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupNormReport {
    pub n_values: Vec<usize>,
    pub bandwidths: Vec<f64>,
    pub family: NoiseFamily,
    pub replications: usize,
    /// Mean over replications of `sup |mu_hat - mu|` on the interval.
    pub mean_sup_error: Vec<f64>,
    pub mean_sup_error_deriv: Vec<f64>,
    /// `b^a + 1/(n b^2) + sqrt(log n / (n b))`.
    pub envelope: Vec<f64>,
    /// `b^(a-1) + 1/(n b^3) + sqrt(log n / (n b^3))`.
    pub envelope_deriv: Vec<f64>,
    pub ratio: Vec<f64>,
    pub ratio_deriv: Vec<f64>,
}

/// Monte Carlo sup-norm errors of the Priestley-Chao estimate of `mu` and
/// `mu'` on `[0, 1]` designs `t_i = i/n`.
pub fn supnorm_rate_study(
    mu: &(dyn Fn(f64) -> f64 + Sync),
    mu_prime: &(dyn Fn(f64) -> f64 + Sync),
    kernel: &Kernel,
    cfg: &SupNormConfig,
) -> Result<SupNormReport> {
    let (a, b_hi) = cfg.interval;
    if !(a > 0.0 && b_hi < 1.0 && a < b_hi) {
        return Err(Error::param("interval must lie strictly inside (0, 1)"));
    }
    if cfg.replications == 0 {
        return Err(Error::param("replications must be at least 1"));
    }
    if cfg.grid_points < 2 {
        return Err(Error::param("need at least two evaluation points"));
    }
    let grid: Vec<f64> = (0..cfg.grid_points)
        .map(|k| a + (b_hi - a) * k as f64 / (cfg.grid_points - 1) as f64)
        .collect();
    let alpha = kernel.order() as i32;
    let base_noise = NoiseSpec {
        sigma: vec![cfg.sigma],
        family: cfg.family,
        seed: cfg.seed,
        stream: 0,
    };
    let mut report = SupNormReport {
        n_values: cfg.n_values.clone(),
        bandwidths: Vec::new(),
        family: cfg.family,
        replications: cfg.replications,
        mean_sup_error: Vec::new(),
        mean_sup_error_deriv: Vec::new(),
        envelope: Vec::new(),
        envelope_deriv: Vec::new(),
        ratio: Vec::new(),
        ratio_deriv: Vec::new(),
    };
    for (ni, &n) in cfg.n_values.iter().enumerate() {
        let b = cfg.bandwidth.at(n);
        if !(b > 0.0) {
            return Err(Error::param("bandwidth rule must be positive"));
        }
        let times = equidistant_design(0.0, 1.0, n);
        let clean = DMatrix::from_iterator(n, 1, times.iter().map(|&t| mu(t)));
        let errs: Vec<Result<(f64, f64)>> = (0..cfg.replications)
            .into_par_iter()
            .map(|rep| {
                let noise = base_noise.with_stream(stream_id(ni, rep)).draw(n, 1)?;
                let obs = ObservationSet::new(times.clone(), &clean + noise, 0.0)?;
                let out = evaluate_on_grid(&obs, kernel, b, &grid)?;
                let (ex, ep) = sup_error(
                    &out,
                    |t| vec![mu(t)],
                    Some(&|t: f64| vec![mu_prime(t)]),
                    cfg.interval,
                )?;
                Ok((ex, ep.unwrap_or(f64::NAN)))
            })
            .collect();
        let mut sum_x = 0.0;
        let mut sum_p = 0.0;
        for e in errs {
            let (ex, ep) = e?;
            sum_x += ex;
            sum_p += ep;
        }
        let reps = cfg.replications as f64;
        let nf = n as f64;
        let env = b.powi(alpha) + 1.0 / (nf * b * b) + (nf.ln() / (nf * b)).sqrt();
        let env_d =
            b.powi(alpha - 1) + 1.0 / (nf * b.powi(3)) + (nf.ln() / (nf * b.powi(3))).sqrt();
        report.bandwidths.push(b);
        report.mean_sup_error.push(sum_x / reps);
        report.mean_sup_error_deriv.push(sum_p / reps);
        report.envelope.push(env);
        report.envelope_deriv.push(env_d);
        report.ratio.push(sum_x / reps / env);
        report.ratio_deriv.push(sum_p / reps / env_d);
    }
    Ok(report)
}

/// Convenience: the order-4 kernel sup-norm study for `sin(2 pi t)`.
pub fn sine_supnorm_study(cfg: &SupNormConfig) -> Result<SupNormReport> {
    use std::f64::consts::PI;
    let mu = |t: f64| (2.0 * PI * t).sin();
    let mu_p = |t: f64| 2.0 * PI * (2.0 * PI * t).cos();
    supnorm_rate_study(&mu, &mu_p, &kernel_gegenbauer_order4(), cfg)
}
