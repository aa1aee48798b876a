use serde::Serialize;

use super::{
    minimize_criterion, ols_rss, solve_linear, CriterionSpec, EstimateReport, MinimizeOptions,
    Stopwatch, DEFAULT_GRID_STEP,
};
use crate::error::{Error, Result};
use crate::ode::{OdeSystem, DEFAULT_STEP};
use crate::smoothing::{
    evaluate_on_grid, kernel_gegenbauer_order4, Kernel, ObservationSet, SmootherOutput,
    WeightFunction,
};

/// Everything the smooth-and-match estimate needs besides data and bandwidth.
#[derive(Debug, Clone)]
pub struct SmePipeline {
    pub kernel: Kernel,
    pub weight: WeightFunction,
    pub grid_step: f64,
    pub minimize: MinimizeOptions,
    /// RK4 step for refitting trajectories (bandwidth sweep only).
    pub integration_step: f64,
}

impl SmePipeline {
    /// Order-4 kernel, standard weight on `[t_lo, t_hi]`, grid step 0.1.
    pub fn standard(t_lo: f64, t_hi: f64) -> Result<Self> {
        Ok(Self {
            kernel: kernel_gegenbauer_order4(),
            weight: WeightFunction::standard(t_lo, t_hi)?,
            grid_step: DEFAULT_GRID_STEP,
            minimize: MinimizeOptions::default(),
            integration_step: DEFAULT_STEP,
        })
    }

    pub fn criterion_spec(&self, bandwidth: f64) -> Result<CriterionSpec> {
        CriterionSpec::new(
            self.weight.clone(),
            self.grid_step,
            self.kernel.clone(),
            bandwidth,
        )
    }

    /// Smooths `obs` and matches: closed form when the system is linear in
    /// its parameters, derivative-free minimization otherwise. The reported
    /// wall time covers both steps.
    pub fn estimate(
        &self,
        obs: &ObservationSet,
        system: &dyn OdeSystem,
        bandwidth: f64,
    ) -> Result<(EstimateReport, SmootherOutput)> {
        let clock = Stopwatch::start();
        let spec = self.criterion_spec(bandwidth)?;
        let sm = evaluate_on_grid(obs, &self.kernel, bandwidth, spec.grid())?;
        let mut report = if system.linear_form().is_some() {
            solve_linear(&sm, system, &spec)?
        } else {
            minimize_criterion(&sm, system, &spec, &self.minimize)?
        };
        report.wall_time = clock.seconds();
        Ok((report, sm))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthRow {
    pub bandwidth: f64,
    pub rss: Option<f64>,
    pub theta_hat: Option<Vec<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthSelection {
    pub b_hat: f64,
    pub table: Vec<BandwidthRow>,
}

/// Runs the estimator for every candidate bandwidth, refits the trajectory
/// from `xi` at each estimate, and returns the bandwidth with the smallest
/// residual sum of squares. RSS values within `1e-15` (relative to
/// `max(1, rss)`) tie, and ties go to the smaller bandwidth.
pub fn select_bandwidth_rss(
    obs: &ObservationSet,
    system: &dyn OdeSystem,
    xi: &[f64],
    candidates: &[f64],
    pipeline: &SmePipeline,
) -> Result<BandwidthSelection> {
    if candidates.is_empty() {
        return Err(Error::param("no candidate bandwidths"));
    }
    if let Some(b) = candidates.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(Error::param(format!(
            "candidate bandwidth {b} is not positive"
        )));
    }
    let table: Vec<BandwidthRow> = candidates
        .iter()
        .map(|&b| {
            let fit = pipeline.estimate(obs, system, b).and_then(|(rep, _)| {
                let rss = ols_rss(obs, system, xi, &rep.theta_hat, pipeline.integration_step)?;
                Ok((rep.theta_hat, rss))
            });
            match fit {
                Ok((theta, rss)) => BandwidthRow {
                    bandwidth: b,
                    rss: Some(rss),
                    theta_hat: Some(theta),
                    error: None,
                },
                Err(e) => BandwidthRow {
                    bandwidth: b,
                    rss: None,
                    theta_hat: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let b_hat = pick_bandwidth(&table).ok_or_else(|| {
        Error::EstimationFailed("estimation failed for every candidate bandwidth".into())
    })?;
    Ok(BandwidthSelection { b_hat, table })
}

/// Smallest finite RSS, scanning bandwidths in increasing order so that
/// near-equal values keep the smaller bandwidth.
fn pick_bandwidth(table: &[BandwidthRow]) -> Option<f64> {
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| table[a].bandwidth.total_cmp(&table[b].bandwidth));
    let mut best: Option<(f64, f64)> = None;
    for idx in order {
        let row = &table[idx];
        let Some(rss) = row.rss.filter(|r| r.is_finite()) else {
            continue;
        };
        match best {
            Some((_, best_rss)) if rss >= best_rss - 1e-15 * best_rss.abs().max(1.0) => {}
            _ => best = Some((row.bandwidth, rss)),
        }
    }
    best.map(|(b, _)| b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(bandwidth: f64, rss: Option<f64>) -> BandwidthRow {
        BandwidthRow {
            bandwidth,
            rss,
            theta_hat: None,
            error: None,
        }
    }

    #[test]
    fn ties_go_to_smaller_bandwidth() {
        let t = [
            row(2.0, Some(0.5)),
            row(1.0, Some(0.5 + 1e-16)),
            row(3.0, Some(0.7)),
        ];
        assert_eq!(pick_bandwidth(&t), Some(1.0));
        let t = [row(1.0, Some(0.5)), row(2.0, Some(0.5 - 2e-16))];
        assert_eq!(pick_bandwidth(&t), Some(1.0));
    }

    #[test]
    fn strict_improvement_wins_and_failures_skipped() {
        let t = [row(1.0, Some(0.5)), row(2.0, Some(0.4)), row(0.5, None)];
        assert_eq!(pick_bandwidth(&t), Some(2.0));
        assert_eq!(pick_bandwidth(&[row(1.0, None)]), None);
    }
}
