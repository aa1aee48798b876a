//! Command implementations behind the `sme` binary.
//!
//! Every command takes a [`Settings`] (config file merged with flags) and
//! returns a one-line summary, writing its artifacts into the output
//! directory. Failures map onto a fixed exit-code taxonomy, see [`CliError`].

pub mod config;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sme_core::estimator::{
    ols_estimate, select_bandwidth_rss, EstimateReport, MinimizeOptions, OlsOptions, SmePipeline,
};
use sme_core::experiments::{
    equidistant_design, root_n_consistency_study, simulate_observations, supnorm_rate_study,
    BandwidthAnchor, NoiseFamily, NoiseSpec, RootNConfig, SupNormConfig,
};
use sme_core::ode::{builtin_by_name, OdeSystem, PolynomialLinearSystem};
use sme_core::smoothing::{kernel_of_order, weight_from_paper, Kernel, ObservationSet};

pub use config::{BandwidthChoice, RunConfig, Sigma};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;
pub const EXIT_OPTIMIZER: i32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn exit_code(e: &sme_core::Error) -> i32 {
    use sme_core::Error as E;
    match e {
        E::IntegrationDiverged { .. } => EXIT_DIVERGED,
        E::Identifiability { .. } => EXIT_SINGULAR,
        E::EstimationFailed(_) | E::Criterion(_) => EXIT_OPTIMIZER,
        _ => EXIT_CONFIG,
    }
}

impl From<sme_core::Error> for CliError {
    fn from(e: sme_core::Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Paper-style defaults for the shipped systems.
struct SystemDefaults {
    theta: Vec<f64>,
    xi: Vec<f64>,
    window: (f64, f64),
    n: usize,
    sigma: f64,
    bandwidth: f64,
}

fn defaults_for(name: &str) -> Option<SystemDefaults> {
    let d = match name {
        "lotka-volterra" => SystemDefaults {
            theta: vec![0.5; 4],
            xi: vec![1.0, 0.5],
            window: (0.0, 25.0),
            n: 50,
            sigma: 0.1,
            bandwidth: 1.2,
        },
        "van-der-pol" => SystemDefaults {
            theta: vec![0.8],
            xi: vec![1.0, 1.0],
            window: (0.0, 25.0),
            n: 50,
            sigma: 0.1,
            bandwidth: 1.0,
        },
        "exponential" => SystemDefaults {
            theta: vec![0.5],
            xi: vec![1.0],
            window: (0.0, 1.0),
            n: 100,
            sigma: 0.05,
            bandwidth: 0.1,
        },
        _ => return None,
    };
    Some(d)
}

/// Builtin system by name, otherwise a polynomial system JSON file.
pub fn load_system(spec: &str) -> CliResult<Box<dyn OdeSystem>> {
    if let Some(sys) = builtin_by_name(spec) {
        return Ok(sys);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(CliError::config(format!(
            "unknown system `{spec}` (builtins: {}; or a path to a JSON spec)",
            sme_core::ode::BUILTIN_NAMES.join(", ")
        )));
    }
    Ok(Box::new(PolynomialLinearSystem::from_path(path)?))
}

/// Config file values with command-line overrides applied.
pub struct Settings {
    pub config: RunConfig,
    system: Box<dyn OdeSystem>,
    defaults: Option<SystemDefaults>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub system: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub bandwidth: Option<BandwidthChoice>,
    pub data: Option<PathBuf>,
    pub replications: Option<usize>,
    pub ols_max_iter: Option<usize>,
}

impl Settings {
    /// `default_system` applies when neither the file nor the flags name one.
    pub fn new(mut config: RunConfig, flags: Overrides, default_system: &str) -> CliResult<Self> {
        macro_rules! apply {
            ($($field:ident),*) => { $( if flags.$field.is_some() { config.$field = flags.$field; } )* };
        }
        apply!(
            system,
            seed,
            out,
            bandwidth,
            data,
            replications,
            ols_max_iter
        );
        let name = config
            .system
            .clone()
            .unwrap_or_else(|| default_system.to_string());
        let system = load_system(&name)?;
        let defaults = defaults_for(system.name());
        Ok(Self {
            config,
            system,
            defaults,
        })
    }

    pub fn system(&self) -> &dyn OdeSystem {
        self.system.as_ref()
    }

    fn missing(&self, field: &str) -> CliError {
        CliError::config(format!(
            "`{field}` is required for system `{}`",
            self.system.name()
        ))
    }

    pub fn theta_true(&self) -> CliResult<Vec<f64>> {
        let theta = match (&self.config.theta_true, &self.defaults) {
            (Some(t), _) => t.clone(),
            (None, Some(d)) => d.theta.clone(),
            (None, None) => return Err(self.missing("theta_true")),
        };
        if theta.len() != self.system.dim_param() {
            return Err(CliError::config(format!(
                "theta_true has {} entries, system `{}` has {} parameters",
                theta.len(),
                self.system.name(),
                self.system.dim_param()
            )));
        }
        Ok(theta)
    }

    pub fn xi(&self) -> CliResult<Vec<f64>> {
        let xi = match (&self.config.xi, &self.defaults) {
            (Some(x), _) => x.clone(),
            (None, Some(d)) => d.xi.clone(),
            (None, None) => return Err(self.missing("xi")),
        };
        if xi.len() != self.system.dim_state() {
            return Err(CliError::config(format!(
                "xi has {} entries, system `{}` has {} states",
                xi.len(),
                self.system.name(),
                self.system.dim_state()
            )));
        }
        Ok(xi)
    }

    pub fn window(&self) -> CliResult<(f64, f64)> {
        match (self.config.window, &self.defaults) {
            (Some(w), _) => Ok(w),
            (None, Some(d)) => Ok(d.window),
            (None, None) => Err(self.missing("window")),
        }
    }

    /// Window for data already on disk: configured, default, or `[0, t_n]`.
    fn window_for_data(&self, times: &[f64]) -> CliResult<(f64, f64)> {
        if self.config.window.is_some() || self.defaults.is_some() {
            return self.window();
        }
        Ok((0.0, times.last().copied().unwrap_or(0.0)))
    }

    pub fn n(&self) -> usize {
        self.config
            .n
            .or(self.defaults.as_ref().map(|d| d.n))
            .unwrap_or(50)
    }

    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(1)
    }

    pub fn family(&self) -> NoiseFamily {
        self.config.noise.unwrap_or(NoiseFamily::Gaussian)
    }

    pub fn sigma(&self) -> CliResult<Vec<f64>> {
        let d = self.system.dim_state();
        match (&self.config.sigma, &self.defaults) {
            (Some(s), _) => s.for_dim(d),
            (None, Some(def)) => Ok(vec![def.sigma; d]),
            (None, None) => Err(self.missing("sigma")),
        }
    }

    pub fn out_dir(&self) -> CliResult<PathBuf> {
        let dir = self
            .config
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(dir)
    }

    fn default_bandwidth(&self) -> Option<f64> {
        self.defaults.as_ref().map(|d| d.bandwidth)
    }

    pub fn bandwidth(&self) -> CliResult<BandwidthChoice> {
        match (self.config.bandwidth, self.default_bandwidth()) {
            (Some(BandwidthChoice::Fixed(b)), _) if !(b > 0.0 && b.is_finite()) => Err(
                CliError::config(format!("bandwidth must be positive, got {b}")),
            ),
            (Some(c), _) => Ok(c),
            (None, Some(b)) => Ok(BandwidthChoice::Fixed(b)),
            (None, None) => Err(self.missing("bandwidth")),
        }
    }

    /// Sweep candidates: configured, or the default bandwidth times
    /// 0.5, 0.75, 1, 1.5 and 2.
    pub fn candidates(&self) -> CliResult<Vec<f64>> {
        if let Some(c) = &self.config.candidates {
            return Ok(c.clone());
        }
        let base = match self.config.bandwidth {
            Some(BandwidthChoice::Fixed(b)) => b,
            _ => self
                .default_bandwidth()
                .ok_or_else(|| self.missing("candidates"))?,
        };
        // Rounded to 12 significant digits so 0.75 * 1.2 prints as 0.9.
        Ok([0.5, 0.75, 1.0, 1.5, 2.0]
            .iter()
            .map(|f| {
                format!("{:.11e}", f * base)
                    .parse()
                    .expect("formatted float")
            })
            .collect())
    }

    pub fn kernel(&self) -> CliResult<Kernel> {
        let order = self.config.kernel_order.unwrap_or(4);
        kernel_of_order(order)
            .ok_or_else(|| CliError::config(format!("kernel_order must be 2 or 4, got {order}")))
    }

    fn weight_params(&self) -> (f64, f64, f64) {
        use sme_core::smoothing::{DEFAULT_BETA, DEFAULT_C, DEFAULT_MARGIN_SCALE};
        self.config
            .weight
            .unwrap_or((DEFAULT_C, DEFAULT_BETA, DEFAULT_MARGIN_SCALE))
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        let base = MinimizeOptions::default();
        MinimizeOptions {
            multistart: self.config.multistart.or(base.multistart),
            tol: self.config.tol.unwrap_or(base.tol),
            max_iter: self.config.max_iter.unwrap_or(base.max_iter),
        }
    }

    pub fn ols_options(&self) -> OlsOptions {
        let mut opts = OlsOptions::default();
        opts.minimize.multistart = self.config.multistart.or(opts.minimize.multistart);
        if let Some(it) = self.config.ols_max_iter {
            opts.minimize.max_iter = it;
        }
        if let Some(step) = self.config.ols_step {
            opts.step = step;
        }
        opts
    }

    pub fn pipeline(&self, window: (f64, f64)) -> CliResult<SmePipeline> {
        let (c, beta, margin) = self.weight_params();
        let mut p = SmePipeline::standard(window.0, window.1)?;
        p.kernel = self.kernel()?;
        p.weight = weight_from_paper(window.0, window.1, c, beta, margin)?;
        if let Some(step) = self.config.grid_step {
            p.grid_step = step;
        }
        p.minimize = self.minimize_options();
        Ok(p)
    }

    /// Observations from the configured CSV, with `t_origin` at the window start.
    pub fn load_data(&self) -> CliResult<ObservationSet> {
        let path = self
            .config
            .data
            .as_ref()
            .ok_or_else(|| CliError::config("no data file given"))?;
        // Without a configured window the design is taken to start at 0.
        let origin = match (self.config.window, &self.defaults) {
            (Some(w), _) => w.0,
            (None, Some(d)) => d.window.0,
            (None, None) => 0.0,
        };
        let obs = ObservationSet::read_csv_path(path, origin).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("{}: {}", path.display(), err.message);
            err
        })?;
        if obs.dim() != self.system.dim_state() {
            return Err(CliError::config(format!(
                "{} has {} value columns, system `{}` has {} states",
                path.display(),
                obs.dim(),
                self.system.name(),
                self.system.dim_state()
            )));
        }
        Ok(obs)
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| CliError::config(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Simulates a data set on the equidistant design `t_i = t_lo + i (t_hi - t_lo)/n`.
pub fn cmd_simulate(s: &Settings) -> CliResult<String> {
    let theta = s.theta_true()?;
    let xi = s.xi()?;
    let (t_lo, t_hi) = s.window()?;
    let n = s.n();
    if n < 2 || t_hi <= t_lo || (t_hi - t_lo).is_nan() {
        return Err(CliError::config(
            "need n >= 2 and a window with t_lo < t_hi",
        ));
    }
    let sigma = s.sigma()?;
    let noise = NoiseSpec {
        sigma: sigma.clone(),
        family: s.family(),
        seed: s.seed(),
        stream: 0,
    };
    let times = equidistant_design(t_lo, t_hi, n);
    let obs = simulate_observations(s.system(), &theta, &xi, t_lo, &times, &noise)?;
    let path = s.out_dir()?.join("observations.csv");
    obs.write_csv_path(&path)?;
    Ok(format!(
        "simulated {}: n={n} d={} sigma={} seed={} -> {}",
        s.system().name(),
        obs.dim(),
        fmt_vec(&sigma),
        s.seed(),
        path.display()
    ))
}

/// Per-bandwidth table as CSV: `bandwidth,rss,theta1..thetap,error`.
fn write_sweep_csv(
    path: &Path,
    sel: &sme_core::estimator::BandwidthSelection,
    p: usize,
) -> CliResult<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    let theta_cols: Vec<String> = (1..=p).map(|k| format!("theta{k}")).collect();
    writeln!(f, "bandwidth,rss,{},error", theta_cols.join(","))?;
    for row in &sel.table {
        let rss = row.rss.map(|r| r.to_string()).unwrap_or_default();
        let theta: Vec<String> = match &row.theta_hat {
            Some(t) => t.iter().map(|v| v.to_string()).collect(),
            None => vec![String::new(); p],
        };
        let err = row.error.as_deref().unwrap_or("").replace(['"', ','], " ");
        writeln!(f, "{},{rss},{},{err}", row.bandwidth, theta.join(","))?;
    }
    f.flush()?;
    Ok(())
}

/// Smooths, matches, and writes `report.json` plus the smoother output on
/// the criterion grid (`smoother.csv`). With `bandwidth = "sweep"` the
/// bandwidth is chosen first by trajectory RSS (`sweep.csv`).
pub fn cmd_estimate(s: &Settings) -> CliResult<String> {
    let obs = s.load_data()?;
    let window = s.window_for_data(obs.times())?;
    let pipeline = s.pipeline(window)?;
    let out = s.out_dir()?;
    let b = match s.bandwidth()? {
        BandwidthChoice::Fixed(b) => b,
        BandwidthChoice::Sweep(_) => {
            let sel =
                select_bandwidth_rss(&obs, s.system(), &s.xi()?, &s.candidates()?, &pipeline)?;
            write_sweep_csv(&out.join("sweep.csv"), &sel, s.system().dim_param())?;
            sel.b_hat
        }
    };
    let (report, sm) = pipeline.estimate(&obs, s.system(), b)?;
    write_json(&out.join("report.json"), &report)?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(out.join("smoother.csv"))?);
    sm.write_csv(&mut f)?;
    f.flush()?;
    let mut line = format!(
        "{} b={b} method={} theta_hat={} criterion={:.3e}",
        s.system().name(),
        report.method.as_str(),
        fmt_vec(&report.theta_hat),
        report.criterion_at_min
    );
    for w in &report.warnings {
        line.push_str(&format!("\nwarning: {w}"));
    }
    Ok(line)
}

/// Outcome of running both estimators on the same data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub sme: Option<EstimateReport>,
    pub sme_error: Option<String>,
    pub ols: Option<EstimateReport>,
    pub ols_error: Option<String>,
    /// OLS wall time divided by SME wall time.
    pub wall_time_ratio: Option<f64>,
    pub ols_not_converged: bool,
}

impl Comparison {
    pub fn any_succeeded(&self) -> bool {
        self.sme.is_some() || self.ols.is_some()
    }

    /// JSON with every wall-time field removed.
    pub fn to_json_without_timing(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("comparison serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_time_ratio");
            for key in ["sme", "ols"] {
                if let Some(r) = obj.get_mut(key).and_then(|r| r.as_object_mut()) {
                    r.remove("wall_time_s");
                }
            }
        }
        v
    }
}

pub fn compare_ols(
    obs: &ObservationSet,
    system: &dyn OdeSystem,
    xi: &[f64],
    pipeline: &SmePipeline,
    bandwidth: f64,
    ols_opts: &OlsOptions,
) -> Comparison {
    let sme = pipeline.estimate(obs, system, bandwidth).map(|(r, _)| r);
    let ols = ols_estimate(obs, system, xi, ols_opts);
    let ratio = match (&sme, &ols) {
        (Ok(a), Ok(b)) if a.wall_time > 0.0 => Some(b.wall_time / a.wall_time),
        _ => None,
    };
    let ols_not_converged = ols.as_ref().is_ok_and(|r| !r.converged);
    let (sme, sme_error) = split(sme);
    let (ols, ols_error) = split(ols);
    Comparison {
        sme,
        sme_error,
        ols,
        ols_error,
        wall_time_ratio: ratio,
        ols_not_converged,
    }
}

fn split<T>(r: sme_core::Result<T>) -> (Option<T>, Option<String>) {
    match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

pub fn cmd_compare_ols(s: &Settings) -> CliResult<String> {
    let obs = s.load_data()?;
    let window = s.window_for_data(obs.times())?;
    let pipeline = s.pipeline(window)?;
    let b = match s.bandwidth()? {
        BandwidthChoice::Fixed(b) => b,
        BandwidthChoice::Sweep(_) => {
            return Err(CliError::config("compare-ols needs a numeric bandwidth"))
        }
    };
    let cmp = compare_ols(&obs, s.system(), &s.xi()?, &pipeline, b, &s.ols_options());
    write_json(&s.out_dir()?.join("compare.json"), &cmp)?;
    if !cmp.any_succeeded() {
        return Err(CliError {
            code: EXIT_OPTIMIZER,
            message: format!(
                "both estimators failed: sme: {}; ols: {}",
                cmp.sme_error.as_deref().unwrap_or("-"),
                cmp.ols_error.as_deref().unwrap_or("-")
            ),
        });
    }
    let show = |r: &Option<EstimateReport>, e: &Option<String>| match (r, e) {
        (Some(r), _) => format!("{} in {:.4}s", fmt_vec(&r.theta_hat), r.wall_time),
        (None, Some(e)) => format!("failed ({e})"),
        (None, None) => "-".into(),
    };
    let mut line = format!(
        "sme {} | ols {}",
        show(&cmp.sme, &cmp.sme_error),
        show(&cmp.ols, &cmp.ols_error)
    );
    if let Some(r) = cmp.wall_time_ratio {
        line.push_str(&format!(" | ols/sme time ratio {r:.1}"));
    }
    if cmp.ols_not_converged {
        line.push_str(" | ols not converged");
    }
    Ok(line)
}

/// Bandwidth selection by trajectory RSS; writes `sweep.csv` and `sweep.json`.
pub fn cmd_sweep(s: &Settings) -> CliResult<String> {
    let obs = s.load_data()?;
    let window = s.window_for_data(obs.times())?;
    let pipeline = s.pipeline(window)?;
    let candidates = s.candidates()?;
    let sel = select_bandwidth_rss(&obs, s.system(), &s.xi()?, &candidates, &pipeline)?;
    let out = s.out_dir()?;
    write_sweep_csv(&out.join("sweep.csv"), &sel, s.system().dim_param())?;
    write_json(&out.join("sweep.json"), &sel)?;
    Ok(format!(
        "b_hat={} over {} candidates",
        sel.b_hat,
        candidates.len()
    ))
}

/// Root-n Monte Carlo study; writes `mc_rootn.json` and `mc_rootn_raw.csv`.
pub fn cmd_mc_rootn(s: &Settings) -> CliResult<String> {
    let mut cfg = RootNConfig::exponential_default();
    let c = &s.config;
    if s.system().name() != "exponential" || c.theta_true.is_some() {
        cfg.theta = s.theta_true()?;
    }
    if s.system().name() != "exponential" || c.xi.is_some() {
        cfg.xi = s.xi()?;
    }
    if c.window.is_some() || s.system().name() != "exponential" {
        cfg.window = s.window()?;
    }
    if let Some(v) = &c.n_values {
        cfg.n_values = v.clone();
    }
    if let Some(g) = c.gamma {
        cfg.gamma = g;
    }
    if let Some(sig) = &c.sigma {
        cfg.sigma = sig.first();
    }
    cfg.family = s.family();
    if let Some(r) = c.replications {
        cfg.replications = r;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(k) = c.kernel_order {
        cfg.kernel_order = k;
    }
    if let Some(w) = c.weight {
        cfg.weight = w;
    }
    if let Some(step) = c.grid_step {
        cfg.grid_step = step;
    }
    match c.bandwidth {
        Some(BandwidthChoice::Fixed(b)) => {
            cfg.anchor = BandwidthAnchor {
                n_ref: cfg.n_values.first().copied().unwrap_or(100) as f64,
                b_ref: b,
            }
        }
        Some(BandwidthChoice::Sweep(_)) => {
            return Err(CliError::config(
                "mc-rootn needs a numeric reference bandwidth",
            ))
        }
        None => {}
    }
    let report = root_n_consistency_study(s.system(), &cfg)?;
    let out = s.out_dir()?;
    write_json(&out.join("mc_rootn.json"), &report)?;
    report.write_raw_csv_path(out.join("mc_rootn_raw.csv"))?;
    let ratios: Vec<String> = report
        .scaled_ratios()
        .iter()
        .map(|r| format!("{r:.3}"))
        .collect();
    Ok(format!(
        "rmse={} sqrt(n)*rmse ratios=[{}] failures={}",
        fmt_vec(&report.rmse_norm),
        ratios.join(", "),
        report.failures
    ))
}

/// Sup-norm rate study for `sin(2 pi t)`; writes `mc_supnorm.json`.
pub fn cmd_mc_supnorm(s: &Settings) -> CliResult<String> {
    let c = &s.config;
    let mut cfg = SupNormConfig::sine_default(s.family());
    if let Some(v) = &c.n_values {
        cfg.n_values = v.clone();
    }
    if let Some(r) = c.replications {
        cfg.replications = r;
    }
    if let Some(sig) = &c.sigma {
        cfg.sigma = sig.first();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(iv) = c.interval {
        cfg.interval = iv;
    }
    match c.bandwidth {
        Some(BandwidthChoice::Fixed(b)) => cfg.bandwidth.coef = b,
        Some(BandwidthChoice::Sweep(_)) => {
            return Err(CliError::config(
                "mc-supnorm needs a numeric bandwidth coefficient",
            ))
        }
        None => {}
    }
    use std::f64::consts::PI;
    let mu = |t: f64| (2.0 * PI * t).sin();
    let mu_p = |t: f64| 2.0 * PI * (2.0 * PI * t).cos();
    let report = supnorm_rate_study(&mu, &mu_p, &s.kernel()?, &cfg)?;
    write_json(&s.out_dir()?.join("mc_supnorm.json"), &report)?;
    Ok(format!(
        "mean sup error {} derivative {}",
        fmt_vec(&report.mean_sup_error),
        fmt_vec(&report.mean_sup_error_deriv)
    ))
}

/// Kernel moments as JSON; with an output directory also `kernel.csv`
/// (`u,K,dK` on 201 points).
pub fn cmd_kernel_info(s: &Settings, write_files: bool) -> CliResult<String> {
    let k = s.kernel()?;
    let moments = k.moments();
    let text =
        serde_json::to_string_pretty(&moments).map_err(|e| CliError::config(e.to_string()))?;
    if write_files {
        let out = s.out_dir()?;
        write_json(&out.join("kernel.json"), &moments)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(out.join("kernel.csv"))?);
        writeln!(f, "u,K,dK")?;
        for i in 0..=200 {
            let u = -1.0 + i as f64 / 100.0;
            writeln!(f, "{u},{},{}", k.eval(u), k.deriv(u))?;
        }
        f.flush()?;
    }
    Ok(text)
}
