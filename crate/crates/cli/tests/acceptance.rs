//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p sme-cli --test acceptance`.

use std::time::Instant;

use serde_json::Value;
use sme_cli::{cmd_compare_ols, Overrides, RunConfig, Settings};
use sme_core::estimator::{
    exact_plugin, minimize_criterion, solve_linear, CriterionSpec, MinimizeOptions,
};
use sme_core::experiments::{
    root_n_consistency_study, simulate_observations, sine_supnorm_study, NoiseFamily, NoiseSpec,
    RootNConfig, SupNormConfig,
};
use sme_core::ode::{builtin_exponential, builtin_lotka_volterra, builtin_van_der_pol};
use sme_core::quadrature::adaptive_simpson;
use sme_core::smoothing::{evaluate_on_grid, kernel_gegenbauer_order4, WeightFunction};

type Check = Result<String, String>;

const LV_THETA: [f64; 4] = [0.5; 4];
const LV_XI: [f64; 2] = [1.0, 0.5];
const VDP_THETA: f64 = 0.8;
const VDP_XI: [f64; 2] = [1.0, 1.0];

fn paper_times() -> Vec<f64> {
    (1..=50).map(|i| 0.5 * i as f64).collect()
}

fn paper_spec(b: f64) -> CriterionSpec {
    CriterionSpec::new(
        WeightFunction::standard(0.0, 25.0).unwrap(),
        0.1,
        kernel_gegenbauer_order4(),
        b,
    )
    .unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

fn kernel_conditions() -> Check {
    let k = kernel_gegenbauer_order4();
    let mut moments = Vec::new();
    for l in 0..4 {
        let m = adaptive_simpson(|u| u.powi(l) * k.eval(u), -1.0, 1.0, 1e-13);
        let target = if l == 0 { 1.0 } else { 0.0 };
        ensure((m - target).abs() <= 1e-8, || format!("moment {l} = {m:e}"))?;
        moments.push(m);
    }
    let m4 = adaptive_simpson(|u| u.powi(4) * k.eval(u), -1.0, 1.0, 1e-13);
    ensure(m4.abs() > 1e-3, || {
        format!("fourth moment {m4} should not vanish")
    })?;
    for u in [-1.0, 1.0] {
        ensure(k.eval(u) == 0.0 && k.deriv(u) == 0.0, || {
            format!("K or K' nonzero at {u}")
        })?;
    }
    let shown: Vec<String> = moments.iter().map(|m| format!("{m:.1e}")).collect();
    Ok(format!(
        "moments 0..3 = [{}], fourth = {m4:.4}",
        shown.join(", ")
    ))
}

fn exact_plugin_recovery() -> Check {
    let lv = builtin_lotka_volterra();
    let spec = paper_spec(1.2);
    let sm = exact_plugin(&lv, &LV_THETA, &LV_XI, 0.0, &spec, 1e-3).map_err(|e| e.to_string())?;
    let rep = solve_linear(&sm, &lv, &spec).map_err(|e| e.to_string())?;
    let lv_err = rep
        .theta_hat
        .iter()
        .map(|t| (t - 0.5).abs())
        .fold(0.0, f64::max);
    ensure(lv_err <= 1e-8, || {
        format!("Lotka-Volterra error {lv_err:e}")
    })?;

    let vdp = builtin_van_der_pol();
    let spec = paper_spec(1.0);
    let sm =
        exact_plugin(&vdp, &[VDP_THETA], &VDP_XI, 0.0, &spec, 1e-3).map_err(|e| e.to_string())?;
    let opts = MinimizeOptions {
        tol: 1e-7,
        ..Default::default()
    };
    let rep = minimize_criterion(&sm, &vdp, &spec, &opts).map_err(|e| e.to_string())?;
    let vdp_err = (rep.theta_hat[0] - VDP_THETA).abs();
    ensure(vdp_err <= 1e-5, || format!("Van der Pol error {vdp_err:e}"))?;
    Ok(format!(
        "errors: Lotka-Volterra {lv_err:.1e}, Van der Pol {vdp_err:.1e}"
    ))
}

/// Returns the check result and the timing-free report JSON of every replication.
fn lotka_volterra_end_to_end() -> (Check, Vec<Value>) {
    let lv = builtin_lotka_volterra();
    let spec = paper_spec(1.2);
    let mut errs: Vec<[f64; 4]> = Vec::new();
    let mut reports = Vec::new();
    let mut slowest: f64 = 0.0;
    for seed in 0..100 {
        let run = || -> sme_core::Result<_> {
            let clock = Instant::now();
            let obs = simulate_observations(
                &lv,
                &LV_THETA,
                &LV_XI,
                0.0,
                &paper_times(),
                &NoiseSpec::gaussian(0.1, seed),
            )?;
            let sm = evaluate_on_grid(&obs, spec.kernel(), 1.2, spec.grid())?;
            let rep = solve_linear(&sm, &lv, &spec)?;
            Ok((rep, clock.elapsed().as_secs_f64()))
        };
        match run() {
            Ok((rep, secs)) => {
                slowest = slowest.max(secs);
                let mut e = [0.0; 4];
                for (k, t) in rep.theta_hat.iter().enumerate() {
                    e[k] = (t - 0.5).abs();
                }
                errs.push(e);
                reports.push(rep.to_json_without_timing());
            }
            Err(e) => return (Err(format!("seed {seed}: {e}")), reports),
        }
    }
    let good = errs.iter().filter(|e| e.iter().all(|&x| x <= 0.15)).count();
    let med: Vec<f64> = (0..4)
        .map(|k| median(errs.iter().map(|e| e[k]).collect()))
        .collect();
    let check = (|| {
        ensure(good >= 90, || format!("only {good}/100 within 0.15"))?;
        ensure(med.iter().all(|&m| m <= 0.05), || {
            format!("median errors {med:?}")
        })?;
        ensure(slowest < 1.0, || format!("slowest estimate {slowest:.3}s"))?;
        Ok(format!(
            "{good}/100 within 0.15, median |error| {med:.4?}, slowest estimate {:.2} ms",
            slowest * 1e3
        ))
    })();
    (check, reports)
}

fn van_der_pol_end_to_end() -> (Check, Vec<Value>) {
    let vdp = builtin_van_der_pol();
    let spec = paper_spec(1.0);
    let mut errs = Vec::new();
    let mut reports = Vec::new();
    for seed in 0..100 {
        let run = || -> sme_core::Result<_> {
            let obs = simulate_observations(
                &vdp,
                &[VDP_THETA],
                &VDP_XI,
                0.0,
                &paper_times(),
                &NoiseSpec::gaussian(0.1, seed),
            )?;
            let sm = evaluate_on_grid(&obs, spec.kernel(), 1.0, spec.grid())?;
            minimize_criterion(&sm, &vdp, &spec, &MinimizeOptions::default())
        };
        match run() {
            Ok(rep) => {
                errs.push((rep.theta_hat[0] - VDP_THETA).abs());
                reports.push(rep.to_json_without_timing());
            }
            Err(e) => return (Err(format!("seed {seed}: {e}")), reports),
        }
    }
    let good = errs.iter().filter(|&&e| e <= 0.15).count();
    let med = median(errs);
    let check = (|| {
        ensure(med <= 0.05, || format!("median |error| {med:.4}"))?;
        ensure(good >= 90, || format!("only {good}/100 within 0.15"))?;
        Ok(format!("{good}/100 within 0.15, median |error| {med:.4}"))
    })();
    (check, reports)
}

fn root_n() -> (Check, Option<Value>) {
    let rep =
        match root_n_consistency_study(&builtin_exponential(), &RootNConfig::exponential_default())
        {
            Ok(r) => r,
            Err(e) => return (Err(e.to_string()), None),
        };
    let ratios = rep.scaled_ratios();
    let check = (|| {
        ensure(ratios.iter().all(|r| (0.5..=2.0).contains(r)), || {
            format!("sqrt(n) RMSE ratios {ratios:?}")
        })?;
        ensure(rep.rmse_norm.windows(2).all(|w| w[1] < w[0]), || {
            format!("RMSE not decreasing: {:?}", rep.rmse_norm)
        })?;
        ensure(rep.failures == 0, || {
            format!("{} failed replications", rep.failures)
        })?;
        Ok(format!(
            "RMSE {:.4?}, sqrt(n) RMSE ratios {ratios:.3?}",
            rep.rmse_norm
        ))
    })();
    (check, serde_json::to_value(&rep).ok())
}

fn sup_norm() -> (Check, Vec<Value>) {
    let mut lines = Vec::new();
    let mut values = Vec::new();
    for family in [NoiseFamily::Gaussian, NoiseFamily::BoundedUniform] {
        let rep = match sine_supnorm_study(&SupNormConfig::sine_default(family)) {
            Ok(r) => r,
            Err(e) => return (Err(e.to_string()), values),
        };
        let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
        if !dec(&rep.mean_sup_error) || !dec(&rep.mean_sup_error_deriv) {
            return (
                Err(format!(
                    "{family:?}: sup errors {:?}, derivative {:?}",
                    rep.mean_sup_error, rep.mean_sup_error_deriv
                )),
                values,
            );
        }
        lines.push(format!(
            "{family:?} {:.4?} / {:.3?}",
            rep.mean_sup_error, rep.mean_sup_error_deriv
        ));
        values.push(serde_json::to_value(&rep).unwrap());
    }
    (
        Ok(format!("sup errors (mu / mu'): {}", lines.join("; "))),
        values,
    )
}

fn cross_method() -> Check {
    let lv = builtin_lotka_volterra();
    let spec = paper_spec(1.2);
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        // Truth jittered uniformly within +-0.17 of 0.5, then fresh noise.
        let jitter = NoiseSpec::bounded(0.1, 5_000 + k)
            .draw(1, 4)
            .map_err(|e| e.to_string())?;
        let theta: Vec<f64> = (0..4).map(|j| 0.5 + jitter[(0, j)]).collect();
        let obs = simulate_observations(
            &lv,
            &theta,
            &LV_XI,
            0.0,
            &paper_times(),
            &NoiseSpec::gaussian(0.1, 9_000 + k),
        )
        .map_err(|e| e.to_string())?;
        let sm =
            evaluate_on_grid(&obs, spec.kernel(), 1.2, spec.grid()).map_err(|e| e.to_string())?;
        let lin = solve_linear(&sm, &lv, &spec).map_err(|e| e.to_string())?;
        let nm = minimize_criterion(&sm, &lv, &spec, &MinimizeOptions::default())
            .map_err(|e| e.to_string())?;
        let gap = lin
            .theta_hat
            .iter()
            .zip(&nm.theta_hat)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    ensure(worst <= 1e-5, || format!("largest gap {worst:e}"))?;
    Ok(format!(
        "largest componentwise gap over 20 datasets {worst:.1e}"
    ))
}

fn sme_vs_ols() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let obs = simulate_observations(
        &builtin_lotka_volterra(),
        &LV_THETA,
        &LV_XI,
        0.0,
        &paper_times(),
        &NoiseSpec::gaussian(0.1, 1),
    )
    .map_err(|e| e.to_string())?;
    let data = dir.path().join("observations.csv");
    obs.write_csv_path(&data).map_err(|e| e.to_string())?;
    let flags = Overrides {
        data: Some(data),
        out: Some(dir.path().to_path_buf()),
        ..Default::default()
    };
    let settings =
        Settings::new(RunConfig::default(), flags, "lotka-volterra").map_err(|e| e.message)?;
    cmd_compare_ols(&settings).map_err(|e| e.message)?;
    let text =
        std::fs::read_to_string(dir.path().join("compare.json")).map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let branch = |key: &str| -> Result<(Vec<f64>, f64), String> {
        let r = v
            .get(key)
            .filter(|r| !r.is_null())
            .ok_or(format!("{key} branch failed"))?;
        let theta: Vec<f64> = r["theta_hat"]
            .as_array()
            .ok_or("theta_hat missing")?
            .iter()
            .filter_map(Value::as_f64)
            .collect();
        Ok((theta, r["wall_time_s"].as_f64().ok_or("wall time missing")?))
    };
    let (sme, t_sme) = branch("sme")?;
    let (ols, t_ols) = branch("ols")?;
    let err = |t: &[f64]| t.iter().map(|x| (x - 0.5).abs()).fold(0.0, f64::max);
    ensure(t_sme < t_ols, || {
        format!("SME {t_sme:.4}s not faster than OLS {t_ols:.4}s")
    })?;
    ensure(err(&sme) <= 0.2 && err(&ols) <= 0.2, || {
        format!("errors SME {:.3}, OLS {:.3}", err(&sme), err(&ols))
    })?;
    Ok(format!(
        "SME {:.2} ms vs OLS {:.2} s; max errors {:.3} / {:.3}",
        t_sme * 1e3,
        t_ols,
        err(&sme),
        err(&ols)
    ))
}

struct Runs {
    lv: Vec<Value>,
    vdp: Vec<Value>,
    rootn: Option<Value>,
    supnorm: Vec<Value>,
}

fn determinism(first: &Runs) -> Check {
    let (_, lv) = lotka_volterra_end_to_end();
    let (_, vdp) = van_der_pol_end_to_end();
    let (_, rootn) = root_n();
    let (_, supnorm) = sup_norm();
    let mut bad = Vec::new();
    if lv != first.lv || lv.is_empty() {
        bad.push("Lotka-Volterra");
    }
    if vdp != first.vdp || vdp.is_empty() {
        bad.push("Van der Pol");
    }
    if rootn != first.rootn || rootn.is_none() {
        bad.push("root-n");
    }
    if supnorm != first.supnorm || supnorm.len() != 2 {
        bad.push("sup-norm");
    }
    ensure(bad.is_empty(), || {
        format!("reports differ: {}", bad.join(", "))
    })?;
    Ok("repeated runs of criteria 3-6 gave identical JSON".into())
}

fn report(id: u32, name: &str, limit: Option<f64>, secs: f64, check: Check) -> bool {
    let over = limit.is_some_and(|l| secs > l);
    let (pass, detail) = match check {
        Ok(d) if over => (
            false,
            format!("{d}; took {secs:.2}s, limit {}s", limit.unwrap()),
        ),
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    println!(
        "{} criterion {id} {name} ({secs:.2}s): {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let clock = Instant::now();
    let out = f();
    (out, clock.elapsed().as_secs_f64())
}

fn main() {
    let mut passed = Vec::new();

    let (c, s) = timed(kernel_conditions);
    passed.push(report(1, "kernel conditions", Some(1.0), s, c));

    let (c, s) = timed(exact_plugin_recovery);
    passed.push(report(2, "exact plug-in recovery", Some(1.0), s, c));

    let ((c, lv), s) = timed(lotka_volterra_end_to_end);
    passed.push(report(3, "Lotka-Volterra end-to-end", Some(120.0), s, c));

    let ((c, vdp), s) = timed(van_der_pol_end_to_end);
    passed.push(report(4, "Van der Pol end-to-end", Some(120.0), s, c));

    let ((c, rootn), s) = timed(root_n);
    passed.push(report(5, "root-n consistency", Some(300.0), s, c));

    let ((c, supnorm), s) = timed(sup_norm);
    passed.push(report(6, "sup-norm rates", Some(300.0), s, c));

    let (c, s) = timed(cross_method);
    passed.push(report(7, "cross-method oracle", None, s, c));

    let (c, s) = timed(sme_vs_ols);
    passed.push(report(8, "SME vs OLS benchmark", None, s, c));

    let first = Runs {
        lv,
        vdp,
        rootn,
        supnorm,
    };
    let (c, s) = timed(|| determinism(&first));
    passed.push(report(9, "determinism", None, s, c));

    let n_pass = passed.iter().filter(|&&p| p).count();
    println!("acceptance: {n_pass}/{} criteria passed", passed.len());
    if n_pass != passed.len() {
        std::process::exit(1);
    }
}
