mod common;

use common::*;
use sme_core::experiments::*;
use sme_core::ode::*;
use sme_core::smoothing::kernel_gegenbauer_order4;
use sme_core::Error;

#[test]
fn noiseless_simulation_is_the_trajectory() {
    let lv = builtin_lotka_volterra();
    let obs = lv_obs(0, 0.0);
    let traj = rk4_at_times(&lv, &LV_THETA, &LV_XI, 0.0, &paper_times(), 1e-3).unwrap();
    assert_eq!(obs.y(), &traj.states);
    assert_eq!(obs.times(), paper_times().as_slice());
    assert_eq!(obs.t_origin(), 0.0);
}

#[test]
fn simulation_is_seed_deterministic() {
    let a = lv_obs(42, PAPER_SIGMA);
    let b = lv_obs(42, PAPER_SIGMA);
    let c = lv_obs(43, PAPER_SIGMA);
    assert_eq!(a, b);
    assert_ne!(a.y(), c.y());
}

#[test]
fn simulation_propagates_divergence() {
    let sys = Exponential::with_box(ParamBox::uniform(1, -1.0, 900.0).unwrap()).unwrap();
    let times = [1.0, 2.0, 3.0];
    let err = simulate_observations(
        &sys,
        &[800.0],
        &[1.0],
        0.0,
        &times,
        &NoiseSpec::gaussian(0.0, 0),
    )
    .unwrap_err();
    assert!(matches!(err, Error::IntegrationDiverged { .. }));
}

#[test]
fn gaussian_noise_variance_at_one_time_point() {
    let sys = builtin_exponential();
    let truth = (0.3f64 * 1.0).exp();
    let samples: Vec<f64> = (0..10_000u64)
        .map(|rep| {
            let noise = NoiseSpec::gaussian(0.1, 2024).with_stream(rep);
            let obs =
                simulate_observations(&sys, &[0.3], &[1.0], 0.0, &[0.5, 1.0], &noise).unwrap();
            obs.y()[(1, 0)] - truth
        })
        .collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((0.0094..=0.0106).contains(&var), "variance {var}");
}

#[test]
fn noise_moments() {
    for (family, sigma) in [
        (NoiseFamily::Gaussian, 0.1),
        (NoiseFamily::BoundedUniform, 0.3),
    ] {
        let spec = NoiseSpec {
            sigma: vec![sigma, 2.0 * sigma],
            family,
            seed: 99,
            stream: 7,
        };
        let draws = spec.draw(20_000, 2).unwrap();
        for j in 0..2 {
            let col = draws.column(j);
            let n = col.len() as f64;
            let s = spec.sigma[j];
            assert!(
                col.mean().abs() <= 4.0 * s / n.sqrt(),
                "{family:?} mean {}",
                col.mean()
            );
            let var = col.iter().map(|e| e * e).sum::<f64>() / n;
            assert!((var / (s * s) - 1.0).abs() < 0.05, "{family:?} var {var}");
            if family == NoiseFamily::BoundedUniform {
                assert!(col.iter().all(|e| e.abs() <= spec.bound(j)));
                assert!((spec.bound(j) - 3f64.sqrt() * s).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn negative_sigma_rejected() {
    assert!(NoiseSpec::gaussian(-0.1, 1).draw(3, 1).is_err());
}

#[test]
fn design_and_anchor() {
    let t = equidistant_design(0.0, 1.0, 4);
    assert_eq!(t, vec![0.25, 0.5, 0.75, 1.0]);
    let anchor = BandwidthAnchor {
        n_ref: 100.0,
        b_ref: 0.1,
    };
    assert_eq!(anchor.at(100, 0.15), 0.1);
    assert!((anchor.at(1600, 0.15) - 0.1 * 16f64.powf(-0.15)).abs() < 1e-15);
}

fn small_rootn() -> RootNConfig {
    RootNConfig {
        replications: 20,
        ..RootNConfig::exponential_default()
    }
}

#[test]
fn root_n_rejects_bad_config() {
    let sys = builtin_exponential();
    let cfg = RootNConfig {
        replications: 0,
        ..small_rootn()
    };
    assert!(matches!(
        root_n_consistency_study(&sys, &cfg),
        Err(Error::Parameter(_))
    ));
    for gamma in [0.1, 0.2] {
        let cfg = RootNConfig {
            gamma,
            ..small_rootn()
        };
        assert!(root_n_consistency_study(&sys, &cfg).is_err());
    }
    let cfg = RootNConfig {
        n_values: vec![400, 100],
        ..small_rootn()
    };
    assert!(root_n_consistency_study(&sys, &cfg).is_err());
}

#[test]
fn root_n_is_deterministic() {
    let sys = builtin_exponential();
    let a = root_n_consistency_study(&sys, &small_rootn()).unwrap();
    let b = root_n_consistency_study(&sys, &small_rootn()).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a.raw, b.raw);
    assert_eq!(a.raw.len(), 3 * 20);
    assert_eq!(a.failures, 0);
    for (i, &n) in a.n_values.iter().enumerate() {
        assert!((a.scaled_norm[i] - (n as f64).sqrt() * a.rmse_norm[i]).abs() < 1e-12);
        assert!(a.rmse[i].iter().all(|&r| r >= 0.0));
    }
}

#[test]
fn root_n_bias_only_regime() {
    let sys = builtin_exponential();
    let cfg = RootNConfig {
        sigma: 0.0,
        replications: 1,
        ..small_rootn()
    };
    let rep = root_n_consistency_study(&sys, &cfg).unwrap();
    assert!(
        rep.rmse_norm.windows(2).all(|w| w[1] < w[0]),
        "{:?}",
        rep.rmse_norm
    );
    assert!(rep.rmse_norm[0] < 0.05);
}

#[test]
fn raw_csv_layout() {
    let sys = builtin_exponential();
    let cfg = RootNConfig {
        replications: 2,
        n_values: vec![100],
        ..small_rootn()
    };
    let rep = root_n_consistency_study(&sys, &cfg).unwrap();
    let mut buf = Vec::new();
    rep.write_raw_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,rep,component,theta_hat");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("100,0,1,"));
    assert!(lines[2].starts_with("100,1,1,"));
}

#[test]
fn constant_mean_within_riemann_bound() {
    // Design t_i = i/n, so each kernel sum is a right-endpoint Riemann sum of
    // K((t - s)/b)/b, whose error is at most TV(K) / (n b).
    let kernel = kernel_gegenbauer_order4();
    let m = 200_000;
    let tv: f64 = (0..m)
        .map(|i| {
            let u = -1.0 + 2.0 * i as f64 / m as f64;
            (kernel.eval(u + 2.0 / m as f64) - kernel.eval(u)).abs()
        })
        .sum();
    let c = 2.5;
    let cfg = SupNormConfig {
        sigma: 0.0,
        replications: 1,
        bandwidth: PowerRule {
            coef: 0.2,
            exponent: 1.0 / 9.0,
        },
        ..SupNormConfig::sine_default(NoiseFamily::Gaussian)
    };
    let rep = supnorm_rate_study(&|_| c, &|_| 0.0, &kernel, &cfg).unwrap();
    for (i, &n) in rep.n_values.iter().enumerate() {
        let b = rep.bandwidths[i];
        assert!(b < cfg.interval.0);
        let bound = c * tv * 1.0001 / (n as f64 * b);
        assert!(
            rep.mean_sup_error[i] <= bound,
            "n={n}: {} > {bound}",
            rep.mean_sup_error[i]
        );
    }
}

#[test]
fn supnorm_rejects_bad_interval() {
    let mut cfg = SupNormConfig::sine_default(NoiseFamily::Gaussian);
    cfg.interval = (0.0, 0.8);
    assert!(sine_supnorm_study(&cfg).is_err());
    cfg.interval = (0.2, 0.8);
    cfg.replications = 0;
    assert!(sine_supnorm_study(&cfg).is_err());
}

#[test]
fn supnorm_is_deterministic() {
    let cfg = SupNormConfig {
        replications: 5,
        ..SupNormConfig::sine_default(NoiseFamily::BoundedUniform)
    };
    let a = sine_supnorm_study(&cfg).unwrap();
    let b = sine_supnorm_study(&cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert!(a.ratio.iter().all(|r| r.is_finite() && *r > 0.0));
}
