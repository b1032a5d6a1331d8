use heston_pf::calibrate::posterior_means;
use heston_pf::filter::run_filter;
use heston_pf::rng::Streams;
use heston_pf::sde::{simulate_heston, step_volatility};
use heston_pf::{calibrate, CalibrationOptions, HestonParams, PriorConfig, TimeGrid};

fn truth() -> HestonParams {
    HestonParams { mu: 0.1, kappa: 1.0, theta: 0.05, sigma: 0.01, rho: -0.5 }
}

fn grid() -> TimeGrid {
    TimeGrid::from_maturity(3.0, 1.0 / 252.0).unwrap()
}

#[test]
fn noiseless_path_recovers_parameters_exactly() {
    let p = HestonParams { sigma: 0.0, ..truth() };
    let g = grid();
    for v0 in [0.02, 0.03, 0.08] {
        let mut vol = vec![v0];
        for k in 0..g.n_steps {
            vol.push(step_volatility(vol[k], &p, g.dt, 0.0));
        }
        let returns = vec![1.0 + p.mu * g.dt; g.n_steps];
        let (mu, kappa, theta) = posterior_means(&returns, &vol, g.dt, &PriorConfig::flat()).unwrap();
        assert!((mu - p.mu).abs() < 1e-6, "mu {mu}");
        assert!((kappa - p.kappa).abs() / p.kappa < 1e-3, "kappa {kappa}");
        assert!((theta - p.theta).abs() / p.theta < 1e-3, "theta {theta}");
    }
}

#[test]
fn filter_at_true_parameters_without_vol_noise_tracks_theta() {
    let p = HestonParams { sigma: 0.0, ..truth() };
    let g = grid();
    let path = simulate_heston(&p, &g, 100.0, p.theta, 4).unwrap();
    let priors = PriorConfig { lambda_th: 0.0, n_particles: 500, ..PriorConfig::default() };
    let out = run_filter(&path.returns(), &p, &priors, g.dt, false, &Streams::new(4), 0).unwrap();
    for (k, v) in out.vol_estimate.iter().enumerate() {
        assert!((v - p.theta).abs() < 1e-3, "step {k}: {v}");
    }
}

#[test]
fn jump_free_path_gets_low_jump_probability() {
    let g = grid();
    let priors = PriorConfig { n_particles: 500, ..PriorConfig::default() };
    for seed in 0..10 {
        let path = simulate_heston(&truth(), &g, 100.0, 0.05, seed).unwrap();
        let out = run_filter(&path.returns(), &truth(), &priors, g.dt, true, &Streams::new(seed), 0).unwrap();
        let mean = out.jump_prob.iter().sum::<f64>() / out.jump_prob.len() as f64;
        assert!(mean <= 0.05, "seed {seed}: mean jump probability {mean}");
    }
}

#[test]
fn planted_jump_is_flagged() {
    let g = grid();
    let priors = PriorConfig { n_particles: 500, ..PriorConfig::default() };
    let mut path = simulate_heston(&truth(), &g, 100.0, 0.05, 9).unwrap();
    path.inject_jump(200, 0.45f64.ln()).unwrap();
    let out = run_filter(&path.returns(), &truth(), &priors, g.dt, true, &Streams::new(9), 0).unwrap();
    assert!(out.jump_prob[199] >= 0.9, "{}", out.jump_prob[199]);
    assert!((out.jump_size[199] - 0.45f64.ln()).abs() < 0.2, "{}", out.jump_size[199]);
}

#[test]
fn calibration_is_deterministic_per_seed() {
    let g = TimeGrid::from_maturity(1.0, 1.0 / 252.0).unwrap();
    let path = simulate_heston(&truth(), &g, 100.0, 0.05, 2).unwrap();
    let priors = PriorConfig { n_samples: 20, n_particles: 100, ..PriorConfig::centered_on(&truth(), g.dt) };
    let run = |seed| calibrate(&path.prices, g.dt, &priors, &CalibrationOptions { seed, ..Default::default() }).unwrap();
    let (a, b, c) = (run(1), run(1), run(2));
    assert_eq!(a, b);
    assert_ne!(a.chain, c.chain);
    assert_eq!(a.chain.len(), 20);
}
