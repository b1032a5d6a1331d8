use heston_pf::sde::{correlate_noise, simulate_bates, simulate_heston};
use heston_pf::{HestonParams, JumpParams, TimeGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn base() -> HestonParams {
    HestonParams { mu: 0.1, kappa: 1.0, theta: 0.05, sigma: 0.01, rho: -0.5 }
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn correlated_noise_hits_target_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let a: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let c = correlate_noise(&a, &b, -0.5).unwrap();
    assert!((corr(&a, &c) + 0.5).abs() < 0.01);
}

#[test]
fn log_growth_carries_ito_correction() {
    let grid = TimeGrid::from_maturity(3.0, 1.0 / 252.0).unwrap();
    let p = base();
    let seeds = 500;
    let mean = (0..seeds)
        .map(|s| {
            let path = simulate_heston(&p, &grid, 100.0, p.theta, s).unwrap();
            (path.prices[grid.n_steps] / path.prices[0]).ln() / grid.maturity
        })
        .sum::<f64>()
        / seeds as f64;
    assert!((mean - (0.1 - 0.05 / 2.0)).abs() < 0.01, "mean log growth {mean}");
}

#[test]
fn jump_count_matches_intensity() {
    let grid = TimeGrid::from_maturity(3.0, 1.0 / 252.0).unwrap();
    let j = JumpParams { lambda: 1.0, mu_j: -0.8, sigma_j: 0.2 };
    let seeds = 1000;
    let total: usize = (0..seeds)
        .map(|s| simulate_bates(&base(), &j, &grid, 100.0, 0.05, s).unwrap().jumps.len())
        .sum();
    let mean = total as f64 / seeds as f64;
    assert!((mean - 3.0).abs() < 0.2, "mean jump count {mean}");
}

#[test]
fn increment_correlation_follows_rho_sign() {
    let grid = TimeGrid::from_maturity(1.0, 1.0 / 252.0).unwrap();
    for rho in [-0.5, 0.5] {
        let p = HestonParams { rho, sigma: 0.3, ..base() };
        let seeds = 500;
        let mean = (0..seeds)
            .map(|s| {
                let path = simulate_heston(&p, &grid, 100.0, p.theta, 1000 + s).unwrap();
                let r: Vec<f64> = path.returns();
                let dv: Vec<f64> = path.true_vol.windows(2).map(|w| w[1] - w[0]).collect();
                corr(&r, &dv)
            })
            .sum::<f64>()
            / seeds as f64;
        assert_eq!(mean.signum(), rho.signum(), "rho {rho}: mean corr {mean}");
    }
}

#[test]
fn paths_are_positive_and_replayable() {
    let grid = TimeGrid::from_maturity(3.0, 1.0 / 252.0).unwrap();
    let p = HestonParams { sigma: 0.5, ..base() };
    let j = JumpParams { lambda: 5.0, mu_j: -0.8, sigma_j: 0.2 };
    for s in 0..20 {
        let a = simulate_bates(&p, &j, &grid, 100.0, 0.05, s).unwrap();
        assert!(a.prices.iter().all(|&x| x > 0.0));
        assert!(a.true_vol.iter().all(|&v| v >= 0.0));
        assert_eq!(a, simulate_bates(&p, &j, &grid, 100.0, 0.05, s).unwrap());
    }
}
