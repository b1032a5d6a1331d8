//! Alternating particle filtering and conjugate posterior draws.
//!
//! Cycle 0 filters with the initial parameter values and draws a first set of
//! parameters that is not recorded. Cycles `1..=n_s` each produce one chain
//! record. The filter is rerun in the first `⌈pf_fraction·n_s⌉` recorded
//! cycles; later cycles reuse the last filter output.

use std::collections::BTreeMap;

use log::{info, warn};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{
    beta_to_kappa_theta, build_beta_design, build_eta_design, compute_residuals, eta_to_mu,
    posterior_beta, posterior_psi_omega, posterior_scalar_normal, sample_beta, sample_eta,
    sample_rho, sample_sigma2,
};
use crate::error::{Error, Result};
use crate::filter::{aggregate_jump_params, neutralize_returns, run_filter, FilterOutput};
use crate::priors::PriorConfig;
use crate::rng::{Phase, StreamKey, Streams};
use crate::sde::{HestonParams, JumpParams};

const MAX_BETA_REDRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub cycle: usize,
    pub mu: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub jumps: Option<JumpParams>,
    pub filter_rerun: bool,
    /// Some draw in this cycle failed and previous values were kept.
    pub degenerate: bool,
}

impl ChainRecord {
    pub fn params(&self) -> HestonParams {
        HestonParams { mu: self.mu, kappa: self.kappa, theta: self.theta, sigma: self.sigma, rho: self.rho }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimates {
    pub mu: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_j: Option<f64>,
}

impl PointEstimates {
    /// `(name, value)` pairs in reporting order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("mu", self.mu),
            ("kappa", self.kappa),
            ("theta", self.theta),
            ("sigma", self.sigma),
            ("rho", self.rho),
        ];
        if let (Some(l), Some(m), Some(s)) = (self.lambda, self.mu_j, self.sigma_j) {
            v.extend([("lambda", l), ("mu_j", m), ("sigma_j", s)]);
        }
        v
    }
}

/// Ground truth for relative-error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueParams {
    pub heston: HestonParams,
    pub jumps: Option<JumpParams>,
}

impl TrueParams {
    pub fn get(&self, name: &str) -> Option<f64> {
        let h = &self.heston;
        match name {
            "mu" => Some(h.mu),
            "kappa" => Some(h.kappa),
            "theta" => Some(h.theta),
            "sigma" => Some(h.sigma),
            "rho" => Some(h.rho),
            "lambda" => self.jumps.map(|j| j.lambda),
            "mu_j" => self.jumps.map(|j| j.mu_j),
            "sigma_j" => self.jumps.map(|j| j.sigma_j),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub point_estimates: PointEstimates,
    /// Percent relative errors keyed by parameter name.
    pub relative_errors: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub point_estimates: PointEstimates,
    pub chain: Vec<ChainRecord>,
    pub filter: FilterOutput,
    pub config_echo: PriorConfig,
    pub relative_errors: Option<BTreeMap<String, f64>>,
    pub burn_in: usize,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CalibrationOptions {
    pub with_jumps: bool,
    pub seed: u64,
    pub burn_in: usize,
}


pub fn relative_error_pct(estimate: f64, truth: f64) -> f64 {
    (estimate - truth).abs() / truth.abs() * 100.0
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

pub fn summarize(chain: &[ChainRecord], burn_in: usize, truth: Option<&TrueParams>) -> Result<Summary> {
    if chain.is_empty() {
        return Err(Error::Parameter("empty chain".into()));
    }
    if burn_in >= chain.len() {
        return Err(Error::Parameter(format!(
            "burn-in {burn_in} leaves nothing of a chain of length {}",
            chain.len()
        )));
    }
    let kept = &chain[burn_in..];
    let m = |f: fn(&ChainRecord) -> f64| mean(kept.iter().map(f));
    let jm = |f: fn(&JumpParams) -> f64| -> Option<f64> {
        kept.iter()
            .map(|r| r.jumps.as_ref().map(f))
            .collect::<Option<Vec<f64>>>()
            .map(|v| mean(v.into_iter()))
    };
    let point_estimates = PointEstimates {
        mu: m(|r| r.mu),
        kappa: m(|r| r.kappa),
        theta: m(|r| r.theta),
        sigma: m(|r| r.sigma),
        rho: m(|r| r.rho),
        lambda: jm(|j| j.lambda),
        mu_j: jm(|j| j.mu_j),
        sigma_j: jm(|j| j.sigma_j),
    };
    let relative_errors = truth.map(|t| {
        point_estimates
            .entries()
            .into_iter()
            .filter_map(|(name, est)| t.get(name).map(|tv| (name.to_string(), relative_error_pct(est, tv))))
            .collect()
    });
    Ok(Summary { point_estimates, relative_errors })
}

/// `R(k) = S(k)/S(k−1)` for `k = 1..=n`.
pub fn price_ratios(prices: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = prices.iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::Parameter(format!("price at index {i} is {} (must be > 0)", prices[i])));
    }
    Ok(prices.windows(2).map(|w| w[1] / w[0]).collect())
}

/// Number of recorded cycles (after cycle 0) that rerun the filter.
pub fn filter_cycles(n_samples: usize, pf_fraction: f64) -> usize {
    ((pf_fraction * n_samples as f64) - 1e-9).ceil().max(0.0) as usize
}

struct Draw {
    params: HestonParams,
    sigma2: f64,
    degenerate: bool,
}

fn posterior_draw(
    returns: &[f64],
    vol: &[f64],
    dt: f64,
    priors: &PriorConfig,
    prev: &HestonParams,
    sigma2_prev: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Draw> {
    let mut degenerate = false;

    let (y_s, x_s) = build_eta_design(returns, vol, dt)?;
    let eta_post = posterior_scalar_normal(&y_s, &x_s, priors.mu0_eta, priors.tau0_eta)?;
    let mu = eta_to_mu(sample_eta(&eta_post, rng), dt);

    let (y_v, x_v) = build_beta_design(vol, dt)?;
    let beta_post = posterior_beta(&y_v, &x_v, &priors.mu0_beta, &priors.lambda0_beta)?;
    let mut kt = None;
    for _ in 0..MAX_BETA_REDRAWS {
        let beta = sample_beta(&beta_post, sigma2_prev, rng)?;
        if let Some(pair) = beta_to_kappa_theta(&beta, dt) {
            kt = Some(pair);
            break;
        }
    }
    let (kappa, theta) = kt.unwrap_or_else(|| {
        warn!("no admissible (kappa, theta) after {MAX_BETA_REDRAWS} draws; keeping previous");
        degenerate = true;
        (prev.kappa, prev.theta)
    });

    let sigma2 = sample_sigma2(
        &y_v,
        &priors.mu0_beta,
        &priors.lambda0_beta,
        &beta_post,
        priors.a0_sigma,
        priors.b0_sigma,
        y_v.len(),
        rng,
    )?;

    let (e1, e2) = compute_residuals(returns, vol, mu, kappa, theta, dt)?;
    let po = posterior_psi_omega(&e1, &e2, priors.mu0_psi, priors.tau0_psi, priors.a0_omega, priors.b0_omega)?;
    let rho = sample_rho(&po, rng)?.rho;

    Ok(Draw { params: HestonParams { mu, kappa, theta, sigma: sigma2.sqrt(), rho }, sigma2, degenerate })
}

/// `(μ, κ, θ)` at the posterior means of `η` and `β` given a known volatility
/// path.
pub fn posterior_means(returns: &[f64], vol: &[f64], dt: f64, priors: &PriorConfig) -> Result<(f64, f64, f64)> {
    let (y_s, x_s) = build_eta_design(returns, vol, dt)?;
    let eta = posterior_scalar_normal(&y_s, &x_s, priors.mu0_eta, priors.tau0_eta)?;
    let (y_v, x_v) = build_beta_design(vol, dt)?;
    let beta = posterior_beta(&y_v, &x_v, &priors.mu0_beta, &priors.lambda0_beta)?;
    let (kappa, theta) = beta_to_kappa_theta(&beta.mean, dt)
        .ok_or_else(|| Error::Numeric(format!("posterior mean of beta {:?} has no valid (kappa, theta)", beta.mean)))?;
    Ok((eta_to_mu(eta.mean, dt), kappa, theta))
}

pub fn calibrate(
    prices: &[f64],
    dt: f64,
    priors: &PriorConfig,
    opts: &CalibrationOptions,
) -> Result<CalibrationReport> {
    calibrate_with_truth(prices, dt, priors, opts, None)
}

pub fn calibrate_with_truth(
    prices: &[f64],
    dt: f64,
    priors: &PriorConfig,
    opts: &CalibrationOptions,
    truth: Option<&TrueParams>,
) -> Result<CalibrationReport> {
    priors.validate()?;
    if prices.len() < 3 {
        return Err(Error::Parameter(format!("need at least 3 prices, got {}", prices.len())));
    }
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be > 0, got {dt}")));
    }
    if opts.burn_in >= priors.n_samples {
        return Err(Error::Parameter(format!(
            "burn-in {} must be below n_samples {}",
            opts.burn_in, priors.n_samples
        )));
    }
    let raw_returns = price_ratios(prices)?;
    let n = raw_returns.len();
    let maturity = n as f64 * dt;
    let streams = Streams::new(opts.seed);

    let mut params = priors.initial_params(dt)?;
    let mut sigma2 = params.sigma * params.sigma;
    let mut jumps: Option<JumpParams> = None;
    let pf_cycles = filter_cycles(priors.n_samples, priors.pf_fraction);
    let mut filter: Option<FilterOutput> = None;
    let mut regression_returns = raw_returns.clone();
    let mut chain = Vec::with_capacity(priors.n_samples);

    for cycle in 0..=priors.n_samples {
        let mut degenerate = false;
        let rerun = cycle == 0 || cycle <= pf_cycles;
        if rerun {
            match run_filter(&raw_returns, &params, priors, dt, opts.with_jumps, &streams, cycle as u64) {
                Ok(out) => {
                    if out.degenerate_steps > 0 {
                        degenerate = true;
                    }
                    if opts.with_jumps {
                        regression_returns = neutralize_returns(&raw_returns, &out.jump_prob, &out.jump_size)?;
                        let est = aggregate_jump_params(
                            &out.jump_prob,
                            &out.jump_size,
                            maturity,
                            priors.mu0_j,
                            priors.sigma0_j,
                        );
                        jumps = Some(JumpParams { lambda: est.lambda, mu_j: est.mu_j, sigma_j: est.sigma_j });
                    }
                    filter = Some(out);
                }
                Err(e) if filter.is_some() => {
                    warn!("cycle {cycle}: filter failed ({e}); reusing previous volatility path");
                    degenerate = true;
                }
                Err(e) => return Err(e),
            }
        }
        let vol = &filter.as_ref().expect("filter ran in cycle 0").vol_estimate;

        let mut rng = streams.rng(StreamKey::new(cycle as u64, Phase::PosteriorDraw, 0));
        match posterior_draw(&regression_returns, vol, dt, priors, &params, sigma2, &mut rng) {
            Ok(d) => {
                degenerate |= d.degenerate;
                params = d.params;
                sigma2 = d.sigma2;
            }
            Err(e) => {
                warn!("cycle {cycle}: posterior draw failed ({e}); keeping previous values");
                degenerate = true;
            }
        }

        if cycle > 0 {
            chain.push(ChainRecord {
                cycle,
                mu: params.mu,
                kappa: params.kappa,
                theta: params.theta,
                sigma: params.sigma,
                rho: params.rho,
                jumps,
                filter_rerun: rerun,
                degenerate,
            });
        }
        if cycle % 50 == 0 {
            info!(
                "cycle {cycle}: mu={:.4} kappa={:.4} theta={:.5} sigma={:.5} rho={:.3}",
                params.mu, params.kappa, params.theta, params.sigma, params.rho
            );
        }
    }

    let summary = summarize(&chain, opts.burn_in, truth)?;
    Ok(CalibrationReport {
        point_estimates: summary.point_estimates,
        chain,
        filter: filter.expect("filter ran in cycle 0"),
        config_echo: priors.clone(),
        relative_errors: summary.relative_errors,
        burn_in: opts.burn_in,
        dt,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(cycle: usize, theta: f64) -> ChainRecord {
        ChainRecord {
            cycle,
            mu: 0.1,
            kappa: 1.0,
            theta,
            sigma: 0.01,
            rho: -0.5,
            jumps: None,
            filter_rerun: true,
            degenerate: false,
        }
    }

    #[test]
    fn summarize_constant_chain() {
        let chain: Vec<_> = (1..=10).map(|i| record(i, 0.05)).collect();
        let s = summarize(&chain, 0, None).unwrap();
        assert!((s.point_estimates.theta - 0.05).abs() < 1e-15);
        assert!(s.point_estimates.lambda.is_none());
        assert!(summarize(&chain, 10, None).is_err());
        assert!(summarize(&[], 0, None).is_err());
    }

    #[test]
    fn summarize_burn_in_and_errors() {
        let chain: Vec<_> = (1..=4).map(|i| record(i, i as f64)).collect();
        let s = summarize(&chain, 2, None).unwrap();
        assert_eq!(s.point_estimates.theta, 3.5);
        let truth = TrueParams {
            heston: HestonParams { mu: 0.1, kappa: 1.0, theta: 0.05, sigma: 0.01, rho: -0.5 },
            jumps: None,
        };
        let chain = vec![record(1, 0.04904)];
        let s = summarize(&chain, 0, Some(&truth)).unwrap();
        let errs = s.relative_errors.unwrap();
        assert_eq!(format!("{:.2}", errs["theta"]), "1.92");
        assert_eq!(errs["kappa"], 0.0);
    }

    #[test]
    fn schedule() {
        assert_eq!(filter_cycles(100, 1.0), 100);
        assert_eq!(filter_cycles(100, 0.05), 5);
        assert_eq!(filter_cycles(10, 0.05), 1);
        assert_eq!(filter_cycles(500, 0.05), 25);
    }
}
