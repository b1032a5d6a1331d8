//! Prior metaparameters and run controls.
//!
//! Defaults are the priors of the exemplary Bates estimation (price drift
//! through `η`, volatility regression through `β`, inverse-gamma `σ²`, the
//! `(ψ, ω)` correlation block and the jump-particle priors).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sde::HestonParams;

/// Optional cycle-0 parameter values. Missing entries fall back to the values
/// implied by the prior means.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialValues {
    pub mu: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorConfig {
    pub mu0_eta: f64,
    pub tau0_eta: f64,
    pub mu0_beta: [f64; 2],
    pub lambda0_beta: [[f64; 2]; 2],
    pub a0_sigma: f64,
    pub b0_sigma: f64,
    pub mu0_psi: f64,
    pub tau0_psi: f64,
    pub a0_omega: f64,
    pub b0_omega: f64,
    pub lambda_th: f64,
    pub mu0_j: f64,
    pub sigma0_j: f64,
    pub n_samples: usize,
    pub n_particles: usize,
    pub pf_fraction: f64,
    pub initial: InitialValues,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            mu0_eta: 1.00125,
            tau0_eta: 1.0 / (0.001 * 0.001),
            mu0_beta: [35e-6, 0.988],
            lambda0_beta: [[10.0, 0.0], [0.0, 5.0]],
            a0_sigma: 149.0,
            b0_sigma: 0.025,
            mu0_psi: -0.45,
            tau0_psi: 1.0 / (0.3 * 0.3),
            a0_omega: 1.03,
            b0_omega: 0.05,
            lambda_th: 0.15,
            mu0_j: -0.96,
            sigma0_j: 0.3,
            n_samples: 500,
            n_particles: 1000,
            pf_fraction: 1.0,
            initial: InitialValues::default(),
        }
    }
}

/// Mean of IG(a, b) when finite, otherwise its mode.
fn inverse_gamma_center(a: f64, b: f64) -> f64 {
    if a > 1.0 {
        b / (a - 1.0)
    } else {
        b / (a + 1.0)
    }
}

impl PriorConfig {
    /// Flat priors on every regression block (zero precisions), weak IG priors.
    pub fn flat() -> Self {
        Self {
            tau0_eta: 0.0,
            lambda0_beta: [[0.0; 2]; 2],
            tau0_psi: 0.0,
            a0_sigma: 1e-6,
            b0_sigma: 1e-12,
            a0_omega: 1e-6,
            b0_omega: 1e-12,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.tau0_eta >= 0.0) {
            return fail(format!("tau0_eta must be >= 0, got {}", self.tau0_eta));
        }
        let l = self.lambda0_beta;
        if l[0][1] != l[1][0] {
            return fail("lambda0_beta must be symmetric".into());
        }
        if l[0][0] < 0.0 || l[1][1] < 0.0 || l[0][0] * l[1][1] - l[0][1] * l[1][0] < 0.0 {
            return fail("lambda0_beta must be positive semidefinite".into());
        }
        for (name, v) in [
            ("a0_sigma", self.a0_sigma),
            ("b0_sigma", self.b0_sigma),
            ("a0_omega", self.a0_omega),
            ("b0_omega", self.b0_omega),
        ] {
            if !(v > 0.0) {
                return fail(format!("{name} must be > 0, got {v}"));
            }
        }
        if !(self.tau0_psi >= 0.0) {
            return fail(format!("tau0_psi must be >= 0, got {}", self.tau0_psi));
        }
        if !(0.0..1.0).contains(&self.lambda_th) {
            return fail(format!("lambda_th must be in [0,1), got {}", self.lambda_th));
        }
        if !(self.sigma0_j >= 0.0) {
            return fail(format!("sigma0_j must be >= 0, got {}", self.sigma0_j));
        }
        if self.n_samples < 1 {
            return fail("n_samples must be >= 1".into());
        }
        if self.n_particles < 3 {
            return fail(format!("n_particles must be >= 3, got {}", self.n_particles));
        }
        if !(self.pf_fraction > 0.0 && self.pf_fraction <= 1.0) {
            return fail(format!("pf_fraction must be in (0,1], got {}", self.pf_fraction));
        }
        Ok(())
    }

    /// Parameters implied by the prior means at step size `dt`.
    pub fn implied_params(&self, dt: f64) -> HestonParams {
        let mu = (self.mu0_eta - 1.0) / dt;
        let kappa = (1.0 - self.mu0_beta[1]) / dt;
        let theta = self.mu0_beta[0] / (kappa * dt);
        let sigma = inverse_gamma_center(self.a0_sigma, self.b0_sigma).sqrt();
        let omega = inverse_gamma_center(self.a0_omega, self.b0_omega);
        let rho = self.mu0_psi / (self.mu0_psi * self.mu0_psi + omega).sqrt();
        HestonParams { mu, kappa, theta, sigma, rho }
    }

    /// Cycle-0 parameters: configured initial values, else prior-implied ones.
    pub fn initial_params(&self, dt: f64) -> Result<HestonParams> {
        let implied = self.implied_params(dt);
        let i = self.initial;
        let p = HestonParams {
            mu: i.mu.unwrap_or(implied.mu),
            kappa: i.kappa.unwrap_or(implied.kappa),
            theta: i.theta.unwrap_or(implied.theta),
            sigma: i.sigma.unwrap_or(implied.sigma),
            rho: i.rho.unwrap_or(implied.rho),
        };
        p.validate().map_err(|e| Error::Config(format!("initial values: {e}")))?;
        Ok(p)
    }

    /// Priors centred on `truth` at step `dt`, keeping the default precisions.
    /// Used by the experiment runners.
    pub fn centered_on(truth: &HestonParams, dt: f64) -> Self {
        let d = Self::default();
        let sigma2 = truth.sigma * truth.sigma;
        let omega = sigma2 * (1.0 - truth.rho * truth.rho);
        Self {
            mu0_eta: truth.mu * dt + 1.0,
            mu0_beta: [truth.kappa * truth.theta * dt, 1.0 - truth.kappa * dt],
            // keep the IG shapes and match their means to the truth
            b0_sigma: sigma2 * (d.a0_sigma - 1.0),
            mu0_psi: truth.sigma * truth.rho,
            a0_omega: 3.0,
            b0_omega: omega * 2.0,
            ..d
        }
    }
}
