//! Simulation studies: prior shift, filter budget, vol-of-vol dispersion and
//! the exemplary Bates run. Each produces a long-format table.

use serde::Serialize;

use crate::calibrate::{calibrate, calibrate_with_truth, CalibrationOptions, CalibrationReport, TrueParams};
use crate::error::{Error, Result};
use crate::priors::PriorConfig;
use crate::sde::{simulate_bates, simulate_heston, HestonParams, JumpParams, TimeGrid};

pub const DEFAULT_S0: f64 = 100.0;

/// Filter and chain sizes shared by the studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudySettings {
    pub n_particles: usize,
    pub n_samples: usize,
    pub burn_in: usize,
    pub s0: f64,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self { n_particles: 1000, n_samples: 500, burn_in: 0, s0: DEFAULT_S0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorShiftRow {
    pub shift: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub theta_true: f64,
    pub theta_prior: f64,
    pub theta_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfBudgetRow {
    pub fraction: f64,
    pub seed: u64,
    pub cycle: usize,
    pub theta: f64,
    pub theta_true: f64,
    pub theta_prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionRow {
    pub sigma: f64,
    pub seed: u64,
    pub kappa_true: f64,
    pub kappa_mean: f64,
    pub kappa_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExemplaryRow {
    pub parameter: String,
    pub true_value: f64,
    pub estimate: f64,
    pub relative_error_pct: f64,
}

/// Priors centered on `truth` with `θ` scaled by `1 + shift`; initial values
/// follow the prior means.
pub fn shifted_priors(truth: &HestonParams, shift: f64, dt: f64, settings: &StudySettings) -> PriorConfig {
    let mut center = *truth;
    center.theta *= 1.0 + shift;
    PriorConfig {
        n_particles: settings.n_particles,
        n_samples: settings.n_samples,
        ..PriorConfig::centered_on(&center, dt)
    }
}

fn heston_path(truth: &HestonParams, grid: &TimeGrid, s0: f64, seed: u64) -> Result<Vec<f64>> {
    Ok(simulate_heston(truth, grid, s0, truth.theta, seed)?.prices)
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::Parameter("at least one seed is required".into()));
    }
    Ok(())
}

pub fn experiment_prior_shift(
    truth: &HestonParams,
    grid: &TimeGrid,
    shifts: &[f64],
    cycle_counts: &[usize],
    seeds: &[u64],
    settings: &StudySettings,
) -> Result<Vec<PriorShiftRow>> {
    truth.validate()?;
    check_seeds(seeds)?;
    let mut rows = Vec::with_capacity(shifts.len() * cycle_counts.len() * seeds.len());
    for &shift in shifts {
        for &n_samples in cycle_counts {
            for &seed in seeds {
                let prices = heston_path(truth, grid, settings.s0, seed)?;
                let s = StudySettings { n_samples, ..*settings };
                let priors = shifted_priors(truth, shift, grid.dt, &s);
                let opts = CalibrationOptions { with_jumps: false, seed, burn_in: settings.burn_in.min(n_samples - 1) };
                let report = calibrate(&prices, grid.dt, &priors, &opts)?;
                rows.push(PriorShiftRow {
                    shift,
                    n_samples,
                    seed,
                    theta_true: truth.theta,
                    theta_prior: truth.theta * (1.0 + shift),
                    theta_hat: report.point_estimates.theta,
                });
            }
        }
    }
    Ok(rows)
}

/// Runs with the filter rerun only in the first `fraction` of cycles; one row
/// per `(fraction, seed, cycle)`.
pub fn experiment_pf_budget(
    truth: &HestonParams,
    grid: &TimeGrid,
    fractions: &[f64],
    seeds: &[u64],
    shift: f64,
    settings: &StudySettings,
) -> Result<Vec<PfBudgetRow>> {
    truth.validate()?;
    check_seeds(seeds)?;
    let mut rows = Vec::with_capacity(fractions.len() * seeds.len() * settings.n_samples);
    for &fraction in fractions {
        for &seed in seeds {
            let prices = heston_path(truth, grid, settings.s0, seed)?;
            let priors = PriorConfig { pf_fraction: fraction, ..shifted_priors(truth, shift, grid.dt, settings) };
            let opts = CalibrationOptions { with_jumps: false, seed, burn_in: 0 };
            let report = calibrate(&prices, grid.dt, &priors, &opts)?;
            rows.extend(report.chain.iter().map(|r| PfBudgetRow {
                fraction,
                seed,
                cycle: r.cycle,
                theta: r.theta,
                theta_true: truth.theta,
                theta_prior: truth.theta * (1.0 + shift),
            }));
        }
    }
    Ok(rows)
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Paths differing only in `σ` (same seed per pair); records the spread of the
/// post-burn-in `κ` chain.
pub fn experiment_sigma_dispersion(
    truth_base: &HestonParams,
    sigmas: &[f64],
    grid: &TimeGrid,
    seeds: &[u64],
    settings: &StudySettings,
) -> Result<Vec<DispersionRow>> {
    check_seeds(seeds)?;
    let mut rows = Vec::with_capacity(sigmas.len() * seeds.len());
    for &sigma in sigmas {
        let truth = HestonParams { sigma, ..*truth_base };
        truth.validate()?;
        for &seed in seeds {
            let prices = heston_path(&truth, grid, settings.s0, seed)?;
            let priors = shifted_priors(&truth, 0.0, grid.dt, settings);
            let opts = CalibrationOptions { with_jumps: false, seed, burn_in: settings.burn_in };
            let report = calibrate(&prices, grid.dt, &priors, &opts)?;
            let kappas: Vec<f64> = report.chain[settings.burn_in..].iter().map(|r| r.kappa).collect();
            rows.push(DispersionRow {
                sigma,
                seed,
                kappa_true: truth.kappa,
                kappa_mean: report.point_estimates.kappa,
                kappa_sd: sample_sd(&kappas),
            });
        }
    }
    Ok(rows)
}

/// Bates path from `truth` calibrated with `priors`; returns the report and a
/// table of truth, estimate and percent error per parameter.
pub fn experiment_exemplary(
    truth: &HestonParams,
    jumps: &JumpParams,
    grid: &TimeGrid,
    priors: &PriorConfig,
    seed: u64,
    burn_in: usize,
) -> Result<(CalibrationReport, Vec<ExemplaryRow>)> {
    let path = simulate_bates(truth, jumps, grid, DEFAULT_S0, truth.theta, seed)?;
    let t = TrueParams { heston: *truth, jumps: Some(*jumps) };
    let opts = CalibrationOptions { with_jumps: true, seed, burn_in };
    let report = calibrate_with_truth(&path.prices, grid.dt, priors, &opts, Some(&t))?;
    let errors = report.relative_errors.as_ref().expect("truth supplied");
    let rows = report
        .point_estimates
        .entries()
        .into_iter()
        .filter_map(|(name, est)| {
            Some(ExemplaryRow {
                parameter: name.to_string(),
                true_value: t.get(name)?,
                estimate: est,
                relative_error_pct: errors[name],
            })
        })
        .collect();
    Ok((report, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> HestonParams {
        HestonParams { mu: 0.1, kappa: 1.0, theta: 0.05, sigma: 0.01, rho: -0.5 }
    }

    fn tiny() -> StudySettings {
        StudySettings { n_particles: 20, n_samples: 3, burn_in: 0, s0: 100.0 }
    }

    #[test]
    fn prior_shift_row_count() {
        let grid = TimeGrid::new(1.0 / 252.0, 60).unwrap();
        let rows = experiment_prior_shift(&truth(), &grid, &[0.0, 1.0], &[2, 3], &[0, 1, 2], &tiny()).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        assert!(rows.iter().all(|r| r.theta_hat > 0.0));
        assert_eq!(rows[6].theta_prior, 0.1);
    }

    #[test]
    fn pf_budget_rows() {
        let grid = TimeGrid::new(1.0 / 252.0, 60).unwrap();
        let rows = experiment_pf_budget(&truth(), &grid, &[1.0, 0.05], &[4, 5], 1.0, &tiny()).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        assert_eq!(rows.iter().map(|r| r.cycle).collect::<Vec<_>>()[..3], [1, 2, 3]);
    }

    #[test]
    fn dispersion_rows() {
        let grid = TimeGrid::new(1.0 / 252.0, 60).unwrap();
        let rows = experiment_sigma_dispersion(&truth(), &[0.01], &grid, &[0], &tiny()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].kappa_true, 1.0);
        assert!(rows[0].kappa_sd >= 0.0);
    }

    #[test]
    fn sd_basics() {
        assert_eq!(sample_sd(&[1.0]), 0.0);
        assert!((sample_sd(&[1.0, 3.0]) - 2f64.sqrt()).abs() < 1e-15);
    }
}
