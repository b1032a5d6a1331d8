//! Euler–Maruyama simulation of Heston and Bates paths.
//!
//! Variance uses full truncation: `v⁺ = max(v, 0)` feeds both drift and
//! diffusion and the updated value is clamped at zero. Jumps are Bernoulli
//! thinned at grid resolution, at most one per step.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{standard_normal, Phase, StreamKey, Streams};

const MAX_PRICE_REJECTIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
    pub maturity: f64,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        Self::with_maturity(dt, n_steps, dt * n_steps as f64)
    }

    /// Grid covering `[0, maturity]` with the step count rounded to the nearest integer.
    pub fn from_maturity(maturity: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && maturity > 0.0) {
            return Err(Error::Parameter(format!("dt={dt}, maturity={maturity}")));
        }
        let n = (maturity / dt).round() as usize;
        Self::with_maturity(dt, n, n as f64 * dt)
    }

    pub fn with_maturity(dt: f64, n_steps: usize, maturity: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
        }
        if n_steps < 2 {
            return Err(Error::Parameter(format!("need at least 2 steps, got {n_steps}")));
        }
        if (n_steps as f64 * dt - maturity).abs() > 1e-9 * maturity.abs() {
            return Err(Error::Parameter(format!(
                "n_steps*dt = {} does not match maturity {maturity}",
                n_steps as f64 * dt
            )));
        }
        Ok(Self { dt, n_steps, maturity })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    pub mu: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
}

impl HestonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::Parameter(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.theta > 0.0) {
            return Err(Error::Parameter(format!("theta must be > 0, got {}", self.theta)));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Parameter(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Parameter(format!("rho must be in [-1,1], got {}", self.rho)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpParams {
    pub lambda: f64,
    pub mu_j: f64,
    pub sigma_j: f64,
}

impl JumpParams {
    pub fn none() -> Self {
        Self { lambda: 0.0, mu_j: 0.0, sigma_j: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !(self.sigma_j >= 0.0) {
            return Err(Error::Parameter(format!(
                "jump params need lambda>=0, sigma_j>=0 (got {}, {})",
                self.lambda, self.sigma_j
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub grid: TimeGrid,
    pub prices: Vec<f64>,
    pub true_vol: Vec<f64>,
    /// Step index → log jump size `Z`; the keys are the jump times.
    pub jumps: BTreeMap<usize, f64>,
}

impl SimulatedPath {
    pub fn jump_times(&self) -> impl Iterator<Item = usize> + '_ {
        self.jumps.keys().copied()
    }

    /// Price ratios `S(k)/S(k-1)` for `k = 1..=n`.
    pub fn returns(&self) -> Vec<f64> {
        self.prices.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Multiplies the price at `step` and everything after it by `e^z`, recording
    /// a jump there. Used to plant a jump of known size in a diffusion path.
    pub fn inject_jump(&mut self, step: usize, z: f64) -> Result<()> {
        if step == 0 || step >= self.prices.len() {
            return Err(Error::Parameter(format!("jump step {step} outside 1..={}", self.prices.len() - 1)));
        }
        let factor = z.exp();
        for p in &mut self.prices[step..] {
            *p *= factor;
        }
        *self.jumps.entry(step).or_insert(0.0) += z;
        Ok(())
    }
}

/// `ρ·ε_s + √(1−ρ²)·ε_add`, elementwise.
pub fn correlate_noise(eps_s: &[f64], eps_add: &[f64], rho: f64) -> Result<Vec<f64>> {
    if eps_s.len() != eps_add.len() {
        return Err(Error::Parameter(format!(
            "noise lengths differ: {} vs {}",
            eps_s.len(),
            eps_add.len()
        )));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Parameter(format!("rho must be in [-1,1], got {rho}")));
    }
    let c = (1.0 - rho * rho).sqrt();
    Ok(eps_s.iter().zip(eps_add).map(|(s, a)| rho * s + c * a).collect())
}

pub fn step_volatility(v_prev: f64, params: &HestonParams, dt: f64, eps_v: f64) -> f64 {
    let v = v_prev.max(0.0);
    let next = v + params.kappa * (params.theta - v) * dt + params.sigma * (v * dt).sqrt() * eps_v;
    next.max(0.0)
}

/// One price step. `None` when the bracket `1 + μΔt + √(v⁺Δt)ε` is not positive.
pub fn step_price(s_prev: f64, v_prev: f64, params: &HestonParams, dt: f64, eps_s: f64) -> Option<f64> {
    let v = v_prev.max(0.0);
    let ratio = 1.0 + params.mu * dt + (v * dt).sqrt() * eps_s;
    (ratio > 0.0).then_some(s_prev * ratio)
}

pub fn simulate_heston(
    params: &HestonParams,
    grid: &TimeGrid,
    s0: f64,
    v0: f64,
    seed: u64,
) -> Result<SimulatedPath> {
    simulate_bates(params, &JumpParams::none(), grid, s0, v0, seed)
}

pub fn simulate_bates(
    params: &HestonParams,
    jumps: &JumpParams,
    grid: &TimeGrid,
    s0: f64,
    v0: f64,
    seed: u64,
) -> Result<SimulatedPath> {
    // v0 = 0 is admitted so that fully degenerate paths can be generated.
    if !(s0 > 0.0 && v0 >= 0.0) {
        return Err(Error::Parameter(format!("need s0>0 and v0>=0, got s0={s0}, v0={v0}")));
    }
    if !(-1.0..=1.0).contains(&params.rho) || params.sigma < 0.0 {
        return Err(Error::Parameter("rho must lie in [-1,1] and sigma >= 0".into()));
    }
    jumps.validate()?;
    let dt = grid.dt;
    let p_jump = jumps.lambda * dt;
    if p_jump >= 1.0 {
        return Err(Error::Parameter(format!(
            "lambda*dt = {p_jump} >= 1: grid too coarse for jump intensity"
        )));
    }

    let streams = Streams::new(seed);
    let key = |unit| StreamKey::new(0, Phase::Simulate, unit);
    let mut eps_s_rng = streams.rng(key(0));
    let mut eps_add_rng = streams.rng(key(1));
    let mut jump_flag_rng = streams.rng(key(2));
    let mut jump_size_rng = streams.rng(key(3));
    let mut redraw_rng = streams.rng(key(4));
    let c = (1.0 - params.rho * params.rho).sqrt();

    let n = grid.n_steps;
    let mut prices = Vec::with_capacity(n + 1);
    let mut vols = Vec::with_capacity(n + 1);
    let mut jump_map = BTreeMap::new();
    prices.push(s0);
    vols.push(v0);

    for k in 1..=n {
        let (s_prev, v_prev) = (prices[k - 1], vols[k - 1]);
        let mut eps_s = standard_normal(&mut eps_s_rng);
        let eps_add = standard_normal(&mut eps_add_rng);
        let mut s_next = step_price(s_prev, v_prev, params, dt, eps_s);
        let mut tries = 0;
        while s_next.is_none() {
            tries += 1;
            if tries > MAX_PRICE_REJECTIONS {
                return Err(Error::Simulation(format!(
                    "price step {k} non-positive after {MAX_PRICE_REJECTIONS} redraws"
                )));
            }
            eps_s = standard_normal(&mut redraw_rng);
            s_next = step_price(s_prev, v_prev, params, dt, eps_s);
        }
        let mut s_next = s_next.expect("accepted step");
        let eps_v = params.rho * eps_s + c * eps_add;
        vols.push(step_volatility(v_prev, params, dt, eps_v));

        let u: f64 = jump_flag_rng.gen();
        let z = jumps.mu_j + jumps.sigma_j * standard_normal(&mut jump_size_rng);
        if p_jump > 0.0 && u < p_jump {
            s_next *= z.exp();
            jump_map.insert(k, z);
        }
        prices.push(s_next);
    }

    Ok(SimulatedPath { grid: *grid, prices, true_vol: vols, jumps: jump_map })
}
