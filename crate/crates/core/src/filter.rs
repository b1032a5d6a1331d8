//! SIR particle filter for the latent variance, with optional jump particles.
//!
//! Resampling does not pick raw particles. Candidates are sorted and joined
//! into a continuous piecewise-linear CDF whose knots sit at the candidate
//! values, and new particles are drawn from it by inverse transform, so the
//! refined cloud takes values between the raw ones.
//!
//! Both filter variants weight the candidate for time `m` against the return
//! `R(m+1)`, which is the first observation that depends on `v(m)`. The plain
//! variant filters `m = 1..n−1`; the jump variant filters `m = 0..n−1` so that
//! every return `R(1..n)` gets a jump probability. In both, `v(n)` copies
//! `v(n−1)`.


use log::debug;
use rand::Rng;

use crate::error::{Error, Result};
use crate::priors::PriorConfig;
use crate::rng::{standard_normal, Phase, StreamKey, Streams};
use crate::sde::HestonParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub jump_flags: Option<Vec<u8>>,
    pub jump_sizes: Option<Vec<f64>>,
}

impl ParticleCloud {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_jumps(mut self, flags: Vec<u8>, sizes: Vec<f64>) -> Self {
        self.jump_flags = Some(flags);
        self.jump_sizes = Some(sizes);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    /// `v(kΔt)` for `k = 0..=n`.
    pub vol_estimate: Vec<f64>,
    /// `λ(kΔt)` for `k = 1..=n`; zeros without jump particles.
    pub jump_prob: Vec<f64>,
    /// `Z(kΔt)` for `k = 1..=n`; zeros without jump particles.
    pub jump_size: Vec<f64>,
    /// Steps where every weight vanished and uniform weights were used.
    pub degenerate_steps: usize,
}

pub fn init_particles(theta: f64, n_particles: usize) -> Result<ParticleCloud> {
    if !(theta > 0.0) {
        return Err(Error::Parameter(format!("initial particle value must be > 0, got {theta}")));
    }
    if n_particles < 2 {
        return Err(Error::Parameter(format!("need at least 2 particles, got {n_particles}")));
    }
    Ok(ParticleCloud {
        values: vec![theta; n_particles],
        weights: vec![1.0 / n_particles as f64; n_particles],
        jump_flags: None,
        jump_sizes: None,
    })
}

/// Propagates `V(k−1)` to candidates `Ṽ(k)` using the price residual of `R(k)`
/// for the correlated part of the variance shock. `eps` holds one standard
/// normal per particle.
pub fn propagate_with(
    values: &[f64],
    return_k: f64,
    params: &HestonParams,
    dt: f64,
    eps: &[f64],
    out: &mut Vec<f64>,
) -> Result<()> {
    let sdt = dt.sqrt();
    let resid = return_k - params.mu * dt - 1.0;
    let rho_c = (1.0 - params.rho * params.rho).max(0.0).sqrt();
    let drift_scale = params.kappa * dt;
    out.clear();
    out.reserve(values.len());
    for (&v, &e) in values.iter().zip(eps) {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("particle value {v} must be > 0")));
        }
        let sv = v.sqrt();
        let z = resid / (sdt * sv);
        let w = z * params.rho + e * rho_c;
        let next = v + drift_scale * (params.theta - v) + params.sigma * sdt * sv * w;
        out.push(next.max(0.0));
    }
    Ok(())
}

pub fn propagate<R: Rng + ?Sized>(
    cloud: &ParticleCloud,
    return_k: f64,
    params: &HestonParams,
    dt: f64,
    rng: &mut R,
) -> Result<ParticleCloud> {
    let eps: Vec<f64> = (0..cloud.len()).map(|_| standard_normal(rng)).collect();
    let mut values = Vec::new();
    propagate_with(&cloud.values, return_k, params, dt, &eps, &mut values)?;
    Ok(ParticleCloud { values, ..cloud.clone() })
}

/// Lower bound for refined particles so downstream regressions stay finite.
pub const MIN_VARIANCE: f64 = 1e-10;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log of the normal density of `r` with mean `1 + μΔt` and variance `ṼΔt`;
/// `−∞` for non-positive `Ṽ`.
#[inline]
fn log_pdf_nojump(v: f64, resid: f64, dt: f64) -> f64 {
    if v <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let var = v * dt;
    -0.5 * (LN_2PI + var.ln()) - 0.5 * resid * resid / var
}

#[inline]
fn log_pdf_jump(v: f64, r: f64, drift: f64, z: f64, dt: f64) -> f64 {
    if v <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let scale = z.exp();
    let var = scale * scale * v * dt;
    let d = r - scale * drift;
    -z - 0.5 * (LN_2PI + v.ln() + dt.ln()) - 0.5 * d * d / var
}

pub fn log_weight_nojump(values: &[f64], r: f64, mu: f64, dt: f64) -> Vec<f64> {
    let resid = r - mu * dt - 1.0;
    values.iter().map(|&v| log_pdf_nojump(v, resid, dt)).collect()
}

/// Raw likelihood weights `W̃_j` for the diffusion-only model, evaluated at `r`.
pub fn weight_nojump(cloud: &ParticleCloud, r: f64, mu: f64, dt: f64) -> Vec<f64> {
    log_weight_nojump(&cloud.values, r, mu, dt).into_iter().map(f64::exp).collect()
}

pub fn log_weight_jump(values: &[f64], flags: &[u8], sizes: &[f64], r: f64, mu: f64, dt: f64) -> Vec<f64> {
    let drift = mu * dt + 1.0;
    let resid = r - drift;
    values
        .iter()
        .zip(flags)
        .zip(sizes)
        .map(|((&v, &f), &z)| {
            if f == 0 {
                log_pdf_nojump(v, resid, dt)
            } else {
                log_pdf_jump(v, r, drift, z, dt)
            }
        })
        .collect()
}

/// Raw likelihood weights with the jump branch for flagged particles.
pub fn weight_jump(cloud: &ParticleCloud, r: f64, mu: f64, dt: f64) -> Result<Vec<f64>> {
    let (flags, sizes) = match (&cloud.jump_flags, &cloud.jump_sizes) {
        (Some(f), Some(s)) => (f, s),
        _ => return Err(Error::Parameter("cloud has no jump particles".into())),
    };
    Ok(log_weight_jump(&cloud.values, flags, sizes, r, mu, dt)
        .into_iter()
        .map(f64::exp)
        .collect())
}

pub fn normalize(raw: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() || raw.iter().any(|&w| w < 0.0) {
        return Err(Error::DegenerateWeights);
    }
    Ok(raw.iter().map(|w| w / total).collect())
}

/// Normalizes log weights in place into probabilities (max-subtracted).
pub fn normalize_log(log_w: &mut [f64]) -> Result<()> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    let mut total = 0.0;
    for w in log_w.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    for w in log_w.iter_mut() {
        *w /= total;
    }
    Ok(())
}

/// The connected CDF over sorted particle values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearCdf {
    knots: Vec<f64>,
    /// `F` at each knot: `0`, then `Σ_{m<j} W_m + ½W_j`, then `1`.
    levels: Vec<f64>,
}

impl PiecewiseLinearCdf {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn eval(&self, v: f64) -> f64 {
        let n = self.knots.len();
        if v <= self.knots[0] {
            return 0.0;
        }
        if v > self.knots[n - 1] {
            return 1.0;
        }
        // first knot strictly >= v; segment (knots[j-1], knots[j]]
        let j = self.knots.partition_point(|&k| k < v);
        let (a, b) = (self.knots[j - 1], self.knots[j]);
        let (fa, fb) = (self.levels[j - 1], self.levels[j]);
        fa + (v - a) / (b - a) * (fb - fa)
    }

    /// Inverse transform: the `v` with `F(v) = u`. Zero-length segments return
    /// their shared value.
    pub fn sample(&self, u: f64) -> f64 {
        let n = self.knots.len();
        // last knot whose level is <= u
        let j = self.levels.partition_point(|&l| l <= u).clamp(1, n - 1) - 1;
        let (fa, fb) = (self.levels[j], self.levels[j + 1]);
        let (a, b) = (self.knots[j], self.knots[j + 1]);
        if fb <= fa || b == a {
            return a;
        }
        let t = ((u - fa) / (fb - fa)).clamp(0.0, 1.0);
        a + t * (b - a)
    }

    /// Mean of the distribution, integrated segment by segment.
    pub fn mean(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.levels.windows(2))
            .map(|(k, l)| (l[1] - l[0]) * 0.5 * (k[0] + k[1]))
            .sum()
    }
}

/// Sorts `(value, weight)` pairs ascending (ties by original position) and
/// builds the connected CDF. Weights must already be normalized.
pub fn build_cdf(values: &[f64], weights: &[f64]) -> Result<PiecewiseLinearCdf> {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.iter().copied()).collect();
    build_cdf_from_pairs(&mut pairs)
}

fn build_cdf_from_pairs(pairs: &mut [(f64, f64)]) -> Result<PiecewiseLinearCdf> {
    let n = pairs.len();
    if n < 3 {
        return Err(Error::UnsupportedSize(n));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let knots: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut levels = Vec::with_capacity(n);
    levels.push(0.0);
    let mut below = pairs[0].1;
    for p in &pairs[1..n - 1] {
        levels.push((below + 0.5 * p.1).min(1.0));
        below += p.1;
    }
    levels.push(1.0);
    Ok(PiecewiseLinearCdf { knots, levels })
}

pub fn sample_cdf(cdf: &PiecewiseLinearCdf, u: f64) -> f64 {
    cdf.sample(u)
}

/// `N` independent inverse-CDF draws for values (and jump sizes, through their
/// own CDF). Weights come back uniform.
pub fn resample<R: Rng + ?Sized>(cloud: &ParticleCloud, rng: &mut R) -> Result<ParticleCloud> {
    let n = cloud.len();
    let cdf = build_cdf(&cloud.values, &cloud.weights)?;
    let values = (0..n).map(|_| cdf.sample(rng.gen())).collect();
    let jump_sizes = match &cloud.jump_sizes {
        Some(sizes) => {
            let zcdf = build_cdf(sizes, &cloud.weights)?;
            Some((0..n).map(|_| zcdf.sample(rng.gen())).collect())
        }
        None => None,
    };
    Ok(ParticleCloud {
        values,
        weights: vec![1.0 / n as f64; n],
        jump_flags: cloud.jump_flags.clone(),
        jump_sizes,
    })
}

/// Per-step particle means laid on the `0..=n` grid. `first_step` is the first
/// filtered index; earlier entries take `initial`, and trailing unfiltered
/// entries copy the last filtered value.
pub fn estimate_vol(clouds: &[Vec<f64>], first_step: usize, n_steps: usize, initial: f64) -> Vec<f64> {
    let means: Vec<f64> = clouds
        .iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    lay_out_vol(&means, first_step, n_steps, initial)
}

fn lay_out_vol(means: &[f64], first_step: usize, n_steps: usize, initial: f64) -> Vec<f64> {
    let mut out = vec![initial; n_steps + 1];
    for (i, &m) in means.iter().enumerate() {
        if first_step + i <= n_steps {
            out[first_step + i] = m;
        }
    }
    let last_filled = first_step + means.len();
    if last_filled <= n_steps && last_filled > 0 {
        let fill = out[last_filled - 1];
        for v in &mut out[last_filled..] {
            *v = fill;
        }
    }
    out
}

pub fn init_jump_particles<R: Rng + ?Sized>(
    priors: &PriorConfig,
    n_particles: usize,
    rng: &mut R,
) -> Result<(Vec<u8>, Vec<f64>)> {
    let flags = crate::rng::bernoulli(rng, priors.lambda_th, n_particles)?;
    let sizes = (0..n_particles)
        .map(|_| priors.mu0_j + priors.sigma0_j * standard_normal(rng))
        .collect();
    Ok((flags, sizes))
}

pub fn step_jump_prob(flags: &[u8], weights: &[f64]) -> f64 {
    let p: f64 = flags
        .iter()
        .zip(weights)
        .filter(|(&f, _)| f != 0)
        .map(|(_, &w)| w)
        .sum();
    p.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEstimate {
    pub lambda: f64,
    pub mu_j: f64,
    pub sigma_j: f64,
    /// No jump probability mass anywhere; moments fell back to the prior.
    pub no_jumps: bool,
}

/// Time-averaged intensity and `λ(t)`-weighted moments of the jump-size trace.
pub fn aggregate_jump_params(
    jump_prob: &[f64],
    jump_size: &[f64],
    maturity: f64,
    prior_mu_j: f64,
    prior_sigma_j: f64,
) -> JumpEstimate {
    let total: f64 = jump_prob.iter().sum();
    if !(total > 0.0) {
        debug!("no jump probability mass; jump moments fall back to the prior");
        return JumpEstimate { lambda: 0.0, mu_j: prior_mu_j, sigma_j: prior_sigma_j, no_jumps: true };
    }
    let n = jump_prob.len() as f64;
    let mu_j = jump_prob.iter().zip(jump_size).map(|(l, z)| l * z).sum::<f64>() / total;
    let ss: f64 = jump_prob
        .iter()
        .zip(jump_size)
        .map(|(l, z)| l * (z - mu_j) * (z - mu_j))
        .sum();
    let sigma_j = (ss / ((n - 1.0) / n * total)).sqrt();
    JumpEstimate { lambda: total / maturity, mu_j, sigma_j, no_jumps: false }
}

fn neutralized(r: f64, jump_prob: f64, jump_size: f64) -> f64 {
    let c = r * (1.0 - jump_prob * (1.0 - (-jump_size).exp()));
    if c > 0.0 {
        c
    } else {
        1e-12
    }
}

/// `R'(k) = R(k)·(1 − λ(k)(1 − e^{−Z(k)}))`.
pub fn neutralize_returns(returns: &[f64], jump_prob: &[f64], jump_size: &[f64]) -> Result<Vec<f64>> {
    if returns.len() != jump_prob.len() || returns.len() != jump_size.len() {
        return Err(Error::Parameter(format!(
            "length mismatch: returns {}, jump_prob {}, jump_size {}",
            returns.len(),
            jump_prob.len(),
            jump_size.len()
        )));
    }
    let mut clamped = 0;
    let out = returns
        .iter()
        .zip(jump_prob)
        .zip(jump_size)
        .map(|((&r, &l), &z)| {
            if l == 0.0 {
                return r;
            }
            let c = neutralized(r, l, z);
            if c == 1e-12 {
                clamped += 1;
            }
            c
        })
        .collect();
    if clamped > 0 {
        log::warn!("{clamped} neutralized returns were non-positive and clamped to 1e-12");
    }
    Ok(out)
}

/// Runs one full filter pass over `returns` (`R(1..n)`) with fixed parameters.
///
/// Draws come from `streams` under `cycle`, one substream per (phase, step).
pub fn run_filter(
    returns: &[f64],
    params: &HestonParams,
    priors: &PriorConfig,
    dt: f64,
    with_jumps: bool,
    streams: &Streams,
    cycle: u64,
) -> Result<FilterOutput> {
    let n = returns.len();
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 returns, got {n}")));
    }
    let np = priors.n_particles;
    if np < 3 {
        return Err(Error::UnsupportedSize(np));
    }
    let mut cloud = init_particles(params.theta, np)?.values;
    let first = if with_jumps { 0 } else { 1 };

    let mut means = Vec::with_capacity(n);
    let mut jump_prob = vec![0.0; n];
    let mut jump_size = vec![0.0; n];
    let mut degenerate_steps = 0;

    let mut eps = vec![0.0; np];
    let mut candidates = Vec::with_capacity(np);
    let mut log_w = vec![0.0; np];
    let mut flags = vec![0u8; np];
    let mut sizes = vec![0.0; np];
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(np);
    let drift = params.mu * dt + 1.0;

    for m in first..n {
        let key = |phase, unit| StreamKey::new(cycle, phase, unit);
        if m == 0 {
            candidates.clear();
            candidates.extend_from_slice(&cloud);
        } else {
            let mut rng = streams.rng(key(Phase::Propagate, m as u64));
            for e in eps.iter_mut() {
                *e = standard_normal(&mut rng);
            }
            propagate_with(&cloud, returns[m - 1], params, dt, &eps, &mut candidates)?;
        }

        let r = returns[m];
        let resid = r - drift;
        if with_jumps {
            let mut flag_rng = streams.rng(key(Phase::JumpFlag, m as u64));
            let mut size_rng = streams.rng(key(Phase::JumpSize, m as u64));
            for (f, z) in flags.iter_mut().zip(sizes.iter_mut()) {
                *f = u8::from(flag_rng.gen::<f64>() < priors.lambda_th);
                *z = priors.mu0_j + priors.sigma0_j * standard_normal(&mut size_rng);
            }
            for j in 0..np {
                log_w[j] = if flags[j] == 0 {
                    log_pdf_nojump(candidates[j], resid, dt)
                } else {
                    log_pdf_jump(candidates[j], r, drift, sizes[j], dt)
                };
            }
        } else {
            for (w, &v) in log_w.iter_mut().zip(&candidates) {
                *w = log_pdf_nojump(v, resid, dt);
            }
        }
        if normalize_log(&mut log_w).is_err() {
            degenerate_steps += 1;
            debug!("cycle {cycle} step {m}: degenerate weights, using uniform");
            log_w.iter_mut().for_each(|w| *w = 1.0 / np as f64);
        }

        let mut rng = streams.rng(key(Phase::Resample, 2 * m as u64));
        pairs.clear();
        pairs.extend(candidates.iter().copied().zip(log_w.iter().copied()));
        let cdf = build_cdf_from_pairs(&mut pairs)?;
        cloud.clear();
        cloud.extend((0..np).map(|_| cdf.sample(rng.gen())));
        // u = 0 lands exactly on the lowest knot, which may be a truncated zero;
        // an all-zero cloud restarts from the drift step out of zero
        if cloud.iter().any(|&v| v <= 0.0) {
            let floor = cdf
                .knots()
                .iter()
                .copied()
                .find(|&k| k > 0.0)
                .unwrap_or(params.kappa.max(0.0) * params.theta * dt)
                .max(MIN_VARIANCE);
            cloud.iter_mut().filter(|v| **v <= 0.0).for_each(|v| *v = floor);
        }
        means.push(cloud.iter().sum::<f64>() / np as f64);

        if with_jumps {
            jump_prob[m] = step_jump_prob(&flags, &log_w);
            let mut rng = streams.rng(key(Phase::Resample, 2 * m as u64 + 1));
            pairs.clear();
            pairs.extend(sizes.iter().copied().zip(log_w.iter().copied()));
            let zcdf = build_cdf_from_pairs(&mut pairs)?;
            jump_size[m] = (0..np).map(|_| zcdf.sample(rng.gen())).sum::<f64>() / np as f64;
        }
    }

    Ok(FilterOutput {
        vol_estimate: lay_out_vol(&means, first, n, params.theta),
        jump_prob,
        jump_size,
        degenerate_steps,
    })
}
