//! Conjugate posteriors for the static parameters given a volatility path.
//!
//! Three regressions are involved:
//!
//! * drift: `y_s = η x_s + ε`, with `η = μΔt + 1`;
//! * variance dynamics: `y_v = X_v β + σ ε`, with `β = (κθΔt, 1 − κΔt)`;
//! * correlation: `e₂ = ψ e₁ + √ω ε`, with `ψ = σρ`, `ω = σ²(1 − ρ²)`.
//!
//! Everything is at most 2×2 so the linear algebra is closed form.

use log::warn;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{inverse_gamma, standard_normal};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn inv2(m: &Mat2) -> Option<Mat2> {
    let d = det2(m);
    // 1 − corr² for a Gram matrix; invariant to column scaling
    let diag = (m[0][0] * m[1][1]).abs();
    if d == 0.0 || !d.is_finite() || d.abs() <= 1e-14 * diag {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

fn mat_vec(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn quad(m: &Mat2, v: &Vec2) -> f64 {
    let mv = mat_vec(m, v);
    v[0] * mv[0] + v[1] * mv[1]
}

/// Lower Cholesky factor of a symmetric positive definite 2×2 matrix.
pub fn cholesky2(m: &Mat2) -> Option<Mat2> {
    if !(m[0][0] > 0.0) {
        return None;
    }
    let l00 = m[0][0].sqrt();
    let l10 = m[1][0] / l00;
    let rem = m[1][1] - l10 * l10;
    if !(rem > 0.0) {
        return None;
    }
    Some([[l00, 0.0], [l10, rem.sqrt()]])
}

fn check_positive(vol: &[f64]) -> Result<()> {
    match vol.iter().position(|&v| !(v > 0.0)) {
        Some(i) => Err(Error::Domain(format!("volatility at step {i} is {} (must be > 0)", vol[i]))),
        None => Ok(()),
    }
}

/// Drift regression design: `y_s[k] = R(k)/(√v(k−1)√Δt)`, `x_s[k] = 1/(√v(k−1)√Δt)`.
pub fn build_eta_design(returns: &[f64], vol: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = returns.len();
    if vol.len() < n {
        return Err(Error::Parameter(format!("vol length {} < returns length {n}", vol.len())));
    }
    check_positive(&vol[..n])?;
    let sdt = dt.sqrt();
    let x: Vec<f64> = vol[..n].iter().map(|v| 1.0 / (v.sqrt() * sdt)).collect();
    let y = returns.iter().zip(&x).map(|(r, x)| r * x).collect();
    Ok((y, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalPosterior {
    pub mean: f64,
    pub precision: f64,
}

/// Scalar regression `y = η x + ε` with `N(mu0, 1/tau0)` prior on `η`.
/// Uses `x'x·η̂ = x'y`, so a flat prior returns the OLS estimate.
pub fn posterior_scalar_normal(y: &[f64], x: &[f64], mu0: f64, tau0: f64) -> Result<NormalPosterior> {
    let xx = dot(x, x);
    if !(xx > 0.0) {
        return Err(Error::SingularDesign("x'x = 0 in scalar regression".into()));
    }
    let precision = xx + tau0;
    let prior_term = if tau0 == 0.0 { 0.0 } else { tau0 * mu0 };
    Ok(NormalPosterior { mean: (prior_term + dot(x, y)) / precision, precision })
}

pub fn sample_eta<R: Rng + ?Sized>(post: &NormalPosterior, rng: &mut R) -> f64 {
    let z = standard_normal(rng);
    if post.precision.is_infinite() {
        return post.mean;
    }
    post.mean + z / post.precision.sqrt()
}

pub fn eta_to_mu(eta: f64, dt: f64) -> f64 {
    (eta - 1.0) / dt
}

pub fn mu_to_eta(mu: f64, dt: f64) -> f64 {
    mu * dt + 1.0
}

/// Variance regression design over rows `k = 2..n`:
/// `y = v(k)/(√Δt√v(k−1))`, `x₁ = 1/(√Δt√v(k−1))`, `x₂ = √v(k−1)/√Δt`.
pub fn build_beta_design(vol: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<Vec2>)> {
    if vol.len() < 3 {
        return Err(Error::Parameter(format!("need at least 3 volatility points, got {}", vol.len())));
    }
    check_positive(vol)?;
    let sdt = dt.sqrt();
    let mut y = Vec::with_capacity(vol.len() - 2);
    let mut x = Vec::with_capacity(vol.len() - 2);
    for w in vol[1..].windows(2) {
        let sv = w[0].sqrt();
        let denom = sdt * sv;
        y.push(w[1] / denom);
        x.push([1.0 / denom, sv / sdt]);
    }
    Ok((y, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPosterior {
    pub mean: Vec2,
    pub precision: Mat2,
    /// OLS estimate, when `X'X` is invertible.
    pub ols: Option<Vec2>,
}

pub fn gram(x: &[Vec2]) -> Mat2 {
    let mut xtx = [[0.0; 2]; 2];
    for r in x {
        xtx[0][0] += r[0] * r[0];
        xtx[0][1] += r[0] * r[1];
        xtx[1][1] += r[1] * r[1];
    }
    xtx[1][0] = xtx[0][1];
    xtx
}

pub fn posterior_beta(y: &[f64], x: &[Vec2], mu0: &Vec2, lambda0: &Mat2) -> Result<BetaPosterior> {
    if y.len() != x.len() {
        return Err(Error::Parameter(format!("design has {} rows, response {}", x.len(), y.len())));
    }
    let xtx = gram(x);
    let mut xty = [0.0; 2];
    for (r, yk) in x.iter().zip(y) {
        xty[0] += r[0] * yk;
        xty[1] += r[1] * yk;
    }
    let precision = [
        [xtx[0][0] + lambda0[0][0], xtx[0][1] + lambda0[0][1]],
        [xtx[1][0] + lambda0[1][0], xtx[1][1] + lambda0[1][1]],
    ];
    let cov = inv2(&precision)
        .ok_or_else(|| Error::SingularDesign("posterior precision of beta is singular".into()))?;
    let ols = inv2(&xtx).map(|inv| mat_vec(&inv, &xty));
    let prior = mat_vec(lambda0, mu0);
    let mean = mat_vec(&cov, &[prior[0] + xty[0], prior[1] + xty[1]]);
    Ok(BetaPosterior { mean, precision, ols })
}

/// Draw from `N(μ^β, σ²_prev (Λ^β)⁻¹)`.
pub fn sample_beta<R: Rng + ?Sized>(post: &BetaPosterior, sigma2_prev: f64, rng: &mut R) -> Result<Vec2> {
    let cov = inv2(&post.precision)
        .ok_or_else(|| Error::Numeric("beta precision is not invertible".into()))?;
    let l = cholesky2(&cov).ok_or_else(|| Error::Numeric("beta precision is not positive definite".into()))?;
    let z = [standard_normal(rng), standard_normal(rng)];
    let s = sigma2_prev.max(0.0).sqrt();
    Ok([
        post.mean[0] + s * l[0][0] * z[0],
        post.mean[1] + s * (l[1][0] * z[0] + l[1][1] * z[1]),
    ])
}

/// `(κ, θ)` from `β`, or `None` when the draw is degenerate: `κ` below
/// `10⁻⁸/Δt` (including negative) or a non-positive `θ`.
pub fn beta_to_kappa_theta(beta: &Vec2, dt: f64) -> Option<(f64, f64)> {
    let kappa = (1.0 - beta[1]) / dt;
    if !(kappa >= 1e-8 / dt) {
        return None;
    }
    let theta = beta[0] / (kappa * dt);
    (theta > 0.0 && theta.is_finite()).then_some((kappa, theta))
}

pub fn kappa_theta_to_beta(kappa: f64, theta: f64, dt: f64) -> Vec2 {
    [kappa * theta * dt, 1.0 - kappa * dt]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGammaPosterior {
    pub shape: f64,
    pub scale: f64,
    /// Set when the raw scale came out non-positive and was clamped.
    pub clamped: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn posterior_sigma2(
    y: &[f64],
    mu0: &Vec2,
    lambda0: &Mat2,
    mu: &Vec2,
    lambda: &Mat2,
    a0: f64,
    b0: f64,
    n_obs: usize,
) -> Result<InverseGammaPosterior> {
    if !(a0 > 0.0 && b0 > 0.0) {
        return Err(Error::Parameter(format!("sigma^2 prior needs a0, b0 > 0 (got {a0}, {b0})")));
    }
    let shape = a0 + n_obs as f64 / 2.0;
    let mut scale = b0 + 0.5 * (dot(y, y) + quad(lambda0, mu0) - quad(lambda, mu));
    let clamped = !(scale > 0.0);
    if clamped {
        warn!("sigma^2 posterior scale {scale} not positive; clamping to b0*1e-6");
        scale = b0 * 1e-6;
    }
    Ok(InverseGammaPosterior { shape, scale, clamped })
}

#[allow(clippy::too_many_arguments)]
pub fn sample_sigma2<R: Rng + ?Sized>(
    y: &[f64],
    mu0: &Vec2,
    lambda0: &Mat2,
    post: &BetaPosterior,
    a0: f64,
    b0: f64,
    n_obs: usize,
    rng: &mut R,
) -> Result<f64> {
    let ig = posterior_sigma2(y, mu0, lambda0, &post.mean, &post.precision, a0, b0, n_obs)?;
    inverse_gamma(rng, ig.shape, ig.scale)
}

/// Standardized residuals of the price and variance equations for `k = 1..n`.
pub fn compute_residuals(
    returns: &[f64],
    vol: &[f64],
    mu: f64,
    kappa: f64,
    theta: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = returns.len();
    if vol.len() < n + 1 {
        return Err(Error::Parameter(format!("vol length {} < {}", vol.len(), n + 1)));
    }
    check_positive(&vol[..n])?;
    let sdt = dt.sqrt();
    let mut e1 = Vec::with_capacity(n);
    let mut e2 = Vec::with_capacity(n);
    for k in 1..=n {
        let (vp, vk) = (vol[k - 1], vol[k]);
        let denom = sdt * vp.sqrt();
        e1.push((returns[k - 1] - mu * dt - 1.0) / denom);
        e2.push((vk - vp - kappa * (theta - vp) * dt) / denom);
    }
    Ok((e1, e2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiOmegaPosterior {
    pub mu_psi: f64,
    pub tau_psi: f64,
    pub a_omega: f64,
    pub b_omega: f64,
}

pub fn posterior_psi_omega(
    e1: &[f64],
    e2: &[f64],
    mu0_psi: f64,
    tau0_psi: f64,
    a0_omega: f64,
    b0_omega: f64,
) -> Result<PsiOmegaPosterior> {
    if e1.len() != e2.len() {
        return Err(Error::Parameter("residual vectors differ in length".into()));
    }
    let a11 = dot(e1, e1);
    let a12 = dot(e1, e2);
    let a22 = dot(e2, e2);
    if !(a11 > 0.0) {
        return Err(Error::SingularDesign("price residuals are identically zero".into()));
    }
    let prior_term = if tau0_psi == 0.0 { 0.0 } else { mu0_psi * tau0_psi };
    let tau_psi = a11 + tau0_psi;
    // a22 - a12²/a11 is a residual sum of squares; rounding may push it below zero
    let rss = (a22 - a12 * a12 / a11).max(0.0);
    Ok(PsiOmegaPosterior {
        mu_psi: (a12 + prior_term) / tau_psi,
        tau_psi,
        a_omega: a0_omega + e1.len() as f64 / 2.0,
        b_omega: b0_omega + 0.5 * rss,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoDraw {
    pub rho: f64,
    pub psi: f64,
    pub omega: f64,
}

pub fn rho_from_psi_omega(psi: f64, omega: f64) -> f64 {
    if psi == 0.0 {
        return 0.0;
    }
    psi / (psi * psi + omega).sqrt()
}

pub fn sample_rho<R: Rng + ?Sized>(post: &PsiOmegaPosterior, rng: &mut R) -> Result<RhoDraw> {
    let omega = inverse_gamma(rng, post.a_omega, post.b_omega)?;
    let psi = post.mu_psi + standard_normal(rng) * omega.sqrt() / post.tau_psi.sqrt();
    Ok(RhoDraw { rho: rho_from_psi_omega(psi, omega), psi, omega })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Phase, StreamKey, Streams};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn eta_design_unit_scaling() {
        let r = [1.01, 0.99, 1.003];
        let (y, x) = build_eta_design(&r, &[1.0; 4], 1.0).unwrap();
        assert_eq!(y, r.to_vec());
        assert_eq!(x, vec![1.0; 3]);
        let (y, x) = build_eta_design(&[1.01], &[0.04, 0.05], 1.0 / 252.0).unwrap();
        assert!((y[0] - 80.166).abs() < 1e-3, "{}", y[0]);
        assert!((x[0] - 79.373).abs() < 1e-3, "{}", x[0]);
        assert!(matches!(build_eta_design(&[1.0], &[0.0, 1.0], 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn scalar_posterior_examples() {
        let p = posterior_scalar_normal(&[2.0, 2.0], &[1.0, 1.0], 0.0, 0.0).unwrap();
        assert_eq!((p.mean, p.precision), (2.0, 2.0));
        let p = posterior_scalar_normal(&[2.0, 2.0], &[1.0, 1.0], 1.0, 2.0).unwrap();
        assert_eq!((p.mean, p.precision), (1.5, 4.0));
        let p = posterior_scalar_normal(&[0.0], &[1.0], 7.0, 1e12).unwrap();
        assert!((p.mean - 7.0).abs() < 1e-6);
        assert!(posterior_scalar_normal(&[1.0], &[0.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn eta_sampling() {
        let mut rng = Streams::new(1).rng(StreamKey::new(0, Phase::PosteriorDraw, 0));
        let inf = NormalPosterior { mean: 1.5, precision: f64::INFINITY };
        assert_eq!(sample_eta(&inf, &mut rng), 1.5);
        let post = NormalPosterior { mean: 1.0004, precision: 1e4 };
        let xs: Vec<f64> = (0..100_000).map(|_| sample_eta(&post, &mut rng)).collect();
        let m = xs.iter().sum::<f64>() / 1e5;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (1e5 - 1.0)).sqrt();
        assert!((sd - 0.01).abs() < 0.0005, "sd {sd}");
        let a = sample_eta(&post, &mut Streams::new(3).rng(StreamKey::new(2, Phase::PosteriorDraw, 0)));
        let b = sample_eta(&post, &mut Streams::new(3).rng(StreamKey::new(2, Phase::PosteriorDraw, 0)));
        assert_eq!(a, b);
    }

    #[test]
    fn eta_mu_transform() {
        assert_eq!(eta_to_mu(1.0, 0.3), 0.0);
        assert!((eta_to_mu(1.000396825, 1.0 / 252.0) - 0.1).abs() < 1e-9 * 252.0);
        assert!((eta_to_mu(1.0 + 0.1 / 252.0, 1.0 / 252.0) - 0.1).abs() < 1e-9);
        for mu in [-1.0, 0.0, 0.5] {
            assert!((eta_to_mu(mu_to_eta(mu, 0.01), 0.01) - mu).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_design_examples() {
        let theta = 0.04;
        let (y, x) = build_beta_design(&[theta; 5], 1.0).unwrap();
        assert_eq!(y.len(), 3);
        for (yk, xk) in y.iter().zip(&x) {
            assert!((yk - theta.sqrt()).abs() < 1e-15);
            assert!((xk[0] - 1.0 / theta.sqrt()).abs() < 1e-12);
            assert!((xk[1] - theta.sqrt()).abs() < 1e-15);
        }
        let (y, x) = build_beta_design(&[0.04, 0.05, 0.045], 0.01).unwrap();
        assert_eq!(y.len(), 1);
        assert!((y[0] - 2.0125).abs() < 1e-4);
        assert!((x[0][0] - 44.7214).abs() < 1e-4);
        assert!((x[0][1] - 2.23607).abs() < 1e-5);
        assert!(build_beta_design(&[0.04, 0.05], 0.01).is_err());
        assert!(matches!(build_beta_design(&[0.04, -0.05, 0.1], 0.01), Err(Error::Domain(_))));
        // single row with a proper prior stays well defined
        let p = posterior_beta(&y, &x, &[0.0, 1.0], &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(p.mean.iter().all(|m| m.is_finite()));
        assert!(p.ols.is_none());
    }

    #[test]
    fn beta_posterior_examples() {
        let x = [[1.0, 0.0], [0.0, 1.0]];
        let p = posterior_beta(&[1.0, 2.0], &x, &[0.0, 0.0], &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(p.precision, [[2.0, 0.0], [0.0, 2.0]]);
        assert_eq!(p.mean, [0.5, 1.0]);
        let p = posterior_beta(&[1.0, 2.0], &x, &[3.0, -4.0], &[[1e12, 0.0], [0.0, 1e12]]).unwrap();
        assert!((p.mean[0] - 3.0).abs() < 1e-6 && (p.mean[1] + 4.0).abs() < 1e-6);
        let xr = [[1.0, 2.0], [1.0, 3.5], [1.0, -1.0]];
        let y = [0.3, 1.2, -0.8];
        let p = posterior_beta(&y, &xr, &[0.0; 2], &[[0.0; 2]; 2]).unwrap();
        let ols = p.ols.unwrap();
        assert!(rel(p.mean[0], ols[0]) < 1e-10 && rel(p.mean[1], ols[1]) < 1e-10);
        assert!(posterior_beta(&[1.0, 1.0], &[[1.0, 1.0], [2.0, 2.0]], &[0.0; 2], &[[0.0; 2]; 2]).is_err());
    }

    #[test]
    fn beta_sampling() {
        let post = BetaPosterior { mean: [0.3, -0.2], precision: [[1.0, 0.0], [0.0, 1.0]], ols: None };
        let mut rng = Streams::new(2).rng(StreamKey::new(0, Phase::PosteriorDraw, 0));
        assert_eq!(sample_beta(&post, 0.0, &mut rng).unwrap(), post.mean);
        let draws: Vec<Vec2> = (0..100_000).map(|_| sample_beta(&post, 4.0, &mut rng).unwrap()).collect();
        for c in 0..2 {
            let m = draws.iter().map(|d| d[c]).sum::<f64>() / 1e5;
            let sd = (draws.iter().map(|d| (d[c] - m).powi(2)).sum::<f64>() / (1e5 - 1.0)).sqrt();
            assert!((sd - 2.0).abs() < 0.02, "coord {c} sd {sd}");
        }
        let bad = BetaPosterior { precision: [[1.0, 2.0], [2.0, 1.0]], ..post };
        assert!(sample_beta(&bad, 1.0, &mut rng).is_err());
    }

    #[test]
    fn kappa_theta_transform() {
        let (k, t) = beta_to_kappa_theta(&[0.0005, 0.99], 0.01).unwrap();
        assert!((k - 1.0).abs() < 1e-12 && (t - 0.05).abs() < 1e-12);
        assert!(beta_to_kappa_theta(&[0.0005, 1.0], 0.01).is_none());
        assert!(beta_to_kappa_theta(&[0.0005, 1.01], 0.01).is_none());
        let dt = 1.0 / 252.0;
        let b = kappa_theta_to_beta(2.0, 0.03, dt);
        let (k, t) = beta_to_kappa_theta(&b, dt).unwrap();
        assert!(rel(k, 2.0) < 1e-12 && rel(t, 0.03) < 1e-12);
    }

    #[test]
    fn sigma2_posterior_examples() {
        let z = [[0.0; 2]; 2];
        let ig = posterior_sigma2(&[], &[0.0; 2], &z, &[0.0; 2], &z, 2.0, 3.0, 0).unwrap();
        assert_eq!((ig.shape, ig.scale), (2.0, 3.0));
        let mean: f64 = 0.025 / (149.0 - 1.0);
        assert!((mean - 1.689e-4).abs() < 1e-7);
        // perfect fit: mu'Λmu = y'y = 1
        let ig = posterior_sigma2(&[1.0], &[0.0; 2], &z, &[1.0, 0.0], &[[1.0, 0.0], [0.0, 1.0]], 2.0, 0.5, 1).unwrap();
        assert_eq!((ig.shape, ig.scale), (2.5, 0.5));
        let ig = posterior_sigma2(&[1.0], &[0.0; 2], &z, &[2.0, 0.0], &[[1.0, 0.0], [0.0, 1.0]], 2.0, 0.5, 1).unwrap();
        assert!(ig.clamped && ig.scale == 0.5e-6);
    }

    #[test]
    fn residual_examples() {
        let dt = 1.0 / 252.0;
        let (e1, _) = compute_residuals(&[1.01], &[0.04, 0.04], 0.1, 1.0, 0.04, dt).unwrap();
        assert!((e1[0] - 0.76226).abs() < 1e-4, "{}", e1[0]);
        let (e1, e2) = compute_residuals(&[1.0 + 0.1 * dt], &[0.04, 0.04 + 0.01 * dt], 0.1, 1.0, 0.05, dt).unwrap();
        assert!(e1[0].abs() < 1e-12 && e2[0].abs() < 1e-12);
        assert!(compute_residuals(&[1.0], &[0.0, 0.1], 0.0, 1.0, 0.1, dt).is_err());
    }

    #[test]
    fn psi_omega_examples() {
        let e1 = [0.5, -1.2, 2.0, 0.1];
        let e2: Vec<f64> = e1.iter().map(|e| -0.3 * e).collect();
        let p = posterior_psi_omega(&e1, &e2, 0.0, 0.0, 2.0, 0.7).unwrap();
        assert!((p.mu_psi + 0.3).abs() < 1e-12);
        assert!((p.b_omega - 0.7).abs() < 1e-12);
        let p = posterior_psi_omega(&[1.0, 1.0], &[1.0, -1.0], 0.0, 0.0, 1.0, 0.25).unwrap();
        assert_eq!((p.mu_psi, p.tau_psi, p.a_omega, p.b_omega), (0.0, 2.0, 2.0, 1.25));
        let p = posterior_psi_omega(&[1.0, 1.0], &[1.0, -1.0], -0.45, 1e12, 1.0, 0.25).unwrap();
        assert!((p.mu_psi + 0.45).abs() < 1e-6);
        assert!(posterior_psi_omega(&[0.0, 0.0], &[1.0, 1.0], 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn rho_mapping() {
        assert_eq!(rho_from_psi_omega(0.0, 0.3), 0.0);
        assert!((rho_from_psi_omega(-0.005, 7.5e-5) + 0.5).abs() < 1e-12);
        let post = PsiOmegaPosterior { mu_psi: -0.2, tau_psi: 5.0, a_omega: 3.0, b_omega: 0.1 };
        let mut rng = Streams::new(4).rng(StreamKey::new(0, Phase::PosteriorDraw, 0));
        for _ in 0..10_000 {
            let d = sample_rho(&post, &mut rng).unwrap();
            assert!(d.omega > 0.0 && d.rho.abs() < 1.0);
        }
    }
}
