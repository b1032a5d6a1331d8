//! Keyed random substreams.
//!
//! Every draw in the toolkit comes from a ChaCha8 stream selected by
//! `(seed, cycle, phase, unit)`. Two calls with the same key replay the same
//! sequence, and there is no shared generator state, so particles and chains
//! can be evaluated in any order or on any thread.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Phase {
    Simulate = 1,
    Propagate = 2,
    JumpFlag = 3,
    JumpSize = 4,
    Resample = 5,
    PosteriorDraw = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub cycle: u64,
    pub phase: Phase,
    pub unit: u64,
}

impl StreamKey {
    pub fn new(cycle: u64, phase: Phase, unit: u64) -> Self {
        Self { cycle, phase, unit }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Factory for keyed substreams under one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh generator positioned at the start of the keyed substream.
    pub fn rng(&self, key: StreamKey) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let h = splitmix64(key.cycle)
            ^ splitmix64((key.phase as u64) << 56 ^ 0x5bd1_e995)
            ^ splitmix64(key.unit.rotate_left(17) ^ 0x2545_F491_4F6C_DD1D);
        rng.set_stream(splitmix64(h));
        rng
    }

    pub fn draw_standard_normal(&self, key: StreamKey, count: usize) -> Vec<f64> {
        let mut rng = self.rng(key);
        (0..count).map(|_| rng.sample(StandardNormal)).collect()
    }

    pub fn draw_uniform(&self, key: StreamKey, count: usize) -> Vec<f64> {
        let mut rng = self.rng(key);
        (0..count).map(|_| rng.gen::<f64>()).collect()
    }

    pub fn draw_bernoulli(&self, key: StreamKey, p: f64, count: usize) -> Result<Vec<u8>> {
        let mut rng = self.rng(key);
        bernoulli(&mut rng, p, count)
    }

    pub fn draw_inverse_gamma(&self, key: StreamKey, a: f64, b: f64) -> Result<f64> {
        inverse_gamma(&mut self.rng(key), a, b)
    }
}

pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64, count: usize) -> Result<Vec<u8>> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Parameter(format!("bernoulli p={p} outside [0,1)")));
    }
    Ok((0..count).map(|_| u8::from(rng.gen::<f64>() < p)).collect())
}

/// One draw with density proportional to `x^(-a-1) exp(-b/x)`, as `b / Gamma(a, 1)`.
pub fn inverse_gamma<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Parameter(format!(
            "inverse gamma needs a>0, b>0 (got a={a}, b={b})"
        )));
    }
    let gamma = Gamma::new(a, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
    loop {
        let g: f64 = gamma.sample(rng);
        if g > 0.0 {
            return Ok(b / g);
        }
    }
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn replay_is_identical() {
        let s = Streams::new(42);
        let key = StreamKey::new(0, Phase::Propagate, 0);
        let a = s.draw_standard_normal(key, 2);
        let b = s.draw_standard_normal(key, 2);
        assert_eq!(a, b);
        assert_eq!(
            s.draw_uniform(StreamKey::new(3, Phase::Resample, 9), 50),
            s.draw_uniform(StreamKey::new(3, Phase::Resample, 9), 50)
        );
    }

    #[test]
    fn normal_moments() {
        let xs = Streams::new(7).draw_standard_normal(StreamKey::new(0, Phase::Simulate, 0), 1_000_000);
        let (m, v) = mean_var(&xs);
        assert!(m.abs() < 0.005, "mean {m}");
        assert!((v - 1.0).abs() < 0.01, "var {v}");
    }

    #[test]
    fn uniform_codomain_and_ks() {
        let mut xs = Streams::new(1).draw_uniform(StreamKey::new(0, Phase::Resample, 0), 100_000);
        assert!(xs.iter().all(|&u| (0.0..1.0).contains(&u)));
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &u)| ((i as f64 + 1.0) / n - u).abs().max((u - i as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks <= 0.01, "ks {ks}");
    }

    #[test]
    fn bernoulli_cases() {
        let s = Streams::new(3);
        let key = StreamKey::new(0, Phase::JumpFlag, 0);
        assert!(s.draw_bernoulli(key, 0.0, 1000).unwrap().iter().all(|&f| f == 0));
        let flags = s.draw_bernoulli(key, 0.15, 100_000).unwrap();
        let m = flags.iter().map(|&f| f as f64).sum::<f64>() / 1e5;
        assert!((m - 0.15).abs() < 0.01);
        assert!(matches!(s.draw_bernoulli(key, 1.0, 1), Err(Error::Parameter(_))));
        assert!(s.draw_bernoulli(key, -0.1, 1).is_err());
    }

    #[test]
    fn inverse_gamma_moments() {
        let mut rng = Streams::new(11).rng(StreamKey::new(0, Phase::PosteriorDraw, 0));
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| inverse_gamma(&mut rng, 3.0, 2.0).unwrap())
            .collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let (m, v) = mean_var(&xs);
        assert!((m - 1.0).abs() < 0.01, "mean {m}");
        assert!((v - 1.0).abs() < 0.05, "var {v}");
        assert!(inverse_gamma(&mut rng, 0.0, 1.0).is_err());
        assert!(inverse_gamma(&mut rng, 1.0, -1.0).is_err());
    }

    #[test]
    fn distinct_keys_are_uncorrelated() {
        let s = Streams::new(5);
        let keys = [
            StreamKey::new(0, Phase::Propagate, 0),
            StreamKey::new(0, Phase::Propagate, 1),
            StreamKey::new(1, Phase::Propagate, 0),
            StreamKey::new(0, Phase::Resample, 0),
        ];
        let draws: Vec<Vec<f64>> = keys.iter().map(|&k| s.draw_standard_normal(k, 100_000)).collect();
        for i in 0..draws.len() {
            for j in i + 1..draws.len() {
                let c = draws[i].iter().zip(&draws[j]).map(|(a, b)| a * b).sum::<f64>() / 1e5;
                assert!(c.abs() < 0.01, "keys {i},{j} corr {c}");
            }
        }
    }
}
