//! Discrete Gaussian sampling over the integers.
//!
//! Widths follow the `ρ_s(x) = exp(-π x² / s²)` convention, so a sample from
//! `D_{Z,s}` has standard deviation close to `s / √(2π)`.
//!
//! Nothing here is constant-time: rejection loops and floating-point
//! evaluation leak timing. Do not use this module where side channels matter.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::modmath::IntMatrix;

/// Statistical slack for the smoothing parameter.
pub const SMOOTHING_EPSILON: f64 = 1.0 / (1u64 << 36) as f64;

/// Hard tail cut, in units of `s`.
pub const TAIL_CUT: f64 = 12.0;

/// Proposal half-width in units of `s`: `exp(-π t²) ≈ 2^-64` at `t ≈ 3.76`.
const WINDOW: f64 = 3.7576;

const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("discrete Gaussian sampler failed: {0}")]
    InternalSamplerFailure(String),
}

/// Width `s` and center `c` of a discrete Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussParam {
    pub s: f64,
    pub c: f64,
}

impl GaussParam {
    pub fn new(s: f64) -> Self {
        GaussParam { s, c: 0.0 }
    }

    pub fn centered_at(s: f64, c: f64) -> Self {
        GaussParam { s, c }
    }

    /// Standard deviation of the continuous Gaussian with the same width.
    pub fn sigma(&self) -> f64 {
        self.s / (2.0 * std::f64::consts::PI).sqrt()
    }
}

/// `r = √(ln(2n/ε)/π)`, the smoothing-scale constant for dimension `n`.
pub fn smoothing_r(n: usize) -> f64 {
    ((2.0 * n as f64 / SMOOTHING_EPSILON).ln() / std::f64::consts::PI).sqrt()
}

/// Deterministic random stream: ChaCha20 keyed by a 32-byte seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    inner: ChaCha20Rng,
}

impl Rng {
    pub fn from_seed(seed: [u8; 32]) -> Self {
        Rng {
            inner: ChaCha20Rng::from_seed(seed),
        }
    }

    pub fn seed_from_u64(seed: u64) -> Self {
        Rng {
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Seeds from the operating system.
    pub fn from_os_rng() -> Self {
        Rng {
            inner: ChaCha20Rng::from_os_rng(),
        }
    }

    pub fn seed(&self) -> [u8; 32] {
        self.inner.get_seed()
    }

    /// Number of 32-bit words consumed so far.
    pub fn position(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Independent stream with the same seed; distinct `stream` values never
    /// overlap with each other or with stream 0 (the parent).
    pub fn fork(&self, stream: u64) -> Rng {
        let mut inner = ChaCha20Rng::from_seed(self.seed());
        inner.set_stream(stream.wrapping_add(1));
        Rng { inner }
    }

    /// A fresh generator keyed by 32 bytes drawn from this one.
    pub fn split(&mut self) -> Rng {
        let mut seed = [0u8; 32];
        self.inner.fill_bytes(&mut seed);
        Rng::from_seed(seed)
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Draws from `D_{Z,c,s}` truncated to `|x - c| ≤ 3.76·s`.
///
/// Rejection sampling from the uniform proposal on the window; the discarded
/// tail carries about 2^-64 of the mass.
pub fn sample_z(p: GaussParam, rng: &mut Rng) -> Result<i64, SamplerError> {
    if !(p.s > 0.0) || !p.s.is_finite() || !p.c.is_finite() {
        return Err(SamplerError::InternalSamplerFailure(format!("invalid width {}", p.s)));
    }
    let half = WINDOW * p.s;
    let lo = (p.c - half).ceil();
    let hi = (p.c + half).floor();
    if lo > hi {
        return Err(SamplerError::InternalSamplerFailure(format!(
            "no integer within the tail cut of center {} at width {}",
            p.c, p.s
        )));
    }
    if hi - lo > 2f64.powi(62) {
        return Err(SamplerError::InternalSamplerFailure(format!("width {} too large", p.s)));
    }
    let (lo, hi) = (lo as i64, hi as i64);
    if lo == hi {
        return Ok(lo);
    }
    let scale = -std::f64::consts::PI / (p.s * p.s);
    for _ in 0..MAX_ITERATIONS {
        let x = rng.random_range(lo..=hi);
        let d = x as f64 - p.c;
        let accept = (scale * d * d).exp();
        if rng.random::<f64>() < accept {
            return Ok(x);
        }
    }
    Err(SamplerError::InternalSamplerFailure(
        "rejection loop exceeded its iteration budget".into(),
    ))
}

pub fn sample_z_vec(len: usize, p: GaussParam, rng: &mut Rng) -> Result<Vec<i64>, SamplerError> {
    (0..len).map(|_| sample_z(p, rng)).collect()
}

/// Matrix with i.i.d. entries from `D_{Z,c,s}`.
pub fn sample_z_matrix(rows: usize, cols: usize, p: GaussParam, rng: &mut Rng) -> Result<IntMatrix, SamplerError> {
    let data = sample_z_vec(rows * cols, p, rng)?;
    Ok(IntMatrix::from_vec(rows, cols, data).expect("length matches shape"))
}

/// Continuous standard normal vector.
pub fn sample_normal_vec(len: usize, rng: &mut Rng) -> Vec<f64> {
    (0..len)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}
