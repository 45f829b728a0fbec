//! Parameter derivation and error-budget validation.

use sha2::{Digest, Sha256};

use crate::gadget::{bit_length, MAX_GADGET_MODULUS};
use crate::modmath;
use crate::sampler::{sample_z_matrix, smoothing_r, GaussParam, Rng};
use crate::trapdoor::{gadget_width, s_min_for};

use super::SchemeError;

/// Smallest accepted modulus.
pub const MIN_MODULUS: u64 = 1 << 8;

/// Standard deviations of headroom required between the predicted
/// compressed error and the gadget's recovery region.
pub const BUDGET_SIGMAS: f64 = 8.0;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Named parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `n = 4`, `q ≈ 2^21`: fresh ciphertexts only.
    Toy,
    /// `n = 8`, `q ≈ 2^30`: fresh ciphertexts only.
    Demo,
    /// `n = 4`, `q ≈ 2^43` with the minimal error width: supports re-encryption.
    Reenc,
}

impl Preset {
    pub fn params(self) -> Params {
        let (n, q, c) = self.definition();
        params_with(n, q, None, c).expect("preset parameters are valid")
    }

    /// `(n, q, error-rate constant)`.
    pub fn definition(self) -> (usize, u64, f64) {
        match self {
            Preset::Toy => (4, 2_097_169, 1.0),
            Preset::Demo => (8, 1_073_741_827, 1.0),
            Preset::Reenc => (4, 8_796_093_022_237, 131_072.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Toy => "toy",
            Preset::Demo => "demo",
            Preset::Reenc => "reenc",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "toy" => Some(Preset::Toy),
            "demo" => Some(Preset::Demo),
            "reenc" => Some(Preset::Reenc),
            _ => None,
        }
    }
}

/// Public scalars of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub n: usize,
    pub q: u64,
    pub k: usize,
    pub m_bar: usize,
    /// Smoothing-scale constant `√(ln(2n/ε)/π)`.
    pub r: f64,
    /// Error width `αq`.
    pub alpha_q: f64,
    /// `C` in `αq = max(2, round(q / (C·(nk)³·r³)))`.
    pub error_rate_constant: f64,
    pub s_extract: f64,
    pub s_rk1: f64,
    pub s_rk2: f64,
}

/// Predicted standard deviation of the error the gadget must recover, and
/// the bound it has to stay under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub sigma: f64,
    /// `BUDGET_SIGMAS·√max(5, popcount q)·σ`, compared against `(q−1)/2`.
    pub demand: f64,
    pub limit: f64,
}

impl Budget {
    pub fn ok(&self) -> bool {
        self.demand < self.limit
    }

    pub fn ratio(&self) -> f64 {
        self.demand / self.limit
    }
}

/// Per-block norm thresholds applied during decryption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub e0_bar: f64,
    pub e0_prime: f64,
    pub e_j: f64,
}

pub fn params_new(n: usize, q: u64, m_bar: Option<usize>) -> Result<Params, SchemeError> {
    params_with(n, q, m_bar, 1.0)
}

pub fn params_with(n: usize, q: u64, m_bar: Option<usize>, error_rate_constant: f64) -> Result<Params, SchemeError> {
    if !(MIN_MODULUS..MAX_GADGET_MODULUS).contains(&q) || !modmath::is_prime(q) {
        return Err(SchemeError::InvalidModulus(q));
    }
    if n == 0 {
        return Err(SchemeError::InvalidParams("n must be positive".into()));
    }
    if !(error_rate_constant > 0.0 && error_rate_constant.is_finite()) {
        return Err(SchemeError::InvalidParams(
            "error-rate constant must be positive".into(),
        ));
    }
    let k = bit_length(q);
    let nk = n * k;
    let m_bar = m_bar.unwrap_or(nk);
    if m_bar < nk {
        return Err(SchemeError::InvalidParams(format!("m̄ = {m_bar} is below nk = {nk}")));
    }

    let r = smoothing_r(n);
    let alpha_q = (q as f64 / (error_rate_constant * (nk as f64).powi(3) * r.powi(3)))
        .round()
        .max(2.0);

    let mut rng = derivation_rng(n, q, m_bar);
    let s_g = gadget_width(r);
    let msk_like = sample_z_matrix(m_bar, nk, GaussParam::new(r), &mut rng)?;
    let s_extract = 1.2 * s_min_for(&msk_like, s_g);
    let key_like = sample_z_matrix(m_bar + nk, nk, GaussParam::new(s_extract), &mut rng)?;
    let s_rk1 = 1.2 * s_min_for(&key_like, s_g);
    let s_rk2 = s_rk1 * (m_bar as f64).sqrt();

    let params = Params {
        n,
        q,
        k,
        m_bar,
        r,
        alpha_q,
        error_rate_constant,
        s_extract,
        s_rk1,
        s_rk2,
    };
    let b0 = params.level0_budget();
    if !b0.ok() {
        return Err(SchemeError::BudgetExceeded(format!(
            "fresh ciphertexts need {:.3e} of recovery room but only {:.3e} is available",
            b0.demand, b0.limit
        )));
    }
    Ok(params)
}

fn derivation_rng(n: usize, q: u64, m_bar: usize) -> Rng {
    let mut h = Sha256::new();
    h.update(b"ibupre parameter derivation");
    h.update((n as u64).to_le_bytes());
    h.update(q.to_le_bytes());
    h.update((m_bar as u64).to_le_bytes());
    Rng::from_seed(h.finalize().into())
}

impl Params {
    pub fn nk(&self) -> usize {
        self.n * self.k
    }

    /// Width of `Ã_i`.
    pub fn m(&self) -> usize {
        self.m_bar + self.nk()
    }

    /// Ciphertext length `m̄ + 3nk`.
    pub fn ct_len(&self) -> usize {
        self.m_bar + 3 * self.nk()
    }

    /// Smallest width a coset sample with this trapdoor family may use.
    pub fn s_gadget(&self) -> f64 {
        gadget_width(self.r)
    }

    /// Expected `s′` for a fresh ciphertext (using `E‖ē₀‖² = m̄σ²`).
    fn s_prime_expected(&self) -> f64 {
        let sig_e = self.alpha_q / TWO_PI.sqrt();
        let m_bar = self.m_bar as f64;
        (m_bar * sig_e * sig_e + m_bar * self.alpha_q * self.alpha_q).sqrt() * self.r
    }

    fn budget(&self, sigma: f64) -> Budget {
        let popcount = self.q.count_ones().max(5) as f64;
        Budget {
            sigma,
            demand: BUDGET_SIGMAS * popcount.sqrt() * sigma,
            limit: (self.q - 1) as f64 / 2.0,
        }
    }

    /// Budget for `R_{i1}ᵗe₀ + e₁` on a fresh ciphertext.
    pub fn level0_budget(&self) -> Budget {
        let sig_e = self.alpha_q / TWO_PI.sqrt();
        let sig_p = self.s_prime_expected() / TWO_PI.sqrt();
        let sig_x = self.s_extract / TWO_PI.sqrt();
        let (m_bar, nk) = (self.m_bar as f64, self.nk() as f64);
        let var = sig_x * sig_x * (m_bar * sig_e * sig_e + nk * sig_p * sig_p) + sig_p * sig_p;
        self.budget(var.sqrt())
    }

    /// Budget for the same quantity after one re-encryption.
    pub fn level1_budget(&self) -> Budget {
        let sig_e = self.alpha_q / TWO_PI.sqrt();
        let sig_p = self.s_prime_expected() / TWO_PI.sqrt();
        let sig_x = self.s_extract / TWO_PI.sqrt();
        let sig_1 = self.s_rk1 / TWO_PI.sqrt();
        let sig_2 = self.s_rk2 / TWO_PI.sqrt();
        let (m_bar, nk) = (self.m_bar as f64, self.nk() as f64);
        let e_sq = m_bar * sig_e * sig_e + 2.0 * nk * sig_p * sig_p;
        let var = sig_x * sig_x * (m_bar * sig_e * sig_e + nk * sig_1 * sig_1 * e_sq) + sig_2 * sig_2 * e_sq;
        self.budget(var.sqrt())
    }

    pub fn supports_reencryption(&self) -> bool {
        self.level1_budget().ok()
    }

    /// Level-1 scale factor `s_rk2·√(m̄ + 2nk)·r`.
    pub fn level1_scale(&self) -> f64 {
        self.s_rk2 * ((self.m_bar + 2 * self.nk()) as f64).sqrt() * self.r
    }

    pub fn thresholds(&self, level: u8) -> Thresholds {
        let (m_bar, nk) = (self.m_bar as f64, self.nk() as f64);
        let base = Thresholds {
            e0_bar: self.alpha_q * m_bar.sqrt(),
            e0_prime: self.alpha_q * (2.0 * m_bar * nk).sqrt() * self.r,
            e_j: self.alpha_q * (2.0 * m_bar * nk).sqrt() * self.r,
        };
        if level == 0 {
            base
        } else {
            let f = self.level1_scale();
            Thresholds {
                e0_bar: base.e0_bar * f,
                e0_prime: base.e0_prime * f,
                e_j: base.e_j * f,
            }
        }
    }

    /// Re-derives the parameters from `(n, q, m̄, C)` and compares.
    pub fn is_consistent(&self) -> bool {
        matches!(
            params_with(self.n, self.q, Some(self.m_bar), self.error_rate_constant),
            Ok(p) if p == *self
        )
    }
}
