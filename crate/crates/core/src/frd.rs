//! Full-rank-difference encoding of identities.
//!
//! An identity `id ∈ Z_q^n \ {0}` is read as the polynomial
//! `id(X) = Σ id_j X^j`, and `H_id` is the matrix of multiplication by `id(X)`
//! in the field `Z_q[X]/(f)` for a monic irreducible `f` of degree `n`. The
//! map is linear, and every nonzero field element is invertible, so every
//! `H_id` and every difference `H_a − H_b = H_{a−b}` (for `a ≠ b`) is invertible.

use rand::Rng as _;
use thiserror::Error;

use crate::modmath::{self, inv_mod, mul_mod, ModMatrix};
use crate::sampler::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrdError {
    #[error("identity must be nonzero")]
    ZeroIdentity,
    #[error("identity has {got} coordinates, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
}

/// A nonzero vector in `Z_q^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Identity {
    coeffs: Vec<u64>,
}

impl Identity {
    pub fn new(coeffs: Vec<u64>, q: u64) -> Result<Self, FrdError> {
        let coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % q).collect();
        if coeffs.iter().all(|&c| c == 0) {
            return Err(FrdError::ZeroIdentity);
        }
        Ok(Identity { coeffs })
    }

    /// Uniformly random nonzero identity.
    pub fn random(n: usize, q: u64, rng: &mut Rng) -> Self {
        loop {
            let coeffs = (0..n).map(|_| rng.random_range(0..q)).collect();
            if let Ok(id) = Identity::new(coeffs, q) {
                return id;
            }
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
}

/// The modulus polynomial `f` defining `Z_q[X]/(f)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrdContext {
    n: usize,
    q: u64,
    /// Low-order coefficients `f_0 … f_{n-1}`; `f` is monic of degree `n`.
    f: Vec<u64>,
}

impl FrdContext {
    /// Searches from a start point derived from `seed`.
    pub fn new(n: usize, q: u64, seed: [u8; 32]) -> Result<Self, FrdError> {
        let mut rng = Rng::from_seed(seed);
        let start: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
        Self::with_start(n, q, &start)
    }

    /// First irreducible monic polynomial at or after `start`, enumerating
    /// low-order coefficient vectors as base-`q` numbers with `f_0` least
    /// significant.
    pub fn with_start(n: usize, q: u64, start: &[u64]) -> Result<Self, FrdError> {
        if !modmath::is_prime(q) {
            return Err(FrdError::CompositeModulus(q));
        }
        if start.len() != n {
            return Err(FrdError::WrongLength {
                expected: n,
                got: start.len(),
            });
        }
        let mut f: Vec<u64> = start.iter().map(|c| c % q).collect();
        loop {
            if is_irreducible(&f, q) {
                return Ok(FrdContext { n, q, f });
            }
            // base-q increment
            for c in f.iter_mut() {
                *c += 1;
                if *c == q {
                    *c = 0;
                } else {
                    break;
                }
            }
        }
    }

    /// Rebuilds a context from stored coefficients, checking irreducibility.
    pub fn from_modulus(n: usize, q: u64, f: Vec<u64>) -> Option<Self> {
        (f.len() == n && modmath::is_prime(q) && f.iter().all(|&c| c < q) && is_irreducible(&f, q))
            .then_some(FrdContext { n, q, f })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Low-order coefficients of `f` (the leading 1 is implicit).
    pub fn modulus_poly(&self) -> &[u64] {
        &self.f
    }

    /// Matrix of multiplication by `id(X)`; column `j` holds `id(X)·X^j mod f`.
    ///
    /// Accepts any vector, including zero, so differences can be encoded.
    pub fn encode_raw(&self, id: &[u64]) -> Result<ModMatrix, FrdError> {
        if id.len() != self.n {
            return Err(FrdError::WrongLength {
                expected: self.n,
                got: id.len(),
            });
        }
        let q = self.q;
        let mut col: Vec<u64> = id.iter().map(|c| c % q).collect();
        let mut h = ModMatrix::zeros(self.n, self.n, q);
        for j in 0..self.n {
            for (i, &c) in col.iter().enumerate() {
                h.set(i, j, c);
            }
            col = mul_by_x(&col, &self.f, q);
        }
        Ok(h)
    }

    pub fn encode(&self, id: &Identity) -> Result<ModMatrix, FrdError> {
        self.encode_raw(id.coeffs())
    }
}

/// `X·a mod f` for `deg a < n` and monic `f`.
fn mul_by_x(a: &[u64], f: &[u64], q: u64) -> Vec<u64> {
    let n = a.len();
    let top = a[n - 1];
    let mut out = vec![0u64; n];
    for i in (1..n).rev() {
        out[i] = a[i - 1];
    }
    // X^n ≡ −Σ f_i X^i
    for i in 0..n {
        let sub = mul_mod(top, f[i], q);
        out[i] = (out[i] + q - sub) % q;
    }
    out
}

/// Dense polynomial helpers; vectors are low-order first with no trailing zeros.
mod poly {
    use super::*;

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    /// `a·b mod f` where `f` is monic with low coefficients `f_low`.
    pub fn mul_mod_f(a: &[u64], b: &[u64], f_low: &[u64], q: u64) -> Vec<u64> {
        let n = f_low.len();
        let mut prod = vec![0u64; (a.len() + b.len()).max(1)];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mul_mod(x, y, q)) % q;
            }
        }
        for d in (n..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for i in 0..n {
                let sub = mul_mod(c, f_low[i], q);
                prod[d - n + i] = (prod[d - n + i] + q - sub) % q;
            }
        }
        prod.truncate(n);
        trim(prod)
    }

    pub fn pow_mod_f(base: &[u64], mut e: u64, f_low: &[u64], q: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = base.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod_f(&acc, &b, f_low, q);
            }
            b = mul_mod_f(&b, &b, f_low, q);
            e >>= 1;
        }
        acc
    }

    /// Remainder of `a` divided by `b` (`b` nonzero).
    pub fn rem(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let b = trim(b.to_vec());
        let db = b.len() - 1;
        let lead_inv = inv_mod(b[db], q).expect("prime modulus");
        while a.len() > db {
            let da = a.len() - 1;
            let c = mul_mod(a[da], lead_inv, q);
            for i in 0..=db {
                let sub = mul_mod(c, b[i], q);
                a[da - db + i] = (a[da - db + i] + q - sub) % q;
            }
            a = trim(a);
        }
        a
    }

    pub fn gcd(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
        let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
        while !b.is_empty() {
            let r = rem(&a, &b, q);
            a = b;
            b = r;
        }
        a
    }
}

/// Whether the monic polynomial `X^n + Σ f_low[i] X^i` is irreducible over `Z_q`.
///
/// A reducible polynomial of degree `n` has an irreducible factor of degree
/// `d ≤ n/2`, which divides `X^{q^d} − X`; so it suffices that
/// `gcd(X^{q^i} − X, f) = 1` for all `i ≤ n/2`.
pub fn is_irreducible(f_low: &[u64], q: u64) -> bool {
    let n = f_low.len();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let mut f_full = f_low.to_vec();
    f_full.push(1);
    let x = vec![0u64, 1];
    let mut frob = x.clone();
    for _ in 1..=n / 2 {
        frob = poly::pow_mod_f(&frob, q, f_low, q);
        let mut diff = frob.clone();
        diff.resize(2.max(diff.len()), 0);
        diff[1] = (diff[1] + q - 1) % q;
        let g = poly::gcd(&f_full, &diff, q);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::invert_mod;

    fn has_root(f_low: &[u64], q: u64) -> bool {
        (0..q).any(|x| {
            let mut acc = 1u64;
            for &c in f_low.iter().rev() {
                acc = (mul_mod(acc, x, q) + c) % q;
            }
            acc == 0
        })
    }

    /// Exhaustive factorization check: no monic factor of degree 1..=n/2.
    fn irreducible_by_trial_division(f_low: &[u64], q: u64) -> bool {
        let n = f_low.len();
        let mut f_full = f_low.to_vec();
        f_full.push(1);
        for d in 1..=n / 2 {
            for x in 0..q.pow(d as u32) {
                let mut g: Vec<u64> = (0..d).map(|i| (x / q.pow(i as u32)) % q).collect();
                g.push(1);
                if poly::rem(&f_full, &g, q).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn first_from_zero_at_n2_q5() {
        let ctx = FrdContext::with_start(2, 5, &[0, 0]).unwrap();
        assert_eq!(ctx.modulus_poly(), &[2, 0]);
        assert!(!has_root(&[2, 0], 5));
        // the earlier candidates X² and X² + 1 both have roots
        assert!(has_root(&[0, 0], 5) && has_root(&[1, 0], 5));
    }

    #[test]
    fn degree_one_always_works() {
        let ctx = FrdContext::with_start(1, 97, &[42]).unwrap();
        assert_eq!(ctx.modulus_poly(), &[42]);
        let h = ctx.encode_raw(&[5]).unwrap();
        assert_eq!(h.get(0, 0), 5);
    }

    #[test]
    fn gcd_with_frobenius_is_trivial() {
        let ctx = FrdContext::new(2, 5, [3; 32]).unwrap();
        let mut f = ctx.modulus_poly().to_vec();
        f.push(1);
        let mut xq = poly::pow_mod_f(&[0, 1], 5, ctx.modulus_poly(), 5);
        xq.resize(2, 0);
        xq[1] = (xq[1] + 4) % 5;
        assert_eq!(poly::gcd(&f, &xq, 5).len(), 1);
    }

    #[test]
    fn irreducibility_matches_trial_division() {
        for (n, q) in [(2usize, 5u64), (3, 3), (4, 3), (3, 5)] {
            for x in 0..q.pow(n as u32) {
                let f: Vec<u64> = (0..n).map(|i| (x / q.pow(i as u32)) % q).collect();
                assert_eq!(
                    is_irreducible(&f, q),
                    irreducible_by_trial_division(&f, q),
                    "{f:?} mod {q}"
                );
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = FrdContext::new(8, 1073741827, [7; 32]).unwrap();
        let b = FrdContext::new(8, 1073741827, [7; 32]).unwrap();
        assert_eq!(a, b);
        assert!(FrdContext::from_modulus(8, 1073741827, a.modulus_poly().to_vec()).is_some());
    }

    #[test]
    fn unit_and_zero_identities() {
        let ctx = FrdContext::new(4, 65537, [1; 32]).unwrap();
        assert_eq!(ctx.encode_raw(&[1, 0, 0, 0]).unwrap(), ModMatrix::identity(4, 65537));
        assert!(ctx.encode_raw(&[0; 4]).unwrap().is_zero());
        assert_eq!(Identity::new(vec![0, 0, 0, 0], 65537), Err(FrdError::ZeroIdentity));
    }

    #[test]
    fn exhaustive_full_rank_differences() {
        let ctx = FrdContext::with_start(2, 5, &[0, 0]).unwrap();
        let all: Vec<[u64; 2]> = (0..25).map(|x| [x % 5, x / 5]).collect();
        let mut count = 0;
        for a in &all {
            let ha = ctx.encode_raw(a).unwrap();
            if a != &[0, 0] {
                assert!(invert_mod(&ha).is_ok());
                count += 1;
            }
            for b in &all {
                let hb = ctx.encode_raw(b).unwrap();
                let sum: Vec<u64> = a.iter().zip(b).map(|(x, y)| (x + y) % 5).collect();
                assert_eq!(ha.add(&hb).unwrap(), ctx.encode_raw(&sum).unwrap());
                if a != b {
                    assert!(invert_mod(&ha.sub(&hb).unwrap()).is_ok());
                }
            }
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn multiplication_is_field_multiplication() {
        // H_a·H_b = H_{ab}: H_a applied to b's coefficients is a·b
        let ctx = FrdContext::new(4, 65537, [9; 32]).unwrap();
        let mut rng = Rng::seed_from_u64(3);
        let a = Identity::random(4, 65537, &mut rng);
        let b = Identity::random(4, 65537, &mut rng);
        let ha = ctx.encode(&a).unwrap();
        let hb = ctx.encode(&b).unwrap();
        let ab = ha.mul_vec(b.coeffs()).unwrap();
        assert_eq!(ha.mul(&hb).unwrap(), ctx.encode_raw(&ab).unwrap());
    }
}
