//! The binary gadget `G = I_n ⊗ (1, 2, …, 2^{k-1})` over `Z_q`.
//!
//! `S` is the standard short basis of `Λ⊥(g)`, and `E = q·S^{-t}` is the
//! matching basis of `Λ(gᵗ)`. Both are applied block-diagonally across the
//! `n` coordinates. A vector `x` lies in `Λ(Gᵗ)` exactly when `Sᵗx ≡ 0 (mod q)`
//! in every block, which is the test both inversion and decoding rely on.

use thiserror::Error;

use crate::modmath::{self, center, IntMatrix, ModMatrix};
use crate::sampler::{sample_z, GaussParam, Rng, SamplerError};

/// Largest supported modulus (exclusive) for gadget arithmetic.
pub const MAX_GADGET_MODULUS: u64 = 1 << 52;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("invalid gadget modulus {0}")]
    InvalidModulus(u64),
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("inversion failed: {0}")]
    InversionFailed(String),
    #[error("not a valid message encoding")]
    DecodeFailed,
    #[error(transparent)]
    Sampler(#[from] SamplerError),
}

#[derive(Debug, Clone)]
pub struct Gadget {
    n: usize,
    q: u64,
    k: usize,
    /// Binary digits of `q`, least significant first.
    q_bits: Vec<i64>,
    s_block: IntMatrix,
    e_block: IntMatrix,
    /// Gram–Schmidt vectors of the columns of `S`, in column order.
    gs: Vec<Vec<f64>>,
    gs_sq_norms: Vec<f64>,
}

impl PartialEq for Gadget {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.q == other.q
    }
}

impl Eq for Gadget {}

/// `k = ⌈log₂ q⌉`.
pub fn bit_length(q: u64) -> usize {
    (64 - (q - 1).leading_zeros()) as usize
}

impl Gadget {
    pub fn new(n: usize, q: u64) -> Result<Self, GadgetError> {
        if !(3..MAX_GADGET_MODULUS).contains(&q) || !modmath::is_prime(q) || n == 0 {
            return Err(GadgetError::InvalidModulus(q));
        }
        let k = bit_length(q);
        let q_bits: Vec<i64> = (0..k).map(|j| ((q >> j) & 1) as i64).collect();

        let mut s_block = IntMatrix::zeros(k, k);
        for i in 0..k - 1 {
            s_block.set(i, i, 2);
            s_block.set(i + 1, i, -1);
        }
        for (j, &bit) in q_bits.iter().enumerate() {
            s_block.set(j, k - 1, bit);
        }

        let mut gadget = Gadget {
            n,
            q,
            k,
            q_bits,
            s_block,
            e_block: IntMatrix::zeros(k, k),
            gs: Vec::new(),
            gs_sq_norms: Vec::new(),
        };

        // column j of q·S^{-t} solves Sᵗx = q·e_j
        let mut cols = Vec::with_capacity(k);
        for j in 0..k {
            let mut c = vec![0i128; k];
            c[j] = q as i128;
            let x = gadget.solve_st(&c).expect("det S = q, so q·S^{-t} is integral");
            cols.push(x.into_iter().map(|v| v as i64).collect::<Vec<_>>());
        }
        gadget.e_block = IntMatrix::from_columns(k, &cols).expect("square");

        let basis: Vec<Vec<f64>> = (0..k)
            .map(|j| gadget.s_block.col(j).into_iter().map(|x| x as f64).collect())
            .collect();
        let mut gs: Vec<Vec<f64>> = Vec::with_capacity(k);
        for b in &basis {
            let mut v = b.clone();
            for u in &gs {
                let mu = dot(b, u) / dot(u, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= mu * y);
            }
            gs.push(v);
        }
        gadget.gs_sq_norms = gs.iter().map(|v| dot(v, v)).collect();
        gadget.gs = gs;
        Ok(gadget)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Width `nk` of `G`.
    pub fn width(&self) -> usize {
        self.n * self.k
    }

    /// The `k × k` basis `S` of `Λ⊥(g)`.
    pub fn s_block(&self) -> &IntMatrix {
        &self.s_block
    }

    /// The `k × k` basis `q·S^{-t}` of `Λ(gᵗ)`.
    pub fn e_block(&self) -> &IntMatrix {
        &self.e_block
    }

    /// `I_n ⊗ S`.
    pub fn s_matrix(&self) -> IntMatrix {
        self.block_diag(&self.s_block)
    }

    /// `I_n ⊗ q·S^{-t}`, a basis of `Λ(Gᵗ)`.
    pub fn e_matrix(&self) -> IntMatrix {
        self.block_diag(&self.e_block)
    }

    fn block_diag(&self, b: &IntMatrix) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.width(), self.width());
        for i in 0..self.n {
            out.set_block(i * self.k, i * self.k, b);
        }
        out
    }

    pub fn g_matrix(&self) -> ModMatrix {
        self.tagged(&ModMatrix::identity(self.n, self.q))
    }

    /// `H·G` for an `n × n` tag `H`: column `ik + j` is `2^j` times column `i` of `H`.
    pub fn tagged(&self, h: &ModMatrix) -> ModMatrix {
        assert_eq!((h.rows(), h.cols()), (self.n, self.n), "tag shape");
        let q = self.q;
        ModMatrix::from_fn(self.n, self.width(), q, |r, c| {
            let (i, j) = (c / self.k, c % self.k);
            modmath::mul_mod(h.get(r, i), (1u64 << j) % q, q)
        })
    }

    /// `Gᵗ s mod q`.
    pub fn gt_mul(&self, s: &[u64]) -> Vec<u64> {
        assert_eq!(s.len(), self.n);
        let mut out = Vec::with_capacity(self.width());
        for &si in s {
            for j in 0..self.k {
                out.push(modmath::mul_mod(si % self.q, (1u64 << j) % self.q, self.q));
            }
        }
        out
    }

    /// `G x mod q` for an integer vector.
    pub fn g_mul(&self, x: &[i64]) -> Vec<u64> {
        assert_eq!(x.len(), self.width());
        x.chunks(self.k)
            .map(|block| {
                let acc: i128 = block.iter().enumerate().map(|(j, &v)| (v as i128) << j).sum();
                acc.rem_euclid(self.q as i128) as u64
            })
            .collect()
    }

    /// Largest Gram–Schmidt norm of `S`.
    pub fn gs_norm(&self) -> f64 {
        self.gs_sq_norms.iter().cloned().fold(0.0, f64::max).sqrt()
    }

    /// An ∞-norm bound under which every error is recovered by [`Self::g_invert`].
    pub fn recovery_bound_inf(&self) -> u64 {
        let popcount = self.q_bits.iter().filter(|&&b| b == 1).count() as u64;
        (self.q - 1) / (2 * popcount.max(3))
    }

    /// Solves `Sᵗx = c` over the integers for one block.
    fn solve_st(&self, c: &[i128]) -> Option<Vec<i128>> {
        let k = self.k;
        // rows i < k-1 give x_{i+1} = 2x_i - c_i, so x_j = 2^j x_0 - d_j
        let mut d = vec![0i128; k];
        for j in 1..k {
            d[j] = 2 * d[j - 1] + c[j - 1];
        }
        let num: i128 = c[k - 1] + (0..k).map(|j| self.q_bits[j] as i128 * d[j]).sum::<i128>();
        let q = self.q as i128;
        if num % q != 0 {
            return None;
        }
        let x0 = num / q;
        Some((0..k).map(|j| (x0 << j) - d[j]).collect())
    }

    /// `Sᵗx` for one block, over the integers.
    fn st_mul(&self, x: &[i128]) -> Vec<i128> {
        let k = self.k;
        let mut out: Vec<i128> = (0..k - 1).map(|i| 2 * x[i] - x[i + 1]).collect();
        out.push((0..k).map(|j| self.q_bits[j] as i128 * x[j]).sum());
        out
    }

    /// Whether `x ∈ Λ(Gᵗ)`.
    pub fn in_dual_lattice(&self, x: &[i64]) -> bool {
        assert_eq!(x.len(), self.width());
        let q = self.q as i128;
        x.chunks(self.k).all(|block| {
            let wide: Vec<i128> = block.iter().map(|&v| v as i128).collect();
            self.st_mul(&wide).iter().all(|v| v % q == 0)
        })
    }

    /// LWE inversion for `G`: finds `(s, e)` with `b = Gᵗs + e (mod q)`.
    ///
    /// Per block, `e` is the unique vector with `Sᵗe ≡ Sᵗb (mod q)` and `Sᵗe`
    /// centered in `[-(q-1)/2, (q-1)/2]`, i.e. the representative of `b` in
    /// the parallelepiped `P_{1/2}(q·S^{-t})`. Errors in that region are
    /// recovered exactly; for any other input the output is still a valid
    /// decomposition.
    pub fn g_invert(&self, b: &[u64]) -> Result<(Vec<u64>, Vec<i64>), GadgetError> {
        if b.len() != self.width() {
            return Err(GadgetError::LengthMismatch {
                expected: self.width(),
                got: b.len(),
            });
        }
        let q = self.q;
        let mut s = Vec::with_capacity(self.n);
        let mut e = Vec::with_capacity(self.width());
        for block in b.chunks(self.k) {
            let wide: Vec<i128> = block.iter().map(|&v| (v % q) as i128).collect();
            let c: Vec<i128> = self
                .st_mul(&wide)
                .into_iter()
                .map(|v| center(v.rem_euclid(q as i128) as u64, q) as i128)
                .collect();
            let eb = self
                .solve_st(&c)
                .ok_or_else(|| GadgetError::InversionFailed("centered syndrome has no integral preimage".into()))?;
            let e0 = eb[0];
            s.push(((block[0] % q) as i128 - e0).rem_euclid(q as i128) as u64);
            for v in eb {
                e.push(i64::try_from(v).map_err(|_| GadgetError::InversionFailed("error overflow".into()))?);
            }
        }
        Ok((s, e))
    }

    /// [`Self::g_invert`], failing if the recovered error exceeds `bound_inf`.
    pub fn g_invert_bounded(&self, b: &[u64], bound_inf: u64) -> Result<(Vec<u64>, Vec<i64>), GadgetError> {
        let (s, e) = self.g_invert(b)?;
        if e.iter().any(|x| x.unsigned_abs() > bound_inf) {
            return Err(GadgetError::InversionFailed(format!(
                "recovered error exceeds ∞-norm bound {bound_inf}"
            )));
        }
        Ok((s, e))
    }

    /// Binary decomposition: the unique `x ∈ {0,1}^{nk}` with `Gx = v`.
    pub fn decompose(&self, v: &[u64]) -> Vec<i64> {
        assert_eq!(v.len(), self.n);
        v.iter()
            .flat_map(|&vi| (0..self.k).map(move |j| ((vi >> j) & 1) as i64))
            .collect()
    }

    /// Samples `x` from `D_{Λ_v⊥(G), s}` by randomized nearest-plane on `S`.
    ///
    /// Requires `s ≥ ‖S̃‖·r` for the output to be close to the ideal
    /// distribution; smaller widths still return a valid coset element.
    pub fn sample_g_coset(&self, v: &[u64], s: f64, rng: &mut Rng) -> Result<Vec<i64>, GadgetError> {
        if v.len() != self.n {
            return Err(GadgetError::LengthMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let k = self.k;
        let mut out = Vec::with_capacity(self.width());
        for &vi in v {
            let x0: Vec<i64> = (0..k).map(|j| (((vi % self.q) >> j) & 1) as i64).collect();
            // lattice point y ← D_{Λ⊥(g), s, x0}; output x0 - y
            let mut c: Vec<f64> = x0.iter().map(|&x| x as f64).collect();
            let mut y = vec![0i64; k];
            for i in (0..k).rev() {
                let ci = dot(&c, &self.gs[i]) / self.gs_sq_norms[i];
                let si = s / self.gs_sq_norms[i].sqrt();
                let z = sample_z(GaussParam::centered_at(si, ci), rng)?;
                if z != 0 {
                    for (row, yr) in y.iter_mut().enumerate() {
                        let b = self.s_block.get(row, i);
                        *yr += z * b;
                        c[row] -= z as f64 * b as f64;
                    }
                }
            }
            out.extend(x0.iter().zip(&y).map(|(a, b)| a - b));
        }
        Ok(out)
    }

    /// `E·m` for a bit vector `m` of length `nk`.
    pub fn encode_msg(&self, m: &[u8]) -> Result<Vec<i64>, GadgetError> {
        if m.len() != self.width() {
            return Err(GadgetError::LengthMismatch {
                expected: self.width(),
                got: m.len(),
            });
        }
        let k = self.k;
        let mut out = Vec::with_capacity(self.width());
        for block in m.chunks(k) {
            let bits: Vec<i64> = block.iter().map(|&b| (b & 1) as i64).collect();
            out.extend(self.e_block.mul_vec(&bits).expect("block length k"));
        }
        Ok(out)
    }

    /// Inverse of [`Self::encode_msg`] modulo `2Λ(Gᵗ)` and `2q`.
    ///
    /// Lifts `w` to `[0, 2q)`, computes `E^{-1}w = Sᵗw / q`, and fails unless the
    /// result is integral; the message is its parity.
    pub fn decode_msg(&self, w: &[u64]) -> Result<Vec<u8>, GadgetError> {
        if w.len() != self.width() {
            return Err(GadgetError::LengthMismatch {
                expected: self.width(),
                got: w.len(),
            });
        }
        let q = self.q as i128;
        let mut m = Vec::with_capacity(self.width());
        for block in w.chunks(self.k) {
            let wide: Vec<i128> = block.iter().map(|&v| (v as i128).rem_euclid(2 * q)).collect();
            for y in self.st_mul(&wide) {
                if y % q != 0 {
                    return Err(GadgetError::DecodeFailed);
                }
                m.push((y / q).rem_euclid(2) as u8);
            }
        }
        Ok(m)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modmath::{reduce_i64, solve_mod_prime};
    use crate::sampler::smoothing_r;
    use crate::sampler::stats::chi_square_p;
    use rand::Rng as _;

    fn det3(m: &IntMatrix) -> i64 {
        let g = |i, j| m.get(i, j);
        g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
    }

    fn det_int(m: &IntMatrix) -> i128 {
        // fraction-free Bareiss elimination
        let n = m.rows();
        let mut a: Vec<Vec<i128>> = (0..n).map(|i| m.row(i).iter().map(|&x| x as i128).collect()).collect();
        let mut sign = 1;
        let mut prev = 1i128;
        for c in 0..n {
            if a[c][c] == 0 {
                let Some(p) = (c + 1..n).find(|&i| a[i][c] != 0) else {
                    return 0;
                };
                a.swap(c, p);
                sign = -sign;
            }
            for i in c + 1..n {
                for j in c + 1..n {
                    a[i][j] = (a[i][j] * a[c][c] - a[i][c] * a[c][j]) / prev;
                }
            }
            prev = a[c][c];
        }
        sign * a[n - 1][n - 1]
    }

    fn g_row(g: &Gadget) -> Vec<i64> {
        (0..g.k()).map(|j| 1i64 << j).collect()
    }

    #[test]
    fn basis_for_q5() {
        let g = Gadget::new(1, 5).unwrap();
        assert_eq!(g.k(), 3);
        let s = g.s_block();
        assert_eq!(s.col(0), vec![2, -1, 0]);
        assert_eq!(s.col(1), vec![0, 2, -1]);
        assert_eq!(s.col(2), vec![1, 0, 1]);
        assert_eq!(det3(s), 5);
        for j in 0..3 {
            let v: i64 = g_row(&g).iter().zip(s.col(j)).map(|(a, b)| a * b).sum();
            assert_eq!(v.rem_euclid(5), 0);
        }
    }

    #[test]
    fn basis_for_q3() {
        let g = Gadget::new(1, 3).unwrap();
        assert_eq!(g.k(), 2);
        assert_eq!(g.s_block().col(0), vec![2, -1]);
        assert_eq!(g.s_block().col(1), vec![1, 1]);
        assert_eq!(det_int(g.s_block()), 3);
    }

    #[test]
    fn determinants_of_s_and_e() {
        for (n, q) in [(1u64, 3u64), (1, 5), (2, 13), (2, 97)] {
            let g = Gadget::new(n as usize, q).unwrap();
            assert_eq!(det_int(g.s_block()).abs(), q as i128);
            // E = q·S^{-t} per block, so det = q^k / q = q^{k-1}; E is block diagonal
            let de = det_int(g.e_block()).abs();
            assert_eq!(de, (q as i128).pow((g.k() - 1) as u32));
            if n * g.k() as u64 <= 8 {
                assert_eq!(det_int(&g.e_matrix()).abs(), de.pow(n as u32));
            }
        }
    }

    #[test]
    fn g_times_s_is_zero() {
        let g = Gadget::new(3, 97).unwrap();
        let gs = g.g_matrix().mul_int(&g.s_matrix()).unwrap();
        assert!(gs.is_zero());
    }

    #[test]
    fn e_columns_are_in_dual_lattice() {
        for (n, q) in [(1, 5), (2, 13), (2, 1073741827)] {
            let g = Gadget::new(n, q).unwrap();
            let e = g.e_matrix();
            let gt = g.g_matrix().transpose();
            for j in 0..g.width() {
                let col = e.col(j);
                assert!(g.in_dual_lattice(&col));
                let v: Vec<u64> = col.iter().map(|&x| reduce_i64(x, q)).collect();
                assert!(solve_mod_prime(&gt, &v).is_ok(), "column {j} mod {q}");
            }
            // Sᵗ·E = q·I exactly
            let st_e = {
                let s = g.s_matrix();
                IntMatrix::from_fn(g.width(), g.width(), |i, j| {
                    (0..g.width()).map(|l| s.get(l, i) * e.get(l, j)).sum()
                })
            };
            assert_eq!(
                st_e,
                IntMatrix::from_fn(g.width(), g.width(), |i, j| if i == j { q as i64 } else { 0 })
            );
        }
    }

    #[test]
    fn invert_exact_points() {
        let g = Gadget::new(4, 65537).unwrap();
        let mut rng = Rng::seed_from_u64(1);
        for _ in 0..50 {
            let s: Vec<u64> = (0..4).map(|_| rng.random_range(0..65537)).collect();
            let (s2, e) = g.g_invert(&g.gt_mul(&s)).unwrap();
            assert_eq!(s2, s);
            assert!(e.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn invert_exhaustive_small() {
        let q = 5;
        let g = Gadget::new(1, q).unwrap();
        let half = (q as i128 - 1) / 2;
        let mut checked = 0;
        for s in 0..q {
            for a in -1..=1i64 {
                for b in -1..=1i64 {
                    for c in -1..=1i64 {
                        let e = [a, b, c];
                        let wide: Vec<i128> = e.iter().map(|&x| x as i128).collect();
                        if g.st_mul(&wide).iter().any(|v| v.abs() > half) {
                            continue;
                        }
                        let bvec: Vec<u64> = g
                            .gt_mul(&[s])
                            .iter()
                            .zip(&e)
                            .map(|(&x, &y)| reduce_i64(x as i64 + y, q))
                            .collect();
                        assert_eq!(g.g_invert(&bvec).unwrap(), (vec![s], e.to_vec()));
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > q as usize);
    }

    #[test]
    fn invert_random_within_bound() {
        let (n, q) = (2, 13);
        let g = Gadget::new(n, q).unwrap();
        let bound = (q / 10) as i64;
        let mut rng = Rng::seed_from_u64(2);
        for _ in 0..500 {
            let s: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
            let e: Vec<i64> = (0..g.width()).map(|_| rng.random_range(-bound..=bound)).collect();
            let b: Vec<u64> = g
                .gt_mul(&s)
                .iter()
                .zip(&e)
                .map(|(&x, &y)| reduce_i64(x as i64 + y, q))
                .collect();
            assert_eq!(g.g_invert(&b).unwrap(), (s, e));
        }
    }

    #[test]
    fn invert_is_self_consistent_on_garbage() {
        let g = Gadget::new(3, 1073741827).unwrap();
        let q = g.q();
        let mut rng = Rng::seed_from_u64(3);
        for _ in 0..200 {
            let b: Vec<u64> = (0..g.width()).map(|_| rng.random_range(0..q)).collect();
            let (s, e) = g.g_invert(&b).unwrap();
            let back: Vec<u64> = g
                .gt_mul(&s)
                .iter()
                .zip(&e)
                .map(|(&x, &y)| reduce_i64(x as i64 + y, q))
                .collect();
            assert_eq!(back, b);
        }
    }

    #[test]
    fn bounded_invert_rejects_large_errors() {
        let g = Gadget::new(1, 65537).unwrap();
        let mut b = g.gt_mul(&[7]);
        b[3] = (b[3] + 100) % 65537;
        assert!(g.g_invert_bounded(&b, 50).is_err());
        assert_eq!(g.g_invert_bounded(&b, 100).unwrap().0, vec![7]);
    }

    #[test]
    fn coset_samples_hit_the_coset() {
        let g = Gadget::new(3, 1073741827).unwrap();
        let q = g.q();
        let mut rng = Rng::seed_from_u64(4);
        let s = 6f64.sqrt() * smoothing_r(3);
        let mut ok = 0;
        let trials = 300;
        for _ in 0..trials {
            let v: Vec<u64> = (0..3).map(|_| rng.random_range(0..q)).collect();
            let x = g.sample_g_coset(&v, s, &mut rng).unwrap();
            assert_eq!(g.g_mul(&x), v);
            let norm = x.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt();
            if norm <= 1.1 * s * (g.width() as f64).sqrt() {
                ok += 1;
            }
        }
        assert!(ok * 100 >= 99 * trials);
    }

    #[test]
    fn zero_coset_is_symmetric() {
        let g = Gadget::new(2, 13).unwrap();
        let s = 20.0;
        let mut rng = Rng::seed_from_u64(5);
        let draws = 10_000;
        let w = g.width();
        let mut sum = vec![0f64; w];
        let mut sq = vec![0f64; w];
        for _ in 0..draws {
            let x = g.sample_g_coset(&[0, 0], s, &mut rng).unwrap();
            for i in 0..w {
                sum[i] += x[i] as f64;
                sq[i] += (x[i] * x[i]) as f64;
            }
        }
        for i in 0..w {
            let mean = sum[i] / draws as f64;
            let var = sq[i] / draws as f64 - mean * mean;
            let se = (var / draws as f64).sqrt();
            assert!(mean.abs() <= 5.0 * se, "coordinate {i}: mean {mean}, se {se}");
        }
    }

    #[test]
    fn coset_distribution_matches_enumeration() {
        let (q, s) = (3u64, 6.0);
        let g = Gadget::new(1, q).unwrap();
        let mut rng = Rng::seed_from_u64(6);
        for v in 0..q {
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for a in -30i64..=30 {
                for b in -30i64..=30 {
                    if (a + 2 * b).rem_euclid(q as i64) as u64 == v {
                        points.push((a, b));
                        weights.push((-std::f64::consts::PI * ((a * a + b * b) as f64) / (s * s)).exp());
                    }
                }
            }
            let z: f64 = weights.iter().sum();
            let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
            let mut counts = vec![0u64; points.len()];
            let index: std::collections::HashMap<(i64, i64), usize> =
                points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
            for _ in 0..100_000 {
                let x = g.sample_g_coset(&[v], s, &mut rng).unwrap();
                counts[index[&(x[0], x[1])]] += 1;
            }
            let p = chi_square_p(&counts, &probs);
            assert!(p > 0.001, "v = {v}: p = {p}");
        }
    }

    #[test]
    fn encode_basics() {
        let g = Gadget::new(2, 13).unwrap();
        assert!(g.encode_msg(&[0; 8]).unwrap().iter().all(|&x| x == 0));
        let e = g.e_matrix();
        for j in 0..8 {
            let mut m = vec![0u8; 8];
            m[j] = 1;
            assert_eq!(g.encode_msg(&m).unwrap(), e.col(j));
        }
        assert!(g.encode_msg(&[0; 3]).is_err());
    }

    #[test]
    fn encodings_are_distinct_mod_twice_dual() {
        let g = Gadget::new(1, 3).unwrap();
        let msgs: Vec<Vec<u8>> = (0..4u8).map(|x| vec![x & 1, (x >> 1) & 1]).collect();
        for a in &msgs {
            for b in &msgs {
                if a == b {
                    continue;
                }
                let diff: Vec<i64> = g
                    .encode_msg(a)
                    .unwrap()
                    .iter()
                    .zip(g.encode_msg(b).unwrap())
                    .map(|(x, y)| x - y)
                    .collect();
                // diff ∈ 2Λ(Gᵗ) iff diff is even and diff/2 ∈ Λ(Gᵗ)
                let in_twice = diff.iter().all(|x| x % 2 == 0)
                    && g.in_dual_lattice(&diff.iter().map(|x| x / 2).collect::<Vec<_>>());
                assert!(!in_twice);
            }
        }
    }

    #[test]
    fn decode_inverts_encode_exhaustively() {
        for q in [3u64, 5] {
            let g = Gadget::new(1, q).unwrap();
            for x in 0..(1u32 << g.k()) {
                let m: Vec<u8> = (0..g.k()).map(|j| ((x >> j) & 1) as u8).collect();
                let w: Vec<u64> = g
                    .encode_msg(&m)
                    .unwrap()
                    .iter()
                    .map(|&v| reduce_i64(v, 2 * q))
                    .collect();
                assert_eq!(g.decode_msg(&w).unwrap(), m);
            }
        }
    }

    #[test]
    fn decode_ignores_twice_dual_shifts() {
        let g = Gadget::new(1, 5).unwrap();
        let q = 5;
        let mut rng = Rng::seed_from_u64(7);
        for _ in 0..500 {
            let m: Vec<u8> = (0..3).map(|_| rng.random_range(0..2)).collect();
            let y = rng.random_range(0..q);
            let lam = g.gt_mul(&[y]);
            let w: Vec<u64> = g
                .encode_msg(&m)
                .unwrap()
                .iter()
                .zip(&lam)
                .map(|(&e, &l)| reduce_i64(e + 2 * l as i64 + 2 * q as i64 * rng.random_range(-3..=3), 2 * q))
                .collect();
            assert_eq!(g.decode_msg(&w).unwrap(), m);
        }
    }

    #[test]
    fn decode_checks_integrality() {
        let g = Gadget::new(1, 5).unwrap();
        // E^{-1}(1,0,0) = Sᵗe_0 / 5 = (2, 0, 1)/5 is not integral
        assert_eq!(g.decode_msg(&[1, 0, 0]), Err(GadgetError::DecodeFailed));
        // E's first column decodes to e_0
        let col: Vec<u64> = g.e_block().col(0).iter().map(|&x| reduce_i64(x, 10)).collect();
        assert_eq!(g.decode_msg(&col).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(Gadget::new(1, 2).is_err());
        assert!(Gadget::new(1, 15).is_err());
        assert!(Gadget::new(1, (1 << 52) + 21).is_err());
    }
}
