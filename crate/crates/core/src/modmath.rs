//! Exact linear algebra over `Z_q` for moduli below 2^62.
//!
//! [`ModMatrix`] stores canonical residues in `[0, q)`; [`IntMatrix`] stores
//! small signed integers (trapdoors, error terms, preimages). Products are
//! accumulated in 128-bit integers and reduced lazily, so no intermediate
//! result ever wraps.

use thiserror::Error;

/// Largest supported modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModMathError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("modulus {0} is out of range")]
    InvalidModulus(u64),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("linear system has no solution")]
    NoSolution,
}

pub fn is_prime(q: u64) -> bool {
    primal_check::miller_rabin(q)
}

/// Reduces a signed integer into `[0, q)`.
#[inline]
pub fn reduce_i64(x: i64, q: u64) -> u64 {
    (x as i128).rem_euclid(q as i128) as u64
}

/// Centered representative of `x mod q` in `(-q/2, q/2]`.
#[inline]
pub fn center(x: u64, q: u64) -> i64 {
    let x = x % q;
    if x > q / 2 {
        x as i64 - q as i64
    } else {
        x as i64
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Inverse in the field `Z_q`; `q` must be prime and `a` nonzero.
pub fn inv_mod(a: u64, q: u64) -> Option<u64> {
    let a = a % q;
    if a == 0 {
        return None;
    }
    // extended Euclid, valid for any modulus
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (q as i128, a as i128);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(q as i128) as u64)
}

/// Accumulator for sums of products of residues below 2^62.
struct Acc {
    q: u128,
    sum: u128,
}

impl Acc {
    #[inline]
    fn new(q: u64) -> Self {
        Acc { q: q as u128, sum: 0 }
    }

    #[inline]
    fn add_prod(&mut self, a: u64, b: u64) {
        self.sum += a as u128 * b as u128;
        if self.sum >> 126 != 0 {
            self.sum %= self.q;
        }
    }

    #[inline]
    fn finish(self) -> u64 {
        (self.sum % self.q) as u64
    }
}

/// Dense row-major matrix over `Z_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    data: Vec<u64>,
}

impl ModMatrix {
    pub fn zeros(rows: usize, cols: usize, modulus: u64) -> Self {
        assert!((2..MAX_MODULUS).contains(&modulus), "modulus out of range");
        ModMatrix {
            rows,
            cols,
            modulus,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut m = Self::zeros(n, n, modulus);
        for i in 0..n {
            m.data[i * n + i] = 1 % modulus;
        }
        m
    }

    /// Builds a matrix from row-major entries, reducing each one.
    pub fn from_vec(rows: usize, cols: usize, modulus: u64, data: Vec<u64>) -> Result<Self, ModMathError> {
        if !(2..MAX_MODULUS).contains(&modulus) {
            return Err(ModMathError::InvalidModulus(modulus));
        }
        if data.len() != rows * cols {
            return Err(ModMathError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.into_iter().map(|x| x % modulus).collect();
        Ok(ModMatrix {
            rows,
            cols,
            modulus,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, modulus: u64, mut f: impl FnMut(usize, usize) -> u64) -> Self {
        let mut m = Self::zeros(rows, cols, modulus);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j) % modulus;
            }
        }
        m
    }

    pub fn random<R: rand::Rng + ?Sized>(rows: usize, cols: usize, modulus: u64, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.random_range(0..modulus)).collect();
        ModMatrix {
            rows,
            cols,
            modulus,
            data,
        }
    }

    /// Reduces a signed integer matrix modulo `modulus`.
    pub fn from_int(m: &IntMatrix, modulus: u64) -> Self {
        ModMatrix {
            rows: m.rows,
            cols: m.cols,
            modulus,
            data: m.data.iter().map(|&x| reduce_i64(x, modulus)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.modulus;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.modulus, |i, j| self.get(j, i))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), ModMathError> {
        if self.rows != other.rows || self.cols != other.cols || self.modulus != other.modulus {
            return Err(ModMathError::DimensionMismatch(format!(
                "{}x{} mod {} vs {}x{} mod {}",
                self.rows, self.cols, self.modulus, other.rows, other.cols, other.modulus
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, ModMathError> {
        self.check_same_shape(other)?;
        let q = self.modulus;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| ((a as u128 + b as u128) % q as u128) as u64)
            .collect();
        Ok(self.with_data(data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ModMathError> {
        self.check_same_shape(other)?;
        let q = self.modulus;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| if a >= b { a - b } else { q - (b - a) })
            .collect();
        Ok(self.with_data(data))
    }

    pub fn neg(&self) -> Self {
        let q = self.modulus;
        let data = self.data.iter().map(|&a| if a == 0 { 0 } else { q - a }).collect();
        self.with_data(data)
    }

    fn with_data(&self, data: Vec<u64>) -> ModMatrix {
        ModMatrix {
            rows: self.rows,
            cols: self.cols,
            modulus: self.modulus,
            data,
        }
    }

    /// `self · other mod q`.
    pub fn mul(&self, other: &ModMatrix) -> Result<ModMatrix, ModMathError> {
        if self.cols != other.rows {
            return Err(ModMathError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let q = self.modulus;
        // reduce the right factor into our modulus when they differ
        let rhs: std::borrow::Cow<'_, [u64]> = if other.modulus == q {
            std::borrow::Cow::Borrowed(&other.data)
        } else {
            std::borrow::Cow::Owned(other.data.iter().map(|x| x % q).collect())
        };
        let mut out = ModMatrix::zeros(self.rows, other.cols, q);
        let mut accs: Vec<u128> = vec![0; other.cols];
        for i in 0..self.rows {
            accs.iter_mut().for_each(|a| *a = 0);
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let row = &rhs[l * other.cols..(l + 1) * other.cols];
                for (acc, &b) in accs.iter_mut().zip(row) {
                    *acc += a as u128 * b as u128;
                    if *acc >> 126 != 0 {
                        *acc %= q as u128;
                    }
                }
            }
            for (j, acc) in accs.iter().enumerate() {
                out.data[i * other.cols + j] = (acc % q as u128) as u64;
            }
        }
        Ok(out)
    }

    /// `self · other mod q` for a signed integer right factor.
    pub fn mul_int(&self, other: &IntMatrix) -> Result<ModMatrix, ModMathError> {
        self.mul(&ModMatrix::from_int(other, self.modulus))
    }

    /// `self · v mod q`.
    pub fn mul_vec(&self, v: &[u64]) -> Result<Vec<u64>, ModMathError> {
        if v.len() != self.cols {
            return Err(ModMathError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = Acc::new(self.modulus);
                for (&a, &b) in self.row(i).iter().zip(v) {
                    acc.add_prod(a, b % self.modulus);
                }
                acc.finish()
            })
            .collect())
    }

    /// `vᵗ · self mod q`, i.e. `selfᵗ · v`.
    pub fn vec_mul(&self, v: &[u64]) -> Result<Vec<u64>, ModMathError> {
        if v.len() != self.rows {
            return Err(ModMathError::DimensionMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let q = self.modulus;
        let mut accs = vec![0u128; self.cols];
        for (i, &a) in v.iter().enumerate() {
            let a = a % q;
            if a == 0 {
                continue;
            }
            for (acc, &b) in accs.iter_mut().zip(self.row(i)) {
                *acc += a as u128 * b as u128;
                if *acc >> 126 != 0 {
                    *acc %= q as u128;
                }
            }
        }
        Ok(accs.into_iter().map(|a| (a % q as u128) as u64).collect())
    }

    pub fn hconcat(parts: &[&ModMatrix]) -> Result<ModMatrix, ModMathError> {
        let first = parts
            .first()
            .ok_or_else(|| ModMathError::DimensionMismatch("empty concatenation".into()))?;
        let (rows, q) = (first.rows, first.modulus);
        if parts.iter().any(|p| p.rows != rows || p.modulus != q) {
            return Err(ModMathError::DimensionMismatch("row counts differ in hconcat".into()));
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = ModMatrix::zeros(rows, cols, q);
        for i in 0..rows {
            let mut off = 0;
            for p in parts {
                out.data[i * cols + off..i * cols + off + p.cols].copy_from_slice(p.row(i));
                off += p.cols;
            }
        }
        Ok(out)
    }

    /// Columns `[start, start + len)`.
    pub fn col_range(&self, start: usize, len: usize) -> ModMatrix {
        assert!(start + len <= self.cols);
        Self::from_fn(self.rows, len, self.modulus, |i, j| self.get(i, start + j))
    }

    /// Rank over the field `Z_q` (prime modulus).
    pub fn rank(&self) -> Result<usize, ModMathError> {
        require_prime(self.modulus)?;
        let mut work = self.clone();
        Ok(work.row_reduce(self.cols).len())
    }

    /// Reduces the leading `pivot_cols` columns to reduced row echelon form in
    /// place and returns the pivot columns. Pivots are the first nonzero entry
    /// scanning rows from the lowest index.
    fn row_reduce(&mut self, pivot_cols: usize) -> Vec<usize> {
        let q = self.modulus;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..pivot_cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = inv_mod(self.get(r, c), q).expect("nonzero pivot in a field");
            for j in 0..self.cols {
                let v = mul_mod(self.get(r, j), inv, q);
                self.data[r * self.cols + j] = v;
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let sub = mul_mod(f, self.get(r, j), q);
                    let cur = self.get(i, j);
                    self.data[i * self.cols + j] = if cur >= sub { cur - sub } else { q - (sub - cur) };
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

fn require_prime(q: u64) -> Result<(), ModMathError> {
    if is_prime(q) {
        Ok(())
    } else {
        Err(ModMathError::CompositeModulus(q))
    }
}

/// Solves `a · s = v (mod q)` over the field `Z_q`.
///
/// Returns one solution (free variables set to zero) or
/// [`ModMathError::NoSolution`] when `v` is outside the column space of `a`.
pub fn solve_mod_prime(a: &ModMatrix, v: &[u64]) -> Result<Vec<u64>, ModMathError> {
    require_prime(a.modulus)?;
    if v.len() != a.rows {
        return Err(ModMathError::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            v.len(),
            a.rows
        )));
    }
    let q = a.modulus;
    let aug_col = ModMatrix::from_vec(a.rows, 1, q, v.to_vec())?;
    let mut aug = ModMatrix::hconcat(&[a, &aug_col])?;
    let pivots = aug.row_reduce(a.cols);
    // rows below the pivots must have a zero right-hand side
    if (pivots.len()..a.rows).any(|i| aug.get(i, a.cols) != 0) {
        return Err(ModMathError::NoSolution);
    }
    let mut s = vec![0u64; a.cols];
    for (r, &c) in pivots.iter().enumerate() {
        s[c] = aug.get(r, a.cols);
    }
    Ok(s)
}

/// Inverse of a square matrix over the field `Z_q`.
pub fn invert_mod(h: &ModMatrix) -> Result<ModMatrix, ModMathError> {
    if h.rows != h.cols {
        return Err(ModMathError::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            h.rows, h.cols
        )));
    }
    require_prime(h.modulus)?;
    let n = h.rows;
    let id = ModMatrix::identity(n, h.modulus);
    let mut aug = ModMatrix::hconcat(&[h, &id])?;
    let pivots = aug.row_reduce(n);
    if pivots.len() < n {
        return Err(ModMathError::NotInvertible);
    }
    Ok(aug.col_range(n, n))
}

/// Dense row-major matrix of signed integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self, ModMathError> {
        if data.len() != rows * cols {
            return Err(ModMathError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<i64>]) -> Result<Self, ModMathError> {
        if columns.iter().any(|c| c.len() != rows) {
            return Err(ModMathError::DimensionMismatch("ragged columns".into()));
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn max_abs(&self) -> i64 {
        self.data.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    /// Block `[r0, r0 + rows) × [c0, c0 + cols)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> IntMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Writes `b` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &IntMatrix) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for i in 0..b.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + b.cols].copy_from_slice(b.row(i));
        }
    }

    pub fn vconcat(parts: &[&IntMatrix]) -> Result<IntMatrix, ModMathError> {
        let cols = parts.first().map(|p| p.cols).unwrap_or(0);
        if parts.iter().any(|p| p.cols != cols) {
            return Err(ModMathError::DimensionMismatch(
                "column counts differ in vconcat".into(),
            ));
        }
        let mut data = Vec::new();
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Ok(IntMatrix {
            rows: parts.iter().map(|p| p.rows).sum(),
            cols,
            data,
        })
    }

    pub fn hconcat(parts: &[&IntMatrix]) -> Result<IntMatrix, ModMathError> {
        let rows = parts.first().map(|p| p.rows).unwrap_or(0);
        if parts.iter().any(|p| p.rows != rows) {
            return Err(ModMathError::DimensionMismatch("row counts differ in hconcat".into()));
        }
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = IntMatrix::zeros(rows, cols);
        let mut off = 0;
        for p in parts {
            out.set_block(0, off, p);
            off += p.cols;
        }
        Ok(out)
    }

    /// `vᵗ · self mod q` for a residue vector `v`.
    pub fn vec_mul_mod(&self, v: &[u64], q: u64) -> Result<Vec<u64>, ModMathError> {
        ModMatrix::from_int(self, q).vec_mul(v)
    }

    /// `self · v` over the integers.
    pub fn mul_vec(&self, v: &[i64]) -> Result<Vec<i64>, ModMathError> {
        if v.len() != self.cols {
            return Err(ModMathError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// `vᵗ · self` over the integers.
    pub fn vec_mul(&self, v: &[i64]) -> Result<Vec<i64>, ModMathError> {
        if v.len() != self.rows {
            return Err(ModMathError::DimensionMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![0i64; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(i)) {
                *o += a * b;
            }
        }
        Ok(out)
    }

    /// Largest singular value estimated by power iteration on `selfᵗ · self`.
    pub fn spectral_norm_estimate(&self, iterations: usize) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        // fixed, non-degenerate start vector keeps the estimate deterministic
        let mut v: Vec<f64> = (0..self.cols).map(|j| 1.0 + (j % 7) as f64 * 0.1).collect();
        let mut sigma = 0.0;
        for _ in 0..iterations {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            let av: Vec<f64> = (0..self.rows)
                .map(|i| self.row(i).iter().zip(&v).map(|(&a, &b)| a as f64 * b).sum())
                .collect();
            sigma = av.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut atav = vec![0.0; self.cols];
            for (i, &s) in av.iter().enumerate() {
                for (o, &a) in atav.iter_mut().zip(self.row(i)) {
                    *o += a as f64 * s;
                }
            }
            v = atav;
        }
        sigma
    }
}
