//! G-trapdoors: generation, LWE inversion, preimage sampling and delegation.
//!
//! A [`TaggedMatrix`] is `A = [A₀ | A₁ | … | A_t]` where `A₀` has arbitrary
//! width and every `A_i` is `n × nk`. A [`Trapdoor`] for it is a list of small
//! integer matrices `R_i` with `A₀R_i + A_i = H_iG` for the tags `H_i`. The
//! usual single trapdoor `A·[R; I] = HG` is the case `t = 1`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::gadget::{Gadget, GadgetError};
use crate::modmath::{center, invert_mod, reduce_i64, IntMatrix, ModMathError, ModMatrix};
use crate::sampler::{sample_normal_vec, sample_z, sample_z_matrix, GaussParam, Rng, SamplerError};

/// Power iterations used to estimate `s₁(R)`.
pub const SPECTRAL_ITERATIONS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrapdoorError {
    #[error("Gaussian parameter {s} is below the trapdoor's minimum {s_min}")]
    ParameterTooSmall { s: f64, s_min: f64 },
    #[error("tag {0} is not invertible")]
    TagNotInvertible(usize),
    #[error("tag index {0} out of range")]
    NoSuchTag(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("trapdoor identity does not hold")]
    InvalidTrapdoor,
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    ModMath(#[from] ModMathError),
}

/// `[A₀ | A₁ | … | A_t]` together with the tags `H₁ … H_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedMatrix {
    a: ModMatrix,
    base_width: usize,
    tags: Vec<ModMatrix>,
}

impl TaggedMatrix {
    pub fn new(base: &ModMatrix, blocks: &[&ModMatrix], tags: Vec<ModMatrix>) -> Result<Self, TrapdoorError> {
        if blocks.len() != tags.len() {
            return Err(TrapdoorError::Shape(format!(
                "{} blocks but {} tags",
                blocks.len(),
                tags.len()
            )));
        }
        let n = base.rows();
        if let Some(w) = blocks.first().map(|b| b.cols()) {
            if blocks.iter().any(|b| b.cols() != w) {
                return Err(TrapdoorError::Shape("tagged blocks differ in width".into()));
            }
        }
        if tags.iter().any(|h| h.rows() != n || h.cols() != n) {
            return Err(TrapdoorError::Shape("tags must be n × n".into()));
        }
        let mut parts = vec![base];
        parts.extend_from_slice(blocks);
        Ok(TaggedMatrix {
            a: ModMatrix::hconcat(&parts)?,
            base_width: base.cols(),
            tags,
        })
    }

    pub fn matrix(&self) -> &ModMatrix {
        &self.a
    }

    pub fn base_width(&self) -> usize {
        self.base_width
    }

    pub fn width(&self) -> usize {
        self.a.cols()
    }

    pub fn tags(&self) -> &[ModMatrix] {
        &self.tags
    }

    pub fn block_width(&self) -> usize {
        if self.tags.is_empty() {
            0
        } else {
            (self.a.cols() - self.base_width) / self.tags.len()
        }
    }

    pub fn base(&self) -> ModMatrix {
        self.a.col_range(0, self.base_width)
    }

    /// The tagged block `A_{i+1}`.
    pub fn block(&self, i: usize) -> ModMatrix {
        let w = self.block_width();
        self.a.col_range(self.base_width + i * w, w)
    }

    /// Checks `A₀R_i + A_i = H_iG` for every block.
    pub fn verify(&self, gad: &Gadget, trapdoor: &Trapdoor) -> bool {
        if trapdoor.r_blocks.len() != self.tags.len() {
            return false;
        }
        let base = self.base();
        trapdoor.r_blocks.iter().enumerate().all(|(i, r)| {
            if r.rows() != self.base_width || r.cols() != gad.width() {
                return false;
            }
            let lhs = base.mul_int(r).and_then(|ar| ar.add(&self.block(i)));
            matches!(lhs, Ok(l) if l == gad.tagged(&self.tags[i]))
        })
    }
}

/// The small matrices `R_i` of a (generalized) G-trapdoor.
#[derive(Debug, Clone, PartialEq)]
pub struct Trapdoor {
    pub r_blocks: Vec<IntMatrix>,
    /// Width of the Gaussian the blocks were drawn from.
    pub gauss_param: f64,
}

impl Trapdoor {
    pub fn new(r_blocks: Vec<IntMatrix>, gauss_param: f64) -> Self {
        Trapdoor { r_blocks, gauss_param }
    }

    /// `s_min = 1.2·√(s₁(R_i)² + 1)·s_G`.
    pub fn s_min(&self, tag_index: usize, s_g: f64) -> f64 {
        s_min_for(&self.r_blocks[tag_index], s_g)
    }
}

pub fn s_min_for(r: &IntMatrix, s_g: f64) -> f64 {
    let s1 = r.spectral_norm_estimate(SPECTRAL_ITERATIONS);
    1.2 * (s1 * s1 + 1.0).sqrt() * s_g
}

/// Width `√6·r` used for gadget coset sampling.
pub fn gadget_width(r: f64) -> f64 {
    6f64.sqrt() * r
}

/// `R ← D_{Z,r}^{m̄×nk}` and `A = [Ā | -ĀR + HG]`, so that `A·[R; I] = HG`.
pub fn trap_gen(
    gad: &Gadget,
    abar: &ModMatrix,
    h: &ModMatrix,
    r: f64,
    rng: &mut Rng,
) -> Result<(TaggedMatrix, Trapdoor), TrapdoorError> {
    if abar.rows() != gad.n() || abar.modulus() != gad.q() {
        return Err(TrapdoorError::Shape("Ā must be n × m̄ over Z_q".into()));
    }
    let rmat = sample_z_matrix(abar.cols(), gad.width(), GaussParam::new(r), rng)?;
    let a1 = abar.mul_int(&rmat)?.neg().add(&gad.tagged(h))?;
    let a = TaggedMatrix::new(abar, &[&a1], vec![h.clone()])?;
    Ok((a, Trapdoor::new(vec![rmat], r)))
}

fn tag_inverse(a: &TaggedMatrix, tag_index: usize) -> Result<ModMatrix, TrapdoorError> {
    let h = a.tags.get(tag_index).ok_or(TrapdoorError::NoSuchTag(tag_index))?;
    invert_mod(h).map_err(|e| match e {
        ModMathError::NotInvertible => TrapdoorError::TagNotInvertible(tag_index),
        other => other.into(),
    })
}

/// Recovers `(s, e)` from `b = Aᵗs + e (mod q)` using the block with the given tag.
///
/// `b` is compressed to `b′ = R_iᵗb₀ + b_i = Gᵗ(H_iᵗs) + (R_iᵗe₀ + e_i)`, the
/// gadget is inverted, and `s = H_i^{-t}ŝ`. The returned `e = b − Aᵗs` is
/// centered, so the identity `b = Aᵗs + e` always holds; recovery of the
/// true error is guaranteed when the compressed error lies in the gadget's
/// recovery region.
pub fn invert_lwe(
    gad: &Gadget,
    a: &TaggedMatrix,
    trapdoor: &Trapdoor,
    b: &[u64],
    tag_index: usize,
) -> Result<(Vec<u64>, Vec<i64>), TrapdoorError> {
    if b.len() != a.width() {
        return Err(TrapdoorError::Shape(format!(
            "b has length {}, A has width {}",
            b.len(),
            a.width()
        )));
    }
    let r = trapdoor
        .r_blocks
        .get(tag_index)
        .ok_or(TrapdoorError::NoSuchTag(tag_index))?;
    let h_inv = tag_inverse(a, tag_index)?;
    let q = gad.q();
    let w = gad.width();
    let (b0, rest) = b.split_at(a.base_width);
    let bi = &rest[tag_index * w..(tag_index + 1) * w];
    let compressed = r.vec_mul_mod(b0, q)?;
    let compressed: Vec<u64> = compressed
        .iter()
        .zip(bi)
        .map(|(&x, &y)| ((x as u128 + y as u128) % q as u128) as u64)
        .collect();
    let (s_hat, _) = gad.g_invert(&compressed)?;
    // s = H^{-t} ŝ
    let s = h_inv.vec_mul(&s_hat)?;
    let e = lwe_error(a.matrix(), &s, b)?;
    Ok((s, e))
}

/// Centered `b − Aᵗs mod q`.
pub fn lwe_error(a: &ModMatrix, s: &[u64], b: &[u64]) -> Result<Vec<i64>, TrapdoorError> {
    let q = a.modulus();
    let ats = a.vec_mul(s)?;
    Ok(b.iter()
        .zip(ats)
        .map(|(&bi, x)| center(reduce_i64(bi as i64 - x as i64, q), q))
        .collect())
}

/// Perturbation-method preimage sampler for one tag of a trapdoor.
///
/// The Cholesky factor of `s²I − s_G²TTᵗ − r²I`, with `T` the trapdoor
/// column block for the tag, depends only on the trapdoor, so one sampler
/// serves every matrix sharing it (all identities under one master key, for
/// instance).
#[derive(Debug, Clone)]
pub struct PreimageSampler {
    r: IntMatrix,
    base_width: usize,
    block_offset: usize,
    width: usize,
    s: f64,
    s_g: f64,
    round: f64,
    chol: DMatrix<f64>,
}

impl PreimageSampler {
    /// `r_round` is the smoothing width used for randomized rounding; gadget
    /// sampling uses `√6·r_round`.
    pub fn new(
        gad: &Gadget,
        layout: &TaggedMatrix,
        trapdoor: &Trapdoor,
        tag_index: usize,
        s: f64,
        r_round: f64,
    ) -> Result<Self, TrapdoorError> {
        let r = trapdoor
            .r_blocks
            .get(tag_index)
            .ok_or(TrapdoorError::NoSuchTag(tag_index))?
            .clone();
        let nk = gad.width();
        if r.rows() != layout.base_width() || r.cols() != nk || layout.block_width() != nk {
            return Err(TrapdoorError::Shape("trapdoor does not match the matrix layout".into()));
        }
        let s_g = gadget_width(r_round);
        let s_min = s_min_for(&r, s_g);
        if !(s >= s_min) {
            return Err(TrapdoorError::ParameterTooSmall { s, s_min });
        }
        let width = layout.width();
        let block_offset = layout.base_width() + tag_index * nk;
        let mut t = DMatrix::<f64>::zeros(width, nk);
        for i in 0..r.rows() {
            for j in 0..nk {
                t[(i, j)] = r.get(i, j) as f64;
            }
        }
        for j in 0..nk {
            t[(block_offset + j, j)] = 1.0;
        }
        let mut sigma = &t * t.transpose() * (-s_g * s_g);
        for i in 0..width {
            sigma[(i, i)] += s * s - r_round * r_round;
        }
        let chol = nalgebra::Cholesky::new(sigma)
            .ok_or(TrapdoorError::ParameterTooSmall { s, s_min })?
            .unpack();
        Ok(PreimageSampler {
            r,
            base_width: layout.base_width(),
            block_offset,
            width,
            s,
            s_g,
            round: r_round,
            chol,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// One preimage `x` with `A·x = u (mod q)`.
    pub fn sample(
        &self,
        gad: &Gadget,
        a: &TaggedMatrix,
        tag_index: usize,
        u: &[u64],
        rng: &mut Rng,
    ) -> Result<Vec<i64>, TrapdoorError> {
        let targets = ModMatrix::from_vec(u.len(), 1, gad.q(), u.to_vec())?;
        Ok(self.sample_columns(gad, a, tag_index, &targets, rng)?.col(0))
    }

    /// Independent preimages of every column of `targets`, as the columns of
    /// the result.
    pub fn sample_columns(
        &self,
        gad: &Gadget,
        a: &TaggedMatrix,
        tag_index: usize,
        targets: &ModMatrix,
        rng: &mut Rng,
    ) -> Result<IntMatrix, TrapdoorError> {
        if a.width() != self.width
            || a.base_width() != self.base_width
            || self.block_offset != a.base_width() + tag_index * gad.width()
        {
            return Err(TrapdoorError::Shape("sampler was built for a different layout".into()));
        }
        if targets.rows() != gad.n() {
            return Err(TrapdoorError::Shape("targets must have n rows".into()));
        }
        let h_inv = tag_inverse(a, tag_index)?;
        let cols = targets.cols();
        let nk = gad.width();

        // continuous perturbation with covariance Σ/(2π), then randomized rounding
        let normals = sample_normal_vec(self.width * cols, rng);
        let normals = DMatrix::from_vec(self.width, cols, normals);
        let y = &self.chol * normals / (2.0 * std::f64::consts::PI).sqrt();
        let mut p = IntMatrix::zeros(self.width, cols);
        for j in 0..cols {
            for i in 0..self.width {
                p.set(i, j, sample_z(GaussParam::centered_at(self.round, y[(i, j)]), rng)?);
            }
        }

        // v = H^{-1}(u − Ap), then z ← D_{Λ_v⊥(G), s_G} and x = p + Tz
        let ap = a.matrix().mul_int(&p)?;
        let v = h_inv.mul(&targets.sub(&ap)?)?;
        let mut x = p;
        for j in 0..cols {
            let z = gad.sample_g_coset(&v.col(j), self.s_g, rng)?;
            let rz = self.r.mul_vec(&z)?;
            for i in 0..self.base_width {
                x.set(i, j, x.get(i, j) + rz[i]);
            }
            for l in 0..nk {
                let row = self.block_offset + l;
                x.set(row, j, x.get(row, j) + z[l]);
            }
        }
        Ok(x)
    }
}

/// Samples `x ← D_{Λ_u⊥(A), s}` using the trapdoor block for `tag_index`.
#[allow(clippy::too_many_arguments)]
pub fn sample_pre(
    gad: &Gadget,
    a: &TaggedMatrix,
    trapdoor: &Trapdoor,
    tag_index: usize,
    u: &[u64],
    s: f64,
    r_round: f64,
    rng: &mut Rng,
) -> Result<Vec<i64>, TrapdoorError> {
    PreimageSampler::new(gad, a, trapdoor, tag_index, s, r_round)?.sample(gad, a, tag_index, u, rng)
}

/// Delegates a trapdoor for `[A | A₁]`: returns `R′` with `A·R′ = H′G − A₁`.
///
/// Each column of `R′` is an independent preimage of the matching column of
/// `H′G − A₁`.
pub fn del_trap(
    gad: &Gadget,
    sampler: &PreimageSampler,
    a: &TaggedMatrix,
    tag_index: usize,
    a1: &ModMatrix,
    h_new: &ModMatrix,
    rng: &mut Rng,
) -> Result<IntMatrix, TrapdoorError> {
    if a1.rows() != gad.n() || a1.cols() != gad.width() {
        return Err(TrapdoorError::Shape("A₁ must be n × nk".into()));
    }
    let targets = gad.tagged(h_new).sub(a1)?;
    sampler.sample_columns(gad, a, tag_index, &targets, rng)
}
