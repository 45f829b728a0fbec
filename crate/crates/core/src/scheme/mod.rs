//! Single-hop identity-based unidirectional proxy re-encryption.
//!
//! Identity `id` owns the public matrix
//! `A_id = [Ā | Ā′ + H_idG | A₁ + H₃H_idG | A₂ + H₄H_idG]`. Its secret key is a
//! pair of trapdoors for the last two blocks, delegated from the master
//! trapdoor `R` with `ĀR = −Ā′`. A re-encryption key is an integer matrix
//! `rk` with `A_i·rk = A_j`, applied to ciphertext row vectors on the right.

mod params;

use std::sync::OnceLock;

use rand::Rng as _;
use thiserror::Error;

pub use params::{params_new, params_with, Budget, Params, Preset, Thresholds, BUDGET_SIGMAS, MIN_MODULUS};

use crate::frd::{FrdContext, FrdError, Identity};
use crate::gadget::{Gadget, GadgetError};
use crate::modmath::{center, invert_mod, reduce_i64, solve_mod_prime, IntMatrix, ModMathError, ModMatrix};
use crate::sampler::{sample_z_matrix, sample_z_vec, GaussParam, Rng, SamplerError};
use crate::trapdoor::{del_trap, invert_lwe, s_min_for, PreimageSampler, TaggedMatrix, Trapdoor, TrapdoorError};

/// Attempts at drawing a trapdoor whose spectral norm fits the parameters.
const TRAPDOOR_RETRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("modulus {0} is not a supported prime")]
    InvalidModulus(u64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("error budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("identity must be nonzero")]
    ZeroIdentity,
    #[error("cannot delegate an identity to itself")]
    SelfDelegation,
    #[error("re-encrypted ciphertexts cannot be re-encrypted again")]
    HopLimitExceeded,
    #[error("identity mismatch: {0}")]
    IdentityMismatch(String),
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Trapdoor(#[from] TrapdoorError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    ModMath(#[from] ModMathError),
}

impl From<FrdError> for SchemeError {
    fn from(e: FrdError) -> Self {
        match e {
            FrdError::ZeroIdentity => SchemeError::ZeroIdentity,
            FrdError::WrongLength { expected, got } => SchemeError::LengthMismatch { expected, got },
            FrdError::CompositeModulus(q) => SchemeError::InvalidModulus(q),
        }
    }
}

/// Reasons decryption outputs ⊥, one per check.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecryptError {
    #[error("ciphertext is addressed to a different identity")]
    WrongIdentity,
    #[error("malformed ciphertext: {0}")]
    Malformed(String),
    #[error("identity encodes to the zero matrix")]
    ZeroIdentity,
    #[error("trapdoor inversion failed: {0}")]
    InversionFailed(String),
    #[error("noise check failed: ‖{block}‖ = {norm} ≥ {bound}")]
    NoiseTooLarge {
        block: &'static str,
        norm: String,
        bound: String,
    },
    #[error("lattice membership check failed: V̄₀ ∉ 2Λ(Āᵗ)")]
    NotInLattice,
    #[error("integrity check failed: the H₁ block does not decode to zero")]
    IntegrityCheck,
    #[error("message decoding failed")]
    DecodeFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PublicParams {
    pub params: Params,
    pub abar: ModMatrix,
    pub abar_p: ModMatrix,
    pub a1: ModMatrix,
    pub a2: ModMatrix,
    /// `H₁ … H₄`.
    pub h: [ModMatrix; 4],
    pub frd: FrdContext,
    gad: Gadget,
}

#[derive(Debug)]
pub struct MasterSecret {
    pub r: IntMatrix,
    sampler: OnceLock<PreimageSampler>,
}

impl Clone for MasterSecret {
    fn clone(&self) -> Self {
        MasterSecret::new(self.r.clone())
    }
}

impl PartialEq for MasterSecret {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserSecretKey {
    pub id: Identity,
    pub r1: IntMatrix,
    pub r2: IntMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    /// 0 for fresh, 1 for re-encrypted.
    pub level: u8,
    pub target: Identity,
    /// Entries in `[0, 2q)`.
    pub b: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReKey {
    pub from: Identity,
    pub to: Identity,
    pub q: u64,
    /// The full `(m̄ + 3nk)²` block matrix.
    pub matrix: IntMatrix,
}

/// Randomness behind a ciphertext, for white-box checks.
#[derive(Debug, Clone, PartialEq)]
pub struct EncryptionWitness {
    pub s: Vec<u64>,
    /// `(ē₀, e₀′, e₁, e₂)` concatenated.
    pub e: Vec<i64>,
}

fn random_invertible(n: usize, q: u64, rng: &mut Rng) -> ModMatrix {
    loop {
        let h = ModMatrix::random(n, n, q, rng);
        if invert_mod(&h).is_ok() {
            return h;
        }
    }
}

/// Generates public parameters and the master trapdoor.
pub fn setup(params: &Params, rng: &mut Rng) -> Result<(PublicParams, MasterSecret), SchemeError> {
    let gad = Gadget::new(params.n, params.q)?;
    let (n, q, nk) = (params.n, params.q, params.nk());
    let abar = ModMatrix::random(n, params.m_bar, q, rng);
    let mut r = None;
    for _ in 0..TRAPDOOR_RETRIES {
        let cand = sample_z_matrix(params.m_bar, nk, GaussParam::new(params.r), rng)?;
        if s_min_for(&cand, params.s_gadget()) <= params.s_extract {
            r = Some(cand);
            break;
        }
    }
    let r = r.ok_or_else(|| SchemeError::InvariantViolation("no master trapdoor fits s_extract".into()))?;
    let abar_p = abar.mul_int(&r)?.neg();
    let a1 = ModMatrix::random(n, nk, q, rng);
    let a2 = ModMatrix::random(n, nk, q, rng);
    let h = [(); 4].map(|_| random_invertible(n, q, rng));
    let mut frd_seed = [0u8; 32];
    rng.fill(&mut frd_seed);
    let frd = FrdContext::new(n, q, frd_seed)?;
    let pp = PublicParams {
        params: params.clone(),
        abar,
        abar_p,
        a1,
        a2,
        h,
        frd,
        gad,
    };
    Ok((pp, MasterSecret::new(r)))
}

impl PublicParams {
    /// Reassembles public parameters from their stored parts, validating them.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        params: Params,
        abar: ModMatrix,
        abar_p: ModMatrix,
        a1: ModMatrix,
        a2: ModMatrix,
        h: [ModMatrix; 4],
        frd: FrdContext,
    ) -> Result<Self, SchemeError> {
        if !params.is_consistent() {
            return Err(SchemeError::InvariantViolation(
                "parameters do not match their derivation".into(),
            ));
        }
        let gad = Gadget::new(params.n, params.q)?;
        let (n, q, nk) = (params.n, params.q, params.nk());
        let shape_ok = |m: &ModMatrix, cols: usize| m.rows() == n && m.cols() == cols && m.modulus() == q;
        if !shape_ok(&abar, params.m_bar) || !shape_ok(&abar_p, nk) || !shape_ok(&a1, nk) || !shape_ok(&a2, nk) {
            return Err(SchemeError::InvariantViolation(
                "public matrix has the wrong shape".into(),
            ));
        }
        if h.iter().any(|hi| !shape_ok(hi, n) || invert_mod(hi).is_err()) {
            return Err(SchemeError::InvariantViolation("tags H₁..H₄ must be invertible".into()));
        }
        if frd.n() != n || frd.q() != q {
            return Err(SchemeError::InvariantViolation(
                "identity encoding has the wrong field".into(),
            ));
        }
        Ok(PublicParams {
            params,
            abar,
            abar_p,
            a1,
            a2,
            h,
            frd,
            gad,
        })
    }

    pub fn gadget(&self) -> &Gadget {
        &self.gad
    }

    pub fn h_id(&self, id: &Identity) -> Result<ModMatrix, SchemeError> {
        let h = self.frd.encode(id)?;
        if h.is_zero() {
            return Err(SchemeError::ZeroIdentity);
        }
        Ok(h)
    }

    /// `Ã_id = [Ā | Ā′ + H_idG]` with its trapdoor tag `H_id`.
    pub fn a_tilde(&self, id: &Identity) -> Result<TaggedMatrix, SchemeError> {
        let h_id = self.h_id(id)?;
        let right = self.abar_p.add(&self.gad.tagged(&h_id))?;
        Ok(TaggedMatrix::new(&self.abar, &[&right], vec![h_id])?)
    }

    /// `(A_{id,1}, A_{id,2}) = (A₁ + H₃H_idG, A₂ + H₄H_idG)`.
    pub fn a_id_blocks(&self, id: &Identity) -> Result<(ModMatrix, ModMatrix), SchemeError> {
        let h_id = self.h_id(id)?;
        let a_i1 = self.a1.add(&self.gad.tagged(&self.h[2].mul(&h_id)?))?;
        let a_i2 = self.a2.add(&self.gad.tagged(&self.h[3].mul(&h_id)?))?;
        Ok((a_i1, a_i2))
    }

    /// `A_id = [Ã_id | A_{id,1} | A_{id,2}]`, tagged by `H₁, H₂` on the last two blocks.
    pub fn a_id(&self, id: &Identity) -> Result<TaggedMatrix, SchemeError> {
        let at = self.a_tilde(id)?;
        let (a_i1, a_i2) = self.a_id_blocks(id)?;
        Ok(TaggedMatrix::new(
            at.matrix(),
            &[&a_i1, &a_i2],
            vec![self.h[0].clone(), self.h[1].clone()],
        )?)
    }
}

impl MasterSecret {
    pub fn new(r: IntMatrix) -> Self {
        MasterSecret {
            r,
            sampler: OnceLock::new(),
        }
    }

    /// Checks `ĀR + Ā′ = 0`.
    pub fn validate(&self, pp: &PublicParams) -> Result<(), SchemeError> {
        let p = &pp.params;
        if self.r.rows() != p.m_bar || self.r.cols() != p.nk() {
            return Err(SchemeError::InvariantViolation(
                "master trapdoor has the wrong shape".into(),
            ));
        }
        if !pp.abar.mul_int(&self.r)?.add(&pp.abar_p)?.is_zero() {
            return Err(SchemeError::InvariantViolation("ĀR + Ā′ ≠ 0".into()));
        }
        Ok(())
    }

    fn sampler(&self, pp: &PublicParams, layout: &TaggedMatrix) -> Result<&PreimageSampler, SchemeError> {
        if let Some(s) = self.sampler.get() {
            return Ok(s);
        }
        let p = &pp.params;
        let trapdoor = Trapdoor::new(vec![self.r.clone()], p.r);
        let built = PreimageSampler::new(&pp.gad, layout, &trapdoor, 0, p.s_extract, p.r)?;
        Ok(self.sampler.get_or_init(|| built))
    }
}

/// Delegates `(R_{id,1}, R_{id,2})` from the master trapdoor.
pub fn extract(
    pp: &PublicParams,
    msk: &MasterSecret,
    id: &Identity,
    rng: &mut Rng,
) -> Result<UserSecretKey, SchemeError> {
    let at = pp.a_tilde(id)?;
    let (a_i1, a_i2) = pp.a_id_blocks(id)?;
    let sampler = msk.sampler(pp, &at)?;
    let gad = &pp.gad;
    let s_g = pp.params.s_gadget();
    for _ in 0..TRAPDOOR_RETRIES {
        let r1 = del_trap(gad, sampler, &at, 0, &a_i1, &pp.h[0], rng)?;
        // r1 serves as the trapdoor for re-key sampling, so it must fit s_rk1
        if s_min_for(&r1, s_g) > pp.params.s_rk1 {
            continue;
        }
        let r2 = del_trap(gad, sampler, &at, 0, &a_i2, &pp.h[1], rng)?;
        let sk = UserSecretKey { id: id.clone(), r1, r2 };
        sk.validate(pp)?;
        return Ok(sk);
    }
    Err(SchemeError::Trapdoor(TrapdoorError::ParameterTooSmall {
        s: pp.params.s_rk1,
        s_min: f64::NAN,
    }))
}

impl UserSecretKey {
    /// Checks `[Ã_i | A_{i1} | A_{i2}]·[R₁ R₂; I 0; 0 I] = [H₁G | H₂G]`.
    pub fn validate(&self, pp: &PublicParams) -> Result<(), SchemeError> {
        let p = &pp.params;
        if [&self.r1, &self.r2]
            .iter()
            .any(|r| r.rows() != p.m() || r.cols() != p.nk())
        {
            return Err(SchemeError::InvariantViolation(
                "user trapdoor has the wrong shape".into(),
            ));
        }
        let a = pp.a_id(&self.id)?;
        if !a.verify(&pp.gad, &self.trapdoor()) {
            return Err(SchemeError::InvariantViolation(
                "key does not satisfy [H₁G | H₂G]".into(),
            ));
        }
        Ok(())
    }

    pub fn trapdoor(&self) -> Trapdoor {
        Trapdoor::new(vec![self.r1.clone(), self.r2.clone()], f64::NAN)
    }
}

/// Encrypts an `nk`-bit message to `id`.
pub fn encrypt(pp: &PublicParams, id: &Identity, m: &[u8], rng: &mut Rng) -> Result<Ciphertext, SchemeError> {
    encrypt_traced(pp, id, m, rng).map(|(ct, _)| ct)
}

/// [`encrypt`], also returning the secret and error it used.
pub fn encrypt_traced(
    pp: &PublicParams,
    id: &Identity,
    m: &[u8],
    rng: &mut Rng,
) -> Result<(Ciphertext, EncryptionWitness), SchemeError> {
    let p = &pp.params;
    if m.len() != p.nk() || m.iter().any(|&b| b > 1) {
        return Err(SchemeError::LengthMismatch {
            expected: p.nk(),
            got: m.len(),
        });
    }
    let a = pp.a_id(id)?;
    let s: Vec<u64> = (0..p.n).map(|_| rng.random_range(0..p.q)).collect();
    let e0_bar = sample_z_vec(p.m_bar, GaussParam::new(p.alpha_q), rng)?;
    let norm_sq: f64 = e0_bar.iter().map(|&x| (x * x) as f64).sum();
    let s_prime = ((norm_sq + p.m_bar as f64 * p.alpha_q * p.alpha_q) * p.r * p.r).sqrt();
    let mut e = e0_bar;
    e.extend(sample_z_vec(3 * p.nk(), GaussParam::new(s_prime), rng)?);
    let b = assemble(pp, &a, &s, &e, m)?;
    let ct = Ciphertext {
        level: 0,
        target: id.clone(),
        b,
    };
    Ok((ct, EncryptionWitness { s, e }))
}

/// `2(sᵗA mod q) + eᵗ + (0, 0, Em) mod 2q`.
fn assemble(pp: &PublicParams, a: &TaggedMatrix, s: &[u64], e: &[i64], m: &[u8]) -> Result<Vec<u64>, SchemeError> {
    let p = &pp.params;
    let two_q = 2 * p.q;
    let sa = a.matrix().vec_mul(s)?;
    let em = pp.gad.encode_msg(m)?;
    let offset = p.m() + p.nk();
    Ok(sa
        .iter()
        .zip(e)
        .enumerate()
        .map(|(i, (&x, &ei))| {
            let msg = if i >= offset { em[i - offset] } else { 0 };
            reduce_i64(2 * x as i64 + ei + msg, two_q)
        })
        .collect())
}

fn l2(v: &[i64]) -> f64 {
    v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt()
}

/// Decrypts, returning the message or the check that failed.
///
/// `2s` is recovered through the `H₁` block, whose compressed form carries
/// no message term. The first three error blocks follow directly; `e₂` is
/// separated from `encode(m) ∈ Λ(Gᵗ)` by a gadget inversion of the last
/// block's residual.
pub fn decrypt(pp: &PublicParams, sk: &UserSecretKey, ct: &Ciphertext) -> Result<Vec<u8>, DecryptError> {
    let p = &pp.params;
    let (q, two_q, nk) = (p.q, 2 * p.q, p.nk());
    if ct.target != sk.id {
        return Err(DecryptError::WrongIdentity);
    }
    if ct.level > 1 {
        return Err(DecryptError::Malformed(format!("level {}", ct.level)));
    }
    if ct.b.len() != p.ct_len() || ct.b.iter().any(|&x| x >= two_q) {
        return Err(DecryptError::Malformed(
            "wrong length or entries outside [0, 2q)".into(),
        ));
    }
    let a = match pp.a_id(&ct.target) {
        Ok(a) => a,
        Err(SchemeError::ZeroIdentity) => return Err(DecryptError::ZeroIdentity),
        Err(e) => return Err(DecryptError::Malformed(e.to_string())),
    };

    let b_q: Vec<u64> = ct.b.iter().map(|&x| x % q).collect();
    let (z, _) =
        invert_lwe(&pp.gad, &a, &sk.trapdoor(), &b_q, 0).map_err(|e| DecryptError::InversionFailed(e.to_string()))?;
    let az = a
        .matrix()
        .vec_mul(&z)
        .map_err(|e| DecryptError::InversionFailed(e.to_string()))?;
    let residual: Vec<u64> = b_q
        .iter()
        .zip(&az)
        .map(|(&b, &x)| reduce_i64(b as i64 - x as i64, q))
        .collect();
    let split = p.m() + nk;
    let mut e: Vec<i64> = residual[..split].iter().map(|&x| center(x, q)).collect();
    let (_, e2) = pp
        .gad
        .g_invert(&residual[split..])
        .map_err(|e| DecryptError::InversionFailed(e.to_string()))?;
    e.extend_from_slice(&e2);

    let t = p.thresholds(ct.level);
    let blocks: [(&'static str, &[i64], f64); 4] = [
        ("ē₀", &e[..p.m_bar], t.e0_bar),
        ("e₀′", &e[p.m_bar..p.m()], t.e0_prime),
        ("e₁", &e[p.m()..split], t.e_j),
        ("e₂", &e[split..], t.e_j),
    ];
    for (block, v, bound) in blocks {
        let norm = l2(v);
        if norm >= bound {
            return Err(DecryptError::NoiseTooLarge {
                block,
                norm: format!("{norm:.1}"),
                bound: format!("{bound:.1}"),
            });
        }
    }

    let v: Vec<u64> =
        ct.b.iter()
            .zip(&e)
            .map(|(&b, &ei)| reduce_i64(b as i64 - ei, two_q))
            .collect();
    let v0_bar = &v[..p.m_bar];
    if v0_bar.iter().any(|x| x % 2 != 0) {
        return Err(DecryptError::NotInLattice);
    }
    let half: Vec<u64> = v0_bar.iter().map(|x| x / 2).collect();
    if solve_mod_prime(&pp.abar.transpose(), &half).is_err() {
        return Err(DecryptError::NotInLattice);
    }

    let (v0, rest) = v.split_at(p.m());
    let (v1, v2) = rest.split_at(nk);
    let w = |r: &IntMatrix, vi: &[u64]| -> Vec<u64> {
        let rv = r.vec_mul_mod(v0, two_q).expect("shape checked");
        rv.iter().zip(vi).map(|(&x, &y)| (x + y) % two_q).collect()
    };
    let w1 = pp
        .gad
        .decode_msg(&w(&sk.r1, v1))
        .map_err(|_| DecryptError::IntegrityCheck)?;
    if w1.iter().any(|&bit| bit != 0) {
        return Err(DecryptError::IntegrityCheck);
    }
    pp.gad
        .decode_msg(&w(&sk.r2, v2))
        .map_err(|_| DecryptError::DecodeFailed)
}

/// Builds `rk_{i→j}` with `A_i·rk = A_j`.
pub fn rekeygen(
    pp: &PublicParams,
    sk_i: &UserSecretKey,
    id_i: &Identity,
    id_j: &Identity,
    rng: &mut Rng,
) -> Result<ReKey, SchemeError> {
    if &sk_i.id != id_i {
        return Err(SchemeError::IdentityMismatch(
            "secret key does not belong to the source identity".into(),
        ));
    }
    if id_i == id_j {
        return Err(SchemeError::SelfDelegation);
    }
    let p = &pp.params;
    let gad = &pp.gad;
    let (m_bar, m, nk) = (p.m_bar, p.m(), p.nk());
    let at_i = pp.a_tilde(id_i)?;
    let (a_i1, _) = pp.a_id_blocks(id_i)?;
    let layout = TaggedMatrix::new(at_i.matrix(), &[&a_i1], vec![pp.h[0].clone()])?;
    let trapdoor = Trapdoor::new(vec![sk_i.r1.clone()], p.s_extract);

    let at_j = pp.a_tilde(id_j)?;
    let (a_j1, a_j2) = pp.a_id_blocks(id_j)?;
    let target0 = at_j.block(0);
    let target2 = a_j2
        .add(&at_i.matrix().mul_int(&sk_i.r2)?)?
        .sub(&gad.tagged(&pp.h[1]))?;

    let narrow = PreimageSampler::new(gad, &layout, &trapdoor, 0, p.s_rk1, p.r)?;
    let x0 = narrow.sample_columns(gad, &layout, 0, &target0, rng)?;
    let wide = PreimageSampler::new(gad, &layout, &trapdoor, 0, p.s_rk2, p.r)?;
    let x1 = wide.sample_columns(gad, &layout, 0, &a_j1, rng)?;
    let x2 = wide.sample_columns(gad, &layout, 0, &target2, rng)?;

    let dim = p.ct_len();
    let mut rk = IntMatrix::zeros(dim, dim);
    rk.set_block(0, 0, &IntMatrix::identity(m_bar));
    rk.set_block(0, m_bar, &x0);
    rk.set_block(0, m, &x1);
    rk.set_block(0, m + nk, &x2);
    rk.set_block(m + nk, m + nk, &IntMatrix::identity(nk));
    let key = ReKey {
        from: id_i.clone(),
        to: id_j.clone(),
        q: p.q,
        matrix: rk,
    };
    key.validate(pp)?;
    Ok(key)
}

impl ReKey {
    /// The trivial key `I` from an identity to itself.
    pub fn identity(pp: &PublicParams, id: &Identity) -> ReKey {
        ReKey {
            from: id.clone(),
            to: id.clone(),
            q: pp.params.q,
            matrix: IntMatrix::identity(pp.params.ct_len()),
        }
    }

    /// Checks the block shape and `A_from·rk = A_to`.
    pub fn validate(&self, pp: &PublicParams) -> Result<(), SchemeError> {
        if self.q != pp.params.q {
            return Err(SchemeError::InvariantViolation(
                "re-key modulus differs from the public parameters".into(),
            ));
        }
        self.validate_structure(pp.params.m_bar, pp.params.nk())?;
        let lhs = pp.a_id(&self.from)?.matrix().mul_int(&self.matrix)?;
        if &lhs != pp.a_id(&self.to)?.matrix() {
            return Err(SchemeError::InvariantViolation("A_i·rk ≠ A_j".into()));
        }
        Ok(())
    }

    /// Identity blocks on the outer diagonal and zeros below the `X` blocks.
    pub fn validate_structure(&self, m_bar: usize, nk: usize) -> Result<(), SchemeError> {
        let (m, dim) = (m_bar + nk, m_bar + 3 * nk);
        let rk = &self.matrix;
        if rk.rows() != dim || rk.cols() != dim {
            return Err(SchemeError::InvariantViolation("re-key has the wrong shape".into()));
        }
        let fail = |what: &str| Err(SchemeError::InvariantViolation(format!("re-key {what}")));
        for i in 0..dim {
            for j in 0..dim {
                let expected = if i >= m + nk || j < m_bar {
                    Some((i == j) as i64)
                } else {
                    None
                };
                if let Some(x) = expected {
                    if rk.get(i, j) != x {
                        return fail(if i == j {
                            "diagonal block is not the identity"
                        } else {
                            "has a nonzero entry outside the X blocks"
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Block `X_{ab}` for `a, b ∈ {0, 1, 2}`.
    pub fn x_block(&self, p: &Params, a: usize, b: usize) -> IntMatrix {
        let (m_bar, m, nk) = (p.m_bar, p.m(), p.nk());
        let (r0, rows) = match a {
            0 => (0, m_bar),
            1 => (m_bar, nk),
            _ => (m, nk),
        };
        self.matrix.block(r0, m_bar + b * nk, rows, nk)
    }
}

/// Transforms a ciphertext for `rk.from` into one for `rk.to`.
pub fn reencrypt(rk: &ReKey, ct: &Ciphertext) -> Result<Ciphertext, SchemeError> {
    if ct.level != 0 {
        return Err(SchemeError::HopLimitExceeded);
    }
    if ct.target != rk.from {
        return Err(SchemeError::IdentityMismatch(
            "ciphertext is not addressed to the re-key source".into(),
        ));
    }
    if ct.b.len() != rk.matrix.rows() {
        return Err(SchemeError::LengthMismatch {
            expected: rk.matrix.rows(),
            got: ct.b.len(),
        });
    }
    let b = rk.matrix.vec_mul_mod(&ct.b, 2 * rk.q)?;
    Ok(Ciphertext {
        level: 1,
        target: rk.to.clone(),
        b,
    })
}
