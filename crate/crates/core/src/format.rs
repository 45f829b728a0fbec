//! Binary artifact format.
//!
//! Every file is `magic ‖ kind ‖ n ‖ q ‖ k ‖ m̄ ‖ payload ‖ sha256`, with all
//! integers little-endian `u64`. Residues are stored canonically in `[0, q)`
//! (ciphertext entries in `[0, 2q)`); small signed matrices are stored as
//! two's-complement `i64`. Readers verify the checksum before anything else
//! and re-validate the decoded object.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::frd::{FrdContext, Identity};
use crate::gadget::bit_length;
use crate::modmath::{IntMatrix, ModMatrix};
use crate::scheme::{Ciphertext, MasterSecret, Params, PublicParams, ReKey, SchemeError, UserSecretKey};

pub const MAGIC: &[u8; 8] = b"IBUPRE01";
pub const HEADER_LEN: usize = 8 + 1 + 4 * 8;
pub const CHECKSUM_LEN: usize = 32;
/// Largest `n` or `m̄` a header may declare.
pub const MAX_DIMENSION: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("not an artifact file (bad magic)")]
    BadMagic,
    #[error("checksum mismatch")]
    ChecksumMismatch,
    #[error("expected a {expected} file, found {found}")]
    KindMismatch { expected: Kind, found: Kind },
    #[error("unknown artifact kind {0}")]
    UnknownKind(u8),
    #[error("file is truncated")]
    Truncated,
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl From<SchemeError> for FormatError {
    fn from(e: SchemeError) -> Self {
        FormatError::InvariantViolation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Kind {
    PublicParams = 1,
    MasterSecret = 2,
    SecretKey = 3,
    Ciphertexts = 4,
    ReKey = 5,
    Params = 6,
}

impl Kind {
    pub fn from_byte(b: u8) -> Result<Kind, FormatError> {
        Ok(match b {
            1 => Kind::PublicParams,
            2 => Kind::MasterSecret,
            3 => Kind::SecretKey,
            4 => Kind::Ciphertexts,
            5 => Kind::ReKey,
            6 => Kind::Params,
            _ => return Err(FormatError::UnknownKind(b)),
        })
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::PublicParams => "PP",
            Kind::MasterSecret => "MSK",
            Kind::SecretKey => "SK",
            Kind::Ciphertexts => "CT",
            Kind::ReKey => "RK",
            Kind::Params => "PARAMS",
        })
    }
}

/// The scalars every file header carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub q: u64,
    pub k: usize,
    pub m_bar: usize,
}

impl Dims {
    pub fn nk(&self) -> usize {
        self.n * self.k
    }

    pub fn ct_len(&self) -> usize {
        self.m_bar + 3 * self.nk()
    }

    fn check_against(&self, p: &Params) -> Result<(), FormatError> {
        if *self != Dims::from(p) {
            return Err(FormatError::InvariantViolation(
                "artifact was produced under different public parameters".into(),
            ));
        }
        Ok(())
    }
}

impl From<&Params> for Dims {
    fn from(p: &Params) -> Dims {
        Dims {
            n: p.n,
            q: p.q,
            k: p.k,
            m_bar: p.m_bar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub kind: Kind,
    pub dims: Dims,
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(kind: Kind, d: Dims) -> Writer {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.push(kind as u8);
        for v in [d.n as u64, d.q, d.k as u64, d.m_bar as u64] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        Writer { buf }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    fn residues(&mut self, v: &[u64]) {
        v.iter().for_each(|&x| self.u64(x));
    }

    fn mod_matrix(&mut self, m: &ModMatrix) {
        self.residues(m.as_slice());
    }

    fn int_matrix(&mut self, m: &IntMatrix) {
        m.as_slice().iter().for_each(|&x| self.u64(x as u64));
    }

    fn finish(mut self) -> Vec<u8> {
        let digest = Sha256::digest(&self.buf);
        self.buf.extend_from_slice(&digest);
        self.buf
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(len).ok_or(FormatError::Truncated)?;
        let s = self.data.get(self.pos..end).ok_or(FormatError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn residues(&mut self, len: usize, bound: u64) -> Result<Vec<u64>, FormatError> {
        let v = (0..len).map(|_| self.u64()).collect::<Result<Vec<_>, _>>()?;
        if v.iter().any(|&x| x >= bound) {
            return Err(FormatError::InvariantViolation(format!("residue outside [0, {bound})")));
        }
        Ok(v)
    }

    fn mod_matrix(&mut self, rows: usize, cols: usize, q: u64) -> Result<ModMatrix, FormatError> {
        let data = self.residues(checked_size(rows, cols)?, q)?;
        Ok(ModMatrix::from_vec(rows, cols, q, data).expect("length matches"))
    }

    fn int_matrix(&mut self, rows: usize, cols: usize) -> Result<IntMatrix, FormatError> {
        let data = (0..checked_size(rows, cols)?)
            .map(|_| self.u64().map(|x| x as i64))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntMatrix::from_vec(rows, cols, data).expect("length matches"))
    }

    fn identity(&mut self, n: usize, q: u64) -> Result<Identity, FormatError> {
        let coeffs = self.residues(n, q)?;
        Identity::new(coeffs, q).map_err(|e| FormatError::InvariantViolation(e.to_string()))
    }

    fn finish(self) -> Result<(), FormatError> {
        if self.pos != self.data.len() {
            return Err(FormatError::InvariantViolation("trailing bytes after payload".into()));
        }
        Ok(())
    }
}

fn checked_size(rows: usize, cols: usize) -> Result<usize, FormatError> {
    rows.checked_mul(cols).ok_or(FormatError::Truncated)
}

/// Verifies magic and checksum and parses the header.
pub fn read_header(bytes: &[u8]) -> Result<Header, FormatError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(FormatError::Truncated);
    }
    let (body, sum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != sum {
        return Err(FormatError::ChecksumMismatch);
    }
    let mut r = Reader {
        data: &body[MAGIC.len()..HEADER_LEN],
        pos: 0,
    };
    let kind = Kind::from_byte(r.u8()?)?;
    let (n, q, k, m_bar) = (r.u64()?, r.u64()?, r.u64()?, r.u64()?);
    let as_usize =
        |v: u64| usize::try_from(v).map_err(|_| FormatError::InvariantViolation("dimension overflow".into()));
    let d = Dims {
        n: as_usize(n)?,
        q,
        k: as_usize(k)?,
        m_bar: as_usize(m_bar)?,
    };
    if d.n == 0 || d.n > MAX_DIMENSION || d.m_bar > MAX_DIMENSION || q < 2 || d.k != bit_length(q) || d.m_bar < d.nk() {
        return Err(FormatError::InvariantViolation("inconsistent header".into()));
    }
    Ok(Header { kind, dims: d })
}

fn open(bytes: &[u8], expected: Kind) -> Result<(Dims, Reader<'_>), FormatError> {
    let h = read_header(bytes)?;
    if h.kind != expected {
        return Err(FormatError::KindMismatch {
            expected,
            found: h.kind,
        });
    }
    let r = Reader {
        data: &bytes[..bytes.len() - CHECKSUM_LEN],
        pos: HEADER_LEN,
    };
    Ok((h.dims, r))
}

fn write_params_body(w: &mut Writer, p: &Params) {
    for v in [p.error_rate_constant, p.r, p.alpha_q, p.s_extract, p.s_rk1, p.s_rk2] {
        w.f64(v);
    }
}

fn read_params_body(h: &Dims, r: &mut Reader<'_>) -> Result<Params, FormatError> {
    let p = Params {
        n: h.n,
        q: h.q,
        k: h.k,
        m_bar: h.m_bar,
        error_rate_constant: r.f64()?,
        r: r.f64()?,
        alpha_q: r.f64()?,
        s_extract: r.f64()?,
        s_rk1: r.f64()?,
        s_rk2: r.f64()?,
    };
    if !p.is_consistent() {
        return Err(FormatError::InvariantViolation(
            "parameters do not match their derivation".into(),
        ));
    }
    Ok(p)
}

pub fn encode_params(p: &Params) -> Vec<u8> {
    let mut w = Writer::new(Kind::Params, p.into());
    write_params_body(&mut w, p);
    w.finish()
}

pub fn decode_params(bytes: &[u8]) -> Result<Params, FormatError> {
    let (h, mut r) = open(bytes, Kind::Params)?;
    let p = read_params_body(&h, &mut r)?;
    r.finish()?;
    Ok(p)
}

pub fn encode_public_params(pp: &PublicParams) -> Vec<u8> {
    let p = &pp.params;
    let mut w = Writer::new(Kind::PublicParams, p.into());
    write_params_body(&mut w, p);
    for m in [&pp.abar, &pp.abar_p, &pp.a1, &pp.a2] {
        w.mod_matrix(m);
    }
    pp.h.iter().for_each(|h| w.mod_matrix(h));
    w.residues(pp.frd.modulus_poly());
    w.finish()
}

pub fn decode_public_params(bytes: &[u8]) -> Result<PublicParams, FormatError> {
    let (h, mut r) = open(bytes, Kind::PublicParams)?;
    let p = read_params_body(&h, &mut r)?;
    let (n, q, nk) = (p.n, p.q, p.nk());
    let abar = r.mod_matrix(n, p.m_bar, q)?;
    let abar_p = r.mod_matrix(n, nk, q)?;
    let a1 = r.mod_matrix(n, nk, q)?;
    let a2 = r.mod_matrix(n, nk, q)?;
    let hs = [
        r.mod_matrix(n, n, q)?,
        r.mod_matrix(n, n, q)?,
        r.mod_matrix(n, n, q)?,
        r.mod_matrix(n, n, q)?,
    ];
    let f = r.residues(n, q)?;
    r.finish()?;
    let frd = FrdContext::from_modulus(n, q, f)
        .ok_or_else(|| FormatError::InvariantViolation("identity-encoding modulus is not irreducible".into()))?;
    Ok(PublicParams::from_parts(p, abar, abar_p, a1, a2, hs, frd)?)
}

pub fn encode_master_secret(pp: &PublicParams, msk: &MasterSecret) -> Vec<u8> {
    let mut w = Writer::new(Kind::MasterSecret, (&pp.params).into());
    w.int_matrix(&msk.r);
    w.finish()
}

/// Decodes and checks `ĀR + Ā′ = 0` against `pp`.
pub fn decode_master_secret(bytes: &[u8], pp: &PublicParams) -> Result<MasterSecret, FormatError> {
    let (h, mut r) = open(bytes, Kind::MasterSecret)?;
    h.check_against(&pp.params)?;
    let msk = MasterSecret::new(r.int_matrix(h.m_bar, h.nk())?);
    r.finish()?;
    msk.validate(pp)?;
    Ok(msk)
}

pub fn encode_secret_key(pp: &PublicParams, sk: &UserSecretKey) -> Vec<u8> {
    let mut w = Writer::new(Kind::SecretKey, (&pp.params).into());
    w.residues(sk.id.coeffs());
    w.int_matrix(&sk.r1);
    w.int_matrix(&sk.r2);
    w.finish()
}

/// Decodes and checks the trapdoor relation against `pp`.
pub fn decode_secret_key(bytes: &[u8], pp: &PublicParams) -> Result<UserSecretKey, FormatError> {
    let (h, mut r) = open(bytes, Kind::SecretKey)?;
    h.check_against(&pp.params)?;
    let m = h.m_bar + h.nk();
    let id = r.identity(h.n, h.q)?;
    let r1 = r.int_matrix(m, h.nk())?;
    let r2 = r.int_matrix(m, h.nk())?;
    r.finish()?;
    let sk = UserSecretKey { id, r1, r2 };
    sk.validate(pp)?;
    Ok(sk)
}

pub fn encode_ciphertexts(d: Dims, cts: &[Ciphertext]) -> Vec<u8> {
    let mut w = Writer::new(Kind::Ciphertexts, d);
    w.u64(cts.len() as u64);
    for ct in cts {
        w.u8(ct.level);
        w.residues(ct.target.coeffs());
        w.residues(&ct.b);
    }
    w.finish()
}

/// Decodes a ciphertext batch; shapes are checked against the header only.
pub fn decode_ciphertexts(bytes: &[u8]) -> Result<(Dims, Vec<Ciphertext>), FormatError> {
    let (h, mut r) = open(bytes, Kind::Ciphertexts)?;
    let count = r.u64()?;
    let len = h.ct_len();
    let per_ct = 1 + 8 * (h.n + len);
    if count > (r.data.len() / per_ct) as u64 {
        return Err(FormatError::Truncated);
    }
    let mut cts = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let level = r.u8()?;
        if level > 1 {
            return Err(FormatError::InvariantViolation(format!("ciphertext level {level}")));
        }
        let target = r.identity(h.n, h.q)?;
        let b = r.residues(len, 2 * h.q)?;
        cts.push(Ciphertext { level, target, b });
    }
    r.finish()?;
    Ok((h, cts))
}

pub fn encode_rekey(d: Dims, rk: &ReKey) -> Vec<u8> {
    let mut w = Writer::new(Kind::ReKey, d);
    w.residues(rk.from.coeffs());
    w.residues(rk.to.coeffs());
    w.int_matrix(&rk.matrix);
    w.finish()
}

/// Decodes a re-encryption key and checks its block structure.
pub fn decode_rekey(bytes: &[u8]) -> Result<(Dims, ReKey), FormatError> {
    let (h, mut r) = open(bytes, Kind::ReKey)?;
    let dim = h.ct_len();
    let from = r.identity(h.n, h.q)?;
    let to = r.identity(h.n, h.q)?;
    let matrix = r.int_matrix(dim, dim)?;
    r.finish()?;
    let rk = ReKey {
        from,
        to,
        q: h.q,
        matrix,
    };
    rk.validate_structure(h.m_bar, h.nk())?;
    Ok((h, rk))
}

/// [`decode_rekey`] followed by the full algebraic check against `pp`.
pub fn decode_rekey_checked(bytes: &[u8], pp: &PublicParams) -> Result<ReKey, FormatError> {
    let (h, rk) = decode_rekey(bytes)?;
    h.check_against(&pp.params)?;
    rk.validate(pp)?;
    Ok(rk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Rng;
    use crate::scheme::{encrypt, extract, setup, Preset};

    fn toy() -> (PublicParams, MasterSecret, Rng) {
        let mut rng = Rng::seed_from_u64(41);
        let (pp, msk) = setup(&Preset::Toy.params(), &mut rng).unwrap();
        (pp, msk, rng)
    }

    fn reseal(mut bytes: Vec<u8>) -> Vec<u8> {
        bytes.truncate(bytes.len() - CHECKSUM_LEN);
        let d = Sha256::digest(&bytes);
        bytes.extend_from_slice(&d);
        bytes
    }

    #[test]
    fn layout_of_params_file() {
        let p = Preset::Toy.params();
        let bytes = encode_params(&p);
        assert_eq!(&bytes[..8], b"IBUPRE01");
        assert_eq!(bytes[8], 6);
        assert_eq!(u64::from_le_bytes(bytes[9..17].try_into().unwrap()), 4);
        assert_eq!(u64::from_le_bytes(bytes[17..25].try_into().unwrap()), p.q);
        assert_eq!(u64::from_le_bytes(bytes[25..33].try_into().unwrap()), 22);
        assert_eq!(u64::from_le_bytes(bytes[33..41].try_into().unwrap()), 88);
        assert_eq!(bytes.len(), HEADER_LEN + 6 * 8 + CHECKSUM_LEN);
        let body = &bytes[..bytes.len() - 32];
        assert_eq!(&bytes[bytes.len() - 32..], Sha256::digest(body).as_slice());
        assert_eq!(decode_params(&bytes).unwrap(), p);
    }

    #[test]
    fn public_params_round_trip() {
        let (pp, msk, _) = toy();
        let bytes = encode_public_params(&pp);
        let back = decode_public_params(&bytes).unwrap();
        assert_eq!(back, pp);
        assert_eq!(encode_public_params(&back), bytes);
        let m = encode_master_secret(&pp, &msk);
        assert_eq!(decode_master_secret(&m, &pp).unwrap(), msk);
    }

    #[test]
    fn key_and_ciphertext_round_trip() {
        let (pp, msk, mut rng) = toy();
        let id = Identity::random(4, pp.params.q, &mut rng);
        let sk = extract(&pp, &msk, &id, &mut rng).unwrap();
        let bytes = encode_secret_key(&pp, &sk);
        assert_eq!(decode_secret_key(&bytes, &pp).unwrap(), sk);

        let cts: Vec<_> = (0..3)
            .map(|i| encrypt(&pp, &id, &vec![(i & 1) as u8; pp.params.nk()], &mut rng).unwrap())
            .collect();
        let bytes = encode_ciphertexts((&pp.params).into(), &cts);
        let (d, back) = decode_ciphertexts(&bytes).unwrap();
        assert_eq!(d, Dims::from(&pp.params));
        assert_eq!(read_header(&bytes).unwrap().kind, Kind::Ciphertexts);
        assert_eq!(back, cts);

        let rk = ReKey::identity(&pp, &id);
        let bytes = encode_rekey((&pp.params).into(), &rk);
        assert_eq!(decode_rekey_checked(&bytes, &pp).unwrap(), rk);
    }

    #[test]
    fn corruption_is_detected() {
        let p = Preset::Toy.params();
        let good = encode_params(&p);
        for i in 0..good.len() {
            let mut bad = good.clone();
            bad[i] ^= 0x10;
            let err = decode_params(&bad).unwrap_err();
            if i < 8 {
                assert_eq!(err, FormatError::BadMagic);
            } else {
                assert_eq!(err, FormatError::ChecksumMismatch, "byte {i}");
            }
        }
        assert_eq!(
            decode_params(&good[..good.len() - 1]),
            Err(FormatError::ChecksumMismatch)
        );
        assert_eq!(decode_params(&good[..20]), Err(FormatError::Truncated));
        assert_eq!(decode_params(b"nonsense"), Err(FormatError::BadMagic));
    }

    #[test]
    fn kind_is_enforced() {
        let (pp, _, _) = toy();
        let bytes = encode_params(&pp.params);
        assert_eq!(
            decode_public_params(&bytes).unwrap_err(),
            FormatError::KindMismatch {
                expected: Kind::PublicParams,
                found: Kind::Params
            }
        );
    }

    #[test]
    fn resealed_tampering_fails_validation() {
        let (pp, msk, mut rng) = toy();

        let mut p = encode_params(&pp.params);
        p[HEADER_LEN + 16] ^= 1; // alpha_q
        assert!(matches!(
            decode_params(&reseal(p)),
            Err(FormatError::InvariantViolation(_))
        ));

        let mut m = encode_master_secret(&pp, &msk);
        m[HEADER_LEN] ^= 1;
        assert!(matches!(
            decode_master_secret(&reseal(m), &pp),
            Err(FormatError::InvariantViolation(_))
        ));

        // a nonzero entry in a block that must be zero
        let id = Identity::random(4, pp.params.q, &mut rng);
        let rk = ReKey::identity(&pp, &id);
        let mut bytes = encode_rekey((&pp.params).into(), &rk);
        let dim = pp.params.ct_len();
        let row = dim - 1;
        let at = HEADER_LEN + 2 * 8 * 4 + 8 * (row * dim);
        bytes[at] = 1;
        let err = decode_rekey(&reseal(bytes)).unwrap_err();
        assert!(matches!(err, FormatError::InvariantViolation(_)));

        // ciphertext entry outside [0, 2q)
        let ct = encrypt(&pp, &id, &vec![0; pp.params.nk()], &mut rng).unwrap();
        let mut bytes = encode_ciphertexts((&pp.params).into(), &[ct]);
        let at = HEADER_LEN + 8 + 1 + 8 * 4;
        bytes[at..at + 8].copy_from_slice(&(2 * pp.params.q).to_le_bytes());
        assert!(matches!(
            decode_ciphertexts(&reseal(bytes)),
            Err(FormatError::InvariantViolation(_))
        ));
    }

    #[test]
    fn header_must_match_public_params() {
        let (pp, msk, _) = toy();
        let mut bytes = encode_master_secret(&pp, &msk);
        bytes[33..41].copy_from_slice(&89u64.to_le_bytes());
        assert!(matches!(
            decode_master_secret(&reseal(bytes), &pp),
            Err(FormatError::InvariantViolation(_))
        ));
    }
}
