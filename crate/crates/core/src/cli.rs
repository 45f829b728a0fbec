//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 cryptographic failure, 3 I/O or format.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::format::{self, Dims, FormatError, Kind};
use crate::frd::Identity;
use crate::gadget::Gadget;
use crate::sampler::{sample_z_vec, GaussParam, Rng};
use crate::scheme::{self, Ciphertext, Params, Preset, PublicParams, SchemeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CRYPTO: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Crypto(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Crypto(_) => EXIT_CRYPTO,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Crypto(m) | CliError::Io(m) => m,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        CliError::Crypto(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Toy,
    Demo,
    Reenc,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Preset {
        match p {
            PresetArg::Toy => Preset::Toy,
            PresetArg::Demo => Preset::Demo,
            PresetArg::Reenc => Preset::Reenc,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ibupre",
    version,
    about = "Identity-based unidirectional proxy re-encryption over lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate public parameters and the master secret.
    Setup {
        #[arg(long, value_enum, default_value = "toy")]
        preset: PresetArg,
        /// Up to 64 hex digits; omitted means OS randomness.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out_pp: PathBuf,
        #[arg(long)]
        out_msk: PathBuf,
    },
    /// Derive a user secret key.
    Extract {
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        msk: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a file to an identity, one ciphertext per block.
    Encrypt {
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    Decrypt {
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a re-encryption key from `--from` to `--to`.
    Rekeygen {
        #[arg(long)]
        pp: PathBuf,
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    Reencrypt {
        #[arg(long)]
        rk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit deterministic JSON-lines test vectors.
    Vectors {
        #[arg(long, value_enum, default_value = "toy")]
        preset: PresetArg,
        #[arg(long)]
        seed: String,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the headers of artifact files.
    Info {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code. Diagnostics go to standard error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("ibupre: {}", e.message());
            e.exit_code()
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Setup {
            preset,
            seed,
            out_pp,
            out_msk,
        } => {
            let mut rng = rng_from(seed.as_deref())?;
            let (pp, msk) = scheme::setup(&Preset::from(preset).params(), &mut rng)?;
            write_atomic(&out_pp, &format::encode_public_params(&pp))?;
            write_atomic(&out_msk, &format::encode_master_secret(&pp, &msk))
        }
        Command::Extract { pp, msk, id, seed, out } => {
            let mut rng = rng_from(seed.as_deref())?;
            let pp = load_pp(&pp)?;
            let msk = format::decode_master_secret(&read(&msk)?, &pp)?;
            let id = hash_identity(&id, pp.params.n, pp.params.q);
            let sk = scheme::extract(&pp, &msk, &id, &mut rng)?;
            write_atomic(&out, &format::encode_secret_key(&pp, &sk))
        }
        Command::Encrypt {
            pp,
            id,
            input,
            seed,
            out,
        } => {
            let mut rng = rng_from(seed.as_deref())?;
            let pp = load_pp(&pp)?;
            let id = hash_identity(&id, pp.params.n, pp.params.q);
            let msg = read(&input)?;
            let nk = pp.params.nk();
            let cts = pad_blocks(&msg, nk)
                .iter()
                .map(|block| scheme::encrypt(&pp, &id, &block_bits(block, nk), &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            write_atomic(&out, &format::encode_ciphertexts((&pp.params).into(), &cts))
        }
        Command::Decrypt { pp, sk, input, out } => {
            let pp = load_pp(&pp)?;
            let sk = format::decode_secret_key(&read(&sk)?, &pp)?;
            let (dims, cts) = format::decode_ciphertexts(&read(&input)?)?;
            if dims != Dims::from(&pp.params) {
                return Err(CliError::Io(
                    "ciphertexts were produced under different public parameters".into(),
                ));
            }
            let msg = decrypt_all(&pp, &sk, &cts)?;
            write_atomic(&out, &msg)
        }
        Command::Rekeygen {
            pp,
            sk,
            from,
            to,
            seed,
            out,
        } => {
            let mut rng = rng_from(seed.as_deref())?;
            let pp = load_pp(&pp)?;
            let sk = format::decode_secret_key(&read(&sk)?, &pp)?;
            let (n, q) = (pp.params.n, pp.params.q);
            let (from, to) = (hash_identity(&from, n, q), hash_identity(&to, n, q));
            let rk = scheme::rekeygen(&pp, &sk, &from, &to, &mut rng)?;
            write_atomic(&out, &format::encode_rekey((&pp.params).into(), &rk))
        }
        Command::Reencrypt { rk, input, out } => {
            let (rk_dims, rk) = format::decode_rekey(&read(&rk)?)?;
            let (dims, cts) = format::decode_ciphertexts(&read(&input)?)?;
            if dims != rk_dims {
                return Err(CliError::Io("re-key and ciphertexts use different parameters".into()));
            }
            let cts = cts
                .iter()
                .map(|ct| scheme::reencrypt(&rk, ct))
                .collect::<Result<Vec<_>, _>>()?;
            write_atomic(&out, &format::encode_ciphertexts(dims, &cts))
        }
        Command::Vectors { preset, seed, out } => {
            let seed = parse_seed(&seed)?;
            let text = vectors(preset.into(), seed)?;
            match out {
                Some(path) => write_atomic(&path, text.as_bytes()),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::Io(e.to_string())),
            }
        }
        Command::Info { files } => {
            for f in files {
                println!("{}", info(&f)?);
            }
            Ok(())
        }
    }
}

fn decrypt_all(pp: &PublicParams, sk: &scheme::UserSecretKey, cts: &[Ciphertext]) -> Result<Vec<u8>, CliError> {
    let nk = pp.params.nk();
    let mut blocks = Vec::with_capacity(cts.len());
    for (i, ct) in cts.iter().enumerate() {
        let bits = scheme::decrypt(pp, sk, ct).map_err(|e| CliError::Crypto(format!("ciphertext {i}: {e}")))?;
        let block =
            bits_block(&bits, nk).ok_or_else(|| CliError::Crypto(format!("ciphertext {i}: nonzero padding bits")))?;
        blocks.push(block);
    }
    unpad_blocks(&blocks).ok_or_else(|| CliError::Crypto("message padding check failed".into()))
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_pp(path: &Path) -> Result<PublicParams, CliError> {
    format::decode_public_params(&read(path)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Parses up to 64 hex digits, left-padded with zeros to 32 bytes.
pub fn parse_seed(s: &str) -> Result<[u8; 32], CliError> {
    let s = s.strip_prefix("0x").unwrap_or(s);
    if s.is_empty() || s.len() > 64 {
        return Err(CliError::Usage(format!(
            "seed must be 1 to 64 hex digits, got {}",
            s.len()
        )));
    }
    let padded = format!("{s:0>64}");
    let mut out = [0u8; 32];
    hex::decode_to_slice(&padded, &mut out).map_err(|e| CliError::Usage(format!("invalid seed: {e}")))?;
    Ok(out)
}

fn rng_from(seed: Option<&str>) -> Result<Rng, CliError> {
    Ok(match seed {
        Some(s) => Rng::from_seed(parse_seed(s)?),
        None => Rng::from_os_rng(),
    })
}

/// Maps a string to a nonzero vector in `Z_q^n`.
///
/// SHA-256 in counter mode; each 8-byte word is masked to `⌈log₂ q⌉` bits and
/// kept if below `q`.
pub fn hash_identity(label: &str, n: usize, q: u64) -> Identity {
    let mask = u64::MAX >> q.leading_zeros();
    let mut coeffs = Vec::with_capacity(n);
    let mut counter = 0u64;
    loop {
        let mut h = Sha256::new();
        h.update(b"ibupre identity");
        h.update(counter.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        counter += 1;
        for word in h.finalize().chunks_exact(8) {
            let v = u64::from_le_bytes(word.try_into().expect("8 bytes")) & mask;
            if v < q {
                coeffs.push(v);
                if coeffs.len() == n {
                    match Identity::new(std::mem::take(&mut coeffs), q) {
                        Ok(id) => return id,
                        Err(_) => break,
                    }
                }
            }
        }
    }
}

/// Bytes carried per `nk`-bit block.
pub fn block_bytes(nk: usize) -> usize {
    (nk / 8).min(255)
}

/// Splits a message into blocks with PKCS#7 padding in the last one.
pub fn pad_blocks(msg: &[u8], nk: usize) -> Vec<Vec<u8>> {
    let b = block_bytes(nk);
    let pad = b - msg.len() % b;
    let mut padded = msg.to_vec();
    padded.resize(msg.len() + pad, pad as u8);
    padded.chunks(b).map(<[u8]>::to_vec).collect()
}

pub fn unpad_blocks(blocks: &[Vec<u8>]) -> Option<Vec<u8>> {
    let mut msg: Vec<u8> = blocks.concat();
    let pad = *msg.last()? as usize;
    let b = blocks.first()?.len();
    if pad == 0 || pad > b || msg[msg.len() - pad..].iter().any(|&x| x as usize != pad) {
        return None;
    }
    msg.truncate(msg.len() - pad);
    Some(msg)
}

/// Least-significant bit first, zero-filled to `nk`.
pub fn block_bits(block: &[u8], nk: usize) -> Vec<u8> {
    let mut bits: Vec<u8> = block.iter().flat_map(|&x| (0..8).map(move |j| (x >> j) & 1)).collect();
    bits.resize(nk, 0);
    bits
}

/// Inverse of [`block_bits`]; `None` if any fill bit is set.
pub fn bits_block(bits: &[u8], nk: usize) -> Option<Vec<u8>> {
    let used = 8 * block_bytes(nk);
    if bits.len() != nk || bits[used..].iter().any(|&b| b != 0) {
        return None;
    }
    Some(
        bits[..used]
            .chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (j, &b)| acc | (b << j)))
            .collect(),
    )
}

fn info(path: &Path) -> Result<String, CliError> {
    let bytes = read(path)?;
    let h = format::read_header(&bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let d = h.dims;
    let mut line = format!(
        "{}: kind={} n={} q={} k={} m_bar={} bytes={} sha256={}",
        path.display(),
        h.kind,
        d.n,
        d.q,
        d.k,
        d.m_bar,
        bytes.len(),
        hex::encode(&bytes[bytes.len() - format::CHECKSUM_LEN..]),
    );
    if h.kind == Kind::Ciphertexts {
        let (_, cts) = format::decode_ciphertexts(&bytes)?;
        let fresh = cts.iter().filter(|c| c.level == 0).count();
        line += &format!(
            " ciphertexts={} fresh={} reencrypted={}",
            cts.len(),
            fresh,
            cts.len() - fresh
        );
    }
    Ok(line)
}

fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn bits_hex(bits: &[u8]) -> String {
    hex::encode(
        bits.chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (j, &b)| acc | (b << j)))
            .collect::<Vec<_>>(),
    )
}

fn params_json(preset: Preset, p: &Params) -> serde_json::Value {
    json!({
        "type": "params",
        "preset": preset.name(),
        "n": p.n,
        "q": p.q,
        "k": p.k,
        "m_bar": p.m_bar,
        "r": p.r,
        "alpha_q": p.alpha_q,
        "error_rate_constant": p.error_rate_constant,
        "s_extract": p.s_extract,
        "s_rk1": p.s_rk1,
        "s_rk2": p.s_rk2,
        "supports_reencryption": p.supports_reencryption(),
    })
}

/// Deterministic JSON-lines vectors; each section draws from its own stream.
pub fn vectors(preset: Preset, seed: [u8; 32]) -> Result<String, CliError> {
    let root = Rng::from_seed(seed);
    let p = preset.params();
    let (n, q, nk) = (p.n, p.q, p.nk());
    let mut lines = vec![
        json!({ "type": "seed", "seed": hex::encode(seed) }),
        params_json(preset, &p),
    ];

    let mut rng = root.fork(1);
    let samples = sample_z_vec(32, GaussParam::new(p.r), &mut rng).map_err(SchemeError::from)?;
    lines.push(json!({ "type": "sample_z", "stream": 1, "s": p.r, "samples": samples }));

    let gad = Gadget::new(n, q).map_err(SchemeError::from)?;
    let mut rng = root.fork(2);
    for _ in 0..2 {
        let bits: Vec<u8> = (0..nk).map(|_| (rand::RngCore::next_u32(&mut rng) & 1) as u8).collect();
        let encoded = gad.encode_msg(&bits).map_err(SchemeError::from)?;
        lines.push(json!({ "type": "gadget_encode", "message": bits_hex(&bits), "encoded": encoded }));
    }

    let mut rng = root.fork(3);
    let (pp, msk) = scheme::setup(&p, &mut rng)?;
    let pp_bytes = format::encode_public_params(&pp);
    lines.push(json!({
        "type": "setup",
        "pp_sha256": digest_hex(&pp_bytes),
        "msk_sha256": digest_hex(&format::encode_master_secret(&pp, &msk)),
        "frd_modulus": pp.frd.modulus_poly(),
        "h": pp.h.iter().map(|h| h.as_slice().to_vec()).collect::<Vec<_>>(),
    }));

    let labels = ["alice", "bob"];
    let ids: Vec<Identity> = labels.iter().map(|l| hash_identity(l, n, q)).collect();
    for (l, id) in labels.iter().zip(&ids) {
        lines.push(json!({ "type": "identity", "label": l, "coeffs": id.coeffs() }));
    }

    let mut rng = root.fork(4);
    let sks = ids
        .iter()
        .map(|id| scheme::extract(&pp, &msk, id, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    for (l, sk) in labels.iter().zip(&sks) {
        lines.push(json!({
            "type": "extract",
            "label": l,
            "sk_sha256": digest_hex(&format::encode_secret_key(&pp, sk)),
        }));
    }

    let mut rng = root.fork(5);
    let msg = b"lattice test vector";
    let cts = pad_blocks(msg, nk)
        .iter()
        .map(|block| scheme::encrypt(&pp, &ids[0], &block_bits(block, nk), &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    for ct in &cts {
        lines.push(json!({ "type": "encrypt", "to": labels[0], "level": ct.level, "b": ct.b }));
    }
    lines.push(json!({
        "type": "ciphertext_file",
        "message_hex": hex::encode(msg),
        "sha256": digest_hex(&format::encode_ciphertexts((&p).into(), &cts)),
    }));
    let out = decrypt_all(&pp, &sks[0], &cts)?;
    lines.push(json!({ "type": "decrypt", "label": labels[0], "message_hex": hex::encode(out) }));
    let wrong = decrypt_all(&pp, &sks[1], &cts).err().map(|e| e.message().to_string());
    lines.push(json!({ "type": "decrypt", "label": labels[1], "error": wrong }));

    if p.supports_reencryption() {
        let mut rng = root.fork(6);
        let rk = scheme::rekeygen(&pp, &sks[0], &ids[0], &ids[1], &mut rng)?;
        lines.push(json!({
            "type": "rekeygen",
            "from": labels[0],
            "to": labels[1],
            "rk_sha256": digest_hex(&format::encode_rekey((&p).into(), &rk)),
        }));
        let cts1 = cts
            .iter()
            .map(|ct| scheme::reencrypt(&rk, ct))
            .collect::<Result<Vec<_>, _>>()?;
        for ct in &cts1 {
            lines.push(json!({ "type": "reencrypt", "to": labels[1], "level": ct.level, "b": ct.b }));
        }
        let out = decrypt_all(&pp, &sks[1], &cts1)?;
        lines.push(json!({ "type": "decrypt", "label": labels[1], "message_hex": hex::encode(out) }));
    }

    let mut text = String::new();
    for l in lines {
        text += &l.to_string();
        text.push('\n');
    }
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_pad_on_the_left() {
        let s = parse_seed("0102").unwrap();
        assert_eq!(&s[..30], &[0u8; 30]);
        assert_eq!(&s[30..], &[1, 2]);
        assert_eq!(parse_seed("f").unwrap()[31], 0x0f);
        assert!(parse_seed("").is_err());
        assert!(parse_seed(&"a".repeat(65)).is_err());
        assert!(parse_seed("xyz").is_err());
    }

    #[test]
    fn padding_round_trips() {
        for nk in [88, 176, 248] {
            let b = block_bytes(nk);
            for len in [0, 1, b - 1, b, b + 1, 3 * b] {
                let msg: Vec<u8> = (0..len).map(|i| (i * 37 + 11) as u8).collect();
                let blocks = pad_blocks(&msg, nk);
                assert_eq!(blocks.len(), len / b + 1);
                assert!(blocks.iter().all(|x| x.len() == b));
                let bits: Vec<_> = blocks.iter().map(|x| block_bits(x, nk)).collect();
                let back: Vec<_> = bits.iter().map(|x| bits_block(x, nk).unwrap()).collect();
                assert_eq!(unpad_blocks(&back).unwrap(), msg);
            }
        }
    }

    #[test]
    fn bad_padding_is_rejected() {
        assert_eq!(unpad_blocks(&[vec![1, 2, 3, 0]]), None);
        assert_eq!(unpad_blocks(&[vec![1, 2, 9, 2]]), None);
        assert_eq!(unpad_blocks(&[vec![5, 5, 5, 5]]), None);
        assert_eq!(unpad_blocks(&[vec![4, 4, 4, 4]]), Some(vec![]));
        // 90 bits carry 11 bytes and two fill bits
        let mut bits = block_bits(&[0xff; 11], 90);
        assert!(bits_block(&bits, 90).is_some());
        bits[89] = 1;
        assert!(bits_block(&bits, 90).is_none());
    }

    #[test]
    fn bit_order_is_lsb_first() {
        assert_eq!(block_bits(&[0b0000_0110], 9), vec![0, 1, 1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn identity_hash_is_stable_and_in_range() {
        let q = 2_097_169;
        let a = hash_identity("alice", 4, q);
        assert_eq!(a, hash_identity("alice", 4, q));
        assert_ne!(a, hash_identity("bob", 4, q));
        assert!(a.coeffs().iter().all(|&c| c < q));
        // first word of the first block, masked to 22 bits, as an independent check
        let mut h = Sha256::new();
        h.update(b"ibupre identity");
        h.update(0u64.to_le_bytes());
        h.update(5u64.to_le_bytes());
        h.update(b"alice");
        let d = h.finalize();
        let w0 = u64::from_le_bytes(d[..8].try_into().unwrap()) & ((1 << 22) - 1);
        if w0 < q {
            assert_eq!(a.coeffs()[0], w0);
        }
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_cli(["ibupre"]), EXIT_USAGE);
        assert_eq!(run_cli(["ibupre", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run_cli(["ibupre", "vectors", "--seed", "zz"]), EXIT_USAGE);
        assert_eq!(run_cli(["ibupre", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_file_exits_three() {
        assert_eq!(run_cli(["ibupre", "info", "/nonexistent/ibupre/file"]), EXIT_IO);
    }
}
