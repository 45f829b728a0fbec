//! Writing artifacts to disk, reading them back, and what happens to a
//! damaged file.

use std::error::Error;

use ibupre::format::{self, FormatError};
use ibupre::frd::Identity;
use ibupre::sampler::Rng;
use ibupre::scheme::{encrypt, extract, setup, Preset};

pub fn run() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = Rng::seed_from_u64(1);
    let params = Preset::Toy.params();
    let (pp, msk) = setup(&params, &mut rng)?;
    let id = Identity::random(params.n, params.q, &mut rng);
    let sk = extract(&pp, &msk, &id, &mut rng)?;
    let ct = encrypt(&pp, &id, &vec![1; params.nk()], &mut rng)?;

    let files = [
        ("pp.bin", format::encode_public_params(&pp)),
        ("msk.bin", format::encode_master_secret(&pp, &msk)),
        ("sk.bin", format::encode_secret_key(&pp, &sk)),
        (
            "ct.bin",
            format::encode_ciphertexts((&params).into(), std::slice::from_ref(&ct)),
        ),
    ];
    for (name, bytes) in &files {
        std::fs::write(dir.path().join(name), bytes)?;
        let h = format::read_header(bytes)?;
        println!("{name:>8}: {} bytes, kind {}", bytes.len(), h.kind);
    }

    let pp2 = format::decode_public_params(&std::fs::read(dir.path().join("pp.bin"))?)?;
    let sk2 = format::decode_secret_key(&std::fs::read(dir.path().join("sk.bin"))?, &pp2)?;
    let (_, cts) = format::decode_ciphertexts(&std::fs::read(dir.path().join("ct.bin"))?)?;
    println!(
        "round trip exact: pp {}, sk {}, ct {}",
        pp2 == pp,
        sk2 == sk,
        cts == [ct]
    );

    let mut damaged = files[2].1.clone();
    damaged[200] ^= 0x01;
    let err = format::decode_secret_key(&damaged, &pp).unwrap_err();
    println!("one flipped bit: {err}");
    assert_eq!(err, FormatError::ChecksumMismatch);
    let err = format::decode_secret_key(&files[0].1, &pp).unwrap_err();
    println!("public parameters read as a key: {err}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
