//! Setup, key extraction, encryption and decryption at the toy preset.

use std::error::Error;

use ibupre::frd::Identity;
use ibupre::sampler::Rng;
use ibupre::scheme::{decrypt, encrypt, extract, setup, Preset};
use rand::Rng as _;

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rng = Rng::seed_from_u64(2024);
    let params = Preset::Toy.params();
    println!(
        "toy: n = {}, q = {}, m̄ = {}, ciphertext length {}, αq = {}",
        params.n,
        params.q,
        params.m_bar,
        params.ct_len(),
        params.alpha_q
    );
    let (pp, msk) = setup(&params, &mut rng)?;
    let alice = Identity::random(params.n, params.q, &mut rng);
    let bob = Identity::random(params.n, params.q, &mut rng);
    let sk_a = extract(&pp, &msk, &alice, &mut rng)?;
    let sk_b = extract(&pp, &msk, &bob, &mut rng)?;

    let m: Vec<u8> = (0..params.nk()).map(|_| rng.random_range(0..2)).collect();
    let ct = encrypt(&pp, &alice, &m, &mut rng)?;
    println!("alice decrypts: {}", decrypt(&pp, &sk_a, &ct)? == m);
    match decrypt(&pp, &sk_b, &ct) {
        Ok(_) => println!("bob decrypted alice's ciphertext"),
        Err(e) => println!("bob gets ⊥: {e}"),
    }

    // bob's key against a ciphertext relabelled to him fails a noise or lattice check
    let mut forged = ct.clone();
    forged.target = bob;
    match decrypt(&pp, &sk_b, &forged) {
        Ok(_) => println!("relabelled ciphertext decrypted"),
        Err(e) => println!("relabelled ciphertext gives ⊥: {e}"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
