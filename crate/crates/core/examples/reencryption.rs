//! One-hop re-encryption at the preset sized for it, and the noise budget
//! that rules it out at the demo preset.

use std::error::Error;

use ibupre::frd::Identity;
use ibupre::sampler::Rng;
use ibupre::scheme::{decrypt, encrypt, extract, reencrypt, rekeygen, setup, Preset};
use rand::Rng as _;

pub fn run() -> Result<(), Box<dyn Error>> {
    for preset in [Preset::Toy, Preset::Demo, Preset::Reenc] {
        let p = preset.params();
        println!(
            "{:>5}: fresh budget {:.3}, re-encrypted budget {:.3} (must be < 1)",
            preset.name(),
            p.level0_budget().ratio(),
            p.level1_budget().ratio()
        );
    }

    let mut rng = Rng::seed_from_u64(99);
    let params = Preset::Reenc.params();
    let (pp, msk) = setup(&params, &mut rng)?;
    let alice = Identity::random(params.n, params.q, &mut rng);
    let bob = Identity::random(params.n, params.q, &mut rng);
    let sk_a = extract(&pp, &msk, &alice, &mut rng)?;
    let sk_b = extract(&pp, &msk, &bob, &mut rng)?;
    let rk = rekeygen(&pp, &sk_a, &alice, &bob, &mut rng)?;
    println!(
        "re-key alice → bob: {0}×{0}, max |entry| {1}",
        rk.matrix.rows(),
        rk.matrix.max_abs()
    );

    let m: Vec<u8> = (0..params.nk()).map(|_| rng.random_range(0..2)).collect();
    let ct = encrypt(&pp, &alice, &m, &mut rng)?;
    let ct1 = reencrypt(&rk, &ct)?;
    println!(
        "bob decrypts the re-encrypted ciphertext: {}",
        decrypt(&pp, &sk_b, &ct1)? == m
    );
    println!("alice's key on it: {}", decrypt(&pp, &sk_a, &ct1).is_err());
    match reencrypt(&rk, &ct1) {
        Ok(_) => println!("second hop accepted"),
        Err(e) => println!("second hop refused: {e}"),
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
