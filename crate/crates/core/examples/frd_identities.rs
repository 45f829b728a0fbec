//! Identities as field elements: every `H_a − H_b` with `a ≠ b` is invertible.

use std::error::Error;

use ibupre::frd::{FrdContext, Identity};
use ibupre::modmath::invert_mod;
use ibupre::sampler::Rng;

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rng = Rng::seed_from_u64(3);
    let (n, q) = (4, 2_097_169);
    let frd = FrdContext::new(n, q, [9; 32])?;
    println!("field Z_q[X]/(f), f = X^{n} + {:?}", frd.modulus_poly());

    let trials = 200;
    let mut ok = 0;
    for _ in 0..trials {
        let a = Identity::random(n, q, &mut rng);
        let b = Identity::random(n, q, &mut rng);
        if a == b {
            continue;
        }
        let diff = frd.encode(&a)?.sub(&frd.encode(&b)?)?;
        ok += invert_mod(&diff).is_ok() as usize;
    }
    println!("{ok}/{trials} random differences invertible");

    // multiplication of identities matches multiplication in the field
    let a = Identity::new(vec![1, 2, 0, 0], q)?;
    let b = Identity::new(vec![0, 1, 0, 0], q)?;
    let ab = Identity::new(vec![0, 1, 2, 0], q)?;
    let prod = frd.encode(&a)?.mul(&frd.encode(&b)?)?;
    println!("H(1 + 2X)·H(X) = H(X + 2X²): {}", prod == frd.encode(&ab)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
