//! The gadget `G = I_n ⊗ (1, 2, …, 2^{k−1})`: LWE inversion with bounded
//! error, and the message code `m ↦ E·m` that survives shifts by `2Λ(Gᵗ)`.

use std::error::Error;

use ibupre::gadget::Gadget;
use ibupre::modmath::reduce_i64;
use ibupre::sampler::Rng;
use rand::Rng as _;

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rng = Rng::seed_from_u64(11);
    let gad = Gadget::new(2, 1_000_003)?;
    let q = gad.q();
    println!(
        "n = {}, q = {q}, k = {}, recovery bound ‖e‖∞ ≤ {}",
        gad.n(),
        gad.k(),
        gad.recovery_bound_inf()
    );

    // b = Gᵗs + e, recovered exactly
    let s: Vec<u64> = (0..gad.n()).map(|_| rng.random_range(0..q)).collect();
    let bound = gad.recovery_bound_inf() as i64;
    let e: Vec<i64> = (0..gad.width()).map(|_| rng.random_range(-bound..=bound)).collect();
    let b: Vec<u64> = gad
        .gt_mul(&s)
        .iter()
        .zip(&e)
        .map(|(&x, &ei)| reduce_i64(x as i64 + ei, q))
        .collect();
    let (s2, e2) = gad.g_invert(&b)?;
    println!("g_invert: s recovered {}, e recovered {}", s2 == s, e2 == e);

    // E·m mod 2q, shifted by a random element of 2Λ(Gᵗ), still decodes
    let m: Vec<u8> = (0..gad.width()).map(|_| rng.random_range(0..2)).collect();
    let em = gad.encode_msg(&m)?;
    let t: Vec<u64> = (0..gad.n()).map(|_| rng.random_range(0..q)).collect();
    let lattice = gad.gt_mul(&t);
    let w: Vec<u64> = em
        .iter()
        .zip(&lattice)
        .map(|(&x, &l)| reduce_i64(x + 2 * l as i64, 2 * q))
        .collect();
    let decoded = gad.decode_msg(&w)?;
    println!(
        "encode/decode of {} bits through a 2Λ(Gᵗ) shift: {}",
        m.len(),
        decoded == m
    );

    // a vector off the code is refused
    let mut bad = w.clone();
    bad[0] = (bad[0] + 1) % (2 * q);
    println!("perturbed codeword rejected: {}", gad.decode_msg(&bad).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
