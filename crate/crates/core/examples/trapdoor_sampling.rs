//! Gadget trapdoors: generation, LWE inversion, Gaussian preimages, and
//! delegation to an extended matrix.

use std::error::Error;

use ibupre::gadget::Gadget;
use ibupre::modmath::{invert_mod, reduce_i64, ModMatrix};
use ibupre::sampler::{sample_z_vec, smoothing_r, GaussParam, Rng};
use ibupre::trapdoor::{del_trap, gadget_width, invert_lwe, trap_gen, PreimageSampler, TaggedMatrix};
use rand::Rng as _;

fn random_invertible(n: usize, q: u64, rng: &mut Rng) -> ModMatrix {
    loop {
        let h = ModMatrix::random(n, n, q, rng);
        if invert_mod(&h).is_ok() {
            return h;
        }
    }
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rng = Rng::seed_from_u64(5);
    let (n, q) = (2, 12_289);
    let gad = Gadget::new(n, q)?;
    let nk = gad.width();
    let r = smoothing_r(n);
    let abar = ModMatrix::random(n, nk, q, &mut rng);
    let h = random_invertible(n, q, &mut rng);
    let (a, td) = trap_gen(&gad, &abar, &h, r, &mut rng)?;
    println!(
        "A is {}×{}, trapdoor R is {}×{}",
        n,
        a.width(),
        td.r_blocks[0].rows(),
        td.r_blocks[0].cols()
    );
    println!("A·[R; I] = HG holds: {}", a.verify(&gad, &td));

    // LWE inversion
    let s: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
    let e = sample_z_vec(a.width(), GaussParam::new(2.0), &mut rng)?;
    let at_s = a.matrix().vec_mul(&s)?;
    let b: Vec<u64> = at_s
        .iter()
        .zip(&e)
        .map(|(&x, &ei)| reduce_i64(x as i64 + ei, q))
        .collect();
    let (s2, e2) = invert_lwe(&gad, &a, &td, &b, 0)?;
    println!("invert_lwe: s recovered {}, e recovered {}", s2 == s, e2 == e);

    // preimages at the smallest width the trapdoor supports
    let s_g = gadget_width(r);
    let width = td.s_min(0, s_g);
    let sampler = PreimageSampler::new(&gad, &a, &td, 0, width, r)?;
    let u: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
    for _ in 0..3 {
        let x = sampler.sample(&gad, &a, 0, &u, &mut rng)?;
        let ax = a
            .matrix()
            .mul_vec(&x.iter().map(|&v| reduce_i64(v, q)).collect::<Vec<_>>())?;
        let norm = x.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        println!("preimage at s = {width:.1}: A·x = u {}, ‖x‖ = {norm:.1}", ax == u);
    }

    // delegate to [A | A₁] with a fresh tag
    let a1 = ModMatrix::random(n, nk, q, &mut rng);
    let h2 = random_invertible(n, q, &mut rng);
    let r2 = del_trap(&gad, &sampler, &a, 0, &a1, &h2, &mut rng)?;
    let ext = TaggedMatrix::new(a.matrix(), &[&a1], vec![h2])?;
    let delegated = ibupre::trapdoor::Trapdoor::new(vec![r2], width);
    println!(
        "delegated trapdoor satisfies [A | A₁]·[R′; I] = H′G: {}",
        ext.verify(&gad, &delegated)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
