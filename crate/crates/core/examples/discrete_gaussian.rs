//! Integer Gaussian sampling: a histogram against the ideal weights, a
//! shifted center, and a matrix of samples.

use std::error::Error;

use ibupre::sampler::{sample_z, sample_z_matrix, GaussParam, Rng};

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rng = Rng::seed_from_u64(7);
    let p = GaussParam::new(4.0);
    let n = 20_000;
    let draws: Vec<i64> = (0..n).map(|_| sample_z(p, &mut rng)).collect::<Result<_, _>>()?;

    // ρ_s(x) = exp(−π x²/s²), normalized over a generous window
    let rho = |x: i64| (-std::f64::consts::PI * (x * x) as f64 / (p.s * p.s)).exp();
    let total: f64 = (-60..=60).map(rho).sum();
    println!("D_Z,s with s = {}  ({n} draws)", p.s);
    println!("{:>4} {:>8} {:>8}", "x", "seen", "expected");
    for x in -6..=6 {
        let seen = draws.iter().filter(|&&d| d == x).count();
        println!("{x:>4} {seen:>8} {:>8.0}", n as f64 * rho(x) / total);
    }
    let mean = draws.iter().sum::<i64>() as f64 / n as f64;
    let var = draws.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / n as f64;
    println!("mean {mean:.3}, variance {var:.3} (σ² = {:.3})", p.sigma().powi(2));

    let shifted = GaussParam::centered_at(3.0, 10.25);
    let mean: f64 = (0..n)
        .map(|_| sample_z(shifted, &mut rng).map(|x| x as f64))
        .sum::<Result<f64, _>>()?
        / n as f64;
    println!("centered at {}: sample mean {mean:.3}", shifted.c);

    let m = sample_z_matrix(64, 32, GaussParam::new(3.0), &mut rng)?;
    println!(
        "64×32 matrix of D_Z,3: max |entry| = {}, spectral norm ≈ {:.1}",
        m.max_abs(),
        m.spectral_norm_estimate(30)
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
