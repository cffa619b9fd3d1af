//! The SU(1,1) measurement process. The disc quadrature reproduces the
//! coherent-state moments, coherent states lose purity at rate 2κ/3, and
//! the sieve returns states that are coherent to high fidelity.
//!
//! Usage: `cargo run --release --example davies_coherent [cutoff]`

use qsieve::linalg::C64;
use qsieve::models::davies::{exact_moment, DiscQuadrature};
use qsieve::models::{davies_default, nearest_su11_coherent, su11_coherent_state};
use qsieve::operator::PureState;
use qsieve::sieve::{lambda_pure, minimize_lambda, SieveOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qsieve::error::Result<()> {
    let cutoff: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let kappa = 1.0;

    let quad = DiscQuadrature::for_cutoff(cutoff);
    println!("quadrature with {} nodes", quad.len());
    for n in 0..=5 {
        println!("  moment {n}: {:.15} (exact {:.15})", quad.moment(n), exact_moment(n));
    }

    let model = davies_default(cutoff, kappa)?;
    let gen = &model.generator;
    println!("lambda is exact on the lowest {} levels", model.exact_levels);
    for z in [C64::new(0.0, 0.0), C64::new(0.3, -0.2), C64::new(-0.4, 0.1)] {
        let psi = su11_coherent_state(cutoff, z)?;
        println!("  lambda(coherent {z:.2}) = {:.10}", lambda_pure(gen, &psi));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random: Vec<f64> = (0..50).map(|_| lambda_pure(gen, &PureState::random(cutoff, &mut rng))).collect();
    let lo = random.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = random.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("random states: lambda in [{lo:.4}, {hi:.4}]");

    let report = minimize_lambda(gen, &SieveOptions { n_starts: 6, ..Default::default() })?;
    println!("a0 = {:.6}, epsilon = {:.1e}", report.a0, report.epsilon);
    for (m, q) in report.minimizers.iter().zip(&report.quasi_classical_flags) {
        let (zeta, fid) = nearest_su11_coherent(&m.state);
        println!("  lambda {:.8}  nearest coherent zeta = {zeta:.3} (fidelity {fid:.6})  quasi-classical {q}", m.lambda);
    }
    Ok(())
}
