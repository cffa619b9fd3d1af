//! The uniformly depolarizing qubit: every pure state loses purity at the
//! same rate, so the sieve finds a flat landscape and no quasi-classical
//! states.

use qsieve::models::toy_model;
use qsieve::operator::{self, PureState};
use qsieve::sieve::{lambda_pure, minimize_lambda, SieveOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qsieve::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gen = toy_model(operator::random_hermitian(2, &mut rng))?;

    let values: Vec<f64> = (0..200).map(|_| lambda_pure(&gen, &PureState::random(2, &mut rng))).collect();
    let spread = values.iter().fold(0.0f64, |m, &v| m.max((v - 1.0).abs()));
    println!("lambda over 200 random states: 1 +- {spread:.2e}");

    let report = minimize_lambda(&gen, &SieveOptions::default())?;
    println!("a0 = {:.12}, epsilon = {:.1e}", report.a0, report.epsilon);
    println!("flat landscape: {}", report.flat_landscape);
    println!("minimizers in band: {}", report.minimizers.len());
    println!("quasi-classical: {}", report.quasi_classical().len());
    Ok(())
}
