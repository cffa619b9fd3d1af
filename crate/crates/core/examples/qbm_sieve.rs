//! Quantum Brownian motion. The instantaneous purity-loss rate is
//! `2D Var(x)`, which favours position-squeezed states; averaged over one
//! oscillator period the least affected state in the squeezed family is
//! the ground state, a coherent state.

use qsieve::models::oscillator::{position_variance, qbm_model, squeezed_vacuum, QbmParams};
use qsieve::sieve::{lambda_pure, PurityLossAverager};

fn main() -> qsieve::error::Result<()> {
    let params = QbmParams { cutoff: 30, diffusion: 0.01, omega: 1.0 };
    let gen = qbm_model(params)?;
    let period = 2.0 * std::f64::consts::PI / params.omega;
    let averager = PurityLossAverager::new(&gen, period, 64)?;

    println!("{:>6} {:>12} {:>14} {:>16}", "s", "Var(x)", "lambda", "period average");
    for k in -6..=6 {
        let s = 0.1 * k as f64;
        let psi = squeezed_vacuum(params.cutoff, s);
        println!(
            "{s:>6.2} {:>12.6} {:>14.6e} {:>16.6e}",
            position_variance(&psi),
            lambda_pure(&gen, &psi),
            averager.average(&psi)
        );
    }
    Ok(())
}
