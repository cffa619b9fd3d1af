//! Purity loss of a pure state along the semigroup, written as CSV, and the
//! finite-difference estimate of λ from the initial slope.

use qsieve::models::pointer_model;
use qsieve::operator::{linear_entropy_raw, PureState};
use qsieve::liouvillian::evolve_series;
use qsieve::linalg::{CVector, C64};
use qsieve::sieve::{lambda_from_entropy_rate, lambda_pure};

fn main() -> qsieve::error::Result<()> {
    let gen = pointer_model(&[0.0, 1.0, 2.0])?;
    let psi = PureState::new(CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, 0.0)]))?;
    let e = psi.projector();

    let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    let series = evolve_series(&gen, &e, &times)?;
    println!("t,S_lin");
    for (t, rho) in times.iter().zip(&series) {
        println!("{t:.2},{:.12}", linear_entropy_raw(rho));
    }
    println!("# lambda = {:.10}", lambda_pure(&gen, &psi));
    println!("# S_lin(T_h e) / 2h at h = 1e-5: {:.10}", lambda_from_entropy_rate(&gen, &e, 1e-5)?);
    Ok(())
}
