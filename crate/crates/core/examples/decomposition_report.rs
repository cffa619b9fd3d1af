//! Spectral split of a qutrit whose dissipation leaves the span of |0> and
//! |1> untouched: the isometric part is a two-level algebra plus the
//! stationary population of |2>, and the structural residuals are at
//! roundoff.

use qsieve::decomposition::{spectral_split, verify_split_properties};
use qsieve::linalg::C64;
use qsieve::liouvillian::LindbladGenerator;
use qsieve::operator::Operator;

fn main() -> qsieve::error::Result<()> {
    let mut h = Operator::zeros(3, 3);
    h[(0, 1)] = C64::new(0.4, 0.0);
    h[(1, 0)] = C64::new(0.4, 0.0);
    h[(2, 2)] = C64::new(1.5, 0.0);
    // Dephasing between the protected block and the third level.
    let mut v = Operator::zeros(3, 3);
    v[(2, 2)] = C64::new(1.0, 0.0);
    let gen = LindbladGenerator::with_jumps(h, vec![v])?;

    let sup = gen.superoperator();
    let split = spectral_split(&sup, None)?;
    println!("isometric dimension {}, swept dimension {}", split.iso_dim(), split.sweep_dim());
    println!("peripheral eigenvalues:");
    for z in &split.peripheral_eigenvalues {
        println!("  {:+.6} {:+.6}i", z.re, z.im);
    }
    let report = verify_split_properties(&sup, &split, &[0.5, 1.0, 40.0], 8, 3);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}
