//! Robust states are exactly those in the isometric part: a state whose
//! purity never drops under the semigroup lies in the subspace on which the
//! dynamics acts isometrically, and conversely.

use qsieve::decomposition::{iso_membership, robustness_probe, spectral_split};
use qsieve::linalg::C64;
use qsieve::models::pointer_model;
use qsieve::operator::PureState;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qsieve::error::Result<()> {
    let gen = pointer_model(&[0.0, 0.5, 1.7])?;
    let split = spectral_split(&gen.superoperator(), None)?;
    let times = [0.5, 1.0, 2.0, 5.0, 10.0];
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let mut cases = vec![("basis |1>", PureState::basis(3, 1))];
    let mut v = PureState::basis(3, 0).amplitudes().clone();
    v[2] = C64::new(0.05, 0.0);
    cases.push(("perturbed |0>", PureState::new(v)?));
    cases.push(("random", PureState::random(3, &mut rng)));

    println!("{:<14} {:>14} {:>14} {:>14}", "state", "max S_lin fwd", "max S_lin bwd", "membership");
    for (name, psi) in cases {
        let e = psi.projector();
        let r = robustness_probe(&gen, &e, &times, Some(&split))?;
        println!("{name:<14} {:>14.3e} {:>14.3e} {:>14.3e}", r.forward, r.backward, iso_membership(&split, &e));
    }
    Ok(())
}
