//! Pointer dynamics `L(ρ) = -i[H, ρ] + Σ P_i ρ P_i - ρ`: the isometric part
//! consists of the diagonal matrices and the classical states are the
//! basis projectors.

use qsieve::decomposition::{classical_states, spectral_split, ClassifyOptions};
use qsieve::models::pointer_model;

fn main() -> qsieve::error::Result<()> {
    let energies = [0.0, 0.7, 1.3, 2.9];
    let gen = pointer_model(&energies)?;
    let sup = gen.superoperator();
    let split = spectral_split(&sup, None)?;
    println!("dimension {}: isometric {}, swept {}", energies.len(), split.iso_dim(), split.sweep_dim());
    println!("spectral gap {:.3}", split.diagnostics.spectral_gap);

    let set = classical_states(&gen, &split, &ClassifyOptions::default())?;
    for (state, residual) in set.states.iter().zip(&set.fixed_point_residuals) {
        let k = state.amplitudes().iter().position(|z| z.norm() > 0.5).unwrap();
        println!("classical state |{k}>  fixed-point residual {residual:.1e}");
    }
    println!("largest overlap between distinct states: {:.1e}", set.max_off_diagonal_overlap());
    Ok(())
}
