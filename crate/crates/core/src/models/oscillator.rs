//! Truncated harmonic oscillator: ladder operators, quantum Brownian motion
//! generator, harmonic coherent states and the squeezed-vacuum family.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::liouvillian::LindbladGenerator;
use crate::operator::{Operator, PureState};

/// Annihilation operator on `n` Fock levels.
pub fn annihilation(n: usize) -> Operator {
    let mut a = Operator::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// `x = (a + a†) / √2`
pub fn position(n: usize) -> Operator {
    let a = annihilation(n);
    (&a + a.adjoint()).unscale(2f64.sqrt())
}

/// `p = i(a† - a) / √2`
pub fn momentum(n: usize) -> Operator {
    let a = annihilation(n);
    (a.adjoint() - &a) * C64::new(0.0, 1.0 / 2f64.sqrt())
}

/// Parameters of quantum Brownian motion in units `ħ = m = 1`.
#[derive(Debug, Clone, Copy)]
pub struct QbmParams {
    pub cutoff: usize,
    pub diffusion: f64,
    pub omega: f64,
}

/// `dρ/dt = -i[H, ρ] - D[x, [x, ρ]]` with `H = ω(a†a + ½)`, realized with
/// the single jump operator `√(2D) x`.
pub fn qbm_model(p: QbmParams) -> Result<LindbladGenerator> {
    if p.cutoff < 2 {
        return Err(Error::config("model.cutoff", "must be at least 2"));
    }
    if !(p.diffusion > 0.0) {
        return Err(Error::config("model.diffusion", format!("must be positive, got {}", p.diffusion)));
    }
    if !(p.omega > 0.0) {
        return Err(Error::config("model.omega", format!("must be positive, got {}", p.omega)));
    }
    let n = p.cutoff;
    let h = Operator::from_fn(n, n, |i, j| if i == j { C64::new(p.omega * (i as f64 + 0.5), 0.0) } else { C64::new(0.0, 0.0) });
    let jump = position(n) * C64::new((2.0 * p.diffusion).sqrt(), 0.0);
    LindbladGenerator::with_jumps(h, vec![jump])
}

/// `⟨x²⟩ - ⟨x⟩²` with the truncated `x · x`.
pub fn position_variance(psi: &PureState) -> f64 {
    let x = position(psi.dim());
    let mean = psi.expectation(&x).re;
    let sq = psi.expectation(&(&x * &x)).re;
    sq - mean * mean
}

/// Population on the top quarter of the Fock ladder. Results for states
/// above `1e-10` here depend on the cutoff.
pub fn top_quarter_population(psi: &PureState) -> f64 {
    let n = psi.dim();
    let start = n - n / 4;
    (start..n).map(|k| psi.amplitudes()[k].norm_sqr()).sum()
}

pub fn truncation_ok(psi: &PureState) -> bool {
    top_quarter_population(psi) <= 1e-10
}

/// `e^{-|α|²/2} Σ αⁿ/√n! |n⟩`, renormalized on `cutoff` levels.
pub fn harmonic_coherent_state(cutoff: usize, alpha: C64) -> PureState {
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let v = CVector::from_fn(cutoff, |n, _| {
        let out = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
        out
    });
    PureState::new(v).expect("coherent amplitudes are nonzero")
}

/// Squeezed vacuum `⟨2n|s⟩ = (cosh s)^{-1/2} (-tanh s)ⁿ √((2n)!) / (2ⁿ n!)`,
/// renormalized on `cutoff` levels. Positive `s` narrows the position spread.
pub fn squeezed_vacuum(cutoff: usize, s: f64) -> PureState {
    let t = -s.tanh();
    let mut v = CVector::zeros(cutoff);
    // ratio c_{n+1}/c_n = t √((2n+1)(2n+2)) / (2(n+1))
    let mut c = 1.0 / s.cosh().sqrt();
    let mut n = 0;
    while 2 * n < cutoff {
        v[2 * n] = C64::new(c, 0.0);
        c *= t * (((2 * n + 1) * (2 * n + 2)) as f64).sqrt() / (2 * (n + 1)) as f64;
        n += 1;
    }
    PureState::new(v).expect("squeezed amplitudes are nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::lambda_pure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_commutator_below_cutoff() {
        let n = 12;
        let x = position(n);
        let p = momentum(n);
        let c = &x * &p - &p * &x;
        for k in 0..n - 1 {
            assert!((c[(k, k)] - C64::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn qbm_lambda_is_position_variance() {
        let p = QbmParams { cutoff: 20, diffusion: 0.3, omega: 1.1 };
        let gen = qbm_model(p).unwrap();
        assert!((lambda_pure(&gen, &PureState::basis(20, 0)) - 0.3).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let mut v = PureState::random(10, &mut rng).amplitudes().clone().resize_vertically(20, C64::new(0.0, 0.0));
            v.normalize_mut();
            let s = PureState::new(v).unwrap();
            let want = 2.0 * 0.3 * position_variance(&s);
            assert!((lambda_pure(&gen, &s) - want).abs() <= 1e-12 * want);
            assert!(truncation_ok(&s));
        }
    }

    #[test]
    fn squeezed_vacuum_variance() {
        let s = 0.4;
        let psi = squeezed_vacuum(60, s);
        assert!((position_variance(&psi) - 0.5 * (-2.0 * s).exp()).abs() < 1e-10);
        assert!(squeezed_vacuum(10, 0.0).fidelity(&PureState::basis(10, 0)) > 1.0 - 1e-15);
    }

    #[test]
    fn coherent_state_has_minimal_variance() {
        let psi = harmonic_coherent_state(60, C64::new(1.0, -0.5));
        assert!((position_variance(&psi) - 0.5).abs() < 1e-10);
    }
}
