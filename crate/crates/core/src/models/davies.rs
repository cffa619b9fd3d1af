//! SU(1,1) coherent states on the Poincaré disc, the invariant-measure
//! quadrature, and the continuous-measurement generator built from them.
//!
//! Node vectors are the first `N` Fock coefficients of the untruncated
//! coherent states, `(1 - r²) √(n+1) ζⁿ`. With Gauss-Legendre radii on
//! `[0, 1]` and a uniform angular rule the quadrature integrates every
//! polynomial integrand that λ produces on the truncated space exactly.
//! The compressed jump map then loses trace near the cutoff. A classical
//! transfer between Fock levels puts it back while keeping the model unital.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::liouvillian::{Dissipator, LindbladGenerator, QuadratureDissipator};
use crate::operator::PureState;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Largest tail allowed when truncating a coherent state.
pub const TAIL_TOL: f64 = 1e-10;

/// `(1 - u)² Σ_{n≥N} (n+1) uⁿ` with `u = |ζ|²`.
pub fn coherent_tail(cutoff: usize, modulus: f64) -> f64 {
    let u = modulus * modulus;
    let n = cutoff as f64;
    u.powi(cutoff as i32) * ((n + 1.0) * (1.0 - u) + u)
}

/// Untruncated coherent amplitudes `(1 - |ζ|²) √(n+1) ζⁿ` for `n < cutoff`.
pub fn coherent_coefficients(cutoff: usize, zeta: C64) -> CVector {
    let pre = 1.0 - zeta.norm_sqr();
    let mut power = C64::new(1.0, 0.0);
    CVector::from_fn(cutoff, |n, _| {
        let out = power * (pre * ((n + 1) as f64).sqrt());
        power *= zeta;
        out
    })
}

/// Normalized coherent state `|ζ⟩` on the first `cutoff` Fock levels.
pub fn su11_coherent_state(cutoff: usize, zeta: C64) -> Result<PureState> {
    let r = zeta.norm();
    if !(r < 1.0) {
        return Err(Error::validation(format!("|zeta| = {r} must be < 1")));
    }
    let tail = coherent_tail(cutoff, r);
    if tail > TAIL_TOL {
        return Err(Error::Truncation { cutoff, modulus: r, tail });
    }
    PureState::new(coherent_coefficients(cutoff, zeta))
}

/// Coherent state closest to `psi` and the fidelity attained.
pub fn nearest_su11_coherent(psi: &PureState) -> (C64, f64) {
    let n = psi.dim();
    let amps = psi.amplitudes();
    let fid = |z: C64| -> f64 {
        if z.norm() >= 1.0 {
            return -1.0;
        }
        let c = coherent_coefficients(n, z);
        c.dotc(amps).norm_sqr() / c.norm_squared()
    };
    let mut best = C64::new(0.0, 0.0);
    let mut best_f = fid(best);
    if amps[0].norm() > 1e-3 && n > 1 {
        let guess = amps[1] / (amps[0] * 2f64.sqrt());
        if guess.norm() < 0.999 && fid(guess) > best_f {
            best = guess;
            best_f = fid(guess);
        }
    }
    for ri in 1..20 {
        for ti in 0..32 {
            let z = C64::from_polar(ri as f64 * 0.05 - 0.0001, 2.0 * PI * ti as f64 / 32.0);
            let f = fid(z);
            if f > best_f {
                best = z;
                best_f = f;
            }
        }
    }
    let mut step = 0.05;
    while step > 1e-12 {
        let mut moved = false;
        for dir in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
            let z = best + dir * step;
            let f = fid(z);
            if f > best_f {
                best = z;
                best_f = f;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best, best_f)
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule for `dμ = dA / π(1 - |ζ|²)²` on `|ζ| < r_max ≤ 1`.
#[derive(Debug, Clone)]
pub struct DiscQuadrature {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

/// Closed form of `∫dμ (tr e_n e_ζ)²`.
pub fn exact_moment(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0) / ((2.0 * n + 1.0) * (2.0 * n + 3.0))
}

impl DiscQuadrature {
    /// Gauss-Legendre radii on `[0, r_max]`, trapezoid in angle. With
    /// `r_max = 1` every node is interior since Gauss points avoid the ends.
    pub fn new(r_max: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max <= 1.0) {
            return Err(Error::validation(format!("r_max = {r_max} must lie in (0, 1]")));
        }
        if n_r == 0 || n_theta == 0 {
            return Err(Error::validation("quadrature needs at least one node in each direction"));
        }
        let (radii, rw) = gauss_legendre(n_r, 0.0, r_max);
        let dtheta = 2.0 * PI / n_theta as f64;
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for (&r, &w) in radii.iter().zip(&rw) {
            let radial = w * r / (PI * (1.0 - r * r).powi(2));
            for m in 0..n_theta {
                nodes.push(C64::from_polar(r, dtheta * m as f64));
                weights.push(radial * dtheta);
            }
        }
        Ok(DiscQuadrature { nodes, weights, r_max, n_r, n_theta })
    }

    /// Smallest rule that is exact for a Fock cutoff of `cutoff`, plus margin.
    pub fn for_cutoff(cutoff: usize) -> Self {
        let n = 2 * cutoff + 8;
        Self::new(1.0, n, n).expect("valid default quadrature")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature value of `∫dμ (tr e_n e_ζ)²`.
    pub fn moment(&self, n: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| {
                let u = z.norm_sqr();
                w * ((1.0 - u).powi(2) * (n + 1) as f64 * u.powi(n as i32)).powi(2)
            })
            .sum()
    }

    /// Quadrature value of `∫dμ tr(e_ζ e_ψ e_ζ)` for `ψ` on the first
    /// `ψ.dim()` Fock levels. Equal to one in exact arithmetic.
    pub fn consistency(&self, psi: &PureState) -> f64 {
        let n = psi.dim();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * coherent_coefficients(n, *z).dotc(psi.amplitudes()).norm_sqr())
            .sum()
    }
}

/// Built continuous-measurement model.
#[derive(Debug, Clone)]
pub struct DaviesModel {
    pub generator: LindbladGenerator,
    pub cutoff: usize,
    pub kappa: f64,
    /// Number of leading Fock levels on which λ is reproduced exactly.
    pub exact_levels: usize,
}

/// `1 - Σ_j w_j ‖v_j‖² |v_j(n)|²`, the trace the compressed jump map
/// fails to return from level `n`.
fn level_deficits(quad: &DiscQuadrature, vectors: &[CVector]) -> Vec<f64> {
    let n = vectors.first().map(|v| v.len()).unwrap_or(0);
    let mut c = vec![0.0; n];
    for (v, w) in vectors.iter().zip(&quad.weights) {
        let norm2 = v.norm_squared();
        for (k, ck) in c.iter_mut().enumerate() {
            *ck += w * norm2 * v[k].norm_sqr();
        }
    }
    c.into_iter().map(|ck| (1.0 - ck).max(0.0)).collect()
}

/// Symmetric nonnegative transfer whose row and column sums equal `a`,
/// vanishing on the largest leading block `L` whose deficit total does not
/// exceed that of the rest. Returns the matrix and `|L|`.
fn overflow_transfer(a: &[f64]) -> (DMatrix<f64>, usize) {
    let n = a.len();
    let total: f64 = a.iter().sum();
    let mut lower = 0;
    let mut acc = 0.0;
    while lower < n && acc + a[lower] <= total - acc - a[lower] {
        acc += a[lower];
        lower += 1;
    }
    let a_l = acc;
    let a_u = total - acc;
    let mut t = DMatrix::zeros(n, n);
    if a_u <= 0.0 {
        return (t, lower);
    }
    for u in lower..n {
        for l in 0..lower {
            let x = a[u] * a[l] / a_u;
            t[(u, l)] = x;
            t[(l, u)] = x;
        }
        for u2 in lower..n {
            t[(u, u2)] = a[u] * a[u2] * (1.0 - a_l / a_u) / a_u;
        }
    }
    (t, lower)
}

/// Generator `-i[H, ρ] + κ ∫dμ e_ζ ρ e_ζ - κρ` on `cutoff` Fock levels,
/// with `H = diag(energies)`.
pub fn davies_model(cutoff: usize, kappa: f64, energies: &[f64], quad: &DiscQuadrature) -> Result<DaviesModel> {
    if cutoff < 2 {
        return Err(Error::config("model.cutoff", "must be at least 2"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::config("model.kappa", format!("must be positive, got {kappa}")));
    }
    if energies.len() != cutoff {
        return Err(Error::DimensionMismatch { expected: cutoff, found: energies.len() });
    }
    for n in 0..cutoff.min(6) {
        let residual = (quad.moment(n) - exact_moment(n)).abs();
        if residual > 1e-6 {
            return Err(Error::Quadrature { moment: format!("moment n = {n}"), residual });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1);
    for _ in 0..10 {
        let psi = PureState::random(cutoff, &mut rng);
        let residual = (quad.consistency(&psi) - 1.0).abs();
        if residual > 1e-4 {
            return Err(Error::Quadrature { moment: "consistency relation tr J(D, e_psi) = kappa".into(), residual });
        }
    }

    let vectors: Vec<CVector> = quad.nodes.iter().map(|z| coherent_coefficients(cutoff, *z)).collect();
    let deficits = level_deficits(quad, &vectors);
    let (transfer, lower) = overflow_transfer(&deficits);
    let rank_one = vectors.into_iter().zip(&quad.weights).map(|(v, w)| (kappa * w, v)).collect();
    let dissipator = QuadratureDissipator::new(cutoff, rank_one, Vec::new(), Some(transfer * kappa))?;
    let h = crate::liouvillian::real_diag(energies);
    let generator = LindbladGenerator::new(h, Dissipator::Quadrature(dissipator))?;
    Ok(DaviesModel { generator, cutoff, kappa, exact_levels: lower })
}

/// Davies model with `H = diag(0, 1, …, N-1)` and the default quadrature.
pub fn davies_default(cutoff: usize, kappa: f64) -> Result<DaviesModel> {
    let energies: Vec<f64> = (0..cutoff).map(|n| n as f64).collect();
    davies_model(cutoff, kappa, &energies, &DiscQuadrature::for_cutoff(cutoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::lambda_pure;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7, 0.0, 2.0);
        for k in 0..14 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let want = 2f64.powi(k + 1) / (k + 1) as f64;
            assert!((got - want).abs() < 1e-12 * want.max(1.0), "k={k}");
        }
        assert!(x.iter().all(|&v| v > 0.0 && v < 2.0));
    }

    #[test]
    fn moments_match_closed_form() {
        let q = DiscQuadrature::for_cutoff(8);
        for n in 0..=5 {
            assert!((q.moment(n) - exact_moment(n)).abs() < 1e-12);
        }
        assert!((exact_moment(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((exact_moment(5) - 6.0 / 143.0).abs() < 1e-15);
    }

    #[test]
    fn coherent_state_expansion() {
        assert!((su11_coherent_state(10, C64::new(0.0, 0.0)).unwrap().fidelity(&PureState::basis(10, 0)) - 1.0).abs() < 1e-15);
        let zeta = C64::from_polar(0.4, 0.3);
        let c = coherent_coefficients(6, zeta);
        let u: f64 = 0.16;
        for n in 0..6 {
            let want = (1.0 - u).powi(2) * (n + 1) as f64 * u.powi(n as i32);
            assert!((c[n].norm_sqr() - want).abs() < 1e-15);
        }
        let state = coherent_coefficients(400, C64::new(0.9, 0.0));
        assert!((state.norm() - 1.0).abs() < 1e-10);
        assert!(matches!(su11_coherent_state(20, C64::new(0.9, 0.0)), Err(Error::Truncation { .. })));
    }

    #[test]
    fn overflow_transfer_has_prescribed_margins() {
        let a = [0.1, 0.2, 0.3, 0.35, 0.5, 0.6];
        let (t, lower) = overflow_transfer(&a);
        for k in 0..a.len() {
            assert!((t.row(k).sum() - a[k]).abs() < 1e-14);
            assert!((t.column(k).sum() - a[k]).abs() < 1e-14);
        }
        assert!(t.iter().all(|&x| x >= 0.0));
        for i in 0..lower {
            for j in 0..lower {
                assert_eq!(t[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn davies_lambda_on_number_and_coherent_states() {
        let kappa = 1.3;
        let model = davies_default(12, kappa).unwrap();
        for n in 0..model.exact_levels.min(4) {
            let want = kappa * (1.0 - exact_moment(n));
            let got = lambda_pure(&model.generator, &PureState::basis(12, n));
            assert!((got - want).abs() < 1e-10, "n={n}: {got} vs {want}");
        }
        let model = davies_default(40, kappa).unwrap();
        for &r in &[0.0, 0.2, 0.45, 0.6] {
            let e = su11_coherent_state(40, C64::from_polar(r, 1.1)).unwrap();
            assert!((lambda_pure(&model.generator, &e) - 2.0 * kappa / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn nearest_coherent_recovers_parameter() {
        let zeta = C64::from_polar(0.37, -2.0);
        let s = su11_coherent_state(30, zeta).unwrap();
        let (z, f) = nearest_su11_coherent(&s);
        assert!((z - zeta).norm() < 1e-6);
        assert!(f > 1.0 - 1e-12);
    }
}
