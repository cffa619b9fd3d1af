//! The predictability sieve. The quadratic form
//! `λ(e) = -Re tr(e L(e))` ranks pure states by their initial rate of
//! purity loss. Minimizing it produces the most stable set, and the
//! superposition exclusion test picks out its quasi-classical members.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use crate::liouvillian::{LindbladGenerator, Superoperator};
use crate::operator::{self, Operator, PureState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// `λ(e) = -Re tr(e L(e))` for a Hermitian `e`, usually a rank-1 projector.
pub fn lambda_form(gen: &LindbladGenerator, e: &Operator) -> Result<f64> {
    if e.shape() != (gen.dim(), gen.dim()) {
        return Err(Error::DimensionMismatch { expected: gen.dim(), found: e.nrows() });
    }
    if !operator::is_hermitian(e, 1e-10) {
        return Err(Error::validation("λ is defined on Hermitian operators"));
    }
    let value = (e * gen.apply(e)).trace();
    if value.im.abs() > 1e-10 * (1.0 + value.re.abs()) {
        return Err(Error::validation(format!("tr(e L(e)) has imaginary part {:e}", value.im)));
    }
    Ok(-value.re)
}

/// `λ(ψψ†)` in `O(d²)` per dissipator term.
pub fn lambda_pure(gen: &LindbladGenerator, psi: &PureState) -> f64 {
    -gen.pure_state_value(psi.amplitudes())
}

fn lambda_and_gradient(gen: &LindbladGenerator, psi: &CVector) -> (f64, CVector) {
    let (value, g) = gen.pure_state_terms(psi);
    let euclid = g * C64::new(-2.0, 0.0);
    let overlap = psi.dotc(&euclid);
    (-value, &euclid - psi * overlap)
}

/// Riemannian gradient of `ψ ↦ λ(ψψ†)` on the unit sphere modulo phase,
/// with respect to the real inner product `Re⟨·,·⟩`. Orthogonal to `ψ`.
pub fn lambda_gradient(gen: &LindbladGenerator, psi: &PureState) -> CVector {
    lambda_and_gradient(gen, psi.amplitudes()).1
}

/// `S_lin(T_h e) / 2h`, the finite-time estimate of `λ(e)`.
pub fn lambda_from_entropy_rate(gen: &LindbladGenerator, e: &Operator, h: f64) -> Result<f64> {
    let out = crate::liouvillian::evolve(gen, e, h)?;
    Ok(operator::linear_entropy_raw(&out) / (2.0 * h))
}

/// Nontrivial superpositions `cos θ_k ψ_e + sin θ_k e^{iφ_m} ψ_f` with
/// `sin² θ_k = k / (n_ratio + 1)` for `k = 1..=n_ratio` and
/// `φ_m = 2πm / n_phase`. The moduli are spaced evenly in the weight of
/// `ψ_f`, so both ends of the family are sampled alike.
pub fn superposition_grid(e: &Operator, f: &Operator, n_ratio: usize, n_phase: usize) -> Result<Vec<PureState>> {
    let u = PureState::from_projector(e)?;
    let v = PureState::from_projector(f)?;
    superposition_grid_states(&u, &v, n_ratio, n_phase)
}

pub fn superposition_grid_states(u: &PureState, v: &PureState, n_ratio: usize, n_phase: usize) -> Result<Vec<PureState>> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: v.dim() });
    }
    if u.fidelity(v) >= 1.0 - 1e-12 {
        return Err(Error::DegenerateInput("superpositions need two distinct states".into()));
    }
    let mut out = Vec::with_capacity(n_ratio * n_phase);
    for k in 1..=n_ratio {
        let theta = (k as f64 / (n_ratio + 1) as f64).sqrt().asin();
        for m in 0..n_phase {
            let phi = 2.0 * PI * m as f64 / n_phase as f64;
            let z1 = C64::new(theta.cos(), 0.0);
            let z2 = C64::from_polar(theta.sin(), phi);
            out.push(operator::superpose_vectors(u.amplitudes(), v.amplitudes(), z1, z2)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SieveOptions {
    pub n_starts: usize,
    pub seed: u64,
    /// Convergence threshold on the Riemannian gradient norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Stability band; `None` means `max(1e-6, 1e-3 · a0)`.
    pub epsilon: Option<f64>,
    pub dedup_fidelity: f64,
    pub n_ratio: usize,
    pub n_phase: usize,
    /// Partners closer than this fidelity are skipped by the exclusion test.
    pub pair_max_fidelity: f64,
    pub histogram_samples: usize,
    pub histogram_bins: usize,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions {
            n_starts: 16,
            seed: 0,
            tol: 1e-8,
            max_iter: 5_000,
            epsilon: None,
            dedup_fidelity: 0.999,
            n_ratio: 24,
            n_phase: 16,
            pair_max_fidelity: 0.5,
            histogram_samples: 256,
            histogram_bins: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Minimizer {
    pub lambda: f64,
    #[serde(rename = "amplitudes")]
    pub state: PureState,
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub n_samples: usize,
    pub min: f64,
    pub max: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (max - min) / bins as f64;
        let edges = (0..=bins).map(|k| min + width * k as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = if width > 0.0 { (((v - min) / width) as usize).min(bins - 1) } else { 0 };
            counts[idx] += 1;
        }
        Histogram { n_samples: values.len(), min, max, edges, counts }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveReport {
    pub a0: f64,
    pub epsilon: f64,
    pub minimizers: Vec<Minimizer>,
    pub quasi_classical_flags: Vec<bool>,
    pub histogram: Histogram,
    /// Every sampled and optimized λ lies within the band.
    pub flat_landscape: bool,
    /// The exclusion test samples a finite grid; it cannot prove a
    /// statement about the whole continuum of superpositions.
    pub universality_sampled: bool,
    /// The whole band `[a0, a0 + ε]` is returned without further selection.
    pub whole_band_returned: bool,
    /// Random histogram samples inside the band; they join the exclusion
    /// test as partners.
    pub band_samples: usize,
    pub n_starts: usize,
    pub converged: usize,
    pub dropped: usize,
    pub seed: u64,
    pub grid: [usize; 2],
}

impl SieveReport {
    pub fn quasi_classical(&self) -> Vec<&Minimizer> {
        self.minimizers.iter().zip(&self.quasi_classical_flags).filter(|(_, &q)| q).map(|(m, _)| m).collect()
    }
}

struct Descent {
    state: PureState,
    lambda: f64,
    converged: bool,
}

fn descend(gen: &LindbladGenerator, start: &PureState, tol: f64, max_iter: usize) -> Descent {
    let mut psi = start.amplitudes().clone();
    let (mut lam, mut g) = lambda_and_gradient(gen, &psi);
    let mut step = 1.0;
    let mut converged = false;
    for _ in 0..max_iter {
        let gn2 = g.norm_squared();
        if gn2.sqrt() <= tol {
            converged = true;
            break;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let mut trial = &psi - &g * C64::new(step, 0.0);
            let n = trial.norm();
            trial.unscale_mut(n);
            let (lt, gt) = lambda_and_gradient(gen, &trial);
            let sufficient = lt < lam - 1e-4 * step * gn2;
            // Below the resolution of λ itself, progress is judged by the
            // gradient norm instead.
            let unresolved = (lt - lam).abs() <= 8.0 * f64::EPSILON * lam.abs().max(1e-300)
                && gt.norm_squared() < gn2;
            if sufficient || unresolved {
                psi = trial;
                lam = lt;
                g = gt;
                accepted = true;
                break;
            }
            // Minimizer of the quadratic through λ(0), λ'(0) and λ(step).
            let curvature = lt - lam + step * gn2;
            let interp = if curvature > 0.0 { 0.5 * step * step * gn2 / curvature } else { 0.5 * step };
            step = interp.clamp(0.1 * step, 0.5 * step);
        }
        if !accepted {
            // Line search exhausted at machine precision: stationary to
            // working accuracy if the gradient is small in relative terms.
            converged = g.norm() <= tol.sqrt();
            break;
        }
        step = (step * 2.0).min(1e3);
    }
    let state = PureState::new(psi).expect("unit vector");
    Descent { lambda: lambda_pure(gen, &state), state, converged }
}

fn start_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multi-start Riemannian gradient descent on `λ` over pure states.
pub fn minimize_lambda(gen: &LindbladGenerator, opts: &SieveOptions) -> Result<SieveReport> {
    if opts.n_starts == 0 {
        return Err(Error::validation("n_starts must be at least 1"));
    }
    let d = gen.dim();
    let runs: Vec<Descent> = (0..opts.n_starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = start_rng(opts.seed, k as u64 + 1);
            let start = PureState::random(d, &mut rng);
            descend(gen, &start, opts.tol, opts.max_iter)
        })
        .collect();
    let dropped = runs.iter().filter(|r| !r.converged).count();
    let mut kept: Vec<Descent> = runs.into_iter().filter(|r| r.converged).collect();
    if kept.is_empty() {
        return Err(Error::NonConvergence { dropped, max_iter: opts.max_iter });
    }
    kept.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    let a0 = kept[0].lambda;
    let epsilon = opts.epsilon.unwrap_or_else(|| default_epsilon(a0));

    let mut minimizers: Vec<Minimizer> = Vec::new();
    for r in kept.iter().filter(|r| r.lambda <= a0 + epsilon) {
        if minimizers.iter().all(|m| m.state.fidelity(&r.state) < opts.dedup_fidelity) {
            minimizers.push(Minimizer { lambda: r.lambda, state: r.state.clone() });
        }
    }

    let mut rng = start_rng(opts.seed, 0);
    let samples: Vec<PureState> = (0..opts.histogram_samples).map(|_| PureState::random(d, &mut rng)).collect();
    let values: Vec<f64> = samples.par_iter().map(|s| lambda_pure(gen, s)).collect();
    let histogram = Histogram::from_values(&values, opts.histogram_bins);
    let spread_max = values.iter().chain(kept.iter().map(|r| &r.lambda)).copied().fold(a0, f64::max);
    let flat_landscape = spread_max - a0 <= epsilon;

    let mut report = SieveReport {
        a0,
        epsilon,
        minimizers,
        quasi_classical_flags: Vec::new(),
        histogram,
        flat_landscape,
        universality_sampled: true,
        whole_band_returned: true,
        band_samples: 0,
        n_starts: opts.n_starts,
        converged: kept.len(),
        dropped,
        seed: opts.seed,
        grid: [opts.n_ratio, opts.n_phase],
    };
    let band_samples: Vec<PureState> =
        samples.into_iter().zip(&values).filter(|(_, &v)| v <= a0 + epsilon).map(|(s, _)| s).collect();
    report.band_samples = band_samples.len();
    report.quasi_classical_flags =
        quasi_classical_flags(gen, &report, &band_samples, opts.n_ratio, opts.n_phase, opts.pair_max_fidelity);
    Ok(report)
}

pub fn default_epsilon(a0: f64) -> f64 {
    (1e-3 * a0).max(1e-6)
}

/// True iff every grid superposition of `e` and `f` has `λ > a0 + ε`.
pub fn quasi_classical_test(
    gen: &LindbladGenerator,
    report: &SieveReport,
    e: &PureState,
    f: &PureState,
    n_ratio: usize,
    n_phase: usize,
) -> Result<bool> {
    let threshold = report.a0 + report.epsilon;
    let grid = superposition_grid_states(e, f, n_ratio, n_phase)?;
    Ok(grid.par_iter().all(|g| lambda_pure(gen, g) > threshold))
}

/// Per-minimizer exclusion flags. Partners are the other minimizers and
/// `band_samples`, further states known to lie in the band; only partners
/// whose fidelity with the minimizer is below `pair_max_fidelity` count.
pub fn quasi_classical_flags(
    gen: &LindbladGenerator,
    report: &SieveReport,
    band_samples: &[PureState],
    n_ratio: usize,
    n_phase: usize,
    pair_max_fidelity: f64,
) -> Vec<bool> {
    let mins = &report.minimizers;
    let n = mins.len();
    let passes = |u: &PureState, v: &PureState| {
        u.fidelity(v) >= pair_max_fidelity || quasi_classical_test(gen, report, u, v, n_ratio, n_phase).unwrap_or(false)
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let outcomes: Vec<bool> = pairs.par_iter().map(|&(i, j)| passes(&mins[i].state, &mins[j].state)).collect();
    let mut flags = vec![true; n];
    for (&(i, j), ok) in pairs.iter().zip(outcomes) {
        if !ok {
            flags[i] = false;
            flags[j] = false;
        }
    }
    flags
        .par_iter()
        .zip(mins.par_iter())
        .map(|(&f, m)| f && band_samples.iter().all(|s| passes(&m.state, s)))
        .collect()
}

/// Random states pushed onto the level set `λ = a` by damped Newton steps
/// along the gradient; only those within `band` of `a` are returned.
pub fn level_set_probe(gen: &LindbladGenerator, a: f64, band: f64, n_samples: usize, seed: u64) -> Vec<PureState> {
    let d = gen.dim();
    (0..n_samples)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = start_rng(seed, k as u64 + 1);
            let mut psi = PureState::random(d, &mut rng).amplitudes().clone();
            for _ in 0..200 {
                let (lam, g) = lambda_and_gradient(gen, &psi);
                let gap = lam - a;
                if gap.abs() <= 0.1 * band {
                    break;
                }
                let gn2 = g.norm_squared();
                if gn2 <= 1e-28 {
                    break;
                }
                let mut dir = &g * C64::new(gap / gn2, 0.0);
                let len = dir.norm();
                if len > 0.3 {
                    dir.scale_mut(0.3 / len);
                }
                psi -= dir;
                let n = psi.norm();
                psi.unscale_mut(n);
            }
            let state = PureState::new(psi).ok()?;
            ((lambda_pure(gen, &state) - a).abs() <= band).then_some(state)
        })
        .collect()
}

/// `(1/T) ∫₀^T S_lin(T_t e) dt` by the trapezoid rule on a uniform grid,
/// with the step propagator computed once.
#[derive(Debug, Clone)]
pub struct PurityLossAverager {
    step: Superoperator,
    n_points: usize,
}

impl PurityLossAverager {
    pub fn new(gen: &LindbladGenerator, horizon: f64, n_points: usize) -> Result<Self> {
        if !(horizon > 0.0) || n_points < 2 {
            return Err(Error::validation("time average needs a positive horizon and at least two points"));
        }
        let dt = horizon / (n_points - 1) as f64;
        Ok(PurityLossAverager { step: gen.superoperator().exp(dt), n_points })
    }

    pub fn average(&self, psi: &PureState) -> f64 {
        let d = psi.dim();
        let mut v = operator::vec_op(&psi.projector());
        let mut total = 0.0;
        for k in 0..self.n_points {
            let s = operator::linear_entropy_raw(&operator::unvec(&v, d));
            let w = if k == 0 || k + 1 == self.n_points { 0.5 } else { 1.0 };
            total += w * s;
            if k + 1 < self.n_points {
                v = self.step.matrix() * v;
            }
        }
        total / (self.n_points - 1) as f64
    }
}

pub fn time_averaged_purity_loss(gen: &LindbladGenerator, psi: &PureState, horizon: f64, n_points: usize) -> Result<f64> {
    Ok(PurityLossAverager::new(gen, horizon, n_points)?.average(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::liouvillian::{matrix_unit, real_diag};

    fn pointer(energies: &[f64]) -> LindbladGenerator {
        let d = energies.len();
        LindbladGenerator::with_jumps(real_diag(energies), (0..d).map(|i| matrix_unit(d, i, i)).collect()).unwrap()
    }

    fn toy() -> LindbladGenerator {
        let jumps = (0..2).flat_map(|i| (0..2).map(move |j| matrix_unit(2, i, j))).collect();
        LindbladGenerator::with_jumps(real_diag(&[0.3, -0.3]), jumps).unwrap()
    }

    fn random_jump_model(d: usize, seed: u64) -> LindbladGenerator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = operator::random_hermitian(d, &mut rng);
        let jumps = (0..2)
            .map(|_| operator::random_hermitian(d, &mut rng) + operator::random_hermitian(d, &mut rng) * crate::linalg::I)
            .collect();
        LindbladGenerator::with_jumps(h, jumps).unwrap()
    }

    #[test]
    fn lambda_values_on_small_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gen = toy();
        for _ in 0..20 {
            let s = PureState::random(2, &mut rng);
            assert!((lambda_form(&gen, &s.projector()).unwrap() - 1.0).abs() < 1e-12);
            assert!((lambda_pure(&gen, &s) - 1.0).abs() < 1e-12);
        }
        let p = pointer(&[0.0, 1.0]);
        assert!(lambda_form(&p, &matrix_unit(2, 0, 0)).unwrap().abs() < 1e-15);
        let plus = PureState::from_slice(&[ONE, ONE]).unwrap();
        assert!((lambda_pure(&p, &plus) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn lambda_form_rejects_non_hermitian() {
        let gen = toy();
        assert!(lambda_form(&gen, &matrix_unit(2, 0, 1)).is_err());
    }

    #[test]
    fn gradient_is_tangent_and_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gen = random_jump_model(4, 3);
        for _ in 0..10 {
            let psi = PureState::random(4, &mut rng);
            let g = lambda_gradient(&gen, &psi);
            assert!(psi.amplitudes().dotc(&g).norm() < 1e-10);
            for _ in 0..3 {
                let raw = PureState::random(4, &mut rng).amplitudes().clone();
                let dir = &raw - psi.amplitudes() * psi.amplitudes().dotc(&raw);
                let h = 1e-5;
                let plus = PureState::new(psi.amplitudes() + &dir * C64::new(h, 0.0)).unwrap();
                let minus = PureState::new(psi.amplitudes() - &dir * C64::new(h, 0.0)).unwrap();
                let fd = (lambda_pure(&gen, &plus) - lambda_pure(&gen, &minus)) / (2.0 * h);
                let an = dir.dotc(&g).re;
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} {an}");
            }
        }
    }

    #[test]
    fn gradient_vanishes_for_flat_and_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(lambda_gradient(&toy(), &PureState::random(2, &mut rng)).norm() < 1e-12);
        assert!(lambda_gradient(&pointer(&[0.0, 1.0, 2.0]), &PureState::basis(3, 1)).norm() < 1e-14);
    }

    #[test]
    fn entropy_rate_matches_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gen = random_jump_model(3, 6);
        for _ in 0..5 {
            let e = PureState::random(3, &mut rng).projector();
            let lam = lambda_form(&gen, &e).unwrap();
            let est = lambda_from_entropy_rate(&gen, &e, 1e-5).unwrap();
            assert!((lam - est).abs() <= 1e-3 * lam.abs().max(1e-3));
        }
    }

    #[test]
    fn grid_shape_and_nontriviality() {
        let e = matrix_unit(2, 0, 0);
        let f = matrix_unit(2, 1, 1);
        let single = superposition_grid(&e, &f, 1, 1).unwrap();
        let want = PureState::from_slice(&[ONE, ONE]).unwrap();
        assert_eq!(single.len(), 1);
        assert!((single[0].fidelity(&want) - 1.0).abs() < 1e-14);
        let grid = superposition_grid(&e, &f, 24, 16).unwrap();
        assert_eq!(grid.len(), 384);
        let (pe, pf) = (PureState::basis(2, 0), PureState::basis(2, 1));
        for g in &grid {
            assert!((g.amplitudes().norm() - 1.0).abs() < 1e-14);
            assert!(g.fidelity(&pe) < 1.0 - 1e-9 && g.fidelity(&pf) < 1.0 - 1e-9);
        }
        assert!(superposition_grid(&e, &e, 2, 2).is_err());
    }

    #[test]
    fn toy_sieve_is_flat() {
        let report = minimize_lambda(&toy(), &SieveOptions { n_starts: 8, seed: 3, ..Default::default() }).unwrap();
        assert!((report.a0 - 1.0).abs() < 1e-12);
        assert!(report.flat_landscape);
        assert_eq!(report.minimizers.len(), 8);
        assert!(report.quasi_classical().is_empty());
    }

    #[test]
    fn pointer_sieve_finds_basis_states() {
        let gen = pointer(&[0.0, 1.0, 2.5]);
        let report = minimize_lambda(&gen, &SieveOptions { n_starts: 24, seed: 11, ..Default::default() }).unwrap();
        assert!(report.a0.abs() < 1e-9);
        assert_eq!(report.minimizers.len(), 3);
        for m in &report.minimizers {
            let best = (0..3).map(|k| m.state.fidelity(&PureState::basis(3, k))).fold(0.0, f64::max);
            assert!(best > 1.0 - 1e-8);
        }
        assert!(report.quasi_classical_flags.iter().all(|&q| q));
    }

    #[test]
    fn sieve_is_deterministic() {
        let gen = random_jump_model(3, 8);
        let opts = SieveOptions { n_starts: 6, seed: 42, ..Default::default() };
        let a = serde_json::to_string(&minimize_lambda(&gen, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&minimize_lambda(&gen, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn toy_level_sets() {
        assert!(level_set_probe(&toy(), 0.5, 1e-6, 20, 1).is_empty());
        assert_eq!(level_set_probe(&toy(), 1.0, 1e-6, 20, 1).len(), 20);
    }

    #[test]
    fn pointer_level_set_hits_target() {
        let gen = pointer(&[0.0, 1.0, 2.0]);
        let states = level_set_probe(&gen, 0.3, 1e-8, 10, 2);
        assert!(!states.is_empty());
        for s in &states {
            assert!((lambda_pure(&gen, s) - 0.3).abs() <= 1e-8);
        }
    }

    #[test]
    fn purity_loss_average_of_fixed_point_is_zero() {
        let gen = pointer(&[0.0, 1.0]);
        let avg = PurityLossAverager::new(&gen, 3.0, 64).unwrap();
        assert!(avg.average(&PureState::basis(2, 0)).abs() < 1e-12);
        // Off-diagonal decays as e^{-t}: S_lin = ½(1 - e^{-2t}).
        let plus = PureState::from_slice(&[ONE, ONE]).unwrap();
        let exact = 0.5 * (1.0 - (1.0 - (-6.0f64).exp()) / 6.0);
        assert!((avg.average(&plus) - exact).abs() < 1e-3);
    }
}
