//! Isometric-sweeping split of a semigroup generator, membership of pure
//! states in the isometric part, and enumeration of classical states.
//!
//! The split is read off an ordered complex Schur form of the superoperator
//! matrix `M = Q T Q†`. Eigenvalues with `|Re λ| ≤ tol` are moved to the
//! leading block `T11`. The spectral projector onto that invariant subspace
//! along the complementary one is `Q [I -X; 0 0] Q†`, where `X` solves
//! `T11 X - X T22 = -T12`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::liouvillian::{LindbladGenerator, Superoperator};
use crate::operator::{self, Operator, PureState};
use crate::sieve;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

/// Membership threshold used for "lies in the isometric subspace".
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct SplitDiagnostics {
    pub tol: f64,
    /// Smallest `|Re λ|` outside the peripheral spectrum (the decay rate of
    /// the slowest swept mode); infinite when nothing is swept.
    pub spectral_gap: f64,
    pub max_peripheral_real_part: f64,
    /// Frobenius norm of the Sylvester solution. Large values mean the two
    /// subspaces are nearly parallel and the split is ill-conditioned.
    pub separation_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralSplit {
    dim: usize,
    pub iso_basis: Vec<Operator>,
    pub sweep_basis: Vec<Operator>,
    pub iso_projection: Superoperator,
    pub peripheral_eigenvalues: Vec<C64>,
    pub diagnostics: SplitDiagnostics,
}

impl SpectralSplit {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn iso_dim(&self) -> usize {
        self.iso_basis.len()
    }

    pub fn sweep_dim(&self) -> usize {
        self.sweep_basis.len()
    }

    /// Component of `a` in the isometric subspace.
    pub fn iso_part(&self, a: &Operator) -> Operator {
        self.iso_projection.apply(a)
    }

    /// Component of `a` in the sweeping subspace.
    pub fn sweep_part(&self, a: &Operator) -> Operator {
        a - self.iso_projection.apply(a)
    }
}

struct LeadingBlock {
    q: CMatrix,
    t: CMatrix,
    k: usize,
    x: CMatrix,
}

fn leading_block<F: Fn(C64) -> bool>(m: &CMatrix, select: F, scale: f64) -> Result<LeadingBlock> {
    let mut schur = linalg::ComplexSchur::new(m);
    let k = schur.reorder(&select, |z| z.im);
    let t = &schur.t;
    // Equal eigenvalues inside the selected block must not be coupled.
    let cluster_tol = 1e-6 * scale;
    let coupling_tol = 1e-7 * scale;
    for i in 0..k {
        for j in (i + 1)..k {
            if (t[(i, i)] - t[(j, j)]).norm() <= cluster_tol && t[(i, j)].norm() > coupling_tol {
                return Err(Error::DefectivePeripheral {
                    eigenvalue: format!("{:.3e}{:+.3e}i", t[(i, i)].re, t[(i, i)].im),
                    coupling: t[(i, j)].norm(),
                });
            }
        }
    }
    let x = schur.separation(k);
    if !x.iter().all(|z| z.is_finite()) || linalg::frobenius(&x) > 1e10 {
        let z = t[(0, 0)];
        return Err(Error::DefectivePeripheral {
            eigenvalue: format!("{:.3e}{:+.3e}i", z.re, z.im),
            coupling: linalg::frobenius(&x),
        });
    }
    Ok(LeadingBlock { q: schur.q, t: schur.t, k, x })
}

fn block_projector(b: &LeadingBlock) -> CMatrix {
    let n = b.q.nrows();
    let q1 = b.q.columns(0, b.k).into_owned();
    let q2 = b.q.columns(b.k, n - b.k).into_owned();
    let left = q1.adjoint() - linalg::matmul(&b.x, &q2.adjoint());
    linalg::matmul(&q1, &left)
}

fn default_scale(eigenvalues: &[C64]) -> f64 {
    eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

/// Split of `Tr(H)` into the span of the peripheral (purely imaginary)
/// spectrum and the span of the decaying one. `tol`, when given, is the
/// absolute threshold on `|Re λ|`; the default is `1e-9` times the
/// spectral radius (at least 1).
pub fn spectral_split(sup: &Superoperator, tol: Option<f64>) -> Result<SpectralSplit> {
    let d = sup.dim();
    let n = d * d;
    let m = sup.matrix();
    let probe = linalg::ComplexSchur::new(m).eigenvalues();
    let scale = default_scale(&probe);
    let tol = match tol {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::validation(format!("split tolerance must be positive, got {t}"))),
        None => 1e-9 * scale,
    };
    let block = leading_block(m, |z| z.re.abs() <= tol, scale)?;
    let k = block.k;
    let p = block_projector(&block);

    let iso_basis: Vec<Operator> = (0..k).map(|j| operator::unvec(&block.q.column(j).into_owned(), d)).collect();
    let sweep_basis: Vec<Operator> = if k < n {
        let q1 = block.q.columns(0, k).into_owned();
        let q2 = block.q.columns(k, n - k).into_owned();
        let span = linalg::matmul(&q1, &block.x) + q2;
        let qr = span.qr().q();
        (0..n - k).map(|j| operator::unvec(&qr.column(j).into_owned(), d)).collect()
    } else {
        Vec::new()
    };

    let peripheral: Vec<C64> = (0..k).map(|i| block.t[(i, i)]).collect();
    let gap = (k..n).map(|i| block.t[(i, i)].re.abs()).fold(f64::INFINITY, f64::min);
    let max_per = peripheral.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    Ok(SpectralSplit {
        dim: d,
        iso_basis,
        sweep_basis,
        iso_projection: Superoperator::from_matrix(d, p)?,
        peripheral_eigenvalues: peripheral,
        diagnostics: SplitDiagnostics { tol, spectral_gap: gap, max_peripheral_real_part: max_per, separation_norm: linalg::frobenius(&block.x) },
    })
}

/// Projection onto `ker M` along the other generalized eigenspaces. For a
/// trace-preserving semigroup whose peripheral spectrum is `{0}` this maps
/// an initial state to its long-time limit.
pub fn stationary_projection(sup: &Superoperator, tol: Option<f64>) -> Result<Superoperator> {
    let m = sup.matrix();
    let probe = linalg::ComplexSchur::new(m).eigenvalues();
    let scale = default_scale(&probe);
    let tol = tol.unwrap_or(1e-9 * scale);
    let block = leading_block(m, |z| z.norm() <= tol, scale)?;
    Superoperator::from_matrix(sup.dim(), block_projector(&block))
}

/// `‖(1 - P)(e)‖₂`, the distance of `e` from the isometric subspace along
/// the sweeping one.
pub fn iso_membership(split: &SpectralSplit, e: &Operator) -> f64 {
    operator::hs_norm(&split.sweep_part(e))
}

/// Rank-1 projectors obtained as simple spectral projectors of a random
/// Hermitian element of the isometric subspace, kept if they lie in it.
pub fn rank_one_projectors_in_iso(split: &SpectralSplit, seed: u64) -> Vec<Operator> {
    let d = split.dim;
    if split.iso_basis.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Operator::zeros(d, d);
    for basis in &split.iso_basis {
        let c = C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        b += basis * c;
    }
    let k = split.iso_part(&((&b + b.adjoint()) * C64::new(0.5, 0.0)));
    let k = (&k + k.adjoint()) * C64::new(0.5, 0.0);
    let (vals, vecs) = linalg::eigh(&k);
    let spread = (vals[d - 1] - vals[0]).abs().max(f64::MIN_POSITIVE);
    simple_indices(&vals, 1e-8 * spread)
        .into_iter()
        .map(|i| {
            let v = vecs.column(i).into_owned();
            &v * v.adjoint()
        })
        .filter(|e| iso_membership(split, e) <= MEMBERSHIP_TOL)
        .collect()
}

fn simple_indices(vals: &[f64], gap: f64) -> Vec<usize> {
    (0..vals.len())
        .filter(|&i| {
            let left = i == 0 || vals[i] - vals[i - 1] > gap;
            let right = i + 1 == vals.len() || vals[i + 1] - vals[i] > gap;
            left && right
        })
        .collect()
}

fn multiplicities(vals: &[f64], gap: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut run = 1;
    for w in vals.windows(2) {
        if w[1] - w[0] > gap {
            out.push(run);
            run = 1;
        } else {
            run += 1;
        }
    }
    out.push(run);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub times: Vec<f64>,
    /// (a) `max ‖(1-P)(B†)‖₂` over the isometric basis.
    pub star_invariance: f64,
    /// (b) `max |tr(φ₁φ₂)|` for `φ₁` isometric, `φ₂` sweeping basis elements.
    pub trace_orthogonality: f64,
    /// (c) `max(‖P² - P‖, ‖PM - MP‖ / max(1, ‖M‖))`.
    pub direct_sum: f64,
    /// (c) smallest singular value of the joint basis; zero means the two
    /// subspaces fail to span.
    pub joint_basis_min_singular_value: f64,
    /// (d) `max |‖T_tφ‖₂ - ‖φ‖₂|` over random unit isometric elements.
    pub isometry: f64,
    /// (d) `max ‖T_t(φ₁φ₂) - T_t(φ₁)T_t(φ₂)‖₂`.
    pub multiplicativity: f64,
    /// (e) largest matrix element of `T_tφ` over the sweeping basis at the
    /// last time; `None` when nothing is swept.
    pub sweep_decay: Option<f64>,
    /// (e) asymptotic decay rate of the swept part.
    pub sweep_rate: f64,
    /// (i) `max ‖(1-P)(φ₁φ₂)‖₂` over random pairs.
    pub product_closure: f64,
    /// (ii) `max ‖(1-P)(e ∨ f)‖₂` over rank-1 projectors found in the
    /// isometric subspace.
    pub join_closure: f64,
    pub rank_one_projectors_found: usize,
    /// `‖P - P†‖` in the Hilbert-Schmidt sense.
    pub projection_asymmetry: f64,
}

impl SplitReport {
    /// Largest residual among (a) through (d), (i) and (ii). Decay and
    /// self-adjointness are reported separately.
    pub fn max_structural_residual(&self) -> f64 {
        [
            self.star_invariance,
            self.trace_orthogonality,
            self.direct_sum,
            self.isometry,
            self.multiplicativity,
            self.product_closure,
            self.join_closure,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn random_iso_element(split: &SpectralSplit, rng: &mut ChaCha8Rng) -> Operator {
    let d = split.dim;
    let mut a = Operator::zeros(d, d);
    for b in &split.iso_basis {
        a += b * C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
    }
    let n = operator::hs_norm(&a).max(f64::MIN_POSITIVE);
    a.unscale(n)
}

/// Numerical residuals of the structural properties of the split.
pub fn verify_split_properties(
    sup: &Superoperator,
    split: &SpectralSplit,
    times: &[f64],
    n_samples: usize,
    seed: u64,
) -> SplitReport {
    let d = sup.dim();
    let m = sup.matrix();
    let p = split.iso_projection.matrix();
    let n = d * d;

    let star = split.iso_basis.iter().map(|b| iso_membership(split, &b.adjoint())).fold(0.0, f64::max);
    let orth = split
        .iso_basis
        .par_iter()
        .map(|a| split.sweep_basis.iter().map(|b| (a * b).trace().norm()).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    let pp = linalg::matmul(p, p);
    let idem = linalg::max_abs(&(&pp - p));
    let comm = linalg::max_abs(&(linalg::matmul(p, m) - linalg::matmul(m, p))) / linalg::max_abs(m).max(1.0);
    let dims = (split.iso_dim() + split.sweep_dim()).abs_diff(n) as f64;
    let mut joint = CMatrix::zeros(n, n.min(split.iso_dim() + split.sweep_dim()));
    for (j, b) in split.iso_basis.iter().chain(&split.sweep_basis).enumerate().take(joint.ncols()) {
        joint.set_column(j, &operator::vec_op(b));
    }
    let min_sv = linalg::singular_values(&joint).last().copied().unwrap_or(0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Operator, Operator)> =
        (0..n_samples).map(|_| (random_iso_element(split, &mut rng), random_iso_element(split, &mut rng))).collect();
    let product_closure = if split.iso_basis.is_empty() {
        0.0
    } else {
        pairs.iter().map(|(a, b)| iso_membership(split, &(a * b))).fold(0.0, f64::max)
    };

    let props: Vec<Superoperator> = times.iter().map(|&t| sup.exp(t)).collect();
    let (mut isometry, mut mult) = (0.0f64, 0.0f64);
    if !split.iso_basis.is_empty() {
        for prop in &props {
            for (a, b) in &pairs {
                let ta = prop.apply(a);
                let tb = prop.apply(b);
                isometry = isometry.max((operator::hs_norm(&ta) - operator::hs_norm(a)).abs());
                let tab = prop.apply(&(a * b));
                mult = mult.max(operator::hs_norm(&(tab - &ta * &tb)));
            }
        }
    }
    let sweep_decay = match (props.last(), split.sweep_basis.is_empty()) {
        (Some(prop), false) => Some(
            split.sweep_basis.par_iter().map(|b| linalg::max_abs(&prop.apply(b))).reduce(|| 0.0, f64::max),
        ),
        _ => None,
    };

    let rank_one = rank_one_projectors_in_iso(split, seed ^ 0x5eed);
    let mut join = 0.0f64;
    for i in 0..rank_one.len() {
        for j in (i + 1)..rank_one.len() {
            if let Ok(jn) = operator::join_projectors(&rank_one[i], &rank_one[j]) {
                join = join.max(iso_membership(split, &jn));
            }
        }
    }
    let asym = linalg::max_abs(&(p - p.adjoint()));

    SplitReport {
        times: times.to_vec(),
        star_invariance: star,
        trace_orthogonality: orth,
        direct_sum: idem.max(comm).max(dims),
        joint_basis_min_singular_value: min_sv,
        isometry,
        multiplicativity: mult,
        sweep_decay,
        sweep_rate: split.diagnostics.spectral_gap,
        product_closure,
        join_closure: join,
        rank_one_projectors_found: rank_one.len(),
        projection_asymmetry: asym,
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    pub seed: u64,
    pub n_ratio: usize,
    pub n_phase: usize,
    pub max_draws: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { seed: 0, n_ratio: 24, n_phase: 16, max_draws: 5 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalSet {
    #[serde(skip)]
    pub projectors: Vec<Operator>,
    pub states: Vec<PureState>,
    pub pairwise_overlaps: Vec<Vec<f64>>,
    pub fixed_point_residuals: Vec<f64>,
    pub kernel_dim: usize,
    pub draws: usize,
    /// Every kernel draw had the same repeated eigenvalues; those
    /// eigenspaces were skipped instead of retried.
    pub structural_degeneracy: bool,
    pub candidates: usize,
    pub excluded: usize,
    pub universality_sampled: bool,
}

impl ClassicalSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn max_off_diagonal_overlap(&self) -> f64 {
        let n = self.len();
        (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| self.pairwise_overlaps[i][j]).fold(0.0, f64::max)
    }
}

/// Hermitian operators spanning `ker M`.
pub fn hermitian_kernel(sup: &Superoperator) -> Vec<Operator> {
    let d = sup.dim();
    let m = sup.matrix();
    let tol = 1e-9 * linalg::frobenius(m).max(1.0);
    let raw = linalg::null_space(m, tol);
    let mut herm: Vec<CVector> = Vec::with_capacity(2 * raw.len());
    for v in &raw {
        let x = operator::unvec(v, d);
        let re = (&x + x.adjoint()) * C64::new(0.5, 0.0);
        let im = (&x - x.adjoint()) * C64::new(0.0, -0.5);
        herm.push(operator::vec_op(&re));
        herm.push(operator::vec_op(&im));
    }
    linalg::orthonormalize(&herm, 1e-8).iter().map(|v| {
        let x = operator::unvec(v, d);
        (&x + x.adjoint()) * C64::new(0.5, 0.0)
    }).collect()
}

/// Pairwise orthogonal pure fixed points none of whose sampled
/// superpositions with another robust pure state stays robust.
pub fn classical_states(gen: &LindbladGenerator, split: &SpectralSplit, opts: &ClassifyOptions) -> Result<ClassicalSet> {
    let d = gen.dim();
    let sup = gen.superoperator();
    let kernel = hermitian_kernel(&sup);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut chosen: Option<(Vec<f64>, CMatrix)> = None;
    let mut patterns: Vec<Vec<usize>> = Vec::new();
    let mut draws = 0;
    let mut last = None;
    if !kernel.is_empty() {
        for _ in 0..opts.max_draws.max(1) {
            draws += 1;
            let mut k = Operator::zeros(d, d);
            for h in &kernel {
                k += h * C64::new(StandardNormal.sample(&mut rng), 0.0);
            }
            let (vals, vecs) = linalg::eigh(&k);
            let spread = (vals[d - 1] - vals[0]).abs().max(1.0);
            let pattern = multiplicities(&vals, 1e-10 * spread);
            if pattern.iter().all(|&m| m == 1) {
                chosen = Some((vals, vecs));
                break;
            }
            patterns.push(pattern);
            last = Some((vals, vecs));
        }
    }
    let structural = chosen.is_none() && !patterns.is_empty();
    if structural && patterns.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::DegenerateKernel(draws));
    }
    let (vals, vecs) = match chosen.or(last) {
        Some(x) => x,
        None => return Ok(empty_set(kernel.len(), draws)),
    };
    let spread = (vals[d - 1] - vals[0]).abs().max(1.0);
    let candidates: Vec<(Operator, PureState, f64)> = simple_indices(&vals, 1e-10 * spread)
        .into_iter()
        .filter_map(|i| {
            let state = PureState::new(vecs.column(i).into_owned()).ok()?;
            let e = state.projector();
            let res = operator::hs_norm(&gen.apply(&e));
            (res <= 1e-8 && iso_membership(split, &e) <= MEMBERSHIP_TOL).then_some((e, state, res))
        })
        .collect();

    let mut partners: Vec<PureState> = candidates.iter().map(|c| c.1.clone()).collect();
    for e in rank_one_projectors_in_iso(split, opts.seed ^ 0x5eed) {
        if let Ok(s) = PureState::from_projector(&e) {
            if partners.iter().all(|p| p.fidelity(&s) < 1.0 - 1e-8) {
                partners.push(s);
            }
        }
    }

    let keep: Vec<bool> = candidates
        .par_iter()
        .map(|(_, s, _)| {
            partners.iter().filter(|f| f.fidelity(s) < 1.0 - 1e-8).all(|f| {
                sieve::superposition_grid_states(s, f, opts.n_ratio, opts.n_phase)
                    .map(|grid| grid.iter().all(|g| iso_membership(split, &g.projector()) > MEMBERSHIP_TOL))
                    .unwrap_or(true)
            })
        })
        .collect();
    let n_candidates = candidates.len();
    let kept: Vec<(Operator, PureState, f64)> = candidates.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(c, _)| c).collect();
    let overlaps: Vec<Vec<f64>> = kept
        .iter()
        .map(|(a, _, _)| kept.iter().map(|(b, _, _)| (a * b).trace().norm()).collect())
        .collect();
    Ok(ClassicalSet {
        projectors: kept.iter().map(|c| c.0.clone()).collect(),
        states: kept.iter().map(|c| c.1.clone()).collect(),
        fixed_point_residuals: kept.iter().map(|c| c.2).collect(),
        pairwise_overlaps: overlaps,
        kernel_dim: kernel.len(),
        draws,
        structural_degeneracy: structural,
        candidates: n_candidates,
        excluded: n_candidates - kept.len(),
        universality_sampled: true,
    })
}

fn empty_set(kernel_dim: usize, draws: usize) -> ClassicalSet {
    ClassicalSet {
        projectors: Vec::new(),
        states: Vec::new(),
        pairwise_overlaps: Vec::new(),
        fixed_point_residuals: Vec::new(),
        kernel_dim,
        draws,
        structural_degeneracy: false,
        candidates: 0,
        excluded: 0,
        universality_sampled: true,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub times: Vec<f64>,
    /// `max_t S_lin(T_t e)`
    pub forward: f64,
    /// `max_t S_lin(T*_t e)`
    pub backward: f64,
    pub robust: bool,
    pub iso_membership: Option<f64>,
}

/// Purity loss of `e` under the semigroup and under its adjoint.
pub fn robustness_probe(gen: &LindbladGenerator, e: &Operator, times: &[f64], split: Option<&SpectralSplit>) -> Result<RobustnessReport> {
    if let Some(&t) = times.iter().find(|&&t| t < 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let sup = gen.superoperator();
    let adj = sup.adjoint();
    let (mut fwd, mut bwd) = (0.0f64, 0.0f64);
    for &t in times {
        fwd = fwd.max(operator::linear_entropy_raw(&sup.exp(t).apply(e)));
        bwd = bwd.max(operator::linear_entropy_raw(&adj.exp(t).apply(e)));
    }
    Ok(RobustnessReport {
        times: times.to_vec(),
        forward: fwd,
        backward: bwd,
        robust: fwd <= 1e-8 && bwd <= 1e-8,
        iso_membership: split.map(|s| iso_membership(s, e)),
    })
}
