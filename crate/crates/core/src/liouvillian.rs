//! Markovian generators `L(ρ) = -i[H, ρ] + L_D(ρ)`, their superoperator
//! matrices, the semigroup `T_t = exp(tL)` with its adjoint, and the
//! environment-induced-semigroup checks.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, I, ONE, ZERO};
use crate::operator::{self, Operator};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

const CHUNK: usize = 512;

/// Sum of jump terms `Σ V ρ V† - ½{Σ V†V, ρ}`.
#[derive(Debug, Clone)]
pub struct JumpDissipator {
    jumps: Vec<Operator>,
    gamma: Operator,
}

impl JumpDissipator {
    pub fn new(jumps: Vec<Operator>) -> Self {
        let d = jumps.first().map(|v| v.nrows()).unwrap_or(0);
        let gamma = jumps.iter().fold(Operator::zeros(d, d), |acc, v| acc + v.adjoint() * v);
        JumpDissipator { jumps, gamma }
    }

    pub fn jumps(&self) -> &[Operator] {
        &self.jumps
    }
}

/// Entrywise action `(L_D ρ)(x, y) = κ [K(x, y) - 1] ρ(x, y)` on a position grid.
#[derive(Debug, Clone)]
pub struct PositionKernel {
    pub rate: f64,
    pub kernel: DMatrix<f64>,
}

/// Weighted Kraus families `Σ_j w_j A_j ρ A_j† - ½{Σ_j w_j A_j†A_j, ρ}`.
///
/// Rank-one terms use `A = v v†` with `v` not necessarily normalized.
/// `transfer[(m, n)]` is the weight of the matrix unit `A = |m⟩⟨n|`.
#[derive(Debug, Clone)]
pub struct QuadratureDissipator {
    rank_one: Vec<(f64, CVector)>,
    /// `[Re V†, -Im V†]` with rows `v_j†`, so that every overlap `⟨v_j|ψ⟩`
    /// comes out of a single real matrix product.
    rank_one_rows: DMatrix<f64>,
    /// Transpose of `rank_one_rows`, for the gradient.
    rank_one_cols: DMatrix<f64>,
    rank_one_weights: Vec<f64>,
    dense: Vec<(f64, Operator)>,
    transfer: Option<DMatrix<f64>>,
    gamma: Operator,
}

impl QuadratureDissipator {
    pub fn new(
        dim: usize,
        rank_one: Vec<(f64, CVector)>,
        dense: Vec<(f64, Operator)>,
        transfer: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        if rank_one.iter().any(|(w, v)| *w < 0.0 || v.len() != dim)
            || dense.iter().any(|(w, a)| *w < 0.0 || a.shape() != (dim, dim))
        {
            return Err(Error::validation("quadrature terms need nonnegative weights and matching dims"));
        }
        if let Some(t) = &transfer {
            if t.shape() != (dim, dim) || t.iter().any(|&x| x < 0.0) {
                return Err(Error::validation("transfer matrix must be d×d and nonnegative"));
            }
        }
        let mut gamma = Operator::zeros(dim, dim);
        for (w, v) in &rank_one {
            // (v v†)† (v v†) = |v|² v v†
            gamma += (v * v.adjoint()).scale(w * v.norm_squared());
        }
        for (w, a) in &dense {
            gamma += (a.adjoint() * a).scale(*w);
        }
        if let Some(t) = &transfer {
            for n in 0..dim {
                let col: f64 = t.column(n).sum();
                gamma[(n, n)] += C64::new(col, 0.0);
            }
        }
        let rank_one_rows = DMatrix::from_fn(rank_one.len(), 2 * dim, |j, i| {
            let z = rank_one[j].1[i % dim];
            if i < dim {
                z.re
            } else {
                z.im
            }
        });
        let rank_one_cols = rank_one_rows.transpose();
        let rank_one_weights = rank_one.iter().map(|(w, _)| *w).collect();
        Ok(QuadratureDissipator { rank_one, rank_one_rows, rank_one_cols, rank_one_weights, dense, transfer, gamma })
    }

    /// `Σ_j w_j A_j†A_j`
    pub fn gamma(&self) -> &Operator {
        &self.gamma
    }

    pub fn rank_one_terms(&self) -> &[(f64, CVector)] {
        &self.rank_one
    }

    pub fn transfer(&self) -> Option<&DMatrix<f64>> {
        self.transfer.as_ref()
    }

    /// `⟨v_j|ψ⟩` for every rank-one term.
    fn overlaps(&self, psi: &CVector) -> Vec<C64> {
        let d = psi.len();
        // With rows [R, -M] and V† = R + iM: Re c = R a - M b and
        // Im c = R b + M a for ψ = a + ib.
        let mut b = DMatrix::zeros(2 * d, 2);
        for i in 0..d {
            b[(i, 0)] = psi[i].re;
            b[(i, 1)] = psi[i].im;
            b[(d + i, 0)] = psi[i].im;
            b[(d + i, 1)] = -psi[i].re;
        }
        let c = &self.rank_one_rows * b;
        (0..c.nrows()).map(|j| C64::new(c[(j, 0)], c[(j, 1)])).collect()
    }

    /// `Σ_j y_j v_j` for `y` given as real and imaginary columns.
    fn combine(&self, y: &DMatrix<f64>) -> CVector {
        let d = self.rank_one_cols.nrows() / 2;
        let p = &self.rank_one_cols * y;
        // The lower block of p holds -Mᵀy, and v_j = (R - iM)ᵀ row j, so
        // Σ y v = Rᵀy_r + Mᵀy_i + i(Rᵀy_i - Mᵀy_r).
        CVector::from_fn(d, |i, _| C64::new(p[(i, 0)] - p[(d + i, 1)], p[(i, 1)] + p[(d + i, 0)]))
    }

    /// `Σ_j w_j A_j ρ A_j†`, or its adjoint `Σ_j w_j A_j† ρ A_j`.
    fn kraus_sum(&self, rho: &Operator, adjoint: bool) -> Operator {
        let d = rho.nrows();
        // Fixed chunks keep the summation order, and hence the bits,
        // independent of scheduling.
        let partial: Vec<Operator> = self
            .rank_one
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = Operator::zeros(d, d);
                for (w, v) in chunk {
                    let c = v.dotc(&(rho * v));
                    acc += (v * v.adjoint()) * (c * *w);
                }
                acc
            })
            .collect();
        let mut out = partial.into_iter().fold(Operator::zeros(d, d), |a, b| a + b);
        for (w, a) in &self.dense {
            if adjoint {
                out += (a.adjoint() * rho * a).scale(*w);
            } else {
                out += (a * rho * a.adjoint()).scale(*w);
            }
        }
        if let Some(t) = &self.transfer {
            let diag: Vec<f64> = (0..d).map(|k| rho[(k, k)].re).collect();
            let diag_im: Vec<f64> = (0..d).map(|k| rho[(k, k)].im).collect();
            for m in 0..d {
                let (mut re, mut im) = (0.0, 0.0);
                for n in 0..d {
                    let tw = if adjoint { t[(n, m)] } else { t[(m, n)] };
                    re += tw * diag[n];
                    im += tw * diag_im[n];
                }
                out[(m, m)] += C64::new(re, im);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum Dissipator {
    None,
    Jumps(JumpDissipator),
    Kernel(PositionKernel),
    Quadrature(QuadratureDissipator),
}

impl Dissipator {
    fn apply(&self, rho: &Operator, adjoint: bool) -> Operator {
        let d = rho.nrows();
        match self {
            Dissipator::None => Operator::zeros(d, d),
            Dissipator::Jumps(j) => {
                let mut out = operator::anticommutator(&j.gamma, rho).scale(-0.5);
                for v in &j.jumps {
                    if adjoint {
                        out += v.adjoint() * rho * v;
                    } else {
                        out += v * rho * v.adjoint();
                    }
                }
                out
            }
            Dissipator::Kernel(k) => {
                Operator::from_fn(d, d, |i, j| rho[(i, j)] * (k.rate * (k.kernel[(i, j)] - 1.0)))
            }
            Dissipator::Quadrature(q) => {
                q.kraus_sum(rho, adjoint) - operator::anticommutator(&q.gamma, rho).scale(0.5)
            }
        }
    }

    /// For a unit vector `ψ` with `e = ψψ†`, returns `⟨ψ|L_D(e)|ψ⟩` and
    /// `(L_D + L_D†)(e) ψ`.
    /// First component of `pure_terms` without the gradient work.
    fn pure_value(&self, psi: &CVector) -> f64 {
        let Dissipator::Quadrature(q) = self else {
            return self.pure_terms(psi).0;
        };
        let overlaps = q.overlaps(psi);
        let mut value: f64 = overlaps.iter().zip(&q.rank_one_weights).map(|(c, w)| w * c.norm_sqr() * c.norm_sqr()).sum();
        value -= psi.dotc(&(&q.gamma * psi)).re;
        for (w, a) in &q.dense {
            value += w * psi.dotc(&(a * psi)).norm_sqr();
        }
        if let Some(t) = &q.transfer {
            let p = DMatrix::from_iterator(psi.len(), 1, psi.iter().map(|z| z.norm_sqr()));
            value += (p.transpose() * t * &p)[(0, 0)];
        }
        value
    }

    fn pure_terms(&self, psi: &CVector) -> (f64, CVector) {
        let d = psi.len();
        match self {
            Dissipator::None => (0.0, CVector::zeros(d)),
            Dissipator::Jumps(j) => {
                let gpsi = &j.gamma * psi;
                let gexp = psi.dotc(&gpsi).re;
                let mut value = -gexp;
                let mut grad = (&gpsi + psi * C64::new(gexp, 0.0)) * C64::new(-1.0, 0.0);
                for v in &j.jumps {
                    let vpsi = v * psi;
                    let c = psi.dotc(&vpsi);
                    value += c.norm_sqr();
                    grad += &vpsi * c.conj() + v.adjoint() * psi * c;
                }
                (value, grad)
            }
            Dissipator::Kernel(k) => {
                let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
                let kp: Vec<f64> = (0..d).map(|i| (0..d).map(|j| k.kernel[(i, j)] * p[j]).sum()).collect();
                let overlap: f64 = p.iter().zip(&kp).map(|(a, b)| a * b).sum();
                let value = k.rate * (overlap - 1.0);
                let grad = CVector::from_fn(d, |i, _| psi[i] * (2.0 * k.rate * (kp[i] - 1.0)));
                (value, grad)
            }
            Dissipator::Quadrature(q) => {
                let gpsi = &q.gamma * psi;
                let gexp = psi.dotc(&gpsi).re;
                let overlaps = q.overlaps(psi);
                let mut rank_value = 0.0;
                let mut scaled = DMatrix::zeros(overlaps.len(), 2);
                for (j, c) in overlaps.iter().enumerate() {
                    let w = q.rank_one_weights[j];
                    let c2 = c.norm_sqr();
                    rank_value += w * c2 * c2;
                    scaled[(j, 0)] = 2.0 * w * c2 * c.re;
                    scaled[(j, 1)] = 2.0 * w * c2 * c.im;
                }
                let mut grad = q.combine(&scaled);
                let mut value = rank_value - gexp;
                grad -= &gpsi + psi * C64::new(gexp, 0.0);
                for (w, a) in &q.dense {
                    let apsi = a * psi;
                    let c = psi.dotc(&apsi);
                    value += w * c.norm_sqr();
                    grad += (&apsi * c.conj() + a.adjoint() * psi * c) * C64::new(*w, 0.0);
                }
                if let Some(t) = &q.transfer {
                    let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
                    for m in 0..d {
                        let (mut fwd, mut back) = (0.0, 0.0);
                        for n in 0..d {
                            fwd += t[(m, n)] * p[n];
                            back += t[(n, m)] * p[n];
                        }
                        value += fwd * p[m];
                        grad[m] += psi[m] * (fwd + back);
                    }
                }
                (value, grad)
            }
        }
    }

    fn superoperator(&self, d: usize) -> CMatrix {
        let n = d * d;
        let id = CMatrix::identity(d, d);
        match self {
            Dissipator::None => CMatrix::zeros(n, n),
            Dissipator::Jumps(j) => {
                let mut m = (id.kronecker(&j.gamma) + j.gamma.transpose().kronecker(&id)).scale(-0.5);
                for v in &j.jumps {
                    m += v.conjugate().kronecker(v);
                }
                m
            }
            Dissipator::Kernel(k) => {
                let mut m = CMatrix::zeros(n, n);
                for col in 0..d {
                    for row in 0..d {
                        let idx = row + col * d;
                        m[(idx, idx)] = C64::new(k.rate * (k.kernel[(row, col)] - 1.0), 0.0);
                    }
                }
                m
            }
            Dissipator::Quadrature(q) => {
                let mut m = (id.kronecker(&q.gamma) + q.gamma.transpose().kronecker(&id)).scale(-0.5);
                if !q.rank_one.is_empty() {
                    // Σ w u u† with u = v̄ ⊗ v.
                    let nodes = q.rank_one.len();
                    let mut u = CMatrix::zeros(n, nodes);
                    let mut uw = CMatrix::zeros(nodes, n);
                    for (k, (w, v)) in q.rank_one.iter().enumerate() {
                        let col = v.conjugate().kronecker(v);
                        for r in 0..n {
                            u[(r, k)] = col[r];
                            uw[(k, r)] = col[r].conj() * *w;
                        }
                    }
                    m += linalg::matmul(&u, &uw);
                }
                for (w, a) in &q.dense {
                    m += a.conjugate().kronecker(a).scale(*w);
                }
                if let Some(t) = &q.transfer {
                    for mm in 0..d {
                        for nn in 0..d {
                            m[(mm + mm * d, nn + nn * d)] += C64::new(t[(mm, nn)], 0.0);
                        }
                    }
                }
                m
            }
        }
    }
}

/// Hamiltonian plus dissipator, with `ħ = 1`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: Operator,
    dissipator: Dissipator,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: Operator, dissipator: Dissipator) -> Result<Self> {
        let d = hamiltonian.nrows();
        if !hamiltonian.is_square() || d == 0 {
            return Err(Error::validation("Hamiltonian must be a nonempty square matrix"));
        }
        if !operator::is_hermitian(&hamiltonian, operator::HERMITIAN_TOL) {
            return Err(Error::validation("Hamiltonian is not Hermitian"));
        }
        match &dissipator {
            Dissipator::None => {}
            Dissipator::Jumps(j) => {
                if let Some(v) = j.jumps.iter().find(|v| v.shape() != (d, d)) {
                    return Err(Error::DimensionMismatch { expected: d, found: v.nrows() });
                }
            }
            Dissipator::Kernel(k) => {
                if k.kernel.shape() != (d, d) {
                    return Err(Error::DimensionMismatch { expected: d, found: k.kernel.nrows() });
                }
                if !(k.rate > 0.0) {
                    return Err(Error::validation("kernel rate must be positive"));
                }
                let asym = (0..d)
                    .flat_map(|i| (0..d).map(move |j| (i, j)))
                    .map(|(i, j)| (k.kernel[(i, j)] - k.kernel[(j, i)]).abs())
                    .fold(0.0, f64::max);
                let diag = (0..d).map(|i| (k.kernel[(i, i)] - 1.0).abs()).fold(0.0, f64::max);
                if asym > 1e-12 || diag > 1e-12 {
                    return Err(Error::validation("position kernel must be symmetric with unit diagonal"));
                }
            }
            Dissipator::Quadrature(q) => {
                if q.gamma.nrows() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: q.gamma.nrows() });
                }
            }
        }
        let gen = LindbladGenerator { hamiltonian, dissipator };
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
        for _ in 0..2 {
            let rho = operator::random_density(d, &mut rng);
            let tr = gen.apply(&rho).trace().norm();
            if tr > 1e-12 * d as f64 * (1.0 + gen.scale()) {
                return Err(Error::validation(format!("generator is not trace preserving: |tr L(ρ)| = {tr:e}")));
            }
        }
        Ok(gen)
    }

    pub fn hamiltonian_only(hamiltonian: Operator) -> Result<Self> {
        Self::new(hamiltonian, Dissipator::None)
    }

    pub fn with_jumps(hamiltonian: Operator, jumps: Vec<Operator>) -> Result<Self> {
        if jumps.is_empty() {
            return Self::hamiltonian_only(hamiltonian);
        }
        Self::new(hamiltonian, Dissipator::Jumps(JumpDissipator::new(jumps)))
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn dissipator(&self) -> &Dissipator {
        &self.dissipator
    }

    fn scale(&self) -> f64 {
        let h = linalg::max_abs(&self.hamiltonian);
        let dis = match &self.dissipator {
            Dissipator::None => 0.0,
            Dissipator::Jumps(j) => linalg::max_abs(&j.gamma),
            Dissipator::Kernel(k) => k.rate,
            Dissipator::Quadrature(q) => linalg::max_abs(&q.gamma),
        };
        h + dis
    }

    /// `L(ρ)`
    pub fn apply(&self, rho: &Operator) -> Operator {
        let comm = operator::commutator(&self.hamiltonian, rho) * (-I);
        comm + self.dissipator.apply(rho, false)
    }

    /// Hilbert-Schmidt adjoint `L†(X)`.
    pub fn apply_adjoint(&self, x: &Operator) -> Operator {
        let comm = operator::commutator(&self.hamiltonian, x) * I;
        comm + self.dissipator.apply(x, true)
    }

    pub fn checked_apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.nrows() });
        }
        Ok(self.apply(rho))
    }

    /// For a unit vector `ψ`: `⟨ψ|L(ψψ†)|ψ⟩` (real) and
    /// `(L + L†)(ψψ†) ψ`. The Hamiltonian contributes to neither.
    pub fn pure_state_terms(&self, psi: &CVector) -> (f64, CVector) {
        self.dissipator.pure_terms(psi)
    }

    /// `⟨ψ|L(ψψ†)|ψ⟩` alone.
    pub fn pure_state_value(&self, psi: &CVector) -> f64 {
        self.dissipator.pure_value(psi)
    }

    pub fn superoperator(&self) -> Superoperator {
        let d = self.dim();
        let id = CMatrix::identity(d, d);
        let h = &self.hamiltonian;
        let ham = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-I);
        Superoperator { dim: d, matrix: ham + self.dissipator.superoperator(d) }
    }
}

/// `d² × d²` matrix acting on column-stacked operators.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(Error::validation("superoperator matrix must be d²×d²"));
        }
        Ok(Superoperator { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &Operator) -> Operator {
        operator::unvec(&(&self.matrix * operator::vec_op(rho)), self.dim)
    }

    pub fn adjoint(&self) -> Superoperator {
        Superoperator { dim: self.dim, matrix: self.matrix.adjoint() }
    }

    /// `exp(t M)`
    pub fn exp(&self, t: f64) -> Superoperator {
        Superoperator { dim: self.dim, matrix: linalg::expm(&self.matrix.scale(t)) }
    }

    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Superoperator { dim: self.dim, matrix: linalg::matmul(&self.matrix, &other.matrix) }
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, divided by `d` for unit trace.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut c = CMatrix::zeros(d * d, d * d);
        for j in 0..d {
            for i in 0..d {
                let col = self.matrix.column(i + j * d);
                for l in 0..d {
                    for k in 0..d {
                        c[(i * d + k, j * d + l)] = col[k + l * d] / d as f64;
                    }
                }
            }
        }
        c
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        linalg::ComplexSchur::new(&self.matrix).eigenvalues()
    }
}

/// `T_t ρ` for a density matrix `ρ` and `t ≥ 0`.
pub fn evolve(gen: &LindbladGenerator, rho: &Operator, t: f64) -> Result<Operator> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    if rho.shape() != (gen.dim(), gen.dim()) {
        return Err(Error::DimensionMismatch { expected: gen.dim(), found: rho.nrows() });
    }
    let rho = operator::validate_density(rho)?;
    if t == 0.0 {
        return Ok(rho);
    }
    let out = gen.superoperator().exp(t).apply(&rho);
    operator::validate_density(&out)
}

/// `T_t ρ` at each of the sorted `times`, reusing step propagators.
pub fn evolve_series(gen: &LindbladGenerator, rho: &Operator, times: &[f64]) -> Result<Vec<Operator>> {
    if let Some(&t) = times.iter().find(|&&t| t < 0.0 || !t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::validation("times must be sorted ascending"));
    }
    let m = gen.superoperator();
    let mut state = operator::validate_density(rho)?;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut cache: Option<(f64, Superoperator)> = None;
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            let reuse = matches!(&cache, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt.max(1.0));
            if !reuse {
                cache = Some((dt, m.exp(dt)));
            }
            let prop = &cache.as_ref().expect("propagator cached above").1;
            state = operator::validate_density(&prop.apply(&state))?;
            now = t;
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Superoperator of the adjoint semigroup generator, `M†`.
pub fn adjoint_semigroup(gen: &LindbladGenerator) -> Superoperator {
    gen.superoperator().adjoint()
}

#[derive(Debug, Clone, Serialize)]
pub struct EisTimeReport {
    pub t: f64,
    pub min_choi_eigenvalue: f64,
    pub max_trace_error: f64,
    pub max_trace_norm_excess: f64,
    pub max_operator_norm_excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EisReport {
    pub per_time: Vec<EisTimeReport>,
    pub min_choi_eigenvalue: f64,
    pub max_trace_error: f64,
    pub max_trace_norm_excess: f64,
    pub max_operator_norm_excess: f64,
    pub completely_positive: bool,
    pub trace_preserving: bool,
    pub trace_norm_contractive: bool,
    pub operator_norm_contractive: bool,
    pub passed: bool,
}

pub const CHOI_TOL: f64 = -1e-8;
pub const TRACE_TOL: f64 = 1e-10;
pub const CONTRACTION_TOL: f64 = 1e-9;

/// Complete positivity, trace preservation and contractivity in the trace
/// and operator norms of `T_t` at each of `times`.
pub fn eis_check(gen: &LindbladGenerator, n_samples: usize, times: &[f64], seed: u64) -> EisReport {
    let d = gen.dim();
    let m = gen.superoperator();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let densities: Vec<Operator> = (0..n_samples).map(|_| operator::random_density(d, &mut rng)).collect();
    let hermitians: Vec<Operator> = (0..n_samples).map(|_| operator::random_hermitian(d, &mut rng)).collect();
    let per_time: Vec<EisTimeReport> = times
        .iter()
        .map(|&t| {
            let prop = m.exp(t);
            let choi_min = linalg::eigvalsh(&prop.choi()).first().copied().unwrap_or(0.0);
            let trace_err = densities
                .iter()
                .map(|rho| (prop.apply(rho).trace() - ONE).norm())
                .fold(0.0, f64::max);
            let (tn, on) = densities
                .par_iter()
                .chain(hermitians.par_iter())
                .map(|a| {
                    let out = prop.apply(a);
                    let out = (&out + out.adjoint()).scale(0.5);
                    (
                        operator::trace_norm(&out) - operator::trace_norm(a),
                        operator::operator_norm(&out) - operator::operator_norm(a),
                    )
                })
                .reduce(|| (f64::NEG_INFINITY, f64::NEG_INFINITY), |x, y| (x.0.max(y.0), x.1.max(y.1)));
            EisTimeReport {
                t,
                min_choi_eigenvalue: choi_min,
                max_trace_error: trace_err,
                max_trace_norm_excess: tn,
                max_operator_norm_excess: on,
            }
        })
        .collect();
    let fold = |f: fn(&EisTimeReport) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        per_time.iter().map(f).fold(init, pick)
    };
    let min_choi = fold(|r| r.min_choi_eigenvalue, f64::INFINITY, f64::min);
    let trace_err = fold(|r| r.max_trace_error, 0.0, f64::max);
    let tn = fold(|r| r.max_trace_norm_excess, f64::NEG_INFINITY, f64::max);
    let on = fold(|r| r.max_operator_norm_excess, f64::NEG_INFINITY, f64::max);
    let cp = min_choi >= CHOI_TOL;
    let tp = trace_err <= TRACE_TOL;
    let tnc = tn <= CONTRACTION_TOL;
    let onc = on <= CONTRACTION_TOL;
    EisReport {
        per_time,
        min_choi_eigenvalue: min_choi,
        max_trace_error: trace_err,
        max_trace_norm_excess: tn,
        max_operator_norm_excess: on,
        completely_positive: cp,
        trace_preserving: tp,
        trace_norm_contractive: tnc,
        operator_norm_contractive: onc,
        passed: cp && tp && tnc && onc,
    }
}

pub(crate) fn matrix_unit(d: usize, i: usize, j: usize) -> Operator {
    let mut m = Operator::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub(crate) fn real_diag(vals: &[f64]) -> Operator {
    Operator::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| C64::new(v, 0.0))))
}

#[allow(dead_code)]
pub(crate) fn zero_op(d: usize) -> Operator {
    Operator::from_element(d, d, ZERO)
}
