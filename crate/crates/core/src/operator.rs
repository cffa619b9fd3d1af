//! Operators on a finite Hilbert space, pure states modulo phase, norms,
//! entropies, and the projector lattice operations used by the
//! classification.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ZERO};
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense operator on a `dim`-dimensional Hilbert space.
pub type Operator = CMatrix;

/// Relative Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on trace and on negative eigenvalues of a density matrix.
pub const DENSITY_TOL: f64 = 1e-10;
/// Rank decisions: singular values below this fraction of the largest one are zero.
pub const RANK_TOL: f64 = 1e-8;
/// Entries below this modulus do not count as "first nonzero" for phase fixing.
const GAUGE_EPS: f64 = 1e-12;

pub fn is_hermitian(a: &Operator, rel_tol: f64) -> bool {
    let scale = linalg::max_abs(a);
    linalg::max_abs(&(a - a.adjoint())) <= rel_tol * scale.max(f64::MIN_POSITIVE)
}

pub fn trace(a: &Operator) -> C64 {
    a.trace()
}

/// Check the density-matrix contract and clean up numerical dust: negative
/// eigenvalues in `[-1e-10, 0)` are clamped to zero and the trace restored.
pub fn validate_density(rho: &Operator) -> Result<Operator> {
    if !rho.is_square() {
        return Err(Error::validation("density matrix must be square"));
    }
    if !is_hermitian(rho, 1e-10) {
        return Err(Error::validation("density matrix is not Hermitian"));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::validation(format!("density matrix trace {tr} differs from 1")));
    }
    let (vals, vecs) = linalg::eigh(rho);
    let min = vals.first().copied().unwrap_or(0.0);
    if min < -DENSITY_TOL {
        return Err(Error::validation(format!("density matrix has eigenvalue {min:e} < 0")));
    }
    let herm = (rho + rho.adjoint()).scale(0.5);
    if min >= 0.0 {
        return Ok(herm);
    }
    let clamped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let mut out = Operator::zeros(rho.nrows(), rho.ncols());
    for (k, &v) in clamped.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            out += (col * col.adjoint()).scale(v / total);
        }
    }
    Ok(out)
}

/// `tr ρ - tr ρ²` without any validation of `ρ`.
pub fn linear_entropy_raw(rho: &Operator) -> f64 {
    let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
    rho.trace().re - purity
}

/// Linear entropy `S_lin(ρ) = tr(ρ - ρ²)` of a density matrix.
pub fn linear_entropy(rho: &Operator) -> Result<f64> {
    let rho = validate_density(rho)?;
    Ok(linear_entropy_raw(&rho))
}

/// Hilbert-Schmidt inner product `tr(A† B)`.
pub fn hs_inner(a: &Operator, b: &Operator) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn hs_norm(a: &Operator) -> f64 {
    linalg::frobenius(a)
}

/// Sum of singular values.
pub fn trace_norm(a: &Operator) -> f64 {
    if is_hermitian(a, HERMITIAN_TOL) {
        return linalg::eigvalsh(a).iter().map(|v| v.abs()).sum();
    }
    linalg::singular_values(a).iter().sum()
}

/// Largest singular value.
pub fn operator_norm(a: &Operator) -> f64 {
    if is_hermitian(a, HERMITIAN_TOL) {
        return linalg::eigvalsh(a).iter().map(|v| v.abs()).fold(0.0, f64::max);
    }
    linalg::singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn anticommutator(a: &Operator, b: &Operator) -> Operator {
    a * b + b * a
}

/// Column-stacking vectorization: entry `(i, j)` lands at `i + j * d`.
pub fn vec_op(a: &Operator) -> CVector {
    CVector::from_column_slice(a.as_slice())
}

pub fn unvec(v: &CVector, dim: usize) -> Operator {
    Operator::from_column_slice(dim, dim, v.as_slice())
}

/// Unit vector modulo global phase. The stored representative has its first
/// nonzero amplitude real and positive.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm <= f64::MIN_POSITIVE {
            return Err(Error::validation("state vector has zero or non-finite norm"));
        }
        Ok(PureState { amplitudes: gauge_fix(amplitudes.unscale(norm)) })
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amps))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        PureState { amplitudes: v }
    }

    /// Haar-random pure state.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        Self::new(v).expect("Gaussian vector is almost surely nonzero")
    }

    /// Recover the state from a rank-1 projector.
    pub fn from_projector(e: &Operator) -> Result<Self> {
        let d = e.nrows();
        let k = (0..d)
            .max_by(|&i, &j| e[(i, i)].re.total_cmp(&e[(j, j)].re))
            .ok_or_else(|| Error::validation("empty projector"))?;
        let col = e.column(k).into_owned();
        let state = Self::new(col)?;
        let resid = linalg::max_abs(&(state.projector() - e));
        if resid > 1e-8 {
            return Err(Error::validation(format!("operator is not a rank-1 projector (residual {resid:e})")));
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> Operator {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// `|⟨ψ|φ⟩|²`
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    pub fn expectation(&self, a: &Operator) -> C64 {
        self.amplitudes.dotc(&(a * &self.amplitudes))
    }
}

impl serde::Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(self.dim()))?;
        for z in self.amplitudes.iter() {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

impl PartialEq for PureState {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && (1.0 - self.fidelity(other)).abs() <= 1e-12
    }
}

fn gauge_fix(mut v: CVector) -> CVector {
    if let Some(first) = v.iter().find(|z| z.norm() > GAUGE_EPS).copied() {
        let phase = first.conj() / first.norm();
        v *= phase;
    }
    v
}

fn range_vector(e: &Operator, which: &str) -> Result<CVector> {
    PureState::from_projector(e)
        .map(|s| s.amplitudes)
        .map_err(|err| Error::validation(format!("{which}: {err}")))
}

/// Orthogonal projector onto the span of the ranges of two distinct rank-1
/// projectors.
pub fn join_projectors(e: &Operator, f: &Operator) -> Result<Operator> {
    if e.shape() != f.shape() {
        return Err(Error::DimensionMismatch { expected: e.nrows(), found: f.nrows() });
    }
    let u = range_vector(e, "e")?;
    let v = range_vector(f, "f")?;
    let mut w = &v - &u * u.dotc(&v);
    let nw = w.norm();
    if nw <= RANK_TOL {
        return Err(Error::DegenerateInput("e and f coincide; their join is e itself".into()));
    }
    w.unscale_mut(nw);
    Ok(&u * u.adjoint() + &w * w.adjoint())
}

/// Normalized superposition `z1 ψ1 + z2 ψ2` of the states behind two
/// distinct rank-1 projectors, with gauge-fixed representatives.
pub fn superposition(e: &Operator, f: &Operator, z1: C64, z2: C64) -> Result<PureState> {
    if e.shape() != f.shape() {
        return Err(Error::DimensionMismatch { expected: e.nrows(), found: f.nrows() });
    }
    let u = range_vector(e, "e")?;
    let v = range_vector(f, "f")?;
    if u.dotc(&v).norm_sqr() >= 1.0 - 1e-12 {
        return Err(Error::DegenerateInput("e and f coincide".into()));
    }
    superpose_vectors(&u, &v, z1, z2)
}

pub fn superpose_vectors(u: &CVector, v: &CVector, z1: C64, z2: C64) -> Result<PureState> {
    if z1 == ZERO && z2 == ZERO {
        return Err(Error::DegenerateSuperposition { norm: 0.0 });
    }
    let w = u * z1 + v * z2;
    let scale = z1.norm().max(z2.norm());
    let norm = w.norm();
    if norm <= 1e-12 * scale {
        return Err(Error::DegenerateSuperposition { norm });
    }
    PureState::new(w)
}

pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = Operator::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    (&g + g.adjoint()).scale(0.5)
}

/// Random full-rank density matrix (Ginibre ensemble).
pub fn random_density(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = Operator::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}
