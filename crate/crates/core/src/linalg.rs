//! Dense complex linear algebra used throughout the crate: fast products,
//! the matrix exponential, Hermitian eigendecomposition and an ordered
//! complex Schur form with invariant-subspace separation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

const GEMM_THRESHOLD: usize = 24;

/// Matrix product; large operands go through the packed `zgemm` kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    if m.min(k).min(n) < GEMM_THRESHOLD {
        return a * b;
    }
    let mut c = CMatrix::zeros(m, n);
    // SAFETY: nalgebra dense storage is contiguous column-major, and
    // `Complex64` is `repr(C)` with layout identical to `[f64; 2]`. The
    // strides below describe exactly the m×k, k×n and m×n buffers, and `c`
    // is freshly allocated so it does not alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

pub fn one_norm(a: &CMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm, which is the Hilbert-Schmidt norm of an operator.
pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// Padé coefficients and 1-norm thresholds of Higham's scaling and squaring.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3, 5, 7, 9 or 13.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm: matrix must be square");
    let n = a.nrows();
    let ident = CMatrix::identity(n, n);
    let norm = one_norm(a);
    if norm == 0.0 {
        return ident;
    }
    for &(m, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            return pade_low(a, b, &ident);
        }
    }
    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scaled = a.scale(0.5f64.powi(s));
    let mut r = pade13(&scaled, &ident);
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    r
}

fn pade_low(a: &CMatrix, b: &[f64], ident: &CMatrix) -> CMatrix {
    let a2 = matmul(a, a);
    let mut u_inner = ident.scale(b[1]);
    let mut v = ident.scale(b[0]);
    let mut power = ident.clone();
    let mut k = 2;
    while k < b.len() {
        power = matmul(&power, &a2);
        v += power.scale(b[k]);
        u_inner += power.scale(b[k + 1]);
        k += 2;
    }
    let u = matmul(a, &u_inner);
    solve_pade(&u, &v)
}

fn pade13(a: &CMatrix, ident: &CMatrix) -> CMatrix {
    let b = &PADE13;
    let a2 = matmul(a, a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);
    let inner_u = a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]);
    let u = matmul(
        a,
        &(matmul(&a6, &inner_u) + a6.scale(b[7]) + a4.scale(b[5]) + a2.scale(b[3]) + ident.scale(b[1])),
    );
    let inner_v = a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]);
    let v = matmul(&a6, &inner_v) + a6.scale(b[6]) + a4.scale(b[4]) + a2.scale(b[2]) + ident.scale(b[0]);
    solve_pade(&u, &v)
}

fn solve_pade(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).expect("Padé denominator is singular")
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending
/// order. Only the Hermitian part of `a` is used.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(a.nrows(), a.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(a: &CMatrix) -> Vec<f64> {
    eigh(a).0
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthonormal basis of the right null space: right singular vectors whose
/// singular value is at most `tol`.
pub fn null_space(a: &CMatrix, tol: f64) -> Vec<CVector> {
    let n = a.ncols();
    let padded = if a.nrows() < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    (0..n)
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

/// Gram-Schmidt (twice) orthonormalization; vectors whose residual norm
/// falls below `tol` are dropped.
pub fn orthonormalize(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let nrm = w.norm();
        if nrm > tol {
            basis.push(w.unscale(nrm));
        }
    }
    basis
}

/// Complex Schur form `A = Q T Q†` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct ComplexSchur {
    pub q: CMatrix,
    pub t: CMatrix,
}

impl ComplexSchur {
    pub fn new(a: &CMatrix) -> Self {
        let (mut q, mut t) = nalgebra::Schur::new(a.clone()).unpack();
        let n = t.nrows();
        // Split any 2×2 bumps the iteration leaves on the subdiagonal.
        let scale = max_abs(&t).max(f64::MIN_POSITIVE);
        for k in 0..n.saturating_sub(1) {
            if t[(k + 1, k)].norm() > 1e-14 * scale {
                split_bump(&mut t, &mut q, k);
            }
            t[(k + 1, k)] = ZERO;
        }
        for j in 0..n {
            for i in (j + 2)..n {
                t[(i, j)] = ZERO;
            }
        }
        ComplexSchur { q, t }
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Swap the diagonal entries at `k` and `k + 1` with a Givens rotation.
    pub fn swap(&mut self, k: usize) {
        let n = self.t.nrows();
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        for j in (k + 2)..n {
            let x = self.t[(k, j)];
            let y = self.t[(k + 1, j)];
            self.t[(k, j)] = x * c + s * y;
            self.t[(k + 1, j)] = y * c - s.conj() * x;
        }
        for i in 0..k {
            let x = self.t[(i, k)];
            let y = self.t[(i, k + 1)];
            self.t[(i, k)] = x * c + s.conj() * y;
            self.t[(i, k + 1)] = y * c - s * x;
        }
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
        for i in 0..n {
            let x = self.q[(i, k)];
            let y = self.q[(i, k + 1)];
            self.q[(i, k)] = x * c + s.conj() * y;
            self.q[(i, k + 1)] = y * c - s * x;
        }
    }

    /// Reorder so that the selected eigenvalues lead the diagonal, sorted by
    /// `key` among themselves. Returns the number selected.
    pub fn reorder<F, K>(&mut self, select: F, key: K) -> usize
    where
        F: Fn(C64) -> bool,
        K: Fn(C64) -> f64,
    {
        let n = self.t.nrows();
        let mut count = 0;
        // Repeatedly bubble the selected entry with the smallest key into
        // position `count`.
        loop {
            let mut best: Option<(usize, f64)> = None;
            for i in count..n {
                let z = self.t[(i, i)];
                if select(z) {
                    let kz = key(z);
                    if best.is_none_or(|(_, kb)| kz < kb) {
                        best = Some((i, kz));
                    }
                }
            }
            let Some((mut pos, _)) = best else { break };
            while pos > count {
                self.swap(pos - 1);
                pos -= 1;
            }
            count += 1;
        }
        count
    }

    /// Solve `T11 X - X T22 = -T12` for the leading `k` block; `[I -X; 0 0]`
    /// is then the spectral projector onto the leading invariant subspace
    /// in Schur coordinates.
    pub fn separation(&self, k: usize) -> CMatrix {
        let n = self.t.nrows();
        let m = n - k;
        let mut x = CMatrix::zeros(k, m);
        for j in 0..m {
            let shift = self.t[(k + j, k + j)];
            let mut rhs: CVector = -self.t.view((0, k + j), (k, 1)).column(0).into_owned();
            for i in 0..j {
                let tij = self.t[(k + i, k + j)];
                if tij != ZERO {
                    rhs += x.column(i) * tij;
                }
            }
            // Back substitution with (T11 - shift I).
            for r in (0..k).rev() {
                let mut acc = rhs[r];
                for c in (r + 1)..k {
                    acc -= self.t[(r, c)] * x[(c, j)];
                }
                let piv = self.t[(r, r)] - shift;
                x[(r, j)] = acc / piv;
            }
        }
        x
    }
}

fn givens(f: C64, g: C64) -> (f64, C64) {
    if g == ZERO {
        return (1.0, ZERO);
    }
    if f == ZERO {
        return (0.0, g.conj() / g.norm());
    }
    let fa = f.norm();
    let norm = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = fa / norm;
    let s = (f / fa) * g.conj() / norm;
    (c, s)
}

fn split_bump(t: &mut CMatrix, q: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let mu = (tr + disc) * 0.5;
    // Eigenvector of the 2×2 block for `mu`.
    let (v0, v1) = if (mu - d).norm() > (mu - a).norm() { (mu - d, c) } else { (b, mu - a) };
    let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    let (v0, v1) = (v0 / nv, v1 / nv);
    // G = [v, v⊥] unitary.
    let g = [[v0, -v1.conj()], [v1, v0.conj()]];
    for j in 0..n {
        let x = t[(k, j)];
        let y = t[(k + 1, j)];
        t[(k, j)] = g[0][0].conj() * x + g[1][0].conj() * y;
        t[(k + 1, j)] = g[0][1].conj() * x + g[1][1].conj() * y;
    }
    for i in 0..n {
        let x = t[(i, k)];
        let y = t[(i, k + 1)];
        t[(i, k)] = x * g[0][0] + y * g[1][0];
        t[(i, k + 1)] = x * g[0][1] + y * g[1][1];
        let x = q[(i, k)];
        let y = q[(i, k + 1)];
        q[(i, k)] = x * g[0][0] + y * g[1][0];
        q[(i, k + 1)] = x * g[0][1] + y * g[1][1];
    }
}
