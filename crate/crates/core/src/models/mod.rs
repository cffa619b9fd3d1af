//! Concrete generators: the uniformly depolarizing toy model, pointer
//! dynamics, quantum Brownian motion, GRW localization, the SU(1,1)
//! measurement process, and user-supplied jump models.

pub mod davies;
pub mod oscillator;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::liouvillian::{matrix_unit, real_diag, Dissipator, LindbladGenerator, PositionKernel};
use crate::operator::{self, Operator};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use davies::{davies_default, davies_model, nearest_su11_coherent, su11_coherent_state, DaviesModel, DiscQuadrature};
pub use oscillator::{harmonic_coherent_state, qbm_model, squeezed_vacuum, QbmParams};

/// `L(ρ) = -i[H, ρ] + (tr ρ) I - 2ρ` on a qubit.
pub fn toy_model(h: Operator) -> Result<LindbladGenerator> {
    if h.shape() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: 2, found: h.nrows() });
    }
    let jumps = (0..2).flat_map(|i| (0..2).map(move |j| matrix_unit(2, i, j))).collect();
    LindbladGenerator::with_jumps(h, jumps)
}

/// `L(ρ) = -i[H, ρ] + Σ P_i ρ P_i - ½{P, ρ}` with `P_i = |i⟩⟨i|` and
/// `H = diag(E)`.
pub fn pointer_model(energies: &[f64]) -> Result<LindbladGenerator> {
    let d = energies.len();
    if d < 2 {
        return Err(Error::config("model.energies", "need at least two levels"));
    }
    let jumps = (0..d).map(|i| matrix_unit(d, i, i)).collect();
    LindbladGenerator::with_jumps(real_diag(energies), jumps)
}

/// `exp(-α(x - y)² / 2)` on the grid.
pub fn gaussian_kernel(grid: &[f64], alpha: f64) -> DMatrix<f64> {
    let d = grid.len();
    DMatrix::from_fn(d, d, |i, j| (-0.5 * alpha * (grid[i] - grid[j]).powi(2)).exp())
}

/// GRW localization on a position grid:
/// `(L_D ρ)(x, y) = κ[e^{-α(x-y)²/2} - 1] ρ(x, y)`. With `mass` set the
/// Hamiltonian is the three-point kinetic energy `-∇²/2m` with Dirichlet
/// ends; otherwise `H = 0`.
pub fn grw_model(grid: &[f64], kappa: f64, alpha: f64, mass: Option<f64>) -> Result<LindbladGenerator> {
    let d = grid.len();
    if d < 2 {
        return Err(Error::config("model.grid", "need at least two points"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config("model.grid", "must be strictly increasing"));
    }
    if !(kappa > 0.0) {
        return Err(Error::config("model.kappa", format!("must be positive, got {kappa}")));
    }
    if !(alpha > 0.0) {
        return Err(Error::config("model.alpha", format!("must be positive, got {alpha}")));
    }
    let mut h = Operator::zeros(d, d);
    if let Some(m) = mass {
        if !(m > 0.0) {
            return Err(Error::config("model.mass", format!("must be positive, got {m}")));
        }
        let dx = (grid[d - 1] - grid[0]) / (d - 1) as f64;
        let c = 1.0 / (2.0 * m * dx * dx);
        for i in 0..d {
            h[(i, i)] = C64::new(2.0 * c, 0.0);
            if i + 1 < d {
                h[(i, i + 1)] = C64::new(-c, 0.0);
                h[(i + 1, i)] = C64::new(-c, 0.0);
            }
        }
    }
    let kernel = PositionKernel { rate: kappa, kernel: gaussian_kernel(grid, alpha) };
    LindbladGenerator::new(h, Dissipator::Kernel(kernel))
}

/// `κ[1 - Σ_jk p_j p_k e^{-α(x_j - x_k)²/2}]`, the closed form of λ for GRW.
pub fn grw_lambda_formula(grid: &[f64], kappa: f64, alpha: f64, probabilities: &[f64]) -> f64 {
    let mut s = 0.0;
    for (j, &pj) in probabilities.iter().enumerate() {
        for (k, &pk) in probabilities.iter().enumerate() {
            s += pj * pk * (-0.5 * alpha * (grid[j] - grid[k]).powi(2)).exp();
        }
    }
    kappa * (1.0 - s)
}

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

pub fn matrix_from_spec(spec: &MatrixSpec, path: &str) -> Result<Operator> {
    let d = spec.len();
    if d == 0 {
        return Err(Error::config(path, "matrix is empty"));
    }
    if let Some((i, _)) = spec.iter().enumerate().find(|(_, row)| row.len() != d) {
        return Err(Error::config(format!("{path}[{i}]"), format!("row length must be {d}")));
    }
    Ok(Operator::from_fn(d, d, |i, j| C64::new(spec[i][j][0], spec[i][j][1])))
}

pub fn matrix_to_spec(a: &Operator) -> MatrixSpec {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect()).collect()
}

/// Grid positions, either listed or evenly spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<f64>),
    Uniform { start: f64, stop: f64, points: usize },
}

impl GridSpec {
    pub fn positions(&self) -> Vec<f64> {
        match self {
            GridSpec::Points(p) => p.clone(),
            GridSpec::Uniform { start, stop, points } => {
                let n = *points;
                if n < 2 {
                    return vec![*start; n];
                }
                (0..n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect()
            }
        }
    }
}

fn default_qbm_cutoff() -> usize {
    30
}
fn default_diffusion() -> f64 {
    0.01
}
fn default_one() -> f64 {
    1.0
}
fn default_davies_cutoff() -> usize {
    40
}
fn default_grid() -> GridSpec {
    GridSpec::Uniform { start: -4.0, stop: 4.0, points: 32 }
}

/// Model selection as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Toy {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hamiltonian: Option<MatrixSpec>,
    },
    Pointer {
        energies: Vec<f64>,
    },
    Qbm {
        #[serde(default = "default_qbm_cutoff")]
        cutoff: usize,
        #[serde(default = "default_diffusion")]
        diffusion: f64,
        #[serde(default = "default_one")]
        omega: f64,
    },
    Grw {
        #[serde(default = "default_grid")]
        grid: GridSpec,
        #[serde(default = "default_one")]
        kappa: f64,
        #[serde(default = "default_one")]
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
    },
    Davies {
        #[serde(default = "default_davies_cutoff")]
        cutoff: usize,
        #[serde(default = "default_one")]
        kappa: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        energies: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_r: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_theta: Option<usize>,
        #[serde(default = "default_one")]
        r_max: f64,
    },
    Custom {
        hamiltonian: MatrixSpec,
        #[serde(default)]
        jumps: Vec<MatrixSpec>,
    },
}

/// One line per built-in model: name and parameter schema.
pub const MODEL_SCHEMAS: &[(&str, &str)] = &[
    ("toy", "hamiltonian?: 2x2 matrix of [re, im] (default 0)"),
    ("pointer", "energies: [f64] (length d >= 2)"),
    ("qbm", "cutoff: int >= 2 (30), diffusion: f64 > 0 (0.01), omega: f64 > 0 (1)"),
    ("grw", "grid: [f64] | {start, stop, points} ({-4, 4, 32}), kappa > 0 (1), alpha > 0 (1), mass?: f64 > 0"),
    ("davies", "cutoff: int >= 2 (40), kappa > 0 (1), energies?: [f64] (0..N-1), n_r?: int (2N+8), n_theta?: int (2N+8), r_max: (0, 1] (1)"),
    ("custom", "hamiltonian: dxd matrix of [re, im], jumps: [dxd matrix]"),
];

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Toy { .. } => "toy",
            ModelSpec::Pointer { .. } => "pointer",
            ModelSpec::Qbm { .. } => "qbm",
            ModelSpec::Grw { .. } => "grw",
            ModelSpec::Davies { .. } => "davies",
            ModelSpec::Custom { .. } => "custom",
        }
    }

    /// Parameter checks with field paths rooted at `model`.
    pub fn validate(&self) -> Result<()> {
        fn positive(path: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(path, format!("must be positive, got {v}")))
            }
        }
        match self {
            ModelSpec::Toy { hamiltonian } => {
                if let Some(h) = hamiltonian {
                    let m = matrix_from_spec(h, "model.hamiltonian")?;
                    if m.nrows() != 2 {
                        return Err(Error::config("model.hamiltonian", "must be 2x2"));
                    }
                    check_hermitian(&m, "model.hamiltonian")?;
                }
            }
            ModelSpec::Pointer { energies } => {
                if energies.len() < 2 {
                    return Err(Error::config("model.energies", "need at least two levels"));
                }
                if energies.iter().any(|e| !e.is_finite()) {
                    return Err(Error::config("model.energies", "must be finite"));
                }
            }
            ModelSpec::Qbm { cutoff, diffusion, omega } => {
                if *cutoff < 2 {
                    return Err(Error::config("model.cutoff", "must be at least 2"));
                }
                positive("model.diffusion", *diffusion)?;
                positive("model.omega", *omega)?;
            }
            ModelSpec::Grw { grid, kappa, alpha, mass } => {
                let g = grid.positions();
                if g.len() < 2 {
                    return Err(Error::config("model.grid", "need at least two points"));
                }
                if g.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::config("model.grid", "must be strictly increasing"));
                }
                positive("model.kappa", *kappa)?;
                positive("model.alpha", *alpha)?;
                if let Some(m) = mass {
                    positive("model.mass", *m)?;
                }
            }
            ModelSpec::Davies { cutoff, kappa, energies, n_r, n_theta, r_max } => {
                positive("model.kappa", *kappa)?;
                if *cutoff < 2 {
                    return Err(Error::config("model.cutoff", "must be at least 2"));
                }
                if let Some(e) = energies {
                    if e.len() != *cutoff {
                        return Err(Error::config("model.energies", format!("length must equal cutoff {cutoff}")));
                    }
                }
                if n_r == &Some(0) {
                    return Err(Error::config("model.n_r", "must be positive"));
                }
                if n_theta == &Some(0) {
                    return Err(Error::config("model.n_theta", "must be positive"));
                }
                if !(*r_max > 0.0 && *r_max <= 1.0) {
                    return Err(Error::config("model.r_max", format!("must lie in (0, 1], got {r_max}")));
                }
            }
            ModelSpec::Custom { hamiltonian, jumps } => {
                let h = matrix_from_spec(hamiltonian, "model.hamiltonian")?;
                check_hermitian(&h, "model.hamiltonian")?;
                for (k, j) in jumps.iter().enumerate() {
                    let path = format!("model.jumps[{k}]");
                    let m = matrix_from_spec(j, &path)?;
                    if m.nrows() != h.nrows() {
                        return Err(Error::config(path, format!("dimension must be {}", h.nrows())));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<LindbladGenerator> {
        self.validate()?;
        match self {
            ModelSpec::Toy { hamiltonian } => {
                let h = match hamiltonian {
                    Some(h) => matrix_from_spec(h, "model.hamiltonian")?,
                    None => Operator::zeros(2, 2),
                };
                toy_model(h)
            }
            ModelSpec::Pointer { energies } => pointer_model(energies),
            ModelSpec::Qbm { cutoff, diffusion, omega } => {
                qbm_model(QbmParams { cutoff: *cutoff, diffusion: *diffusion, omega: *omega })
            }
            ModelSpec::Grw { grid, kappa, alpha, mass } => grw_model(&grid.positions(), *kappa, *alpha, *mass),
            ModelSpec::Davies { cutoff, kappa, energies, n_r, n_theta, r_max } => {
                let n = *cutoff;
                let e = energies.clone().unwrap_or_else(|| (0..n).map(|k| k as f64).collect());
                let quad = DiscQuadrature::new(*r_max, n_r.unwrap_or(2 * n + 8), n_theta.unwrap_or(2 * n + 8))?;
                Ok(davies_model(n, *kappa, &e, &quad)?.generator)
            }
            ModelSpec::Custom { hamiltonian, jumps } => {
                let h = matrix_from_spec(hamiltonian, "model.hamiltonian")?;
                let js = jumps
                    .iter()
                    .enumerate()
                    .map(|(k, j)| matrix_from_spec(j, &format!("model.jumps[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                LindbladGenerator::with_jumps(h, js)
            }
        }
    }
}

fn check_hermitian(m: &Operator, path: &str) -> Result<()> {
    if operator::is_hermitian(m, operator::HERMITIAN_TOL) || linalg::max_abs(m) == 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, "must be Hermitian"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::eis_check;
    use crate::operator::PureState;
    use crate::sieve::lambda_pure;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toy_lambda_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gen = toy_model(operator::random_hermitian(2, &mut rng)).unwrap();
        for _ in 0..50 {
            assert!((lambda_pure(&gen, &PureState::random(2, &mut rng)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grw_two_point_superposition() {
        let grid: Vec<f64> = (0..10).map(|k| 0.5 * k as f64).collect();
        let (kappa, alpha) = (0.8, 1.7);
        let gen = grw_model(&grid, kappa, alpha, None).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 10];
        v[2] = C64::new(1.0, 0.0);
        v[6] = C64::new(0.0, 1.0);
        let s = 2.0;
        let want = 0.5 * kappa * (1.0 - (-alpha * s * s / 2.0).exp());
        assert!((lambda_pure(&gen, &PureState::from_slice(&v).unwrap()) - want).abs() < 1e-14);
        assert!(lambda_pure(&gen, &PureState::basis(10, 4)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_kernel_is_psd() {
        let grid: Vec<f64> = (0..40).map(|k| -3.0 + 0.15 * k as f64).collect();
        let k = gaussian_kernel(&grid, 2.0).map(|x| C64::new(x, 0.0));
        assert!(linalg::eigvalsh(&k)[0] >= -1e-12);
    }

    #[test]
    fn built_in_models_are_environment_induced() {
        let specs = [
            ModelSpec::Toy { hamiltonian: None },
            ModelSpec::Pointer { energies: vec![0.0, 0.5, 1.7] },
            ModelSpec::Qbm { cutoff: 8, diffusion: 0.1, omega: 1.0 },
            ModelSpec::Grw { grid: GridSpec::Uniform { start: -2.0, stop: 2.0, points: 8 }, kappa: 1.0, alpha: 1.0, mass: Some(1.0) },
            ModelSpec::Davies { cutoff: 6, kappa: 1.0, energies: None, n_r: None, n_theta: None, r_max: 1.0 },
        ];
        for spec in &specs {
            let gen = spec.build().unwrap();
            let r = eis_check(&gen, 6, &[0.1, 1.0, 5.0], 2);
            assert!(r.passed, "{}: {r:?}", spec.name());
        }
    }

    #[test]
    fn spec_round_trip_and_validation() {
        let spec: ModelSpec = serde_json::from_str(r#"{"type":"pointer","energies":[0.0,1.0,2.5]}"#).unwrap();
        assert_eq!(spec, ModelSpec::Pointer { energies: vec![0.0, 1.0, 2.5] });
        let spec: ModelSpec = serde_json::from_str(r#"{"type":"davies","kappa":-1}"#).unwrap();
        match spec.validate() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "model.kappa"),
            other => panic!("{other:?}"),
        }
        assert!(serde_json::from_str::<ModelSpec>(r#"{"type":"pointer","energies":[0.0],"bogus":1}"#).is_err());
        assert!(serde_json::from_str::<ModelSpec>(r#"{"type":"nonsense"}"#).is_err());
    }

    #[test]
    fn coarse_quadrature_is_rejected_with_moment_name() {
        let quad = DiscQuadrature::new(0.95, 60, 64).unwrap();
        match davies_model(10, 1.0, &vec![0.0; 10], &quad) {
            Err(Error::Quadrature { moment, .. }) => assert!(moment.contains("n = 0")),
            other => panic!("{other:?}"),
        }
    }
}
